#pragma once

#include <cstddef>
#include <functional>
#include <vector>

namespace vns {

using LinearMap = std::function<void(const std::vector<double>& in, std::vector<double>& out)>;

struct GmresOptions {
  double rel_tol = 1e-12;
  double abs_tol = 1e-300;
  std::size_t restart = 60;
  std::size_t max_iter = 600;
};

struct GmresResult {
  std::size_t iterations = 0;
  double residual = 0;  ///< final relative residual ||b - A x|| / ||b||
  bool converged = false;
};

/// Restarted GMRES with right preconditioning M: solves A x = b, x holds the
/// initial guess on entry. Modified Gram-Schmidt, Givens rotations.
GmresResult gmres(const LinearMap& A, const LinearMap& M, const std::vector<double>& b, std::vector<double>& x,
                  const GmresOptions& opt = {});

}  // namespace vns
