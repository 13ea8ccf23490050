#pragma once

#include "vns/config.hpp"

#include <cstdint>
#include <filesystem>
#include <optional>
#include <ostream>
#include <string>
#include <string_view>

namespace vns {

enum class ExitCode : int { success = 0, validation = 1, solver = 2, io = 3 };

struct CliOptions {
  std::filesystem::path config;
  std::optional<std::filesystem::path> out;
  int workers = 1;
  std::optional<std::uint64_t> seed;
  bool snapshots = false;
};

/// Hash of content as git stores a blob: sha1("blob <size>\0" + content), hex.
[[nodiscard]] std::string git_blob_hash(std::string_view content);

/// Constraint name as printed in reports, e.g. "δ2 ≥ (5/2)δ1 − 3/2".
[[nodiscard]] std::string constraint_label(Constraint c);

struct ValidationReport {
  bool ok = true;
  std::string first_violation;  ///< empty when ok
  std::string text;             ///< human-readable report
};

/// Parameter constraints with margins, a1, m, the density cap, initial-data
/// compatibility, support margin and a horizon preview.
[[nodiscard]] ValidationReport validate_config(const RunConfig& cfg);

struct RunOutcome {
  ExitCode code = ExitCode::success;
  std::string status;  ///< ok | rejected | failed | io-error
  std::string message;
  double t_valid = 0;
  double c3 = 0;
  double m = 0;
  double T_star_star = 0;
  bool converged = false;
  std::string input_hash;
};

/// Full pipeline for one configuration; writes the bundle into out_dir.
[[nodiscard]] RunOutcome execute_run(const RunConfig& cfg, const std::filesystem::path& out_dir, std::ostream& log);

int cmd_validate(const CliOptions& opt, std::ostream& out, std::ostream& err);
int cmd_run(const CliOptions& opt, std::ostream& out, std::ostream& err);
int cmd_sweep(const CliOptions& opt, std::ostream& out, std::ostream& err);
int cmd_mms(const CliOptions& opt, std::ostream& out, std::ostream& err);
int cmd_oracle_compare(const CliOptions& opt, std::ostream& out, std::ostream& err);

}  // namespace vns
