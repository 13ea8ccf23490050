#pragma once

#include "vns/grid.hpp"

#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <vector>

namespace vns {

enum class FieldRole : std::uint32_t { other = 0, rho = 1, vphi = 2, phi = 3, velocity = 4 };

/// Binary field file: 40-byte little-endian header
///   "VNSF" | u32 version | u32 dim | u32 n | f64 L | u32 role | u32 components | f64 time
/// followed by components * n^dim little-endian doubles, component-major,
/// each component row-major.
struct Snapshot {
  Grid grid;
  FieldRole role = FieldRole::other;
  double time = 0.0;
  std::vector<ScalarField> components;
};

inline constexpr std::uint32_t kSnapshotVersion = 1;
inline constexpr std::size_t kSnapshotHeaderBytes = 40;

class SnapshotError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

[[nodiscard]] std::vector<unsigned char> encode_snapshot(const Snapshot& snap);
[[nodiscard]] Snapshot decode_snapshot(const std::vector<unsigned char>& bytes);

void write_snapshot(const std::filesystem::path& path, const Snapshot& snap);
[[nodiscard]] Snapshot read_snapshot(const std::filesystem::path& path);

[[nodiscard]] Snapshot make_snapshot(const ScalarField& f, FieldRole role, double time);
[[nodiscard]] Snapshot make_snapshot(const VectorField& u, double time);

}  // namespace vns
