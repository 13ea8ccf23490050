#include "vns/snapshot.hpp"

#include <algorithm>
#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>

namespace vns {

namespace {

template <class T>
void put(std::vector<unsigned char>& out, T value) {
  unsigned char b[sizeof(T)];
  std::memcpy(b, &value, sizeof(T));
  if constexpr (std::endian::native == std::endian::big) std::reverse(std::begin(b), std::end(b));
  out.insert(out.end(), std::begin(b), std::end(b));
}

template <class T>
T get(const std::vector<unsigned char>& in, std::size_t& pos) {
  if (pos + sizeof(T) > in.size()) throw SnapshotError("snapshot truncated");
  unsigned char b[sizeof(T)];
  std::memcpy(b, in.data() + pos, sizeof(T));
  if constexpr (std::endian::native == std::endian::big) std::reverse(std::begin(b), std::end(b));
  pos += sizeof(T);
  T value;
  std::memcpy(&value, b, sizeof(T));
  return value;
}

}  // namespace

std::vector<unsigned char> encode_snapshot(const Snapshot& snap) {
  std::vector<unsigned char> out;
  out.reserve(kSnapshotHeaderBytes + snap.components.size() * snap.grid.size() * 8);
  for (const char ch : {'V', 'N', 'S', 'F'}) out.push_back(static_cast<unsigned char>(ch));
  put<std::uint32_t>(out, kSnapshotVersion);
  put<std::uint32_t>(out, static_cast<std::uint32_t>(snap.grid.dim()));
  put<std::uint32_t>(out, static_cast<std::uint32_t>(snap.grid.n()));
  put<double>(out, snap.grid.box_length());
  put<std::uint32_t>(out, static_cast<std::uint32_t>(snap.role));
  put<std::uint32_t>(out, static_cast<std::uint32_t>(snap.components.size()));
  put<double>(out, snap.time);
  for (const auto& c : snap.components) {
    require_same_grid(c.grid(), snap.grid);
    for (double v : c.values()) put<double>(out, v);
  }
  return out;
}

Snapshot decode_snapshot(const std::vector<unsigned char>& bytes) {
  if (bytes.size() < kSnapshotHeaderBytes || std::memcmp(bytes.data(), "VNSF", 4) != 0) {
    throw SnapshotError("not a field snapshot");
  }
  std::size_t pos = 4;
  const auto version = get<std::uint32_t>(bytes, pos);
  if (version != kSnapshotVersion) throw SnapshotError("unsupported snapshot version " + std::to_string(version));
  const auto dim = get<std::uint32_t>(bytes, pos);
  const auto n = get<std::uint32_t>(bytes, pos);
  const auto length = get<double>(bytes, pos);
  const auto role = get<std::uint32_t>(bytes, pos);
  const auto ncomp = get<std::uint32_t>(bytes, pos);
  const auto time = get<double>(bytes, pos);
  if (role > 4) throw SnapshotError("unknown role tag");
  Snapshot snap;
  try {
    snap.grid = Grid(static_cast<int>(dim), static_cast<int>(n), length);
  } catch (const std::exception& e) {
    throw SnapshotError(std::string("bad snapshot grid: ") + e.what());
  }
  snap.role = static_cast<FieldRole>(role);
  snap.time = time;
  const std::size_t count = snap.grid.size();
  if (bytes.size() != kSnapshotHeaderBytes + static_cast<std::size_t>(ncomp) * count * 8) {
    throw SnapshotError("snapshot size does not match its header");
  }
  for (std::uint32_t c = 0; c < ncomp; ++c) {
    std::vector<double> values(count);
    for (auto& v : values) v = get<double>(bytes, pos);
    try {
      snap.components.emplace_back(snap.grid, std::move(values));
    } catch (const std::exception& e) {
      throw SnapshotError(std::string("bad snapshot data: ") + e.what());
    }
  }
  return snap;
}

void write_snapshot(const std::filesystem::path& path, const Snapshot& snap) {
  const auto bytes = encode_snapshot(snap);
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw SnapshotError("cannot open " + path.string() + " for writing");
  os.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!os) throw SnapshotError("write failed for " + path.string());
}

Snapshot read_snapshot(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw SnapshotError("cannot open " + path.string());
  std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(is)), std::istreambuf_iterator<char>());
  return decode_snapshot(bytes);
}

Snapshot make_snapshot(const ScalarField& f, FieldRole role, double time) {
  return Snapshot{f.grid(), role, time, {f}};
}

Snapshot make_snapshot(const VectorField& u, double time) {
  Snapshot s{u.grid(), FieldRole::velocity, time, {}};
  for (int d = 0; d < u.dim(); ++d) s.components.push_back(u[d]);
  return s;
}

}  // namespace vns
