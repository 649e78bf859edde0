#include "nem/snapshot.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>
#include <vector>

namespace nem {
namespace {

static_assert(std::endian::native == std::endian::little, "snapshot I/O assumes a little-endian host");

template <typename T>
void put(std::ostream& out, T v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
T get(std::istream& in) {
  T v{};
  if (!in.read(reinterpret_cast<char*>(&v), sizeof(T))) throw SnapshotError("snapshot: truncated input");
  return v;
}

}  // namespace

MapSnapshot snapshot_of(const GaussianMap& map) {
  MapSnapshot s;
  s.n = map.n();
  s.d = map.d();
  s.seed = map.seed();
  s.xi = map.xi();
  return s;
}

GaussianMap restore(const MapSnapshot& snap, const MapOptions& options) {
  return GaussianMap::sample(snap.xi, snap.n, snap.d, snap.seed, options);
}

void write_snapshot(std::ostream& out, const MapSnapshot& snap) {
  out.write(MapSnapshot::kMagic, sizeof(MapSnapshot::kMagic));
  put<std::uint32_t>(out, MapSnapshot::kVersion);
  put<std::int32_t>(out, snap.n);
  put<std::int32_t>(out, snap.d);
  put<std::uint64_t>(out, snap.seed);
  const auto& c = snap.xi.coeffs();
  put<std::uint32_t>(out, static_cast<std::uint32_t>(c.size()));
  for (double v : c) put<double>(out, v);
  if (!out) throw SnapshotError("snapshot: write failed");
}

MapSnapshot read_snapshot(std::istream& in) {
  char magic[sizeof(MapSnapshot::kMagic)];
  if (!in.read(magic, sizeof(magic)) || std::memcmp(magic, MapSnapshot::kMagic, sizeof(magic)) != 0)
    throw SnapshotError("snapshot: bad magic");
  const auto version = get<std::uint32_t>(in);
  if (version != MapSnapshot::kVersion) throw SnapshotError("snapshot: unsupported version " + std::to_string(version));
  MapSnapshot s;
  s.n = get<std::int32_t>(in);
  s.d = get<std::int32_t>(in);
  s.seed = get<std::uint64_t>(in);
  const auto count = get<std::uint32_t>(in);
  if (count == 0 || count > 4096) throw SnapshotError("snapshot: bad coefficient count");
  std::vector<double> c(count);
  for (double& v : c) v = get<double>(in);
  if (s.n < 1 || s.d < 1) throw SnapshotError("snapshot: bad dimensions");
  try {
    s.xi = MixtureXi(std::move(c));
  } catch (const std::invalid_argument& e) {
    throw SnapshotError(std::string("snapshot: ") + e.what());
  }
  return s;
}

void save_snapshot(const std::string& path, const MapSnapshot& snap) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw SnapshotError("snapshot: cannot open " + path);
  write_snapshot(out, snap);
}

MapSnapshot load_snapshot(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw SnapshotError("snapshot: cannot open " + path);
  return read_snapshot(in);
}

}  // namespace nem
