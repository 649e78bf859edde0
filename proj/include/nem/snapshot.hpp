#pragma once

#include "nem/gaussian_map.hpp"

#include <cstdint>
#include <iosfwd>
#include <stdexcept>
#include <string>

namespace nem {

class SnapshotError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Header of a stored map. There is no payload: couplings are pure functions of the seed.
struct MapSnapshot {
  static constexpr char kMagic[8] = {'N', 'E', 'M', 'M', 'A', 'P', '\0', '\0'};
  static constexpr std::uint32_t kVersion = 1;

  std::int32_t n = 0;
  std::int32_t d = 0;
  std::uint64_t seed = 0;
  MixtureXi xi;
};

MapSnapshot snapshot_of(const GaussianMap& map);
GaussianMap restore(const MapSnapshot& snap, const MapOptions& options = {});

/// Little-endian layout: magic[8], version u32, n i32, d i32, seed u64, count u32, coeffs f64[count].
void write_snapshot(std::ostream& out, const MapSnapshot& snap);
MapSnapshot read_snapshot(std::istream& in);

void save_snapshot(const std::string& path, const MapSnapshot& snap);
MapSnapshot load_snapshot(const std::string& path);

}  // namespace nem
