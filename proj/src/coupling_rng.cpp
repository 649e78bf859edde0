#include "nem/coupling_rng.hpp"

#include <cmath>
#include <numbers>

namespace nem {
namespace {

constexpr std::uint32_t kMul0 = 0xD2511F53u;
constexpr std::uint32_t kMul1 = 0xCD9E8D57u;
constexpr std::uint32_t kWeyl0 = 0x9E3779B9u;
constexpr std::uint32_t kWeyl1 = 0xBB67AE85u;

inline void mulhilo(std::uint32_t a, std::uint32_t b, std::uint32_t& hi, std::uint32_t& lo) {
  const std::uint64_t p = static_cast<std::uint64_t>(a) * b;
  hi = static_cast<std::uint32_t>(p >> 32);
  lo = static_cast<std::uint32_t>(p);
}

inline double to_unit(std::uint32_t hi, std::uint32_t lo) {
  const std::uint64_t bits = (static_cast<std::uint64_t>(hi) << 32) | lo;
  // (0, 1]: never zero so the logarithm below stays finite.
  return (static_cast<double>(bits >> 11) + 1.0) * 0x1.0p-53;
}

inline void box_muller_pair(std::uint64_t seed, int order, std::uint64_t equation,
                            std::uint64_t pair, double& c, double& s) {
  const std::array<std::uint32_t, 4> ctr = {
      static_cast<std::uint32_t>(pair), static_cast<std::uint32_t>(pair >> 32),
      static_cast<std::uint32_t>(equation),
      (static_cast<std::uint32_t>(equation >> 32) << 8) ^ static_cast<std::uint32_t>(order)};
  const std::array<std::uint32_t, 2> key = {static_cast<std::uint32_t>(seed),
                                            static_cast<std::uint32_t>(seed >> 32)};
  const auto r = philox4x32(ctr, key);
  const double u1 = to_unit(r[0], r[1]);
  const double u2 = to_unit(r[2], r[3]);
  const double radius = std::sqrt(-2.0 * std::log(u1));
  const double angle = 2.0 * std::numbers::pi * u2;
  c = radius * std::cos(angle);
  s = radius * std::sin(angle);
}

}  // namespace

std::array<std::uint32_t, 4> philox4x32(std::array<std::uint32_t, 4> c,
                                        std::array<std::uint32_t, 2> k) {
  for (int round = 0; round < 10; ++round) {
    std::uint32_t hi0, lo0, hi1, lo1;
    mulhilo(kMul0, c[0], hi0, lo0);
    mulhilo(kMul1, c[2], hi1, lo1);
    c = {hi1 ^ c[1] ^ k[0], lo1, hi0 ^ c[3] ^ k[1], lo0};
    k[0] += kWeyl0;
    k[1] += kWeyl1;
  }
  return c;
}

double coupling_normal(std::uint64_t seed, int order, std::uint64_t equation, std::uint64_t flat) {
  double c, s;
  box_muller_pair(seed, order, equation, flat >> 1, c, s);
  return (flat & 1u) ? s : c;
}

void coupling_normals(std::uint64_t seed, int order, std::uint64_t equation, std::uint64_t begin,
                      std::uint64_t count, double* out) {
  std::uint64_t f = begin;
  const std::uint64_t end = begin + count;
  if (f < end && (f & 1u)) {
    *out++ = coupling_normal(seed, order, equation, f);
    ++f;
  }
  for (; f + 1 < end; f += 2) {
    box_muller_pair(seed, order, equation, f >> 1, out[0], out[1]);
    out += 2;
  }
  if (f < end) *out = coupling_normal(seed, order, equation, f);
}

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

std::uint64_t derive_seed(std::uint64_t master, std::uint64_t a, std::uint64_t b) {
  return splitmix64(splitmix64(splitmix64(master) ^ a) ^ (b * 0xD1B54A32D192ED03ull));
}

}  // namespace nem
