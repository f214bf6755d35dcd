#include "cistab/rng.hpp"

#include <cmath>
#include <numbers>

namespace cistab {

namespace {

constexpr std::uint64_t kM0 = 0xD2E7470EE14C6C93ULL;
constexpr std::uint64_t kM1 = 0xCA5A826395121157ULL;
constexpr std::uint64_t kW0 = 0x9E3779B97F4A7C15ULL;
constexpr std::uint64_t kW1 = 0xBB67AE8584CAA73BULL;

__extension__ using u128 = unsigned __int128;

inline void mulhilo(std::uint64_t a, std::uint64_t b, std::uint64_t& hi, std::uint64_t& lo) {
  const u128 p = static_cast<u128>(a) * b;
  hi = static_cast<std::uint64_t>(p >> 64);
  lo = static_cast<std::uint64_t>(p);
}

// Uniform on (0,1) from the top 53 bits.
inline double to_open_unit(std::uint64_t x) {
  return (static_cast<double>(x >> 11) + 0.5) * 0x1.0p-53;
}

// Keeps the simulation stream apart from any other use of the same seed.
constexpr std::uint64_t kStreamTag = 0x5EED'C1A5'7AB1'0001ULL;

}  // namespace

Philox4x64::Counter Philox4x64::generate(Counter c, Key k) noexcept {
  for (int round = 0; round < 10; ++round) {
    std::uint64_t hi0, lo0, hi1, lo1;
    mulhilo(kM0, c[0], hi0, lo0);
    mulhilo(kM1, c[2], hi1, lo1);
    c = {hi1 ^ c[1] ^ k[0], lo1, hi0 ^ c[3] ^ k[1], lo0};
    k[0] += kW0;
    k[1] += kW1;
  }
  return c;
}

double NormalStream::operator()(std::uint64_t step_index) const noexcept {
  const auto r = Philox4x64::generate({step_index, path_, 0, 0}, {seed_, kStreamTag});
  const double u1 = to_open_unit(r[0]);
  const double u2 = to_open_unit(r[1]);
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

BrownianPath::BrownianPath(std::uint64_t seed, std::uint64_t path_index, double fine_dt) noexcept
    : normals_(seed, path_index), sqrt_dt_(std::sqrt(fine_dt)) {}

double BrownianPath::increment(std::uint64_t coarse_step, std::uint64_t substeps) const noexcept {
  double sum = 0.0;
  const std::uint64_t first = coarse_step * substeps;
  for (std::uint64_t i = 0; i < substeps; ++i) sum += normals_(first + i);
  return sqrt_dt_ * sum;
}

}  // namespace cistab
