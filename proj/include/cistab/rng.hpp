#pragma once

#include <array>
#include <cstdint>

namespace cistab {

/// Philox4x64-10 block function (Salmon et al., counter-based). Stateless:
/// the output depends only on (counter, key), so any increment of any path can
/// be regenerated without replaying the stream.
struct Philox4x64 {
  using Counter = std::array<std::uint64_t, 4>;
  using Key = std::array<std::uint64_t, 2>;

  static Counter generate(Counter counter, Key key) noexcept;
};

/// Standard normal deviates keyed by (seed, path_index, step_index).
class NormalStream {
 public:
  NormalStream(std::uint64_t seed, std::uint64_t path_index) noexcept
      : seed_(seed), path_(path_index) {}

  double operator()(std::uint64_t step_index) const noexcept;

  std::uint64_t seed() const noexcept { return seed_; }
  std::uint64_t path_index() const noexcept { return path_; }

 private:
  std::uint64_t seed_;
  std::uint64_t path_;
};

/// Brownian increments on a fine grid of width `fine_dt`; a coarse step made of
/// `substeps` fine steps receives the sum of the corresponding fine increments,
/// so every resolution samples the same path.
class BrownianPath {
 public:
  BrownianPath(std::uint64_t seed, std::uint64_t path_index, double fine_dt) noexcept;

  double increment(std::uint64_t coarse_step, std::uint64_t substeps = 1) const noexcept;

 private:
  NormalStream normals_;
  double sqrt_dt_;
};

}  // namespace cistab
