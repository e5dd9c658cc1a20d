#pragma once

// Counter-based normal deviates.
//
// Deviate j of path p under master seed s is a pure function of (s, p, j):
// Philox4x32-10 is keyed by s and run on the counter (j / 2, p); the 128-bit
// block yields two 52-bit uniforms on (0, 1), each mapped through the inverse
// normal CDF. No state is shared between paths, so any scheduling of paths
// over threads produces the same numbers.

#include <array>
#include <cstdint>
#include <span>

namespace ifbm {

class Philox4x32 {
 public:
  using Counter = std::array<std::uint32_t, 4>;
  using Key = std::array<std::uint32_t, 2>;

  static Counter block(Counter ctr, Key key);
};

/// Maps the top 52 bits of `bits` to the open interval (0, 1); every result is exactly representable.
double uniform_open01(std::uint64_t bits);

/// Wichura's AS241 (PPND16); relative accuracy about 1e-16.
double inverse_normal_cdf(double p);

class NormalStream {
 public:
  NormalStream(std::uint64_t master_seed, std::uint64_t path_index);

  /// Deviate at an absolute position in the stream (random access).
  double at(std::uint64_t index) const;

  /// Next deviate in sequence.
  double operator()();

  void fill(std::span<double> out);

  std::uint64_t position() const { return position_; }

 private:
  void refill(std::uint64_t block_index);

  Philox4x32::Key key_;
  std::uint64_t path_;
  std::uint64_t position_ = 0;
  std::uint64_t cached_block_ = ~std::uint64_t{0};
  std::array<double, 2> cached_{};
};

}  // namespace ifbm
