#pragma once

// Counter-based random streams (Philox 4x32-10, Salmon et al. SC'11).
// A stream is a pure function of (master_seed, path_index, draw_index),
// so per-path streams can be created in any order on any thread and
// always replay bit-identically.

#include <array>
#include <cmath>
#include <cstdint>

namespace solbranch {

namespace detail {

inline void philox_round(std::array<uint32_t, 4>& ctr, std::array<uint32_t, 2>& key) {
  constexpr uint32_t kMulA = 0xD2511F53u;
  constexpr uint32_t kMulB = 0xCD9E8D57u;
  const uint64_t p0 = static_cast<uint64_t>(kMulA) * ctr[0];
  const uint64_t p1 = static_cast<uint64_t>(kMulB) * ctr[2];
  const uint32_t hi0 = static_cast<uint32_t>(p0 >> 32), lo0 = static_cast<uint32_t>(p0);
  const uint32_t hi1 = static_cast<uint32_t>(p1 >> 32), lo1 = static_cast<uint32_t>(p1);
  ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
  key[0] += 0x9E3779B9u;
  key[1] += 0xBB67AE85u;
}

inline std::array<uint32_t, 4> philox10(std::array<uint32_t, 4> ctr, std::array<uint32_t, 2> key) {
  for (int r = 0; r < 10; ++r) philox_round(ctr, key);
  return ctr;
}

}  // namespace detail

/// One independent random stream, keyed by (master_seed, path_index).
class RngStream {
 public:
  RngStream(uint64_t master_seed, uint64_t path_index)
      : key_{static_cast<uint32_t>(master_seed), static_cast<uint32_t>(master_seed >> 32)},
        path_{static_cast<uint32_t>(path_index), static_cast<uint32_t>(path_index >> 32)} {}

  uint64_t master_seed() const {
    return (static_cast<uint64_t>(key_[1]) << 32) | key_[0];
  }
  uint64_t path_index() const {
    return (static_cast<uint64_t>(path_[1]) << 32) | path_[0];
  }

  /// Raw 64-bit draw. Draw k consumes word k%2 of Philox block k/2.
  uint64_t next_u64() {
    if (have_cached_) {
      have_cached_ = false;
      return cached_;
    }
    const std::array<uint32_t, 4> ctr = {path_[0], path_[1],
                                         static_cast<uint32_t>(block_),
                                         static_cast<uint32_t>(block_ >> 32)};
    const auto out = detail::philox10(ctr, key_);
    ++block_;
    cached_ = (static_cast<uint64_t>(out[3]) << 32) | out[2];
    have_cached_ = true;
    return (static_cast<uint64_t>(out[1]) << 32) | out[0];
  }

  /// Uniform on [0, 1).
  double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  /// Uniform on (0, 1); safe to pass to log().
  double uniform_pos() {
    return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
  }

  /// Standard normal (Box-Muller; partner value cached within the stream).
  double gaussian() {
    if (have_gauss_) {
      have_gauss_ = false;
      return gauss_;
    }
    const double u1 = uniform_pos();
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double a = 6.283185307179586476925286766559 * u2;
    gauss_ = r * std::sin(a);
    have_gauss_ = true;
    return r * std::cos(a);
  }

 private:
  std::array<uint32_t, 2> key_;
  std::array<uint32_t, 2> path_;
  uint64_t block_ = 0;
  uint64_t cached_ = 0;
  bool have_cached_ = false;
  double gauss_ = 0.0;
  bool have_gauss_ = false;
};

/// The unique stream for (master_seed, path_index); independent of call
/// order and thread scheduling.
inline RngStream split_stream(uint64_t master_seed, uint64_t path_index) {
  return RngStream(master_seed, path_index);
}

/// Brownian increment of the heat semigroup exp(t * diffusion * d^2/dx^2):
/// x + sqrt(2 * diffusion * dt) * Z. Exact identity when dt or diffusion is 0.
inline double sample_gaussian_step(RngStream& s, double x, double diffusion, double dt) {
  if (diffusion == 0.0 || dt == 0.0) return x;
  return x + std::sqrt(2.0 * diffusion * dt) * s.gaussian();
}

/// Outcome of a backward line over a finite horizon.
struct BranchTime {
  bool reached_zero;  // line survived to time 0
  double time;        // elapsed time of the branch, in (0, horizon); 0 if survived
};

/// Exponential clock at `rate` truncated to `horizon`:
/// P(reached_zero) = exp(-rate*horizon), else the branch time has the exact
/// conditional density rate*exp(-rate*s)/(1-exp(-rate*horizon)) on (0, horizon).
/// A single uniform decides both (no rejection).
inline BranchTime sample_branch_time_exponential(RngStream& s, double rate, double horizon) {
  const double u = s.uniform_pos();
  const double survive = std::exp(-rate * horizon);
  if (u <= survive) return {true, 0.0};
  return {false, -std::log(u) / rate};
}

/// Interrupt mechanism of the uniform-time representation:
/// P(reached_zero) = p_survive, else tau ~ Uniform(0, horizon).
inline BranchTime sample_interrupt_uniform(RngStream& s, double p_survive, double horizon) {
  if (s.uniform() < p_survive) return {true, 0.0};
  return {false, s.uniform_pos() * horizon};
}

}  // namespace solbranch
