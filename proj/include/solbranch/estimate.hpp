#pragma once

// Streaming mean/variance accumulation (Welford) with exact pairwise
// merging, for real or complex path values.

#include <cmath>
#include <complex>
#include <cstdint>
#include <stdexcept>

namespace solbranch {

/// Result of one estimation run at one evaluation point.
struct Estimate {
  std::complex<double> mean{0.0, 0.0};
  double standard_error = 0.0;
  std::uint64_t n_samples = 0;
  std::uint64_t n_rejected = 0;
  double elapsed_seconds = 0.0;
  bool guard_ok = true;  // convergence-bound check, when one applies

  double rejection_rate() const {
    const auto total = n_samples + n_rejected;
    return total == 0 ? 0.0 : static_cast<double>(n_rejected) / static_cast<double>(total);
  }
};

/// Single-owner accumulator; merge partials in a fixed order for
/// schedule-independent results.
class Accumulator {
 public:
  void add(double v) { add(std::complex<double>(v, 0.0)); }

  void add(std::complex<double> v) {
    ++n_;
    const std::complex<double> delta = v - mean_;
    mean_ += delta / static_cast<double>(n_);
    m2_ += (std::conj(delta) * (v - mean_)).real();
  }

  void add_rejected() { ++rejected_; }

  /// Chan et al. pairwise combination; exact for the merged data set.
  void merge(const Accumulator& other) {
    if (other.n_ == 0) {
      rejected_ += other.rejected_;
      return;
    }
    if (n_ == 0) {
      *this = other;
      return;
    }
    const std::uint64_t n = n_ + other.n_;
    const std::complex<double> delta = other.mean_ - mean_;
    mean_ += delta * (static_cast<double>(other.n_) / static_cast<double>(n));
    m2_ += other.m2_ + std::norm(delta) * static_cast<double>(n_) *
                           static_cast<double>(other.n_) / static_cast<double>(n);
    n_ = n;
    rejected_ += other.rejected_;
  }

  std::uint64_t count() const { return n_; }
  std::uint64_t rejected() const { return rejected_; }
  std::complex<double> mean() const { return mean_; }

  double variance() const {
    return n_ >= 2 ? m2_ / static_cast<double>(n_ - 1) : 0.0;
  }

  Estimate finish() const {
    if (n_ < 2) throw std::invalid_argument("accumulate: need at least 2 values");
    Estimate e;
    e.mean = mean_;
    e.standard_error = std::sqrt(variance() / static_cast<double>(n_));
    e.n_samples = n_;
    e.n_rejected = rejected_;
    return e;
  }

 private:
  std::uint64_t n_ = 0;
  std::uint64_t rejected_ = 0;
  std::complex<double> mean_{0.0, 0.0};
  double m2_ = 0.0;
};

template <typename Iter>
Estimate accumulate(Iter begin, Iter end) {
  Accumulator acc;
  for (auto it = begin; it != end; ++it) acc.add(*it);
  return acc.finish();
}

}  // namespace solbranch
