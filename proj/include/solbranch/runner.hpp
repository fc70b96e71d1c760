#pragma once

// Deterministic parallel path driver. Paths are chunked by index; each chunk
// is accumulated sequentially and chunks are merged in index order, so the
// result is bit-identical for any thread count or scheduling.

#include <complex>
#include <cstdint>
#include <functional>

#include "solbranch/estimate.hpp"

namespace solbranch {

struct PathOutcome {
  bool rejected = false;
  std::complex<double> value{0.0, 0.0};
};

using PathFn = std::function<PathOutcome(std::uint64_t path_index)>;

/// 0 requests the SOLBRANCH_THREADS environment default, falling back to
/// the hardware concurrency.
int resolve_threads(int requested);

Estimate run_paths(std::uint64_t n_samples, int threads, const PathFn& fn);

}  // namespace solbranch
