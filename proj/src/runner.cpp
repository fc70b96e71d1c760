#include "solbranch/runner.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cstdlib>
#include <mutex>
#include <thread>
#include <vector>

namespace solbranch {

namespace {
constexpr std::uint64_t kChunk = 4096;
}

int resolve_threads(int requested) {
  if (requested > 0) return requested;
  if (const char* env = std::getenv("SOLBRANCH_THREADS")) {
    const int n = std::atoi(env);
    if (n > 0) return n;
  }
  const unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : static_cast<int>(hw);
}

Estimate run_paths(std::uint64_t n_samples, int threads, const PathFn& fn) {
  const auto t0 = std::chrono::steady_clock::now();
  const int n_workers = resolve_threads(threads);
  const std::uint64_t n_chunks = (n_samples + kChunk - 1) / kChunk;
  std::vector<Accumulator> chunks(n_chunks);

  std::atomic<std::uint64_t> next{0};
  std::exception_ptr first_error;
  std::mutex error_mutex;

  auto worker = [&] {
    for (;;) {
      const std::uint64_t c = next.fetch_add(1);
      if (c >= n_chunks) return;
      Accumulator acc;
      const std::uint64_t begin = c * kChunk;
      const std::uint64_t end = std::min(n_samples, begin + kChunk);
      try {
        for (std::uint64_t i = begin; i < end; ++i) {
          const PathOutcome out = fn(i);
          if (out.rejected)
            acc.add_rejected();
          else
            acc.add(out.value);
        }
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!first_error) first_error = std::current_exception();
        return;
      }
      chunks[c] = acc;
    }
  };

  if (n_workers <= 1 || n_chunks <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    const int spawn = static_cast<int>(std::min<std::uint64_t>(n_workers, n_chunks));
    pool.reserve(static_cast<size_t>(spawn));
    for (int i = 0; i < spawn; ++i) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }
  if (first_error) std::rethrow_exception(first_error);

  Accumulator total;
  for (const auto& c : chunks) total.merge(c);
  Estimate e = total.finish();
  e.elapsed_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return e;
}

}  // namespace solbranch
