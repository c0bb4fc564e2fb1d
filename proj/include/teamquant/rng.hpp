#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <random>
#include <vector>

namespace teamquant {

/// Derives an independent 64-bit seed for sub-stream `stream` of `seed`
/// (two rounds of splitmix64 over the pair).
std::uint64_t stream_seed(std::uint64_t seed, std::uint64_t stream);

/// Seeded generator for one stream. Monte Carlo work is split into fixed-size
/// blocks, block b drawing from Rng(seed, b), so results do not depend on how
/// blocks are assigned to threads.
class Rng {
 public:
  Rng(std::uint64_t seed, std::uint64_t stream) : engine_(stream_seed(seed, stream)) {}

  double normal() { return normal_(engine_); }
  double uniform() { return uniform_(engine_); }
  std::size_t index(std::size_t bound) {
    return std::uniform_int_distribution<std::size_t>(0, bound - 1)(engine_);
  }

 private:
  std::mt19937_64 engine_;
  std::normal_distribution<double> normal_{0.0, 1.0};
  std::uniform_real_distribution<double> uniform_{0.0, 1.0};
};

inline constexpr std::size_t kSampleBlock = 1 << 14;

/// Worker count: TEAMQUANT_THREADS if set and positive, else hardware concurrency.
std::size_t default_threads();

/// Runs fn(task) for task in [0, count) on up to `threads` workers.
void parallel_for(std::size_t count, std::size_t threads,
                  const std::function<void(std::size_t)>& fn);

/// `count` standard normal draws, reproducible for a given seed regardless of
/// thread count.
std::vector<double> sample_normal(std::uint64_t seed, std::size_t count,
                                  std::size_t threads = 1);

}  // namespace teamquant
