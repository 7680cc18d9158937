#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <future>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include "memroute/error.hpp"
#include "memroute/rng.hpp"

namespace memroute {

inline constexpr std::size_t kDefaultResamples = 10000;
inline constexpr std::uint64_t kDefaultSeed = 20240501;

namespace detail {

// Resamples are split into a fixed number of blocks, each with its own
// sub-seed, so results do not depend on how many threads run them.
inline constexpr std::size_t kBootstrapBlocks = 16;

inline std::uint64_t block_seed(std::uint64_t seed, std::size_t block) {
  return splitmix64(seed ^ splitmix64(static_cast<std::uint64_t>(block) + 1));
}

/// For each resample, the mean of `values` over n indices drawn with
/// replacement. Resample r always uses the same index stream.
inline std::vector<double> resampled_means(std::span<const double> values, std::size_t n_resamples,
                                           std::uint64_t seed, std::size_t threads) {
  const std::size_t n = values.size();
  std::vector<double> means(n_resamples);
  auto run_block = [&](std::size_t block) {
    const std::size_t begin = n_resamples * block / kBootstrapBlocks;
    const std::size_t end = n_resamples * (block + 1) / kBootstrapBlocks;
    Rng rng(block_seed(seed, block));
    for (std::size_t r = begin; r < end; ++r) {
      double sum = 0.0;
      for (std::size_t i = 0; i < n; ++i) sum += values[static_cast<std::size_t>(rng.below(n))];
      means[r] = sum / static_cast<double>(n);
    }
  };
  if (threads <= 1) {
    for (std::size_t b = 0; b < kBootstrapBlocks; ++b) run_block(b);
  } else {
    std::vector<std::future<void>> pending;
    std::size_t next = 0;
    while (next < kBootstrapBlocks) {
      pending.clear();
      for (std::size_t t = 0; t < threads && next < kBootstrapBlocks; ++t, ++next) {
        pending.push_back(std::async(std::launch::async, run_block, next));
      }
      for (auto& f : pending) f.get();
    }
  }
  return means;
}

}  // namespace detail

/// Empirical quantile of sorted data: the smallest value whose cumulative
/// share reaches q, i.e. sorted[ceil(q * n) - 1].
inline double empirical_quantile(std::span<const double> sorted, double q) {
  if (sorted.empty()) throw UsageError("empirical_quantile: empty sample");
  const double pos = std::ceil(q * static_cast<double>(sorted.size()) - 1e-9);
  const auto idx = static_cast<std::size_t>(std::clamp(pos, 1.0, static_cast<double>(sorted.size()))) - 1;
  return sorted[idx];
}

struct ConfidenceInterval {
  double lower = 0.0;
  double upper = 0.0;
};

/// Percentile bootstrap interval for the mean at levels alpha/2, 1 - alpha/2.
inline ConfidenceInterval bootstrap_ci(std::span<const double> scores, std::size_t n_resamples = kDefaultResamples,
                                       double alpha = 0.05, std::uint64_t seed = kDefaultSeed,
                                       std::size_t threads = 1) {
  if (scores.empty()) throw UsageError("bootstrap_ci: empty score list");
  if (n_resamples == 0) throw UsageError("bootstrap_ci: n_resamples must be >= 1");
  if (!(alpha > 0.0 && alpha < 1.0)) throw UsageError("bootstrap_ci: alpha must lie in (0, 1)");
  auto means = detail::resampled_means(scores, n_resamples, seed, threads);
  std::sort(means.begin(), means.end());
  return {empirical_quantile(means, alpha / 2.0), empirical_quantile(means, 1.0 - alpha / 2.0)};
}

inline double mean(std::span<const double> xs) {
  if (xs.empty()) return 0.0;
  return std::accumulate(xs.begin(), xs.end(), 0.0) / static_cast<double>(xs.size());
}

/// Sample (n - 1) standard deviation; 0 for fewer than two values.
inline double sample_stddev(std::span<const double> xs) {
  if (xs.size() < 2) return 0.0;
  const double m = mean(xs);
  double ss = 0.0;
  for (double x : xs) ss += (x - m) * (x - m);
  return std::sqrt(ss / static_cast<double>(xs.size() - 1));
}

struct PairedTestResult {
  double mean_delta = 0.0;  // mean(a) - mean(b) on the original pairing
  double p_value = 1.0;     // share of resamples with mean delta <= 0
};

/// One-sided paired bootstrap testing mean(a) > mean(b). Instance indices are
/// resampled with replacement and both systems share each draw.
inline PairedTestResult paired_bootstrap_test(std::span<const double> a, std::span<const double> b,
                                              std::size_t n_resamples = kDefaultResamples,
                                              std::uint64_t seed = kDefaultSeed, std::size_t threads = 1) {
  if (a.size() != b.size()) {
    throw UsageError("paired_bootstrap_test: score lists differ in length (" + std::to_string(a.size()) +
                     " vs " + std::to_string(b.size()) + ")");
  }
  if (a.empty()) throw UsageError("paired_bootstrap_test: empty score lists");
  if (n_resamples == 0) throw UsageError("paired_bootstrap_test: n_resamples must be >= 1");
  std::vector<double> deltas(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) deltas[i] = a[i] - b[i];
  const auto means = detail::resampled_means(deltas, n_resamples, seed, threads);
  const auto not_better = std::count_if(means.begin(), means.end(), [](double d) { return d <= 0.0; });
  PairedTestResult result;
  result.mean_delta = mean(a) - mean(b);
  result.p_value = static_cast<double>(not_better) / static_cast<double>(n_resamples);
  return result;
}

}  // namespace memroute
