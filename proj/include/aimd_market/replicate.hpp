#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <cstdint>
#include <exception>
#include <map>
#include <mutex>
#include <thread>
#include <vector>

#include "aimd_market/market.hpp"
#include "aimd_market/metrics.hpp"
#include "aimd_market/scenario.hpp"

namespace aimd_market {

struct ReplicateResult {
  std::vector<std::uint64_t> seeds;
  std::vector<RunSummary> summaries;
  std::map<SeriesKind, std::vector<std::vector<double>>> series;
  std::map<SeriesKind, BandSeries> bands;
};

/// Runs `count` replicates sharing `scenario`, replicate r seeded with
/// config.seed + r. Replicates are independent, so `jobs` workers may take
/// them in any order; results are stored by index.
inline ReplicateResult run_replicates(const MarketConfig& config, const ScenarioSpec& scenario,
                                      std::size_t count, std::size_t jobs = 1) {
  if (count < 2) throw std::invalid_argument("replicate needs at least 2 replicates");

  ReplicateResult out;
  out.seeds.resize(count);
  out.summaries.resize(count);
  for (auto kind : kAllSeries) out.series[kind].resize(count);
  for (std::size_t r = 0; r < count; ++r) out.seeds[r] = config.seed + r;

  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto worker = [&] {
    for (std::size_t r = next++; r < count; r = next++) {
      try {
        auto cfg = config;
        cfg.seed = out.seeds[r];
        const auto artifact = run(cfg, scenario);
        out.summaries[r] = summarize(artifact);
        for (auto kind : kAllSeries) {
          out.series[kind][r] = extract_series(artifact.rounds, kind);
        }
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
      }
    }
  };

  const std::size_t workers = std::clamp<std::size_t>(jobs, 1, count);
  if (workers == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(worker);
  }
  if (failure) std::rethrow_exception(failure);

  if (config.horizon > 0) {
    for (auto kind : kAllSeries) out.bands[kind] = confidence_band(out.series[kind], 1);
  }
  return out;
}

}  // namespace aimd_market
