#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <stdexcept>
#include <string_view>
#include <vector>

#include "aimd_market/market.hpp"
#include "aimd_market/record.hpp"
#include "aimd_market/scenario.hpp"

namespace aimd_market {

/// Earliest index r such that every value in [r, r + window) lies within
/// rel_tol * max(target, floor) of target. nullopt if no full window fits.
inline std::optional<std::size_t> detect_convergence(std::span<const double> series, double target,
                                                     double rel_tol, std::size_t window) {
  if (!(rel_tol > 0.0)) throw std::invalid_argument("rel_tol must be positive");
  if (window < 1) throw std::invalid_argument("window must be at least 1");
  constexpr double floor = 1e-12;
  const double tol = rel_tol * std::max(std::abs(target), floor);
  std::size_t run_start = 0;
  std::size_t run_length = 0;
  for (std::size_t t = 0; t < series.size(); ++t) {
    if (std::abs(series[t] - target) <= tol) {
      if (run_length == 0) run_start = t;
      if (++run_length >= window) return run_start;
    } else {
      run_length = 0;
    }
  }
  return std::nullopt;
}

struct BandPoint {
  std::uint64_t round = 0;
  double mean = 0.0;
  double lower = 0.0;
  double upper = 0.0;
  std::uint64_t replicate_count = 0;

  friend bool operator==(const BandPoint&, const BandPoint&) = default;
};

using BandSeries = std::vector<BandPoint>;

inline constexpr double kZ95 = 1.96;

/// Normal-approximation band per round: mean ± z * s / sqrt(R), with s the
/// n-1 sample standard deviation across replicates.
inline BandSeries confidence_band(std::span<const std::vector<double>> replicates,
                                  std::uint64_t first_round = 0, double z = kZ95) {
  const std::size_t r = replicates.size();
  if (r < 2) throw std::invalid_argument("confidence band needs at least 2 replicates");
  const std::size_t len = replicates.front().size();
  for (const auto& rep : replicates) {
    if (rep.size() != len) throw std::invalid_argument("replicate trajectories differ in length");
  }

  BandSeries out;
  out.reserve(len);
  const double n = static_cast<double>(r);
  for (std::size_t t = 0; t < len; ++t) {
    double mean = 0.0;
    for (const auto& rep : replicates) mean += rep[t];
    mean /= n;
    double ss = 0.0;
    for (const auto& rep : replicates) ss += (rep[t] - mean) * (rep[t] - mean);
    const double half = z * std::sqrt(ss / (n - 1.0)) / std::sqrt(n);
    out.push_back(BandPoint{first_round + t, mean, mean - half, mean + half, r});
  }
  return out;
}

/// Scalar per-round series that can be banded across replicates.
enum class SeriesKind {
  MeanSupplierDerivative,
  MeanConsumerDerivative,
  TotalSupply,
  TotalConsumption,
  SumOfUtilities,
};

inline constexpr SeriesKind kAllSeries[] = {
    SeriesKind::MeanSupplierDerivative, SeriesKind::MeanConsumerDerivative,
    SeriesKind::TotalSupply, SeriesKind::TotalConsumption, SeriesKind::SumOfUtilities};

inline std::string_view to_string(SeriesKind s) {
  switch (s) {
    case SeriesKind::MeanSupplierDerivative: return "mean_supplier_derivative";
    case SeriesKind::MeanConsumerDerivative: return "mean_consumer_derivative";
    case SeriesKind::TotalSupply: return "total_supply";
    case SeriesKind::TotalConsumption: return "total_consumption";
    case SeriesKind::SumOfUtilities: return "sum_of_utilities";
  }
  return "?";
}

namespace detail {

inline double derivative_or_inf(const AgentRecord& a) {
  return a.utility_derivative.value_or(std::numeric_limits<double>::infinity());
}

struct DerivativeStats {
  double mean = 0.0;
  double mean_abs = 0.0;
};

inline DerivativeStats derivative_stats(const RoundRecord& rec, std::optional<Role> role) {
  DerivativeStats s;
  std::size_t n = 0;
  for (const auto& a : rec.per_agent) {
    if (role && a.role != *role) continue;
    const double d = derivative_or_inf(a);
    s.mean += d;
    s.mean_abs += std::abs(d);
    ++n;
  }
  if (n > 0) {
    s.mean /= static_cast<double>(n);
    s.mean_abs /= static_cast<double>(n);
  }
  return s;
}

}  // namespace detail

inline double series_value(const RoundRecord& rec, SeriesKind kind) {
  switch (kind) {
    case SeriesKind::MeanSupplierDerivative:
      return detail::derivative_stats(rec, Role::Supplier).mean;
    case SeriesKind::MeanConsumerDerivative:
      return detail::derivative_stats(rec, Role::Consumer).mean;
    case SeriesKind::TotalSupply: return rec.total_supply;
    case SeriesKind::TotalConsumption: return rec.total_consumption;
    case SeriesKind::SumOfUtilities: return rec.sum_of_utilities;
  }
  return 0.0;
}

inline std::vector<double> extract_series(std::span<const RoundRecord> records, SeriesKind kind) {
  std::vector<double> out;
  out.reserve(records.size());
  for (const auto& r : records) out.push_back(series_value(r, kind));
  return out;
}

/// Mean |f'| over agents (optionally one role) at their running averages.
inline double mean_abs_derivative(const RoundRecord& rec,
                                  std::optional<Role> role = std::nullopt) {
  return detail::derivative_stats(rec, role).mean_abs;
}

/// Trailing window used for "where does this series settle" claims:
/// 10% of the horizon, at least 100 rounds, never longer than the run.
inline std::size_t trailing_window_length(std::size_t rounds) {
  return std::min(rounds, std::max<std::size_t>(100, rounds / 10));
}

inline constexpr double kConvergenceRelTol = 0.10;
inline constexpr std::size_t kConvergenceWindow = 100;

struct AgentSummary {
  std::uint64_t id = 0;
  Role role = Role::Supplier;
  double final_quantity = 0.0;
  double final_running_average = 0.0;
  double final_utility = 0.0;
  std::optional<double> final_derivative;
  std::optional<double> optimum;
  std::optional<double> distance_to_optimum;
  std::optional<double> relative_distance;
  std::optional<std::uint64_t> convergence_round;
};

struct RunSummary {
  std::uint64_t rounds = 0;
  std::uint64_t window = 0;
  double trailing_mean_total_supply = 0.0;
  double trailing_mean_total_consumption = 0.0;
  double final_total_supply = 0.0;
  double final_total_consumption = 0.0;
  double final_sum_of_utilities = 0.0;
  double final_supplier_utility_sum = 0.0;
  double final_consumer_utility_sum = 0.0;
  std::optional<double> max_supplier_utility_sum;
  std::optional<double> max_consumer_utility_sum;
  double final_mean_abs_derivative = 0.0;
  double final_mean_abs_supplier_derivative = 0.0;
  double final_mean_abs_consumer_derivative = 0.0;
  std::vector<AgentSummary> agents;
};

/// Summary of a trajectory. `records` must be non-empty; the final record
/// supplies the "final" figures and the trailing window is taken from its end.
inline RunSummary summarize(std::span<const RoundRecord> records, const ScenarioSpec& scenario) {
  if (records.empty()) throw std::invalid_argument("summarize needs at least one round");
  const auto& last = records.back();

  RunSummary s;
  s.rounds = records.size();
  s.window = trailing_window_length(records.size());
  const auto tail = records.subspan(records.size() - s.window);
  for (const auto& r : tail) {
    s.trailing_mean_total_supply += r.total_supply;
    s.trailing_mean_total_consumption += r.total_consumption;
  }
  s.trailing_mean_total_supply /= static_cast<double>(s.window);
  s.trailing_mean_total_consumption /= static_cast<double>(s.window);

  s.final_total_supply = last.total_supply;
  s.final_total_consumption = last.total_consumption;
  s.final_sum_of_utilities = last.sum_of_utilities;
  s.final_supplier_utility_sum = last.supplier_utility_sum;
  s.final_consumer_utility_sum = last.consumer_utility_sum;
  s.max_supplier_utility_sum = sum_of_max_values(scenario.supplier_utilities);
  s.max_consumer_utility_sum = sum_of_max_values(scenario.consumer_utilities);
  s.final_mean_abs_derivative = mean_abs_derivative(last);
  s.final_mean_abs_supplier_derivative = mean_abs_derivative(last, Role::Supplier);
  s.final_mean_abs_consumer_derivative = mean_abs_derivative(last, Role::Consumer);

  const std::size_t n_suppliers = scenario.supplier_utilities.size();
  std::vector<double> averages(records.size());
  for (std::size_t k = 0; k < last.per_agent.size(); ++k) {
    const auto& a = last.per_agent[k];
    AgentSummary ag;
    ag.id = a.id;
    ag.role = a.role;
    ag.final_quantity = a.quantity;
    ag.final_running_average = a.running_average;
    ag.final_utility = a.utility_value;
    ag.final_derivative = a.utility_derivative;
    const auto& u = k < n_suppliers ? scenario.supplier_utilities.at(k)
                                    : scenario.consumer_utilities.at(k - n_suppliers);
    ag.optimum = argmax(u);
    if (ag.optimum) {
      ag.distance_to_optimum = std::abs(a.running_average - *ag.optimum);
      if (*ag.optimum > 0.0) ag.relative_distance = *ag.distance_to_optimum / *ag.optimum;
      for (std::size_t t = 0; t < records.size(); ++t) {
        averages[t] = records[t].per_agent.at(k).running_average;
      }
      const auto idx =
          detect_convergence(averages, *ag.optimum, kConvergenceRelTol,
                             std::min(kConvergenceWindow, records.size()));
      if (idx) ag.convergence_round = records[*idx].round;
    }
    s.agents.push_back(std::move(ag));
  }
  return s;
}

/// Summary of a run; a zero-horizon run summarises its initial state.
inline RunSummary summarize(const RunArtifact& run) {
  if (run.rounds.empty()) return summarize(std::span(&run.initial, 1), run.scenario);
  return summarize(std::span<const RoundRecord>(run.rounds), run.scenario);
}

}  // namespace aimd_market
