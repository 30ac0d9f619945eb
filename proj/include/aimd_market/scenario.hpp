#pragma once

#include <cmath>
#include <cstdint>
#include <numeric>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "aimd_market/agent.hpp"
#include "aimd_market/random.hpp"
#include "aimd_market/utility.hpp"

namespace aimd_market {

/// Which side receives the one-bit capacity signal.
enum class SignalSemantics {
  ExcessSide,     ///< the side in excess is signalled (default)
  DeficitSupply,  ///< s(t) = 1[x < y], c(t) = 1[y < x]
};

inline std::string_view to_string(SignalSemantics s) {
  return s == SignalSemantics::ExcessSide ? "excess_side" : "deficit_supply";
}

inline SignalSemantics signal_semantics_from_string(std::string_view name) {
  if (name == "excess_side") return SignalSemantics::ExcessSide;
  if (name == "deficit_supply") return SignalSemantics::DeficitSupply;
  throw std::invalid_argument("unknown signal semantics '" + std::string(name) + "'");
}

struct AimdCoefficients {
  double alpha = 5.0;
  double beta = 0.75;

  friend bool operator==(const AimdCoefficients&, const AimdCoefficients&) = default;
};

struct MarketConfig {
  std::uint64_t num_suppliers = 9;
  std::uint64_t num_consumers = 18;
  AimdCoefficients supplier_params;
  AimdCoefficients consumer_params;
  double gamma = 2.0;
  std::uint64_t horizon = 5000;
  std::uint64_t seed = 0;
  double initial_quantity = 0.0;
  SignalSemantics signal_semantics = SignalSemantics::ExcessSide;

  RoleParams role_params(Role role) const {
    const auto& c = role == Role::Supplier ? supplier_params : consumer_params;
    return RoleParams{c.alpha, c.beta, gamma};
  }

  friend bool operator==(const MarketConfig&, const MarketConfig&) = default;
};

/// Config violations; `allow_zero_horizon` admits the degenerate run used
/// to inspect an initial state.
inline std::vector<std::string> config_violations(const MarketConfig& c,
                                                  bool allow_zero_horizon = false) {
  std::vector<std::string> out;
  if (c.num_suppliers < 1) out.emplace_back("num_suppliers must be at least 1");
  if (c.num_consumers < 1) out.emplace_back("num_consumers must be at least 1");
  if (c.horizon < 1 && !allow_zero_horizon) out.emplace_back("horizon must be at least 1");
  if (!(std::isfinite(c.initial_quantity) && c.initial_quantity >= 0.0)) {
    out.emplace_back("initial_quantity must be nonnegative");
  }
  for (auto role : {Role::Supplier, Role::Consumer}) {
    for (auto& v : role_params_violations(c.role_params(role))) {
      out.push_back(std::string(to_string(role)) + " params: " + v);
    }
  }
  return out;
}

enum class ScenarioMode { BothConcave, MonotoneSuppliers };

inline std::string_view to_string(ScenarioMode m) {
  return m == ScenarioMode::BothConcave ? "BothConcave" : "MonotoneSuppliers";
}

inline ScenarioMode scenario_mode_from_string(std::string_view name) {
  if (name == "BothConcave") return ScenarioMode::BothConcave;
  if (name == "MonotoneSuppliers") return ScenarioMode::MonotoneSuppliers;
  throw std::invalid_argument("unknown scenario mode '" + std::string(name) + "'");
}

struct ScenarioSpec {
  std::vector<UtilitySpec> supplier_utilities;
  std::vector<UtilitySpec> consumer_utilities;
  double target_sum = 900.0;
  ScenarioMode mode = ScenarioMode::BothConcave;

  friend bool operator==(const ScenarioSpec&, const ScenarioSpec&) = default;
};

/// Sum of optima over a list, or nullopt if any utility has none.
inline std::optional<double> sum_of_optima(const std::vector<UtilitySpec>& us) {
  double total = 0.0;
  for (const auto& u : us) {
    const auto z = argmax(u);
    if (!z) return std::nullopt;
    total += *z;
  }
  return total;
}

/// Sum of maximum utility values, or nullopt if any utility is unbounded.
inline std::optional<double> sum_of_max_values(const std::vector<UtilitySpec>& us) {
  double total = 0.0;
  for (const auto& u : us) {
    const auto z = argmax(u);
    if (!z) return std::nullopt;
    total += evaluate(u, *z);
  }
  return total;
}

struct Range {
  double lo;
  double hi;

  friend bool operator==(const Range&, const Range&) = default;
};

struct ScenarioOptions {
  ScenarioMode mode = ScenarioMode::BothConcave;
  double target_sum = 900.0;
  std::uint64_t seed = 0;
  Range curvature_range{5.0, 30.0};
  Range scale_range{1.0, 10.0};
  /// Rescale each side's curvatures so that Σ 1.5 h = target_sum, making the
  /// sum of maximum utility values equal the target as well.
  bool couple_value_constraint = false;

  friend bool operator==(const ScenarioOptions&, const ScenarioOptions&) = default;
};

inline constexpr double kWeightLo = 0.5;
inline constexpr double kWeightHi = 1.5;
inline constexpr double kSumRelTol = 1e-6;

namespace detail {

inline std::vector<UtilitySpec> sample_quadratics(SplitMix64& rng, std::uint64_t n,
                                                  const ScenarioOptions& opt) {
  std::vector<double> weights(n), curvatures(n);
  for (auto& w : weights) w = rng.uniform_open(kWeightLo, kWeightHi);
  for (auto& h : curvatures) h = rng.uniform(opt.curvature_range.lo, opt.curvature_range.hi);

  const double weight_sum = std::accumulate(weights.begin(), weights.end(), 0.0);
  if (opt.couple_value_constraint) {
    const double h_sum = std::accumulate(curvatures.begin(), curvatures.end(), 0.0);
    const double factor = (opt.target_sum / 1.5) / h_sum;
    for (auto& h : curvatures) h *= factor;
  }

  std::vector<UtilitySpec> out;
  out.reserve(n);
  for (std::uint64_t k = 0; k < n; ++k) {
    out.push_back(UtilitySpec::quadratic(opt.target_sum * weights[k] / weight_sum, curvatures[k]));
  }
  return out;
}

}  // namespace detail

/// Samples private utilities for every agent. Optima are normalised
/// uniform(0.5, 1.5) weights scaled to `target_sum`, so the sum constraint
/// holds by construction. Pure in (config sizes, options).
inline ScenarioSpec generate_scenario(const MarketConfig& config, const ScenarioOptions& opt) {
  if (!(opt.target_sum > 0.0)) throw std::invalid_argument("target_sum must be positive");
  if (!(opt.curvature_range.lo > 0.0 && opt.curvature_range.lo <= opt.curvature_range.hi)) {
    throw std::invalid_argument("curvature_range must be positive and ordered");
  }
  if (!(opt.scale_range.lo > 0.0 && opt.scale_range.lo <= opt.scale_range.hi)) {
    throw std::invalid_argument("scale_range must be positive and ordered");
  }

  SplitMix64 rng(opt.seed);
  ScenarioSpec spec;
  spec.target_sum = opt.target_sum;
  spec.mode = opt.mode;
  if (opt.mode == ScenarioMode::BothConcave) {
    spec.supplier_utilities = detail::sample_quadratics(rng, config.num_suppliers, opt);
  } else {
    spec.supplier_utilities.reserve(config.num_suppliers);
    for (std::uint64_t k = 0; k < config.num_suppliers; ++k) {
      spec.supplier_utilities.push_back(
          UtilitySpec::sqrt_monotone(rng.uniform(opt.scale_range.lo, opt.scale_range.hi)));
    }
  }
  spec.consumer_utilities = detail::sample_quadratics(rng, config.num_consumers, opt);
  return spec;
}

/// Every way `spec` fails to fit `config`; empty when consistent.
inline std::vector<std::string> validate_scenario(const ScenarioSpec& spec,
                                                  const MarketConfig& config) {
  std::vector<std::string> out;
  if (spec.supplier_utilities.size() != config.num_suppliers) {
    out.push_back("expected " + std::to_string(config.num_suppliers) + " supplier utilities, got " +
                  std::to_string(spec.supplier_utilities.size()));
  }
  if (spec.consumer_utilities.size() != config.num_consumers) {
    out.push_back("expected " + std::to_string(config.num_consumers) + " consumer utilities, got " +
                  std::to_string(spec.consumer_utilities.size()));
  }
  if (!(spec.target_sum > 0.0)) out.emplace_back("target_sum must be positive");

  auto check_each = [&out](const std::vector<UtilitySpec>& us, std::string_view side) {
    for (std::size_t k = 0; k < us.size(); ++k) {
      for (auto& v : utility_violations(us[k])) {
        out.push_back(std::string(side) + " utility " + std::to_string(k) + ": " + v);
      }
    }
  };
  check_each(spec.supplier_utilities, "supplier");
  check_each(spec.consumer_utilities, "consumer");
  if (!out.empty()) return out;

  auto check_sum = [&](const std::vector<UtilitySpec>& us, std::string_view side) {
    const auto total = sum_of_optima(us);
    if (!total) {
      out.push_back(std::string(side) + " utilities must all have a finite optimum");
    } else if (std::abs(*total - spec.target_sum) > kSumRelTol * spec.target_sum) {
      out.push_back(std::string(side) + " optima sum to " + std::to_string(*total) +
                    ", target is " + std::to_string(spec.target_sum));
    }
  };
  if (spec.mode == ScenarioMode::BothConcave) {
    check_sum(spec.supplier_utilities, "supplier");
  } else {
    for (std::size_t k = 0; k < spec.supplier_utilities.size(); ++k) {
      if (spec.supplier_utilities[k].kind != UtilityKind::SqrtMonotone) {
        out.push_back("supplier utility " + std::to_string(k) +
                      ": MonotoneSuppliers requires SqrtMonotone");
      }
    }
  }
  check_sum(spec.consumer_utilities, "consumer");
  return out;
}

struct ReferenceConfig {
  std::string name;
  MarketConfig config;
  ScenarioOptions options;
  ScenarioSpec scenario;
};

inline constexpr std::uint64_t kReferenceRunSeed = 42;
inline constexpr std::uint64_t kReferenceScenarioSeed = 2019;

/// The two published experiments: 9 suppliers, 18 consumers, α = 5,
/// β = 0.75, Γ = 2, target 900. "paper-A" has quadratic utilities on both
/// sides, "paper-B" square-root suppliers.
inline std::vector<ReferenceConfig> reference_configs() {
  MarketConfig base;
  base.num_suppliers = 9;
  base.num_consumers = 18;
  base.supplier_params = {5.0, 0.75};
  base.consumer_params = {5.0, 0.75};
  base.gamma = 2.0;
  base.horizon = 5000;
  base.seed = kReferenceRunSeed;
  base.initial_quantity = 0.0;

  std::vector<ReferenceConfig> out;
  for (auto mode : {ScenarioMode::BothConcave, ScenarioMode::MonotoneSuppliers}) {
    ScenarioOptions opt;
    opt.mode = mode;
    opt.target_sum = 900.0;
    opt.seed = kReferenceScenarioSeed;
    opt.couple_value_constraint = true;
    out.push_back(ReferenceConfig{mode == ScenarioMode::BothConcave ? "paper-A" : "paper-B", base,
                                  opt, generate_scenario(base, opt)});
  }
  return out;
}

inline ReferenceConfig reference_config(std::string_view name) {
  for (auto& r : reference_configs()) {
    if (r.name == name) return r;
  }
  throw std::invalid_argument("unknown reference config '" + std::string(name) +
                              "' (expected paper-A or paper-B)");
}

}  // namespace aimd_market
