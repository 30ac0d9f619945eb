#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "aimd_market/utility.hpp"

namespace aimd_market {

enum class Role { Supplier, Consumer };

inline std::string_view to_string(Role role) {
  return role == Role::Supplier ? "supplier" : "consumer";
}

inline Role role_from_string(std::string_view name) {
  if (name == "supplier") return Role::Supplier;
  if (name == "consumer") return Role::Consumer;
  throw std::invalid_argument("unknown role '" + std::string(name) + "'");
}

/// Which update an agent took in a round. Initialize marks the round-0
/// snapshot, before any update has run.
enum class Branch { Initialize, MultiplicativeDecrease, AdditiveIncrease, AdditiveDecrease };

inline std::string_view to_string(Branch b) {
  switch (b) {
    case Branch::Initialize: return "initialize";
    case Branch::MultiplicativeDecrease: return "multiplicative_decrease";
    case Branch::AdditiveIncrease: return "additive_increase";
    case Branch::AdditiveDecrease: return "additive_decrease";
  }
  return "?";
}

inline Branch branch_from_string(std::string_view name) {
  for (auto b : {Branch::Initialize, Branch::MultiplicativeDecrease, Branch::AdditiveIncrease,
                 Branch::AdditiveDecrease}) {
    if (to_string(b) == name) return b;
  }
  throw std::invalid_argument("unknown branch '" + std::string(name) + "'");
}

/// AIMD coefficients for one side of the market plus the shared network
/// constant.
struct RoleParams {
  double alpha = 5.0;  ///< additive step
  double beta = 0.75;  ///< multiplicative back-off factor, in (0, 1)
  double gamma = 2.0;  ///< back-off probability gain

  friend bool operator==(const RoleParams&, const RoleParams&) = default;
};

inline std::vector<std::string> role_params_violations(const RoleParams& p) {
  std::vector<std::string> out;
  if (!(std::isfinite(p.alpha) && p.alpha > 0.0)) out.emplace_back("alpha must be positive");
  if (!(p.beta > 0.0 && p.beta < 1.0)) out.emplace_back("beta must lie in (0, 1)");
  if (!(std::isfinite(p.gamma) && p.gamma >= 0.0)) out.emplace_back("gamma must be nonnegative");
  return out;
}

struct AgentState {
  std::uint64_t id = 0;
  Role role = Role::Supplier;
  double quantity = 0.0;
  double running_average = 0.0;
  std::uint64_t rounds_elapsed = 0;
  UtilitySpec utility;

  /// Round-0 state: the average of a single sample is that sample.
  static AgentState initial(std::uint64_t id, Role role, UtilitySpec utility,
                            double initial_quantity) {
    return AgentState{id, role, initial_quantity, initial_quantity, 0, std::move(utility)};
  }
};

struct AgentStepTrace {
  double lambda = 0.0;
  bool bernoulli = false;
  Branch branch = Branch::Initialize;

  friend bool operator==(const AgentStepTrace&, const AgentStepTrace&) = default;
};

struct StepResult {
  AgentState state;
  AgentStepTrace trace;
};

/// Below this running average an agent is treated as having no history
/// and never backs off.
inline constexpr double kMinAverageForBackoff = 1e-9;

/// Back-off probability Γ f'(x̄) / x̄ clamped to [0, 1].
inline double compute_backoff_probability(const AgentState& state, const RoleParams& params) {
  const double avg = state.running_average;
  if (avg < kMinAverageForBackoff) return 0.0;
  const auto marginal = derivative(state.utility, avg);
  if (!marginal) return 1.0;
  const double raw = params.gamma * *marginal / avg;
  if (std::isnan(raw)) return 0.0;
  return std::clamp(raw, 0.0, 1.0);
}

/// Exact running mean: `prev_average` is the mean of `samples` earlier
/// quantities (rounds 0..t-1), so the result is (x̄ * t + x(t)) / (t + 1).
inline double update_running_average(double prev_average, std::uint64_t samples,
                                     double new_quantity) {
  const double t = static_cast<double>(samples);
  return (prev_average * t + new_quantity) / (t + 1.0);
}

/// One AIMD round for one agent. `variate` is a uniform draw on [0, 1); the
/// agent backs off when variate < λ. The draw is ignored without a signal.
inline StepResult step(const AgentState& state, bool signal, const RoleParams& params,
                       double variate) {
  AgentStepTrace trace;
  if (signal) {
    trace.lambda = compute_backoff_probability(state, params);
    trace.bernoulli = variate < trace.lambda;
  }

  AgentState next = state;
  const double q = state.quantity;
  if (trace.bernoulli) {
    next.quantity = q * params.beta;
    trace.branch = Branch::MultiplicativeDecrease;
  } else {
    // No finite optimum means the comparison always favours increasing.
    const auto target = argmax(state.utility);
    if (!target || q <= *target) {
      next.quantity = q + params.alpha;
      trace.branch = Branch::AdditiveIncrease;
    } else {
      next.quantity = std::max(0.0, q - params.alpha);
      trace.branch = Branch::AdditiveDecrease;
    }
  }

  next.running_average =
      update_running_average(state.running_average, state.rounds_elapsed + 1, next.quantity);
  next.rounds_elapsed = state.rounds_elapsed + 1;
  return StepResult{std::move(next), trace};
}

}  // namespace aimd_market
