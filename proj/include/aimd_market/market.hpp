#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "aimd_market/agent.hpp"
#include "aimd_market/random.hpp"
#include "aimd_market/record.hpp"
#include "aimd_market/scenario.hpp"

namespace aimd_market {

/// Raised when a config or scenario fails validation before a run starts.
class ConfigError : public std::invalid_argument {
 public:
  explicit ConfigError(std::vector<std::string> violations)
      : std::invalid_argument(join(violations)), violations_(std::move(violations)) {}

  const std::vector<std::string>& violations() const noexcept { return violations_; }

 private:
  static std::string join(const std::vector<std::string>& vs) {
    std::string out = "invalid configuration";
    for (const auto& v : vs) out += "; " + v;
    return out;
  }

  std::vector<std::string> violations_;
};

inline CapacitySignals compute_signals(double total_supply, double total_consumption,
                                       SignalSemantics semantics = SignalSemantics::ExcessSide) {
  const bool excess_supply = total_supply > total_consumption;
  const bool excess_consumption = total_consumption > total_supply;
  if (semantics == SignalSemantics::DeficitSupply) return {excess_consumption, excess_supply};
  return {excess_supply, excess_consumption};
}

struct MarketState {
  std::vector<AgentState> suppliers;
  std::vector<AgentState> consumers;
  std::uint64_t round = 0;
  double last_total_supply = 0.0;
  double last_total_consumption = 0.0;
};

namespace detail {

inline double total_quantity(const std::vector<AgentState>& agents) {
  double s = 0.0;
  for (const auto& a : agents) s += a.quantity;
  return s;
}

inline AgentRecord agent_record(const AgentState& a, const AgentStepTrace& trace) {
  return AgentRecord{a.id,
                     a.role,
                     a.quantity,
                     a.running_average,
                     evaluate(a.utility, a.running_average),
                     derivative(a.utility, a.running_average),
                     trace};
}

}  // namespace detail

/// Builds the round snapshot. `traces` is indexed suppliers first, then
/// consumers, matching agent ids.
inline RoundRecord make_record(const MarketState& state, CapacitySignals signals,
                               const std::vector<AgentStepTrace>& traces) {
  RoundRecord rec;
  rec.round = state.round;
  rec.signals = signals;
  rec.per_agent.reserve(state.suppliers.size() + state.consumers.size());
  std::size_t k = 0;
  for (const auto* side : {&state.suppliers, &state.consumers}) {
    for (const auto& a : *side) {
      auto row = detail::agent_record(a, traces.at(k++));
      if (a.role == Role::Supplier) {
        rec.total_supply += row.quantity;
        rec.total_average_supply += row.running_average;
        rec.supplier_utility_sum += row.utility_value;
      } else {
        rec.total_consumption += row.quantity;
        rec.total_average_consumption += row.running_average;
        rec.consumer_utility_sum += row.utility_value;
      }
      rec.per_agent.push_back(std::move(row));
    }
  }
  rec.sum_of_utilities = rec.supplier_utility_sum + rec.consumer_utility_sum;
  return rec;
}

/// Round-0 state: every agent holds `initial_quantity`, no signal yet.
inline MarketState initial_state(const MarketConfig& config, const ScenarioSpec& scenario) {
  MarketState s;
  std::uint64_t id = 0;
  for (const auto& u : scenario.supplier_utilities) {
    s.suppliers.push_back(AgentState::initial(id++, Role::Supplier, u, config.initial_quantity));
  }
  for (const auto& u : scenario.consumer_utilities) {
    s.consumers.push_back(AgentState::initial(id++, Role::Consumer, u, config.initial_quantity));
  }
  s.last_total_supply = detail::total_quantity(s.suppliers);
  s.last_total_consumption = detail::total_quantity(s.consumers);
  return s;
}

inline RoundRecord initial_record(const MarketState& state) {
  return make_record(state, {},
                     std::vector<AgentStepTrace>(state.suppliers.size() + state.consumers.size()));
}

/// One synchronous round: signals from last round's totals, every agent
/// steps once, totals recomputed. `variate(agent_id, round)` supplies each
/// agent's uniform draw.
template <class VariateSource>
std::pair<MarketState, RoundRecord> advance_round(const MarketState& state,
                                                  const RoleParams& supplier_params,
                                                  const RoleParams& consumer_params,
                                                  SignalSemantics semantics,
                                                  VariateSource&& variate) {
  const auto signals =
      compute_signals(state.last_total_supply, state.last_total_consumption, semantics);
  MarketState next;
  next.round = state.round + 1;
  std::vector<AgentStepTrace> traces;
  traces.reserve(state.suppliers.size() + state.consumers.size());

  auto step_side = [&](const std::vector<AgentState>& agents, std::vector<AgentState>& out,
                       bool signal, const RoleParams& params) {
    out.reserve(agents.size());
    for (const auto& a : agents) {
      auto r = step(a, signal, params, variate(a.id, next.round));
      out.push_back(std::move(r.state));
      traces.push_back(r.trace);
    }
  };
  step_side(state.suppliers, next.suppliers, signals.supplier_signal, supplier_params);
  step_side(state.consumers, next.consumers, signals.consumer_signal, consumer_params);

  next.last_total_supply = detail::total_quantity(next.suppliers);
  next.last_total_consumption = detail::total_quantity(next.consumers);
  auto record = make_record(next, signals, traces);
  return {std::move(next), std::move(record)};
}

/// Advances with the config's parameters and keyed per-agent streams.
inline std::pair<MarketState, RoundRecord> advance_round(const MarketState& state,
                                                         const MarketConfig& config) {
  const auto seed = config.seed;
  return advance_round(state, config.role_params(Role::Supplier),
                       config.role_params(Role::Consumer), config.signal_semantics,
                       [seed](std::uint64_t id, std::uint64_t round) {
                         return agent_variate(seed, id, round);
                       });
}

struct RunArtifact {
  MarketConfig config;
  ScenarioSpec scenario;
  RoundRecord initial;
  std::vector<RoundRecord> rounds;
};

/// Validates, initialises and advances `config.horizon` rounds. A zero
/// horizon is accepted and yields an empty trajectory.
inline RunArtifact run(const MarketConfig& config, const ScenarioSpec& scenario) {
  auto violations = config_violations(config, /*allow_zero_horizon=*/true);
  for (auto& v : validate_scenario(scenario, config)) violations.push_back(std::move(v));
  if (!violations.empty()) throw ConfigError(std::move(violations));

  RunArtifact out{config, scenario, {}, {}};
  auto state = initial_state(config, scenario);
  out.initial = initial_record(state);
  out.rounds.reserve(config.horizon);
  for (std::uint64_t t = 0; t < config.horizon; ++t) {
    auto [next, record] = advance_round(state, config);
    state = std::move(next);
    out.rounds.push_back(std::move(record));
  }
  return out;
}

}  // namespace aimd_market
