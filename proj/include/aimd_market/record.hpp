#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "aimd_market/agent.hpp"

namespace aimd_market {

/// The center's one-bit broadcasts for a round.
struct CapacitySignals {
  bool supplier_signal = false;
  bool consumer_signal = false;

  friend bool operator==(const CapacitySignals&, const CapacitySignals&) = default;
};

/// One agent's row in a round snapshot. Utility value and derivative are
/// taken at the running average; the derivative is nullopt when unbounded.
struct AgentRecord {
  std::uint64_t id = 0;
  Role role = Role::Supplier;
  double quantity = 0.0;
  double running_average = 0.0;
  double utility_value = 0.0;
  std::optional<double> utility_derivative;
  AgentStepTrace trace;

  friend bool operator==(const AgentRecord&, const AgentRecord&) = default;
};

struct RoundRecord {
  std::uint64_t round = 0;
  std::vector<AgentRecord> per_agent;
  double total_supply = 0.0;
  double total_consumption = 0.0;
  double total_average_supply = 0.0;
  double total_average_consumption = 0.0;
  CapacitySignals signals;
  double sum_of_utilities = 0.0;
  double supplier_utility_sum = 0.0;
  double consumer_utility_sum = 0.0;

  friend bool operator==(const RoundRecord&, const RoundRecord&) = default;
};

}  // namespace aimd_market
