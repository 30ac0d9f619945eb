#include <cmath>
#include <sstream>

#include <gtest/gtest.h>

#include "aimd_market/io.hpp"
#include "aimd_market/market.hpp"
#include "aimd_market/metrics.hpp"
#include "aimd_market/scenario.hpp"

namespace aimd_market {
namespace {

TEST(ComputeSignals, Examples) {
  EXPECT_EQ(compute_signals(910, 890), (CapacitySignals{true, false}));
  EXPECT_EQ(compute_signals(890, 910), (CapacitySignals{false, true}));
  EXPECT_EQ(compute_signals(900, 900), (CapacitySignals{false, false}));
}

TEST(ComputeSignals, FlippedSemanticsSignalsTheDeficitSide) {
  EXPECT_EQ(compute_signals(910, 890, SignalSemantics::DeficitSupply),
            (CapacitySignals{false, true}));
  EXPECT_EQ(compute_signals(890, 910, SignalSemantics::DeficitSupply),
            (CapacitySignals{true, false}));
  EXPECT_EQ(compute_signals(5, 5, SignalSemantics::DeficitSupply), (CapacitySignals{}));
}

MarketState two_agent_state(double supply, double consumption) {
  MarketState s;
  s.suppliers.push_back(
      AgentState{0, Role::Supplier, supply, supply, 4, UtilitySpec::quadratic(200, 10)});
  s.consumers.push_back(AgentState{1, Role::Consumer, consumption, consumption, 4,
                                   UtilitySpec::quadratic(300, 10)});
  s.round = 4;
  s.last_total_supply = supply;
  s.last_total_consumption = consumption;
  return s;
}

TEST(AdvanceRound, SignalledSupplierBacksOff) {
  const auto state = two_agent_state(100, 50);
  const RoleParams p{5.0, 0.75, 2.0};
  auto [next, rec] = advance_round(state, p, p, SignalSemantics::ExcessSide,
                                   [](std::uint64_t, std::uint64_t) { return 0.0; });
  EXPECT_DOUBLE_EQ(next.suppliers[0].quantity, 75.0);
  EXPECT_DOUBLE_EQ(next.consumers[0].quantity, 55.0);
  EXPECT_EQ(rec.signals, (CapacitySignals{true, false}));
  EXPECT_EQ(rec.round, 5u);
  EXPECT_EQ(next.round, 5u);
  EXPECT_EQ(rec.per_agent[0].trace.branch, Branch::MultiplicativeDecrease);
  EXPECT_DOUBLE_EQ(rec.total_supply, 75.0);
  EXPECT_DOUBLE_EQ(next.last_total_supply, 75.0);
  EXPECT_DOUBLE_EQ(next.last_total_consumption, 55.0);
}

TEST(AdvanceRound, BalancedTotalsSendNoSignal) {
  auto state = two_agent_state(100, 100);
  state.suppliers[0].utility = UtilitySpec::quadratic(50, 10);
  const RoleParams p{5.0, 0.75, 2.0};
  auto [next, rec] = advance_round(state, p, p, SignalSemantics::ExcessSide,
                                   [](std::uint64_t, std::uint64_t) { return 0.0; });
  EXPECT_EQ(rec.signals, CapacitySignals{});
  EXPECT_DOUBLE_EQ(next.suppliers[0].quantity, 95.0);  // above its optimum
  EXPECT_DOUBLE_EQ(next.consumers[0].quantity, 105.0);
  for (const auto& a : rec.per_agent) EXPECT_EQ(a.trace.lambda, 0.0);
}

TEST(AdvanceRound, VariatesAreKeyedByAgentAndRound) {
  const auto state = two_agent_state(100, 50);
  std::vector<std::pair<std::uint64_t, std::uint64_t>> keys;
  const RoleParams p{5.0, 0.75, 2.0};
  advance_round(state, p, p, SignalSemantics::ExcessSide,
                [&](std::uint64_t id, std::uint64_t round) {
                  keys.emplace_back(id, round);
                  return 0.5;
                });
  ASSERT_EQ(keys.size(), 2u);
  EXPECT_EQ(keys[0], (std::pair<std::uint64_t, std::uint64_t>{0, 5}));
  EXPECT_EQ(keys[1], (std::pair<std::uint64_t, std::uint64_t>{1, 5}));
}

ReferenceConfig paper_a() { return reference_config("paper-A"); }

TEST(Run, ZeroHorizonEchoesInitialState) {
  auto ref = paper_a();
  ref.config.horizon = 0;
  ref.config.initial_quantity = 7.0;
  const auto artifact = run(ref.config, ref.scenario);
  EXPECT_TRUE(artifact.rounds.empty());
  const auto summary = summarize(artifact);
  EXPECT_EQ(summary.rounds, 1u);
  EXPECT_DOUBLE_EQ(summary.final_total_supply, 7.0 * 9);
  EXPECT_DOUBLE_EQ(summary.final_total_consumption, 7.0 * 18);
  for (const auto& a : summary.agents) EXPECT_DOUBLE_EQ(a.final_running_average, 7.0);
}

TEST(Run, RejectsInvalidConfigBeforeRunning) {
  auto ref = paper_a();
  ref.config.supplier_params.beta = 1.2;
  EXPECT_THROW(run(ref.config, ref.scenario), ConfigError);
  ref = paper_a();
  ref.scenario.consumer_utilities.pop_back();
  try {
    run(ref.config, ref.scenario);
    FAIL() << "expected ConfigError";
  } catch (const ConfigError& e) {
    EXPECT_FALSE(e.violations().empty());
  }
}

TEST(Run, SameSeedGivesIdenticalRecordStream) {
  const auto ref = paper_a();
  const auto a = run(ref.config, ref.scenario);
  const auto b = run(ref.config, ref.scenario);
  ASSERT_EQ(a.rounds.size(), 5000u);
  EXPECT_TRUE(a.rounds == b.rounds);
  std::ostringstream ca, cb;
  write_run_csv(ca, a.rounds);
  write_run_csv(cb, b.rounds);
  EXPECT_EQ(ca.str(), cb.str());

  auto other = ref.config;
  other.seed += 1;
  EXPECT_FALSE(run(other, ref.scenario).rounds == a.rounds);
}

TEST(Run, ZeroGainQuantitiesStayInBandAfterEntry) {
  auto ref = paper_a();
  ref.config.gamma = 0.0;
  ref.config.horizon = 600;
  const auto artifact = run(ref.config, ref.scenario);
  const std::size_t n_sup = ref.scenario.supplier_utilities.size();
  for (std::size_t k = 0; k < artifact.initial.per_agent.size(); ++k) {
    const auto& u = k < n_sup ? ref.scenario.supplier_utilities[k]
                              : ref.scenario.consumer_utilities[k - n_sup];
    const double alpha = 5.0;
    const double z0 = artifact.initial.per_agent[k].quantity;
    const auto entry = static_cast<std::uint64_t>(std::ceil(std::abs(z0 - *u.optimum) / alpha));
    for (const auto& rec : artifact.rounds) {
      if (rec.round < entry) continue;
      const double q = rec.per_agent[k].quantity;
      ASSERT_GE(q, *u.optimum - alpha);
      ASSERT_LE(q, *u.optimum + alpha);
    }
  }
}

TEST(RunInvariants, SignalsExclusiveAndTotalsConserved) {
  const auto ref = paper_a();
  const auto artifact = run(ref.config, ref.scenario);
  double prev_supply = artifact.initial.total_supply;
  double prev_consumption = artifact.initial.total_consumption;
  for (const auto& rec : artifact.rounds) {
    ASSERT_FALSE(rec.signals.supplier_signal && rec.signals.consumer_signal);
    ASSERT_EQ(!rec.signals.supplier_signal && !rec.signals.consumer_signal,
              prev_supply == prev_consumption);
    double supply = 0.0, consumption = 0.0;
    for (const auto& a : rec.per_agent) (a.role == Role::Supplier ? supply : consumption) += a.quantity;
    ASSERT_EQ(supply, rec.total_supply);
    ASSERT_EQ(consumption, rec.total_consumption);
    prev_supply = rec.total_supply;
    prev_consumption = rec.total_consumption;
  }
}

TEST(RunInvariants, ChainIsMarkovInTheState) {
  auto ref = paper_a();
  ref.config.horizon = 300;
  const auto full = run(ref.config, ref.scenario);
  auto state = initial_state(ref.config, ref.scenario);
  for (std::uint64_t t = 0; t < 200; ++t) state = advance_round(state, ref.config).first;
  const auto replay = advance_round(state, ref.config).second;
  EXPECT_TRUE(replay == full.rounds[200]);
}

// Trailing-window gap between total supply and consumption shrinks toward
// the end of a paper-A run.
TEST(RunInvariants, SupplyAndConsumptionWindowsConverge) {
  const auto ref = paper_a();
  for (std::uint64_t seed : {1u, 2u, 3u}) {
    auto cfg = ref.config;
    cfg.seed = seed;
    const auto artifact = run(cfg, ref.scenario);
    auto gap_at = [&](std::size_t end) {
      double x = 0.0, y = 0.0;
      for (std::size_t t = end - 500; t < end; ++t) {
        x += artifact.rounds[t].total_supply;
        y += artifact.rounds[t].total_consumption;
      }
      return std::abs(x - y) / 500.0;
    };
    const double slack = 0.05 * ref.scenario.target_sum;
    EXPECT_LE(gap_at(5000), slack) << "seed " << seed;
    EXPECT_LE(gap_at(5000), gap_at(500) + slack) << "seed " << seed;
    EXPECT_LE(gap_at(5000), gap_at(2500) + slack) << "seed " << seed;
  }
}

}  // namespace
}  // namespace aimd_market
