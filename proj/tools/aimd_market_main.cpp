// Command-line driver for the AIMD market simulator.

#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "aimd_market/cli.hpp"

namespace {

using aimd_market::cli::CliInvocation;
using aimd_market::cli::Command;

void add_common(CLI::App* sub, CliInvocation& inv, std::string& format, bool with_source) {
  if (with_source) {
    sub->add_option("--config", inv.config_path, "Experiment file (JSON)");
    sub->add_option("--reference", inv.reference, "Built-in experiment: paper-A or paper-B");
  }
  auto& o = inv.overrides;
  sub->add_option("--seed", o.seed, "Run seed");
  sub->add_option("--horizon", o.horizon, "Number of rounds");
  sub->add_option("--gamma", o.gamma, "Back-off gain");
  sub->add_option("--alpha-s", o.alpha_s, "Supplier additive step");
  sub->add_option("--beta-s", o.beta_s, "Supplier back-off factor");
  sub->add_option("--alpha-c", o.alpha_c, "Consumer additive step");
  sub->add_option("--beta-c", o.beta_c, "Consumer back-off factor");
  sub->add_flag("--flip-signal-semantics", o.flip_signal_semantics,
                "Signal suppliers on a supply deficit instead of an excess");
  sub->add_option("--out", inv.output_dir, "Output directory")->capture_default_str();
  sub->add_option("--format", format, "csv or json")
      ->check(CLI::IsMember({"csv", "json"}))
      ->capture_default_str();
}

void add_replication(CLI::App* sub, CliInvocation& inv) {
  sub->add_option("--replicates", inv.replicates, "Number of seeded replicates")
      ->check(CLI::Range(2, 100000))
      ->capture_default_str();
  sub->add_option("--jobs", inv.jobs, "Concurrent replicate workers")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Supply/demand balancing with AIMD agents and one-bit capacity signals"};
  app.require_subcommand(1);

  CliInvocation inv;
  std::string format = "csv";

  auto* run = app.add_subcommand("run", "Run one seeded simulation");
  add_common(run, inv, format, true);
  auto* replicate = app.add_subcommand("replicate", "Run seeded replicates and 95% bands");
  add_common(replicate, inv, format, true);
  add_replication(replicate, inv);
  auto* paper_a = app.add_subcommand("paper-a", "Reference experiment with concave suppliers");
  add_common(paper_a, inv, format, false);
  add_replication(paper_a, inv);
  auto* paper_b = app.add_subcommand("paper-b", "Reference experiment with sqrt suppliers");
  add_common(paper_b, inv, format, false);
  add_replication(paper_b, inv);
  auto* validate = app.add_subcommand("validate", "Check an experiment file");
  add_common(validate, inv, format, true);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  if (*run) inv.command = Command::Run;
  if (*replicate) inv.command = Command::Replicate;
  if (*paper_a) inv.command = Command::PaperA;
  if (*paper_b) inv.command = Command::PaperB;
  if (*validate) inv.command = Command::Validate;
  inv.format = aimd_market::export_format_from_string(format);

  return aimd_market::cli::run_command(inv, std::cout, std::cerr);
}
