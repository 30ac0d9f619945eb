#pragma once

#include <cstdint>
#include <exception>
#include <filesystem>
#include <optional>
#include <ostream>
#include <string>
#include <system_error>
#include <vector>

#include "aimd_market/io.hpp"
#include "aimd_market/market.hpp"
#include "aimd_market/metrics.hpp"
#include "aimd_market/replicate.hpp"
#include "aimd_market/scenario.hpp"

namespace aimd_market::cli {

enum class Command { Run, Replicate, PaperA, PaperB, Validate };

/// Flag values that replace config-file fields. Applied before validation.
struct Overrides {
  std::optional<std::uint64_t> seed;
  std::optional<std::uint64_t> horizon;
  std::optional<double> gamma;
  std::optional<double> alpha_s;
  std::optional<double> beta_s;
  std::optional<double> alpha_c;
  std::optional<double> beta_c;
  bool flip_signal_semantics = false;

  void apply(MarketConfig& c) const {
    if (seed) c.seed = *seed;
    if (horizon) c.horizon = *horizon;
    if (gamma) c.gamma = *gamma;
    if (alpha_s) c.supplier_params.alpha = *alpha_s;
    if (beta_s) c.supplier_params.beta = *beta_s;
    if (alpha_c) c.consumer_params.alpha = *alpha_c;
    if (beta_c) c.consumer_params.beta = *beta_c;
    if (flip_signal_semantics) c.signal_semantics = SignalSemantics::DeficitSupply;
  }
};

struct CliInvocation {
  Command command = Command::Run;
  std::optional<std::filesystem::path> config_path;
  std::optional<std::string> reference;
  Overrides overrides;
  std::filesystem::path output_dir = "out";
  ExportFormat format = ExportFormat::Csv;
  std::size_t replicates = 20;
  std::size_t jobs = 1;
};

enum ExitCode : int { kOk = 0, kInvalidConfig = 1, kUsage = 2, kIoError = 3, kInternal = 4 };

namespace detail {

inline Experiment resolve(const CliInvocation& inv) {
  Experiment e;
  if (inv.command == Command::PaperA || inv.command == Command::PaperB) {
    auto ref = reference_config(inv.command == Command::PaperA ? "paper-A" : "paper-B");
    e = Experiment{ref.config, ref.scenario};
  } else if (inv.config_path) {
    e = load_experiment(*inv.config_path);
  } else if (inv.reference) {
    auto ref = reference_config(*inv.reference);
    e = Experiment{ref.config, ref.scenario};
  } else {
    throw ConfigError({"a config file (--config) or a reference name (--reference) is required"});
  }
  inv.overrides.apply(e.config);
  return e;
}

inline std::vector<std::string> violations(const Experiment& e) {
  auto out = config_violations(e.config);
  for (auto& v : validate_scenario(e.scenario, e.config)) out.push_back(std::move(v));
  return out;
}

inline std::filesystem::path prepare_output(const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec || !std::filesystem::is_directory(dir)) {
    throw std::runtime_error("cannot create output directory " + dir.string() +
                             (ec ? ": " + ec.message() : ""));
  }
  return dir;
}

inline std::filesystem::path with_ext(const std::filesystem::path& dir, const std::string& stem,
                                      ExportFormat f) {
  return dir / (stem + "." + std::string(extension(f)));
}

inline void write_single_run(const Experiment& e, const CliInvocation& inv, std::ostream& log) {
  const auto dir = prepare_output(inv.output_dir);
  const auto artifact = run(e.config, e.scenario);
  const auto summary = summarize(artifact);
  const auto run_path = with_ext(dir, "run", inv.format);
  export_run(artifact.rounds, inv.format, run_path);
  write_json_file(dir / "summary.json", json(summary));
  log << "wrote " << run_path.string() << " (" << artifact.rounds.size() << " rounds)\n";
  log << "trailing mean total supply " << format_number(summary.trailing_mean_total_supply)
      << ", consumption " << format_number(summary.trailing_mean_total_consumption) << '\n';
}

inline void write_replicates(const Experiment& e, const CliInvocation& inv, std::ostream& log) {
  const auto dir = prepare_output(inv.output_dir);
  const auto result = run_replicates(e.config, e.scenario, inv.replicates, inv.jobs);
  const auto band_path = with_ext(dir, "bands", inv.format);
  write_file(band_path, [&](std::ostream& out) {
    if (inv.format == ExportFormat::Csv) {
      write_bands_csv(out, result.bands);
    } else {
      out << bands_json(result.bands).dump() << '\n';
    }
  });
  write_json_file(dir / "replicates.json", replicate_json(result));
  log << "wrote " << band_path.string() << " (R=" << inv.replicates << ")\n";
}

}  // namespace detail

/// Executes one invocation. Failures print a single `error: <kind>: ...`
/// line to `err` and return a nonzero ExitCode.
inline int run_command(const CliInvocation& inv, std::ostream& out, std::ostream& err) {
  try {
    const auto experiment = detail::resolve(inv);
    const auto problems = detail::violations(experiment);
    if (inv.command == Command::Validate) {
      for (const auto& p : problems) out << "violation: " << p << '\n';
      if (!problems.empty()) {
        err << "error: invalid-config: " << problems.size() << " violation(s)\n";
        return kInvalidConfig;
      }
      out << "ok\n";
      return kOk;
    }
    if (!problems.empty()) throw ConfigError(problems);

    detail::prepare_output(inv.output_dir);
    write_json_file(inv.output_dir / "config.json",
                    experiment_json(experiment.config, experiment.scenario));
    switch (inv.command) {
      case Command::Run:
        detail::write_single_run(experiment, inv, out);
        break;
      case Command::Replicate:
        detail::write_replicates(experiment, inv, out);
        break;
      case Command::PaperA:
      case Command::PaperB:
        detail::write_single_run(experiment, inv, out);
        detail::write_replicates(experiment, inv, out);
        break;
      case Command::Validate:
        break;
    }
    return kOk;
  } catch (const ConfigError& ex) {
    for (const auto& v : ex.violations()) out << "violation: " << v << '\n';
    err << "error: invalid-config: " << ex.violations().size() << " violation(s)\n";
    return kInvalidConfig;
  } catch (const std::invalid_argument& ex) {
    err << "error: usage: " << ex.what() << '\n';
    return kUsage;
  } catch (const std::runtime_error& ex) {
    err << "error: io: " << ex.what() << '\n';
    return kIoError;
  } catch (const std::exception& ex) {
    err << "error: internal: " << ex.what() << '\n';
    return kInternal;
  }
}

}  // namespace aimd_market::cli
