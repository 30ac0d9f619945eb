#pragma once

#include <array>
#include <charconv>
#include <cerrno>
#include <cmath>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <initializer_list>
#include <istream>
#include <limits>
#include <optional>
#include <ostream>
#include <span>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "aimd_market/market.hpp"
#include "aimd_market/metrics.hpp"
#include "aimd_market/record.hpp"
#include "aimd_market/replicate.hpp"
#include "aimd_market/scenario.hpp"
#include "aimd_market/utility.hpp"

namespace aimd_market {

using json = nlohmann::json;

// ---------------------------------------------------------------------------
// Numbers

/// Shortest decimal text that parses back to exactly `v`.
inline std::string format_number(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  std::array<char, 32> buf{};
  auto [end, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  return std::string(buf.data(), end);
}

/// JSON has no infinities; non-finite values travel as strings.
inline json json_number(double v) {
  if (std::isfinite(v)) return v;
  return format_number(v);
}

inline double number_from_json(const json& j) {
  if (j.is_number()) return j.get<double>();
  if (j.is_string()) {
    const auto s = j.get<std::string>();
    if (s == "inf") return std::numeric_limits<double>::infinity();
    if (s == "-inf") return -std::numeric_limits<double>::infinity();
    if (s == "nan") return std::numeric_limits<double>::quiet_NaN();
  }
  throw std::invalid_argument("expected a number, got " + j.dump());
}

namespace detail {

inline void reject_unknown_keys(const json& j, std::initializer_list<std::string_view> known,
                                std::string_view context) {
  if (!j.is_object()) {
    throw std::invalid_argument(std::string(context) + " must be an object");
  }
  for (const auto& item : j.items()) {
    bool ok = false;
    for (auto k : known) ok = ok || item.key() == k;
    if (!ok) {
      throw std::invalid_argument("unknown key '" + item.key() + "' in " + std::string(context));
    }
  }
}

template <class T>
void read_if_present(const json& j, const char* key, T& out) {
  if (auto it = j.find(key); it != j.end()) {
    if constexpr (std::is_same_v<T, double>) {
      out = number_from_json(*it);
    } else {
      out = it->template get<T>();
    }
  }
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Config and scenario

inline void to_json(json& j, const UtilitySpec& u) {
  j = json{{"kind", to_string(u.kind)}};
  if (u.optimum) j["optimum"] = *u.optimum;
  if (u.kind == UtilityKind::Quadratic) j["curvature"] = u.curvature;
  if (u.kind == UtilityKind::SqrtMonotone) j["scale"] = u.scale;
}

inline void from_json(const json& j, UtilitySpec& u) {
  detail::reject_unknown_keys(j, {"kind", "optimum", "curvature", "scale"}, "utility");
  u = UtilitySpec{};
  u.kind = utility_kind_from_string(j.at("kind").get<std::string>());
  if (auto it = j.find("optimum"); it != j.end()) u.optimum = number_from_json(*it);
  detail::read_if_present(j, "curvature", u.curvature);
  detail::read_if_present(j, "scale", u.scale);
}

inline void to_json(json& j, const AimdCoefficients& c) {
  j = json{{"alpha", c.alpha}, {"beta", c.beta}};
}

inline void from_json(const json& j, AimdCoefficients& c) {
  detail::reject_unknown_keys(j, {"alpha", "beta"}, "role params");
  detail::read_if_present(j, "alpha", c.alpha);
  detail::read_if_present(j, "beta", c.beta);
}

inline void to_json(json& j, const MarketConfig& c) {
  j = json{{"num_suppliers", c.num_suppliers},
           {"num_consumers", c.num_consumers},
           {"supplier_params", c.supplier_params},
           {"consumer_params", c.consumer_params},
           {"gamma", c.gamma},
           {"horizon", c.horizon},
           {"seed", c.seed},
           {"initial_quantity", c.initial_quantity},
           {"signal_semantics", to_string(c.signal_semantics)}};
}

/// Patch semantics: keys present in `j` overwrite the fields of `c`.
inline void from_json(const json& j, MarketConfig& c) {
  detail::reject_unknown_keys(j,
                              {"num_suppliers", "num_consumers", "supplier_params",
                               "consumer_params", "gamma", "horizon", "seed", "initial_quantity",
                               "signal_semantics"},
                              "config");
  detail::read_if_present(j, "num_suppliers", c.num_suppliers);
  detail::read_if_present(j, "num_consumers", c.num_consumers);
  if (auto it = j.find("supplier_params"); it != j.end()) from_json(*it, c.supplier_params);
  if (auto it = j.find("consumer_params"); it != j.end()) from_json(*it, c.consumer_params);
  detail::read_if_present(j, "gamma", c.gamma);
  detail::read_if_present(j, "horizon", c.horizon);
  detail::read_if_present(j, "seed", c.seed);
  detail::read_if_present(j, "initial_quantity", c.initial_quantity);
  if (auto it = j.find("signal_semantics"); it != j.end()) {
    c.signal_semantics = signal_semantics_from_string(it->get<std::string>());
  }
}

inline void to_json(json& j, const ScenarioSpec& s) {
  j = json{{"mode", to_string(s.mode)},
           {"target_sum", s.target_sum},
           {"supplier_utilities", s.supplier_utilities},
           {"consumer_utilities", s.consumer_utilities}};
}

inline void from_json(const json& j, ScenarioSpec& s) {
  detail::reject_unknown_keys(j, {"mode", "target_sum", "supplier_utilities", "consumer_utilities"},
                              "scenario");
  s = ScenarioSpec{};
  s.mode = scenario_mode_from_string(j.at("mode").get<std::string>());
  s.target_sum = number_from_json(j.at("target_sum"));
  s.supplier_utilities = j.at("supplier_utilities").get<std::vector<UtilitySpec>>();
  s.consumer_utilities = j.at("consumer_utilities").get<std::vector<UtilitySpec>>();
}

inline void to_json(json& j, const Range& r) { j = json::array({r.lo, r.hi}); }

inline void from_json(const json& j, Range& r) {
  if (!j.is_array() || j.size() != 2) throw std::invalid_argument("range must be [lo, hi]");
  r = Range{number_from_json(j[0]), number_from_json(j[1])};
}

inline void to_json(json& j, const ScenarioOptions& o) {
  j = json{{"mode", to_string(o.mode)},
           {"target_sum", o.target_sum},
           {"seed", o.seed},
           {"curvature_range", o.curvature_range},
           {"scale_range", o.scale_range},
           {"couple_value_constraint", o.couple_value_constraint}};
}

inline void from_json(const json& j, ScenarioOptions& o) {
  detail::reject_unknown_keys(j,
                              {"mode", "target_sum", "seed", "curvature_range", "scale_range",
                               "couple_value_constraint"},
                              "generator");
  if (auto it = j.find("mode"); it != j.end()) {
    o.mode = scenario_mode_from_string(it->get<std::string>());
  }
  detail::read_if_present(j, "target_sum", o.target_sum);
  detail::read_if_present(j, "seed", o.seed);
  if (auto it = j.find("curvature_range"); it != j.end()) from_json(*it, o.curvature_range);
  if (auto it = j.find("scale_range"); it != j.end()) from_json(*it, o.scale_range);
  detail::read_if_present(j, "couple_value_constraint", o.couple_value_constraint);
}

/// A resolved experiment: run parameters plus the private utilities.
struct Experiment {
  MarketConfig config;
  ScenarioSpec scenario;
};

/// Reads an experiment document. Accepted top-level keys:
///   "reference"  name of a built-in config used as the base,
///   "config"     MarketConfig fields (partial; overrides the base),
///   "scenario"   explicit ScenarioSpec,
///   "generator"  ScenarioOptions used to sample the scenario.
/// Structural problems are reported as a ConfigError.
inline Experiment parse_experiment(const json& doc) {
  try {
    detail::reject_unknown_keys(doc, {"reference", "config", "scenario", "generator"},
                                "experiment file");
    Experiment e;
    std::optional<ScenarioSpec> base_scenario;
    if (auto it = doc.find("reference"); it != doc.end()) {
      auto ref = reference_config(it->get<std::string>());
      e.config = ref.config;
      base_scenario = ref.scenario;
    }
    if (auto it = doc.find("config"); it != doc.end()) from_json(*it, e.config);

    if (auto it = doc.find("scenario"); it != doc.end()) {
      e.scenario = it->get<ScenarioSpec>();
    } else if (auto g = doc.find("generator"); g != doc.end()) {
      ScenarioOptions opt;
      from_json(*g, opt);
      e.scenario = generate_scenario(e.config, opt);
    } else if (base_scenario) {
      e.scenario = *base_scenario;
    } else {
      throw std::invalid_argument("experiment file needs one of scenario, generator or reference");
    }
    return e;
  } catch (const ConfigError&) {
    throw;
  } catch (const std::exception& ex) {
    throw ConfigError({ex.what()});
  }
}

inline Experiment load_experiment(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError({"cannot open " + path.string()});
  json doc;
  try {
    in >> doc;
  } catch (const json::parse_error& ex) {
    throw ConfigError({path.string() + ": " + ex.what()});
  }
  return parse_experiment(doc);
}

inline json experiment_json(const MarketConfig& config, const ScenarioSpec& scenario) {
  return json{{"config", config}, {"scenario", scenario}};
}

// ---------------------------------------------------------------------------
// Records

inline void to_json(json& j, const AgentRecord& a) {
  j = json{{"agent_id", a.id},
           {"role", to_string(a.role)},
           {"quantity", a.quantity},
           {"running_average", a.running_average},
           {"utility_value", json_number(a.utility_value)},
           {"utility_derivative",
            json_number(a.utility_derivative.value_or(std::numeric_limits<double>::infinity()))},
           {"trace",
            {{"lambda", a.trace.lambda},
             {"bernoulli", a.trace.bernoulli},
             {"branch", to_string(a.trace.branch)}}}};
}

inline void from_json(const json& j, AgentRecord& a) {
  a.id = j.at("agent_id").get<std::uint64_t>();
  a.role = role_from_string(j.at("role").get<std::string>());
  a.quantity = number_from_json(j.at("quantity"));
  a.running_average = number_from_json(j.at("running_average"));
  a.utility_value = number_from_json(j.at("utility_value"));
  const double d = number_from_json(j.at("utility_derivative"));
  a.utility_derivative = std::isinf(d) && d > 0 ? std::nullopt : std::optional<double>(d);
  const auto& t = j.at("trace");
  a.trace.lambda = number_from_json(t.at("lambda"));
  a.trace.bernoulli = t.at("bernoulli").get<bool>();
  a.trace.branch = branch_from_string(t.at("branch").get<std::string>());
}

inline void to_json(json& j, const RoundRecord& r) {
  j = json{{"round", r.round},
           {"per_agent", r.per_agent},
           {"total_supply", r.total_supply},
           {"total_consumption", r.total_consumption},
           {"total_average_supply", r.total_average_supply},
           {"total_average_consumption", r.total_average_consumption},
           {"signals",
            {{"supplier_signal", r.signals.supplier_signal},
             {"consumer_signal", r.signals.consumer_signal}}},
           {"sum_of_utilities", json_number(r.sum_of_utilities)},
           {"supplier_utility_sum", json_number(r.supplier_utility_sum)},
           {"consumer_utility_sum", json_number(r.consumer_utility_sum)}};
}

inline void from_json(const json& j, RoundRecord& r) {
  r.round = j.at("round").get<std::uint64_t>();
  r.per_agent = j.at("per_agent").get<std::vector<AgentRecord>>();
  r.total_supply = number_from_json(j.at("total_supply"));
  r.total_consumption = number_from_json(j.at("total_consumption"));
  r.total_average_supply = number_from_json(j.at("total_average_supply"));
  r.total_average_consumption = number_from_json(j.at("total_average_consumption"));
  r.signals.supplier_signal = j.at("signals").at("supplier_signal").get<bool>();
  r.signals.consumer_signal = j.at("signals").at("consumer_signal").get<bool>();
  r.sum_of_utilities = number_from_json(j.at("sum_of_utilities"));
  r.supplier_utility_sum = number_from_json(j.at("supplier_utility_sum"));
  r.consumer_utility_sum = number_from_json(j.at("consumer_utility_sum"));
}

inline constexpr std::string_view kRunCsvHeader =
    "round,agent_id,role,quantity,running_average,utility_value,utility_derivative,lambda,"
    "bernoulli,branch,total_supply,total_consumption,s_signal,c_signal,sum_of_utilities";

/// One row per agent per round.
inline void write_run_csv(std::ostream& out, std::span<const RoundRecord> records) {
  std::string line;
  out << kRunCsvHeader << '\n';
  for (const auto& r : records) {
    const std::string tail = format_number(r.total_supply) + ',' +
                             format_number(r.total_consumption) + ',' +
                             (r.signals.supplier_signal ? '1' : '0') + ',' +
                             (r.signals.consumer_signal ? '1' : '0') + ',' +
                             format_number(r.sum_of_utilities);
    for (const auto& a : r.per_agent) {
      line.clear();
      line += std::to_string(r.round);
      line += ',';
      line += std::to_string(a.id);
      line += ',';
      line += to_string(a.role);
      for (double v : {a.quantity, a.running_average, a.utility_value,
                       a.utility_derivative.value_or(std::numeric_limits<double>::infinity()),
                       a.trace.lambda}) {
        line += ',';
        line += format_number(v);
      }
      line += a.trace.bernoulli ? ",1," : ",0,";
      line += to_string(a.trace.branch);
      line += ',';
      line += tail;
      line += '\n';
      out << line;
    }
  }
}

/// {"records": [...]} with one compact record per line; keys sorted, so the
/// bytes depend only on the records.
inline void write_run_json(std::ostream& out, std::span<const RoundRecord> records) {
  out << "{\"records\":[";
  for (std::size_t k = 0; k < records.size(); ++k) {
    out << (k == 0 ? "\n" : ",\n") << json(records[k]).dump();
  }
  out << "\n]}\n";
}

inline std::vector<RoundRecord> read_run_json(std::istream& in) {
  json doc;
  in >> doc;
  return doc.at("records").get<std::vector<RoundRecord>>();
}

enum class ExportFormat { Csv, Json };

inline std::string_view extension(ExportFormat f) { return f == ExportFormat::Csv ? "csv" : "json"; }

inline ExportFormat export_format_from_string(std::string_view s) {
  if (s == "csv") return ExportFormat::Csv;
  if (s == "json") return ExportFormat::Json;
  throw std::invalid_argument("unknown format '" + std::string(s) + "' (expected csv or json)");
}

/// Opens `path` for writing, runs `writer`, and reports failures with the
/// path attached.
template <class Writer>
void write_file(const std::filesystem::path& path, Writer&& writer) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) {
    throw std::runtime_error("cannot open " + path.string() + " for writing: " +
                             std::strerror(errno));
  }
  writer(out);
  out.flush();
  if (!out) throw std::runtime_error("write to " + path.string() + " failed");
}

inline void export_run(std::span<const RoundRecord> records, ExportFormat format,
                       const std::filesystem::path& path) {
  write_file(path, [&](std::ostream& out) {
    if (format == ExportFormat::Csv) {
      write_run_csv(out, records);
    } else {
      write_run_json(out, records);
    }
  });
}

// ---------------------------------------------------------------------------
// Summaries and bands

namespace detail {

inline json optional_number(const std::optional<double>& v) {
  return v ? json_number(*v) : json(nullptr);
}

}  // namespace detail

inline void to_json(json& j, const AgentSummary& a) {
  j = json{{"agent_id", a.id},
           {"role", to_string(a.role)},
           {"final_quantity", a.final_quantity},
           {"final_running_average", a.final_running_average},
           {"final_utility", json_number(a.final_utility)},
           {"final_derivative", json_number(a.final_derivative.value_or(
                                    std::numeric_limits<double>::infinity()))},
           {"optimum", detail::optional_number(a.optimum)},
           {"distance_to_optimum", detail::optional_number(a.distance_to_optimum)},
           {"relative_distance", detail::optional_number(a.relative_distance)},
           {"convergence_round",
            a.convergence_round ? json(*a.convergence_round) : json(nullptr)}};
}

inline void to_json(json& j, const RunSummary& s) {
  j = json{{"rounds", s.rounds},
           {"trailing_window", s.window},
           {"trailing_mean_total_supply", s.trailing_mean_total_supply},
           {"trailing_mean_total_consumption", s.trailing_mean_total_consumption},
           {"final_total_supply", s.final_total_supply},
           {"final_total_consumption", s.final_total_consumption},
           {"final_sum_of_utilities", json_number(s.final_sum_of_utilities)},
           {"final_supplier_utility_sum", json_number(s.final_supplier_utility_sum)},
           {"final_consumer_utility_sum", json_number(s.final_consumer_utility_sum)},
           {"max_supplier_utility_sum", detail::optional_number(s.max_supplier_utility_sum)},
           {"max_consumer_utility_sum", detail::optional_number(s.max_consumer_utility_sum)},
           {"final_mean_abs_derivative", json_number(s.final_mean_abs_derivative)},
           {"final_mean_abs_supplier_derivative",
            json_number(s.final_mean_abs_supplier_derivative)},
           {"final_mean_abs_consumer_derivative",
            json_number(s.final_mean_abs_consumer_derivative)},
           {"agents", s.agents}};
}

inline void to_json(json& j, const BandPoint& b) {
  j = json{{"round", b.round},
           {"mean", json_number(b.mean)},
           {"lower", json_number(b.lower)},
           {"upper", json_number(b.upper)},
           {"replicate_count", b.replicate_count}};
}

inline void from_json(const json& j, BandPoint& b) {
  b.round = j.at("round").get<std::uint64_t>();
  b.mean = number_from_json(j.at("mean"));
  b.lower = number_from_json(j.at("lower"));
  b.upper = number_from_json(j.at("upper"));
  b.replicate_count = j.at("replicate_count").get<std::uint64_t>();
}

inline constexpr std::string_view kBandCsvHeader = "series,round,mean,lower,upper,replicate_count";

inline void write_bands_csv(std::ostream& out, const std::map<SeriesKind, BandSeries>& bands) {
  out << kBandCsvHeader << '\n';
  for (auto kind : kAllSeries) {
    auto it = bands.find(kind);
    if (it == bands.end()) continue;
    for (const auto& b : it->second) {
      out << to_string(kind) << ',' << b.round << ',' << format_number(b.mean) << ','
          << format_number(b.lower) << ',' << format_number(b.upper) << ',' << b.replicate_count
          << '\n';
    }
  }
}

inline json bands_json(const std::map<SeriesKind, BandSeries>& bands) {
  json j = json::object();
  for (const auto& [kind, series] : bands) j[std::string(to_string(kind))] = series;
  return j;
}

/// Replicate metadata: seeds used and each replicate's summary.
inline json replicate_json(const ReplicateResult& r) {
  return json{{"replicate_count", r.seeds.size()},
              {"seed_policy", "base seed plus replicate index"},
              {"seeds", r.seeds},
              {"summaries", r.summaries}};
}

inline void write_json_file(const std::filesystem::path& path, const json& j) {
  write_file(path, [&](std::ostream& out) { out << j.dump(2) << '\n'; });
}

}  // namespace aimd_market
