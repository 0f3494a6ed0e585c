#include "macpp/cli.hpp"

#include <CLI11.hpp>

#include <charconv>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <ostream>
#include <sstream>

#include "macpp/config.hpp"
#include "macpp/diagnostics.hpp"
#include "macpp/errors.hpp"
#include "macpp/inference.hpp"
#include "macpp/simulate.hpp"

namespace macpp {

namespace fs = std::filesystem;
using nlohmann::json;
using nlohmann::ordered_json;

namespace {

struct Options {
  std::string config;
  std::optional<int> scenario;
  std::optional<std::uint64_t> seed;
  std::string out;
  std::optional<std::string> pattern;
  std::optional<std::size_t> chains;
  bool clip = false;
  std::string summary;
  bool with_nsp = false;
  std::string ids;
  std::optional<std::size_t> n;
};

void ensure_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir)) throw IoError("cannot create output directory " + dir.string());
}

std::ofstream open_out(const fs::path& path) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot write " + path.string());
  return f;
}

void write_json(const fs::path& path, const ordered_json& j) {
  auto f = open_out(path);
  f << j.dump(2) << '\n';
  if (!f) throw IoError("failed writing " + path.string());
}

json read_json(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError(path.string() + ": invalid JSON: " + e.what());
  }
}

/// A manifest written by `command`, or a bare config.
bool is_manifest(const json& j) { return j.is_object() && j.contains("command") && j.contains("config"); }

RunConfig config_from(const Options& o) {
  if (o.config.empty()) return RunConfig{};
  return load_config(o.config);
}

ordered_json counts_json(const MultitypePattern& pattern) {
  ordered_json c = ordered_json::object();
  for (TaxonIndex t = 0; t < pattern.num_taxa(); ++t) c[pattern.taxa()[t]] = pattern.count(t);
  return c;
}

ordered_json params_json(const ModelGraph& graph, const ParamVector& p) {
  ordered_json out = ordered_json::object();
  const auto names = parameter_names(graph);
  const auto values = flatten(p);
  for (std::size_t i = 0; i < names.size(); ++i) out[names[i]] = values[i];
  return out;
}

ordered_json validation_json(const CountValidation& v) {
  ordered_json arr = ordered_json::array();
  for (const CountEntry& e : v.entries) {
    ordered_json row{{"taxon", e.taxon}, {"role", to_string(e.role)}, {"observed", e.observed},
                     {"expected", e.expected}};
    // an empty taxon has nothing to compare against
    row["ratio"] = e.ratio && e.observed > 0 ? ordered_json(*e.ratio) : ordered_json(nullptr);
    arr.push_back(row);
  }
  return arr;
}

ordered_json thomas_json(const ThomasFit& f) {
  ordered_json j{{"kappa", f.kappa}, {"sigma", f.sigma}, {"mu", f.mu},
                 {"converged", f.converged}, {"objective", f.objective}};
  if (!f.note.empty()) j["note"] = f.note;
  return j;
}

/// Summary statistics go to reports at 6 significant digits.
double sig6(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return std::strtod(buf, nullptr);
}

// ---- simulate -------------------------------------------------------------

int cmd_simulate(const Options& o, std::ostream& out) {
  RunConfig c = config_from(o);
  if (o.scenario) {
    scenario(*o.scenario);
    c.scenario = o.scenario;
    c.taxa.clear();
    c.params.clear();
    c.window.reset();
  }
  if (o.seed) {
    c.seed = *o.seed;
    c.mcmc.seed = *o.seed;
  }
  if (c.window && c.window->kind == WindowSpec::Kind::ConvexHull)
    throw ConfigError("window: convex_hull cannot be simulated; give a rectangle or polygon");
  const ModelGraph graph = build_graph(c);
  const ParamVector params = build_params(c, graph);
  const Window window = build_window(c);
  const MultitypePattern pattern = simulate_pattern(graph, params, window, c.seed);

  const fs::path dir(o.out);
  ensure_dir(dir);
  {
    auto f = open_out(dir / "pattern.csv");
    write_pattern_csv(f, pattern);
  }
  const CountValidation expected =
      expected_counts(pattern, graph, params, MassOptions{c.mcmc.mc_integral_samples, c.mcmc.seed});
  ordered_json exp = ordered_json::object();
  for (const CountEntry& e : expected.entries) exp[e.taxon] = e.expected;

  ordered_json manifest{{"command", "simulate"}, {"config", to_json(c)}};
  manifest["seed"] = c.seed;
  manifest["window"] = to_json(window);
  manifest["params"] = params_json(graph, params);
  manifest["counts"] = counts_json(pattern);
  manifest["expected_counts"] = exp;
  write_json(dir / "manifest.json", manifest);
  out << "simulated " << pattern.size() << " points -> " << (dir / "pattern.csv").string() << '\n';
  return 0;
}

// ---- fit ------------------------------------------------------------------

int cmd_fit(const Options& o, std::ostream& out, std::ostream& err) {
  RunConfig c = config_from(o);
  if (o.pattern) c.pattern = *o.pattern;
  if (o.seed) c.mcmc.seed = *o.seed;
  if (o.chains) c.mcmc.n_chains = *o.chains;
  if (o.clip) c.clip = true;
  if (!c.pattern) throw ConfigError("pattern: missing (use --pattern or the config's \"pattern\")");
  if (c.mcmc.n_chains == 0) throw ConfigError("--chains must be >= 1");

  const ModelGraph graph = build_graph(c);
  const McmcConfig mcmc = build_mcmc(c, graph);
  const PatternReadResult read = load_pattern(c, graph, *c.pattern);
  const MultitypePattern& pattern = read.pattern;

  const ChainSet chains = run_chains(pattern, graph, c.priors, mcmc);

  const fs::path dir(o.out);
  ensure_dir(dir);
  if (chains.chains.size() == 1) {
    auto f = open_out(dir / "samples.csv");
    chains.chains.front().write_csv(f);
  } else {
    for (std::size_t k = 0; k < chains.chains.size(); ++k) {
      auto f = open_out(dir / ("samples_chain" + std::to_string(k + 1) + ".csv"));
      chains.chains[k].write_csv(f);
    }
  }

  ordered_json summary{{"command", "fit"}, {"config", to_json(c)}};
  summary["seed"] = mcmc.seed;
  summary["window"] = to_json(pattern.window());
  summary["dropped_points"] = read.dropped;
  summary["counts"] = counts_json(pattern);
  summary["proposal_sd"] = mcmc.resolved_proposal_sd(graph, c.priors);
  summary["draws_per_chain"] = chains.chains.front().num_draws();
  ordered_json params = ordered_json::array();
  for (const ParamSummary& s : chains.combined.summaries) {
    params.push_back({{"name", s.name}, {"mean", sig6(s.mean)}, {"sd", sig6(s.sd)},
                      {"q025", sig6(s.q025)}, {"q50", sig6(s.q50)}, {"q975", sig6(s.q975)}});
  }
  summary["posterior"] = params;
  const ParamVector mean = chains.combined.posterior_mean(graph);
  // full precision: validate reads this back
  summary["posterior_mean"] = params_json(graph, mean);
  ordered_json acc = ordered_json::object();
  const auto offspring = graph.offspring();
  for (std::size_t l = 0; l < offspring.size(); ++l) {
    ordered_json per = ordered_json::array();
    for (const PosteriorSamples& ch : chains.chains) per.push_back(ch.acceptance_rate[l]);
    acc[graph.names[offspring[l]]] = per;
  }
  summary["acceptance_rate"] = acc;
  ordered_json warnings = ordered_json::array();
  for (std::size_t l = 0; l < offspring.size(); ++l) {
    for (std::size_t k = 0; k < chains.chains.size(); ++k) {
      const double r = chains.chains[k].acceptance_rate[l];
      if (acceptance_flagged(r)) {
        std::ostringstream msg;
        msg << "h." << graph.names[offspring[l]] << " acceptance " << format_double(r) << " in chain " << k + 1
            << " is outside (" << kAcceptanceLow << ", " << kAcceptanceHigh << "); consider mcmc.proposal_sd";
        warnings.push_back(msg.str());
        err << "warning: " << msg.str() << '\n';
      }
    }
  }
  summary["warnings"] = warnings;
  if (!chains.rhat.empty()) {
    ordered_json r = ordered_json::object();
    for (std::size_t p = 0; p < chains.rhat.size(); ++p) r[chains.combined.names[p]] = chains.rhat[p];
    summary["rhat"] = r;
  }
  write_json(dir / "summary.json", summary);
  out << "fit " << pattern.size() << " points, " << chains.chains.size() << " chain(s) -> "
      << (dir / "summary.json").string() << '\n';
  return 0;
}

// ---- validate ---------------------------------------------------------------

int cmd_validate(Options o, std::ostream& out) {
  if (!o.config.empty()) {
    const json m = read_json(o.config);
    if (!is_manifest(m) || m["command"] != "validate" || !m.contains("inputs"))
      throw ConfigError(o.config + ": not a validate manifest");
    const json& in = m["inputs"];
    if (o.summary.empty() && in.contains("summary")) o.summary = in["summary"].get<std::string>();
    if (!o.pattern && in.contains("pattern") && !in["pattern"].is_null()) o.pattern = in["pattern"].get<std::string>();
    if (!o.with_nsp && in.contains("with_nsp")) o.with_nsp = in["with_nsp"].get<bool>();
  }
  if (o.summary.empty()) throw ConfigError("--summary is required");
  const json s = read_json(o.summary);
  if (!is_manifest(s) || s["command"] != "fit" || !s.contains("posterior_mean"))
    throw ConfigError(o.summary + ": not a fit summary");
  RunConfig c = parse_config(s["config"]);
  const ordered_json fit_config = to_json(c);
  if (o.pattern) c.pattern = *o.pattern;
  if (!c.pattern) throw ConfigError("pattern: missing");
  const ModelGraph graph = build_graph(c);
  const PatternReadResult read = load_pattern(c, graph, *c.pattern);

  const auto names = parameter_names(graph);
  std::vector<double> values;
  for (const std::string& n : names) {
    if (!s["posterior_mean"].contains(n)) throw ConfigError(o.summary + ": posterior_mean." + n + " missing");
    values.push_back(s["posterior_mean"][n].get<double>());
  }
  const ParamVector estimate = unflatten(graph, values);
  const CountValidation v =
      expected_counts(read.pattern, graph, estimate, MassOptions{c.mcmc.mc_integral_samples, c.mcmc.seed});

  ordered_json report{{"command", "validate"}, {"config", fit_config}};
  ordered_json inputs{{"summary", o.summary}, {"with_nsp", o.with_nsp}};
  inputs["pattern"] = o.pattern ? ordered_json(*o.pattern) : ordered_json(nullptr);
  report["inputs"] = inputs;
  report["validation"] = validation_json(v);
  if (o.with_nsp) {
    ordered_json nsp = ordered_json::object();
    for (TaxonIndex t : graph.offspring())
      nsp[graph.names[t]] = thomas_json(thomas_min_contrast(read.pattern.locations(t), read.pattern.window(), c.nsp));
    report["nsp_baseline"] = nsp;
  }
  const fs::path dir(o.out);
  ensure_dir(dir);
  write_json(dir / "validation.json", report);
  for (const CountEntry& e : v.entries) {
    out << e.taxon << ": observed " << e.observed << ", expected " << format_double(e.expected) << '\n';
  }
  return 0;
}

// ---- scenarios -------------------------------------------------------------

int parse_int(std::string_view text) {
  int v = 0;
  const auto [p, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc{} || p != text.data() + text.size()) throw ConfigError("--ids: bad number '" + std::string(text) + "'");
  return v;
}

std::vector<int> parse_ids(const std::string& text) {
  std::vector<int> ids;
  std::stringstream ss(text);
  std::string part;
  while (std::getline(ss, part, ',')) {
    if (part.empty()) continue;
    const auto dots = part.find("..");
    if (dots == std::string::npos) {
      ids.push_back(parse_int(part));
    } else {
      const int a = parse_int(std::string_view(part).substr(0, dots));
      const int b = parse_int(std::string_view(part).substr(dots + 2));
      if (a > b) throw ConfigError("--ids: empty range " + part);
      for (int i = a; i <= b; ++i) ids.push_back(i);
    }
  }
  if (ids.empty()) throw ConfigError("--ids: no scenario ids");
  for (int id : ids) scenario(id);
  return ids;
}

int cmd_scenarios(const Options& o, std::ostream& out) {
  RunConfig c = config_from(o);
  if (!o.ids.empty()) c.scenarios.ids = parse_ids(o.ids);
  if (o.n) c.scenarios.n_datasets = *o.n;
  if (o.seed) {
    c.seed = *o.seed;
    c.mcmc.seed = *o.seed;
  }
  if (o.with_nsp) c.scenarios.with_nsp = true;
  if (c.scenarios.ids.empty()) throw ConfigError("scenarios.ids: missing (use --ids)");
  if (c.scenarios.n_datasets < 2) throw ConfigError("scenarios.n_datasets must be >= 2");

  std::vector<ScenarioReport> reports;
  for (int id : c.scenarios.ids) {
    const Scenario s = scenario(id);
    ScenarioOptions so;
    so.n_datasets = c.scenarios.n_datasets;
    so.seed = c.seed;
    so.mcmc = build_mcmc(c, s.graph());
    so.priors = c.priors;
    so.with_nsp = c.scenarios.with_nsp;
    so.nsp = c.nsp;
    reports.push_back(run_scenario(s, so));
    out << "scenario " << id << " done\n";
  }

  const fs::path dir(o.out);
  ensure_dir(dir);
  {
    auto f = open_out(dir / "report.csv");
    write_scenario_csv(f, reports);
  }
  ordered_json arr = ordered_json::array();
  for (const ScenarioReport& r : reports) {
    ordered_json j{{"id", r.scenario.id},
                   {"density", r.scenario.density_label()},
                   {"bandwidth", r.scenario.bandwidth_label()},
                   {"unrelated_present", r.scenario.unrelated_present},
                   {"n_datasets", r.n_datasets},
                   {"n_failed", r.n_failed}};
    j["nsp_failure_pct"] = r.nsp_failure_pct ? ordered_json(*r.nsp_failure_pct) : ordered_json(nullptr);
    ordered_json rows = ordered_json::array();
    for (const ScenarioRow& row : r.rows) {
      ordered_json rj{{"parameter", row.parameter}, {"true", row.truth}, {"est", row.est},
                      {"sd", row.sd}, {"se", row.se}};
      rj["nsp_est"] = row.nsp_est ? ordered_json(*row.nsp_est) : ordered_json(nullptr);
      rj["nsp_se"] = row.nsp_se ? ordered_json(*row.nsp_se) : ordered_json(nullptr);
      rows.push_back(rj);
    }
    j["rows"] = rows;
    ordered_json acc = ordered_json::array();
    for (const DatasetResult& d : r.datasets) {
      if (!d.fit_ok) continue;
      acc.push_back(d.acceptance_rate);
    }
    j["acceptance_rate"] = acc;
    std::size_t flagged = 0;
    for (const DatasetResult& d : r.datasets)
      for (double a : d.acceptance_rate) flagged += d.fit_ok && acceptance_flagged(a);
    j["acceptance_flagged"] = flagged;
    ordered_json errors = ordered_json::array();
    for (const DatasetResult& d : r.datasets)
      if (!d.fit_ok) errors.push_back({{"dataset", d.index}, {"error", d.error}});
    j["errors"] = errors;
    arr.push_back(j);
  }
  write_json(dir / "report.json", ordered_json{{"command", "scenarios"}, {"config", to_json(c)}, {"scenarios", arr}});
  return 0;
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Multilayer adjusted cluster point process toolkit"};
  app.require_subcommand(1);
  Options o;

  auto* sim = app.add_subcommand("simulate", "Simulate a multitype pattern");
  sim->add_option("--scenario", o.scenario, "Built-in scenario id (1-12)");
  sim->add_option("--config", o.config, "Run config or manifest (JSON)");
  sim->add_option("--seed", o.seed, "Base seed");
  sim->add_option("-o,--out", o.out, "Output directory")->required();

  auto* fit = app.add_subcommand("fit", "Fit the model by MCMC");
  fit->add_option("--config", o.config, "Run config or manifest (JSON)");
  fit->add_option("--pattern", o.pattern, "Labeled points CSV (taxon,x,y)");
  fit->add_option("--seed", o.seed, "MCMC seed");
  fit->add_option("--chains", o.chains, "Number of chains");
  fit->add_flag("--clip", o.clip, "Drop points outside the window instead of failing");
  fit->add_option("-o,--out", o.out, "Output directory")->required();

  auto* val = app.add_subcommand("validate", "Observed vs expected counts for a fit");
  val->add_option("--summary", o.summary, "summary.json from fit");
  val->add_option("--config", o.config, "validation.json manifest to replay");
  val->add_option("--pattern", o.pattern, "Override the pattern path");
  val->add_flag("--with-nsp", o.with_nsp, "Add the Thomas minimum-contrast baseline");
  val->add_option("-o,--out", o.out, "Output directory")->required();

  auto* sc = app.add_subcommand("scenarios", "Run the simulation study grid");
  sc->add_option("--ids", o.ids, "Scenario ids, e.g. 1,3 or 1..12");
  sc->add_option("--n", o.n, "Datasets per scenario");
  sc->add_option("--seed", o.seed, "Base seed");
  sc->add_option("--config", o.config, "Run config or manifest (JSON)");
  sc->add_flag("--with-nsp", o.with_nsp, "Add the Thomas minimum-contrast baseline");
  sc->add_option("-o,--out", o.out, "Output directory")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  }

  try {
    if (*sim) return cmd_simulate(o, out);
    if (*fit) return cmd_fit(o, out, err);
    if (*val) return cmd_validate(o, out);
    if (*sc) return cmd_scenarios(o, out);
  } catch (const NumericalError& e) {
    err << "numerical error: " << e.what() << '\n';
    return 2;
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  } catch (const nlohmann::json::exception& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  }
  return 1;
}

}  // namespace macpp
