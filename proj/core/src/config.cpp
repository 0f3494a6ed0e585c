#include "macpp/config.hpp"

#include <cmath>
#include <fstream>
#include <initializer_list>
#include <limits>
#include <set>
#include <sstream>

#include "macpp/errors.hpp"
#include "macpp/simulate.hpp"

namespace macpp {

using nlohmann::json;
using nlohmann::ordered_json;

namespace {

[[noreturn]] void fail(const std::string& path, const std::string& what) {
  throw ConfigError(path + ": " + what);
}

std::string join(const std::string& base, const std::string& key) {
  return base.empty() ? key : base + "." + key;
}

void expect_object(const json& j, const std::string& path) {
  if (!j.is_object()) fail(path.empty() ? "config" : path, "expected an object");
}

void only_keys(const json& j, const std::string& path, std::initializer_list<const char*> allowed) {
  expect_object(j, path);
  for (const auto& item : j.items()) {
    bool ok = false;
    for (const char* a : allowed) ok = ok || item.key() == a;
    if (!ok) fail(join(path, item.key()), "unknown key");
  }
}

double get_number(const json& j, const std::string& path) {
  if (!j.is_number()) fail(path, "expected a number");
  const double v = j.get<double>();
  if (!std::isfinite(v)) fail(path, "must be finite");
  return v;
}

double get_positive(const json& j, const std::string& path) {
  const double v = get_number(j, path);
  if (!(v > 0.0)) fail(path, "must be > 0");
  return v;
}

std::uint64_t get_count(const json& j, const std::string& path) {
  if (j.is_number_unsigned()) return j.get<std::uint64_t>();
  if (j.is_number_integer() && j.get<std::int64_t>() >= 0) return static_cast<std::uint64_t>(j.get<std::int64_t>());
  fail(path, "expected a non-negative integer");
}

bool get_bool(const json& j, const std::string& path) {
  if (!j.is_boolean()) fail(path, "expected true or false");
  return j.get<bool>();
}

std::string get_string(const json& j, const std::string& path) {
  if (!j.is_string()) fail(path, "expected a string");
  return j.get<std::string>();
}

GammaPrior parse_gamma(const json& j, const std::string& path) {
  only_keys(j, path, {"shape", "rate"});
  GammaPrior g;
  if (j.contains("shape")) g.shape = get_positive(j["shape"], join(path, "shape"));
  if (j.contains("rate")) g.rate = get_positive(j["rate"], join(path, "rate"));
  return g;
}

BandwidthPrior parse_bandwidth_prior(const json& j, const std::string& path) {
  if (j.is_string()) {
    const std::string name = j.get<std::string>();
    auto preset = bandwidth_preset(name);
    if (!preset) fail(path, "unknown preset '" + name + "'");
    return *preset;
  }
  expect_object(j, path);
  if (j.contains("preset")) {
    only_keys(j, path, {"preset"});
    return parse_bandwidth_prior(j["preset"], join(path, "preset"));
  }
  if (!j.contains("family")) fail(join(path, "family"), "missing");
  const std::string family = get_string(j["family"], join(path, "family"));
  if (family == "half_normal") {
    only_keys(j, path, {"family", "sigma"});
    HalfNormal p;
    if (j.contains("sigma")) p.sigma = get_positive(j["sigma"], join(path, "sigma"));
    return p;
  }
  if (family == "uniform") {
    only_keys(j, path, {"family", "lo", "hi"});
    Uniform p;
    if (j.contains("lo")) p.lo = get_number(j["lo"], join(path, "lo"));
    if (j.contains("hi")) p.hi = get_number(j["hi"], join(path, "hi"));
    if (!(p.lo >= 0.0 && p.hi > p.lo)) fail(path, "uniform needs 0 <= lo < hi");
    return p;
  }
  if (family == "lognormal") {
    only_keys(j, path, {"family", "mu", "sigma"});
    LogNormal p;
    if (j.contains("mu")) p.mu = get_number(j["mu"], join(path, "mu"));
    if (j.contains("sigma")) p.sigma = get_positive(j["sigma"], join(path, "sigma"));
    return p;
  }
  fail(join(path, "family"), "unknown family '" + family + "' (half_normal, uniform, lognormal)");
}

WindowSpec parse_window(const json& j, const std::string& path) {
  expect_object(j, path);
  const std::string type = j.contains("type") ? get_string(j["type"], join(path, "type")) : "rect";
  WindowSpec w;
  if (type == "rect" || type == "rectangle") {
    only_keys(j, path, {"type", "xmin", "xmax", "ymin", "ymax"});
    for (const char* k : {"xmin", "xmax", "ymin", "ymax"}) {
      if (!j.contains(k)) fail(join(path, k), "missing");
    }
    w.xmin = get_number(j["xmin"], join(path, "xmin"));
    w.xmax = get_number(j["xmax"], join(path, "xmax"));
    w.ymin = get_number(j["ymin"], join(path, "ymin"));
    w.ymax = get_number(j["ymax"], join(path, "ymax"));
  } else if (type == "polygon") {
    only_keys(j, path, {"type", "vertices"});
    w.kind = WindowSpec::Kind::Polygon;
    const std::string vp = join(path, "vertices");
    if (!j.contains("vertices") || !j["vertices"].is_array()) fail(vp, "expected an array of [x, y]");
    std::size_t i = 0;
    for (const json& v : j["vertices"]) {
      const std::string ip = vp + "[" + std::to_string(i++) + "]";
      if (!v.is_array() || v.size() != 2) fail(ip, "expected [x, y]");
      w.vertices.push_back({get_number(v[0], ip), get_number(v[1], ip)});
    }
  } else if (type == "convex_hull") {
    only_keys(j, path, {"type"});
    w.kind = WindowSpec::Kind::ConvexHull;
  } else {
    fail(join(path, "type"), "unknown window type '" + type + "' (rect, polygon, convex_hull)");
  }
  return w;
}

Window realize(const WindowSpec& w) {
  try {
    if (w.kind == WindowSpec::Kind::Polygon) return ConvexPolygon(w.vertices);
    return Rectangle(w.xmin, w.xmax, w.ymin, w.ymax);
  } catch (const DegenerateInput& e) {
    throw ConfigError(std::string("window: ") + e.what());
  }
}

}  // namespace

RunConfig parse_config(const json& j) {
  only_keys(j, "", {"window", "taxa", "params", "scenario", "seed", "clip", "pattern", "units", "priors",
                    "mcmc", "scenarios", "nsp"});
  RunConfig c;
  if (j.contains("window")) {
    c.window = parse_window(j["window"], "window");
    if (c.window->kind != WindowSpec::Kind::ConvexHull) realize(*c.window);
  }
  if (j.contains("taxa")) {
    if (!j["taxa"].is_array()) fail("taxa", "expected an array");
    std::size_t i = 0;
    for (const json& t : j["taxa"]) {
      const std::string tp = "taxa[" + std::to_string(i++) + "]";
      only_keys(t, tp, {"name", "role", "parent"});
      if (!t.contains("name")) fail(join(tp, "name"), "missing");
      if (!t.contains("role")) fail(join(tp, "role"), "missing");
      TaxonSpec spec;
      spec.name = get_string(t["name"], join(tp, "name"));
      const std::string role = get_string(t["role"], join(tp, "role"));
      const auto parsed = parse_role(role);
      if (!parsed) fail(join(tp, "role"), "unknown role '" + role + "' (parent, offspring, unrelated)");
      spec.role = *parsed;
      if (t.contains("parent") && !t["parent"].is_null()) spec.parent = get_string(t["parent"], join(tp, "parent"));
      c.taxa.push_back(std::move(spec));
    }
  }
  if (j.contains("params")) {
    expect_object(j["params"], "params");
    for (const auto& item : j["params"].items()) {
      const std::string pp = "params." + item.key();
      only_keys(item.value(), pp, {"lambda", "alpha", "bandwidth"});
      ParamEntry e;
      if (item.value().contains("lambda")) e.lambda = get_positive(item.value()["lambda"], join(pp, "lambda"));
      if (item.value().contains("alpha")) e.alpha = get_positive(item.value()["alpha"], join(pp, "alpha"));
      if (item.value().contains("bandwidth"))
        e.bandwidth = get_positive(item.value()["bandwidth"], join(pp, "bandwidth"));
      c.params.emplace_back(item.key(), e);
    }
  }
  if (j.contains("scenario")) {
    if (!j["scenario"].is_number_integer()) fail("scenario", "expected an integer");
    c.scenario = j["scenario"].get<int>();
    scenario(*c.scenario);
  }
  if (j.contains("seed")) c.seed = get_count(j["seed"], "seed");
  if (j.contains("clip")) c.clip = get_bool(j["clip"], "clip");
  if (j.contains("pattern")) c.pattern = get_string(j["pattern"], "pattern");
  if (j.contains("units")) c.units = get_string(j["units"], "units");
  if (j.contains("priors")) {
    const json& p = j["priors"];
    only_keys(p, "priors", {"alpha", "parent", "unrelated", "bandwidth"});
    if (p.contains("alpha")) c.priors.alpha = parse_gamma(p["alpha"], "priors.alpha");
    if (p.contains("parent")) c.priors.parent = parse_gamma(p["parent"], "priors.parent");
    if (p.contains("unrelated")) c.priors.unrelated = parse_gamma(p["unrelated"], "priors.unrelated");
    if (p.contains("bandwidth")) c.priors.bandwidth = parse_bandwidth_prior(p["bandwidth"], "priors.bandwidth");
  }
  bool mcmc_seed = false;
  if (j.contains("mcmc")) {
    const json& m = j["mcmc"];
    only_keys(m, "mcmc", {"iterations", "burnin", "thin", "seed", "chains", "proposal_sd", "mc_integral_samples"});
    if (m.contains("iterations")) c.mcmc.n_iterations = get_count(m["iterations"], "mcmc.iterations");
    if (m.contains("burnin")) c.mcmc.n_burnin = get_count(m["burnin"], "mcmc.burnin");
    if (m.contains("thin")) c.mcmc.thin = get_count(m["thin"], "mcmc.thin");
    if (m.contains("seed")) {
      c.mcmc.seed = get_count(m["seed"], "mcmc.seed");
      mcmc_seed = true;
    }
    if (m.contains("chains")) c.mcmc.n_chains = get_count(m["chains"], "mcmc.chains");
    if (m.contains("mc_integral_samples"))
      c.mcmc.mc_integral_samples = get_count(m["mc_integral_samples"], "mcmc.mc_integral_samples");
    if (m.contains("proposal_sd")) {
      const json& sd = m["proposal_sd"];
      if (sd.is_number()) {
        c.proposal_sd_all = get_positive(sd, "mcmc.proposal_sd");
      } else if (sd.is_object()) {
        for (const auto& item : sd.items())
          c.proposal_sd.emplace_back(item.key(), get_positive(item.value(), "mcmc.proposal_sd." + item.key()));
      } else {
        fail("mcmc.proposal_sd", "expected a number or an object keyed by taxon");
      }
    }
    if (c.mcmc.thin == 0) fail("mcmc.thin", "must be >= 1");
    if (c.mcmc.n_chains == 0) fail("mcmc.chains", "must be >= 1");
    if (c.mcmc.n_burnin >= c.mcmc.n_iterations) fail("mcmc.burnin", "must be < mcmc.iterations");
    if (c.mcmc.mc_integral_samples == 0) fail("mcmc.mc_integral_samples", "must be >= 1");
  }
  if (!mcmc_seed) c.mcmc.seed = c.seed;
  if (j.contains("scenarios")) {
    const json& s = j["scenarios"];
    only_keys(s, "scenarios", {"ids", "n_datasets", "with_nsp"});
    if (s.contains("ids")) {
      if (!s["ids"].is_array()) fail("scenarios.ids", "expected an array of integers");
      for (const json& id : s["ids"]) {
        if (!id.is_number_integer()) fail("scenarios.ids", "expected integers");
        scenario(id.get<int>());
        c.scenarios.ids.push_back(id.get<int>());
      }
    }
    if (s.contains("n_datasets")) c.scenarios.n_datasets = get_count(s["n_datasets"], "scenarios.n_datasets");
    if (s.contains("with_nsp")) c.scenarios.with_nsp = get_bool(s["with_nsp"], "scenarios.with_nsp");
  }
  if (j.contains("nsp")) {
    const json& n = j["nsp"];
    only_keys(n, "nsp", {"q", "r_max", "n_r"});
    if (n.contains("q")) c.nsp.q = get_positive(n["q"], "nsp.q");
    if (n.contains("r_max")) c.nsp.r_max = get_positive(n["r_max"], "nsp.r_max");
    if (n.contains("n_r")) c.nsp.n_r = get_count(n["n_r"], "nsp.n_r");
    if (c.nsp.n_r < 2) fail("nsp.n_r", "must be >= 2");
  }
  try {
    c.priors.validate();
  } catch (const ConfigError& e) {
    fail("priors", e.what());
  }
  return c;
}

RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config " + path.string());
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError(path.string() + ": invalid JSON: " + e.what());
  }
  if (j.is_object() && j.contains("command") && j.contains("config")) return parse_config(j["config"]);
  return parse_config(j);
}

ordered_json to_json(const PriorSpec& priors) {
  auto gamma = [](const GammaPrior& g) { return ordered_json{{"shape", g.shape}, {"rate", g.rate}}; };
  ordered_json bw;
  std::visit(
      [&](const auto& p) {
        using T = std::decay_t<decltype(p)>;
        bw["family"] = family_name(p);
        if constexpr (std::is_same_v<T, HalfNormal>) {
          bw["sigma"] = p.sigma;
        } else if constexpr (std::is_same_v<T, Uniform>) {
          bw["lo"] = p.lo;
          bw["hi"] = p.hi;
        } else {
          bw["mu"] = p.mu;
          bw["sigma"] = p.sigma;
        }
      },
      priors.bandwidth);
  return ordered_json{{"alpha", gamma(priors.alpha)},
                      {"parent", gamma(priors.parent)},
                      {"unrelated", gamma(priors.unrelated)},
                      {"bandwidth", bw}};
}

ordered_json to_json(const Window& window) {
  if (window.is_rectangle()) {
    const Rectangle& r = *window.rectangle();
    return ordered_json{{"type", "rect"}, {"xmin", r.xmin()}, {"xmax", r.xmax()},
                        {"ymin", r.ymin()}, {"ymax", r.ymax()}};
  }
  ordered_json verts = ordered_json::array();
  for (const Point& p : boundary_vertices(window)) verts.push_back({p.x, p.y});
  return ordered_json{{"type", "polygon"}, {"vertices", verts}};
}

ordered_json to_json(const RunConfig& c) {
  ordered_json out;
  if (c.window) {
    if (c.window->kind == WindowSpec::Kind::ConvexHull) out["window"] = {{"type", "convex_hull"}};
    else out["window"] = to_json(realize(*c.window));
  }
  if (!c.taxa.empty()) {
    ordered_json taxa = ordered_json::array();
    for (const TaxonSpec& t : c.taxa) {
      ordered_json e{{"name", t.name}, {"role", to_string(t.role)}};
      if (t.parent) e["parent"] = *t.parent;
      taxa.push_back(e);
    }
    out["taxa"] = taxa;
  }
  if (!c.params.empty()) {
    ordered_json params = ordered_json::object();
    for (const auto& [name, e] : c.params) {
      ordered_json v = ordered_json::object();
      if (e.lambda) v["lambda"] = *e.lambda;
      if (e.alpha) v["alpha"] = *e.alpha;
      if (e.bandwidth) v["bandwidth"] = *e.bandwidth;
      params[name] = v;
    }
    out["params"] = params;
  }
  if (c.scenario) out["scenario"] = *c.scenario;
  out["seed"] = c.seed;
  out["clip"] = c.clip;
  if (c.pattern) out["pattern"] = *c.pattern;
  if (c.units) out["units"] = *c.units;
  out["priors"] = to_json(c.priors);
  ordered_json mcmc{{"iterations", c.mcmc.n_iterations},
                    {"burnin", c.mcmc.n_burnin},
                    {"thin", c.mcmc.thin},
                    {"seed", c.mcmc.seed},
                    {"chains", c.mcmc.n_chains},
                    {"mc_integral_samples", c.mcmc.mc_integral_samples}};
  if (c.proposal_sd_all) {
    mcmc["proposal_sd"] = *c.proposal_sd_all;
  } else if (!c.proposal_sd.empty()) {
    ordered_json sd = ordered_json::object();
    for (const auto& [name, v] : c.proposal_sd) sd[name] = v;
    mcmc["proposal_sd"] = sd;
  }
  out["mcmc"] = mcmc;
  if (!c.scenarios.ids.empty() || c.scenarios.with_nsp || c.scenarios.n_datasets != ScenarioSweep{}.n_datasets) {
    out["scenarios"] = {{"ids", c.scenarios.ids},
                        {"n_datasets", c.scenarios.n_datasets},
                        {"with_nsp", c.scenarios.with_nsp}};
  }
  ordered_json nsp{{"q", c.nsp.q}, {"n_r", c.nsp.n_r}};
  if (c.nsp.r_max > 0.0) nsp["r_max"] = c.nsp.r_max;
  out["nsp"] = nsp;
  return out;
}

ModelGraph build_graph(const RunConfig& c) {
  ModelGraph g;
  if (!c.taxa.empty()) g = ModelGraph::from_specs(c.taxa);
  else if (c.scenario) g = scenario(*c.scenario).graph();
  else throw ConfigError("taxa: missing (give taxa or a scenario id)");
  require_valid(g);
  return g;
}

ParamVector build_params(const RunConfig& c, const ModelGraph& graph) {
  if (c.params.empty()) {
    if (!c.scenario || !c.taxa.empty()) throw ConfigError("params: missing");
    return scenario(*c.scenario).params();
  }
  ParamVector p;
  p.alpha.resize(graph.offspring().size());
  p.bandwidth.resize(graph.offspring().size());
  p.lambda_parent.resize(graph.parent_only().size());
  p.lambda_unrelated.resize(graph.unrelated().size());
  std::set<std::string> seen;
  for (const auto& [name, e] : c.params) {
    const std::string path = "params." + name;
    TaxonIndex t = graph.size();
    for (TaxonIndex i = 0; i < graph.size(); ++i)
      if (graph.names[i] == name) t = i;
    if (t == graph.size()) fail(path, "unknown taxon");
    seen.insert(name);
    const std::size_t k = graph.ordinal(t);
    if (graph.roles[t] == Role::Offspring) {
      if (e.lambda) fail(join(path, "lambda"), "offspring taxa take alpha and bandwidth");
      if (!e.alpha || !e.bandwidth) fail(path, "offspring taxa need alpha and bandwidth");
      p.alpha[k] = *e.alpha;
      p.bandwidth[k] = *e.bandwidth;
    } else {
      if (e.alpha || e.bandwidth) fail(path, "homogeneous taxa take lambda only");
      if (!e.lambda) fail(join(path, "lambda"), "missing");
      (graph.roles[t] == Role::ParentOnly ? p.lambda_parent : p.lambda_unrelated)[k] = *e.lambda;
    }
  }
  for (const std::string& name : graph.names)
    if (!seen.count(name)) fail("params." + name, "missing");
  check_params(graph, p);
  return p;
}

McmcConfig build_mcmc(const RunConfig& c, const ModelGraph& graph) {
  McmcConfig m = c.mcmc;
  m.proposal_sd.clear();
  const auto offspring = graph.offspring();
  if (c.proposal_sd_all) {
    m.proposal_sd.assign(offspring.size(), *c.proposal_sd_all);
  } else if (!c.proposal_sd.empty()) {
    m.proposal_sd = McmcConfig{}.resolved_proposal_sd(graph, c.priors);
    for (const auto& [name, v] : c.proposal_sd) {
      bool found = false;
      for (std::size_t l = 0; l < offspring.size(); ++l) {
        if (graph.names[offspring[l]] == name) {
          m.proposal_sd[l] = v;
          found = true;
        }
      }
      if (!found) fail("mcmc.proposal_sd." + name, "not an offspring taxon");
    }
  }
  m.validate(graph);
  return m;
}

Window build_window(const RunConfig& c, std::span<const Point> hull_points) {
  if (!c.window) return c.scenario ? scenario(*c.scenario).window() : Window::unit_square();
  if (c.window->kind == WindowSpec::Kind::ConvexHull) {
    if (hull_points.empty()) throw ConfigError("window: convex_hull needs a pattern");
    try {
      return convex_hull(hull_points);
    } catch (const DegenerateInput& e) {
      throw ConfigError(std::string("window: convex hull of the pattern is degenerate: ") + e.what());
    }
  }
  return realize(*c.window);
}

PatternReadResult load_pattern(const RunConfig& c, const ModelGraph& graph, const std::filesystem::path& path) {
  const OutOfWindowPolicy policy = c.clip ? OutOfWindowPolicy::Clip : OutOfWindowPolicy::Error;
  if (c.window && c.window->kind == WindowSpec::Kind::ConvexHull) {
    constexpr double kHuge = 1e150;
    const Window everything = Rectangle(-kHuge, kHuge, -kHuge, kHuge);
    PatternReadResult raw = read_pattern_csv(path, everything, OutOfWindowPolicy::Error, &graph.names);
    std::vector<Point> all;
    for (const MarkedPoint& p : raw.pattern.points()) all.push_back(p.location);
    const Window hull = build_window(c, all);
    std::vector<MarkedPoint> pts(raw.pattern.points().begin(), raw.pattern.points().end());
    return {MultitypePattern(hull, graph.names, std::move(pts)), 0};
  }
  return read_pattern_csv(path, build_window(c), policy, &graph.names);
}

}  // namespace macpp
