#include "macpp/simulate.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <random>

#include "macpp/errors.hpp"
#include "macpp/parallel.hpp"
#include "macpp/patterns.hpp"

namespace macpp {

namespace {

Point uniform_point(const Rectangle& box, Rng& rng) {
  std::uniform_real_distribution<double> ux(box.xmin(), box.xmax());
  std::uniform_real_distribution<double> uy(box.ymin(), box.ymax());
  const double x = ux(rng);
  return {x, uy(rng)};
}

std::string format_number(double v) { return format_double(v); }

}  // namespace

std::vector<Point> simulate_poisson(const Window& window, double lambda, Rng& rng) {
  if (!(lambda >= 0.0) || !std::isfinite(lambda)) throw ConfigError("intensity must be finite and >= 0");
  std::poisson_distribution<long long> count(lambda * area(window));
  const long long n = lambda > 0.0 ? count(rng) : 0;
  const Rectangle box = bounding_box(window);
  std::vector<Point> out;
  out.reserve(static_cast<std::size_t>(n));
  const bool rect = window.is_rectangle();
  while (static_cast<long long>(out.size()) < n) {
    const Point p = uniform_point(box, rng);
    if (rect || contains(window, p)) out.push_back(p);
  }
  return out;
}

std::vector<Point> simulate_offspring(std::span<const Point> parents, double alpha, double h,
                                      const Window& window, Rng& rng) {
  if (!(alpha > 0.0) || !std::isfinite(alpha)) throw ConfigError("alpha must be finite and > 0");
  if (!(h > 0.0) || !std::isfinite(h)) throw NonPositiveBandwidth("bandwidth must be finite and > 0");
  std::poisson_distribution<int> litter(alpha);
  std::normal_distribution<double> z(0.0, 1.0);
  std::vector<Point> out;
  for (const Point& c : parents) {
    const int m = litter(rng);
    for (int i = 0; i < m; ++i) {
      const double dx = z(rng);
      const Point p{c.x + h * dx, c.y + h * z(rng)};
      if (contains(window, p)) out.push_back(p);
    }
  }
  return out;
}

MultitypePattern simulate_pattern(const ModelGraph& graph, const ParamVector& params,
                                  const Window& window, std::uint64_t seed) {
  require_valid(graph);
  check_params(graph, params);
  std::vector<std::vector<Point>> layers(graph.size());
  for (TaxonIndex t : topo_order(graph)) {
    Rng rng(derive_seed(seed, {t}));
    const std::size_t k = graph.ordinal(t);
    switch (graph.roles[t]) {
      case Role::ParentOnly: layers[t] = simulate_poisson(window, params.lambda_parent[k], rng); break;
      case Role::Unrelated: layers[t] = simulate_poisson(window, params.lambda_unrelated[k], rng); break;
      case Role::Offspring: {
        layers[t] = simulate_offspring(layers[*graph.parent_of[t]], params.alpha[k], params.bandwidth[k], window, rng);
        break;
      }
    }
  }
  std::vector<MarkedPoint> points;
  for (TaxonIndex t = 0; t < graph.size(); ++t) {
    for (const Point& p : layers[t]) points.push_back({p, t});
  }
  return MultitypePattern(window, graph.names, std::move(points));
}

std::string Scenario::density_label() const {
  if (alpha2 == 1.5) return "Sparse";
  return alpha3 == 3.0 ? "Dense" : "Mixed";
}

std::string Scenario::bandwidth_label() const { return h2 == 0.1 ? "High" : "Low"; }

ModelGraph Scenario::graph() const {
  std::vector<TaxonSpec> specs{{"A", Role::ParentOnly, std::nullopt},
                               {"B", Role::Offspring, "A"},
                               {"C", Role::Offspring, "A"}};
  if (unrelated_present) specs.push_back({"D", Role::Unrelated, std::nullopt});
  return ModelGraph::from_specs(specs);
}

ParamVector Scenario::params() const {
  ParamVector p;
  p.alpha = {alpha2, alpha3};
  p.bandwidth = {h2, h3};
  p.lambda_parent = {lambda_parent};
  if (unrelated_present) p.lambda_unrelated = {lambda_unrelated};
  return p;
}

Scenario scenario(int id) {
  if (id < 1 || id > 12) throw ConfigError("unknown scenario " + std::to_string(id) + " (expected 1..12)");
  static constexpr double kAlphas[3][2] = {{1.5, 1.0}, {4.0, 3.0}, {4.0, 1.0}};
  static constexpr double kBandwidths[2][2] = {{0.01, 0.02}, {0.1, 0.01}};
  const int cell = (id - 1) % 6;
  Scenario s;
  s.id = id;
  s.unrelated_present = id > 6;
  s.alpha2 = kAlphas[cell / 2][0];
  s.alpha3 = kAlphas[cell / 2][1];
  s.h2 = kBandwidths[cell % 2][0];
  s.h3 = kBandwidths[cell % 2][1];
  return s;
}

namespace {

double mean_of(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x;
  return v.empty() ? 0.0 : s / static_cast<double>(v.size());
}

double sd_of(const std::vector<double>& v) {
  if (v.size() < 2) return 0.0;
  const double m = mean_of(v);
  double s = 0.0;
  for (double x : v) s += (x - m) * (x - m);
  return std::sqrt(s / static_cast<double>(v.size() - 1));
}

}  // namespace

ScenarioReport run_scenario(const Scenario& s, const ScenarioOptions& options) {
  if (options.n_datasets < 2) throw ConfigError("n_datasets must be >= 2");
  const ModelGraph graph = s.graph();
  const ParamVector truth = s.params();
  const Window window = s.window();
  options.mcmc.validate(graph);
  options.priors.validate();
  const std::vector<TaxonIndex> offspring = graph.offspring();

  ScenarioReport report;
  report.scenario = s;
  report.n_datasets = options.n_datasets;
  report.datasets.resize(options.n_datasets);

  parallel_for(
      options.n_datasets,
      [&](std::size_t k) {
        DatasetResult& d = report.datasets[k];
        d.index = k;
        const auto id = static_cast<std::uint64_t>(s.id);
        d.data_seed = derive_seed(options.seed, {id, k, 0});
        d.fit_seed = derive_seed(options.seed, {id, k, 1});
        const MultitypePattern pattern = simulate_pattern(graph, truth, window, d.data_seed);
        for (TaxonIndex t = 0; t < graph.size(); ++t) d.counts.push_back(pattern.count(t));
        try {
          McmcConfig cfg = options.mcmc;
          cfg.seed = d.fit_seed;
          cfg.n_chains = 1;
          const PosteriorSamples post = run_chain(pattern, graph, options.priors, cfg, 0);
          for (const ParamSummary& ps : post.summaries) {
            d.posterior_mean.push_back(ps.mean);
            d.posterior_sd.push_back(ps.sd);
          }
          d.acceptance_rate = post.acceptance_rate;
          d.fit_ok = true;
        } catch (const Error& e) {
          d.error = e.what();
        }
        if (options.with_nsp) {
          for (TaxonIndex t : offspring) {
            d.nsp.push_back(thomas_min_contrast(pattern.locations(t), window, options.nsp));
          }
        }
      },
      options.workers);

  const std::vector<std::string> names = parameter_names(graph);
  const std::vector<double> true_values = flatten(truth);
  const std::size_t n_alpha = truth.alpha.size();
  const std::size_t n_h = truth.bandwidth.size();

  std::vector<std::size_t> nsp_ok;
  if (options.with_nsp) {
    std::size_t failed = 0;
    for (const DatasetResult& d : report.datasets) {
      const bool ok = std::all_of(d.nsp.begin(), d.nsp.end(), [](const ThomasFit& f) { return f.converged; });
      if (ok) nsp_ok.push_back(d.index);
      else ++failed;
    }
    report.nsp_failure_pct = 100.0 * static_cast<double>(failed) / static_cast<double>(options.n_datasets);
  }

  for (const DatasetResult& d : report.datasets) {
    if (!d.fit_ok) ++report.n_failed;
  }

  for (std::size_t p = 0; p < names.size(); ++p) {
    ScenarioRow row;
    row.parameter = names[p];
    row.truth = true_values[p];
    std::vector<double> means, sds;
    for (const DatasetResult& d : report.datasets) {
      if (!d.fit_ok) continue;
      means.push_back(d.posterior_mean[p]);
      sds.push_back(d.posterior_sd[p]);
    }
    row.est = mean_of(means);
    row.sd = mean_of(sds);
    row.se = sd_of(means);

    if (options.with_nsp && !nsp_ok.empty()) {
      std::vector<double> values;
      for (std::size_t k : nsp_ok) {
        const std::vector<ThomasFit>& fits = report.datasets[k].nsp;
        if (p < n_alpha) values.push_back(fits[p].mu);
        else if (p < n_alpha + n_h) values.push_back(fits[p - n_alpha].sigma);
        else if (p == n_alpha + n_h && !fits.empty()) values.push_back(fits.front().kappa);
      }
      if (!values.empty()) {
        row.nsp_est = mean_of(values);
        row.nsp_se = sd_of(values);
      }
    }
    report.rows.push_back(std::move(row));
  }
  return report;
}

void write_scenario_csv(std::ostream& out, const std::vector<ScenarioReport>& reports) {
  out << "scenario,parameter,true,est,sd,se,datasets,failed_pct,nsp_est,nsp_se,nsp_failed_pct\n";
  for (const ScenarioReport& r : reports) {
    const double failed_pct =
        r.n_datasets ? 100.0 * static_cast<double>(r.n_failed) / static_cast<double>(r.n_datasets) : 0.0;
    for (const ScenarioRow& row : r.rows) {
      out << r.scenario.id << ',' << row.parameter << ',' << format_number(row.truth) << ','
          << format_number(row.est) << ',' << format_number(row.sd) << ',' << format_number(row.se) << ','
          << r.n_datasets << ',' << format_number(failed_pct) << ',';
      if (row.nsp_est) out << format_number(*row.nsp_est);
      out << ',';
      if (row.nsp_se) out << format_number(*row.nsp_se);
      out << ',';
      if (r.nsp_failure_pct) out << format_number(*r.nsp_failure_pct);
      out << '\n';
    }
  }
}

}  // namespace macpp
