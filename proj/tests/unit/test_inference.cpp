#include <doctest.h>

#include <algorithm>
#include <boost/math/special_functions/gamma.hpp>
#include <cmath>
#include <numbers>
#include <sstream>

#include "macpp/errors.hpp"
#include "macpp/inference.hpp"
#include "macpp/simulate.hpp"

using namespace macpp;

namespace {

// KS distance between sorted draws and Gamma(shape, rate), CDF from boost's
// regularized incomplete gamma.
double ks_gamma(std::vector<double> draws, double shape, double rate) {
  std::sort(draws.begin(), draws.end());
  const double n = static_cast<double>(draws.size());
  double d = 0.0;
  for (std::size_t i = 0; i < draws.size(); ++i) {
    const double f = boost::math::gamma_p(shape, rate * draws[i]);
    d = std::max({d, std::abs(f - static_cast<double>(i) / n), std::abs(f - static_cast<double>(i + 1) / n)});
  }
  return d;
}

ModelGraph pair_graph() {
  return ModelGraph::from_specs({{"P", Role::ParentOnly, std::nullopt}, {"O", Role::Offspring, "P"}});
}

}  // namespace

TEST_CASE("conditional closed forms") {
  const GammaPrior prior{0.01, 0.01};
  const auto a = alpha_conditional(10, 8.0, prior);
  CHECK(a.shape == doctest::Approx(10.01));
  CHECK(a.rate == doctest::Approx(8.01));
  CHECK(a.mean() == doctest::Approx(1.24969).epsilon(1e-5));
  const auto none = alpha_conditional(0, 0.0, prior);
  CHECK(none.shape == prior.shape);
  CHECK(none.rate == prior.rate);
  const auto l = lambda_conditional(150, 1.0, prior);
  CHECK(l.shape == doctest::Approx(150.01));
  CHECK(l.rate == doctest::Approx(1.01));
  CHECK(l.mean() == doctest::Approx(148.525).epsilon(1e-5));
  const auto empty = lambda_conditional(0, 2.0, GammaPrior{0.5, 0.25});
  CHECK(empty.shape == 0.5);
  CHECK(empty.rate == 2.25);
}

TEST_CASE("gibbs draws match the analytic gamma") {
  const ModelGraph g = pair_graph();
  std::vector<MarkedPoint> pts;
  for (int i = 0; i < 8; ++i) pts.push_back({{0.1 + 0.1 * i, 0.5}, 0});
  for (int i = 0; i < 10; ++i) pts.push_back({{0.1 + 0.08 * i, 0.52}, 1});
  const MultitypePattern p(Window::unit_square(), g.names, pts);
  const PriorSpec spec;
  const std::vector<double> masses(8, 1.0);
  Rng rng(31);
  std::vector<double> draws(100000);
  GammaConditional cond;
  for (double& d : draws) {
    const GibbsDraw gd = gibbs_alpha(0, p, g, spec, masses, rng);
    cond = gd.conditional;
    d = gd.value;
  }
  CHECK(cond.shape == doctest::Approx(10.01));
  CHECK(cond.rate == doctest::Approx(8.01));
  // 10^-3 level critical value for n = 10^5
  CHECK(ks_gamma(draws, 10.01, 8.01) < 1.95 / std::sqrt(1e5));

  for (double& d : draws) {
    const GibbsDraw gd = gibbs_lambda(0, p, g, spec, rng);
    cond = gd.conditional;
    d = gd.value;
  }
  CHECK(cond.shape == doctest::Approx(8.01));
  CHECK(cond.rate == doctest::Approx(1.01));
  CHECK(ks_gamma(draws, 8.01, 1.01) < 1.95 / std::sqrt(1e5));
  CHECK_THROWS_AS(gibbs_lambda(1, p, g, spec, rng), RoleError);
}

TEST_CASE("gibbs alpha against a grid posterior") {
  // likelihood x prior on an alpha grid, n = 10 offspring, total mass 8
  const double n = 10, mass = 8, a = 0.01, b = 0.01;
  std::vector<double> grid, cdf;
  double acc = 0.0;
  const double step = 1e-4;
  for (double x = step / 2; x < 5.0; x += step) {
    acc += std::exp((a + n - 1) * std::log(x) - (b + mass) * x);
    grid.push_back(x + step / 2);
    cdf.push_back(acc);
  }
  for (double& c : cdf) c /= acc;
  Rng rng(8);
  std::vector<double> draws(100000);
  for (double& d : draws) d = draw(alpha_conditional(10, 8.0, GammaPrior{a, b}), rng);
  std::sort(draws.begin(), draws.end());
  double ks = 0.0;
  for (std::size_t i = 0; i < draws.size(); ++i) {
    const auto it = std::lower_bound(grid.begin(), grid.end(), draws[i]);
    const double f = it == grid.end() ? 1.0 : cdf[static_cast<std::size_t>(it - grid.begin())];
    ks = std::max(ks, std::abs(f - (static_cast<double>(i) + 0.5) / 1e5));
  }
  CHECK(ks < 0.01);
}

TEST_CASE("unrelated intensity posterior") {
  const ModelGraph g = ModelGraph::from_specs({{"U", Role::Unrelated, std::nullopt}});
  const Scenario s = scenario(7);
  const MultitypePattern sim = simulate_pattern(s.graph(), s.params(), s.window(), 4);
  const std::size_t n = sim.count("D");
  std::vector<MarkedPoint> pts;
  for (Point q : sim.locations(sim.index_of("D"))) pts.push_back({q, 0});
  const MultitypePattern p(Window::unit_square(), {"U"}, pts);
  Rng rng(1);
  const auto gd = gibbs_lambda(0, p, g, PriorSpec{}, rng);
  CHECK(gd.conditional.shape == doctest::Approx(0.01 + static_cast<double>(n)));
  CHECK(std::abs(gd.conditional.mean() - 95.0) < 3 * std::sqrt(95.0));
}

TEST_CASE("MH bandwidth decisions") {
  const ModelGraph g = pair_graph();
  const MultitypePattern p(Window::unit_square(), g.names,
                           {{{0.5, 0.5}, 0}, {{0.52, 0.5}, 1}, {{0.5, 0.47}, 1}});
  McmcConfig cfg;
  Sampler s(p, g, PriorSpec{}, cfg);
  const double h0 = s.state().bandwidth[0];
  const MhStep neg = s.decide_bandwidth(0, -0.01, -1e-12);
  CHECK_FALSE(neg.accepted);
  CHECK(neg.h == h0);
  CHECK(s.state().bandwidth[0] == h0);
  const MhStep zero = s.decide_bandwidth(0, 0.0, -1e-12);
  CHECK_FALSE(zero.accepted);
  // identical proposal: R = 1, any u < 1 accepts
  const MhStep same = s.decide_bandwidth(0, h0, std::log(0.999999));
  CHECK(same.accepted);
  CHECK(s.state().bandwidth[0] == h0);

  // log R matches the target difference
  const double h1 = 0.03;
  const double log_r = s.bandwidth_log_target(0, h1) - s.bandwidth_log_target(0, h0);
  const MhStep rej = s.decide_bandwidth(0, h1, log_r + 1e-9);
  CHECK_FALSE(rej.accepted);
  const MhStep acc = s.decide_bandwidth(0, h1, log_r - 1e-9);
  CHECK(acc.accepted);
  CHECK(s.state().bandwidth[0] == h1);
  double m = 0.0;
  for (double v : s.masses(0)) m += v;
  CHECK(s.mass_sum(0) == doctest::Approx(m));
  CHECK(m == doctest::Approx(mass_rect({0.5, 0.5}, h1, Rectangle(0, 1, 0, 1)).value));

  // target transcribed independently
  const double alpha = s.state().alpha[0];
  double direct = -alpha * mass_rect({0.5, 0.5}, h1, Rectangle(0, 1, 0, 1)).value +
                  std::log(gaussian_density({0.02, 0.0}, h1)) + std::log(gaussian_density({0.0, -0.03}, h1)) +
                  log_density(HalfNormal{0.02}, h1);
  CHECK(s.bandwidth_log_target(0, h1) == doctest::Approx(direct).epsilon(1e-12));
}

TEST_CASE("prior recovery with no data") {
  const ModelGraph g = pair_graph();
  const MultitypePattern p(Window::unit_square(), g.names, {});
  PriorSpec spec;
  McmcConfig cfg;
  cfg.n_iterations = 100000;
  cfg.n_burnin = 1000;
  cfg.seed = 3;
  cfg.proposal_sd = {quantile(spec.bandwidth, 0.75) - quantile(spec.bandwidth, 0.25)};
  const PosteriorSamples s = run_chain(p, g, spec, cfg);
  std::vector<double> h = s.draws[1];
  std::sort(h.begin(), h.end());
  for (double q : {0.025, 0.25, 0.5, 0.75, 0.975}) {
    const double emp = h[static_cast<std::size_t>(q * static_cast<double>(h.size()))];
    CHECK(std::abs(cdf(spec.bandwidth, emp) - q) < 0.01);
  }
}

TEST_CASE("initialization") {
  const ModelGraph g = pair_graph();
  const MultitypePattern orphan(Window::unit_square(), g.names, {{{0.5, 0.5}, 1}});
  CHECK_THROWS_AS(Sampler(orphan, g, PriorSpec{}, McmcConfig{}), InitializationError);

  const MultitypePattern p(Window::unit_square(), g.names,
                           {{{0.2, 0.2}, 0}, {{0.8, 0.8}, 0}, {{0.21, 0.2}, 1}, {{0.2, 0.22}, 1}, {{0.8, 0.79}, 1}});
  const Sampler s(p, g, PriorSpec{}, McmcConfig{});
  CHECK(s.state().alpha[0] == doctest::Approx(1.5));
  CHECK(s.state().bandwidth[0] == doctest::Approx(median(HalfNormal{0.02})));
  CHECK(s.state().lambda_parent[0] == doctest::Approx(2.0));
  CHECK(std::isfinite(s.log_posterior()));
  REQUIRE(s.proposal_sd().size() == 1);
  CHECK(s.proposal_sd()[0] == doctest::Approx(median(HalfNormal{0.02}) / 5));
}

TEST_CASE("config validation") {
  const ModelGraph g = pair_graph();
  McmcConfig c;
  CHECK_NOTHROW(c.validate(g));
  c.thin = 0;
  CHECK_THROWS_AS(c.validate(g), ConfigError);
  c = McmcConfig{};
  c.n_burnin = c.n_iterations;
  CHECK_THROWS_AS(c.validate(g), ConfigError);
  c = McmcConfig{};
  c.proposal_sd = {0.1, 0.2};
  CHECK_THROWS_AS(c.validate(g), ConfigError);
  c.proposal_sd = {-0.1};
  CHECK_THROWS_AS(c.validate(g), ConfigError);
  c = McmcConfig{};
  c.n_chains = 0;
  CHECK_THROWS_AS(c.validate(g), ConfigError);
}

TEST_CASE("scenario 1 recovery and reproducibility") {
  const Scenario sc = scenario(1);
  const MultitypePattern p = simulate_pattern(sc.graph(), sc.params(), sc.window(), 21);
  McmcConfig cfg;
  cfg.n_iterations = 4000;
  cfg.n_burnin = 1000;
  cfg.seed = 5;
  const PosteriorSamples a = run_chain(p, sc.graph(), PriorSpec{}, cfg);
  CHECK(a.num_draws() == 3000);
  CHECK(std::abs(a.summary("alpha.B").mean - 1.5) < 0.3);
  CHECK(std::abs(a.summary("h.B").mean - 0.01) < 0.002);
  CHECK(a.summary("h.B").sd < 0.01);
  for (double r : a.acceptance_rate) {
    CHECK(r >= 0.0);
    CHECK(r <= 1.0);
  }
  const PosteriorSamples b = run_chain(p, sc.graph(), PriorSpec{}, cfg);
  CHECK(a.draws == b.draws);
  std::ostringstream ca, cb;
  a.write_csv(ca);
  b.write_csv(cb);
  CHECK(ca.str() == cb.str());

  cfg.thin = 7;
  const PosteriorSamples t = run_chain(p, sc.graph(), PriorSpec{}, cfg);
  CHECK(t.num_draws() == 3000 / 7);
  for (const auto& col : t.draws) CHECK(col.size() == t.num_draws());
}

TEST_CASE("two chains on scenario 3 converge") {
  const Scenario sc = scenario(3);
  const MultitypePattern p = simulate_pattern(sc.graph(), sc.params(), sc.window(), 2);
  McmcConfig cfg;
  cfg.n_iterations = 6000;
  cfg.n_burnin = 1500;
  cfg.n_chains = 2;
  cfg.seed = 19;
  const ChainSet cs = run_chains(p, sc.graph(), PriorSpec{}, cfg);
  REQUIRE(cs.chains.size() == 2);
  CHECK(cs.chains[0].draws != cs.chains[1].draws);
  REQUIRE(cs.rhat.size() == cs.combined.names.size());
  for (double r : cs.rhat) CHECK(r < 1.05);
  CHECK(cs.combined.num_draws() == 2 * cs.chains[0].num_draws());
}

TEST_CASE("summaries and flattening") {
  const std::vector<double> v{1, 2, 3, 4, 5, 6, 7, 8, 9, 10};
  const ParamSummary s = summarize("x", v);
  CHECK(s.mean == 5.5);
  CHECK(s.sd == doctest::Approx(std::sqrt(110.0 / 12.0)));
  CHECK(s.q50 == doctest::Approx(5.5));
  CHECK(s.q025 == doctest::Approx(1.225));
  CHECK(s.q975 == doctest::Approx(9.775));
  const ModelGraph g = ModelGraph::from_specs({{"P", Role::ParentOnly, std::nullopt},
                                               {"O", Role::Offspring, "P"},
                                               {"U", Role::Unrelated, std::nullopt}});
  CHECK(parameter_names(g) == std::vector<std::string>{"alpha.O", "h.O", "lambda.P", "lambda.U"});
  const ParamVector pv{{2}, {0.1}, {3}, {4}};
  CHECK(unflatten(g, flatten(pv)) == pv);
  const std::vector<std::vector<double>> same{{1, 2, 3, 4}, {1, 2, 3, 4}};
  CHECK(potential_scale_reduction(same) == doctest::Approx(std::sqrt(3.0 / 4.0)).epsilon(1e-2));
}
