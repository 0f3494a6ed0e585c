#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <numbers>

#include "macpp/config.hpp"
#include "macpp/diagnostics.hpp"
#include "macpp/errors.hpp"
#include "macpp/inference.hpp"
#include "macpp/simulate.hpp"

using namespace macpp;

namespace {

std::vector<Point> csr(double lambda, std::uint64_t seed) {
  Rng rng(seed);
  return simulate_poisson(Window::unit_square(), lambda, rng);
}

std::vector<Point> thomas(double kappa, double sigma, double mu, std::uint64_t seed) {
  Rng rng(seed);
  const auto parents = simulate_poisson(Window::unit_square(), kappa, rng);
  return simulate_offspring(parents, mu, sigma, Window::unit_square(), rng);
}

// Double sum with the translation weight for the unit square written out.
double brute_k(const std::vector<Point>& pts, double r) {
  const double n = static_cast<double>(pts.size());
  double s = 0.0;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    for (std::size_t j = 0; j < pts.size(); ++j) {
      if (i == j) continue;
      const double dx = pts[i].x - pts[j].x, dy = pts[i].y - pts[j].y;
      if (std::hypot(dx, dy) > r) continue;
      s += 1.0 / ((1.0 - std::abs(dx)) * (1.0 - std::abs(dy)));
    }
  }
  return s / (n * (n - 1));
}

}  // namespace

TEST_CASE("expected counts") {
  const ModelGraph g = ModelGraph::from_specs({{"P", Role::ParentOnly, std::nullopt},
                                               {"O", Role::Offspring, "P"},
                                               {"E", Role::Offspring, "O"},
                                               {"U", Role::Unrelated, std::nullopt}});
  const MultitypePattern p(Window(Rectangle(0, 2, 0, 1)), g.names,
                           {{{0.5, 0.5}, 0}, {{1.5, 0.01}, 0}, {{0.51, 0.5}, 1}});
  const ParamVector est{{2.0, 3.0}, {0.05, 0.05}, {1.7}, {0.01}};
  const CountValidation v = expected_counts(p, g, est);
  REQUIRE(v.entries.size() == 4);
  CHECK(v.entries[0].expected == 1.7 * 2.0);
  CHECK(v.entries[0].observed == 2);
  const double m = mass_rect({0.5, 0.5}, 0.05, Rectangle(0, 2, 0, 1)).value +
                   mass_rect({1.5, 0.01}, 0.05, Rectangle(0, 2, 0, 1)).value;
  CHECK(v.entries[1].expected == doctest::Approx(2.0 * m));
  CHECK(v.entries[1].ratio.has_value());
  CHECK(*v.entries[1].ratio == doctest::Approx(1.0 / (2.0 * m)));
  CHECK(v.entries[2].expected == doctest::Approx(3.0 * mass_rect({0.51, 0.5}, 0.05, Rectangle(0, 2, 0, 1)).value));
  CHECK(v.entries[2].observed == 0);
  CHECK(v.entries[3].expected == doctest::Approx(0.02));
  CHECK(*v.entries[3].ratio == 0.0);

  // offspring with no parents: expected 0, ratio omitted
  const MultitypePattern none(Window::unit_square(), g.names, {{{0.5, 0.5}, 3}});
  const CountValidation w = expected_counts(none, g, est);
  CHECK(w.entries[1].expected == 0.0);
  CHECK_FALSE(w.entries[1].ratio.has_value());

  const ModelGraph single = ModelGraph::from_specs({{"X", Role::Unrelated, std::nullopt}});
  const MultitypePattern empty(Window::unit_square(), {"X"}, {});
  const CountValidation e = expected_counts(empty, single, {{}, {}, {}, {0.01}});
  CHECK(e.entries[0].expected == doctest::Approx(0.01));
  CHECK(e.entries[0].observed == 0);
}

TEST_CASE("ripley K against brute force") {
  const auto pts = csr(120, 6);
  const std::vector<double> r{0.0, 0.01, 0.05, 0.1, 0.2};
  const auto k = ripley_k(pts, Window::unit_square(), r);
  for (std::size_t i = 0; i < r.size(); ++i) CHECK(k[i] == doctest::Approx(brute_k(pts, r[i])).epsilon(1e-12));
  // polygon path on the same square
  const Window sq = ConvexPolygon({{0, 0}, {1, 0}, {1, 1}, {0, 1}});
  const auto kp = ripley_k(pts, sq, r);
  for (std::size_t i = 0; i < r.size(); ++i) CHECK(kp[i] == doctest::Approx(k[i]).epsilon(1e-10));
}

TEST_CASE("ripley K on CSR") {
  double mean = 0.0;
  const std::vector<double> r{0.05};
  for (std::uint64_t s = 0; s < 100; ++s) mean += ripley_k(csr(200, s), Window::unit_square(), r)[0];
  mean /= 100;
  const double truth = std::numbers::pi * 0.05 * 0.05;
  CHECK(truth == doctest::Approx(0.00785).epsilon(1e-3));
  CHECK(std::abs(mean - truth) < 0.2 * truth);
}

TEST_CASE("ripley K structure") {
  const std::vector<Point> two{{0.3, 0.3}, {0.3, 0.3}};
  const std::vector<double> r{0.0, 1e-9, 0.1};
  const auto k = ripley_k(two, Window::unit_square(), r);
  CHECK(k[0] > 0.0);
  CHECK(k[0] == doctest::Approx(1.0));

  const auto pts = csr(300, 2);
  std::vector<double> grid;
  for (int i = 0; i < 100; ++i) grid.push_back(0.0049 * i);
  const auto kk = ripley_k(pts, Window::unit_square(), grid);
  for (std::size_t i = 1; i < kk.size(); ++i) CHECK(kk[i] >= kk[i - 1]);

  CHECK_THROWS_AS(ripley_k(std::vector<Point>{{0.5, 0.5}}, Window::unit_square(), r), TooFewPoints);
  CHECK_THROWS_AS(ripley_k(pts, Window::unit_square(), std::vector<double>{0.5}), ConfigError);
  CHECK_THROWS_AS(ripley_k(pts, Window::unit_square(), std::vector<double>{-0.1}), ConfigError);
}

TEST_CASE("clustered data exceed CSR") {
  int above = 0;
  const std::vector<double> r{0.01, 0.02};
  for (std::uint64_t s = 0; s < 100; ++s) {
    const auto k = ripley_k(thomas(50, 0.01, 5, s), Window::unit_square(), r);
    above += k[0] > std::numbers::pi * 1e-4 && k[1] > std::numbers::pi * 4e-4;
  }
  CHECK(above >= 95);
}

TEST_CASE("thomas K") {
  CHECK(thomas_k(0.0, 100, 0.1) == 0.0);
  const double r = 0.05, kappa = 150, sigma = 0.01;
  CHECK(thomas_k(r, kappa, sigma) ==
        doctest::Approx(std::numbers::pi * r * r + (1 - std::exp(-r * r / (4 * sigma * sigma))) / kappa));
  CHECK(thomas_k(r, 1e12, sigma) == doctest::Approx(std::numbers::pi * r * r));
}

TEST_CASE("minimum contrast recovers kappa") {
  int good = 0;
  for (std::uint64_t s = 0; s < 100; ++s) {
    const auto pts = thomas(150, 0.01, 4, 1000 + s);
    const ThomasFit f = thomas_min_contrast(pts, Window::unit_square());
    if (f.converged && std::abs(f.kappa - 150) < 75) ++good;
    if (f.converged) {
      CHECK(f.kappa > 0);
      CHECK(f.sigma > 0);
      CHECK(f.mu == doctest::Approx(static_cast<double>(pts.size()) / f.kappa));
    }
  }
  CHECK(good >= 70);
}

TEST_CASE("minimum contrast on CSR approaches Poisson") {
  const auto pts = csr(200, 17);
  const ThomasContrast c(pts, Window::unit_square());
  const ThomasFit f = thomas_min_contrast(pts, Window::unit_square());
  const ContrastBounds b = c.bounds();
  double poisson = std::numeric_limits<double>::infinity();
  for (double s = b.sigma_lo; s <= b.sigma_hi; s *= 1.1) poisson = std::min(poisson, c(b.kappa_hi, s));
  CHECK(f.objective <= poisson * (1 + 1e-9) + 1e-15);
  const double rmax = c.radii().back();
  CHECK(thomas_k(rmax, f.kappa, f.sigma) == doctest::Approx(std::numbers::pi * rmax * rmax).epsilon(0.25));
}

TEST_CASE("optimum beats random restarts") {
  for (std::uint64_t s = 0; s < 5; ++s) {
    const auto pts = thomas(100, 0.02, 3, 50 + s);
    const ThomasContrast c(pts, Window::unit_square());
    const ThomasFit f = thomas_min_contrast(pts, Window::unit_square());
    const ContrastBounds b = c.bounds();
    Rng rng(s);
    std::uniform_real_distribution<double> u(0, 1);
    double best = std::numeric_limits<double>::infinity();
    for (int k = 0; k < 20; ++k) {
      const double kappa = b.kappa_lo * std::pow(b.kappa_hi / b.kappa_lo, u(rng));
      const double sigma = b.sigma_lo * std::pow(b.sigma_hi / b.sigma_lo, u(rng));
      best = std::min(best, thomas_min_contrast_from(c, kappa, sigma).objective);
    }
    CHECK(f.objective <= best * (1 + 1e-6) + 1e-15);
  }
}

TEST_CASE("degenerate baseline input reports non-convergence") {
  const ThomasFit f = thomas_min_contrast(std::vector<Point>{{0.5, 0.5}}, Window::unit_square());
  CHECK_FALSE(f.converged);
  CHECK_FALSE(f.note.empty());
}

TEST_CASE("self-consistency after a fit") {
  const Scenario sc = scenario(9);
  const auto p = simulate_pattern(sc.graph(), sc.params(), sc.window(), 8);
  McmcConfig cfg;
  cfg.n_iterations = 3000;
  cfg.n_burnin = 1000;
  const auto post = run_chain(p, sc.graph(), PriorSpec{}, cfg);
  const CountValidation v = expected_counts(p, sc.graph(), post.posterior_mean(sc.graph()));
  double mean_ratio = 0.0;
  for (const CountEntry& e : v.entries) {
    REQUIRE(e.ratio.has_value());
    CHECK(*e.ratio > 0.8);
    CHECK(*e.ratio < 1.25);
    mean_ratio += *e.ratio;
  }
  mean_ratio /= static_cast<double>(v.entries.size());
  CHECK(mean_ratio > 0.9);
  CHECK(mean_ratio < 1.1);
}

TEST_CASE("quadrant fixture expected counts match observed") {
  const RunConfig c = load_config(std::filesystem::path(MACPP_FIXTURES) / "quadrant3.json");
  const ModelGraph g = build_graph(c);
  const auto read = load_pattern(c, g, std::filesystem::path(MACPP_FIXTURES) / "quadrant3.csv");
  const auto post = run_chain(read.pattern, g, c.priors, build_mcmc(c, g));
  const CountValidation v = expected_counts(read.pattern, g, post.posterior_mean(g));
  const std::size_t observed[] = {186, 163, 269, 76};
  for (std::size_t t = 0; t < 4; ++t) {
    CHECK(v.entries[t].observed == observed[t]);
    CHECK(v.entries[t].expected == doctest::Approx(static_cast<double>(observed[t])).epsilon(0.03));
  }
}
