#include "macpp/diagnostics.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numbers>

#include "macpp/errors.hpp"

namespace macpp {

CountValidation expected_counts(const MultitypePattern& pattern, const ModelGraph& graph,
                                const ParamVector& estimate, const MassOptions& options) {
  check_alignment(pattern, graph);
  check_params(graph, estimate);
  const double w = area(pattern.window());
  const KernelMasses masses = compute_kernel_masses(pattern, graph, estimate.bandwidth, options);

  CountValidation out;
  for (TaxonIndex t = 0; t < graph.size(); ++t) {
    CountEntry e;
    e.taxon = graph.names[t];
    e.role = graph.roles[t];
    e.observed = pattern.count(t);
    const std::size_t k = graph.ordinal(t);
    switch (e.role) {
      case Role::ParentOnly: e.expected = estimate.lambda_parent[k] * w; break;
      case Role::Unrelated: e.expected = estimate.lambda_unrelated[k] * w; break;
      case Role::Offspring: {
        double sum = 0.0;
        for (double m : masses[k]) sum += m;
        e.expected = estimate.alpha[k] * sum;
        break;
      }
    }
    if (e.expected > 0.0) e.ratio = static_cast<double>(e.observed) / e.expected;
    out.entries.push_back(std::move(e));
  }
  return out;
}

std::vector<double> ripley_k(std::span<const Point> points, const Window& window,
                             std::span<const double> radii) {
  const std::size_t n = points.size();
  if (n < 2) throw TooFewPoints("Ripley's K needs at least two points");
  const Rectangle box = bounding_box(window);
  const double r_limit = 0.5 * std::min(box.width(), box.height());
  double r_max = 0.0;
  for (double r : radii) {
    if (!(r >= 0.0) || !(r < r_limit)) {
      throw ConfigError("Ripley's K radii must lie in [0, half the shorter window side)");
    }
    r_max = std::max(r_max, r);
  }

  const double w = area(window);
  std::vector<std::pair<double, double>> pairs;  // (distance, edge weight)
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      const Point d = points[i] - points[j];
      const double dist = std::sqrt(squared_norm(d));
      if (dist > r_max) continue;
      const double overlap = overlap_area(window, d);
      if (overlap <= 0.0) continue;
      pairs.emplace_back(dist, w / overlap);
    }
  }
  std::sort(pairs.begin(), pairs.end());
  std::vector<double> cumulative(pairs.size() + 1, 0.0);
  for (std::size_t k = 0; k < pairs.size(); ++k) cumulative[k + 1] = cumulative[k] + pairs[k].second;

  const double scale = 2.0 * w / (static_cast<double>(n) * static_cast<double>(n - 1));
  std::vector<double> out;
  out.reserve(radii.size());
  for (double r : radii) {
    const auto upto = std::upper_bound(pairs.begin(), pairs.end(),
                                       std::make_pair(r, std::numeric_limits<double>::infinity()));
    out.push_back(scale * cumulative[static_cast<std::size_t>(upto - pairs.begin())]);
  }
  return out;
}

double thomas_k(double r, double kappa, double sigma) {
  return std::numbers::pi * r * r - std::expm1(-r * r / (4.0 * sigma * sigma)) / kappa;
}

ThomasContrast::ThomasContrast(std::span<const Point> points, const Window& window,
                               const MinContrastOptions& options)
    : q_(options.q), n_(points.size()), area_(area(window)) {
  const Rectangle box = bounding_box(window);
  const double shorter = std::min(box.width(), box.height());
  const double r_max = options.r_max > 0.0 ? options.r_max : 0.25 * shorter;
  if (options.n_r < 2) throw ConfigError("nsp.n_r must be >= 2");
  if (!(options.q > 0.0)) throw ConfigError("nsp.q must be > 0");
  const double step = r_max / static_cast<double>(options.n_r);
  for (std::size_t k = 1; k <= options.n_r; ++k) {
    radii_.push_back(step * static_cast<double>(k));
    weights_.push_back(k == options.n_r ? 0.5 * step : step);
  }
  k_hat_ = ripley_k(points, window, radii_);
  for (double k : k_hat_) k_hat_q_.push_back(std::pow(k, q_));

  const double diameter = std::hypot(box.width(), box.height());
  bounds_ = {1.0 / area_, 100.0 * static_cast<double>(n_) / area_, r_max * 1e-3, diameter};
}

double ThomasContrast::operator()(double kappa, double sigma) const {
  double total = 0.0;
  for (std::size_t k = 0; k < radii_.size(); ++k) {
    const double diff = k_hat_q_[k] - std::pow(thomas_k(radii_[k], kappa, sigma), q_);
    total += weights_[k] * diff * diff;
  }
  return total;
}

namespace {

struct Vertex {
  std::array<double, 2> x;
  double f;
};

ThomasFit nelder_mead(const ThomasContrast& contrast, double kappa0, double sigma0) {
  const ContrastBounds b = contrast.bounds();
  const std::array<double, 2> lo{std::log(b.kappa_lo), std::log(b.sigma_lo)};
  const std::array<double, 2> hi{std::log(b.kappa_hi), std::log(b.sigma_hi)};
  auto clamp = [&](std::array<double, 2> x) {
    for (int d = 0; d < 2; ++d) x[d] = std::clamp(x[d], lo[d], hi[d]);
    return x;
  };
  auto eval = [&](const std::array<double, 2>& x) {
    const double f = contrast(std::exp(x[0]), std::exp(x[1]));
    return std::isfinite(f) ? f : std::numeric_limits<double>::max();
  };

  const auto start = clamp({std::log(kappa0), std::log(sigma0)});
  std::array<Vertex, 3> s;
  s[0] = {start, eval(start)};
  for (int d = 0; d < 2; ++d) {
    auto x = start;
    const double step = 0.1 * (hi[d] - lo[d]);
    x[d] = x[d] + step <= hi[d] ? x[d] + step : x[d] - step;
    x = clamp(x);
    s[static_cast<std::size_t>(d) + 1] = {x, eval(x)};
  }

  bool contracted = false;
  constexpr int kMaxIter = 5000;
  for (int iter = 0; iter < kMaxIter; ++iter) {
    std::sort(s.begin(), s.end(), [](const Vertex& a, const Vertex& c) { return a.f < c.f; });
    double size = 0.0;
    for (int v = 1; v < 3; ++v) {
      for (int d = 0; d < 2; ++d) size = std::max(size, std::abs(s[v].x[d] - s[0].x[d]));
    }
    const double spread = s[2].f - s[0].f;
    if (size < 1e-10 || (size < 1e-7 && spread <= 1e-14 * (std::abs(s[0].f) + 1e-300))) {
      contracted = true;
      break;
    }
    const std::array<double, 2> centroid{0.5 * (s[0].x[0] + s[1].x[0]), 0.5 * (s[0].x[1] + s[1].x[1])};
    auto along = [&](double t) {
      return clamp({centroid[0] + t * (s[2].x[0] - centroid[0]), centroid[1] + t * (s[2].x[1] - centroid[1])});
    };
    const auto xr = along(-1.0);
    const double fr = eval(xr);
    if (fr < s[0].f) {
      const auto xe = along(-2.0);
      const double fe = eval(xe);
      s[2] = fe < fr ? Vertex{xe, fe} : Vertex{xr, fr};
    } else if (fr < s[1].f) {
      s[2] = {xr, fr};
    } else {
      const auto xc = fr < s[2].f ? along(-0.5) : along(0.5);
      const double fc = eval(xc);
      if (fc < std::min(fr, s[2].f)) {
        s[2] = {xc, fc};
      } else {
        for (int v = 1; v < 3; ++v) {
          for (int d = 0; d < 2; ++d) s[v].x[d] = s[0].x[d] + 0.5 * (s[v].x[d] - s[0].x[d]);
          s[v].f = eval(s[v].x);
        }
      }
    }
  }
  std::sort(s.begin(), s.end(), [](const Vertex& a, const Vertex& c) { return a.f < c.f; });

  ThomasFit fit;
  fit.kappa = std::exp(s[0].x[0]);
  fit.sigma = std::exp(s[0].x[1]);
  fit.objective = s[0].f;
  fit.mu = static_cast<double>(contrast.n_points()) / (fit.kappa * contrast.window_area());
  constexpr double kBoundTol = 1e-6;
  const bool at_bound = std::abs(s[0].x[0] - lo[0]) < kBoundTol || std::abs(s[0].x[0] - hi[0]) < kBoundTol ||
                        std::abs(s[0].x[1] - lo[1]) < kBoundTol || std::abs(s[0].x[1] - hi[1]) < kBoundTol;
  fit.converged = contracted && !at_bound;
  if (at_bound) fit.note = "optimum on a search bound";
  else if (!contracted) fit.note = "simplex did not contract";
  return fit;
}

}  // namespace

ThomasFit thomas_min_contrast_from(const ThomasContrast& contrast, double kappa0, double sigma0) {
  return nelder_mead(contrast, kappa0, sigma0);
}

ThomasFit thomas_min_contrast(std::span<const Point> points, const Window& window,
                              const MinContrastOptions& options) {
  if (points.size() < 2) {
    ThomasFit fit;
    fit.note = "fewer than two points";
    return fit;
  }
  try {
    const ThomasContrast contrast(points, window, options);
    const ContrastBounds b = contrast.bounds();
    // Coarse log grid to pick the basin, then polish.
    constexpr int kGrid = 25;
    double best_f = std::numeric_limits<double>::infinity();
    double best_kappa = b.kappa_lo, best_sigma = b.sigma_lo;
    for (int i = 0; i < kGrid; ++i) {
      const double kappa = std::exp(std::log(b.kappa_lo) + (std::log(b.kappa_hi / b.kappa_lo) * i) / (kGrid - 1));
      for (int j = 0; j < kGrid; ++j) {
        const double sigma = std::exp(std::log(b.sigma_lo) + (std::log(b.sigma_hi / b.sigma_lo) * j) / (kGrid - 1));
        const double f = contrast(kappa, sigma);
        if (f < best_f) {
          best_f = f;
          best_kappa = kappa;
          best_sigma = sigma;
        }
      }
    }
    return nelder_mead(contrast, best_kappa, best_sigma);
  } catch (const Error& e) {
    ThomasFit fit;
    fit.note = e.what();
    return fit;
  }
}

}  // namespace macpp
