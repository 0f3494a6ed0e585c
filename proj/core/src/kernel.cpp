#include "macpp/kernel.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <random>

#include "macpp/errors.hpp"
#include "macpp/random.hpp"

namespace macpp {
namespace {

void require_bandwidth(double h) {
  if (!(h > 0.0) || !std::isfinite(h)) throw NonPositiveBandwidth("bandwidth must be finite and > 0");
}

// Draws must be generated identically by mass_mc and WindowMassEvaluator.
std::vector<Point> standard_normal_pairs(std::size_t n, std::uint64_t seed) {
  Rng rng = make_rng(seed);
  std::normal_distribution<double> z(0.0, 1.0);
  std::vector<Point> out(n);
  for (auto& p : out) {
    p.x = z(rng);
    p.y = z(rng);
  }
  return out;
}

// Interval mass of N(c, h^2) over [lo, hi]; uses whichever tail keeps precision.
double interval_mass(double c, double h, double lo, double hi) {
  const double a = (lo - c) / h;
  const double b = (hi - c) / h;
  if (a > 0.0) return normal_cdf(-a) - normal_cdf(-b);
  return normal_cdf(b) - normal_cdf(a);
}

}  // namespace

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }

double gaussian_density(Point offset, double h) {
  require_bandwidth(h);
  const double h2 = h * h;
  return std::exp(-squared_norm(offset) / (2.0 * h2)) / (2.0 * std::numbers::pi * h2);
}

KernelMassEstimate mass_rect(Point c, double h, const Rectangle& w) {
  require_bandwidth(h);
  const double v = interval_mass(c.x, h, w.xmin(), w.xmax()) * interval_mass(c.y, h, w.ymin(), w.ymax());
  return {std::clamp(v, 0.0, 1.0), 0.0, 0};
}

KernelMassEstimate mass_mc(Point c, double h, const Window& w, std::size_t n_samples,
                           std::uint64_t seed) {
  require_bandwidth(h);
  if (n_samples == 0) throw ZeroSamples("Monte Carlo mass needs at least one sample");
  std::size_t inside = 0;
  for (const Point& z : standard_normal_pairs(n_samples, seed)) {
    if (contains(w, c + h * z)) ++inside;
  }
  const double n = static_cast<double>(n_samples);
  const double v = static_cast<double>(inside) / n;
  return {v, std::sqrt(v * (1.0 - v) / n), n_samples};
}

WindowMassEvaluator::WindowMassEvaluator(Window window, std::vector<Point> centres,
                                         std::size_t n_samples, std::uint64_t seed,
                                         std::uint64_t stream)
    : window_(std::move(window)),
      centres_(std::move(centres)),
      n_samples_(n_samples),
      seed_(seed),
      stream_(stream) {
  if (window_.is_rectangle()) return;
  if (n_samples_ == 0) throw ZeroSamples("Monte Carlo mass needs at least one sample");
  draws_.resize(centres_.size());
  radii_.resize(centres_.size());
  clearance_.resize(centres_.size());
  for (std::size_t i = 0; i < centres_.size(); ++i) {
    auto z = standard_normal_pairs(n_samples_, centre_seed(i));
    std::sort(z.begin(), z.end(),
              [](const Point& a, const Point& b) { return squared_norm(a) < squared_norm(b); });
    radii_[i].reserve(z.size());
    for (const Point& p : z) radii_[i].push_back(std::sqrt(squared_norm(p)));
    draws_[i] = std::move(z);
    clearance_[i] = contains(window_, centres_[i]) ? distance_to_boundary(window_, centres_[i]) : 0.0;
  }
}

std::uint64_t WindowMassEvaluator::centre_seed(std::size_t i) const {
  return derive_seed(seed_, {stream_, i});
}

double WindowMassEvaluator::mass(std::size_t i, double h) const {
  require_bandwidth(h);
  if (const auto* r = window_.rectangle()) return mass_rect(centres_[i], h, *r).value;
  // Draws closer to the centre than its boundary clearance are inside; the
  // 1e-9 margin keeps that shortcut consistent with contains() under rounding.
  const double safe_radius = clearance_[i] * (1.0 - 1e-9) / h;
  const auto& radii = radii_[i];
  const auto first_unsure = std::lower_bound(radii.begin(), radii.end(), safe_radius) - radii.begin();
  std::size_t inside = static_cast<std::size_t>(first_unsure);
  const auto& z = draws_[i];
  for (std::size_t k = inside; k < z.size(); ++k) {
    if (contains(window_, centres_[i] + h * z[k])) ++inside;
  }
  return static_cast<double>(inside) / static_cast<double>(n_samples_);
}

double WindowMassEvaluator::masses(double h, std::span<double> out) const {
  double total = 0.0;
  for (std::size_t i = 0; i < centres_.size(); ++i) {
    out[i] = mass(i, h);
    total += out[i];
  }
  return total;
}

}  // namespace macpp
