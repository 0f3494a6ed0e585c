#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "macpp/geometry.hpp"

namespace macpp {

/// Standard normal CDF.
double normal_cdf(double x);

/// Isotropic bivariate normal density with sd h evaluated at `offset`.
/// Throws NonPositiveBandwidth.
double gaussian_density(Point offset, double h);

/// Estimate of the kernel mass inside a window. Analytic results carry
/// std_error = 0 and n_samples = 0.
struct KernelMassEstimate {
  double value = 0.0;
  double std_error = 0.0;
  std::size_t n_samples = 0;
};

/// Exact mass of N(c, h^2 I) over a rectangle (product of 1-D normal CDF
/// differences).
KernelMassEstimate mass_rect(Point c, double h, const Rectangle& w);

/// Fraction of n draws from N(c, h^2 I) landing in w. Draws are c + h*z with
/// z standard normal pairs from Rng(seed), so the estimate is a deterministic
/// function of (c, h, w, n, seed). Throws NonPositiveBandwidth, ZeroSamples.
KernelMassEstimate mass_mc(Point c, double h, const Window& w, std::size_t n_samples,
                           std::uint64_t seed);

/// Default Monte Carlo sample count per parent for polygon windows.
inline constexpr std::size_t kDefaultMassSamples = 1000;

/// Window masses of Gaussian kernels centred on a fixed set of points, for
/// any bandwidth. Rectangles use mass_rect. Polygons reuse one set of
/// standard-normal draws per centre (seeded by derive_seed(seed, {stream, i}))
/// so that mass(i, h) equals mass_mc(centre_i, h, w, n, that seed) exactly
/// while only testing the draws that can reach the boundary.
class WindowMassEvaluator {
 public:
  WindowMassEvaluator(Window window, std::vector<Point> centres,
                      std::size_t n_samples = kDefaultMassSamples, std::uint64_t seed = 0,
                      std::uint64_t stream = 0);

  std::size_t size() const noexcept { return centres_.size(); }
  const Window& window() const noexcept { return window_; }
  bool analytic() const noexcept { return window_.is_rectangle(); }

  /// Per-centre seed used for the Monte Carlo draws.
  std::uint64_t centre_seed(std::size_t i) const;

  double mass(std::size_t i, double h) const;
  /// Fills out[i] = mass(i, h); returns the sum in fixed index order.
  double masses(double h, std::span<double> out) const;

 private:
  Window window_;
  std::vector<Point> centres_;
  std::size_t n_samples_;
  std::uint64_t seed_;
  std::uint64_t stream_;
  // Polygon windows only: per centre, draws sorted by radius.
  std::vector<std::vector<Point>> draws_;
  std::vector<std::vector<double>> radii_;
  std::vector<double> clearance_;
};

}  // namespace macpp
