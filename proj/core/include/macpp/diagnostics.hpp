#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "macpp/likelihood.hpp"
#include "macpp/model.hpp"
#include "macpp/patterns.hpp"

namespace macpp {

struct CountEntry {
  std::string taxon;
  Role role = Role::Unrelated;
  std::size_t observed = 0;
  double expected = 0.0;
  std::optional<double> ratio;  ///< observed / expected, absent when expected == 0
};

struct CountValidation {
  std::vector<CountEntry> entries;  ///< one per taxon, in taxon order
};

/// Expected counts under a point estimate: lambda |W| for homogeneous taxa,
/// alpha_l sum_c mass_l(c) over the observed parent points for offspring.
CountValidation expected_counts(const MultitypePattern& pattern, const ModelGraph& graph,
                                const ParamVector& estimate, const MassOptions& options = {});

/// Ripley's K with translation edge correction:
///   K(r) = |W| / (n (n - 1)) sum_{i != j} 1(d_ij <= r) |W| / |W cap (W + x_i - x_j)|.
/// Needs at least two points and every r below half the shorter side of the
/// window's bounding box.
std::vector<double> ripley_k(std::span<const Point> points, const Window& window,
                             std::span<const double> radii);

/// Thomas process K function: pi r^2 + (1 - exp(-r^2 / (4 sigma^2))) / kappa.
double thomas_k(double r, double kappa, double sigma);

struct MinContrastOptions {
  double q = 0.25;
  double r_max = 0.0;  ///< 0 means a quarter of the shorter bounding-box side
  std::size_t n_r = 100;
};

struct ThomasFit {
  double kappa = 0.0;  ///< parent intensity
  double sigma = 0.0;  ///< cluster scale
  double mu = 0.0;     ///< mean offspring per cluster, n / (kappa |W|)
  bool converged = false;
  double objective = 0.0;
  std::string note;    ///< why a fit did not converge
};

/// Search box for the contrast fit, in natural units.
struct ContrastBounds {
  double kappa_lo, kappa_hi, sigma_lo, sigma_hi;
};

/// Discretized contrast sum_k w_k (K_hat(r_k)^q - K(r_k)^q)^2 (trapezoid
/// weights on the r grid), precomputed from one K_hat.
class ThomasContrast {
 public:
  ThomasContrast(std::span<const Point> points, const Window& window,
                 const MinContrastOptions& options = {});

  double operator()(double kappa, double sigma) const;
  std::span<const double> radii() const { return radii_; }
  std::span<const double> k_hat() const { return k_hat_; }
  ContrastBounds bounds() const { return bounds_; }
  std::size_t n_points() const { return n_; }
  double window_area() const { return area_; }

 private:
  std::vector<double> radii_, weights_, k_hat_, k_hat_q_;
  double q_;
  std::size_t n_;
  double area_;
  ContrastBounds bounds_;
};

/// Minimum-contrast Thomas fit over log(kappa), log(sigma): coarse grid, then
/// Nelder-Mead within the bounds. Never throws for numerical trouble;
/// converged is false when the optimum sits within 1e-6 (log scale) of a
/// bound or the simplex does not contract.
ThomasFit thomas_min_contrast(std::span<const Point> points, const Window& window,
                              const MinContrastOptions& options = {});

/// Nelder-Mead on the contrast from a given start (log scale, clamped to the
/// bounds). Used for restart checks.
ThomasFit thomas_min_contrast_from(const ThomasContrast& contrast, double kappa0, double sigma0);

}  // namespace macpp
