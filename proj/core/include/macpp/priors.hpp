#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <variant>

#include "macpp/model.hpp"
#include "macpp/random.hpp"

namespace macpp {

/// Gamma(shape, rate); mean shape / rate.
struct GammaPrior {
  double shape = 0.01;
  double rate = 0.01;

  double log_density(double x) const;
  friend bool operator==(const GammaPrior&, const GammaPrior&) = default;
};

/// Half-normal: |N(0, sigma^2)|.
struct HalfNormal {
  double sigma = 0.02;
  friend bool operator==(const HalfNormal&, const HalfNormal&) = default;
};

struct Uniform {
  double lo = 0.0;
  double hi = 0.2;
  friend bool operator==(const Uniform&, const Uniform&) = default;
};

/// log X ~ N(mu, sigma^2).
struct LogNormal {
  double mu = 0.0;
  double sigma = 1.0;
  friend bool operator==(const LogNormal&, const LogNormal&) = default;
};

using BandwidthPrior = std::variant<HalfNormal, Uniform, LogNormal>;

/// -infinity outside the support.
double log_density(const BandwidthPrior& prior, double h);
double cdf(const BandwidthPrior& prior, double h);
double quantile(const BandwidthPrior& prior, double p);
inline double median(const BandwidthPrior& prior) { return quantile(prior, 0.5); }
double sample(const BandwidthPrior& prior, Rng& rng);
std::string family_name(const BandwidthPrior& prior);

/// Named bandwidth priors: "half_normal" (sigma 0.02), "uniform" (0, 0.2),
/// "lognormal_flat" (mu log 0.05, sigma 1), "lognormal_tight" (mu log 0.05,
/// sigma 0.1).
std::optional<BandwidthPrior> bandwidth_preset(std::string_view name);

struct PriorSpec {
  GammaPrior alpha;      ///< offspring densities
  GammaPrior parent;     ///< parent-only intensities
  GammaPrior unrelated;  ///< unrelated intensities
  BandwidthPrior bandwidth = HalfNormal{};

  /// Throws ConfigError for non-positive or non-finite hyperparameters.
  void validate() const;
  friend bool operator==(const PriorSpec&, const PriorSpec&) = default;
};

/// Sum of independent log-densities; -infinity if any value is outside its support.
double log_prior(const ParamVector& params, const PriorSpec& spec);

/// sigma such that P(|N(0, sigma^2)| <= target) = prob.
double half_normal_sigma_for_quantile(double target, double prob);

/// Standard normal quantile.
double normal_quantile(double p);

}  // namespace macpp
