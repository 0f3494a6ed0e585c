#include "macpp/priors.hpp"

#include <algorithm>
#include <boost/math/distributions/lognormal.hpp>
#include <boost/math/distributions/normal.hpp>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>

#include "macpp/errors.hpp"

namespace macpp {
namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

bool positive(double x) { return std::isfinite(x) && x > 0.0; }

}  // namespace

double normal_quantile(double p) {
  return boost::math::quantile(boost::math::normal_distribution<double>(), p);
}

double GammaPrior::log_density(double x) const {
  if (!(x > 0.0) || !std::isfinite(x)) return kNegInf;
  return shape * std::log(rate) - std::lgamma(shape) + (shape - 1.0) * std::log(x) - rate * x;
}

double log_density(const BandwidthPrior& prior, double h) {
  return std::visit(
      overloaded{
          [h](const HalfNormal& p) {
            if (!(h >= 0.0) || !std::isfinite(h)) return kNegInf;
            return 0.5 * std::log(2.0 / std::numbers::pi) - std::log(p.sigma) -
                   h * h / (2.0 * p.sigma * p.sigma);
          },
          [h](const Uniform& p) {
            if (!(h >= p.lo && h <= p.hi)) return kNegInf;
            return -std::log(p.hi - p.lo);
          },
          [h](const LogNormal& p) {
            if (!(h > 0.0) || !std::isfinite(h)) return kNegInf;
            const double z = (std::log(h) - p.mu) / p.sigma;
            return -std::log(h * p.sigma) - 0.5 * std::log(2.0 * std::numbers::pi) - 0.5 * z * z;
          },
      },
      prior);
}

double cdf(const BandwidthPrior& prior, double h) {
  return std::visit(
      overloaded{
          [h](const HalfNormal& p) {
            if (h <= 0.0) return 0.0;
            return std::erf(h / (p.sigma * std::numbers::sqrt2));
          },
          [h](const Uniform& p) { return std::clamp((h - p.lo) / (p.hi - p.lo), 0.0, 1.0); },
          [h](const LogNormal& p) {
            if (h <= 0.0) return 0.0;
            return boost::math::cdf(boost::math::lognormal_distribution<double>(p.mu, p.sigma), h);
          },
      },
      prior);
}

double quantile(const BandwidthPrior& prior, double prob) {
  if (!(prob > 0.0 && prob < 1.0)) throw ConfigError("quantile probability must lie in (0, 1)");
  return std::visit(
      overloaded{
          [prob](const HalfNormal& p) { return p.sigma * normal_quantile(0.5 * (1.0 + prob)); },
          [prob](const Uniform& p) { return p.lo + prob * (p.hi - p.lo); },
          [prob](const LogNormal& p) { return std::exp(p.mu + p.sigma * normal_quantile(prob)); },
      },
      prior);
}

double sample(const BandwidthPrior& prior, Rng& rng) {
  return std::visit(
      overloaded{
          [&rng](const HalfNormal& p) { return std::abs(std::normal_distribution<double>(0.0, p.sigma)(rng)); },
          [&rng](const Uniform& p) { return std::uniform_real_distribution<double>(p.lo, p.hi)(rng); },
          [&rng](const LogNormal& p) { return std::lognormal_distribution<double>(p.mu, p.sigma)(rng); },
      },
      prior);
}

std::string family_name(const BandwidthPrior& prior) {
  return std::visit(overloaded{[](const HalfNormal&) { return std::string("half_normal"); },
                               [](const Uniform&) { return std::string("uniform"); },
                               [](const LogNormal&) { return std::string("lognormal"); }},
                    prior);
}

std::optional<BandwidthPrior> bandwidth_preset(std::string_view name) {
  if (name == "half_normal") return HalfNormal{0.02};
  if (name == "uniform") return Uniform{0.0, 0.2};
  if (name == "lognormal_flat") return LogNormal{std::log(0.05), 1.0};
  if (name == "lognormal_tight") return LogNormal{std::log(0.05), 0.1};
  return std::nullopt;
}

void PriorSpec::validate() const {
  auto check_gamma = [](const GammaPrior& g, const char* what) {
    if (!positive(g.shape) || !positive(g.rate)) {
      throw ConfigError(std::string("priors.") + what + ": shape and rate must be > 0");
    }
  };
  check_gamma(alpha, "alpha");
  check_gamma(parent, "parent");
  check_gamma(unrelated, "unrelated");
  std::visit(overloaded{
                 [](const HalfNormal& p) {
                   if (!positive(p.sigma)) throw ConfigError("priors.bandwidth: sigma must be > 0");
                 },
                 [](const Uniform& p) {
                   if (!std::isfinite(p.lo) || !std::isfinite(p.hi) || p.lo < 0.0 || !(p.lo < p.hi)) {
                     throw ConfigError("priors.bandwidth: need 0 <= lo < hi");
                   }
                 },
                 [](const LogNormal& p) {
                   if (!std::isfinite(p.mu) || !positive(p.sigma)) {
                     throw ConfigError("priors.bandwidth: need finite mu and sigma > 0");
                   }
                 },
             },
             bandwidth);
}

double log_prior(const ParamVector& params, const PriorSpec& spec) {
  double total = 0.0;
  for (double a : params.alpha) total += spec.alpha.log_density(a);
  for (double h : params.bandwidth) total += log_density(spec.bandwidth, h);
  for (double l : params.lambda_parent) total += spec.parent.log_density(l);
  for (double l : params.lambda_unrelated) total += spec.unrelated.log_density(l);
  return std::isnan(total) ? kNegInf : total;
}

double half_normal_sigma_for_quantile(double target, double prob) {
  if (!(prob > 0.0 && prob < 1.0) || !positive(target)) {
    throw ConfigError("need target > 0 and 0 < prob < 1");
  }
  return target / normal_quantile(0.5 * (1.0 + prob));
}

}  // namespace macpp
