#include "macpp/likelihood.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "macpp/errors.hpp"

namespace macpp {
namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

const std::vector<Point> kNoPoints;

std::span<const Point> parent_points(const MultitypePattern& pattern, const ModelGraph& graph,
                                     TaxonIndex offspring) {
  const auto parent = graph.parent_of.at(offspring);
  if (!parent) return kNoPoints;
  return pattern.locations(*parent);
}

}  // namespace

KernelSumTable::KernelSumTable(std::span<const Point> offspring, std::span<const Point> parents)
    : num_parents_(parents.size()) {
  offsets_.reserve(offspring.size() + 1);
  offsets_.push_back(0);
  sq_dist_.reserve(offspring.size() * parents.size());
  for (const Point& y : offspring) {
    const auto begin = sq_dist_.size();
    for (const Point& c : parents) sq_dist_.push_back(squared_norm(y - c));
    std::sort(sq_dist_.begin() + static_cast<std::ptrdiff_t>(begin), sq_dist_.end());
    offsets_.push_back(sq_dist_.size());
  }
}

double KernelSumTable::log_kernel_sum(std::size_t i, double h) const {
  if (num_parents_ == 0) return kNegInf;
  const double* d = sq_dist_.data() + offsets_[i];
  const double* end = sq_dist_.data() + offsets_[i + 1];
  const double inv = 1.0 / (2.0 * h * h);
  const double nearest = d[0];
  double sum = 1.0;
  for (++d; d != end; ++d) {
    const double rel = (*d - nearest) * inv;
    if (rel > kKernelLogCutoff) break;
    sum += std::exp(-rel);
  }
  return std::log(sum) - nearest * inv - std::log(2.0 * std::numbers::pi * h * h);
}

double KernelSumTable::total(double h, std::size_t* zero_at) const {
  if (!(h > 0.0)) throw NonPositiveBandwidth("bandwidth must be > 0");
  double acc = 0.0;
  for (std::size_t i = 0; i < num_offspring(); ++i) {
    const double v = log_kernel_sum(i, h);
    if (v == kNegInf) {
      if (zero_at) *zero_at = i;
      return kNegInf;
    }
    acc += v;
  }
  return acc;
}

std::vector<WindowMassEvaluator> make_mass_evaluators(const MultitypePattern& pattern,
                                                     const ModelGraph& graph,
                                                     const MassOptions& options) {
  std::vector<WindowMassEvaluator> out;
  const auto offspring = graph.offspring();
  out.reserve(offspring.size());
  for (std::size_t l = 0; l < offspring.size(); ++l) {
    const auto parents = parent_points(pattern, graph, offspring[l]);
    out.emplace_back(pattern.window(), std::vector<Point>(parents.begin(), parents.end()),
                     options.mc_samples, options.seed, l);
  }
  return out;
}

KernelMasses compute_kernel_masses(const MultitypePattern& pattern, const ModelGraph& graph,
                                   std::span<const double> bandwidths, const MassOptions& options) {
  const auto evaluators = make_mass_evaluators(pattern, graph, options);
  if (bandwidths.size() != evaluators.size()) {
    throw ConfigError("one bandwidth per offspring taxon required");
  }
  KernelMasses out(evaluators.size());
  for (std::size_t l = 0; l < evaluators.size(); ++l) {
    out[l].resize(evaluators[l].size());
    evaluators[l].masses(bandwidths[l], out[l]);
  }
  return out;
}

double intensity_at(Point s, TaxonIndex taxon, const MultitypePattern& pattern,
                    const ModelGraph& graph, const ParamVector& params) {
  if (taxon >= graph.size() || taxon >= pattern.num_taxa()) {
    throw UnknownTaxon("taxon index " + std::to_string(taxon) + " is not registered");
  }
  const std::size_t k = graph.ordinal(taxon);
  switch (graph.roles[taxon]) {
    case Role::ParentOnly: return params.lambda_parent.at(k);
    case Role::Unrelated: return params.lambda_unrelated.at(k);
    case Role::Offspring: break;
  }
  const double h = params.bandwidth.at(k);
  double sum = 0.0;
  for (const Point& c : parent_points(pattern, graph, taxon)) sum += gaussian_density(s - c, h);
  return params.alpha.at(k) * sum;
}

double offspring_term(double alpha, double mass_sum, std::size_t n, double log_kernel_total) {
  if (n == 0) return -alpha * mass_sum;
  return -alpha * mass_sum + static_cast<double>(n) * std::log(alpha) + log_kernel_total;
}

double homogeneous_term(double lambda, double area, std::size_t n) {
  if (n == 0) return -area * lambda;
  return -area * lambda + static_cast<double>(n) * std::log(lambda);
}

LogLikelihoodBreakdown log_likelihood(const MultitypePattern& pattern, const ModelGraph& graph,
                                      const ParamVector& params, const KernelMasses& masses) {
  check_alignment(pattern, graph);
  check_params(graph, params);
  const double w = area(pattern.window());
  LogLikelihoodBreakdown out;
  out.constant = w;

  for (const TaxonIndex v : graph.parent_only()) {
    out.parent_terms.push_back(
        homogeneous_term(params.lambda_parent[graph.ordinal(v)], w, pattern.count(v)));
  }
  const auto offspring = graph.offspring();
  if (masses.size() != offspring.size()) throw ConfigError("kernel masses missing for some offspring");
  for (std::size_t l = 0; l < offspring.size(); ++l) {
    const TaxonIndex t = offspring[l];
    const auto ys = pattern.locations(t);
    const auto cs = parent_points(pattern, graph, t);
    if (masses[l].size() != cs.size()) throw ConfigError("kernel masses do not match parent points");
    double mass_sum = 0.0;
    for (double m : masses[l]) mass_sum += m;
    std::size_t zero_at = 0;
    const double log_k = KernelSumTable(ys, cs).total(params.bandwidth[l], &zero_at);
    if (!ys.empty() && log_k == kNegInf && !out.zero_intensity) {
      out.zero_intensity = ZeroIntensityPoint{t, zero_at};
    }
    out.offspring_terms.push_back(offspring_term(params.alpha[l], mass_sum, ys.size(), log_k));
  }
  for (const TaxonIndex j : graph.unrelated()) {
    out.unrelated_terms.push_back(
        homogeneous_term(params.lambda_unrelated[graph.ordinal(j)], w, pattern.count(j)));
  }

  double total = out.constant;
  for (double x : out.parent_terms) total += x;
  for (double x : out.offspring_terms) total += x;
  for (double x : out.unrelated_terms) total += x;
  out.total = out.zero_intensity ? kNegInf : total;
  return out;
}

}  // namespace macpp
