#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "macpp/kernel.hpp"
#include "macpp/model.hpp"
#include "macpp/patterns.hpp"

namespace macpp {

/// Precomputed squared distances from each offspring point to every parent
/// point, sorted ascending per offspring point. Evaluates
///   sum_y log sum_c k(y - c, h)
/// for any h without touching the point coordinates again.
class KernelSumTable {
 public:
  KernelSumTable(std::span<const Point> offspring, std::span<const Point> parents);

  std::size_t num_offspring() const noexcept { return offsets_.size() - 1; }
  std::size_t num_parents() const noexcept { return num_parents_; }

  /// log sum_c k(y_i - c, h). -infinity when there are no parents.
  double log_kernel_sum(std::size_t i, double h) const;

  /// Sum over all offspring points. When some point has zero intensity the
  /// result is -infinity and `zero_at` (if given) receives its index.
  double total(double h, std::size_t* zero_at = nullptr) const;

 private:
  std::size_t num_parents_;
  std::vector<std::size_t> offsets_;
  std::vector<double> sq_dist_;
};

/// Kernel terms are summed in log space relative to the nearest parent; terms
/// more than this many nats below it are dropped (each contributes < 4e-18
/// relative).
inline constexpr double kKernelLogCutoff = 40.0;

/// Mass of every (offspring, parent point) kernel inside the window:
/// masses[l][k] is for offspring ordinal l and the k-th point of its parent taxon.
using KernelMasses = std::vector<std::vector<double>>;

struct MassOptions {
  std::size_t mc_samples = kDefaultMassSamples;
  std::uint64_t seed = 0;
};

/// One WindowMassEvaluator per offspring taxon, centred on the observed parent
/// points, with MC stream = offspring ordinal.
std::vector<WindowMassEvaluator> make_mass_evaluators(const MultitypePattern& pattern,
                                                     const ModelGraph& graph,
                                                     const MassOptions& options = {});

KernelMasses compute_kernel_masses(const MultitypePattern& pattern, const ModelGraph& graph,
                                   std::span<const double> bandwidths,
                                   const MassOptions& options = {});

/// Intensity of `taxon` at s: lambda for homogeneous taxa, or
/// alpha_l * sum_c k_l(s - c, h_l) over the observed points of the parent taxon.
double intensity_at(Point s, TaxonIndex taxon, const MultitypePattern& pattern,
                    const ModelGraph& graph, const ParamVector& params);

struct ZeroIntensityPoint {
  TaxonIndex taxon = 0;
  std::size_t point = 0;  ///< index within pattern.locations(taxon)
};

struct LogLikelihoodBreakdown {
  double total = 0.0;
  double constant = 0.0;  ///< |W|, kept so totals compare exactly across implementations
  std::vector<double> parent_terms;
  std::vector<double> offspring_terms;
  std::vector<double> unrelated_terms;
  std::optional<ZeroIntensityPoint> zero_intensity;
};

/// Log-likelihood of the superposed process. Returns total = -infinity with
/// zero_intensity set when an offspring point has no parent mass at all.
LogLikelihoodBreakdown log_likelihood(const MultitypePattern& pattern, const ModelGraph& graph,
                                      const ParamVector& params, const KernelMasses& masses);

/// Offspring term for one taxon from its pieces:
/// -alpha * mass_sum + n * log(alpha) + log_kernel_total.
double offspring_term(double alpha, double mass_sum, std::size_t n, double log_kernel_total);

/// Homogeneous term: -|W| lambda + n log(lambda).
double homogeneous_term(double lambda, double area, std::size_t n);

}  // namespace macpp
