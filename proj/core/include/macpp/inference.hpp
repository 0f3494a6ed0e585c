#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "macpp/kernel.hpp"
#include "macpp/likelihood.hpp"
#include "macpp/model.hpp"
#include "macpp/patterns.hpp"
#include "macpp/priors.hpp"
#include "macpp/random.hpp"

namespace macpp {

struct McmcConfig {
  std::size_t n_iterations = 10000;
  std::size_t n_burnin = 2000;
  std::size_t thin = 1;
  /// Random-walk sd per offspring taxon; empty means prior median / 5 for each.
  std::vector<double> proposal_sd;
  std::uint64_t seed = 1;
  std::size_t n_chains = 1;
  std::size_t mc_integral_samples = kDefaultMassSamples;

  /// Throws ConfigError.
  void validate(const ModelGraph& graph) const;
  /// Per-offspring proposal sds with defaults filled in.
  std::vector<double> resolved_proposal_sd(const ModelGraph& graph, const PriorSpec& priors) const;
};

/// Full conditional Gamma(shape, rate).
struct GammaConditional {
  double shape = 0.0;
  double rate = 0.0;
  double mean() const { return shape / rate; }
};

GammaConditional alpha_conditional(std::size_t n_offspring, double mass_sum, const GammaPrior& prior);
GammaConditional lambda_conditional(std::size_t n_points, double window_area, const GammaPrior& prior);
double draw(const GammaConditional& g, Rng& rng);

struct GibbsDraw {
  GammaConditional conditional;
  double value = 0.0;
};

/// Conjugate update of alpha for offspring ordinal l given the current window
/// masses of its parent kernels.
GibbsDraw gibbs_alpha(std::size_t l, const MultitypePattern& pattern, const ModelGraph& graph,
                      const PriorSpec& spec, std::span<const double> masses, Rng& rng);

/// Conjugate update of a homogeneous intensity. Throws RoleError for offspring taxa.
GibbsDraw gibbs_lambda(TaxonIndex taxon, const MultitypePattern& pattern, const ModelGraph& graph,
                       const PriorSpec& spec, Rng& rng);

struct MhStep {
  double h = 0.0;
  bool accepted = false;
};

/// State of one chain plus the per-offspring caches the bandwidth step needs:
/// sorted parent distances, window masses at the current bandwidth, and the
/// current log kernel sums.
class Sampler {
 public:
  /// Starts at alpha_l = n_l / max(#parents, 1), h_l = prior median,
  /// lambda = n / |W| (prior-tempered when n = 0). Throws InitializationError
  /// when that state has zero likelihood.
  Sampler(const MultitypePattern& pattern, const ModelGraph& graph, const PriorSpec& spec,
          const McmcConfig& config);

  const ParamVector& state() const noexcept { return params_; }
  /// Replaces the state and refreshes the mass caches.
  void set_state(const ParamVector& params);

  std::span<const double> masses(std::size_t l) const { return offspring_[l].masses; }
  double mass_sum(std::size_t l) const { return offspring_[l].mass_sum; }
  std::span<const double> proposal_sd() const { return proposal_sd_; }

  void update_alpha(std::size_t l, Rng& rng);
  void update_lambda_parent(std::size_t v, Rng& rng);
  void update_lambda_unrelated(std::size_t j, Rng& rng);
  /// Random-walk Metropolis-Hastings for h_l.
  MhStep update_bandwidth(std::size_t l, Rng& rng);
  /// The accept/reject decision for a given proposal and log-uniform draw.
  MhStep decide_bandwidth(std::size_t l, double proposed, double log_u);

  /// Log of the bandwidth full conditional (up to a constant) at h:
  /// -alpha_l sum_c mass_l(c; h) + sum_y log sum_c k_l(y - c, h) + log prior(h).
  double bandwidth_log_target(std::size_t l, double h) const;

  /// alphas, parent lambdas, unrelated lambdas (Gibbs), then bandwidths (MH).
  void sweep(Rng& rng);

  double log_posterior() const;
  const MultitypePattern& pattern() const noexcept { return *pattern_; }
  const ModelGraph& graph() const noexcept { return *graph_; }

 private:
  struct OffspringCache {
    TaxonIndex taxon = 0;
    std::size_t n = 0;
    KernelSumTable table;
    WindowMassEvaluator evaluator;
    std::vector<double> masses;
    double mass_sum = 0.0;
    double log_kernel = 0.0;
  };
  void refresh(std::size_t l);

  const MultitypePattern* pattern_;
  const ModelGraph* graph_;
  PriorSpec spec_;
  double area_;
  ParamVector params_;
  std::vector<OffspringCache> offspring_;
  std::vector<double> proposal_sd_;
  std::vector<double> scratch_;
};

struct ParamSummary {
  std::string name;
  double mean = 0.0;
  double sd = 0.0;
  double q025 = 0.0;
  double q50 = 0.0;
  double q975 = 0.0;
};

ParamSummary summarize(std::string name, std::span<const double> draws);

/// Column names: alpha.<offspring>..., h.<offspring>..., lambda.<parent>...,
/// lambda.<unrelated>...; the same order as the ParamVector fields.
std::vector<std::string> parameter_names(const ModelGraph& graph);
std::vector<double> flatten(const ParamVector& params);
ParamVector unflatten(const ModelGraph& graph, std::span<const double> values);

struct PosteriorSamples {
  std::vector<std::string> names;
  std::vector<std::vector<double>> draws;  ///< draws[p][t], post burn-in and thinned
  std::vector<double> acceptance_rate;     ///< per offspring ordinal
  std::vector<ParamSummary> summaries;
  std::uint64_t seed = 0;

  std::size_t num_draws() const { return draws.empty() ? 0 : draws.front().size(); }
  const ParamSummary& summary(std::string_view name) const;
  ParamVector posterior_mean(const ModelGraph& graph) const;
  void write_csv(std::ostream& out) const;
};

/// One chain. Chain c uses Rng(derive_seed(config.seed, {c})); kernel-mass
/// Monte Carlo streams depend on config.seed only, so all chains target the
/// same posterior approximation.
PosteriorSamples run_chain(const MultitypePattern& pattern, const ModelGraph& graph,
                           const PriorSpec& spec, const McmcConfig& config,
                           std::size_t chain_index = 0);

/// Healthy band for the bandwidth acceptance rate; rates outside are flagged.
inline constexpr double kAcceptanceLow = 0.05;
inline constexpr double kAcceptanceHigh = 0.8;
inline bool acceptance_flagged(double rate) { return !(rate > kAcceptanceLow && rate < kAcceptanceHigh); }

struct ChainSet {
  std::vector<PosteriorSamples> chains;
  PosteriorSamples combined;           ///< draws pooled across chains
  std::vector<double> rhat;            ///< per parameter, empty for one chain
};

/// config.n_chains chains on the worker pool.
ChainSet run_chains(const MultitypePattern& pattern, const ModelGraph& graph,
                    const PriorSpec& spec, const McmcConfig& config);

/// Gelman-Rubin potential scale reduction over equal-length chains.
double potential_scale_reduction(std::span<const std::vector<double>> chains);

}  // namespace macpp
