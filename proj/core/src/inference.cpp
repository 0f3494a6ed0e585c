#include "macpp/inference.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>
#include <random>

#include "macpp/errors.hpp"
#include "macpp/parallel.hpp"

namespace macpp {
namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

// Type-7 (linear interpolation) sample quantile of sorted data.
double sorted_quantile(const std::vector<double>& sorted, double p) {
  if (sorted.empty()) return std::numeric_limits<double>::quiet_NaN();
  const double pos = p * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
  return sorted[lo] + (pos - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

const std::vector<Point> kNoPoints;

std::span<const Point> parents_of(const MultitypePattern& pattern, const ModelGraph& graph,
                                  TaxonIndex t) {
  const auto p = graph.parent_of.at(t);
  return p ? pattern.locations(*p) : std::span<const Point>(kNoPoints);
}

double initial_rate(std::size_t n, double exposure, const GammaPrior& prior) {
  if (n > 0 && exposure > 0.0) return static_cast<double>(n) / exposure;
  return alpha_conditional(n, exposure, prior).mean();
}

}  // namespace

void McmcConfig::validate(const ModelGraph& graph) const {
  if (n_iterations == 0) throw ConfigError("mcmc.iterations must be > 0");
  if (n_burnin >= n_iterations) throw ConfigError("mcmc.burnin must be < mcmc.iterations");
  if (thin == 0) throw ConfigError("mcmc.thin must be >= 1");
  if (n_chains == 0) throw ConfigError("mcmc.chains must be >= 1");
  if (mc_integral_samples == 0) throw ConfigError("mcmc.mc_integral_samples must be >= 1");
  if (!proposal_sd.empty()) {
    if (proposal_sd.size() != graph.offspring().size()) {
      throw ConfigError("mcmc.proposal_sd needs one value per offspring taxon");
    }
    for (double s : proposal_sd) {
      if (!std::isfinite(s) || s < 0.0) throw ConfigError("mcmc.proposal_sd must be finite and >= 0");
    }
  }
}

std::vector<double> McmcConfig::resolved_proposal_sd(const ModelGraph& graph,
                                                     const PriorSpec& priors) const {
  if (!proposal_sd.empty()) return proposal_sd;
  return std::vector<double>(graph.offspring().size(), median(priors.bandwidth) / 5.0);
}

GammaConditional alpha_conditional(std::size_t n_offspring, double mass_sum, const GammaPrior& prior) {
  return {prior.shape + static_cast<double>(n_offspring), prior.rate + mass_sum};
}

GammaConditional lambda_conditional(std::size_t n_points, double window_area, const GammaPrior& prior) {
  return {prior.shape + static_cast<double>(n_points), prior.rate + window_area};
}

double draw(const GammaConditional& g, Rng& rng) {
  double x = std::gamma_distribution<double>(g.shape, 1.0 / g.rate)(rng);
  // Tiny shapes can underflow to exactly zero, which is outside the support.
  if (!(x > 0.0)) x = std::numeric_limits<double>::min();
  return x;
}

GibbsDraw gibbs_alpha(std::size_t l, const MultitypePattern& pattern, const ModelGraph& graph,
                      const PriorSpec& spec, std::span<const double> masses, Rng& rng) {
  const auto offspring = graph.offspring();
  if (l >= offspring.size()) throw RoleError("offspring ordinal out of range");
  double mass_sum = 0.0;
  for (double m : masses) mass_sum += m;
  const auto g = alpha_conditional(pattern.count(offspring[l]), mass_sum, spec.alpha);
  return {g, draw(g, rng)};
}

GibbsDraw gibbs_lambda(TaxonIndex taxon, const MultitypePattern& pattern, const ModelGraph& graph,
                       const PriorSpec& spec, Rng& rng) {
  if (taxon >= graph.size()) throw UnknownTaxon("taxon index out of range");
  const Role role = graph.roles[taxon];
  if (role == Role::Offspring) {
    throw RoleError("taxon '" + graph.names[taxon] + "' is an offspring taxon; it has no lambda");
  }
  const GammaPrior& prior = role == Role::ParentOnly ? spec.parent : spec.unrelated;
  const auto g = lambda_conditional(pattern.count(taxon), area(pattern.window()), prior);
  return {g, draw(g, rng)};
}

Sampler::Sampler(const MultitypePattern& pattern, const ModelGraph& graph, const PriorSpec& spec,
                 const McmcConfig& config)
    : pattern_(&pattern), graph_(&graph), spec_(spec), area_(area(pattern.window())) {
  require_valid(graph);
  check_alignment(pattern, graph);
  spec_.validate();
  config.validate(graph);
  proposal_sd_ = config.resolved_proposal_sd(graph, spec_);

  const MassOptions mass_options{config.mc_integral_samples, derive_seed(config.seed, {0x6d617373})};
  auto evaluators = make_mass_evaluators(pattern, graph, mass_options);
  const auto offspring = graph.offspring();
  const double h0 = median(spec_.bandwidth);
  for (std::size_t l = 0; l < offspring.size(); ++l) {
    const TaxonIndex t = offspring[l];
    const auto parents = parents_of(pattern, graph, t);
    OffspringCache cache{t, pattern.count(t), KernelSumTable(pattern.locations(t), parents),
                         std::move(evaluators[l]), {}, 0.0, 0.0};
    offspring_.push_back(std::move(cache));
    params_.bandwidth.push_back(h0);
    params_.alpha.push_back(0.0);
  }
  for (std::size_t l = 0; l < offspring.size(); ++l) {
    refresh(l);
    const auto& c = offspring_[l];
    const double n_parents = static_cast<double>(c.evaluator.size());
    params_.alpha[l] = c.n > 0 ? static_cast<double>(c.n) / std::max(n_parents, 1.0)
                               : initial_rate(0, c.mass_sum, spec_.alpha);
    if (c.n > 0 && c.log_kernel == kNegInf) {
      throw InitializationError("offspring taxon '" + graph.names[c.taxon] +
                                "' has points but its parent taxon has none: zero likelihood");
    }
  }
  for (const TaxonIndex v : graph.parent_only()) {
    params_.lambda_parent.push_back(initial_rate(pattern.count(v), area_, spec_.parent));
  }
  for (const TaxonIndex j : graph.unrelated()) {
    params_.lambda_unrelated.push_back(initial_rate(pattern.count(j), area_, spec_.unrelated));
  }
  if (!std::isfinite(log_posterior())) {
    throw InitializationError("initial state has zero posterior density");
  }
}

void Sampler::refresh(std::size_t l) {
  auto& c = offspring_[l];
  const double h = params_.bandwidth[l];
  c.masses.resize(c.evaluator.size());
  c.mass_sum = c.evaluator.masses(h, c.masses);
  c.log_kernel = c.table.total(h);
}

void Sampler::set_state(const ParamVector& params) {
  check_params(*graph_, params);
  params_ = params;
  for (std::size_t l = 0; l < offspring_.size(); ++l) refresh(l);
}

void Sampler::update_alpha(std::size_t l, Rng& rng) {
  const auto& c = offspring_[l];
  params_.alpha[l] = draw(alpha_conditional(c.n, c.mass_sum, spec_.alpha), rng);
}

void Sampler::update_lambda_parent(std::size_t v, Rng& rng) {
  const TaxonIndex t = graph_->parent_only().at(v);
  params_.lambda_parent[v] = draw(lambda_conditional(pattern_->count(t), area_, spec_.parent), rng);
}

void Sampler::update_lambda_unrelated(std::size_t j, Rng& rng) {
  const TaxonIndex t = graph_->unrelated().at(j);
  params_.lambda_unrelated[j] =
      draw(lambda_conditional(pattern_->count(t), area_, spec_.unrelated), rng);
}

double Sampler::bandwidth_log_target(std::size_t l, double h) const {
  if (!(h > 0.0) || !std::isfinite(h)) return kNegInf;
  const double lp = log_density(spec_.bandwidth, h);
  if (lp == kNegInf) return kNegInf;
  const auto& c = offspring_[l];
  double mass_sum = 0.0;
  for (std::size_t i = 0; i < c.evaluator.size(); ++i) mass_sum += c.evaluator.mass(i, h);
  return -params_.alpha[l] * mass_sum + c.table.total(h) + lp;
}

MhStep Sampler::decide_bandwidth(std::size_t l, double proposed, double log_u) {
  const double current = params_.bandwidth[l];
  if (!(proposed > 0.0) || !std::isfinite(proposed)) return {current, false};
  const double lp_new = log_density(spec_.bandwidth, proposed);
  if (lp_new == kNegInf) return {current, false};

  auto& c = offspring_[l];
  scratch_.resize(c.evaluator.size());
  const double mass_new = c.evaluator.masses(proposed, scratch_);
  const double kernel_new = c.table.total(proposed);
  const double alpha = params_.alpha[l];
  const double log_new = -alpha * mass_new + kernel_new + lp_new;
  const double log_old = -alpha * c.mass_sum + c.log_kernel + log_density(spec_.bandwidth, current);
  const double log_ratio = log_new - log_old;
  // NaN never accepts.
  if (!(log_u < log_ratio)) return {current, false};

  params_.bandwidth[l] = proposed;
  c.masses.swap(scratch_);
  c.mass_sum = mass_new;
  c.log_kernel = kernel_new;
  return {proposed, true};
}

MhStep Sampler::update_bandwidth(std::size_t l, Rng& rng) {
  const double proposed =
      params_.bandwidth[l] + proposal_sd_[l] * std::normal_distribution<double>(0.0, 1.0)(rng);
  const double log_u = std::log(std::uniform_real_distribution<double>(0.0, 1.0)(rng));
  return decide_bandwidth(l, proposed, log_u);
}

void Sampler::sweep(Rng& rng) {
  for (std::size_t l = 0; l < params_.alpha.size(); ++l) update_alpha(l, rng);
  for (std::size_t v = 0; v < params_.lambda_parent.size(); ++v) update_lambda_parent(v, rng);
  for (std::size_t j = 0; j < params_.lambda_unrelated.size(); ++j) update_lambda_unrelated(j, rng);
  for (std::size_t l = 0; l < params_.bandwidth.size(); ++l) update_bandwidth(l, rng);
}

double Sampler::log_posterior() const {
  double total = area_;
  for (std::size_t v = 0; v < params_.lambda_parent.size(); ++v) {
    total += homogeneous_term(params_.lambda_parent[v], area_,
                              pattern_->count(graph_->parent_only()[v]));
  }
  for (std::size_t l = 0; l < offspring_.size(); ++l) {
    const auto& c = offspring_[l];
    if (c.n > 0 && c.log_kernel == kNegInf) return kNegInf;
    total += offspring_term(params_.alpha[l], c.mass_sum, c.n, c.log_kernel);
  }
  for (std::size_t j = 0; j < params_.lambda_unrelated.size(); ++j) {
    total += homogeneous_term(params_.lambda_unrelated[j], area_,
                              pattern_->count(graph_->unrelated()[j]));
  }
  return total + log_prior(params_, spec_);
}

ParamSummary summarize(std::string name, std::span<const double> draws) {
  ParamSummary s;
  s.name = std::move(name);
  const std::size_t n = draws.size();
  if (n == 0) return s;
  double mean = 0.0;
  for (double x : draws) mean += x;
  mean /= static_cast<double>(n);
  double ss = 0.0;
  for (double x : draws) ss += (x - mean) * (x - mean);
  s.mean = mean;
  s.sd = n > 1 ? std::sqrt(ss / static_cast<double>(n - 1)) : 0.0;
  std::vector<double> sorted(draws.begin(), draws.end());
  std::sort(sorted.begin(), sorted.end());
  s.q025 = sorted_quantile(sorted, 0.025);
  s.q50 = sorted_quantile(sorted, 0.5);
  s.q975 = sorted_quantile(sorted, 0.975);
  return s;
}

std::vector<std::string> parameter_names(const ModelGraph& graph) {
  std::vector<std::string> out;
  for (TaxonIndex t : graph.offspring()) out.push_back("alpha." + graph.names[t]);
  for (TaxonIndex t : graph.offspring()) out.push_back("h." + graph.names[t]);
  for (TaxonIndex t : graph.parent_only()) out.push_back("lambda." + graph.names[t]);
  for (TaxonIndex t : graph.unrelated()) out.push_back("lambda." + graph.names[t]);
  return out;
}

std::vector<double> flatten(const ParamVector& p) {
  std::vector<double> out;
  out.insert(out.end(), p.alpha.begin(), p.alpha.end());
  out.insert(out.end(), p.bandwidth.begin(), p.bandwidth.end());
  out.insert(out.end(), p.lambda_parent.begin(), p.lambda_parent.end());
  out.insert(out.end(), p.lambda_unrelated.begin(), p.lambda_unrelated.end());
  return out;
}

ParamVector unflatten(const ModelGraph& graph, std::span<const double> v) {
  const std::size_t q = graph.offspring().size();
  const std::size_t p = graph.parent_only().size();
  const std::size_t u = graph.unrelated().size();
  if (v.size() != 2 * q + p + u) throw ConfigError("parameter count does not match the model");
  ParamVector out;
  auto it = v.begin();
  out.alpha.assign(it, it + static_cast<std::ptrdiff_t>(q));
  it += static_cast<std::ptrdiff_t>(q);
  out.bandwidth.assign(it, it + static_cast<std::ptrdiff_t>(q));
  it += static_cast<std::ptrdiff_t>(q);
  out.lambda_parent.assign(it, it + static_cast<std::ptrdiff_t>(p));
  it += static_cast<std::ptrdiff_t>(p);
  out.lambda_unrelated.assign(it, v.end());
  return out;
}

const ParamSummary& PosteriorSamples::summary(std::string_view name) const {
  for (const auto& s : summaries) {
    if (s.name == name) return s;
  }
  throw UnknownTaxon("no parameter named '" + std::string(name) + "'");
}

ParamVector PosteriorSamples::posterior_mean(const ModelGraph& graph) const {
  std::vector<double> means;
  for (const auto& s : summaries) means.push_back(s.mean);
  return unflatten(graph, means);
}

void PosteriorSamples::write_csv(std::ostream& out) const {
  for (std::size_t p = 0; p < names.size(); ++p) out << (p ? "," : "") << names[p];
  out << '\n';
  for (std::size_t t = 0; t < num_draws(); ++t) {
    for (std::size_t p = 0; p < draws.size(); ++p) out << (p ? "," : "") << format_double(draws[p][t]);
    out << '\n';
  }
}

namespace {

PosteriorSamples finish(const ModelGraph& graph, std::vector<std::vector<double>> draws,
                        std::vector<double> acceptance, std::uint64_t seed) {
  PosteriorSamples out;
  out.names = parameter_names(graph);
  out.draws = std::move(draws);
  out.acceptance_rate = std::move(acceptance);
  out.seed = seed;
  for (std::size_t p = 0; p < out.names.size(); ++p) out.summaries.push_back(summarize(out.names[p], out.draws[p]));
  return out;
}

}  // namespace

PosteriorSamples run_chain(const MultitypePattern& pattern, const ModelGraph& graph,
                           const PriorSpec& spec, const McmcConfig& config, std::size_t chain_index) {
  Sampler sampler(pattern, graph, spec, config);
  const std::uint64_t seed = derive_seed(config.seed, {chain_index});
  Rng rng = make_rng(seed);

  const std::size_t n_params = parameter_names(graph).size();
  const std::size_t q = graph.offspring().size();
  const std::size_t kept = (config.n_iterations - config.n_burnin) / config.thin;
  std::vector<std::vector<double>> draws(n_params);
  for (auto& d : draws) d.reserve(kept);
  std::vector<std::size_t> accepted(q, 0);

  for (std::size_t it = 1; it <= config.n_iterations; ++it) {
    const auto& p = sampler.state();
    for (std::size_t l = 0; l < q; ++l) sampler.update_alpha(l, rng);
    for (std::size_t v = 0; v < p.lambda_parent.size(); ++v) sampler.update_lambda_parent(v, rng);
    for (std::size_t j = 0; j < p.lambda_unrelated.size(); ++j) sampler.update_lambda_unrelated(j, rng);
    for (std::size_t l = 0; l < q; ++l) {
      if (sampler.update_bandwidth(l, rng).accepted) ++accepted[l];
    }
    if (it > config.n_burnin && (it - config.n_burnin) % config.thin == 0) {
      const auto flat = flatten(sampler.state());
      for (std::size_t k = 0; k < n_params; ++k) draws[k].push_back(flat[k]);
    }
  }
  std::vector<double> rate(q);
  for (std::size_t l = 0; l < q; ++l) {
    rate[l] = static_cast<double>(accepted[l]) / static_cast<double>(config.n_iterations);
  }
  return finish(graph, std::move(draws), std::move(rate), seed);
}

ChainSet run_chains(const MultitypePattern& pattern, const ModelGraph& graph,
                    const PriorSpec& spec, const McmcConfig& config) {
  ChainSet out;
  out.chains.resize(config.n_chains);
  parallel_for(config.n_chains, [&](std::size_t c) {
    out.chains[c] = run_chain(pattern, graph, spec, config, c);
  });

  const std::size_t n_params = parameter_names(graph).size();
  std::vector<std::vector<double>> pooled(n_params);
  std::vector<double> acceptance(graph.offspring().size(), 0.0);
  for (const auto& chain : out.chains) {
    for (std::size_t p = 0; p < n_params; ++p) {
      pooled[p].insert(pooled[p].end(), chain.draws[p].begin(), chain.draws[p].end());
    }
    for (std::size_t l = 0; l < acceptance.size(); ++l) {
      acceptance[l] += chain.acceptance_rate[l] / static_cast<double>(out.chains.size());
    }
  }
  out.combined = finish(graph, std::move(pooled), std::move(acceptance), config.seed);
  if (out.chains.size() > 1) {
    for (std::size_t p = 0; p < n_params; ++p) {
      std::vector<std::vector<double>> per_chain;
      for (const auto& chain : out.chains) per_chain.push_back(chain.draws[p]);
      out.rhat.push_back(potential_scale_reduction(per_chain));
    }
  }
  return out;
}

double potential_scale_reduction(std::span<const std::vector<double>> chains) {
  const std::size_t m = chains.size();
  if (m < 2) throw ConfigError("potential scale reduction needs at least two chains");
  const std::size_t n = chains.front().size();
  if (n < 2) throw ConfigError("potential scale reduction needs at least two draws per chain");
  for (const auto& c : chains) {
    if (c.size() != n) throw ConfigError("chains must have equal length");
  }
  std::vector<double> means(m);
  double within = 0.0;
  for (std::size_t k = 0; k < m; ++k) {
    const auto s = summarize("", chains[k]);
    means[k] = s.mean;
    within += s.sd * s.sd;
  }
  within /= static_cast<double>(m);
  const auto between_summary = summarize("", means);
  const double between = static_cast<double>(n) * between_summary.sd * between_summary.sd;
  if (within == 0.0) return between == 0.0 ? 1.0 : std::numeric_limits<double>::infinity();
  const double nd = static_cast<double>(n);
  const double var_plus = (nd - 1.0) / nd * within + between / nd;
  return std::sqrt(var_plus / within);
}

}  // namespace macpp
