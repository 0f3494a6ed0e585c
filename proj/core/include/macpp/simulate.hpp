#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "macpp/diagnostics.hpp"
#include "macpp/inference.hpp"
#include "macpp/model.hpp"
#include "macpp/patterns.hpp"
#include "macpp/priors.hpp"

namespace macpp {

/// Draws one pattern. Taxa are generated in topological order: parent-only
/// and unrelated taxa as homogeneous Poisson processes, each offspring taxon
/// by scattering Poisson(alpha_l) points N(c, h_l^2 I) around every realized
/// parent point c and keeping those inside the window. No parents exist
/// outside the window.
MultitypePattern simulate_pattern(const ModelGraph& graph, const ParamVector& params,
                                  const Window& window, std::uint64_t seed);

/// N ~ Poisson(lambda |W|) uniform points (rejection from the bounding box
/// for polygons).
std::vector<Point> simulate_poisson(const Window& window, double lambda, Rng& rng);

/// Poisson(alpha) points N(c, h^2 I) around each parent c, keeping those in
/// the window.
std::vector<Point> simulate_offspring(std::span<const Point> parents, double alpha, double h,
                                      const Window& window, Rng& rng);

/// One cell of the twelve-scenario simulation grid on the unit square: parent
/// taxon A (lambda 150), offspring B and C of A, and optionally an unrelated
/// taxon D (lambda 95).
struct Scenario {
  int id = 1;
  bool unrelated_present = false;
  double alpha2 = 1.5, alpha3 = 1.0;
  double h2 = 0.01, h3 = 0.02;
  double lambda_parent = 150.0;
  double lambda_unrelated = 95.0;

  std::string density_label() const;    ///< Sparse / Dense / Mixed
  std::string bandwidth_label() const;  ///< Low / High
  ModelGraph graph() const;
  ParamVector params() const;
  Window window() const { return Window::unit_square(); }
};

/// Throws ConfigError unless 1 <= id <= 12.
Scenario scenario(int id);

struct ScenarioOptions {
  std::size_t n_datasets = 100;
  std::uint64_t seed = 1;
  McmcConfig mcmc;
  PriorSpec priors;
  bool with_nsp = false;
  MinContrastOptions nsp;
  std::size_t workers = 0;  ///< 0 = worker_count()
};

/// Per-dataset outcome. Parameter vectors follow parameter_names(graph).
struct DatasetResult {
  std::size_t index = 0;
  std::uint64_t data_seed = 0;
  std::uint64_t fit_seed = 0;
  bool fit_ok = false;
  std::string error;
  std::vector<double> posterior_mean;
  std::vector<double> posterior_sd;
  std::vector<double> acceptance_rate;
  std::vector<std::size_t> counts;  ///< per taxon
  /// Minimum-contrast fits for each offspring taxon (when requested).
  std::vector<ThomasFit> nsp;
};

struct ScenarioRow {
  std::string parameter;
  double truth = 0.0;
  double est = 0.0;  ///< mean of posterior means
  double sd = 0.0;   ///< mean of posterior sds
  double se = 0.0;   ///< sd of posterior means across datasets
  std::optional<double> nsp_est;
  std::optional<double> nsp_se;
};

struct ScenarioReport {
  Scenario scenario;
  std::size_t n_datasets = 0;
  std::size_t n_failed = 0;  ///< MACPP fits that threw
  std::optional<double> nsp_failure_pct;
  std::vector<ScenarioRow> rows;
  std::vector<DatasetResult> datasets;
};

/// Simulate, fit and summarize n datasets (n >= 2). Dataset k uses data seed
/// derive_seed(seed, {id, k, 0}) and chain seed derive_seed(seed, {id, k, 1}).
/// Aggregation happens after all jobs finish, in dataset order.
ScenarioReport run_scenario(const Scenario& s, const ScenarioOptions& options);

/// Rows: parameter x scenario. Columns: scenario, parameter, true, est, sd, se,
/// datasets, failed_pct, nsp_est, nsp_se, nsp_failed_pct.
void write_scenario_csv(std::ostream& out, const std::vector<ScenarioReport>& reports);

}  // namespace macpp
