#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "macpp/diagnostics.hpp"
#include "macpp/geometry.hpp"
#include "macpp/inference.hpp"
#include "macpp/model.hpp"
#include "macpp/patterns.hpp"
#include "macpp/priors.hpp"

namespace macpp {

struct WindowSpec {
  enum class Kind { Rectangle, Polygon, ConvexHull };
  Kind kind = Kind::Rectangle;
  double xmin = 0.0, xmax = 1.0, ymin = 0.0, ymax = 1.0;
  std::vector<Point> vertices;  ///< polygon only
};

/// One entry of the "params" block: lambda for homogeneous taxa, alpha and
/// bandwidth for offspring.
struct ParamEntry {
  std::optional<double> lambda, alpha, bandwidth;
};

struct ScenarioSweep {
  std::vector<int> ids;
  std::size_t n_datasets = 100;
  bool with_nsp = false;
};

/// Everything a run needs, parsed from JSON. Unset optional parts fall back
/// to a compiled-in scenario (when `scenario` is set) or to defaults.
struct RunConfig {
  std::optional<WindowSpec> window;
  std::vector<TaxonSpec> taxa;
  std::vector<std::pair<std::string, ParamEntry>> params;
  std::optional<int> scenario;
  std::uint64_t seed = 1;
  bool clip = false;
  std::optional<std::string> pattern;
  std::optional<std::string> units;
  PriorSpec priors;
  McmcConfig mcmc;
  std::vector<std::pair<std::string, double>> proposal_sd;  ///< by offspring name
  std::optional<double> proposal_sd_all;                    ///< one value for every offspring
  ScenarioSweep scenarios;
  MinContrastOptions nsp;
};

/// Throws ConfigError naming the offending field (e.g. "mcmc.thin").
RunConfig parse_config(const nlohmann::json& j);

/// Reads a config file. A run manifest ({"command": ..., "config": {...}})
/// is accepted too; its "config" member is used.
RunConfig load_config(const std::filesystem::path& path);

/// Fully resolved echo, suitable for feeding back into parse_config.
nlohmann::ordered_json to_json(const RunConfig& config);

/// Taxa from the config, else from the scenario preset. Validated.
ModelGraph build_graph(const RunConfig& config);

/// Parameters from the config, else from the scenario preset. Checked.
ParamVector build_params(const RunConfig& config, const ModelGraph& graph);

/// The MCMC settings with per-offspring proposal sds resolved.
McmcConfig build_mcmc(const RunConfig& config, const ModelGraph& graph);

/// Explicit window, else the unit square. ConvexHull needs the points.
Window build_window(const RunConfig& config, std::span<const Point> hull_points = {});

/// Reads a labeled CSV against the graph's taxa. For a convex_hull window the
/// hull of all points becomes the window.
PatternReadResult load_pattern(const RunConfig& config, const ModelGraph& graph,
                               const std::filesystem::path& path);

nlohmann::ordered_json to_json(const PriorSpec& priors);
nlohmann::ordered_json to_json(const Window& window);

}  // namespace macpp
