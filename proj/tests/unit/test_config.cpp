#include <doctest.h>

#include <filesystem>
#include <fstream>

#include "macpp/config.hpp"
#include "macpp/errors.hpp"

using namespace macpp;
using nlohmann::json;

namespace {

std::string error_of(const json& j) {
  try {
    parse_config(j);
  } catch (const ConfigError& e) {
    return e.what();
  }
  return "";
}

}  // namespace

TEST_CASE("defaults") {
  const RunConfig c = parse_config(json::object());
  CHECK(c.seed == 1);
  CHECK(c.mcmc.n_iterations == 10000);
  CHECK(c.mcmc.n_burnin == 2000);
  CHECK(std::holds_alternative<HalfNormal>(c.priors.bandwidth));
  CHECK(c.nsp.q == 0.25);
  CHECK_THROWS_AS(build_graph(c), ConfigError);
}

TEST_CASE("unknown keys and bad values name the field") {
  CHECK(error_of(json::parse(R"({"mcmc": {"thinn": 2}})")).find("mcmc.thinn") != std::string::npos);
  CHECK(error_of(json::parse(R"({"colour": 1})")).find("colour") != std::string::npos);
  CHECK(error_of(json::parse(R"({"mcmc": {"thin": 0}})")).find("mcmc.thin") != std::string::npos);
  CHECK(error_of(json::parse(R"({"mcmc": {"iterations": 10, "burnin": 10}})")).find("mcmc.burnin") !=
        std::string::npos);
  CHECK(error_of(json::parse(R"({"priors": {"alpha": {"shape": -1}}})")).find("priors.alpha.shape") !=
        std::string::npos);
  CHECK(error_of(json::parse(R"({"priors": {"bandwidth": "cauchy"}})")).find("priors.bandwidth") !=
        std::string::npos);
  CHECK(error_of(json::parse(R"({"taxa": [{"name": "A", "role": "boss"}]})")).find("taxa[0].role") !=
        std::string::npos);
  CHECK(error_of(json::parse(R"({"window": {"type": "rect", "xmin": 1, "xmax": 0, "ymin": 0, "ymax": 1}})"))
            .find("window") != std::string::npos);
  CHECK(error_of(json::parse(R"({"window": {"type": "polygon", "vertices": [[0,0],[1,0],[2,0]]}})"))
            .find("window") != std::string::npos);
  CHECK(error_of(json::parse(R"({"scenario": 13})")).find("scenario") != std::string::npos);
  CHECK(error_of(json::parse(R"({"seed": -4})")).find("seed") != std::string::npos);
  CHECK(error_of(json::parse(R"({"params": {"A": {"rate": 3}}})")).find("params.A.rate") != std::string::npos);
}

TEST_CASE("priors by preset or family") {
  auto c = parse_config(json::parse(R"({"priors": {"bandwidth": "lognormal_tight"}})"));
  CHECK(std::get<LogNormal>(c.priors.bandwidth).sigma == 0.1);
  c = parse_config(json::parse(R"({"priors": {"bandwidth": {"preset": "uniform"}}})"));
  CHECK(std::get<Uniform>(c.priors.bandwidth).hi == 0.2);
  c = parse_config(json::parse(R"({"priors": {"bandwidth": {"family": "half_normal", "sigma": 2.06},
                                              "parent": {"shape": 2, "rate": 3}}})"));
  CHECK(std::get<HalfNormal>(c.priors.bandwidth).sigma == 2.06);
  CHECK(c.priors.parent.shape == 2.0);
  CHECK(c.priors.alpha.shape == 0.01);
  c = parse_config(json::parse(R"({"priors": {"bandwidth": {"family": "lognormal", "mu": -3, "sigma": 1}}})"));
  CHECK(std::get<LogNormal>(c.priors.bandwidth).mu == -3.0);
}

TEST_CASE("graph, params, proposal sds") {
  const json j = json::parse(R"({
    "window": {"type": "rect", "xmin": 0, "xmax": 2, "ymin": 0, "ymax": 1},
    "taxa": [{"name": "A", "role": "parent"}, {"name": "B", "role": "offspring", "parent": "A"},
             {"name": "C", "role": "offspring", "parent": "B"}, {"name": "D", "role": "unrelated"}],
    "params": {"A": {"lambda": 10}, "B": {"alpha": 2, "bandwidth": 0.1}, "C": {"alpha": 1, "bandwidth": 0.05},
               "D": {"lambda": 4}},
    "mcmc": {"proposal_sd": {"C": 0.004}, "seed": 9}
  })");
  const RunConfig c = parse_config(j);
  const ModelGraph g = build_graph(c);
  CHECK(g.size() == 4);
  const ParamVector p = build_params(c, g);
  CHECK(p.alpha == std::vector<double>{2, 1});
  CHECK(p.lambda_unrelated == std::vector<double>{4});
  const McmcConfig m = build_mcmc(c, g);
  REQUIRE(m.proposal_sd.size() == 2);
  CHECK(m.proposal_sd[0] == doctest::Approx(median(HalfNormal{0.02}) / 5));
  CHECK(m.proposal_sd[1] == 0.004);
  CHECK(m.seed == 9);
  CHECK(area(build_window(c)) == 2.0);

  json missing = j;
  missing["params"].erase("D");
  CHECK_THROWS_AS(build_params(parse_config(missing), g), ConfigError);
  json wrong = j;
  wrong["params"]["A"] = {{"alpha", 1.0}, {"bandwidth", 0.1}};
  CHECK_THROWS_AS(build_params(parse_config(wrong), g), ConfigError);
  json bad_sd = j;
  bad_sd["mcmc"]["proposal_sd"] = {{"A", 0.1}};
  CHECK_THROWS_AS(build_mcmc(parse_config(bad_sd), g), ConfigError);
  json cyc = j;
  cyc["taxa"][1]["parent"] = "C";
  cyc["taxa"][0]["role"] = "unrelated";
  CHECK_THROWS_AS(build_graph(parse_config(cyc)), GraphError);
}

TEST_CASE("scenario presets fill graph and params") {
  const RunConfig c = parse_config(json::parse(R"({"scenario": 8})"));
  const ModelGraph g = build_graph(c);
  CHECK(g.names == std::vector<std::string>{"A", "B", "C", "D"});
  CHECK(build_params(c, g).bandwidth == std::vector<double>{0.1, 0.01});
}

TEST_CASE("echo round trips") {
  const json j = json::parse(R"({
    "window": {"type": "polygon", "vertices": [[0,0],[1,0],[1,1],[0,1]]},
    "taxa": [{"name": "A", "role": "parent"}, {"name": "B", "role": "offspring", "parent": "A"}],
    "params": {"A": {"lambda": 10}, "B": {"alpha": 2, "bandwidth": 0.1}},
    "seed": 3, "clip": true, "units": "um",
    "priors": {"bandwidth": "uniform"},
    "mcmc": {"iterations": 500, "burnin": 100, "proposal_sd": 0.01},
    "scenarios": {"ids": [1, 2], "n_datasets": 4, "with_nsp": true},
    "nsp": {"q": 0.5, "r_max": 0.2, "n_r": 50}
  })");
  const RunConfig c = parse_config(j);
  const auto echo = to_json(c);
  const RunConfig back = parse_config(json::parse(echo.dump()));
  CHECK(to_json(back).dump() == echo.dump());
  CHECK(back.mcmc.seed == 3);
  CHECK(back.nsp.n_r == 50);
  CHECK(back.scenarios.ids == std::vector<int>{1, 2});
}

TEST_CASE("manifest files and convex hull windows") {
  const auto dir = std::filesystem::temp_directory_path() / "macpp_config_test";
  std::filesystem::create_directories(dir);
  {
    std::ofstream f(dir / "manifest.json");
    f << R"({"command": "simulate", "config": {"scenario": 2, "seed": 5}, "counts": {}})";
  }
  const RunConfig c = load_config(dir / "manifest.json");
  CHECK(c.scenario == 2);
  CHECK(c.seed == 5);
  CHECK_THROWS_AS(load_config(dir / "nope.json"), IoError);
  {
    std::ofstream f(dir / "bad.json");
    f << "{ not json";
  }
  CHECK_THROWS_AS(load_config(dir / "bad.json"), ConfigError);

  {
    std::ofstream f(dir / "pts.csv");
    f << "taxon,x,y\nA,10,10\nA,30,12\nB,20,40\nB,20,20\nA,12,31\n";
  }
  const RunConfig hull = parse_config(json::parse(R"({"window": {"type": "convex_hull"},
      "taxa": [{"name": "A", "role": "parent"}, {"name": "B", "role": "offspring", "parent": "A"}]})"));
  const ModelGraph g = build_graph(hull);
  const auto read = load_pattern(hull, g, dir / "pts.csv");
  CHECK(read.pattern.size() == 5);
  CHECK_FALSE(read.pattern.window().is_rectangle());
  CHECK(boundary_vertices(read.pattern.window()).size() == 4);
  CHECK_THROWS_AS(build_window(hull), ConfigError);
}
