#include "macpp/model.hpp"

#include <algorithm>
#include <cmath>
#include <queue>
#include <sstream>

#include "macpp/errors.hpp"

namespace macpp {

const char* to_string(Role role) {
  switch (role) {
    case Role::ParentOnly: return "parent";
    case Role::Offspring: return "offspring";
    case Role::Unrelated: return "unrelated";
  }
  return "?";
}

std::optional<Role> parse_role(std::string_view text) {
  if (text == "parent" || text == "parent_only") return Role::ParentOnly;
  if (text == "offspring") return Role::Offspring;
  if (text == "unrelated") return Role::Unrelated;
  return std::nullopt;
}

ModelGraph ModelGraph::from_specs(const std::vector<TaxonSpec>& specs) {
  ModelGraph g;
  for (const auto& s : specs) {
    g.names.push_back(s.name);
    g.roles.push_back(s.role);
  }
  g.parent_of.resize(specs.size());
  g.unresolved_parent.resize(specs.size());
  for (std::size_t i = 0; i < specs.size(); ++i) {
    if (!specs[i].parent) continue;
    const auto it = std::find(g.names.begin(), g.names.end(), *specs[i].parent);
    if (it == g.names.end()) {
      g.unresolved_parent[i] = *specs[i].parent;
    } else {
      g.parent_of[i] = static_cast<TaxonIndex>(it - g.names.begin());
    }
  }
  return g;
}

std::vector<TaxonSpec> ModelGraph::to_specs() const {
  std::vector<TaxonSpec> out;
  for (std::size_t i = 0; i < size(); ++i) {
    TaxonSpec s{names[i], roles[i], std::nullopt};
    if (parent_of[i]) s.parent = names[*parent_of[i]];
    out.push_back(std::move(s));
  }
  return out;
}

std::vector<TaxonIndex> ModelGraph::taxa_with_role(Role role) const {
  std::vector<TaxonIndex> out;
  for (std::size_t i = 0; i < roles.size(); ++i) {
    if (roles[i] == role) out.push_back(i);
  }
  return out;
}

std::size_t ModelGraph::ordinal(TaxonIndex taxon) const {
  if (taxon >= roles.size()) throw UnknownTaxon("taxon index out of range");
  return static_cast<std::size_t>(
      std::count(roles.begin(), roles.begin() + static_cast<std::ptrdiff_t>(taxon), roles[taxon]));
}

namespace {

// Offspring whose parent chain loops back on itself. Each cycle reported once,
// as "A <- B <- A".
std::vector<std::string> find_cycles(const ModelGraph& g) {
  std::vector<std::string> out;
  const std::size_t m = g.size();
  std::vector<int> state(m, 0);  // 0 unvisited, 1 on current walk, 2 done
  for (std::size_t start = 0; start < m; ++start) {
    if (state[start] != 0) continue;
    std::vector<TaxonIndex> walk;
    std::optional<TaxonIndex> cur = start;
    while (cur && *cur < m && state[*cur] == 0) {
      state[*cur] = 1;
      walk.push_back(*cur);
      cur = g.roles[*cur] == Role::Offspring ? g.parent_of[*cur] : std::nullopt;
    }
    if (cur && *cur < m && state[*cur] == 1) {
      const auto begin = std::find(walk.begin(), walk.end(), *cur);
      std::ostringstream msg;
      msg << "parent cycle: ";
      for (auto it = begin; it != walk.end(); ++it) msg << g.names[*it] << " <- ";
      msg << g.names[*cur];
      out.push_back(msg.str());
    }
    for (TaxonIndex t : walk) state[t] = 2;
  }
  return out;
}

std::vector<std::string> structural_violations(const ModelGraph& g) {
  std::vector<std::string> out;
  const std::size_t m = g.size();
  if (g.roles.size() != m || g.parent_of.size() != m) {
    out.push_back("graph arrays have inconsistent sizes");
    return out;
  }
  if (m == 0) out.push_back("model declares no taxa");
  for (std::size_t i = 0; i < m; ++i) {
    const std::string& name = g.names[i];
    if (name.empty()) out.push_back("taxon " + std::to_string(i) + " has an empty name");
    for (std::size_t j = 0; j < i; ++j) {
      if (g.names[j] == name) out.push_back("duplicate taxon name '" + name + "'");
    }
    const bool has_parent =
        g.parent_of[i].has_value() || (i < g.unresolved_parent.size() && g.unresolved_parent[i]);
    if (g.roles[i] == Role::Offspring) {
      if (!has_parent) out.push_back("offspring taxon '" + name + "' has no parent");
    } else if (has_parent) {
      out.push_back(std::string(to_string(g.roles[i])) + " taxon '" + name +
                    "' must not declare a parent");
    }
    if (i < g.unresolved_parent.size() && g.unresolved_parent[i]) {
      out.push_back("taxon '" + name + "' names unknown parent '" + *g.unresolved_parent[i] + "'");
    }
    if (const auto p = g.parent_of[i]) {
      if (*p >= m) {
        out.push_back("taxon '" + name + "' has parent index out of range");
      } else if (*p == i) {
        out.push_back("taxon '" + name + "' is its own parent");
      } else if (g.roles[*p] == Role::Unrelated) {
        out.push_back("taxon '" + name + "' has unrelated taxon '" + g.names[*p] + "' as parent");
      }
    }
  }
  return out;
}

}  // namespace

std::vector<std::string> validate(const ModelGraph& graph) {
  auto out = structural_violations(graph);
  if (graph.roles.size() == graph.size() && graph.parent_of.size() == graph.size()) {
    for (auto& c : find_cycles(graph)) {
      // Self-parenting is already reported above.
      if (std::count(c.begin(), c.end(), '<') > 1) out.push_back(std::move(c));
    }
  }
  return out;
}

void require_valid(const ModelGraph& graph) {
  const auto structural = structural_violations(graph);
  const auto all = validate(graph);
  if (all.empty()) return;
  std::ostringstream msg;
  msg << "invalid model graph:";
  for (const auto& v : all) msg << "\n  - " << v;
  if (structural.empty()) throw CycleError(msg.str());
  throw GraphError(msg.str());
}

std::vector<TaxonIndex> topo_order(const ModelGraph& graph) {
  const std::size_t m = graph.size();
  std::vector<std::vector<TaxonIndex>> children(m);
  std::vector<std::size_t> pending(m, 0);
  for (std::size_t i = 0; i < m; ++i) {
    if (graph.roles[i] == Role::Offspring && graph.parent_of[i] && *graph.parent_of[i] < m) {
      children[*graph.parent_of[i]].push_back(i);
      pending[i] = 1;
    }
  }
  std::priority_queue<TaxonIndex, std::vector<TaxonIndex>, std::greater<>> ready;
  for (std::size_t i = 0; i < m; ++i) {
    if (pending[i] == 0) ready.push(i);
  }
  std::vector<TaxonIndex> order;
  while (!ready.empty()) {
    const TaxonIndex t = ready.top();
    ready.pop();
    order.push_back(t);
    for (TaxonIndex c : children[t]) {
      if (--pending[c] == 0) ready.push(c);
    }
  }
  if (order.size() != m) {
    std::ostringstream msg;
    msg << "model graph has parent cycles";
    for (const auto& c : find_cycles(graph)) msg << "; " << c;
    throw CycleError(msg.str());
  }
  return order;
}

void check_params(const ModelGraph& graph, const ParamVector& params) {
  auto check = [](const std::vector<double>& v, std::size_t expected, const char* what) {
    if (v.size() != expected) {
      throw ConfigError(std::string(what) + ": expected " + std::to_string(expected) +
                        " value(s), got " + std::to_string(v.size()));
    }
    for (double x : v) {
      if (!std::isfinite(x) || !(x > 0.0)) {
        throw ConfigError(std::string(what) + " values must be finite and strictly positive");
      }
    }
  };
  const auto q = graph.offspring().size();
  check(params.alpha, q, "alpha");
  check(params.bandwidth, q, "bandwidth");
  check(params.lambda_parent, graph.parent_only().size(), "lambda (parent)");
  check(params.lambda_unrelated, graph.unrelated().size(), "lambda (unrelated)");
}

double rate_of(const ModelGraph& graph, const ParamVector& params, TaxonIndex taxon) {
  const std::size_t k = graph.ordinal(taxon);
  switch (graph.roles[taxon]) {
    case Role::ParentOnly: return params.lambda_parent.at(k);
    case Role::Offspring: return params.alpha.at(k);
    case Role::Unrelated: return params.lambda_unrelated.at(k);
  }
  return 0.0;
}

}  // namespace macpp

namespace macpp {

void check_alignment(const MultitypePattern& pattern, const ModelGraph& graph) {
  const auto taxa = pattern.taxa();
  if (taxa.size() != graph.size() || !std::equal(taxa.begin(), taxa.end(), graph.names.begin())) {
    std::string msg = "pattern taxa do not match the model taxa";
    for (const auto& t : taxa) {
      if (std::find(graph.names.begin(), graph.names.end(), t) == graph.names.end()) {
        msg += "; '" + t + "' is not declared in the model";
      }
    }
    throw UnknownTaxon(msg);
  }
}

}  // namespace macpp
