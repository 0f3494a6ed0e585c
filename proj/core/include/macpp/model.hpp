#pragma once

#include <optional>
#include <string>
#include <vector>

#include "macpp/patterns.hpp"

namespace macpp {

enum class Role { ParentOnly, Offspring, Unrelated };

const char* to_string(Role role);
/// Accepts "parent", "parent_only", "offspring", "unrelated".
std::optional<Role> parse_role(std::string_view text);

/// Declarative form of one taxon, as written in a run configuration.
struct TaxonSpec {
  std::string name;
  Role role = Role::Unrelated;
  std::optional<std::string> parent;
};

/// Role assignment plus the offspring -> parent map. Built unchecked so that
/// validate() can report every violation at once.
struct ModelGraph {
  std::vector<std::string> names;
  std::vector<Role> roles;
  std::vector<std::optional<TaxonIndex>> parent_of;
  /// Parent names that did not resolve, kept for validation messages.
  std::vector<std::optional<std::string>> unresolved_parent;

  static ModelGraph from_specs(const std::vector<TaxonSpec>& specs);
  std::vector<TaxonSpec> to_specs() const;

  std::size_t size() const noexcept { return names.size(); }

  std::vector<TaxonIndex> taxa_with_role(Role role) const;
  std::vector<TaxonIndex> parent_only() const { return taxa_with_role(Role::ParentOnly); }
  std::vector<TaxonIndex> offspring() const { return taxa_with_role(Role::Offspring); }
  std::vector<TaxonIndex> unrelated() const { return taxa_with_role(Role::Unrelated); }

  /// Position of `taxon` among the taxa sharing its role.
  std::size_t ordinal(TaxonIndex taxon) const;

  friend bool operator==(const ModelGraph&, const ModelGraph&) = default;
};

/// Every structural violation: role conflicts, orphan offspring, parents that
/// are unrelated or unknown, and parent cycles. Empty means valid.
std::vector<std::string> validate(const ModelGraph& graph);

/// Throws CycleError when the only problems are cycles, GraphError otherwise.
void require_valid(const ModelGraph& graph);

/// Taxa ordered so each offspring follows its parent; ties broken by index.
/// Throws CycleError.
std::vector<TaxonIndex> topo_order(const ModelGraph& graph);

/// theta, split by role. Each vector is indexed by ordinal within its role.
struct ParamVector {
  std::vector<double> alpha;             ///< mean offspring per parent point
  std::vector<double> bandwidth;         ///< Gaussian scatter sd, length units
  std::vector<double> lambda_parent;     ///< parent-only intensities
  std::vector<double> lambda_unrelated;  ///< unrelated intensities

  friend bool operator==(const ParamVector&, const ParamVector&) = default;
};

/// Throws ConfigError unless sizes match the graph roles and every entry is
/// finite and strictly positive.
void check_params(const ModelGraph& graph, const ParamVector& params);

/// Intensity-like value attached to a taxon: lambda for homogeneous taxa,
/// alpha for offspring.
double rate_of(const ModelGraph& graph, const ParamVector& params, TaxonIndex taxon);

}  // namespace macpp

namespace macpp {

/// Throws UnknownTaxon unless the pattern registers exactly the graph's taxa
/// in the same order.
void check_alignment(const MultitypePattern& pattern, const ModelGraph& graph);

}  // namespace macpp
