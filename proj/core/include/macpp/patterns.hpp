#pragma once

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "macpp/geometry.hpp"

namespace macpp {

/// Position of a taxon in the pattern's taxon list.
using TaxonIndex = std::size_t;

struct MarkedPoint {
  Point location;
  TaxonIndex taxon = 0;

  friend bool operator==(const MarkedPoint&, const MarkedPoint&) = default;
};

/// Labeled point locations of several taxa inside one observation window.
/// Immutable once built; the constructor enforces that every point lies in
/// the window and carries a registered label.
class MultitypePattern {
 public:
  MultitypePattern(Window window, std::vector<std::string> taxa, std::vector<MarkedPoint> points);

  const Window& window() const noexcept { return window_; }
  std::span<const std::string> taxa() const noexcept { return taxa_; }
  std::span<const MarkedPoint> points() const noexcept { return points_; }
  std::size_t size() const noexcept { return points_.size(); }
  std::size_t num_taxa() const noexcept { return taxa_.size(); }

  /// Throws UnknownTaxon.
  TaxonIndex index_of(std::string_view name) const;
  std::optional<TaxonIndex> find(std::string_view name) const;

  std::size_t count(TaxonIndex taxon) const;
  std::size_t count(std::string_view name) const { return count(index_of(name)); }

  /// Locations of one taxon, in input order.
  std::span<const Point> locations(TaxonIndex taxon) const;

  friend bool operator==(const MultitypePattern& a, const MultitypePattern& b) {
    return a.window_ == b.window_ && a.taxa_ == b.taxa_ && a.points_ == b.points_;
  }

 private:
  void check_taxon(TaxonIndex taxon) const;

  Window window_;
  std::vector<std::string> taxa_;
  std::vector<MarkedPoint> points_;
  std::vector<std::vector<Point>> by_taxon_;
};

enum class OutOfWindowPolicy { Error, Clip };

struct PatternReadResult {
  MultitypePattern pattern;
  std::size_t dropped = 0;  ///< rows discarded under OutOfWindowPolicy::Clip
};

/// Reads `taxon,x,y` CSV. With `declared_taxa` the label set and order are
/// fixed and unlisted labels raise UnknownTaxon; otherwise taxa are registered
/// in order of first appearance.
PatternReadResult read_pattern_csv(std::istream& in, const Window& window,
                                   OutOfWindowPolicy policy = OutOfWindowPolicy::Error,
                                   const std::vector<std::string>* declared_taxa = nullptr);
PatternReadResult read_pattern_csv(const std::filesystem::path& path, const Window& window,
                                   OutOfWindowPolicy policy = OutOfWindowPolicy::Error,
                                   const std::vector<std::string>* declared_taxa = nullptr);

/// Writes the points only; the window belongs in the accompanying config.
void write_pattern_csv(std::ostream& out, const MultitypePattern& pattern);
void write_pattern_csv(const std::filesystem::path& path, const MultitypePattern& pattern);

/// `%.17g`-style text: reads back to the identical double.
std::string format_double(double value);

}  // namespace macpp
