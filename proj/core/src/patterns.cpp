#include "macpp/patterns.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include "macpp/errors.hpp"

namespace macpp {
namespace {

bool valid_name(std::string_view name) {
  return !name.empty() && name.find_first_of(",\"\r\n") == std::string_view::npos;
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

double parse_coordinate(std::string_view field, std::size_t line, const char* what) {
  field = trim(field);
  double value = 0.0;
  const auto* end = field.data() + field.size();
  const auto [ptr, ec] = std::from_chars(field.data(), end, value);
  if (ec != std::errc() || ptr != end || field.empty() || !std::isfinite(value)) {
    throw ParseError(line, std::string("bad ") + what + " value '" + std::string(field) + "'");
  }
  return value;
}

}  // namespace

MultitypePattern::MultitypePattern(Window window, std::vector<std::string> taxa,
                                   std::vector<MarkedPoint> points)
    : window_(std::move(window)), taxa_(std::move(taxa)), points_(std::move(points)) {
  for (std::size_t i = 0; i < taxa_.size(); ++i) {
    if (!valid_name(taxa_[i])) throw ConfigError("invalid taxon name '" + taxa_[i] + "'");
    for (std::size_t j = 0; j < i; ++j) {
      if (taxa_[i] == taxa_[j]) throw ConfigError("duplicate taxon name '" + taxa_[i] + "'");
    }
  }
  by_taxon_.resize(taxa_.size());
  for (std::size_t k = 0; k < points_.size(); ++k) {
    const MarkedPoint& p = points_[k];
    if (p.taxon >= taxa_.size()) {
      throw UnknownTaxon("point " + std::to_string(k) + " has unregistered taxon index " +
                         std::to_string(p.taxon));
    }
    if (!contains(window_, p.location)) {
      throw OutOfWindow("point " + std::to_string(k) + " (" + format_double(p.location.x) + ", " +
                        format_double(p.location.y) + ") lies outside the window");
    }
    by_taxon_[p.taxon].push_back(p.location);
  }
}

std::optional<TaxonIndex> MultitypePattern::find(std::string_view name) const {
  const auto it = std::find(taxa_.begin(), taxa_.end(), name);
  if (it == taxa_.end()) return std::nullopt;
  return static_cast<TaxonIndex>(it - taxa_.begin());
}

TaxonIndex MultitypePattern::index_of(std::string_view name) const {
  if (auto idx = find(name)) return *idx;
  throw UnknownTaxon("unknown taxon '" + std::string(name) + "'");
}

void MultitypePattern::check_taxon(TaxonIndex taxon) const {
  if (taxon >= taxa_.size()) {
    throw UnknownTaxon("taxon index " + std::to_string(taxon) + " is not registered");
  }
}

std::size_t MultitypePattern::count(TaxonIndex taxon) const {
  check_taxon(taxon);
  return by_taxon_[taxon].size();
}

std::span<const Point> MultitypePattern::locations(TaxonIndex taxon) const {
  check_taxon(taxon);
  return by_taxon_[taxon];
}

std::string format_double(double value) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, value, std::chars_format::general, 17);
  (void)ec;
  return std::string(buf, ptr);
}

PatternReadResult read_pattern_csv(std::istream& in, const Window& window, OutOfWindowPolicy policy,
                                   const std::vector<std::string>* declared_taxa) {
  std::vector<std::string> taxa;
  if (declared_taxa) taxa = *declared_taxa;
  std::vector<MarkedPoint> points;
  std::vector<std::size_t> outside_lines;

  std::string line;
  std::size_t line_no = 0;
  bool header_seen = false;
  while (std::getline(in, line)) {
    ++line_no;
    std::string_view view(line);
    if (line_no == 1 && view.starts_with("\xEF\xBB\xBF")) view.remove_prefix(3);
    if (trim(view).empty()) continue;
    if (!header_seen) {
      if (trim(view) != "taxon,x,y") throw ParseError(line_no, "expected header 'taxon,x,y'");
      header_seen = true;
      continue;
    }
    const auto c1 = view.find(',');
    const auto c2 = c1 == std::string_view::npos ? c1 : view.find(',', c1 + 1);
    if (c2 == std::string_view::npos || view.find(',', c2 + 1) != std::string_view::npos) {
      throw ParseError(line_no, "expected 3 comma-separated fields");
    }
    const std::string_view name = trim(view.substr(0, c1));
    if (!valid_name(name)) throw ParseError(line_no, "empty or invalid taxon label");
    const Point loc{parse_coordinate(view.substr(c1 + 1, c2 - c1 - 1), line_no, "x"),
                    parse_coordinate(view.substr(c2 + 1), line_no, "y")};

    auto it = std::find(taxa.begin(), taxa.end(), name);
    if (it == taxa.end()) {
      if (declared_taxa) {
        throw UnknownTaxon("line " + std::to_string(line_no) + ": taxon '" + std::string(name) +
                           "' is not declared in the model");
      }
      taxa.emplace_back(name);
      it = taxa.end() - 1;
    }
    if (!contains(window, loc)) {
      outside_lines.push_back(line_no);
      if (policy == OutOfWindowPolicy::Clip) continue;
    }
    points.push_back({loc, static_cast<TaxonIndex>(it - taxa.begin())});
  }
  if (!header_seen) throw ParseError(line_no + 1, "missing header 'taxon,x,y'");

  if (!outside_lines.empty() && policy == OutOfWindowPolicy::Error) {
    std::ostringstream msg;
    msg << outside_lines.size() << " point(s) outside the window at line(s)";
    const std::size_t shown = std::min<std::size_t>(outside_lines.size(), 20);
    for (std::size_t i = 0; i < shown; ++i) msg << (i ? ", " : " ") << outside_lines[i];
    if (shown < outside_lines.size()) msg << ", ...";
    throw OutOfWindow(msg.str());
  }
  return {MultitypePattern(window, std::move(taxa), std::move(points)), outside_lines.size()};
}

PatternReadResult read_pattern_csv(const std::filesystem::path& path, const Window& window,
                                   OutOfWindowPolicy policy,
                                   const std::vector<std::string>* declared_taxa) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open '" + path.string() + "'");
  return read_pattern_csv(in, window, policy, declared_taxa);
}

void write_pattern_csv(std::ostream& out, const MultitypePattern& pattern) {
  out << "taxon,x,y\n";
  for (const MarkedPoint& p : pattern.points()) {
    out << pattern.taxa()[p.taxon] << ',' << format_double(p.location.x) << ','
        << format_double(p.location.y) << '\n';
  }
}

void write_pattern_csv(const std::filesystem::path& path, const MultitypePattern& pattern) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write '" + path.string() + "'");
  write_pattern_csv(out, pattern);
  if (!out) throw IoError("write failed for '" + path.string() + "'");
}

}  // namespace macpp
