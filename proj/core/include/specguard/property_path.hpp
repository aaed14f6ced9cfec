#pragma once

#include <compare>
#include <string>
#include <string_view>
#include <vector>

namespace specguard {

/// One step of a property path: a field name or an array wildcard.
struct PathSegment {
  std::string name;
  bool wildcard = false;

  static PathSegment field(std::string n) { return {std::move(n), false}; }
  static PathSegment any_element() { return {{}, true}; }

  auto operator<=>(const PathSegment&) const = default;
};

/// Canonical path into a response body, rendered as dot-separated names with
/// `[]` for array descent (`items[].created`). Names containing `.`, `[`, `]`
/// or `\` are backslash-escaped in the rendered form.
class PropertyPath {
 public:
  PropertyPath() = default;
  explicit PropertyPath(std::vector<PathSegment> segments) : segments_(std::move(segments)) {}

  /// Throws ParseError on malformed text.
  static PropertyPath parse(std::string_view text);
  std::string render() const;

  const std::vector<PathSegment>& segments() const noexcept { return segments_; }
  bool empty() const noexcept { return segments_.empty(); }
  std::size_t size() const noexcept { return segments_.size(); }
  bool has_wildcard() const noexcept;
  /// Number of named (non-wildcard) segments.
  std::size_t depth() const noexcept;
  /// Last named segment, or empty for root/wildcard-only paths.
  std::string leaf_name() const;

  PropertyPath child(std::string name) const;
  PropertyPath element() const;
  PropertyPath prefix(std::size_t n) const;
  PropertyPath suffix(std::size_t from) const;
  bool starts_with(const PropertyPath& other) const;

  auto operator<=>(const PropertyPath&) const = default;

 private:
  std::vector<PathSegment> segments_;
};

}  // namespace specguard
