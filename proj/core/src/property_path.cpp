#include "specguard/property_path.hpp"

#include "specguard/errors.hpp"

namespace specguard {

namespace {

bool needs_escape(char c) { return c == '.' || c == '[' || c == ']' || c == '\\'; }

}  // namespace

PropertyPath PropertyPath::parse(std::string_view text) {
  std::vector<PathSegment> segments;
  std::string current;
  bool have_name = false;
  // After a wildcard or at the start, a '.' is not allowed to lead.
  bool expect_separator = false;

  auto flush = [&] {
    if (have_name) {
      if (current.empty()) throw ParseError("empty segment in property path '" + std::string(text) + "'");
      segments.push_back(PathSegment::field(std::move(current)));
      current.clear();
      have_name = false;
    }
  };

  for (std::size_t i = 0; i < text.size(); ++i) {
    char c = text[i];
    if (c == '\\') {
      if (i + 1 >= text.size() || !needs_escape(text[i + 1])) {
        throw ParseError("bad escape in property path '" + std::string(text) + "'");
      }
      if (expect_separator) throw ParseError("missing '.' after '[]' in '" + std::string(text) + "'");
      current.push_back(text[++i]);
      have_name = true;
    } else if (c == '.') {
      if (!have_name && !expect_separator) {
        throw ParseError("empty segment in property path '" + std::string(text) + "'");
      }
      flush();
      expect_separator = false;
      if (i + 1 == text.size()) throw ParseError("trailing '.' in property path '" + std::string(text) + "'");
    } else if (c == '[') {
      if (i + 1 >= text.size() || text[i + 1] != ']') {
        throw ParseError("'[' must be followed by ']' in property path '" + std::string(text) + "'");
      }
      flush();
      segments.push_back(PathSegment::any_element());
      expect_separator = true;
      ++i;
    } else if (c == ']') {
      throw ParseError("unbalanced ']' in property path '" + std::string(text) + "'");
    } else {
      if (expect_separator) throw ParseError("missing '.' after '[]' in '" + std::string(text) + "'");
      current.push_back(c);
      have_name = true;
    }
  }
  flush();
  return PropertyPath(std::move(segments));
}

std::string PropertyPath::render() const {
  std::string out;
  bool first = true;
  for (const auto& seg : segments_) {
    if (seg.wildcard) {
      out += "[]";
    } else {
      if (!first) out.push_back('.');
      for (char c : seg.name) {
        if (needs_escape(c)) out.push_back('\\');
        out.push_back(c);
      }
    }
    first = false;
  }
  return out;
}

bool PropertyPath::has_wildcard() const noexcept {
  for (const auto& s : segments_)
    if (s.wildcard) return true;
  return false;
}

std::size_t PropertyPath::depth() const noexcept {
  std::size_t n = 0;
  for (const auto& s : segments_)
    if (!s.wildcard) ++n;
  return n;
}

std::string PropertyPath::leaf_name() const {
  for (auto it = segments_.rbegin(); it != segments_.rend(); ++it)
    if (!it->wildcard) return it->name;
  return {};
}

PropertyPath PropertyPath::child(std::string name) const {
  auto segs = segments_;
  segs.push_back(PathSegment::field(std::move(name)));
  return PropertyPath(std::move(segs));
}

PropertyPath PropertyPath::element() const {
  auto segs = segments_;
  segs.push_back(PathSegment::any_element());
  return PropertyPath(std::move(segs));
}

PropertyPath PropertyPath::prefix(std::size_t n) const {
  n = std::min(n, segments_.size());
  return PropertyPath(std::vector<PathSegment>(segments_.begin(), segments_.begin() + static_cast<std::ptrdiff_t>(n)));
}

PropertyPath PropertyPath::suffix(std::size_t from) const {
  from = std::min(from, segments_.size());
  return PropertyPath(std::vector<PathSegment>(segments_.begin() + static_cast<std::ptrdiff_t>(from), segments_.end()));
}

bool PropertyPath::starts_with(const PropertyPath& other) const {
  if (other.segments_.size() > segments_.size()) return false;
  return std::equal(other.segments_.begin(), other.segments_.end(), segments_.begin());
}

}  // namespace specguard
