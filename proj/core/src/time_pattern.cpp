#include "specguard/time_pattern.hpp"

#include <cctype>
#include <optional>

#include "specguard/errors.hpp"

namespace specguard {

std::string expand_time_preset(std::string_view spec) {
  if (spec == "iso8601" || spec == "datetime" || spec == "date-time") return "YYYY-MM-DDTHH:MM:SSTZD";
  if (spec == "iso8601-lenient") return "YYYY-MM-DDTHH:MM:SS[.F]TZD|YYYY-MM-DDTHH:MM[.F]TZD|YYYY-MM-DD";
  if (spec == "rfc3339") return "YYYY-MM-DDTHH:MM:SS[.F]TZD";
  if (spec == "date" || spec == "iso8601-date") return "YYYY-MM-DD";
  if (spec == "time" || spec == "iso8601-time") return "HH:MM:SS|HH:MM";
  return std::string(spec);
}

namespace {

using Token = TimePattern::Token;
using Kind = TimePattern::TokenKind;

std::vector<Token> tokenize(std::string_view s) {
  std::vector<Token> out;
  bool seen_hour = false;
  std::size_t i = 0;
  auto starts = [&](std::string_view t) { return s.substr(i, t.size()) == t; };
  while (i < s.size()) {
    if (starts("YYYY")) {
      out.push_back({Kind::Year});
      i += 4;
    } else if (starts("MM")) {
      out.push_back({seen_hour ? Kind::Minute : Kind::Month});
      i += 2;
    } else if (starts("DD")) {
      out.push_back({Kind::Day});
      i += 2;
    } else if (starts("HH")) {
      out.push_back({Kind::Hour});
      seen_hour = true;
      i += 2;
    } else if (starts("SS")) {
      out.push_back({Kind::Second});
      i += 2;
    } else if (starts("[.F]")) {
      out.push_back({Kind::OptFraction});
      i += 4;
    } else if (starts(".F")) {
      out.push_back({Kind::Fraction});
      i += 2;
    } else if (starts("TZD")) {
      out.push_back({Kind::Zone});
      i += 3;
    } else {
      out.push_back({Kind::Literal, s[i]});
      ++i;
    }
  }
  return out;
}

struct Fields {
  int year = -1, month = -1, day = -1;
};

bool digits(std::string_view t, std::size_t pos, std::size_t n, int& out) {
  if (pos + n > t.size()) return false;
  int v = 0;
  for (std::size_t k = 0; k < n; ++k) {
    char c = t[pos + k];
    if (!std::isdigit(static_cast<unsigned char>(c))) return false;
    v = v * 10 + (c - '0');
  }
  out = v;
  return true;
}

int days_in_month(int year, int month) {
  static const int days[] = {31, 28, 31, 30, 31, 30, 31, 31, 30, 31, 30, 31};
  if (month == 2 && year >= 0) {
    bool leap = (year % 4 == 0 && year % 100 != 0) || year % 400 == 0;
    return leap ? 29 : 28;
  }
  if (month == 2) return 29;
  return days[month - 1];
}

std::optional<std::size_t> match_fraction(std::string_view t, std::size_t pos) {
  if (pos >= t.size() || t[pos] != '.') return std::nullopt;
  std::size_t j = pos + 1;
  while (j < t.size() && std::isdigit(static_cast<unsigned char>(t[j]))) ++j;
  if (j == pos + 1) return std::nullopt;
  return j;
}

std::optional<std::size_t> match_zone(std::string_view t, std::size_t pos) {
  if (pos < t.size() && t[pos] == 'Z') return pos + 1;
  if (pos < t.size() && (t[pos] == '+' || t[pos] == '-')) {
    int hh = 0, mm = 0;
    if (digits(t, pos + 1, 2, hh) && pos + 3 < t.size() && t[pos + 3] == ':' && digits(t, pos + 4, 2, mm) && hh <= 23 &&
        mm <= 59)
      return pos + 6;
  }
  return std::nullopt;
}

bool match_from(const std::vector<Token>& toks, std::size_t ti, std::string_view t, std::size_t pos, Fields f) {
  if (ti == toks.size()) {
    if (pos != t.size()) return false;
    if (f.day > 0 && f.month > 0) return f.day <= days_in_month(f.year, f.month);
    return true;
  }
  const Token& tok = toks[ti];
  int v = 0;
  switch (tok.kind) {
    case Kind::Year:
      if (!digits(t, pos, 4, v)) return false;
      f.year = v;
      return match_from(toks, ti + 1, t, pos + 4, f);
    case Kind::Month:
      if (!digits(t, pos, 2, v) || v < 1 || v > 12) return false;
      f.month = v;
      return match_from(toks, ti + 1, t, pos + 2, f);
    case Kind::Day:
      if (!digits(t, pos, 2, v) || v < 1 || v > 31) return false;
      f.day = v;
      return match_from(toks, ti + 1, t, pos + 2, f);
    case Kind::Hour:
      if (!digits(t, pos, 2, v) || v > 23) return false;
      return match_from(toks, ti + 1, t, pos + 2, f);
    case Kind::Minute:
      if (!digits(t, pos, 2, v) || v > 59) return false;
      return match_from(toks, ti + 1, t, pos + 2, f);
    case Kind::Second:
      if (!digits(t, pos, 2, v) || v > 60) return false;
      return match_from(toks, ti + 1, t, pos + 2, f);
    case Kind::Fraction: {
      auto end = match_fraction(t, pos);
      return end && match_from(toks, ti + 1, t, *end, f);
    }
    case Kind::OptFraction: {
      if (auto end = match_fraction(t, pos); end && match_from(toks, ti + 1, t, *end, f)) return true;
      return match_from(toks, ti + 1, t, pos, f);
    }
    case Kind::Zone: {
      auto end = match_zone(t, pos);
      return end && match_from(toks, ti + 1, t, *end, f);
    }
    case Kind::Literal:
      if (pos >= t.size() || t[pos] != tok.literal) return false;
      return match_from(toks, ti + 1, t, pos + 1, f);
  }
  return false;
}

}  // namespace

TimePattern TimePattern::compile(std::string_view spec) {
  TimePattern p;
  p.source_ = std::string(spec);
  std::string expanded = expand_time_preset(spec);
  std::size_t start = 0;
  while (true) {
    auto bar = expanded.find('|', start);
    std::string_view alt = std::string_view(expanded).substr(start, bar == std::string::npos ? std::string::npos : bar - start);
    if (alt.empty()) throw IrBuildError("empty time pattern alternative in '" + std::string(spec) + "'");
    p.alternatives_.push_back(tokenize(alt));
    if (bar == std::string::npos) break;
    start = bar + 1;
  }
  return p;
}

bool TimePattern::matches(std::string_view text) const {
  for (const auto& alt : alternatives_)
    if (match_from(alt, 0, text, 0, Fields{})) return true;
  return false;
}

}  // namespace specguard
