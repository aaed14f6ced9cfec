#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace specguard {

/// Date/time format pattern.
///
/// Tokens: `YYYY` year, `MM` month (minute once an hour token has been seen),
/// `DD` day, `HH` hour, `SS` second, `.F` required fraction, `[.F]` optional
/// fraction, `TZD` zone designator (`Z` or `+hh:mm`). Anything else is a
/// literal. Alternatives are separated by `|`.
///
/// Named presets: `iso8601` (strict, no fraction), `iso8601-lenient`,
/// `rfc3339`, `date`, `time`.
class TimePattern {
 public:
  /// Throws IrBuildError for an empty pattern or alternative.
  static TimePattern compile(std::string_view spec);

  bool matches(std::string_view text) const;
  const std::string& source() const { return source_; }

  enum class TokenKind { Year, Month, Day, Hour, Minute, Second, Fraction, OptFraction, Zone, Literal };
  struct Token {
    TokenKind kind;
    char literal = 0;
  };

 private:
  std::string source_;
  std::vector<std::vector<Token>> alternatives_;
};

/// Expansion of a preset name, or the argument itself.
std::string expand_time_preset(std::string_view spec);

}  // namespace specguard
