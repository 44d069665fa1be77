#pragma once

#include <compare>
#include <cstdint>
#include <string>
#include <string_view>

namespace snp {

/// UTC instant with microsecond resolution since the Unix epoch.
struct Timestamp {
  std::int64_t micros = 0;

  constexpr auto operator<=>(const Timestamp&) const = default;

  static constexpr Timestamp from_seconds(std::int64_t s) { return {s * 1'000'000}; }
  constexpr Timestamp plus_micros(std::int64_t us) const { return {micros + us}; }
};

/// `YYYY-MM-DDTHH:MM:SS[.ffffff]Z`; the fraction is printed only when nonzero.
std::string format_rfc3339(Timestamp ts);

/// Accepts `Z` or `±hh:mm` offsets and up to nine fractional digits (truncated
/// to microseconds). Throws snp::Error(malformed).
Timestamp parse_rfc3339(std::string_view text);

Timestamp now_utc();

}  // namespace snp
