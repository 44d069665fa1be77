#include "snp/time.hpp"

#include <chrono>
#include <cstdio>

#include "snp/error.hpp"

namespace snp {
namespace {

// Proleptic Gregorian conversions (H. Hinnant's civil algorithms).
constexpr std::int64_t days_from_civil(std::int64_t y, unsigned m, unsigned d) {
  y -= m <= 2;
  const std::int64_t era = (y >= 0 ? y : y - 399) / 400;
  const auto yoe = static_cast<unsigned>(y - era * 400);
  const unsigned doy = (153 * (m + (m > 2 ? -3 : 9)) + 2) / 5 + d - 1;
  const unsigned doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
  return era * 146097 + static_cast<std::int64_t>(doe) - 719468;
}

struct Civil {
  std::int64_t y;
  unsigned m, d;
};

constexpr Civil civil_from_days(std::int64_t z) {
  z += 719468;
  const std::int64_t era = (z >= 0 ? z : z - 146096) / 146097;
  const auto doe = static_cast<unsigned>(z - era * 146097);
  const unsigned yoe = (doe - doe / 1460 + doe / 36524 - doe / 146096) / 365;
  const std::int64_t y = static_cast<std::int64_t>(yoe) + era * 400;
  const unsigned doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
  const unsigned mp = (5 * doy + 2) / 153;
  const unsigned d = doy - (153 * mp + 2) / 5 + 1;
  const unsigned m = mp < 10 ? mp + 3 : mp - 9;
  return {y + (m <= 2), m, d};
}

constexpr std::int64_t floor_div(std::int64_t a, std::int64_t b) {
  return a / b - ((a % b != 0) && ((a < 0) != (b < 0)));
}

[[noreturn]] void bad(std::string_view text) {
  throw Error(ErrorCode::malformed, "invalid RFC 3339 timestamp: '" + std::string(text) + "'");
}

class Cursor {
 public:
  explicit Cursor(std::string_view s) : s_(s) {}

  int digits(std::size_t n) {
    if (pos_ + n > s_.size()) bad(s_);
    int v = 0;
    for (std::size_t i = 0; i < n; ++i) {
      const char c = s_[pos_ + i];
      if (c < '0' || c > '9') bad(s_);
      v = v * 10 + (c - '0');
    }
    pos_ += n;
    return v;
  }
  void expect(char c) {
    if (pos_ >= s_.size() || s_[pos_] != c) bad(s_);
    ++pos_;
  }
  bool accept(char c) {
    if (pos_ < s_.size() && s_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }
  bool peek_digit() const { return pos_ < s_.size() && s_[pos_] >= '0' && s_[pos_] <= '9'; }
  bool done() const { return pos_ == s_.size(); }
  char peek() const { return pos_ < s_.size() ? s_[pos_] : '\0'; }

 private:
  std::string_view s_;
  std::size_t pos_ = 0;
};

}  // namespace

std::string format_rfc3339(Timestamp ts) {
  const std::int64_t secs = floor_div(ts.micros, 1'000'000);
  const std::int64_t frac = ts.micros - secs * 1'000'000;
  const std::int64_t days = floor_div(secs, 86400);
  const std::int64_t sod = secs - days * 86400;
  const Civil c = civil_from_days(days);
  char buf[64];
  if (frac == 0) {
    std::snprintf(buf, sizeof buf, "%04lld-%02u-%02uT%02d:%02d:%02dZ", static_cast<long long>(c.y),
                  c.m, c.d, static_cast<int>(sod / 3600), static_cast<int>(sod / 60 % 60),
                  static_cast<int>(sod % 60));
  } else {
    std::snprintf(buf, sizeof buf, "%04lld-%02u-%02uT%02d:%02d:%02d.%06lldZ",
                  static_cast<long long>(c.y), c.m, c.d, static_cast<int>(sod / 3600),
                  static_cast<int>(sod / 60 % 60), static_cast<int>(sod % 60),
                  static_cast<long long>(frac));
  }
  return buf;
}

Timestamp parse_rfc3339(std::string_view text) {
  Cursor cur(text);
  const int year = cur.digits(4);
  cur.expect('-');
  const int month = cur.digits(2);
  cur.expect('-');
  const int day = cur.digits(2);
  if (!cur.accept('T') && !cur.accept('t')) bad(text);
  const int hour = cur.digits(2);
  cur.expect(':');
  const int minute = cur.digits(2);
  cur.expect(':');
  const int second = cur.digits(2);

  std::int64_t frac_us = 0;
  if (cur.accept('.')) {
    if (!cur.peek_digit()) bad(text);
    int scale = 100'000;
    int count = 0;
    while (cur.peek_digit()) {
      const int digit = cur.digits(1);
      if (++count > 9) bad(text);
      frac_us += digit * scale;
      scale /= 10;
    }
  }

  std::int64_t offset_s = 0;
  if (cur.accept('Z') || cur.accept('z')) {
  } else if (cur.peek() == '+' || cur.peek() == '-') {
    const int sign = cur.accept('-') ? -1 : (cur.accept('+'), 1);
    const int oh = cur.digits(2);
    cur.expect(':');
    const int om = cur.digits(2);
    if (oh > 23 || om > 59) bad(text);
    offset_s = sign * (oh * 3600 + om * 60);
  } else {
    bad(text);
  }
  if (!cur.done()) bad(text);

  static constexpr int kDays[] = {31, 29, 31, 30, 31, 30, 31, 31, 30, 31, 30, 31};
  if (month < 1 || month > 12 || day < 1 || day > kDays[month - 1] || hour > 23 || minute > 59 ||
      second > 60) {
    bad(text);
  }
  const bool leap = (year % 4 == 0 && year % 100 != 0) || year % 400 == 0;
  if (month == 2 && day == 29 && !leap) bad(text);

  const std::int64_t days = days_from_civil(year, static_cast<unsigned>(month), static_cast<unsigned>(day));
  const std::int64_t secs = days * 86400 + hour * 3600 + minute * 60 + second - offset_s;
  return {secs * 1'000'000 + frac_us};
}

Timestamp now_utc() {
  using namespace std::chrono;
  return {duration_cast<microseconds>(system_clock::now().time_since_epoch()).count()};
}

}  // namespace snp
