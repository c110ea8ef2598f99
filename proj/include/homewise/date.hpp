#pragma once

#include <charconv>
#include <chrono>
#include <compare>
#include <cstdio>
#include <optional>
#include <string>
#include <string_view>

namespace homewise {

/// Calendar day with daily granularity. Wraps `sys_days` so arithmetic is
/// plain day counting.
class Date {
 public:
  constexpr Date() = default;
  constexpr explicit Date(std::chrono::sys_days days) : days_(days) {}
  constexpr Date(int y, unsigned m, unsigned d)
      : days_(std::chrono::year_month_day{std::chrono::year{y}, std::chrono::month{m},
                                          std::chrono::day{d}}) {}

  constexpr std::chrono::sys_days sys_days() const { return days_; }
  constexpr std::chrono::year_month_day ymd() const { return std::chrono::year_month_day{days_}; }
  constexpr int year() const { return static_cast<int>(ymd().year()); }
  constexpr unsigned month() const { return static_cast<unsigned>(ymd().month()); }
  constexpr unsigned day() const { return static_cast<unsigned>(ymd().day()); }

  /// 0 = Monday ... 6 = Sunday.
  constexpr unsigned weekday_index() const {
    return std::chrono::weekday{days_}.iso_encoding() - 1;
  }

  constexpr long serial() const { return days_.time_since_epoch().count(); }

  constexpr Date plus_days(long n) const { return Date{days_ + std::chrono::days{n}}; }
  constexpr long days_until(Date other) const { return other.serial() - serial(); }

  std::string to_string() const {
    char buf[16];
    std::snprintf(buf, sizeof buf, "%04d-%02u-%02u", year(), month(), day());
    return buf;
  }

  friend constexpr auto operator<=>(const Date&, const Date&) = default;
  friend constexpr bool operator==(const Date&, const Date&) = default;

 private:
  std::chrono::sys_days days_{};
};

/// Calendar month key (year, month) used for monthly aggregation.
struct YearMonth {
  int year = 0;
  unsigned month = 1;

  std::string to_string() const {
    char buf[16];
    std::snprintf(buf, sizeof buf, "%04d-%02u", year, month);
    return buf;
  }
  unsigned days() const {
    using namespace std::chrono;
    auto last = year_month_day_last{std::chrono::year{year}, month_day_last{std::chrono::month{month}}};
    return static_cast<unsigned>(last.day());
  }
  friend constexpr auto operator<=>(const YearMonth&, const YearMonth&) = default;
  friend constexpr bool operator==(const YearMonth&, const YearMonth&) = default;
};

inline YearMonth year_month_of(Date d) { return {d.year(), d.month()}; }

inline unsigned days_in_month(unsigned month, bool leap = false) {
  static constexpr unsigned kDays[12] = {31, 28, 31, 30, 31, 30, 31, 31, 30, 31, 30, 31};
  return (month == 2 && leap) ? 29 : kDays[month - 1];
}

struct ParsedDate {
  Date date;
  bool truncated = false;  // a time-of-day component was present and dropped
};

namespace detail {
inline bool parse_fixed_int(std::string_view s, int& out) {
  if (s.empty()) return false;
  for (char c : s)
    if (c < '0' || c > '9') return false;
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc{} && p == s.data() + s.size();
}
}  // namespace detail

/// Accepts `YYYY-MM-DD`, optionally followed by `T` or a space and a time of
/// day (the time is dropped and `truncated` is set).
inline std::optional<ParsedDate> parse_date(std::string_view text) {
  while (!text.empty() && (text.front() == ' ' || text.front() == '\t')) text.remove_prefix(1);
  while (!text.empty() && (text.back() == ' ' || text.back() == '\t' || text.back() == '\r'))
    text.remove_suffix(1);
  if (text.size() < 10 || text[4] != '-' || text[7] != '-') return std::nullopt;
  int y = 0, m = 0, d = 0;
  if (!detail::parse_fixed_int(text.substr(0, 4), y) || !detail::parse_fixed_int(text.substr(5, 2), m) ||
      !detail::parse_fixed_int(text.substr(8, 2), d))
    return std::nullopt;
  if (m < 1 || m > 12 || d < 1 || d > 31) return std::nullopt;
  std::chrono::year_month_day ymd{std::chrono::year{y}, std::chrono::month{static_cast<unsigned>(m)},
                                  std::chrono::day{static_cast<unsigned>(d)}};
  if (!ymd.ok()) return std::nullopt;
  ParsedDate out{Date{std::chrono::sys_days{ymd}}, false};
  if (text.size() == 10) return out;
  const char sep = text[10];
  if (sep != 'T' && sep != ' ') return std::nullopt;
  auto rest = text.substr(11);
  // HH:MM[:SS[.fff]][Z|+hh:mm]
  if (rest.size() < 5 || rest[2] != ':') return std::nullopt;
  int hh = 0, mm = 0;
  if (!detail::parse_fixed_int(rest.substr(0, 2), hh) || !detail::parse_fixed_int(rest.substr(3, 2), mm) ||
      hh > 23 || mm > 59)
    return std::nullopt;
  out.truncated = true;
  return out;
}

}  // namespace homewise
