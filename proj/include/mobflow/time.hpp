#pragma once

#include <array>
#include <charconv>
#include <chrono>
#include <cstdint>
#include <cstdio>
#include <optional>
#include <string>
#include <string_view>

#include <boost/date_time/local_time/local_time.hpp>

#include "mobflow/error.hpp"

namespace mobflow {

using Date = std::chrono::sys_days;
// Seconds since the Unix epoch, UTC.
using Timestamp = std::int64_t;

namespace detail {

template <typename Int>
bool parse_int(std::string_view s, Int& out) {
  if (s.empty()) return false;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc{} && ptr == s.data() + s.size();
}

inline bool all_digits(std::string_view s) {
  if (s.empty()) return false;
  std::size_t i = (s.front() == '-') ? 1 : 0;
  if (i == s.size()) return false;
  for (; i < s.size(); ++i)
    if (s[i] < '0' || s[i] > '9') return false;
  return true;
}

}  // namespace detail

inline std::string format_date(Date d) {
  const std::chrono::year_month_day ymd{d};
  char buf[16];
  std::snprintf(buf, sizeof buf, "%04d-%02u-%02u", static_cast<int>(ymd.year()),
                static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()));
  return buf;
}

inline std::optional<Date> try_parse_date(std::string_view s) {
  if (s.size() != 10 || s[4] != '-' || s[7] != '-') return std::nullopt;
  int y = 0;
  unsigned m = 0, d = 0;
  if (!detail::parse_int(s.substr(0, 4), y) || !detail::parse_int(s.substr(5, 2), m) ||
      !detail::parse_int(s.substr(8, 2), d))
    return std::nullopt;
  const std::chrono::year_month_day ymd{std::chrono::year{y}, std::chrono::month{m},
                                        std::chrono::day{d}};
  if (!ymd.ok()) return std::nullopt;
  return Date{ymd};
}

inline Date parse_date(std::string_view s) {
  if (auto d = try_parse_date(s)) return *d;
  throw ParseError("invalid date '" + std::string(s) + "', expected YYYY-MM-DD");
}

inline std::chrono::weekday weekday_of(Date d) { return std::chrono::weekday{d}; }

inline bool is_weekend(Date d) {
  const auto wd = weekday_of(d);
  return wd == std::chrono::Saturday || wd == std::chrono::Sunday;
}

inline bool is_sunday(Date d) { return weekday_of(d) == std::chrono::Sunday; }

inline Date date_of_utc(Timestamp t) {
  return Date{std::chrono::floor<std::chrono::days>(std::chrono::sys_seconds{std::chrono::seconds{t}})};
}

// Accepts `YYYY-MM-DDTHH:MM:SS` (a space may replace `T`), optionally
// followed by `Z` or a `+HH:MM` / `-HH:MM` offset. No designator means UTC.
inline std::optional<Timestamp> parse_iso8601(std::string_view s) {
  if (s.size() < 19) return std::nullopt;
  const auto date = try_parse_date(s.substr(0, 10));
  if (!date || (s[10] != 'T' && s[10] != ' ') || s[13] != ':' || s[16] != ':')
    return std::nullopt;
  int hh = 0, mm = 0, ss = 0;
  if (!detail::parse_int(s.substr(11, 2), hh) || !detail::parse_int(s.substr(14, 2), mm) ||
      !detail::parse_int(s.substr(17, 2), ss))
    return std::nullopt;
  if (hh > 23 || mm > 59 || ss > 60) return std::nullopt;
  Timestamp t = std::chrono::sys_seconds{*date}.time_since_epoch().count() + hh * 3600 + mm * 60 + ss;
  auto rest = s.substr(19);
  if (rest.empty() || rest == "Z") return t;
  if (rest.size() != 6 || (rest[0] != '+' && rest[0] != '-') || rest[3] != ':') return std::nullopt;
  int oh = 0, om = 0;
  if (!detail::parse_int(rest.substr(1, 2), oh) || !detail::parse_int(rest.substr(4, 2), om))
    return std::nullopt;
  const Timestamp offset = oh * 3600 + om * 60;
  return rest[0] == '+' ? t - offset : t + offset;
}

enum class TimestampFormat { epoch_seconds, iso8601 };

inline std::optional<TimestampFormat> detect_timestamp_format(std::string_view s) {
  if (detail::all_digits(s)) return TimestampFormat::epoch_seconds;
  if (parse_iso8601(s)) return TimestampFormat::iso8601;
  return std::nullopt;
}

inline std::optional<Timestamp> parse_timestamp(std::string_view s, TimestampFormat fmt) {
  if (fmt == TimestampFormat::iso8601) return parse_iso8601(s);
  Timestamp t = 0;
  if (!detail::parse_int(s, t)) return std::nullopt;
  return t;
}

inline std::string format_iso8601(Timestamp t) {
  const auto secs = std::chrono::sys_seconds{std::chrono::seconds{t}};
  const auto day = std::chrono::floor<std::chrono::days>(secs);
  const std::chrono::hh_mm_ss hms{secs - day};
  char buf[32];
  std::snprintf(buf, sizeof buf, "%sT%02d:%02d:%02dZ", format_date(day).c_str(),
                static_cast<int>(hms.hours().count()), static_cast<int>(hms.minutes().count()),
                static_cast<int>(hms.seconds().count()));
  return buf;
}

// Civil-day windowing in a POSIX-rule time zone. Transitions are tabulated
// once at construction, so lookups are lock-free and the object can be
// shared across threads.
class TimeZone {
 public:
  static constexpr int kFirstYear = 1970;
  static constexpr int kLastYear = 2100;

  explicit TimeZone(const std::string& posix_rule) : rule_(posix_rule) {
    boost::local_time::posix_time_zone tz{posix_rule};
    base_offset_ = tz.base_utc_offset().total_seconds();
    dst_offset_ = tz.has_dst() ? tz.dst_offset().total_seconds() : 0;
    has_dst_ = tz.has_dst();
    if (!has_dst_) return;
    const boost::posix_time::ptime epoch{boost::gregorian::date{1970, 1, 1}};
    for (int y = kFirstYear; y <= kLastYear; ++y) {
      // Transition times are expressed in local time before the switch.
      const auto start_local = tz.dst_local_start_time(static_cast<unsigned short>(y));
      const auto end_local = tz.dst_local_end_time(static_cast<unsigned short>(y));
      const auto i = static_cast<std::size_t>(y - kFirstYear);
      dst_start_utc_[i] = (start_local - epoch).total_seconds() - base_offset_;
      dst_end_utc_[i] = (end_local - epoch).total_seconds() - base_offset_ - dst_offset_;
    }
  }

  // Accepts a handful of IANA names or a raw POSIX TZ rule.
  static TimeZone named(std::string_view name) {
    if (name == "UTC" || name == "Etc/UTC") return TimeZone{"UTC+00"};
    if (name == "Europe/Rome" || name == "Europe/Paris" || name == "Europe/Berlin" ||
        name == "Europe/Madrid" || name == "CET")
      return TimeZone{"CET+01CEST+01,M3.5.0/02:00,M10.5.0/03:00"};
    if (name == "Europe/London") return TimeZone{"GMT+00BST+01,M3.5.0/01:00,M10.5.0/02:00"};
    try {
      return TimeZone{std::string(name)};
    } catch (const std::exception&) {
      throw InvalidArgument("unknown time zone '" + std::string(name) + "'");
    }
  }

  const std::string& rule() const { return rule_; }

  // Offset (seconds east of UTC) in effect at the given UTC instant.
  std::int64_t utc_offset(Timestamp t) const {
    if (!has_dst_) return base_offset_;
    const int y = static_cast<int>(std::chrono::year_month_day{date_of_utc(t + base_offset_)}.year());
    if (y < kFirstYear || y > kLastYear) return base_offset_;
    const auto i = static_cast<std::size_t>(y - kFirstYear);
    const bool dst = dst_start_utc_[i] < dst_end_utc_[i]
                         ? (t >= dst_start_utc_[i] && t < dst_end_utc_[i])
                         : (t >= dst_start_utc_[i] || t < dst_end_utc_[i]);
    return dst ? base_offset_ + dst_offset_ : base_offset_;
  }

  Date local_date(Timestamp t) const { return date_of_utc(t + utc_offset(t)); }

  // UTC instant of a local wall-clock time. Wall times skipped or repeated by
  // a transition resolve using the standard-time offset.
  Timestamp to_utc(Date d, std::int64_t seconds_of_day) const {
    const Timestamp wall = std::chrono::sys_seconds{d}.time_since_epoch().count() + seconds_of_day;
    const Timestamp guess = wall - base_offset_ - dst_offset_;
    if (utc_offset(guess) == base_offset_ + dst_offset_ && has_dst_) return guess;
    return wall - base_offset_;
  }

 private:
  static constexpr std::size_t kYears = kLastYear - kFirstYear + 1;
  std::string rule_;
  std::int64_t base_offset_ = 0;
  std::int64_t dst_offset_ = 0;
  bool has_dst_ = false;
  std::array<std::int64_t, kYears> dst_start_utc_{};
  std::array<std::int64_t, kYears> dst_end_utc_{};
};

}  // namespace mobflow
