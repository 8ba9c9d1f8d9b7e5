#pragma once

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <map>
#include <numeric>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "mobflow/error.hpp"
#include "mobflow/io.hpp"
#include "mobflow/territory.hpp"
#include "mobflow/time.hpp"

namespace mobflow::ingest {

namespace fs = std::filesystem;

// One phone call: caller, callee, start time, caller antennas at start and
// end of the call, duration (minutes by default).
struct CdrRecord {
  std::string caller_id;
  std::string callee_id;
  Timestamp timestamp = 0;
  std::string antenna_start;
  std::string antenna_end;
  std::int64_t duration = 0;
};

// One data session.
struct XdrRecord {
  std::string user_id;
  Timestamp timestamp = 0;
  std::string antenna;
  std::int64_t kilobytes = 0;
};

// Unified spatio-temporal observation. `user` indexes EventStream::users,
// `municipality`/`province` index the registry's TerritoryIndex.
struct RecordEvent {
  std::uint32_t user = 0;
  Timestamp timestamp = 0;
  std::uint32_t municipality = 0;
  std::uint32_t province = 0;

  friend bool operator==(const RecordEvent&, const RecordEvent&) = default;
};

struct Trip {
  std::uint32_t user = 0;
  std::uint32_t origin = 0;
  std::uint32_t destination = 0;
  Timestamp departure_event_time = 0;
  Timestamp arrival_event_time = 0;

  friend bool operator==(const Trip&, const Trip&) = default;
};

inline constexpr std::int64_t kDefaultDwellSeconds = 3600;

struct FileTally {
  std::string file;
  std::size_t accepted = 0;
  std::size_t malformed = 0;
  std::size_t unknown_antenna = 0;

  std::size_t rejected() const { return malformed + unknown_antenna; }
};

struct RejectionReport {
  std::vector<FileTally> files;

  std::size_t total_rejected() const {
    std::size_t n = 0;
    for (const auto& f : files) n += f.rejected();
    return n;
  }
  std::size_t total_accepted() const {
    std::size_t n = 0;
    for (const auto& f : files) n += f.accepted;
    return n;
  }
};

// Events grouped by user (users in lexicographic id order), each user's
// events sorted by timestamp with ties kept in input order.
class EventStream {
 public:
  EventStream() : offsets_{0} {}
  EventStream(std::vector<std::string> users, std::vector<RecordEvent> events, std::vector<std::size_t> offsets)
      : users_(std::move(users)), events_(std::move(events)), offsets_(std::move(offsets)) {}

  std::size_t user_count() const { return users_.size(); }
  const std::string& user_id(std::uint32_t u) const { return users_.at(u); }
  const std::vector<std::string>& users() const { return users_; }

  std::span<const RecordEvent> events() const { return events_; }
  std::span<const RecordEvent> events_of(std::uint32_t u) const {
    return std::span<const RecordEvent>(events_).subspan(offsets_.at(u), offsets_.at(u + 1) - offsets_.at(u));
  }
  std::size_t size() const { return events_.size(); }

 private:
  std::vector<std::string> users_;
  std::vector<RecordEvent> events_;
  std::vector<std::size_t> offsets_;
};

struct ParseOptions {
  // Seconds per unit of CDR duration.
  std::int64_t duration_unit_seconds = 60;
};

// Accumulates CDR/XDR records in input order and converts them into an
// EventStream. Records referencing an antenna missing from the registry are
// rejected.
class EventCollector {
 public:
  explicit EventCollector(const AntennaRegistry& registry, ParseOptions options = {})
      : registry_(&registry), options_(options) {}

  bool add(const CdrRecord& r) {
    const auto* a = registry_->find(r.antenna_start);
    const auto* b = registry_->find(r.antenna_end);
    if (!a || !b || r.duration < 0) return false;
    const auto u = intern_user(r.caller_id);
    raw_.push_back({u, r.timestamp, a->municipality, a->province});
    raw_.push_back({u, r.timestamp + r.duration * options_.duration_unit_seconds, b->municipality, b->province});
    return true;
  }

  bool add(const XdrRecord& r) {
    const auto* a = registry_->find(r.antenna);
    if (!a || r.kilobytes < 0) return false;
    raw_.push_back({intern_user(r.user_id), r.timestamp, a->municipality, a->province});
    return true;
  }

  FileTally read_cdr_file(const fs::path& path) {
    FileTally tally{path.string()};
    std::optional<TimestampFormat> fmt;
    io::read_delimited(path, {"caller_id", "callee_id", "timestamp", "antenna_start", "antenna_end", "duration_min"},
                       [&](std::size_t, const auto& f) {
                         CdrRecord r;
                         if (f.size() != 6 || f[0].empty() || !read_timestamp(f[2], fmt, r.timestamp) ||
                             !detail::parse_int(f[5], r.duration) || r.duration < 0) {
                           ++tally.malformed;
                           return;
                         }
                         r.caller_id = f[0];
                         r.callee_id = f[1];
                         r.antenna_start = f[3];
                         r.antenna_end = f[4];
                         if (add(r))
                           ++tally.accepted;
                         else
                           ++tally.unknown_antenna;
                       });
    return tally;
  }

  FileTally read_xdr_file(const fs::path& path) {
    FileTally tally{path.string()};
    std::optional<TimestampFormat> fmt;
    io::read_delimited(path, {"user_id", "timestamp", "antenna", "kilobytes"}, [&](std::size_t, const auto& f) {
      XdrRecord r;
      if (f.size() != 4 || f[0].empty() || !read_timestamp(f[1], fmt, r.timestamp) ||
          !detail::parse_int(f[3], r.kilobytes) || r.kilobytes < 0) {
        ++tally.malformed;
        return;
      }
      r.user_id = f[0];
      r.antenna = f[2];
      if (add(r))
        ++tally.accepted;
      else
        ++tally.unknown_antenna;
    });
    return tally;
  }

  EventStream finish() && {
    // Renumber users in id order so the output does not depend on which
    // file a user appeared in first.
    std::vector<std::uint32_t> order(users_.size());
    std::iota(order.begin(), order.end(), 0u);
    std::sort(order.begin(), order.end(), [&](auto a, auto b) { return users_[a] < users_[b]; });
    std::vector<std::uint32_t> rank(users_.size());
    std::vector<std::string> users(users_.size());
    for (std::uint32_t i = 0; i < order.size(); ++i) {
      rank[order[i]] = i;
      users[i] = std::move(users_[order[i]]);
    }
    for (auto& e : raw_) e.user = rank[e.user];
    std::stable_sort(raw_.begin(), raw_.end(), [](const RecordEvent& a, const RecordEvent& b) {
      return a.user != b.user ? a.user < b.user : a.timestamp < b.timestamp;
    });
    std::vector<std::size_t> offsets(users.size() + 1, 0);
    for (const auto& e : raw_) ++offsets[e.user + 1];
    std::partial_sum(offsets.begin(), offsets.end(), offsets.begin());
    return EventStream(std::move(users), std::move(raw_), std::move(offsets));
  }

 private:
  static bool read_timestamp(std::string_view field, std::optional<TimestampFormat>& fmt, Timestamp& out) {
    // The first parseable value fixes the column's format.
    if (!fmt) {
      fmt = detect_timestamp_format(field);
      if (!fmt) return false;
    }
    const auto t = parse_timestamp(field, *fmt);
    if (!t) return false;
    out = *t;
    return true;
  }

  std::uint32_t intern_user(const std::string& id) {
    auto [it, inserted] = user_lookup_.try_emplace(id, static_cast<std::uint32_t>(users_.size()));
    if (inserted) users_.push_back(id);
    return it->second;
  }

  const AntennaRegistry* registry_;
  ParseOptions options_;
  std::vector<std::string> users_;
  std::map<std::string, std::uint32_t, std::less<>> user_lookup_;
  std::vector<RecordEvent> raw_;
};

struct ParseResult {
  EventStream stream;
  RejectionReport report;
};

// CDR files are read before XDR files, each list in the given order; that
// order is the tie-break for equal timestamps.
inline ParseResult parse_records(std::span<const fs::path> cdr_files, std::span<const fs::path> xdr_files,
                                 const AntennaRegistry& registry, ParseOptions options = {}) {
  EventCollector collector(registry, options);
  ParseResult result;
  for (const auto& f : cdr_files) result.report.files.push_back(collector.read_cdr_file(f));
  for (const auto& f : xdr_files) result.report.files.push_back(collector.read_xdr_file(f));
  result.stream = std::move(collector).finish();
  return result;
}

// Streaming trip extraction over events grouped by user and sorted by time.
// A change of municipality between consecutive events of a user (A at t1,
// B at t2) is a candidate A->B; it becomes a trip when the user's next
// event outside B is at least `dwell_threshold` seconds after t2, or when
// no such event exists. `sink` receives each Trip in arrival order.
template <typename Sink>
void extract_trips(std::span<const RecordEvent> events, std::int64_t dwell_threshold, Sink&& sink) {
  std::optional<Trip> pending;
  for (std::size_t i = 0; i < events.size(); ++i) {
    const auto& e = events[i];
    const bool same_user = i > 0 && events[i - 1].user == e.user;
    if (!same_user) {
      if (pending) sink(*pending);
      pending.reset();
      continue;
    }
    const auto& prev = events[i - 1];
    if (prev.municipality == e.municipality) continue;
    if (pending && e.timestamp - pending->arrival_event_time >= dwell_threshold) sink(*pending);
    pending = Trip{e.user, prev.municipality, e.municipality, prev.timestamp, e.timestamp};
  }
  if (pending) sink(*pending);
}

inline std::vector<Trip> extract_trips(std::span<const RecordEvent> events,
                                       std::int64_t dwell_threshold = kDefaultDwellSeconds) {
  std::vector<Trip> out;
  extract_trips(events, dwell_threshold, [&](const Trip& t) { out.push_back(t); });
  return out;
}

// Cuts each user's sequence at local-day boundaries and extracts trips
// within each day. Trips are keyed by the day of their events.
inline std::map<Date, std::vector<Trip>> extract_daily_trips(const EventStream& stream, const TimeZone& tz,
                                                             std::int64_t dwell_threshold = kDefaultDwellSeconds) {
  std::map<Date, std::vector<Trip>> out;
  for (std::uint32_t u = 0; u < stream.user_count(); ++u) {
    const auto ev = stream.events_of(u);
    std::size_t start = 0;
    while (start < ev.size()) {
      const Date day = tz.local_date(ev[start].timestamp);
      std::size_t end = start + 1;
      while (end < ev.size() && tz.local_date(ev[end].timestamp) == day) ++end;
      auto& bucket = out[day];
      extract_trips(ev.subspan(start, end - start), dwell_threshold, [&](const Trip& t) { bucket.push_back(t); });
      start = end;
    }
  }
  return out;
}

}  // namespace mobflow::ingest
