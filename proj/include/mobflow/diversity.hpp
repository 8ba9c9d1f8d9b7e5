#pragma once

#include <cmath>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "mobflow/error.hpp"
#include "mobflow/io.hpp"
#include "mobflow/od.hpp"
#include "mobflow/territory.hpp"
#include "mobflow/time.hpp"

namespace mobflow::diversity {

enum class Direction { in, out };

inline std::string_view to_string(Direction d) { return d == Direction::in ? "in" : "out"; }

inline Direction parse_direction(std::string_view s) {
  if (s == "in") return Direction::in;
  if (s == "out") return Direction::out;
  throw InvalidArgument("unknown direction '" + std::string(s) + "'");
}

struct DiversityOptions {
  // Count the province's self-loop as one of its partners.
  bool include_self_flow = false;
};

// Normalized Shannon entropy of a province's in- or out-flows over partner
// provinces: -sum p ln p / ln N. Absent when the province has no flow in
// that direction. `province_count` is N.
inline std::optional<double> flow_diversity(const od::DailyOD& od, std::string_view province, Direction direction,
                                            std::size_t province_count, DiversityOptions options = {}) {
  if (province_count < 2) throw InvalidArgument("flow diversity needs at least 2 provinces (N >= 2)");
  if (od.granularity() != od::Granularity::province)
    throw InvalidArgument("flow diversity needs a province-granularity matrix");
  std::vector<double> flows;
  double total = 0.0;
  for (const auto& [key, n] : od.cells()) {
    const auto& self = direction == Direction::in ? key.second : key.first;
    const auto& partner = direction == Direction::in ? key.first : key.second;
    if (self != province) continue;
    if (partner == province && !options.include_self_flow) continue;
    flows.push_back(static_cast<double>(n));
    total += static_cast<double>(n);
  }
  if (total <= 0.0) return std::nullopt;
  double h = 0.0;
  for (double f : flows) {
    const double p = f / total;
    h -= p * std::log(p);
  }
  // A single partner gives exactly zero; avoid returning -0.
  return flows.size() == 1 ? 0.0 : h / std::log(static_cast<double>(province_count));
}

inline std::optional<double> flow_diversity(const od::DailyOD& od, std::string_view province, Direction direction,
                                            const TerritoryIndex& index, DiversityOptions options = {}) {
  return flow_diversity(od, province, direction, index.province_count(), options);
}

struct DiversitySeries {
  TerritoryId province;
  Direction direction = Direction::in;
  std::vector<Date> dates;
  std::vector<std::optional<double>> values;  // nullopt: no flow that day
};

inline DiversitySeries diversity_series(std::span<const od::DailyOD> ods, const TerritoryId& province,
                                        Direction direction, std::size_t province_count,
                                        DiversityOptions options = {}) {
  DiversitySeries s{province, direction, {}, {}};
  for (const auto& od : ods) {
    s.dates.push_back(od.date());
    s.values.push_back(flow_diversity(od, province, direction, province_count, options));
  }
  return s;
}

struct MeanCell {
  std::optional<double> mean;
  std::size_t defined = 0;
  std::size_t absent = 0;
};

struct WeekendContrast {
  MeanCell pre_weekday;
  MeanCell pre_weekend;
  MeanCell post_weekday;
  MeanCell post_weekend;
};

// Means of the defined values before `split_date` (exclusive) and from it
// onward, split into weekdays and Saturday/Sunday.
inline WeekendContrast weekend_contrast(const DiversitySeries& s, Date split_date) {
  struct Acc {
    double sum = 0.0;
    MeanCell cell;
  };
  Acc acc[2][2];  // [post][weekend]
  for (std::size_t i = 0; i < s.dates.size(); ++i) {
    auto& a = acc[s.dates[i] >= split_date][is_weekend(s.dates[i])];
    if (s.values[i]) {
      a.sum += *s.values[i];
      ++a.cell.defined;
    } else {
      ++a.cell.absent;
    }
  }
  auto finish = [](Acc& a) {
    if (a.cell.defined > 0) a.cell.mean = a.sum / static_cast<double>(a.cell.defined);
    return a.cell;
  };
  return {finish(acc[0][0]), finish(acc[0][1]), finish(acc[1][0]), finish(acc[1][1])};
}

// Long format: date,province,direction,diversity (empty field when absent).
inline std::string to_csv(std::span<const DiversitySeries> series) {
  std::string out = "date,province,direction,diversity\n";
  for (const auto& s : series)
    for (std::size_t i = 0; i < s.dates.size(); ++i)
      out += format_date(s.dates[i]) + "," + s.province + "," + std::string(to_string(s.direction)) + "," +
             (s.values[i] ? io::format_real(*s.values[i]) : "") + "\n";
  return out;
}

// Wide format for horizon charts: one row per province, one column per
// date. All series must share the same dates.
inline std::string to_wide_csv(std::span<const DiversitySeries> series) {
  std::string out = "province";
  if (series.empty()) return out + "\n";
  for (const auto& d : series.front().dates) out += "," + format_date(d);
  out += "\n";
  for (const auto& s : series) {
    if (s.dates != series.front().dates) throw InvalidArgument("wide diversity export needs aligned dates");
    out += s.province;
    for (const auto& v : s.values) out += "," + (v ? io::format_real(*v) : std::string{});
    out += "\n";
  }
  return out;
}

}  // namespace mobflow::diversity
