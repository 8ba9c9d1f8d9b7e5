#pragma once

#include <algorithm>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "mobflow/error.hpp"
#include "mobflow/io.hpp"
#include "mobflow/od.hpp"
#include "mobflow/territory.hpp"
#include "mobflow/time.hpp"

namespace mobflow::flows {

struct FlowSeries {
  TerritoryId province;
  std::vector<Date> dates;
  std::vector<std::uint64_t> in_flow;
  std::vector<std::uint64_t> out_flow;
  std::vector<std::uint64_t> self_flow;
  std::vector<double> in_norm;
  std::vector<double> out_norm;
  std::vector<double> self_norm;
};

// Divides by the series maximum; an all-zero series normalizes to zeros.
inline std::vector<double> normalize_by_max(std::span<const std::uint64_t> raw) {
  std::vector<double> out(raw.size(), 0.0);
  const auto mx = raw.empty() ? 0 : *std::max_element(raw.begin(), raw.end());
  if (mx == 0) return out;
  for (std::size_t i = 0; i < raw.size(); ++i) out[i] = static_cast<double>(raw[i]) / static_cast<double>(mx);
  return out;
}

// Per day: out = sum_{Q != P} OD[P,Q], in = sum_{Q != P} OD[Q,P],
// self = OD[P,P]. Normalization uses the maximum over the given days.
inline FlowSeries compute_flows(std::span<const od::DailyOD> ods, const TerritoryId& province,
                                const TerritoryIndex& index) {
  if (!index.has_province(province)) throw InvalidArgument("unknown province '" + province + "'");
  FlowSeries s;
  s.province = province;
  for (const auto& od : ods) {
    if (od.granularity() != od::Granularity::province)
      throw InvalidArgument("compute_flows needs province-granularity matrices");
    if (std::find(s.dates.begin(), s.dates.end(), od.date()) != s.dates.end())
      throw InvalidArgument("duplicate date " + format_date(od.date()) + " in flow input");
    std::uint64_t in = 0, out = 0, self = 0;
    for (const auto& [key, n] : od.cells()) {
      const bool from = key.first == province, to = key.second == province;
      if (from && to)
        self += n;
      else if (from)
        out += n;
      else if (to)
        in += n;
    }
    s.dates.push_back(od.date());
    s.in_flow.push_back(in);
    s.out_flow.push_back(out);
    s.self_flow.push_back(self);
  }
  s.in_norm = normalize_by_max(s.in_flow);
  s.out_norm = normalize_by_max(s.out_flow);
  s.self_norm = normalize_by_max(s.self_flow);
  return s;
}

inline std::string to_csv(const FlowSeries& s) {
  std::string out = "date,in,out,self,in_norm,out_norm,self_norm\n";
  for (std::size_t i = 0; i < s.dates.size(); ++i) {
    out += format_date(s.dates[i]) + "," + std::to_string(s.in_flow[i]) + "," + std::to_string(s.out_flow[i]) + "," +
           std::to_string(s.self_flow[i]) + "," + io::format_real(s.in_norm[i]) + "," +
           io::format_real(s.out_norm[i]) + "," + io::format_real(s.self_norm[i]) + "\n";
  }
  return out;
}

// Sum of inter-province trips (self-loops excluded) for one day.
inline std::uint64_t inter_province_total(const od::DailyOD& od) {
  std::uint64_t n = 0;
  for (const auto& [key, c] : od.cells())
    if (key.first != key.second) n += c;
  return n;
}

}  // namespace mobflow::flows
