#pragma once

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <random>
#include <set>
#include <string>
#include <unistd.h>
#include <vector>

#include <nlohmann/json.hpp>

#include "mobflow/cluster.hpp"
#include "mobflow/community.hpp"
#include "mobflow/diversity.hpp"
#include "mobflow/error.hpp"
#include "mobflow/flows.hpp"
#include "mobflow/ingest.hpp"
#include "mobflow/io.hpp"
#include "mobflow/od.hpp"
#include "mobflow/territory.hpp"
#include "mobflow/time.hpp"

namespace mobflow::pipeline {

namespace fs = std::filesystem;

struct DateRange {
  std::optional<Date> from;
  std::optional<Date> to;

  bool contains(Date d) const { return (!from || d >= *from) && (!to || d <= *to); }
};

// Collects a command's outputs in a hidden directory under `final_root` and
// moves them into place only on commit(); otherwise they are discarded.
class Staging {
 public:
  explicit Staging(fs::path final_root)
      : final_(std::move(final_root)), root_(final_ / (".staging-" + std::to_string(::getpid()))) {
    fs::remove_all(root_);
    fs::create_directories(root_);
  }
  Staging(const Staging&) = delete;
  Staging& operator=(const Staging&) = delete;
  ~Staging() {
    std::error_code ec;
    fs::remove_all(root_, ec);
  }

  const fs::path& root() const { return root_; }

  void commit() {
    std::vector<fs::path> files;
    for (const auto& e : fs::recursive_directory_iterator(root_))
      if (e.is_regular_file()) files.push_back(e.path());
    std::sort(files.begin(), files.end());
    for (const auto& f : files) {
      const auto target = final_ / fs::relative(f, root_);
      fs::create_directories(target.parent_path());
      fs::rename(f, target);
    }
    fs::remove_all(root_);
  }

 private:
  fs::path final_;
  fs::path root_;
};

inline std::vector<fs::path> list_csv(const fs::path& dir) {
  std::vector<fs::path> out;
  if (!fs::exists(dir)) return out;
  for (const auto& e : fs::directory_iterator(dir))
    if (e.is_regular_file() && e.path().extension() == ".csv") out.push_back(e.path());
  std::sort(out.begin(), out.end());
  return out;
}

struct BuildOdResult {
  std::vector<Date> dates;
  ingest::RejectionReport report;
  std::size_t trips = 0;
};

// <data>/registry.csv + <data>/cdr/*.csv + <data>/xdr/*.csv -> municipality
// matrices under <out_root>/od/municipality plus <out_root>/od/territory.csv.
inline BuildOdResult build_od(const fs::path& data_dir, const fs::path& out_root, const TimeZone& tz,
                              std::int64_t dwell_threshold, const DateRange& range = {}) {
  const auto registry = AntennaRegistry::load_csv(data_dir / "registry.csv");
  const auto cdr = list_csv(data_dir / "cdr");
  const auto xdr = list_csv(data_dir / "xdr");
  if (cdr.empty() && xdr.empty()) throw NotFoundError("no cdr/ or xdr/ record files under " + data_dir.string());
  auto parsed = ingest::parse_records(cdr, xdr, registry);
  const auto daily = ingest::extract_daily_trips(parsed.stream, tz, dwell_threshold);
  od::OdStore store(out_root);
  const auto checksum = registry.territory().checksum();
  store.store_territory(registry.territory());
  BuildOdResult result;
  result.report = std::move(parsed.report);
  for (const auto& [date, trips] : daily) {
    if (!range.contains(date)) continue;
    store.store(od::build_daily_od(trips, date, registry.territory()), checksum);
    result.dates.push_back(date);
    result.trips += trips.size();
  }
  return result;
}

inline std::vector<od::DailyOD> load_range(const od::OdStore& store, od::Granularity g, const DateRange& range) {
  std::vector<od::DailyOD> out;
  for (auto d : store.dates(g))
    if (range.contains(d)) out.push_back(store.load(d, g));
  return out;
}

inline std::vector<Date> aggregate(const fs::path& in_root, const fs::path& out_root, const DateRange& range = {}) {
  const od::OdStore in(in_root);
  od::OdStore out(out_root);
  const auto territory = in.load_territory();
  const auto checksum = territory.checksum();
  if (in.territory_checksum(od::Granularity::municipality) != checksum)
    throw DataIntegrityError("stored territory does not match the municipality manifest checksum");
  if (in_root != out_root) out.store_territory(territory);
  std::vector<Date> dates;
  for (const auto& od : load_range(in, od::Granularity::municipality, range)) {
    out.store(od::aggregate_to_province(od, territory), checksum);
    dates.push_back(od.date());
  }
  return dates;
}

inline void write_flow_tables(const std::vector<od::DailyOD>& province_ods, const TerritoryIndex& territory,
                              const fs::path& out_dir) {
  for (const auto& p : territory.sorted_provinces())
    io::write_file_atomic(out_dir / "flows" / (p + ".csv"), flows::to_csv(flows::compute_flows(province_ods, p, territory)));
}

struct DiversityTables {
  std::vector<diversity::DiversitySeries> in;
  std::vector<diversity::DiversitySeries> out;
};

inline DiversityTables compute_diversity(const std::vector<od::DailyOD>& province_ods, const TerritoryIndex& territory,
                                         diversity::DiversityOptions options = {}) {
  DiversityTables t;
  for (const auto& p : territory.sorted_provinces()) {
    t.in.push_back(diversity::diversity_series(province_ods, p, diversity::Direction::in, territory.province_count(), options));
    t.out.push_back(diversity::diversity_series(province_ods, p, diversity::Direction::out, territory.province_count(), options));
  }
  return t;
}

inline void write_diversity_tables(const DiversityTables& t, const fs::path& out_dir) {
  std::vector<diversity::DiversitySeries> all = t.in;
  all.insert(all.end(), t.out.begin(), t.out.end());
  io::write_file_atomic(out_dir / "diversity.csv", diversity::to_csv(all));
  io::write_file_atomic(out_dir / "diversity_in_wide.csv", diversity::to_wide_csv(t.in));
  io::write_file_atomic(out_dir / "diversity_out_wide.csv", diversity::to_wide_csv(t.out));
}

inline cluster::Selection write_cluster_tables(const std::vector<diversity::DiversitySeries>& series,
                                               std::string_view direction, std::size_t k_min, std::size_t k_max,
                                               std::uint64_t seed, const fs::path& out_dir) {
  const auto imputed = cluster::build_series_matrix(series);
  if (imputed.matrix.rows() == 0) throw DataIntegrityError("no province has enough defined diversity values to cluster");
  const auto sel = cluster::select_k(imputed.matrix, k_min, k_max, seed);
  const std::string base = "cluster_" + std::string(direction);
  io::write_file_atomic(out_dir / (base + ".json"), cluster::to_json(imputed.matrix, sel, imputed.dropped).dump(2) + "\n");
  io::write_file_atomic(out_dir / (base + "_members.csv"), cluster::members_csv(imputed.matrix, sel.best));
  return sel;
}

inline std::vector<community::CommunityDay> write_community_tables(
    const std::vector<od::DailyOD>& municipality_ods, const TerritoryIndex& territory, std::uint64_t seed,
    community::SeriesOptions options, const fs::path& out_dir, const std::set<std::string>& province_filter = {}) {
  const auto days = community::community_count_series(municipality_ods, seed, options, territory.municipalities());
  io::write_file_atomic(out_dir / "communities.csv", community::counts_csv(days));
  for (const auto& d : days) {
    io::write_file_atomic(out_dir / "partitions" / (format_date(d.date) + ".json"),
                          community::partition_json(d).dump(2) + "\n");
    if (!province_filter.empty())
      io::write_file_atomic(out_dir / "partitions_filtered" / (format_date(d.date) + ".json"),
                            community::partition_json(d, &territory, &province_filter).dump(2) + "\n");
  }
  return days;
}

// Headline numbers of a run, split at `split`.
struct Summary {
  double flow_drop_pct = 0.0;
  std::optional<double> weekend_diversity_delta_pre;
  std::optional<double> weekend_diversity_delta_post;
  std::size_t k_star = 0;
  double community_count_pre_median = 0.0;
  double community_count_post_median = 0.0;

  nlohmann::json to_json() const {
    auto opt = [](const std::optional<double>& v) { return v ? nlohmann::json(*v) : nlohmann::json(nullptr); };
    return {{"flow_drop_pct", flow_drop_pct},
            {"weekend_diversity_delta_pre", opt(weekend_diversity_delta_pre)},
            {"weekend_diversity_delta_post", opt(weekend_diversity_delta_post)},
            {"k_star", k_star},
            {"community_count_pre_median", community_count_pre_median},
            {"community_count_post_median", community_count_post_median}};
  }
};

inline double median(std::vector<double> v) {
  if (v.empty()) return 0.0;
  std::sort(v.begin(), v.end());
  const auto n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

// 100 * (1 - mean post-split / mean pre-split daily inter-province trips).
inline double flow_drop_pct(const std::vector<od::DailyOD>& province_ods, Date split) {
  double pre = 0, post = 0;
  std::size_t npre = 0, npost = 0;
  for (const auto& od : province_ods) {
    const auto v = static_cast<double>(flows::inter_province_total(od));
    if (od.date() < split) {
      pre += v;
      ++npre;
    } else {
      post += v;
      ++npost;
    }
  }
  if (npre == 0 || npost == 0 || pre == 0.0) return 0.0;
  return 100.0 * (1.0 - (post / static_cast<double>(npost)) / (pre / static_cast<double>(npre)));
}

// Pooled means over every province and direction of defined diversity
// values, by period and weekday/weekend.
inline diversity::WeekendContrast pooled_contrast(const DiversityTables& t, Date split) {
  diversity::DiversitySeries pooled;
  for (const auto* group : {&t.in, &t.out})
    for (const auto& s : *group) {
      pooled.dates.insert(pooled.dates.end(), s.dates.begin(), s.dates.end());
      pooled.values.insert(pooled.values.end(), s.values.begin(), s.values.end());
    }
  return diversity::weekend_contrast(pooled, split);
}

inline std::optional<double> weekend_delta(const diversity::MeanCell& weekend, const diversity::MeanCell& weekday) {
  if (!weekend.mean || !weekday.mean) return std::nullopt;
  return *weekend.mean - *weekday.mean;
}

inline std::pair<double, double> community_medians(const std::vector<community::CommunityDay>& days, Date split) {
  std::vector<double> pre, post;
  for (const auto& d : days) (d.date < split ? pre : post).push_back(static_cast<double>(d.partition.module_count));
  return {median(pre), median(post)};
}

struct ReportOptions {
  fs::path data_dir;
  fs::path out_dir;
  std::uint64_t seed = 0;
  std::optional<Date> split;  // defaults to ground_truth.json's lockdown date
  DateRange range;
  std::string time_zone = "Europe/Rome";
  std::int64_t dwell_threshold = ingest::kDefaultDwellSeconds;
  std::size_t k_min = 2;
  std::size_t k_max = 20;
  community::SeriesOptions communities;
  diversity::DiversityOptions diversity;
};

// Runs every stage from raw records and writes all tables plus
// summary.json under `out_root` (typically a staging directory).
inline Summary run_report(const ReportOptions& o, const fs::path& out_root) {
  const auto tz = TimeZone::named(o.time_zone);
  build_od(o.data_dir, out_root, tz, o.dwell_threshold, o.range);
  aggregate(out_root, out_root, o.range);
  const od::OdStore store(out_root);
  const auto territory = store.load_territory();
  const auto muni = load_range(store, od::Granularity::municipality, o.range);
  const auto prov = load_range(store, od::Granularity::province, o.range);
  if (prov.empty()) throw DataIntegrityError("no days in the requested range");

  Date split = prov[prov.size() / 2].date();
  if (o.split) {
    split = *o.split;
  } else if (fs::exists(o.data_dir / "ground_truth.json")) {
    const auto gt = nlohmann::json::parse(io::read_file(o.data_dir / "ground_truth.json"));
    if (gt.contains("lockdown_date") && gt["lockdown_date"].is_string())
      split = parse_date(gt["lockdown_date"].get<std::string>());
  }

  const auto tables = out_root / "tables";
  write_flow_tables(prov, territory, tables);
  const auto div = compute_diversity(prov, territory, o.diversity);
  write_diversity_tables(div, tables);
  const auto sel_in = write_cluster_tables(div.in, "in", o.k_min, o.k_max, o.seed, tables);
  write_cluster_tables(div.out, "out", o.k_min, o.k_max, o.seed, tables);
  const auto days = write_community_tables(muni, territory, o.seed, o.communities, tables);

  Summary s;
  s.flow_drop_pct = flow_drop_pct(prov, split);
  const auto c = pooled_contrast(div, split);
  s.weekend_diversity_delta_pre = weekend_delta(c.pre_weekend, c.pre_weekday);
  s.weekend_diversity_delta_post = weekend_delta(c.post_weekend, c.post_weekday);
  s.k_star = sel_in.k_star;
  std::tie(s.community_count_pre_median, s.community_count_post_median) = community_medians(days, split);
  auto j = s.to_json();
  j["split_date"] = format_date(split);
  io::write_file_atomic(out_root / "summary.json", j.dump(2) + "\n");
  return s;
}

}  // namespace mobflow::pipeline
