#pragma once

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <map>
#include <mutex>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "mobflow/error.hpp"
#include "mobflow/ingest.hpp"
#include "mobflow/io.hpp"
#include "mobflow/territory.hpp"
#include "mobflow/time.hpp"

namespace mobflow::od {

namespace fs = std::filesystem;

enum class Granularity { municipality, province };

inline std::string_view to_string(Granularity g) {
  return g == Granularity::municipality ? "municipality" : "province";
}

inline Granularity parse_granularity(std::string_view s) {
  if (s == "municipality") return Granularity::municipality;
  if (s == "province") return Granularity::province;
  throw InvalidArgument("unknown granularity '" + std::string(s) + "'");
}

using CellKey = std::pair<TerritoryId, TerritoryId>;
using CellMap = std::map<CellKey, std::uint64_t>;

// Sparse daily origin-destination matrix. Stored counts are >= 1; a
// municipality matrix never holds a self-loop, a province matrix may
// (internal mobility).
class DailyOD {
 public:
  DailyOD() = default;
  DailyOD(Date date, Granularity granularity) : date_(date), granularity_(granularity) {}

  void add(std::string_view origin, std::string_view destination, std::uint64_t count = 1) {
    if (count == 0) return;
    if (granularity_ == Granularity::municipality && origin == destination)
      throw DataIntegrityError("self-loop '" + std::string(origin) + "' in a municipality matrix");
    cells_[CellKey{origin, destination}] += count;
    total_ += count;
  }

  std::uint64_t at(std::string_view origin, std::string_view destination) const {
    auto it = cells_.find(CellKey{origin, destination});
    return it == cells_.end() ? 0 : it->second;
  }

  Date date() const { return date_; }
  Granularity granularity() const { return granularity_; }
  const CellMap& cells() const { return cells_; }
  std::uint64_t total() const { return total_; }
  bool empty() const { return cells_.empty(); }

  friend bool operator==(const DailyOD& a, const DailyOD& b) {
    return a.date_ == b.date_ && a.granularity_ == b.granularity_ && a.cells_ == b.cells_;
  }

 private:
  Date date_{};
  Granularity granularity_ = Granularity::municipality;
  CellMap cells_;
  std::uint64_t total_ = 0;
};

// Counts trips per (origin, destination) municipality pair. Trip ids are
// resolved through `territory`.
inline DailyOD build_daily_od(std::span<const ingest::Trip> trips, Date date, const TerritoryIndex& territory) {
  std::map<std::pair<std::uint32_t, std::uint32_t>, std::uint64_t> counts;
  for (const auto& t : trips) ++counts[{t.origin, t.destination}];
  DailyOD od(date, Granularity::municipality);
  for (const auto& [key, n] : counts)
    od.add(territory.municipality_name(key.first), territory.municipality_name(key.second), n);
  return od;
}

// Maps both endpoints of every cell through `index` (municipality ->
// province) and sums. Intra-province cells become self-loops. Total mass is
// conserved exactly.
inline DailyOD aggregate_to_province(const DailyOD& od, const TerritoryIndex& index) {
  DailyOD out(od.date(), Granularity::province);
  for (const auto& [key, n] : od.cells()) out.add(index.province_of(key.first), index.province_of(key.second), n);
  return out;
}

inline std::string to_csv(const DailyOD& od) {
  std::string out = "origin,destination,count\n";
  for (const auto& [key, n] : od.cells()) out += key.first + "," + key.second + "," + std::to_string(n) + "\n";
  return out;
}

inline DailyOD from_csv(const fs::path& path, Date date, Granularity g) {
  DailyOD od(date, g);
  io::read_delimited(path, {"origin", "destination", "count"}, [&](std::size_t line, const auto& f) {
    std::uint64_t n = 0;
    if (f.size() != 3 || f[0].empty() || f[1].empty() || !detail::parse_int(f[2], n) || n == 0)
      throw ParseError(path.string() + ":" + std::to_string(line) + ": malformed OD row");
    od.add(f[0], f[1], n);
  });
  return od;
}

// Flat-file OD storage:
//   <root>/od/<granularity>/<YYYY-MM-DD>.csv   origin,destination,count
//   <root>/od/<granularity>/manifest.json      schema_version, granularity,
//                                              dates, territory_checksum
//   <root>/od/territory.csv                    municipality_id,province_id
// Every file is replaced atomically.
class OdStore {
 public:
  static constexpr int kSchemaVersion = 1;

  explicit OdStore(fs::path root) : root_(std::move(root)) {}

  const fs::path& root() const { return root_; }

  fs::path directory(Granularity g) const { return root_ / "od" / std::string(to_string(g)); }
  fs::path file_path(Date d, Granularity g) const { return directory(g) / (format_date(d) + ".csv"); }
  fs::path manifest_path(Granularity g) const { return directory(g) / "manifest.json"; }

  fs::path store(const DailyOD& od, const std::string& territory_checksum = {}) {
    std::lock_guard lock(mutex_);
    auto manifest = read_manifest_or_new(od.granularity());
    auto& stored = manifest["territory_checksum"];
    if (!territory_checksum.empty()) {
      if (!stored.get<std::string>().empty() && stored.get<std::string>() != territory_checksum)
        throw DataIntegrityError("territory checksum mismatch in " + manifest_path(od.granularity()).string());
      stored = territory_checksum;
    }
    const auto path = file_path(od.date(), od.granularity());
    io::write_file_atomic(path, to_csv(od));
    auto dates = manifest["dates"].get<std::vector<std::string>>();
    const auto ds = format_date(od.date());
    if (auto it = std::lower_bound(dates.begin(), dates.end(), ds); it == dates.end() || *it != ds)
      dates.insert(it, ds);
    manifest["dates"] = dates;
    io::write_file_atomic(manifest_path(od.granularity()), manifest.dump(2) + "\n");
    return path;
  }

  DailyOD load(Date date, Granularity g) const {
    const auto manifest = read_manifest(g);
    const auto dates = manifest["dates"].get<std::vector<std::string>>();
    const auto ds = format_date(date);
    const auto path = file_path(date, g);
    if (!std::binary_search(dates.begin(), dates.end(), ds) || !fs::exists(path))
      throw NotFoundError("no " + std::string(to_string(g)) + " OD matrix stored for " + ds);
    return from_csv(path, date, g);
  }

  std::vector<Date> dates(Granularity g) const {
    if (!fs::exists(manifest_path(g))) return {};
    const auto manifest = read_manifest(g);
    std::vector<Date> out;
    for (const auto& s : manifest["dates"]) out.push_back(parse_date(s.get<std::string>()));
    return out;
  }

  std::string territory_checksum(Granularity g) const {
    return read_manifest(g)["territory_checksum"].get<std::string>();
  }

  void store_territory(const TerritoryIndex& index) const {
    io::write_file_atomic(root_ / "od" / "territory.csv", index.to_csv());
  }

  TerritoryIndex load_territory() const {
    const auto path = root_ / "od" / "territory.csv";
    if (!fs::exists(path)) throw NotFoundError("no territory stored under " + (root_ / "od").string());
    return TerritoryIndex::load_csv(path);
  }

 private:
  nlohmann::json read_manifest(Granularity g) const {
    const auto path = manifest_path(g);
    if (!fs::exists(path)) throw NotFoundError("no OD manifest at " + path.string());
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(io::read_file(path));
    } catch (const nlohmann::json::exception& e) {
      throw SchemaVersionError("unreadable manifest " + path.string() + ": " + e.what());
    }
    if (!j.contains("schema_version") || j["schema_version"] != kSchemaVersion)
      throw SchemaVersionError("manifest " + path.string() + " has schema_version " +
                               (j.contains("schema_version") ? j["schema_version"].dump() : "missing") +
                               ", expected " + std::to_string(kSchemaVersion));
    if (j.value("granularity", "") != to_string(g))
      throw SchemaVersionError("manifest " + path.string() + " has wrong granularity");
    if (!j.contains("dates") || !j["dates"].is_array() || !j.contains("territory_checksum"))
      throw SchemaVersionError("manifest " + path.string() + " is missing fields");
    return j;
  }

  nlohmann::json read_manifest_or_new(Granularity g) const {
    if (fs::exists(manifest_path(g))) return read_manifest(g);
    return nlohmann::json{{"schema_version", kSchemaVersion},
                          {"granularity", std::string(to_string(g))},
                          {"dates", nlohmann::json::array()},
                          {"territory_checksum", ""}};
  }

  fs::path root_;
  mutable std::mutex mutex_;
};

inline fs::path store_daily_od(const DailyOD& od, const fs::path& root, const std::string& territory_checksum = {}) {
  return OdStore(root).store(od, territory_checksum);
}

inline DailyOD load_daily_od(const fs::path& root, Date date, Granularity g) { return OdStore(root).load(date, g); }

}  // namespace mobflow::od
