#pragma once

#include <algorithm>
#include <charconv>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "mobflow/error.hpp"
#include "mobflow/io.hpp"

namespace mobflow {

using TerritoryId = std::string;

// Municipality -> province mapping with dense indices on both levels.
// Indices follow insertion order; names are the external identity.
class TerritoryIndex {
 public:
  std::uint32_t add(std::string_view municipality, std::string_view province) {
    const auto p = intern_province(province);
    if (auto it = muni_lookup_.find(municipality); it != muni_lookup_.end()) {
      if (muni_to_province_[it->second] != p)
        throw DataIntegrityError("municipality '" + std::string(municipality) +
                                 "' mapped to two provinces: '" + provinces_[muni_to_province_[it->second]] +
                                 "' and '" + std::string(province) + "'");
      return it->second;
    }
    const auto m = static_cast<std::uint32_t>(municipalities_.size());
    municipalities_.emplace_back(municipality);
    muni_to_province_.push_back(p);
    muni_lookup_.emplace(std::string(municipality), m);
    return m;
  }

  // Registers a province that may have no municipality (e.g. to pin N).
  std::uint32_t add_province(std::string_view province) { return intern_province(province); }

  std::optional<std::uint32_t> find_municipality(std::string_view id) const {
    if (auto it = muni_lookup_.find(id); it != muni_lookup_.end()) return it->second;
    return std::nullopt;
  }
  std::optional<std::uint32_t> find_province(std::string_view id) const {
    if (auto it = prov_lookup_.find(id); it != prov_lookup_.end()) return it->second;
    return std::nullopt;
  }

  bool has_province(std::string_view id) const { return prov_lookup_.contains(id); }

  const std::string& municipality_name(std::uint32_t m) const { return municipalities_.at(m); }
  const std::string& province_name(std::uint32_t p) const { return provinces_.at(p); }
  std::uint32_t province_index_of(std::uint32_t m) const { return muni_to_province_.at(m); }

  const std::string& province_of(std::string_view municipality) const {
    const auto m = find_municipality(municipality);
    if (!m) throw DataIntegrityError("municipality '" + std::string(municipality) + "' is not in the territory index");
    return provinces_[muni_to_province_[*m]];
  }

  std::size_t municipality_count() const { return municipalities_.size(); }
  // N: the number of distinct provinces.
  std::size_t province_count() const { return provinces_.size(); }

  const std::vector<std::string>& municipalities() const { return municipalities_; }
  const std::vector<std::string>& provinces() const { return provinces_; }

  std::vector<std::string> sorted_provinces() const {
    auto out = provinces_;
    std::sort(out.begin(), out.end());
    return out;
  }

  // Order-independent content checksum of the mapping.
  std::string checksum() const {
    std::vector<std::string> rows;
    rows.reserve(municipalities_.size() + provinces_.size());
    for (std::size_t m = 0; m < municipalities_.size(); ++m)
      rows.push_back(municipalities_[m] + "," + provinces_[muni_to_province_[m]]);
    for (const auto& p : provinces_) rows.push_back("," + p);
    std::sort(rows.begin(), rows.end());
    std::uint64_t h = io::fnv1a("");
    for (const auto& r : rows) h = io::fnv1a(r + "\n", h);
    return io::hex64(h);
  }

  // Every province maps onto itself; aggregating a province-level matrix
  // with this index is the identity.
  static TerritoryIndex identity(const std::vector<std::string>& provinces) {
    TerritoryIndex idx;
    for (const auto& p : provinces) idx.add(p, p);
    return idx;
  }

  std::string to_csv() const {
    std::vector<std::pair<std::string, std::string>> rows;
    for (std::size_t m = 0; m < municipalities_.size(); ++m)
      rows.emplace_back(municipalities_[m], provinces_[muni_to_province_[m]]);
    std::sort(rows.begin(), rows.end());
    std::string out = "municipality_id,province_id\n";
    for (const auto& [m, p] : rows) out += m + "," + p + "\n";
    return out;
  }

  static TerritoryIndex load_csv(const std::filesystem::path& path) {
    TerritoryIndex idx;
    io::read_delimited(path, {"municipality_id", "province_id"}, [&](std::size_t line, const auto& f) {
      if (f.size() != 2 || f[0].empty() || f[1].empty())
        throw ParseError(path.string() + ":" + std::to_string(line) + ": expected municipality_id,province_id");
      idx.add(f[0], f[1]);
    });
    return idx;
  }

 private:
  std::uint32_t intern_province(std::string_view province) {
    if (auto it = prov_lookup_.find(province); it != prov_lookup_.end()) return it->second;
    const auto p = static_cast<std::uint32_t>(provinces_.size());
    provinces_.emplace_back(province);
    prov_lookup_.emplace(std::string(province), p);
    return p;
  }

  std::vector<std::string> municipalities_;
  std::vector<std::string> provinces_;
  std::vector<std::uint32_t> muni_to_province_;
  std::map<std::string, std::uint32_t, std::less<>> muni_lookup_;
  std::map<std::string, std::uint32_t, std::less<>> prov_lookup_;
};

struct AntennaSite {
  double latitude = 0.0;
  double longitude = 0.0;
  std::uint32_t municipality = 0;  // index into the registry's TerritoryIndex
  std::uint32_t province = 0;
};

// antenna id -> site. Immutable after load; safe to share between threads.
class AntennaRegistry {
 public:
  void add(std::string_view antenna_id, double lat, double lon, std::string_view municipality,
           std::string_view province) {
    if (!(lat >= -90.0 && lat <= 90.0) || !(lon >= -180.0 && lon <= 180.0))
      throw DataIntegrityError("antenna '" + std::string(antenna_id) + "' has out-of-range coordinates");
    const auto m = territory_.add(municipality, province);
    AntennaSite site{lat, lon, m, territory_.province_index_of(m)};
    if (auto it = sites_.find(antenna_id); it != sites_.end())
      throw DataIntegrityError("antenna '" + std::string(antenna_id) + "' registered twice");
    sites_.emplace(std::string(antenna_id), site);
  }

  const AntennaSite* find(std::string_view antenna_id) const {
    auto it = sites_.find(antenna_id);
    return it == sites_.end() ? nullptr : &it->second;
  }

  std::size_t size() const { return sites_.size(); }
  const TerritoryIndex& territory() const { return territory_; }

  static AntennaRegistry load_csv(const std::filesystem::path& path) {
    AntennaRegistry reg;
    io::read_delimited(path, {"antenna_id", "lat", "lon", "municipality_id", "province_id"},
                       [&](std::size_t line, const auto& f) {
                         double lat = 0, lon = 0;
                         if (f.size() != 5 || f[0].empty() || f[3].empty() || f[4].empty() ||
                             !parse_double(f[1], lat) || !parse_double(f[2], lon))
                           throw ParseError(path.string() + ":" + std::to_string(line) + ": malformed registry row");
                         reg.add(f[0], lat, lon, f[3], f[4]);
                       });
    return reg;
  }

 private:
  static bool parse_double(std::string_view s, double& out) {
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
    return !s.empty() && ec == std::errc{} && ptr == s.data() + s.size();
  }

  TerritoryIndex territory_;
  std::map<std::string, AntennaSite, std::less<>> sites_;
};

}  // namespace mobflow
