#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <numeric>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "mobflow/diversity.hpp"
#include "mobflow/error.hpp"
#include "mobflow/ingest.hpp"
#include "mobflow/io.hpp"
#include "mobflow/od.hpp"
#include "mobflow/random.hpp"
#include "mobflow/territory.hpp"
#include "mobflow/time.hpp"

namespace mobflow::synth {

namespace fs = std::filesystem;

// Mobility regime in force from `start` until the next regime begins.
struct Regime {
  Date start{};
  double flow_scale = 1.0;             // multiplies inter-province trips
  double bridge_scale = 1.0;           // multiplies cross-community commuting
  double weekend_concentration = 1.0;  // fraction of destinations reachable on weekends
};

struct ScenarioConfig {
  std::size_t n_provinces = 20;
  std::size_t municipalities_per_province = 10;
  std::size_t communities_per_province = 2;
  std::size_t population_per_municipality = 40;
  Date start_date = Date{std::chrono::year{2020} / 2 / 3};
  std::size_t days = 60;
  std::vector<Regime> regimes;
  std::vector<double> planted_cluster_levels;
  std::uint64_t seed = 1;
  std::string time_zone = "Europe/Rome";

  // Fixed model constants.
  double commute_probability = 0.6;      // weekday chance a resident commutes locally
  double weekend_commute_factor = 0.5;   // weekend multiplier on the above
  double bridge_share = 0.45;            // share of commutes crossing communities
  double inter_province_rate = 0.1;      // daily inter-province travellers per resident
  double short_visit_fraction = 0.0;     // trips whose destination stay is 30-40 min

  Regime regime_at(Date d) const {
    Regime r{start_date};
    for (const auto& g : regimes)
      if (g.start <= d) r = g;
    return r;
  }

  // First regime that scales anything down.
  std::optional<Date> lockdown_date() const {
    for (const auto& g : regimes)
      if (g.flow_scale < 1.0 || g.bridge_scale < 1.0) return g.start;
    return std::nullopt;
  }

  Date date(std::size_t index) const { return start_date + std::chrono::days{static_cast<int>(index)}; }

  void validate() const {
    if (n_provinces < 2) throw InvalidArgument("scenario needs at least 2 provinces");
    if (municipalities_per_province < 1) throw InvalidArgument("scenario needs municipalities");
    if (communities_per_province < 1 || communities_per_province > municipalities_per_province)
      throw InvalidArgument("communities_per_province must lie in [1, municipalities_per_province]");
    if (population_per_municipality == 0) throw InvalidArgument("infeasible scenario: zero population");
    if (days == 0) throw InvalidArgument("scenario needs at least one day");
    for (std::size_t i = 0; i < regimes.size(); ++i) {
      const auto& r = regimes[i];
      if (i > 0 && !(regimes[i - 1].start < r.start)) throw InvalidArgument("regime dates must be increasing");
      for (double s : {r.flow_scale, r.bridge_scale, r.weekend_concentration})
        if (!(s > 0.0 && s <= 1.0)) throw InvalidArgument("regime scales must lie in (0, 1]");
    }
    auto levels = planted_cluster_levels;
    std::sort(levels.begin(), levels.end());
    if (std::adjacent_find(levels.begin(), levels.end()) != levels.end())
      throw InvalidArgument("planted cluster levels must be distinct");
    for (double l : levels)
      if (!(l > 0.0 && l <= 1.0)) throw InvalidArgument("planted cluster levels must lie in (0, 1]");
    for (double p : {commute_probability, weekend_commute_factor, bridge_share, inter_province_rate,
                     short_visit_fraction})
      if (!(p >= 0.0 && p <= 1.0)) throw InvalidArgument("model probabilities must lie in [0, 1]");
  }

  static ScenarioConfig from_json(const nlohmann::json& j) {
    ScenarioConfig c;
    auto get = [&](const char* key, auto& field) {
      if (j.contains(key)) field = j.at(key).get<std::decay_t<decltype(field)>>();
    };
    get("n_provinces", c.n_provinces);
    get("municipalities_per_province", c.municipalities_per_province);
    get("communities_per_province", c.communities_per_province);
    get("population_per_municipality", c.population_per_municipality);
    if (j.contains("start_date")) c.start_date = parse_date(j.at("start_date").get<std::string>());
    get("days", c.days);
    get("planted_cluster_levels", c.planted_cluster_levels);
    get("seed", c.seed);
    get("time_zone", c.time_zone);
    get("commute_probability", c.commute_probability);
    get("weekend_commute_factor", c.weekend_commute_factor);
    get("bridge_share", c.bridge_share);
    get("inter_province_rate", c.inter_province_rate);
    get("short_visit_fraction", c.short_visit_fraction);
    if (j.contains("regimes"))
      for (const auto& r : j.at("regimes"))
        c.regimes.push_back({parse_date(r.at("start_date").get<std::string>()), r.value("flow_scale", 1.0),
                             r.value("bridge_scale", 1.0), r.value("weekend_concentration", 1.0)});
    c.validate();
    return c;
  }

  nlohmann::json to_json() const {
    nlohmann::json j{{"n_provinces", n_provinces},
                     {"municipalities_per_province", municipalities_per_province},
                     {"communities_per_province", communities_per_province},
                     {"population_per_municipality", population_per_municipality},
                     {"start_date", format_date(start_date)},
                     {"days", days},
                     {"planted_cluster_levels", planted_cluster_levels},
                     {"seed", seed},
                     {"time_zone", time_zone},
                     {"commute_probability", commute_probability},
                     {"weekend_commute_factor", weekend_commute_factor},
                     {"bridge_share", bridge_share},
                     {"inter_province_rate", inter_province_rate},
                     {"short_visit_fraction", short_visit_fraction}};
    auto& rs = j["regimes"] = nlohmann::json::array();
    for (const auto& r : regimes)
      rs.push_back({{"start_date", format_date(r.start)},
                    {"flow_scale", r.flow_scale},
                    {"bridge_scale", r.bridge_scale},
                    {"weekend_concentration", r.weekend_concentration}});
    return j;
  }
};

// The desk-scale lockdown scenario: 20 provinces x 10 municipalities,
// 60 days, lockdown on day 30.
inline ScenarioConfig lockdown_scenario(std::uint64_t seed = 1) {
  ScenarioConfig c;
  c.seed = seed;
  c.regimes = {{c.start_date, 1.0, 1.0, 1.0}, {c.date(30), 0.4, 0.2, 0.2}};
  return c;
}

struct DayTruth {
  Date date{};
  std::uint64_t inter_province_trips = 0;  // at the default 1 h dwell
  std::uint64_t intra_province_trips = 0;
  std::uint64_t trips_no_dwell = 0;  // every municipality change
};

struct DayRecords {
  Date date{};
  std::vector<ingest::CdrRecord> cdr;
  std::vector<ingest::XdrRecord> xdr;
  DayTruth truth;
};

// Gravity-style home/work generator. Each day is generated independently
// from mix_seed(seed, day number), so days can be produced in any order.
class Generator {
 public:
  // Distance kernel exponent of the gravity model.
  static constexpr double kGravityExponent = 2.0;

  explicit Generator(ScenarioConfig config) : config_(std::move(config)), tz_(TimeZone::named(config_.time_zone)) {
    config_.validate();
    const std::size_t P = config_.n_provinces, M = config_.municipalities_per_province;
    grid_cols_ = static_cast<std::size_t>(std::ceil(std::sqrt(static_cast<double>(P))));
    for (std::size_t p = 0; p < P; ++p)
      for (std::size_t m = 0; m < M; ++m)
        for (std::size_t a = 0; a < 2; ++a) {
          const double lat = 38.0 + 0.5 * static_cast<double>(p / grid_cols_) + 0.04 * static_cast<double>(m / 4);
          const double lon = 8.0 + 0.5 * static_cast<double>(p % grid_cols_) + 0.04 * static_cast<double>(m % 4) +
                             0.01 * static_cast<double>(a);
          registry_.add(antenna_id(p, m, a), lat, lon, municipality_id(p, m), province_id(p));
        }
    // Destinations of each province ordered by distance (ties by index).
    nearest_.resize(P);
    gravity_.resize(P);
    for (std::size_t p = 0; p < P; ++p) {
      for (std::size_t q = 0; q < P; ++q)
        if (q != p) nearest_[p].push_back(q);
      std::stable_sort(nearest_[p].begin(), nearest_[p].end(),
                       [&](auto a, auto b) { return distance(p, a) < distance(p, b); });
      for (auto q : nearest_[p]) gravity_[p].push_back(1.0 / std::pow(1.0 + distance(p, q), kGravityExponent));
    }
    if (!config_.planted_cluster_levels.empty()) {
      planted_level_.resize(P);
      std::vector<std::size_t> order(P);
      std::iota(order.begin(), order.end(), 0);
      auto rng = make_rng(config_.seed, 0xc1u);
      std::shuffle(order.begin(), order.end(), rng);
      for (std::size_t i = 0; i < P; ++i) planted_level_[order[i]] = i % config_.planted_cluster_levels.size();
    }
  }

  const ScenarioConfig& config() const { return config_; }
  const AntennaRegistry& registry() const { return registry_; }
  const TimeZone& time_zone() const { return tz_; }

  static std::string province_id(std::size_t p) { return "P" + pad(p); }
  static std::string municipality_id(std::size_t p, std::size_t m) { return "M" + pad(p) + "_" + pad(m); }
  static std::string antenna_id(std::size_t p, std::size_t m, std::size_t a) {
    return "A" + pad(p) + "_" + pad(m) + "_" + std::to_string(a);
  }
  std::string user_id(std::size_t p, std::size_t m, std::size_t i) const {
    return "u" + pad(p) + "_" + pad(m) + "_" + pad(i);
  }

  std::size_t planted_community(std::size_t m) const {
    return m * config_.communities_per_province / config_.municipalities_per_province;
  }

  DayRecords day(std::size_t index) const {
    const Date date = config_.date(index);
    const Regime regime = config_.regime_at(date);
    const bool weekend = is_weekend(date);
    auto rng = make_rng(config_.seed, static_cast<std::uint64_t>(date.time_since_epoch().count()));
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    const std::size_t P = config_.n_provinces, M = config_.municipalities_per_province,
                      pop = config_.population_per_municipality;
    DayRecords out;
    out.date = date;
    out.truth.date = date;

    std::vector<char> busy(P * M * pop, 0);
    auto user_index = [&](std::size_t p, std::size_t m, std::size_t i) { return (p * M + m) * pop + i; };

    // Inter-province travellers: an exact count per province.
    for (std::size_t p = 0; p < P; ++p) {
      const auto count = static_cast<std::size_t>(
          std::llround(config_.inter_province_rate * static_cast<double>(M * pop) * regime.flow_scale));
      std::vector<std::size_t> residents(M * pop);
      std::iota(residents.begin(), residents.end(), 0);
      for (std::size_t k = 0; k < std::min(count, residents.size()); ++k) {
        std::uniform_int_distribution<std::size_t> pick(k, residents.size() - 1);
        std::swap(residents[k], residents[pick(rng)]);
        const std::size_t m = residents[k] / pop, i = residents[k] % pop;
        busy[user_index(p, m, i)] = 1;
        const std::size_t q = destination_province(p, weekend, regime, rng);
        std::uniform_int_distribution<std::size_t> dm(0, M - 1);
        emit_round_trip(out, p, m, i, q, dm(rng), rng, /*inter=*/true);
      }
    }

    // Local commuting inside the province.
    const double commute = config_.commute_probability * (weekend ? config_.weekend_commute_factor : 1.0);
    const double bridge = config_.bridge_share * regime.bridge_scale;
    for (std::size_t p = 0; p < P; ++p)
      for (std::size_t m = 0; m < M; ++m)
        for (std::size_t i = 0; i < pop; ++i) {
          if (busy[user_index(p, m, i)]) continue;
          std::optional<std::size_t> target;
          if (unit(rng) < commute) {
            const double r = unit(rng);
            if (r < bridge)
              target = pick_municipality(m, /*same_community=*/false, rng);
            else if (r < bridge + (1.0 - config_.bridge_share))
              target = pick_municipality(m, /*same_community=*/true, rng);
          }
          if (target) {
            emit_round_trip(out, p, m, i, p, *target, rng, /*inter=*/false);
          } else {
            std::uniform_int_distribution<std::int64_t> t(8 * 3600, 21 * 3600);
            emit_event(out, p, m, i, tz_.to_utc(date, t(rng)), rng);
          }
        }

    auto by_time = [](const auto& a, const auto& b) { return a.timestamp < b.timestamp; };
    std::stable_sort(out.cdr.begin(), out.cdr.end(), by_time);
    std::stable_sort(out.xdr.begin(), out.xdr.end(), by_time);
    return out;
  }

  nlohmann::json ground_truth(const std::vector<DayTruth>& days) const {
    nlohmann::json j;
    j["seed"] = config_.seed;
    j["time_zone"] = config_.time_zone;
    const auto lock = config_.lockdown_date();
    j["lockdown_date"] = lock ? nlohmann::json(format_date(*lock)) : nlohmann::json(nullptr);
    auto& arr = j["days"] = nlohmann::json::array();
    for (const auto& d : days)
      arr.push_back({{"date", format_date(d.date)},
                     {"inter_province_trips", d.inter_province_trips},
                     {"intra_province_trips", d.intra_province_trips},
                     {"total_trips", d.inter_province_trips + d.intra_province_trips},
                     {"total_trips_no_dwell", d.trips_no_dwell}});
    auto& comm = j["planted_communities"] = nlohmann::json::object();
    for (std::size_t p = 0; p < config_.n_provinces; ++p)
      for (std::size_t m = 0; m < config_.municipalities_per_province; ++m)
        comm[municipality_id(p, m)] = p * config_.communities_per_province + planted_community(m);
    if (!planted_level_.empty()) {
      auto& cl = j["planted_clusters"] = nlohmann::json::object();
      for (std::size_t p = 0; p < config_.n_provinces; ++p) cl[province_id(p)] = planted_level_[p];
    }
    j["scenario"] = config_.to_json();
    return j;
  }

 private:
  static std::string pad(std::size_t v) {
    std::string s = std::to_string(v);
    return s.size() >= 3 ? s : std::string(3 - s.size(), '0') + s;
  }

  double distance(std::size_t a, std::size_t b) const {
    const double dr = static_cast<double>(a / grid_cols_) - static_cast<double>(b / grid_cols_);
    const double dc = static_cast<double>(a % grid_cols_) - static_cast<double>(b % grid_cols_);
    return std::sqrt(dr * dr + dc * dc);
  }

  std::size_t reachable(double fraction) const {
    const auto n = static_cast<double>(config_.n_provinces - 1);
    return std::clamp<std::size_t>(static_cast<std::size_t>(std::llround(fraction * n)), 1, config_.n_provinces - 1);
  }

  // Weekends: uniform over the nearest `weekend_concentration` share of
  // provinces. Weekdays: gravity over all provinces, or over the nearest
  // planted-level share when cluster levels are planted.
  std::size_t destination_province(std::size_t p, bool weekend, const Regime& regime, Rng& rng) const {
    const auto& near = nearest_[p];
    if (weekend) {
      std::uniform_int_distribution<std::size_t> u(0, reachable(regime.weekend_concentration) - 1);
      return near[u(rng)];
    }
    std::size_t k = near.size();
    if (!planted_level_.empty()) k = reachable(config_.planted_cluster_levels[planted_level_[p]]);
    std::discrete_distribution<std::size_t> g(gravity_[p].begin(), gravity_[p].begin() + static_cast<long>(k));
    return near[g(rng)];
  }

  std::optional<std::size_t> pick_municipality(std::size_t m, bool same_community, Rng& rng) const {
    std::vector<std::size_t> options;
    for (std::size_t x = 0; x < config_.municipalities_per_province; ++x)
      if (x != m && (planted_community(x) == planted_community(m)) == same_community) options.push_back(x);
    if (options.empty()) return std::nullopt;
    std::uniform_int_distribution<std::size_t> u(0, options.size() - 1);
    return options[u(rng)];
  }

  // home -> destination -> home. Event times are local wall-clock times;
  // the destination stay is >= 7 h unless the trip is drawn as a short visit.
  void emit_round_trip(DayRecords& out, std::size_t p, std::size_t m, std::size_t i, std::size_t q,
                       std::size_t dm, Rng& rng, bool inter) const {
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    auto between = [&](std::int64_t lo, std::int64_t hi) {
      return std::uniform_int_distribution<std::int64_t>(lo, hi)(rng);
    };
    const bool short_visit = config_.short_visit_fraction > 0.0 && unit(rng) < config_.short_visit_fraction;
    const Date d = out.date;
    const std::int64_t t_home = between(7 * 3600, 7 * 3600 + 3599);
    const std::int64_t t_arrive = between(9 * 3600, 10 * 3600 + 1800);
    emit_event(out, p, m, i, tz_.to_utc(d, t_home), rng);
    emit_event(out, q, dm, i, tz_.to_utc(d, t_arrive), rng, user_id(p, m, i));
    std::int64_t t_back = 0;
    if (short_visit) {
      t_back = t_arrive + between(1800, 2400);
    } else {
      emit_event(out, q, dm, i, tz_.to_utc(d, t_arrive + between(1800, 3600)), rng, user_id(p, m, i));
      t_back = between(18 * 3600, 19 * 3600);
    }
    emit_event(out, p, m, i, tz_.to_utc(d, t_back), rng);
    auto& counter = inter ? out.truth.inter_province_trips : out.truth.intra_province_trips;
    counter += short_visit ? 1 : 2;  // a short outbound stay fails the dwell rule
    out.truth.trips_no_dwell += 2;
  }

  void emit_event(DayRecords& out, std::size_t p, std::size_t m, std::size_t i, Timestamp t, Rng& rng,
                  std::string user = {}) const {
    if (user.empty()) user = user_id(p, m, i);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::uniform_int_distribution<std::size_t> antenna(0, 1);
    if (unit(rng) < 0.25) {
      std::uniform_int_distribution<std::int64_t> dur(0, 5);
      std::uniform_int_distribution<std::size_t> callee_p(0, config_.n_provinces - 1);
      ingest::CdrRecord r;
      r.caller_id = std::move(user);
      r.callee_id = user_id(callee_p(rng), 0, 0);
      r.timestamp = t;
      r.antenna_start = antenna_id(p, m, antenna(rng));
      r.antenna_end = antenna_id(p, m, antenna(rng));
      r.duration = dur(rng);
      out.cdr.push_back(std::move(r));
    } else {
      std::uniform_int_distribution<std::int64_t> kb(1, 5000);
      out.xdr.push_back({std::move(user), t, antenna_id(p, m, antenna(rng)), kb(rng)});
    }
  }

  ScenarioConfig config_;
  TimeZone tz_;
  AntennaRegistry registry_;
  std::size_t grid_cols_ = 1;
  std::vector<std::vector<std::size_t>> nearest_;
  std::vector<std::vector<double>> gravity_;
  std::vector<std::size_t> planted_level_;
};

inline std::string registry_csv(const Generator& gen) {
  const auto& c = gen.config();
  std::string out = "antenna_id,lat,lon,municipality_id,province_id\n";
  for (std::size_t p = 0; p < c.n_provinces; ++p)
    for (std::size_t m = 0; m < c.municipalities_per_province; ++m)
      for (std::size_t a = 0; a < 2; ++a) {
        const auto id = Generator::antenna_id(p, m, a);
        // Coordinates are reproduced from the registry itself.
        char buf[64];
        const auto* site = gen.registry().find(id);
        std::snprintf(buf, sizeof buf, "%.6f,%.6f", site->latitude, site->longitude);
        out += id + "," + buf + "," + Generator::municipality_id(p, m) + "," + Generator::province_id(p) + "\n";
      }
  return out;
}

inline std::string cdr_csv(const std::vector<ingest::CdrRecord>& records) {
  std::string out = "caller_id,callee_id,timestamp,antenna_start,antenna_end,duration_min\n";
  for (const auto& r : records)
    out += r.caller_id + "," + r.callee_id + "," + format_iso8601(r.timestamp) + "," + r.antenna_start + "," +
           r.antenna_end + "," + std::to_string(r.duration) + "\n";
  return out;
}

inline std::string xdr_csv(const std::vector<ingest::XdrRecord>& records) {
  std::string out = "user_id,timestamp,antenna,kilobytes\n";
  for (const auto& r : records)
    out += r.user_id + "," + std::to_string(r.timestamp) + "," + r.antenna + "," + std::to_string(r.kilobytes) + "\n";
  return out;
}

struct GeneratedFiles {
  fs::path registry;
  std::vector<fs::path> cdr;
  std::vector<fs::path> xdr;
  fs::path ground_truth;
};

// Writes <out>/registry.csv, <out>/cdr/cdr_<date>.csv,
// <out>/xdr/xdr_<date>.csv, <out>/ground_truth.json and <out>/scenario.json.
inline GeneratedFiles generate(const ScenarioConfig& config, const fs::path& out) {
  const Generator gen(config);
  GeneratedFiles files;
  files.registry = out / "registry.csv";
  io::write_file_atomic(files.registry, registry_csv(gen));
  std::vector<DayTruth> truth;
  for (std::size_t d = 0; d < config.days; ++d) {
    auto day = gen.day(d);
    const auto ds = format_date(day.date);
    files.cdr.push_back(out / "cdr" / ("cdr_" + ds + ".csv"));
    files.xdr.push_back(out / "xdr" / ("xdr_" + ds + ".csv"));
    io::write_file_atomic(files.cdr.back(), cdr_csv(day.cdr));
    io::write_file_atomic(files.xdr.back(), xdr_csv(day.xdr));
    truth.push_back(day.truth);
  }
  files.ground_truth = out / "ground_truth.json";
  io::write_file_atomic(files.ground_truth, gen.ground_truth(truth).dump(2) + "\n");
  io::write_file_atomic(out / "scenario.json", config.to_json().dump(2) + "\n");
  return files;
}

struct SimulatedDays {
  std::vector<od::DailyOD> municipality;
  std::vector<DayTruth> truth;
};

// In-memory path through the ingest stage (no files): generated records ->
// events -> trips -> daily municipality matrices.
inline SimulatedDays simulate_daily_od(const ScenarioConfig& config,
                                       std::int64_t dwell_threshold = ingest::kDefaultDwellSeconds) {
  const Generator gen(config);
  SimulatedDays out;
  for (std::size_t d = 0; d < config.days; ++d) {
    const auto day = gen.day(d);
    ingest::EventCollector collector(gen.registry());
    for (const auto& r : day.cdr) collector.add(r);
    for (const auto& r : day.xdr) collector.add(r);
    const auto stream = std::move(collector).finish();
    const auto trips = ingest::extract_daily_trips(stream, gen.time_zone(), dwell_threshold);
    std::vector<ingest::Trip> all;
    for (const auto& [date, t] : trips) all.insert(all.end(), t.begin(), t.end());
    out.municipality.push_back(od::build_daily_od(all, day.date, gen.registry().territory()));
    out.truth.push_back(day.truth);
  }
  return out;
}

struct PlantedSeries {
  std::vector<diversity::DiversitySeries> series;
  std::vector<std::size_t> labels;  // planted level index per province
};

// Diversity series with planted levels: level + shared lockdown trend +
// weekly wiggle + Gaussian noise.
inline PlantedSeries planted_diversity_series(const std::vector<double>& levels, std::size_t n_provinces,
                                              std::size_t n_days, std::uint64_t seed, double noise = 0.03,
                                              Date start = Date{std::chrono::year{2020} / 2 / 3}) {
  if (levels.empty()) throw InvalidArgument("planted series need at least one level");
  PlantedSeries out;
  auto rng = make_rng(seed, 0x5e);
  std::normal_distribution<double> eps(0.0, noise);
  std::vector<std::size_t> labels(n_provinces);
  for (std::size_t p = 0; p < n_provinces; ++p) labels[p] = p % levels.size();
  std::shuffle(labels.begin(), labels.end(), rng);
  for (std::size_t p = 0; p < n_provinces; ++p) {
    diversity::DiversitySeries s{"P" + std::to_string(1000 + p).substr(1), diversity::Direction::in, {}, {}};
    for (std::size_t d = 0; d < n_days; ++d) {
      const Date date = start + std::chrono::days{static_cast<int>(d)};
      const double trend = d >= n_days / 2 ? -0.08 : 0.0;
      const double weekly = is_weekend(date) ? 0.02 : 0.0;
      s.dates.push_back(date);
      s.values.push_back(std::clamp(levels[labels[p]] + trend + weekly + eps(rng), 0.0, 1.0));
    }
    out.series.push_back(std::move(s));
  }
  out.labels = std::move(labels);
  return out;
}

}  // namespace mobflow::synth
