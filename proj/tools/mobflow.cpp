// mobflow: records -> daily OD matrices -> flow, diversity, cluster and
// community tables.
//
// Exit codes: 0 success, 1 usage error, 2 data error.

#include <cstdint>
#include <filesystem>
#include <iostream>
#include <optional>
#include <set>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "mobflow/mobflow.hpp"

namespace fs = std::filesystem;
using namespace mobflow;

namespace {

constexpr int kUsageError = 1;
constexpr int kDataError = 2;

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct Args {
  std::string in;
  std::string out;
  std::string from;
  std::string to;
  std::optional<std::uint64_t> seed;
  std::string granularity = "municipality";
  double tau = 0.15;
  std::size_t trials = 10;
  std::int64_t dwell_seconds = ingest::kDefaultDwellSeconds;
  std::string k_range = "2..20";
  bool include_self_flow = false;
  std::string config;
  std::string registry;
  std::string time_zone = "Europe/Rome";
  std::string lockdown;
  std::size_t window_days = 1;
  std::string provinces;
};

pipeline::DateRange date_range(const Args& a) {
  pipeline::DateRange r;
  if (!a.from.empty()) r.from = parse_date(a.from);
  if (!a.to.empty()) r.to = parse_date(a.to);
  if (r.from && r.to && *r.to < *r.from) throw UsageError("--to precedes --from: the date range is empty");
  return r;
}

std::pair<std::size_t, std::size_t> parse_k_range(const std::string& s) {
  const auto dots = s.find("..");
  std::size_t lo = 0, hi = 0;
  if (dots == std::string::npos || !detail::parse_int(std::string_view(s).substr(0, dots), lo) ||
      !detail::parse_int(std::string_view(s).substr(dots + 2), hi) || lo < 2 || hi < lo)
    throw UsageError("--k-range must look like 2..20 (lower bound >= 2)");
  return {lo, hi};
}

std::uint64_t require_seed(const Args& a) {
  if (!a.seed) throw UsageError("this subcommand is randomized and requires --seed");
  return *a.seed;
}

void require_dir(const std::string& path, const char* flag) {
  if (path.empty()) throw UsageError(std::string(flag) + " is required");
  if (!fs::is_directory(path)) throw UsageError(std::string(flag) + " '" + path + "' is not a directory");
}

std::set<std::string> split_list(const std::string& s) {
  std::set<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ','))
    if (!item.empty()) out.insert(item);
  return out;
}

community::SeriesOptions community_options(const Args& a) {
  community::SeriesOptions o;
  if (!(a.tau > 0.0 && a.tau < 1.0)) throw UsageError("--tau must lie in (0, 1)");
  if (a.trials == 0 || a.window_days == 0) throw UsageError("--trials and --window-days must be positive");
  o.infomap.teleport = a.tau;
  o.infomap.trials = a.trials;
  o.window_days = a.window_days;
  return o;
}

int cmd_synth(const Args& a) {
  if (a.config.empty()) throw UsageError("--config is required");
  if (a.out.empty()) throw UsageError("--out is required");
  if (!fs::exists(a.config)) throw UsageError("--config '" + a.config + "' does not exist");
  auto config = synth::ScenarioConfig::from_json(nlohmann::json::parse(io::read_file(a.config)));
  if (a.seed) config.seed = *a.seed;
  fs::create_directories(a.out);
  pipeline::Staging staging(a.out);
  const auto files = synth::generate(config, staging.root());
  staging.commit();
  std::cerr << "synth: " << files.cdr.size() << " days written to " << a.out << "\n";
  return 0;
}

int cmd_build_od(const Args& a) {
  require_dir(a.in, "--in");
  if (a.out.empty()) throw UsageError("--out is required");
  if (a.dwell_seconds < 0) throw UsageError("--dwell-seconds must be non-negative");
  const auto range = date_range(a);
  const auto tz = TimeZone::named(a.time_zone);
  fs::create_directories(a.out);
  pipeline::Staging staging(a.out);
  const auto r = pipeline::build_od(a.in, staging.root(), tz, a.dwell_seconds, range);
  staging.commit();
  for (const auto& f : r.report.files)
    if (f.rejected() > 0)
      std::cerr << "build-od: " << f.file << ": rejected " << f.malformed << " malformed, " << f.unknown_antenna
                << " unknown-antenna records\n";
  std::cerr << "build-od: " << r.dates.size() << " days, " << r.trips << " trips, " << r.report.total_rejected()
            << " records rejected\n";
  return 0;
}

int cmd_aggregate(const Args& a) {
  require_dir(a.in, "--in");
  const fs::path out = a.out.empty() ? fs::path(a.in) : fs::path(a.out);
  const auto range = date_range(a);
  fs::create_directories(out);
  pipeline::Staging staging(out);
  // Reads from --in, writes into the staging copy of --out.
  const od::OdStore in(a.in);
  const auto territory = in.load_territory();
  od::OdStore store(staging.root());
  store.store_territory(territory);
  std::size_t n = 0;
  for (const auto& od : pipeline::load_range(in, od::Granularity::municipality, range)) {
    store.store(od::aggregate_to_province(od, territory), territory.checksum());
    ++n;
  }
  staging.commit();
  std::cerr << "aggregate: " << n << " days\n";
  return 0;
}

struct Loaded {
  TerritoryIndex territory;
  std::vector<od::DailyOD> ods;
};

Loaded load(const Args& a, od::Granularity g) {
  require_dir(a.in, "--in");
  if (a.out.empty()) throw UsageError("--out is required");
  const od::OdStore store(a.in);
  Loaded l{store.load_territory(), pipeline::load_range(store, g, date_range(a))};
  if (l.ods.empty()) throw DataIntegrityError("no " + std::string(od::to_string(g)) + " matrices in range under " + a.in);
  return l;
}

int cmd_flows(const Args& a) {
  const auto l = load(a, od::Granularity::province);
  fs::create_directories(a.out);
  pipeline::Staging staging(a.out);
  pipeline::write_flow_tables(l.ods, l.territory, staging.root());
  staging.commit();
  return 0;
}

int cmd_diversity(const Args& a) {
  const auto l = load(a, od::Granularity::province);
  fs::create_directories(a.out);
  pipeline::Staging staging(a.out);
  pipeline::write_diversity_tables(pipeline::compute_diversity(l.ods, l.territory, {a.include_self_flow}), staging.root());
  staging.commit();
  return 0;
}

int cmd_cluster(const Args& a) {
  const auto seed = require_seed(a);
  const auto [k_min, k_max] = parse_k_range(a.k_range);
  const auto l = load(a, od::Granularity::province);
  const auto div = pipeline::compute_diversity(l.ods, l.territory, {a.include_self_flow});
  fs::create_directories(a.out);
  pipeline::Staging staging(a.out);
  const auto in = pipeline::write_cluster_tables(div.in, "in", k_min, k_max, seed, staging.root());
  const auto out = pipeline::write_cluster_tables(div.out, "out", k_min, k_max, seed, staging.root());
  staging.commit();
  std::cerr << "cluster: k* in=" << in.k_star << " out=" << out.k_star << "\n";
  return 0;
}

int cmd_communities(const Args& a) {
  const auto seed = require_seed(a);
  const auto options = community_options(a);
  const auto l = load(a, od::Granularity::municipality);
  fs::create_directories(a.out);
  pipeline::Staging staging(a.out);
  pipeline::write_community_tables(l.ods, l.territory, seed, options, staging.root(), split_list(a.provinces));
  staging.commit();
  return 0;
}

int cmd_report(const Args& a) {
  require_dir(a.in, "--in");
  if (a.out.empty()) throw UsageError("--out is required");
  pipeline::ReportOptions o;
  o.data_dir = a.in;
  o.out_dir = a.out;
  if (a.seed) {
    o.seed = *a.seed;
  } else if (fs::exists(fs::path(a.in) / "ground_truth.json")) {
    o.seed = nlohmann::json::parse(io::read_file(fs::path(a.in) / "ground_truth.json")).at("seed").get<std::uint64_t>();
  } else {
    throw UsageError("report requires --seed (no ground_truth.json to take it from)");
  }
  if (!a.lockdown.empty()) o.split = parse_date(a.lockdown);
  o.range = date_range(a);
  o.time_zone = a.time_zone;
  o.dwell_threshold = a.dwell_seconds;
  std::tie(o.k_min, o.k_max) = parse_k_range(a.k_range);
  o.communities = community_options(a);
  o.diversity.include_self_flow = a.include_self_flow;
  fs::create_directories(a.out);
  pipeline::Staging staging(a.out);
  const auto s = pipeline::run_report(o, staging.root());
  staging.commit();
  std::cout << s.to_json().dump(2) << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"mobflow: mobility-flow analytics from phone records"};
  app.require_subcommand(1);
  Args a;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--in", a.in, "Input directory");
    sub->add_option("--out", a.out, "Output directory");
    sub->add_option("--from", a.from, "First day (YYYY-MM-DD)");
    sub->add_option("--to", a.to, "Last day (YYYY-MM-DD)");
    sub->add_option("--seed", a.seed, "Random seed");
  };

  auto* synth = app.add_subcommand("synth", "Generate a synthetic scenario");
  add_common(synth);
  synth->add_option("--config", a.config, "Scenario JSON");

  auto* build = app.add_subcommand("build-od", "Records -> daily municipality OD matrices");
  add_common(build);
  build->add_option("--dwell-seconds", a.dwell_seconds, "Minimum stay at the destination");
  build->add_option("--tz", a.time_zone, "Time zone for day boundaries");

  auto* agg = app.add_subcommand("aggregate", "Municipality -> province OD matrices");
  add_common(agg);
  agg->add_option("--granularity", a.granularity, "Source granularity (municipality)");

  auto* flows = app.add_subcommand("flows", "Per-province in/out/self flow tables");
  add_common(flows);

  auto* div = app.add_subcommand("diversity", "Flow diversity tables");
  add_common(div);
  div->add_flag("--include-self-flow-in-diversity", a.include_self_flow, "Count self-loops as a partner");

  auto* clu = app.add_subcommand("cluster", "k-means clusters of diversity series");
  add_common(clu);
  clu->add_option("--k-range", a.k_range, "Candidate k, e.g. 2..20");
  clu->add_flag("--include-self-flow-in-diversity", a.include_self_flow, "Count self-loops as a partner");

  auto* com = app.add_subcommand("communities", "Daily map-equation communities");
  add_common(com);
  com->add_option("--tau", a.tau, "Teleportation probability");
  com->add_option("--trials", a.trials, "Independent optimizer trials");
  com->add_option("--window-days", a.window_days, "Rolling window length in days");
  com->add_option("--provinces", a.provinces, "Comma-separated provinces for filtered partition dumps");

  auto* rep = app.add_subcommand("report", "Run every stage and write summary.json");
  add_common(rep);
  rep->add_option("--dwell-seconds", a.dwell_seconds, "Minimum stay at the destination");
  rep->add_option("--tz", a.time_zone, "Time zone for day boundaries");
  rep->add_option("--tau", a.tau, "Teleportation probability");
  rep->add_option("--trials", a.trials, "Independent optimizer trials");
  rep->add_option("--window-days", a.window_days, "Rolling window length in days");
  rep->add_option("--k-range", a.k_range, "Candidate k, e.g. 2..20");
  rep->add_option("--lockdown", a.lockdown, "Split date for pre/post summaries");
  rep->add_flag("--include-self-flow-in-diversity", a.include_self_flow, "Count self-loops as a partner");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : kUsageError;
  }

  try {
    if (a.granularity != "municipality") throw UsageError("aggregate only accepts --granularity municipality");
    if (*synth) return cmd_synth(a);
    if (*build) return cmd_build_od(a);
    if (*agg) return cmd_aggregate(a);
    if (*flows) return cmd_flows(a);
    if (*div) return cmd_diversity(a);
    if (*clu) return cmd_cluster(a);
    if (*com) return cmd_communities(a);
    if (*rep) return cmd_report(a);
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return kUsageError;
  } catch (const InvalidArgument& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return kUsageError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kDataError;
  }
  return kUsageError;
}
