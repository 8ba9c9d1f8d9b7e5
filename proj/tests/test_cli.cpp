#include <gtest/gtest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <fstream>
#include <sstream>

#include "mobflow/mobflow.hpp"
#include "support.hpp"

using namespace mobflow;
using testing_support::TempDir;
using testing_support::write_text;
namespace fs = std::filesystem;

namespace {

int run_cli(const std::string& args, const fs::path& log) {
  const std::string cmd = std::string(MOBFLOW_CLI) + " " + args + " > " + log.string() + " 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::size_t file_count(const fs::path& root) {
  if (!fs::exists(root)) return 0;
  std::size_t n = 0;
  for (const auto& e : fs::recursive_directory_iterator(root)) n += e.is_regular_file();
  return n;
}

// Two provinces, three municipalities, one user.
void write_tiny_dataset(const fs::path& dir) {
  write_text(dir / "registry.csv",
             "antenna_id,lat,lon,municipality_id,province_id\n"
             "A1,45.0,9.0,M1,P1\n"
             "A2,45.1,9.1,M2,P1\n"
             "A3,45.5,9.5,M3,P2\n");
  write_text(dir / "xdr" / "xdr_2020-03-02.csv",
             "user_id,timestamp,antenna,kilobytes\n"
             "u1,2020-03-02T08:00:00+01:00,A1,10\n"
             "u1,2020-03-02T09:00:00+01:00,A2,10\n"
             "u1,2020-03-02T09:20:00+01:00,A3,10\n"
             "u1,2020-03-02T12:00:00+01:00,A1,10\n"
             "u2,2020-03-02T10:00:00+01:00,A3,10\n"
             "u2,2020-03-02T11:30:00+01:00,A1,10\n");
}

class CliTest : public ::testing::Test {
 protected:
  TempDir dir_{"cli"};
  fs::path log() const { return dir_ / "log.txt"; }
  std::string q(const fs::path& p) const { return "'" + p.string() + "'"; }
};

}  // namespace

TEST_F(CliTest, BuildOdOnHandWrittenRecords) {
  write_tiny_dataset(dir_ / "data");
  ASSERT_EQ(run_cli("build-od --in " + q(dir_ / "data") + " --out " + q(dir_ / "od"), log()), 0) << slurp(log());
  // u1 stays 20 min in M2, so M1->M2 is dropped.
  EXPECT_EQ(slurp(dir_ / "od/od/municipality/2020-03-02.csv"),
            "origin,destination,count\nM2,M3,1\nM3,M1,2\n");
  ASSERT_EQ(run_cli("build-od --in " + q(dir_ / "data") + " --out " + q(dir_ / "od0") + " --dwell-seconds 0", log()), 0);
  EXPECT_EQ(slurp(dir_ / "od0/od/municipality/2020-03-02.csv"),
            "origin,destination,count\nM1,M2,1\nM2,M3,1\nM3,M1,2\n");
}

TEST_F(CliTest, StagesRoundTripThroughLoaders) {
  write_tiny_dataset(dir_ / "data");
  const auto od_dir = dir_ / "od";
  ASSERT_EQ(run_cli("build-od --in " + q(dir_ / "data") + " --out " + q(od_dir), log()), 0);
  ASSERT_EQ(run_cli("aggregate --in " + q(od_dir), log()), 0) << slurp(log());
  const od::OdStore store(od_dir);
  const auto territory = store.load_territory();
  const auto muni = store.load(parse_date("2020-03-02"), od::Granularity::municipality);
  const auto prov = store.load(parse_date("2020-03-02"), od::Granularity::province);
  EXPECT_EQ(prov, od::aggregate_to_province(muni, territory));
  EXPECT_EQ(prov.at("P1", "P2"), 1u);
  EXPECT_EQ(prov.at("P2", "P1"), 2u);

  ASSERT_EQ(run_cli("flows --in " + q(od_dir) + " --out " + q(dir_ / "flows"), log()), 0) << slurp(log());
  const std::vector<od::DailyOD> days{prov};
  EXPECT_EQ(slurp(dir_ / "flows/flows/P1.csv"), flows::to_csv(flows::compute_flows(days, "P1", territory)));

  ASSERT_EQ(run_cli("diversity --in " + q(od_dir) + " --out " + q(dir_ / "div"), log()), 0) << slurp(log());
  const auto div = pipeline::compute_diversity(days, territory, {});
  std::vector<diversity::DiversitySeries> all = div.in;
  all.insert(all.end(), div.out.begin(), div.out.end());
  EXPECT_EQ(slurp(dir_ / "div/diversity.csv"), diversity::to_csv(all));
}

TEST_F(CliTest, SynthThenReportWritesSummary) {
  write_text(dir_ / "scenario.json",
             R"({"n_provinces": 4, "municipalities_per_province": 4, "population_per_municipality": 15,
                 "days": 14, "seed": 3,
                 "regimes": [{"start_date": "2020-02-10", "flow_scale": 0.5, "bridge_scale": 0.5}]})");
  ASSERT_EQ(run_cli("synth --config " + q(dir_ / "scenario.json") + " --out " + q(dir_ / "data"), log()), 0)
      << slurp(log());
  EXPECT_EQ(nlohmann::json::parse(slurp(dir_ / "data/ground_truth.json")).at("seed"), 3);
  ASSERT_EQ(run_cli("report --in " + q(dir_ / "data") + " --out " + q(dir_ / "report") + " --k-range 2..3", log()), 0)
      << slurp(log());
  const auto summary = nlohmann::json::parse(slurp(dir_ / "report/summary.json"));
  for (const char* key : {"flow_drop_pct", "weekend_diversity_delta_pre", "weekend_diversity_delta_post", "k_star",
                          "community_count_pre_median", "community_count_post_median"})
    EXPECT_TRUE(summary.contains(key)) << key;
  EXPECT_GT(summary["flow_drop_pct"].get<double>(), 0.0);
  EXPECT_EQ(summary["split_date"], "2020-02-10");
}

TEST_F(CliTest, UsageErrorsExitWithOne) {
  write_tiny_dataset(dir_ / "data");
  ASSERT_EQ(run_cli("build-od --in " + q(dir_ / "data") + " --out " + q(dir_ / "od"), log()), 0);
  EXPECT_EQ(run_cli("", log()), 1);
  EXPECT_EQ(run_cli("frobnicate", log()), 1);
  EXPECT_EQ(run_cli("build-od --in " + q(dir_ / "missing") + " --out " + q(dir_ / "x"), log()), 1);
  EXPECT_EQ(run_cli("build-od --in " + q(dir_ / "data") + " --out " + q(dir_ / "x") + " --dwell-seconds -5", log()), 1);
  EXPECT_EQ(run_cli("build-od --in " + q(dir_ / "data") + " --out " + q(dir_ / "x") + " --from 2020-03-05 --to 2020-03-01", log()), 1);
  EXPECT_EQ(run_cli("build-od --in " + q(dir_ / "data") + " --out " + q(dir_ / "x") + " --tz Mars/Olympus", log()), 1);
  EXPECT_EQ(run_cli("cluster --in " + q(dir_ / "od") + " --out " + q(dir_ / "c"), log()), 1);
  EXPECT_NE(slurp(log()).find("--seed"), std::string::npos);
  EXPECT_EQ(run_cli("communities --in " + q(dir_ / "od") + " --out " + q(dir_ / "c"), log()), 1);
  EXPECT_EQ(run_cli("cluster --in " + q(dir_ / "od") + " --out " + q(dir_ / "c") + " --seed 1 --k-range 1..4", log()), 1);
  EXPECT_EQ(run_cli("communities --in " + q(dir_ / "od") + " --out " + q(dir_ / "c") + " --seed 1 --tau 1.5", log()), 1);
  EXPECT_EQ(run_cli("synth --out " + q(dir_ / "s"), log()), 1);
  EXPECT_EQ(run_cli("report --in " + q(dir_ / "data") + " --out " + q(dir_ / "r"), log()), 1);
}

TEST_F(CliTest, DataErrorsExitWithTwoAndLeaveNoOutputs) {
  write_text(dir_ / "bad/registry.csv", "antenna,lat,lon\nA1,1,2\n");
  EXPECT_EQ(run_cli("build-od --in " + q(dir_ / "bad") + " --out " + q(dir_ / "out"), log()), 2);
  EXPECT_EQ(file_count(dir_ / "out"), 0u);

  write_tiny_dataset(dir_ / "data");
  ASSERT_EQ(run_cli("build-od --in " + q(dir_ / "data") + " --out " + q(dir_ / "od"), log()), 0);
  // No province matrices yet.
  EXPECT_EQ(run_cli("flows --in " + q(dir_ / "od") + " --out " + q(dir_ / "flows"), log()), 2);
  EXPECT_EQ(file_count(dir_ / "flows"), 0u);

  ASSERT_EQ(run_cli("aggregate --in " + q(dir_ / "od"), log()), 0);
  write_text(dir_ / "od/od/province/2020-03-02.csv", "origin,destination,count\nP1,P2,banana\n");
  EXPECT_EQ(run_cli("diversity --in " + q(dir_ / "od") + " --out " + q(dir_ / "div"), log()), 2);
  EXPECT_EQ(file_count(dir_ / "div"), 0u);
}

TEST_F(CliTest, ClusterAndCommunitiesAreSeedDeterministic) {
  write_text(dir_ / "scenario.json", R"({"n_provinces": 6, "municipalities_per_province": 3,
                                         "population_per_municipality": 10, "days": 8, "seed": 2})");
  ASSERT_EQ(run_cli("synth --config " + q(dir_ / "scenario.json") + " --out " + q(dir_ / "data"), log()), 0);
  ASSERT_EQ(run_cli("build-od --in " + q(dir_ / "data") + " --out " + q(dir_ / "od"), log()), 0);
  ASSERT_EQ(run_cli("aggregate --in " + q(dir_ / "od"), log()), 0);
  for (const char* run : {"a", "b"}) {
    ASSERT_EQ(run_cli("cluster --in " + q(dir_ / "od") + " --out " + q(dir_ / run) + " --seed 4 --k-range 2..4", log()), 0)
        << slurp(log());
    ASSERT_EQ(run_cli("communities --in " + q(dir_ / "od") + " --out " + q(dir_ / run) + " --seed 4", log()), 0)
        << slurp(log());
  }
  ASSERT_GT(file_count(dir_ / "a"), 0u);
  for (const auto& e : fs::recursive_directory_iterator(dir_ / "a"))
    if (e.is_regular_file())
      EXPECT_EQ(slurp(e.path()), slurp(dir_ / "b" / fs::relative(e.path(), dir_ / "a")))
          << fs::relative(e.path(), dir_ / "a");
  EXPECT_EQ(slurp(dir_ / "a/communities.csv").substr(0, 35), "date,community_count,sunday,flagged");
}
