#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "mobflow/diversity.hpp"
#include "mobflow/synth.hpp"
#include "mobflow/pipeline.hpp"
#include "oracles/oracles.hpp"

using namespace mobflow;
using namespace mobflow::diversity;

namespace {

constexpr std::size_t kItaly = 110;

od::DailyOD inflows(const std::vector<std::uint64_t>& counts, const char* date = "2020-03-02") {
  od::DailyOD od(parse_date(date), od::Granularity::province);
  for (std::size_t i = 0; i < counts.size(); ++i) od.add("S" + std::to_string(i), "A", counts[i]);
  return od;
}

}  // namespace

TEST(FlowDiversity, UniformOver109Sources) {
  const auto e = flow_diversity(inflows(std::vector<std::uint64_t>(109, 3)), "A", Direction::in, kItaly);
  ASSERT_TRUE(e);
  EXPECT_NEAR(*e, 0.9980571169641013, 1e-12);
  EXPECT_NEAR(*e, std::log(109.0) / std::log(110.0), 1e-12);
}

TEST(FlowDiversity, PointMassIsZero) {
  EXPECT_EQ(flow_diversity(inflows({5}), "A", Direction::in, kItaly), 0.0);
}

TEST(FlowDiversity, TwoSourceValue) {
  const auto e = flow_diversity(inflows({30, 10}), "A", Direction::in, kItaly);
  EXPECT_NEAR(*e, 0.11963354824566078, 1e-12);
}

TEST(FlowDiversity, OutDirectionAndSelfLoopSwitch) {
  od::DailyOD od(parse_date("2020-03-02"), od::Granularity::province);
  od.add("A", "B", 30);
  od.add("A", "C", 10);
  od.add("A", "A", 40);
  od.add("D", "A", 7);
  EXPECT_NEAR(*flow_diversity(od, "A", Direction::out, kItaly), 0.11963354824566078, 1e-12);
  EXPECT_EQ(*flow_diversity(od, "A", Direction::in, kItaly), 0.0);
  const auto with_self = flow_diversity(od, "A", Direction::out, kItaly, {.include_self_flow = true});
  EXPECT_NEAR(*with_self, oracle::entropy_of_counts({30, 10, 40}, kItaly), 1e-12);
}

TEST(FlowDiversity, AbsentWhenNoFlowAndErrors) {
  od::DailyOD od(parse_date("2020-03-02"), od::Granularity::province);
  od.add("A", "A", 4);  // self-flow only
  EXPECT_FALSE(flow_diversity(od, "A", Direction::in, kItaly));
  EXPECT_FALSE(flow_diversity(od, "Z", Direction::out, kItaly));
  EXPECT_THROW(flow_diversity(od, "A", Direction::in, 1), InvalidArgument);
  EXPECT_THROW(flow_diversity(od::DailyOD(od.date(), od::Granularity::municipality), "A", Direction::in, kItaly),
               InvalidArgument);
}

TEST(FlowDiversity, NFromTerritoryIndex) {
  TerritoryIndex idx;
  for (int i = 0; i < 5; ++i) idx.add_province("P" + std::to_string(i));
  const auto e = flow_diversity(inflows({1, 1, 1, 1}), "A", Direction::in, idx);
  EXPECT_NEAR(*e, std::log(4.0) / std::log(5.0), 1e-12);
}

TEST(DiversityProperty, MatchesDirectSummation) {
  std::mt19937_64 rng(31);
  for (int t = 0; t < 200; ++t) {
    std::vector<std::uint64_t> c(std::uniform_int_distribution<std::size_t>(1, 109)(rng));
    std::vector<double> cd;
    for (auto& x : c) {
      x = std::uniform_int_distribution<std::uint64_t>(1, 1000)(rng);
      cd.push_back(static_cast<double>(x));
    }
    EXPECT_NEAR(*flow_diversity(inflows(c), "A", Direction::in, kItaly), oracle::entropy_of_counts(cd, kItaly), 1e-12);
  }
}

TEST(DiversityProperty, ScaleInvariance) {
  std::mt19937_64 rng(32);
  for (int t = 0; t < 100; ++t) {
    std::vector<std::uint64_t> c(std::uniform_int_distribution<std::size_t>(1, 40)(rng));
    for (auto& x : c) x = std::uniform_int_distribution<std::uint64_t>(1, 500)(rng);
    auto scaled = c;
    const auto k = std::uniform_int_distribution<std::uint64_t>(2, 1000)(rng);
    for (auto& x : scaled) x *= k;
    EXPECT_NEAR(*flow_diversity(inflows(c), "A", Direction::in, kItaly),
                *flow_diversity(inflows(scaled), "A", Direction::in, kItaly), 1e-12);
  }
}

TEST(DiversityProperty, RangeBoundedByActiveSources) {
  std::mt19937_64 rng(33);
  for (int t = 0; t < 100; ++t) {
    std::vector<std::uint64_t> c(std::uniform_int_distribution<std::size_t>(1, 109)(rng));
    for (auto& x : c) x = std::uniform_int_distribution<std::uint64_t>(1, 50)(rng);
    const double e = *flow_diversity(inflows(c), "A", Direction::in, kItaly);
    EXPECT_GE(e, 0.0);
    EXPECT_LE(e, std::log(static_cast<double>(c.size())) / std::log(110.0) + 1e-12);
    EXPECT_LE(e, 1.0);
  }
}

TEST(DiversityProperty, LogBaseInvariance) {
  const std::vector<double> c{5, 9, 1, 22, 7};
  double t = 0.0;
  for (double x : c) t += x;
  for (double base : {2.0, 10.0, 3.7}) {
    double h = 0.0;
    for (double x : c) h -= (x / t) * std::log(x / t) / std::log(base);
    const double e = h / (std::log(110.0) / std::log(base));
    EXPECT_NEAR(e, *flow_diversity(inflows({5, 9, 1, 22, 7}), "A", Direction::in, kItaly), 1e-12);
  }
}

TEST(DiversityProperty, MergingEqualSourcesDecreasesEntropy) {
  std::mt19937_64 rng(34);
  for (int t = 0; t < 100; ++t) {
    std::vector<std::uint64_t> c(std::uniform_int_distribution<std::size_t>(0, 30)(rng));
    for (auto& x : c) x = std::uniform_int_distribution<std::uint64_t>(1, 50)(rng);
    const auto w = std::uniform_int_distribution<std::uint64_t>(1, 50)(rng);
    auto split = c;
    split.push_back(w);
    split.push_back(w);
    auto merged = c;
    merged.push_back(2 * w);
    EXPECT_LT(*flow_diversity(inflows(merged), "A", Direction::in, kItaly),
              *flow_diversity(inflows(split), "A", Direction::in, kItaly));
  }
}

TEST(DiversitySeriesTest, IdenticalDaysAndAbsentMarkers) {
  const std::vector<od::DailyOD> same{inflows({3, 4}, "2020-03-02"), inflows({3, 4}, "2020-03-03"),
                                      inflows({3, 4}, "2020-03-04")};
  const auto s = diversity_series(same, "A", Direction::in, kItaly);
  ASSERT_EQ(s.values.size(), 3u);
  EXPECT_EQ(s.values[0], s.values[1]);
  EXPECT_EQ(s.values[1], s.values[2]);

  const std::vector<od::DailyOD> gap{inflows({3, 4}, "2020-03-02"), inflows({}, "2020-03-03")};
  const auto g = diversity_series(gap, "A", Direction::in, kItaly);
  EXPECT_TRUE(g.values[0]);
  EXPECT_FALSE(g.values[1]);
}

TEST(WeekendContrastTest, ConstantSeries) {
  DiversitySeries s;
  const Date start = parse_date("2020-03-02");
  for (int d = 0; d < 28; ++d) {
    s.dates.push_back(start + std::chrono::days{d});
    s.values.push_back(0.4);
  }
  const auto c = weekend_contrast(s, start + std::chrono::days{14});
  for (const auto* cell : {&c.pre_weekday, &c.pre_weekend, &c.post_weekday, &c.post_weekend})
    EXPECT_DOUBLE_EQ(*cell->mean, 0.4);
  EXPECT_EQ(c.pre_weekday.defined, 10u);
  EXPECT_EQ(c.pre_weekend.defined, 4u);
}

TEST(WeekendContrastTest, WeekdayOneWeekendZero) {
  DiversitySeries s;
  const Date start = parse_date("2020-03-02");
  for (int d = 0; d < 28; ++d) {
    s.dates.push_back(start + std::chrono::days{d});
    s.values.push_back(is_weekend(s.dates.back()) ? 0.0 : 1.0);
  }
  const auto c = weekend_contrast(s, start + std::chrono::days{14});
  EXPECT_EQ(*c.pre_weekday.mean, 1.0);
  EXPECT_EQ(*c.post_weekday.mean, 1.0);
  EXPECT_EQ(*c.pre_weekend.mean, 0.0);
  EXPECT_EQ(*c.post_weekend.mean, 0.0);
}

TEST(WeekendContrastTest, EmptyCellsAndAbsentCounts) {
  DiversitySeries s;
  s.dates = {parse_date("2020-03-02"), parse_date("2020-03-03"), parse_date("2020-03-09")};
  s.values = {0.5, std::nullopt, 0.7};
  const auto c = weekend_contrast(s, parse_date("2020-03-09"));
  EXPECT_DOUBLE_EQ(*c.pre_weekday.mean, 0.5);
  EXPECT_EQ(c.pre_weekday.absent, 1u);
  EXPECT_FALSE(c.pre_weekend.mean);
  EXPECT_FALSE(c.post_weekend.mean);
  EXPECT_DOUBLE_EQ(*c.post_weekday.mean, 0.7);
}

TEST(DiversityCsv, LongAndWideFormats) {
  DiversitySeries a{"P1", Direction::in, {parse_date("2020-03-02"), parse_date("2020-03-03")}, {0.25, std::nullopt}};
  DiversitySeries b{"P2", Direction::in, a.dates, {0.5, 1.0}};
  const std::vector<DiversitySeries> both{a, b};
  EXPECT_EQ(to_csv(both),
            "date,province,direction,diversity\n"
            "2020-03-02,P1,in,0.25\n"
            "2020-03-03,P1,in,\n"
            "2020-03-02,P2,in,0.5\n"
            "2020-03-03,P2,in,1\n");
  EXPECT_EQ(to_wide_csv(both), "province,2020-03-02,2020-03-03\nP1,0.25,\nP2,0.5,1\n");
}

TEST(DiversityScenario, LockdownWeekendInversion) {
  const auto config = synth::lockdown_scenario(3);
  const auto sim = synth::simulate_daily_od(config);
  const synth::Generator gen(config);
  std::vector<od::DailyOD> prov;
  for (const auto& m : sim.municipality) prov.push_back(od::aggregate_to_province(m, gen.registry().territory()));
  const auto tables = pipeline::compute_diversity(prov, gen.registry().territory());
  const auto split = *config.lockdown_date();
  const auto c = pipeline::pooled_contrast(tables, split);
  EXPECT_LT(*c.post_weekend.mean, *c.post_weekday.mean);
  EXPECT_GE(*c.pre_weekend.mean, *c.pre_weekday.mean);
}
