#include <gtest/gtest.h>

#include <cmath>
#include <map>
#include <nlohmann/json.hpp>
#include <random>
#include <set>

#include "mobflow/cluster.hpp"
#include "mobflow/synth.hpp"

using namespace mobflow;
using namespace mobflow::cluster;

namespace {

SeriesMatrix random_matrix(std::size_t rows, std::size_t cols, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<std::string> ids;
  std::vector<Date> dates;
  std::vector<double> v;
  for (std::size_t i = 0; i < rows; ++i) ids.push_back("P" + std::to_string(i));
  for (std::size_t j = 0; j < cols; ++j) dates.push_back(parse_date("2020-03-01") + std::chrono::days{j});
  for (std::size_t i = 0; i < rows * cols; ++i) v.push_back(u(rng));
  return SeriesMatrix(ids, dates, v);
}

SeriesMatrix planted(const std::vector<double>& levels, std::size_t rows, std::uint64_t seed,
                     std::vector<std::size_t>* labels = nullptr) {
  const auto p = synth::planted_diversity_series(levels, rows, 30, seed);
  if (labels) *labels = p.labels;
  return build_series_matrix(p.series).matrix;
}

// True when the two labelings induce the same partition.
bool same_partition(const std::vector<std::size_t>& a, const std::vector<std::size_t>& b) {
  std::map<std::size_t, std::size_t> ab, ba;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (auto [it, ok] = ab.emplace(a[i], b[i]); !ok && it->second != b[i]) return false;
    if (auto [it, ok] = ba.emplace(b[i], a[i]); !ok && it->second != a[i]) return false;
  }
  return true;
}

double naive_silhouette(const SeriesMatrix& m, const std::vector<std::size_t>& a) {
  const std::size_t n = m.rows();
  double total = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    std::map<std::size_t, std::pair<double, std::size_t>> by;
    for (std::size_t j = 0; j < n; ++j) {
      if (j == i) continue;
      double d = 0.0;
      for (std::size_t c = 0; c < m.cols(); ++c) d += (m.row(i)[c] - m.row(j)[c]) * (m.row(i)[c] - m.row(j)[c]);
      by[a[j]].first += std::sqrt(d);
      ++by[a[j]].second;
    }
    if (!by.contains(a[i])) continue;  // singleton cluster scores 0
    const double own = by[a[i]].first / static_cast<double>(by[a[i]].second);
    double other = INFINITY;
    for (const auto& [c, s] : by)
      if (c != a[i]) other = std::min(other, s.first / static_cast<double>(s.second));
    total += (other - own) / std::max(own, other);
  }
  return total / static_cast<double>(n);
}

}  // namespace

TEST(Impute, LinearWithEdgeExtension) {
  const std::vector<std::optional<double>> v{std::nullopt, 0.2, std::nullopt, std::nullopt, 0.8, std::nullopt};
  const auto out = impute_linear(v);
  const std::vector<double> want{0.2, 0.2, 0.4, 0.6, 0.8, 0.8};
  for (std::size_t i = 0; i < want.size(); ++i) EXPECT_NEAR(out[i], want[i], 1e-15);
}

TEST(Impute, DropsMostlyAbsentProvinces) {
  const std::vector<Date> dates{parse_date("2020-03-01"), parse_date("2020-03-02"), parse_date("2020-03-03"),
                                parse_date("2020-03-04")};
  std::vector<diversity::DiversitySeries> s{
      {"A", diversity::Direction::in, dates, {0.1, std::nullopt, std::nullopt, 0.4}},
      {"B", diversity::Direction::in, dates, {0.1, std::nullopt, std::nullopt, std::nullopt}},
      {"C", diversity::Direction::in, dates, {std::nullopt, std::nullopt, std::nullopt, std::nullopt}}};
  const auto m = build_series_matrix(s);
  EXPECT_EQ(m.matrix.provinces(), (std::vector<std::string>{"A"}));
  EXPECT_EQ(m.dropped, (std::vector<std::string>{"B", "C"}));
  EXPECT_NEAR(m.matrix.row(0)[1], 0.2, 1e-15);
  s[1].dates.pop_back();
  EXPECT_THROW(build_series_matrix(s), InvalidArgument);
}

TEST(KMeans, SingleClusterIsColumnMean) {
  const auto m = random_matrix(15, 6, 1);
  const auto c = kmeans(m, 1, 7);
  double total_var = 0.0;
  for (std::size_t j = 0; j < m.cols(); ++j) {
    double mean = 0.0;
    for (std::size_t i = 0; i < m.rows(); ++i) mean += m.row(i)[j];
    mean /= static_cast<double>(m.rows());
    EXPECT_NEAR(c.centroids[0][j], mean, 1e-12);
    for (std::size_t i = 0; i < m.rows(); ++i) total_var += (m.row(i)[j] - mean) * (m.row(i)[j] - mean);
  }
  EXPECT_NEAR(c.inertia, total_var, 1e-10);
}

TEST(KMeans, EveryPointItsOwnCluster) {
  const auto m = random_matrix(9, 4, 2);
  const auto c = kmeans(m, 9, 3);
  EXPECT_NEAR(c.inertia, 0.0, 1e-20);
  EXPECT_EQ(std::set<std::size_t>(c.assignments.begin(), c.assignments.end()).size(), 9u);
}

TEST(KMeans, RecoversTwoPlantedGroups) {
  std::vector<std::size_t> labels;
  const auto m = planted({0.2, 0.8}, 40, 5, &labels);
  const auto c = kmeans(m, 2, 11);
  EXPECT_TRUE(same_partition(c.assignments, labels));
  // Noise sd 0.03 over 30 days: expected inertia ~ 40 * 30 * 0.03^2.
  EXPECT_LT(c.inertia, 2.0 * 40 * 30 * 0.03 * 0.03);
}

TEST(KMeans, InvariantsHold) {
  const auto m = random_matrix(30, 5, 4);
  for (std::size_t k = 1; k <= 8; ++k) {
    const auto c = kmeans(m, k, 5);
    ASSERT_EQ(c.centroids.size(), k);
    std::vector<std::size_t> size(k, 0);
    double inertia = 0.0;
    for (std::size_t i = 0; i < m.rows(); ++i) {
      ASSERT_LT(c.assignments[i], k);
      ++size[c.assignments[i]];
      for (std::size_t j = 0; j < m.cols(); ++j)
        inertia += std::pow(m.row(i)[j] - c.centroids[c.assignments[i]][j], 2);
    }
    for (auto s : size) EXPECT_GT(s, 0u);
    EXPECT_NEAR(c.inertia, inertia, 1e-10);
    for (std::size_t e = 0; e < k; ++e)
      for (std::size_t j = 0; j < m.cols(); ++j) {
        EXPECT_NEAR(c.band_lower[e][j] + c.band_upper[e][j], 2 * c.centroids[e][j], 1e-12);
        EXPECT_LE(c.band_lower[e][j], c.band_upper[e][j]);
      }
  }
}

TEST(KMeans, BandIsMeanPlusMinusStd) {
  const SeriesMatrix m({"a", "b", "c"}, {parse_date("2020-03-01")}, {0.0, 0.2, 1.0});
  const auto c = kmeans(m, 2, 1);
  // Clusters {0, 0.2} and {1.0}; labels ordered by level.
  EXPECT_NEAR(c.centroids[0][0], 0.1, 1e-15);
  EXPECT_NEAR(c.band_lower[0][0], 0.0, 1e-15);
  EXPECT_NEAR(c.band_upper[0][0], 0.2, 1e-15);
  EXPECT_NEAR(c.band_lower[1][0], 1.0, 1e-15);
}

TEST(KMeans, EmptyClusterReseededAtFarthestPoint) {
  const SeriesMatrix m({"a", "b", "c", "d"}, {parse_date("2020-03-01")}, {0.0, 0.1, 0.9, 1.0});
  // Two identical initial centroids: the second cluster starts empty.
  const auto c = kmeans_from(m, {{0.05}, {0.05}, {5.0}});
  std::vector<std::size_t> size(3, 0);
  for (auto a : c.assignments) ++size[a];
  for (auto s : size) EXPECT_GT(s, 0u);
  EXPECT_THROW(kmeans_from(m, {}), InvalidArgument);
}

TEST(KMeans, ExactlyReproducible) {
  const auto m = random_matrix(50, 8, 6);
  const auto a = kmeans(m, 4, 99, {.restarts = 5});
  const auto b = kmeans(m, 4, 99, {.restarts = 5});
  EXPECT_EQ(a.assignments, b.assignments);
  EXPECT_EQ(a.inertia, b.inertia);
  EXPECT_EQ(a.centroids, b.centroids);
}

TEST(KMeans, RejectsBadK) {
  const auto m = random_matrix(5, 2, 7);
  EXPECT_THROW(kmeans(m, 0, 1), InvalidArgument);
  EXPECT_THROW(kmeans(m, 6, 1), InvalidArgument);
}

TEST(Silhouette, MatchesNaiveComputation) {
  const auto m = random_matrix(25, 4, 8);
  for (std::size_t k = 2; k <= 6; ++k) {
    const auto c = kmeans(m, k, 3);
    EXPECT_NEAR(silhouette(m, c.assignments, k), naive_silhouette(m, c.assignments), 1e-12);
  }
}

TEST(SelectK, FivePlantedLevels) {
  const auto m = planted({0.15, 0.3, 0.45, 0.6, 0.75}, 110, 3);
  const auto sel = select_k(m, 2, 20, 3);
  EXPECT_EQ(sel.k_star, 5u);
  EXPECT_FALSE(sel.degenerate);
  EXPECT_EQ(sel.diagnostics.size(), 19u);
}

TEST(SelectK, TwoPlantedLevelsWithElbow) {
  const auto m = planted({0.2, 0.8}, 60, 4);
  const auto sel = select_k(m, 2, 20, 4);
  EXPECT_EQ(sel.k_star, 2u);
  ASSERT_TRUE(sel.elbow_k);
  EXPECT_EQ(*sel.elbow_k, 2u);
}

TEST(SelectK, IdenticalSeriesAreDegenerate) {
  const SeriesMatrix m({"a", "b", "c", "d"}, {parse_date("2020-03-01"), parse_date("2020-03-02")},
                       {0.3, 0.4, 0.3, 0.4, 0.3, 0.4, 0.3, 0.4});
  const auto sel = select_k(m, 2, 20, 1);
  EXPECT_TRUE(sel.degenerate);
  EXPECT_EQ(sel.k_star, 1u);
}

TEST(SelectK, InertiaNonIncreasingInK) {
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    const auto m = random_matrix(40, 6, seed);
    const auto sel = select_k(m, 2, 20, seed);
    for (std::size_t i = 1; i < sel.diagnostics.size(); ++i)
      EXPECT_LE(sel.diagnostics[i].inertia, sel.diagnostics[i - 1].inertia) << "seed " << seed << " k " << sel.diagnostics[i].k;
  }
}

TEST(SelectK, RangeHandling) {
  const auto m = random_matrix(6, 3, 9);
  const auto sel = select_k(m, 2, 20, 1);
  EXPECT_EQ(sel.diagnostics.back().k, 6u);  // clamped to the row count
  EXPECT_THROW(select_k(m, 1, 5, 1), InvalidArgument);
}

TEST(ClusterExport, JsonAndMembers) {
  const auto m = planted({0.2, 0.8}, 10, 2);
  const auto sel = select_k(m, 2, 4, 2);
  const auto j = to_json(m, sel, {"PX"});
  EXPECT_EQ(j["k_star"], sel.k_star);
  EXPECT_EQ(j["diagnostics"].size(), 3u);
  EXPECT_EQ(j["assignments"].size(), 10u);
  EXPECT_EQ(j["centroids"].size(), sel.k_star);
  EXPECT_EQ(j["dropped"][0], "PX");
  const auto csv = members_csv(m, sel.best);
  EXPECT_EQ(csv.rfind("cluster,province\n", 0), 0u);
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 11);
}
