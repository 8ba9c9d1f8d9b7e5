#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "mobflow/diversity.hpp"
#include "mobflow/error.hpp"
#include "mobflow/random.hpp"
#include "mobflow/time.hpp"

namespace mobflow::cluster {

// provinces x dates, row-major, no missing values.
class SeriesMatrix {
 public:
  SeriesMatrix() = default;
  SeriesMatrix(std::vector<std::string> provinces, std::vector<Date> dates, std::vector<double> values)
      : provinces_(std::move(provinces)), dates_(std::move(dates)), values_(std::move(values)) {
    if (values_.size() != provinces_.size() * dates_.size())
      throw InvalidArgument("series matrix is not rectangular");
  }

  std::size_t rows() const { return provinces_.size(); }
  std::size_t cols() const { return dates_.size(); }
  std::span<const double> row(std::size_t i) const {
    return std::span<const double>(values_).subspan(i * cols(), cols());
  }
  const std::vector<std::string>& provinces() const { return provinces_; }
  const std::vector<Date>& dates() const { return dates_; }

 private:
  std::vector<std::string> provinces_;
  std::vector<Date> dates_;
  std::vector<double> values_;
};

struct ImputedMatrix {
  SeriesMatrix matrix;
  std::vector<std::string> dropped;  // provinces with more than half the days absent
};

// Fills absent values by linear interpolation between the nearest defined
// neighbours, extending the first/last defined value to the edges.
inline std::vector<double> impute_linear(std::span<const std::optional<double>> values) {
  std::vector<double> out(values.size(), 0.0);
  std::optional<std::size_t> prev;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (!values[i]) continue;
    out[i] = *values[i];
    if (!prev) {
      for (std::size_t j = 0; j < i; ++j) out[j] = *values[i];
    } else {
      const double a = *values[*prev], b = *values[i];
      for (std::size_t j = *prev + 1; j < i; ++j)
        out[j] = a + (b - a) * static_cast<double>(j - *prev) / static_cast<double>(i - *prev);
    }
    prev = i;
  }
  if (prev)
    for (std::size_t j = *prev + 1; j < values.size(); ++j) out[j] = *values[*prev];
  return out;
}

inline ImputedMatrix build_series_matrix(std::span<const diversity::DiversitySeries> series) {
  ImputedMatrix out;
  std::vector<std::string> provinces;
  std::vector<double> values;
  std::vector<Date> dates = series.empty() ? std::vector<Date>{} : series.front().dates;
  for (const auto& s : series) {
    if (s.dates != dates) throw InvalidArgument("diversity series must share the same dates");
    const auto absent = static_cast<std::size_t>(std::count(s.values.begin(), s.values.end(), std::nullopt));
    if (2 * absent > s.values.size() || (absent == s.values.size())) {
      out.dropped.push_back(s.province);
      continue;
    }
    provinces.push_back(s.province);
    const auto row = impute_linear(s.values);
    values.insert(values.end(), row.begin(), row.end());
  }
  out.matrix = SeriesMatrix(std::move(provinces), std::move(dates), std::move(values));
  return out;
}

struct Clustering {
  std::size_t k = 0;
  std::vector<std::size_t> assignments;  // row -> label in [0, k)
  std::vector<std::vector<double>> centroids;
  double inertia = 0.0;
  std::vector<std::vector<double>> band_lower;  // centroid - std of members, per date
  std::vector<std::vector<double>> band_upper;
  std::size_t iterations = 0;
};

struct KMeansOptions {
  std::size_t restarts = 10;
  std::size_t max_iterations = 300;
};

namespace detail {

inline double sq_dist(std::span<const double> a, std::span<const double> b) {
  double d = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double t = a[i] - b[i];
    d += t * t;
  }
  return d;
}

inline std::size_t nearest(std::span<const double> x, const std::vector<std::vector<double>>& centroids,
                           double* dist = nullptr) {
  std::size_t best = 0;
  double bd = std::numeric_limits<double>::infinity();
  for (std::size_t c = 0; c < centroids.size(); ++c) {
    const double d = sq_dist(x, centroids[c]);
    if (d < bd) {
      bd = d;
      best = c;
    }
  }
  if (dist) *dist = bd;
  return best;
}

inline std::vector<std::vector<double>> kmeanspp_seed(const SeriesMatrix& m, std::size_t k, Rng& rng) {
  std::vector<std::vector<double>> centroids;
  std::uniform_int_distribution<std::size_t> pick(0, m.rows() - 1);
  const auto first = m.row(pick(rng));
  centroids.emplace_back(first.begin(), first.end());
  std::vector<double> d2(m.rows());
  while (centroids.size() < k) {
    double total = 0.0;
    for (std::size_t i = 0; i < m.rows(); ++i) {
      nearest(m.row(i), centroids, &d2[i]);
      total += d2[i];
    }
    std::size_t chosen = 0;
    if (total > 0.0) {
      std::uniform_real_distribution<double> u(0.0, total);
      double r = u(rng), acc = 0.0;
      chosen = m.rows() - 1;
      for (std::size_t i = 0; i < m.rows(); ++i) {
        acc += d2[i];
        if (r < acc && d2[i] > 0.0) {
          chosen = i;
          break;
        }
      }
    } else {
      chosen = pick(rng);
    }
    const auto row = m.row(chosen);
    centroids.emplace_back(row.begin(), row.end());
  }
  return centroids;
}

// Lloyd iterations from the given centroids. Empty clusters are re-seeded
// at the point farthest from its centroid among clusters with >1 member.
inline Clustering lloyd(const SeriesMatrix& m, std::vector<std::vector<double>> centroids, std::size_t max_iterations) {
  const std::size_t n = m.rows(), k = centroids.size(), dim = m.cols();
  Clustering c;
  c.k = k;
  c.assignments.assign(n, k);  // sentinel: nothing assigned yet
  std::vector<double> dist(n);
  for (std::size_t it = 0; it < max_iterations; ++it) {
    bool changed = false;
    for (std::size_t i = 0; i < n; ++i) {
      const auto a = nearest(m.row(i), centroids, &dist[i]);
      if (a != c.assignments[i]) {
        c.assignments[i] = a;
        changed = true;
      }
    }
    std::vector<std::size_t> size(k, 0);
    for (auto a : c.assignments) ++size[a];
    for (std::size_t e = 0; e < k; ++e) {
      if (size[e] != 0) continue;
      std::size_t far = n;
      double fd = -1.0;
      for (std::size_t i = 0; i < n; ++i)
        if (size[c.assignments[i]] > 1 && dist[i] > fd) {
          fd = dist[i];
          far = i;
        }
      if (far == n) break;  // fewer points than clusters
      --size[c.assignments[far]];
      c.assignments[far] = e;
      size[e] = 1;
      dist[far] = 0.0;
      changed = true;
    }
    for (auto& ctr : centroids) std::fill(ctr.begin(), ctr.end(), 0.0);
    for (std::size_t i = 0; i < n; ++i) {
      const auto r = m.row(i);
      auto& ctr = centroids[c.assignments[i]];
      for (std::size_t j = 0; j < dim; ++j) ctr[j] += r[j];
    }
    for (std::size_t e = 0; e < k; ++e)
      if (size[e] > 0)
        for (auto& v : centroids[e]) v /= static_cast<double>(size[e]);
    c.iterations = it + 1;
    if (!changed) break;
  }
  c.centroids = std::move(centroids);
  c.inertia = 0.0;
  for (std::size_t i = 0; i < n; ++i) c.inertia += sq_dist(m.row(i), c.centroids[c.assignments[i]]);
  return c;
}

// Relabels clusters by ascending centroid mean level and fills the bands.
inline void finalize(const SeriesMatrix& m, Clustering& c) {
  std::vector<double> level(c.k, 0.0);
  for (std::size_t e = 0; e < c.k; ++e)
    level[e] = c.centroids[e].empty()
                   ? 0.0
                   : std::accumulate(c.centroids[e].begin(), c.centroids[e].end(), 0.0) /
                         static_cast<double>(c.centroids[e].size());
  std::vector<std::size_t> order(c.k);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) { return level[a] < level[b]; });
  std::vector<std::size_t> relabel(c.k);
  std::vector<std::vector<double>> centroids(c.k);
  for (std::size_t i = 0; i < c.k; ++i) {
    relabel[order[i]] = i;
    centroids[i] = std::move(c.centroids[order[i]]);
  }
  c.centroids = std::move(centroids);
  for (auto& a : c.assignments) a = relabel[a];

  const std::size_t dim = m.cols();
  c.band_lower.assign(c.k, std::vector<double>(dim, 0.0));
  c.band_upper.assign(c.k, std::vector<double>(dim, 0.0));
  std::vector<std::vector<double>> var(c.k, std::vector<double>(dim, 0.0));
  std::vector<std::size_t> size(c.k, 0);
  for (std::size_t i = 0; i < m.rows(); ++i) {
    const auto a = c.assignments[i];
    ++size[a];
    const auto r = m.row(i);
    for (std::size_t j = 0; j < dim; ++j) {
      const double t = r[j] - c.centroids[a][j];
      var[a][j] += t * t;
    }
  }
  for (std::size_t e = 0; e < c.k; ++e)
    for (std::size_t j = 0; j < dim; ++j) {
      const double sd = size[e] ? std::sqrt(var[e][j] / static_cast<double>(size[e])) : 0.0;
      c.band_lower[e][j] = c.centroids[e][j] - sd;
      c.band_upper[e][j] = c.centroids[e][j] + sd;
    }
}

}  // namespace detail

// Lloyd's algorithm with k-means++ seeding; best inertia over independent
// restarts, restart r seeded by mix_seed(seed, r).
inline Clustering kmeans(const SeriesMatrix& m, std::size_t k, std::uint64_t seed, KMeansOptions options = {}) {
  if (k < 1 || k > m.rows())
    throw InvalidArgument("k must lie in [1, " + std::to_string(m.rows()) + "], got " + std::to_string(k));
  std::optional<Clustering> best;
  for (std::size_t r = 0; r < std::max<std::size_t>(options.restarts, 1); ++r) {
    auto rng = make_rng(seed, r);
    auto c = detail::lloyd(m, detail::kmeanspp_seed(m, k, rng), options.max_iterations);
    if (!best || c.inertia < best->inertia) best = std::move(c);
  }
  detail::finalize(m, *best);
  return *best;
}

// Lloyd from explicit initial centroids.
inline Clustering kmeans_from(const SeriesMatrix& m, std::vector<std::vector<double>> init,
                              KMeansOptions options = {}) {
  if (init.empty() || init.size() > m.rows()) throw InvalidArgument("bad initial centroid count");
  auto c = detail::lloyd(m, std::move(init), options.max_iterations);
  detail::finalize(m, c);
  return c;
}

// Mean silhouette with Euclidean distance; members of singleton clusters
// score 0.
inline double silhouette(const SeriesMatrix& m, std::span<const std::size_t> assignments, std::size_t k) {
  const std::size_t n = m.rows();
  if (n == 0 || k < 2) return 0.0;
  std::vector<std::size_t> size(k, 0);
  for (auto a : assignments) ++size[a];
  double total = 0.0;
  std::vector<double> sum(k);
  for (std::size_t i = 0; i < n; ++i) {
    std::fill(sum.begin(), sum.end(), 0.0);
    for (std::size_t j = 0; j < n; ++j)
      if (j != i) sum[assignments[j]] += std::sqrt(detail::sq_dist(m.row(i), m.row(j)));
    const auto own = assignments[i];
    if (size[own] <= 1) continue;
    const double a = sum[own] / static_cast<double>(size[own] - 1);
    double b = std::numeric_limits<double>::infinity();
    for (std::size_t c = 0; c < k; ++c)
      if (c != own && size[c] > 0) b = std::min(b, sum[c] / static_cast<double>(size[c]));
    const double denom = std::max(a, b);
    if (denom > 0.0 && std::isfinite(b)) total += (b - a) / denom;
  }
  return total / static_cast<double>(n);
}

struct KDiagnostic {
  std::size_t k = 0;
  double inertia = 0.0;
  double silhouette = 0.0;
};

struct Selection {
  std::size_t k_star = 1;
  bool degenerate = false;  // silhouette undefined (identical series or < 3 rows)
  std::optional<std::size_t> elbow_k;
  std::vector<KDiagnostic> diagnostics;
  Clustering best;
};

// Runs k-means for every k in [k_min, k_max] (clamped to the row count) and
// picks the k with the highest mean silhouette; ties go to the smaller k.
// Each k also tries a warm start from the (k-1) solution plus the farthest
// point, so inertia is non-increasing in k. The elbow (largest second
// difference of inertia, using k-1 = 1 when available) is a diagnostic.
inline Selection select_k(const SeriesMatrix& m, std::size_t k_min, std::size_t k_max, std::uint64_t seed,
                          KMeansOptions options = {}) {
  if (k_min < 2) throw InvalidArgument("k range must start at 2 or above");
  Selection sel;
  const std::size_t n = m.rows();
  if (n == 0) throw InvalidArgument("select_k on an empty matrix");
  const auto base = kmeans(m, 1, seed, options);
  k_max = std::min(k_max, n);
  if (base.inertia <= 1e-12 * static_cast<double>(std::max<std::size_t>(m.cols(), 1)) || k_max < k_min || n < 3) {
    sel.degenerate = true;
    sel.k_star = 1;
    sel.best = base;
    return sel;
  }
  std::vector<double> inertia{base.inertia};  // index k - k_min + 1
  Clustering prev = base;
  for (std::size_t k = 2; k <= k_max; ++k) {
    auto fresh = kmeans(m, k, mix_seed(seed, 1000 + k), options);
    auto init = prev.centroids;
    std::size_t far = 0;
    double fd = -1.0;
    for (std::size_t i = 0; i < n; ++i) {
      double d = 0.0;
      detail::nearest(m.row(i), init, &d);
      if (d > fd) {
        fd = d;
        far = i;
      }
    }
    init.emplace_back(m.row(far).begin(), m.row(far).end());
    auto warm = kmeans_from(m, std::move(init), options);
    auto& chosen = warm.inertia < fresh.inertia ? warm : fresh;
    if (k >= k_min) {
      const double s = silhouette(m, chosen.assignments, k);
      sel.diagnostics.push_back({k, chosen.inertia, s});
      if (sel.diagnostics.size() == 1 || s > sel.diagnostics[sel.k_star - k_min].silhouette + 1e-12) {
        sel.k_star = k;
        sel.best = chosen;
      }
    }
    inertia.push_back(chosen.inertia);
    prev = std::move(chosen);
  }
  // inertia[i] holds k = i + 1.
  double best_d2 = -std::numeric_limits<double>::infinity();
  for (std::size_t k = std::max<std::size_t>(k_min, 2); k + 1 <= k_max; ++k) {
    const double d2 = inertia[k - 2] - 2.0 * inertia[k - 1] + inertia[k];
    if (d2 > best_d2) {
      best_d2 = d2;
      sel.elbow_k = k;
    }
  }
  return sel;
}

inline nlohmann::json to_json(const SeriesMatrix& m, const Selection& sel, const std::vector<std::string>& dropped = {}) {
  nlohmann::json j;
  j["k_star"] = sel.k_star;
  j["degenerate"] = sel.degenerate;
  j["elbow_k"] = sel.elbow_k ? nlohmann::json(*sel.elbow_k) : nlohmann::json(nullptr);
  auto& diag = j["diagnostics"] = nlohmann::json::array();
  for (const auto& d : sel.diagnostics) diag.push_back({{"k", d.k}, {"inertia", d.inertia}, {"silhouette", d.silhouette}});
  std::vector<std::string> dates;
  for (auto d : m.dates()) dates.push_back(format_date(d));
  j["dates"] = dates;
  auto& assign = j["assignments"] = nlohmann::json::object();
  for (std::size_t i = 0; i < m.rows(); ++i) assign[m.provinces()[i]] = sel.best.assignments[i];
  j["centroids"] = sel.best.centroids;
  auto& bands = j["bands"] = nlohmann::json::array();
  for (std::size_t e = 0; e < sel.best.k; ++e)
    bands.push_back({{"lower", sel.best.band_lower[e]}, {"upper", sel.best.band_upper[e]}});
  j["inertia"] = sel.best.inertia;
  j["dropped"] = dropped;
  return j;
}

inline std::string members_csv(const SeriesMatrix& m, const Clustering& c) {
  std::vector<std::pair<std::size_t, std::string>> rows;
  for (std::size_t i = 0; i < m.rows(); ++i) rows.emplace_back(c.assignments[i], m.provinces()[i]);
  std::sort(rows.begin(), rows.end());
  std::string out = "cluster,province\n";
  for (const auto& [c_, p] : rows) out += std::to_string(c_) + "," + p + "\n";
  return out;
}

}  // namespace mobflow::cluster
