#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <numeric>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "mobflow/error.hpp"
#include "mobflow/od.hpp"
#include "mobflow/random.hpp"
#include "mobflow/territory.hpp"
#include "mobflow/time.hpp"

namespace mobflow::community {

struct Edge {
  std::uint32_t target = 0;
  double weight = 0.0;
};

// Directed weighted graph over named nodes. Parallel edges are merged.
class FlowGraph {
 public:
  FlowGraph() = default;
  explicit FlowGraph(std::vector<std::string> names) : names_(std::move(names)), out_(names_.size()) {}

  void add_edge(std::uint32_t u, std::uint32_t v, double w) {
    if (!(w > 0.0)) throw InvalidArgument("edge weights must be positive");
    if (u >= size() || v >= size()) throw InvalidArgument("edge endpoint out of range");
    auto& edges = out_[u];
    auto it = std::find_if(edges.begin(), edges.end(), [&](const Edge& e) { return e.target == v; });
    if (it != edges.end())
      it->weight += w;
    else
      edges.push_back({v, w});
  }

  std::size_t size() const { return names_.size(); }
  const std::string& name(std::uint32_t i) const { return names_.at(i); }
  const std::vector<std::string>& names() const { return names_; }
  std::span<const Edge> out_edges(std::uint32_t u) const { return out_.at(u); }

  std::size_t edge_count() const {
    std::size_t n = 0;
    for (const auto& e : out_) n += e.size();
    return n;
  }

  // Nodes are every municipality in the matrix plus `extra_nodes`, sorted by
  // name; edge weights are trip counts.
  static FlowGraph from_od(const od::DailyOD& od, std::span<const std::string> extra_nodes = {}) {
    std::set<std::string> ids(extra_nodes.begin(), extra_nodes.end());
    for (const auto& [key, n] : od.cells()) {
      ids.insert(key.first);
      ids.insert(key.second);
    }
    FlowGraph g(std::vector<std::string>(ids.begin(), ids.end()));
    std::map<std::string_view, std::uint32_t> index;
    for (std::uint32_t i = 0; i < g.size(); ++i) index.emplace(g.names_[i], i);
    for (const auto& [key, n] : od.cells())
      g.add_edge(index.at(key.first), index.at(key.second), static_cast<double>(n));
    return g;
  }

 private:
  std::vector<std::string> names_;
  std::vector<std::vector<Edge>> out_;
};

struct FlowEdge {
  std::uint32_t source = 0;
  std::uint32_t target = 0;
  double flow = 0.0;
};

struct StationaryFlow {
  std::vector<double> visit_rates;
  std::vector<FlowEdge> edge_flows;
  double teleport = 0.15;
  std::size_t iterations = 0;
  double residual = 0.0;
};

struct FlowOptions {
  double teleport = 0.15;
  double tolerance = 1e-12;
  std::size_t max_iterations = 10000;
};

// Power iteration on (1 - tau) P + tau U, P row-normalized by out-weight
// and dangling rows uniform. Edge flows exclude teleportation steps:
// q(u->v) = (1 - tau) p_u w_uv / out_w(u).
inline StationaryFlow stationary_flow(const FlowGraph& g, FlowOptions options = {}) {
  const std::size_t n = g.size();
  if (n == 0) throw InvalidArgument("stationary flow of an empty graph");
  const double tau = options.teleport;
  std::vector<double> out_w(n, 0.0);
  for (std::uint32_t u = 0; u < n; ++u)
    for (const auto& e : g.out_edges(u)) out_w[u] += e.weight;

  StationaryFlow f;
  f.teleport = tau;
  std::vector<double> p(n, 1.0 / static_cast<double>(n)), next(n);
  const double inv_n = 1.0 / static_cast<double>(n);
  double residual = std::numeric_limits<double>::infinity();
  std::size_t it = 0;
  while (it < options.max_iterations) {
    ++it;
    double dangling = 0.0;
    for (std::uint32_t u = 0; u < n; ++u)
      if (out_w[u] == 0.0) dangling += p[u];
    const double base = tau * inv_n + (1.0 - tau) * dangling * inv_n;
    std::fill(next.begin(), next.end(), base);
    for (std::uint32_t u = 0; u < n; ++u) {
      if (out_w[u] == 0.0) continue;
      const double scale = (1.0 - tau) * p[u] / out_w[u];
      for (const auto& e : g.out_edges(u)) next[e.target] += scale * e.weight;
    }
    const double sum = std::accumulate(next.begin(), next.end(), 0.0);
    residual = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      next[i] /= sum;
      residual += std::abs(next[i] - p[i]);
    }
    p.swap(next);
    if (residual < options.tolerance) break;
  }
  if (!(residual < options.tolerance))
    throw ConvergenceError("stationary flow did not converge in " + std::to_string(it) + " iterations", residual);
  f.iterations = it;
  f.residual = residual;
  f.visit_rates = std::move(p);
  for (std::uint32_t u = 0; u < n; ++u) {
    if (out_w[u] == 0.0) continue;
    for (const auto& e : g.out_edges(u))
      f.edge_flows.push_back({u, e.target, (1.0 - tau) * f.visit_rates[u] * e.weight / out_w[u]});
  }
  return f;
}

namespace detail {

inline double plogp(double x) { return x > 0.0 ? x * std::log(x) : 0.0; }

}  // namespace detail

// Two-level map equation in bits:
//   L = q H(Q) + sum_i p_i H(P_i)
// with q_i the flow leaving module i, q = sum_i q_i and p_i = q_i + the
// module's visit rates. Expanded into plogp terms.
inline double map_equation(std::span<const std::uint32_t> assignment, const StationaryFlow& flow) {
  const std::size_t n = flow.visit_rates.size();
  if (assignment.size() != n) throw InvalidArgument("partition does not cover the flow's nodes");
  const std::uint32_t m = n == 0 ? 0 : *std::max_element(assignment.begin(), assignment.end()) + 1;
  std::vector<double> exit(m, 0.0), vol(m, 0.0);
  for (std::size_t a = 0; a < n; ++a) vol[assignment[a]] += flow.visit_rates[a];
  for (const auto& e : flow.edge_flows)
    if (assignment[e.source] != assignment[e.target]) exit[assignment[e.source]] += e.flow;
  double sum_exit = 0.0, exit_term = 0.0, module_term = 0.0, node_term = 0.0;
  for (std::uint32_t i = 0; i < m; ++i) {
    sum_exit += exit[i];
    exit_term += detail::plogp(exit[i]);
    module_term += detail::plogp(exit[i] + vol[i]);
  }
  for (double p : flow.visit_rates) node_term += detail::plogp(p);
  return (detail::plogp(sum_exit) - 2.0 * exit_term + module_term - node_term) / std::log(2.0);
}

struct LevelTrace {
  std::size_t round = 0;
  std::size_t level = 0;
  std::size_t modules = 0;
  double incremental = 0.0;  // codelength maintained by the optimizer
  double recomputed = 0.0;   // map_equation() on the unfolded assignment
};

struct Partition {
  std::vector<std::uint32_t> assignment;  // node -> module, numbered by first appearance
  double codelength = 0.0;
  std::size_t module_count = 0;
  std::size_t best_trial = 0;
  std::vector<LevelTrace> trace;
};

struct InfomapOptions {
  double teleport = 0.15;
  std::size_t trials = 10;
  // A move must change the codelength by less than -min_gain bits.
  double min_gain = 1e-12;
  std::size_t max_rounds = 50;
  bool record_trace = false;
};

inline std::vector<std::uint32_t> canonical_labels(std::span<const std::uint32_t> assignment) {
  std::vector<std::uint32_t> out(assignment.size());
  std::map<std::uint32_t, std::uint32_t> relabel;
  for (std::size_t i = 0; i < assignment.size(); ++i) {
    auto [it, _] = relabel.try_emplace(assignment[i], static_cast<std::uint32_t>(relabel.size()));
    out[i] = it->second;
  }
  return out;
}

namespace detail {

// Greedy map-equation optimizer on one trial. Nodes of the current level are
// moved between modules; converged levels are aggregated into super-nodes.
class Optimizer {
 public:
  Optimizer(const StationaryFlow& flow, Rng& rng, const InfomapOptions& options)
      : flow_(&flow), rng_(&rng), options_(options) {
    for (double p : flow.visit_rates) node_term_ += plogp(p);
  }

  // Fine tuning: original nodes start in `initial` modules and move freely.
  std::vector<std::uint32_t> run(std::vector<std::uint32_t> initial, std::size_t round,
                                 std::vector<LevelTrace>* trace) {
    const std::size_t n = flow_->visit_rates.size();
    std::vector<std::uint32_t> identity(n);
    std::iota(identity.begin(), identity.end(), 0u);
    return descend(identity, canonical_labels(initial), {}, round, trace);
  }

  // Submodules of `current` from a descent confined to each module, scored
  // by the global codelength.
  std::vector<std::uint32_t> confined_split(std::span<const std::uint32_t> current, std::size_t round) {
    const std::size_t n = flow_->visit_rates.size();
    std::vector<std::uint32_t> identity(n);
    std::iota(identity.begin(), identity.end(), 0u);
    return canonical_labels(descend(identity, identity, canonical_labels(current), round, nullptr));
  }

  // Coarse tuning: the submodules `sub` (a refinement of `current`) start in
  // their parent modules and move as units.
  std::vector<std::uint32_t> run_coarse(std::span<const std::uint32_t> current, std::span<const std::uint32_t> sub,
                                        std::size_t round, std::vector<LevelTrace>* trace) {
    const auto parent = canonical_labels(current);
    const auto subs = canonical_labels(sub);
    const std::uint32_t count = *std::max_element(subs.begin(), subs.end()) + 1;
    std::vector<std::uint32_t> sub_module(count);
    for (std::size_t i = 0; i < subs.size(); ++i) sub_module[subs[i]] = parent[i];
    return descend(subs, sub_module, {}, round, trace);
  }

  double codelength() const {
    return (plogp(sum_exit_) - 2.0 * exit_log_exit_ + total_log_total_ - node_term_) / std::log(2.0);
  }

 private:
  struct Level {
    std::vector<double> flow;
    std::vector<std::vector<std::pair<std::uint32_t, double>>> out, in;
    std::vector<std::uint32_t> parent;  // empty: unconstrained
  };

  // Greedy descent over the nodes of `base` (original node -> base node),
  // starting from `module` (base node -> module). With `parent` (base node
  // -> group) non-empty, nodes only join modules of their own group.
  std::vector<std::uint32_t> descend(std::vector<std::uint32_t> original_to_node, std::vector<std::uint32_t> module,
                                     std::vector<std::uint32_t> parent, std::size_t round,
                                     std::vector<LevelTrace>* trace) {
    const std::size_t n = flow_->visit_rates.size();
    Level identity;
    identity.flow = flow_->visit_rates;
    identity.out.resize(n);
    identity.in.resize(n);
    for (const auto& e : flow_->edge_flows) {
      if (e.source == e.target) continue;
      add_link(identity.out[e.source], e.target, e.flow);
      add_link(identity.in[e.target], e.source, e.flow);
    }
    const std::uint32_t base_count = *std::max_element(original_to_node.begin(), original_to_node.end()) + 1;
    Level level = base_count == n ? std::move(identity) : aggregate(identity, original_to_node, base_count);
    level.parent = std::move(parent);

    for (std::size_t depth = 0;; ++depth) {
      const std::size_t nodes = level.flow.size();
      init_modules(level, module);
      while (sweep(level, module)) {
      }
      const auto compact = canonical_labels(module);
      const std::uint32_t module_count = compact.empty() ? 0 : *std::max_element(compact.begin(), compact.end()) + 1;
      for (auto& o : original_to_node) o = compact[o];
      if (trace)
        trace->push_back({round, depth, module_count, codelength(), map_equation(original_to_node, *flow_)});
      if (module_count == nodes || module_count <= 1) break;
      std::vector<std::uint32_t> next_parent;
      if (!level.parent.empty()) {
        next_parent.resize(module_count);
        for (std::uint32_t u = 0; u < nodes; ++u) next_parent[compact[u]] = level.parent[u];
      }
      level = aggregate(level, compact, module_count);
      level.parent = std::move(next_parent);
      module.resize(module_count);
      std::iota(module.begin(), module.end(), 0u);
    }
    return original_to_node;
  }

  static void add_link(std::vector<std::pair<std::uint32_t, double>>& links, std::uint32_t to, double f) {
    for (auto& l : links)
      if (l.first == to) {
        l.second += f;
        return;
      }
    links.emplace_back(to, f);
  }

  static Level aggregate(const Level& level, std::span<const std::uint32_t> module, std::uint32_t count) {
    Level next;
    next.flow.assign(count, 0.0);
    next.out.resize(count);
    next.in.resize(count);
    std::vector<std::map<std::uint32_t, double>> out(count);
    for (std::uint32_t u = 0; u < level.flow.size(); ++u) {
      next.flow[module[u]] += level.flow[u];
      for (const auto& [v, f] : level.out[u])
        if (module[u] != module[v]) out[module[u]][module[v]] += f;
    }
    for (std::uint32_t a = 0; a < count; ++a)
      for (const auto& [b, f] : out[a]) {
        next.out[a].emplace_back(b, f);
        next.in[b].emplace_back(a, f);
      }
    return next;
  }

  // Recomputes module exits and volumes from scratch.
  void init_modules(const Level& level, std::span<const std::uint32_t> module) {
    const std::size_t n = level.flow.size();
    exit_.assign(n, 0.0);
    vol_.assign(n, 0.0);
    members_.assign(n, 0);
    node_out_.assign(n, 0.0);
    for (std::uint32_t u = 0; u < n; ++u) {
      vol_[module[u]] += level.flow[u];
      ++members_[module[u]];
      for (const auto& [v, f] : level.out[u]) {
        node_out_[u] += f;
        if (module[u] != module[v]) exit_[module[u]] += f;
      }
    }
    node_in_.assign(n, 0.0);
    for (std::uint32_t u = 0; u < n; ++u)
      for (const auto& [v, f] : level.in[u]) node_in_[u] += f;
    module_parent_.assign(n, 0);
    if (!level.parent.empty())
      for (std::uint32_t u = 0; u < n; ++u) module_parent_[module[u]] = level.parent[u];
    refresh_sums();
    empty_.clear();
    for (std::uint32_t m = n; m-- > 0;)
      if (members_[m] == 0) empty_.push_back(m);
  }

  void refresh_sums() {
    sum_exit_ = exit_log_exit_ = total_log_total_ = 0.0;
    for (std::size_t m = 0; m < exit_.size(); ++m) {
      sum_exit_ += exit_[m];
      exit_log_exit_ += plogp(exit_[m]);
      total_log_total_ += plogp(exit_[m] + vol_[m]);
    }
  }

  bool sweep(const Level& level, std::vector<std::uint32_t>& module) {
    const std::size_t n = level.flow.size();
    std::vector<std::uint32_t> order(n);
    std::iota(order.begin(), order.end(), 0u);
    std::shuffle(order.begin(), order.end(), *rng_);
    std::vector<double> out_to(n, 0.0), in_from(n, 0.0);
    std::vector<char> touched(n, 0);
    std::vector<std::uint32_t> candidates;
    bool moved_any = false;
    for (auto u : order) {
      const auto old = module[u];
      candidates.clear();
      auto touch = [&](std::uint32_t m) {
        if (!touched[m]) {
          touched[m] = 1;
          candidates.push_back(m);
        }
      };
      touch(old);
      for (const auto& [v, f] : level.out[u]) {
        touch(module[v]);
        out_to[module[v]] += f;
      }
      for (const auto& [v, f] : level.in[u]) {
        touch(module[v]);
        in_from[module[v]] += f;
      }
      if (members_[old] > 1 && !empty_.empty()) touch(empty_.back());
      std::shuffle(candidates.begin() + 1, candidates.end(), *rng_);

      const double p = level.flow[u];
      const double old_exit_after = exit_[old] - node_out_[u] + out_to[old] + in_from[old];
      const double old_vol_after = vol_[old] - p;

      std::uint32_t best = old;
      double best_delta = 0.0, best_exit = 0.0;
      for (std::size_t c = 1; c < candidates.size(); ++c) {
        const auto m = candidates[c];
        if (!level.parent.empty() && members_[m] > 0 && module_parent_[m] != level.parent[u]) continue;
        const double new_exit = exit_[m] + node_out_[u] - out_to[m] - in_from[m];
        const double sum_after = sum_exit_ - exit_[old] - exit_[m] + old_exit_after + new_exit;
        const double delta =
            plogp(sum_after) - plogp(sum_exit_) -
            2.0 * (plogp(old_exit_after) + plogp(new_exit) - plogp(exit_[old]) - plogp(exit_[m])) +
            (plogp(old_exit_after + old_vol_after) + plogp(new_exit + vol_[m] + p) -
             plogp(exit_[old] + vol_[old]) - plogp(exit_[m] + vol_[m]));
        if (delta / std::log(2.0) < -options_.min_gain && delta < best_delta) {
          best_delta = delta;
          best = m;
          best_exit = new_exit;
        }
      }
      if (best != old) {
        if (members_[best] == 0) empty_.pop_back();
        if (!level.parent.empty()) module_parent_[best] = level.parent[u];
        sum_exit_ += old_exit_after + best_exit - exit_[old] - exit_[best];
        exit_log_exit_ += plogp(old_exit_after) + plogp(best_exit) - plogp(exit_[old]) - plogp(exit_[best]);
        total_log_total_ += plogp(old_exit_after + old_vol_after) + plogp(best_exit + vol_[best] + p) -
                            plogp(exit_[old] + vol_[old]) - plogp(exit_[best] + vol_[best]);
        exit_[old] = std::max(old_exit_after, 0.0);
        vol_[old] = std::max(old_vol_after, 0.0);
        exit_[best] = std::max(best_exit, 0.0);
        vol_[best] += p;
        --members_[old];
        ++members_[best];
        if (members_[old] == 0) {
          exit_[old] = vol_[old] = 0.0;
          empty_.push_back(old);
        }
        module[u] = best;
        moved_any = true;
      }
      for (auto m : candidates) {
        touched[m] = 0;
        out_to[m] = in_from[m] = 0.0;
      }
    }
    if (moved_any) refresh_sums();
    return moved_any;
  }

  const StationaryFlow* flow_;
  Rng* rng_;
  InfomapOptions options_;
  double node_term_ = 0.0;
  std::vector<double> exit_, vol_, node_out_, node_in_;
  std::vector<std::size_t> members_;
  std::vector<std::uint32_t> empty_, module_parent_;
  double sum_exit_ = 0.0, exit_log_exit_ = 0.0, total_log_total_ = 0.0;
};

// Submodules of `current` found by optimizing each module's induced
// subnetwork on its own (edge flows as weights, fresh stationary flow).
inline std::vector<std::uint32_t> standalone_split(const StationaryFlow& flow, std::span<const std::uint32_t> current,
                                                   Rng& rng, const InfomapOptions& options) {
  const std::size_t n = flow.visit_rates.size();
  const auto parent = canonical_labels(current);
  const std::uint32_t modules = *std::max_element(parent.begin(), parent.end()) + 1;
  std::vector<std::vector<std::uint32_t>> members(modules);
  for (std::uint32_t u = 0; u < n; ++u) members[parent[u]].push_back(u);
  std::vector<std::uint32_t> local(n), out(n);
  std::uint32_t next = 0;
  for (const auto& group : members) {
    for (std::uint32_t i = 0; i < group.size(); ++i) local[group[i]] = i;
    std::vector<std::uint32_t> split(group.size(), 0);
    if (group.size() > 2) {
      FlowGraph sub(std::vector<std::string>(group.size()));
      for (const auto& e : flow.edge_flows)
        if (e.flow > 0.0 && e.source != e.target && parent[e.source] == parent[e.target] &&
            parent[e.source] == parent[group.front()])
          sub.add_edge(local[e.source], local[e.target], e.flow);
      const auto sub_flow = stationary_flow(sub, {options.teleport});
      Optimizer opt(sub_flow, rng, options);
      std::vector<std::uint32_t> singles(group.size());
      std::iota(singles.begin(), singles.end(), 0u);
      split = canonical_labels(opt.run(singles, 0, nullptr));
    } else {
      std::iota(split.begin(), split.end(), 0u);
    }
    const std::uint32_t used = *std::max_element(split.begin(), split.end()) + 1;
    for (std::uint32_t i = 0; i < group.size(); ++i) out[group[i]] = next + split[i];
    next += used;
  }
  return out;
}

}  // namespace detail

// Greedy two-level map-equation minimization. Even trials start from
// singletons, odd trials from a seeded random partition. A trial sweeps
// nodes in seeded random order taking the best strictly improving move, and
// aggregates modules when a sweep stalls. The result is then refined by alternating fine tuning (single nodes move) and coarse
// tuning (submodules move) while the codelength improves.
// The best trial wins (ties to the earliest); the one-module partition is
// kept if it is shorter.
inline Partition infomap(const StationaryFlow& flow, std::uint64_t seed, InfomapOptions options = {}) {
  const std::size_t n = flow.visit_rates.size();
  if (n == 0) throw InvalidArgument("infomap on an empty graph");
  Partition best;
  best.codelength = std::numeric_limits<double>::infinity();
  for (std::size_t t = 0; t < std::max<std::size_t>(options.trials, 1); ++t) {
    auto rng = make_rng(seed, t);
    detail::Optimizer opt(flow, rng, options);
    std::vector<LevelTrace> trace;
    std::vector<std::uint32_t> assignment(n);
    std::iota(assignment.begin(), assignment.end(), 0u);
    if (t % 2 == 1 && n > 2) {
      std::uniform_int_distribution<std::uint32_t> pick(0, static_cast<std::uint32_t>(n / 2));
      for (auto& a : assignment) a = pick(rng);
      assignment = canonical_labels(assignment);
    }
    double length = map_equation(assignment, flow);
    // Cycle fine tuning, coarse tuning on standalone submodules and coarse
    // tuning on confined submodules; stop once a full cycle fails.
    std::size_t stalled = 0;
    for (std::size_t round = 0; round < options.max_rounds && stalled < 3; ++round) {
      auto* tr = options.record_trace ? &trace : nullptr;
      std::vector<std::uint32_t> next;
      switch (round % 3) {
        case 0: next = opt.run(assignment, round, tr); break;
        case 1: next = opt.run_coarse(assignment, detail::standalone_split(flow, assignment, rng, options), round, tr); break;
        default: next = opt.run_coarse(assignment, opt.confined_split(assignment, round), round, tr); break;
      }
      const double next_length = map_equation(next, flow);
      if (next_length < length - options.min_gain) {
        assignment = std::move(next);
        length = next_length;
        stalled = 0;
      } else {
        ++stalled;
      }
    }
    if (length < best.codelength) {
      best.assignment = canonical_labels(assignment);
      best.codelength = length;
      best.best_trial = t;
      best.trace = std::move(trace);
    }
  }
  const std::vector<std::uint32_t> one(n, 0u);
  if (const double l = map_equation(one, flow); l < best.codelength - options.min_gain) {
    best.assignment = one;
    best.codelength = l;
  }
  best.module_count = *std::max_element(best.assignment.begin(), best.assignment.end()) + 1;
  return best;
}

inline Partition infomap(const FlowGraph& g, std::uint64_t seed, InfomapOptions options = {}) {
  return infomap(stationary_flow(g, {options.teleport}), seed, options);
}

struct CommunityDay {
  Date date{};
  std::vector<std::string> nodes;
  Partition partition;
  bool flagged = false;  // no trips that day
};

struct SeriesOptions {
  InfomapOptions infomap;
  // Sum the previous `window_days` matrices (including the day itself).
  std::size_t window_days = 1;
};

// One Infomap run per day. Empty days count the attached registry nodes as
// singletons (0 without a registry) and are flagged.
inline std::vector<CommunityDay> community_count_series(std::span<const od::DailyOD> ods, std::uint64_t seed,
                                                        SeriesOptions options = {},
                                                        std::span<const std::string> registry_nodes = {}) {
  std::vector<CommunityDay> out;
  for (std::size_t d = 0; d < ods.size(); ++d) {
    if (ods[d].granularity() != od::Granularity::municipality)
      throw InvalidArgument("community detection needs municipality matrices");
    od::DailyOD merged(ods[d].date(), od::Granularity::municipality);
    const std::size_t first = d + 1 >= options.window_days ? d + 1 - options.window_days : 0;
    for (std::size_t w = first; w <= d; ++w)
      for (const auto& [key, n] : ods[w].cells()) merged.add(key.first, key.second, n);
    CommunityDay day;
    day.date = ods[d].date();
    if (merged.empty()) {
      day.flagged = true;
      day.nodes.assign(registry_nodes.begin(), registry_nodes.end());
      std::sort(day.nodes.begin(), day.nodes.end());
      day.partition.assignment.resize(day.nodes.size());
      std::iota(day.partition.assignment.begin(), day.partition.assignment.end(), 0u);
      day.partition.module_count = day.nodes.size();
    } else {
      const auto g = FlowGraph::from_od(merged, registry_nodes);
      day.nodes = g.names();
      day.partition = infomap(g, mix_seed(seed, static_cast<std::uint64_t>(day.date.time_since_epoch().count())),
                              options.infomap);
    }
    out.push_back(std::move(day));
  }
  return out;
}

inline std::string counts_csv(std::span<const CommunityDay> days) {
  std::string out = "date,community_count,sunday,flagged\n";
  for (const auto& d : days)
    out += format_date(d.date) + "," + std::to_string(d.partition.module_count) + "," +
           (is_sunday(d.date) ? "1" : "0") + "," + (d.flagged ? "1" : "0") + "\n";
  return out;
}

// {date, modules: [{id, municipalities[]}], codelength}. With a province
// filter, only municipalities in those provinces are listed and modules
// left empty are omitted.
inline nlohmann::json partition_json(const CommunityDay& day, const TerritoryIndex* territory = nullptr,
                                     const std::set<std::string>* province_filter = nullptr) {
  std::map<std::uint32_t, std::vector<std::string>> modules;
  for (std::size_t i = 0; i < day.nodes.size(); ++i) {
    if (province_filter && territory) {
      const auto m = territory->find_municipality(day.nodes[i]);
      if (!m || !province_filter->contains(territory->province_name(territory->province_index_of(*m)))) continue;
    }
    modules[day.partition.assignment[i]].push_back(day.nodes[i]);
  }
  nlohmann::json j;
  j["date"] = format_date(day.date);
  auto& arr = j["modules"] = nlohmann::json::array();
  for (const auto& [id, members] : modules) arr.push_back({{"id", id}, {"municipalities", members}});
  j["codelength"] = day.partition.codelength;
  return j;
}

}  // namespace mobflow::community
