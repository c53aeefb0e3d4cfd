#pragma once

// Static traffic assignment by Frank–Wolfe with exact line search, in either
// system-optimal (SO) or user-centric (UC) mode, for a fixed lane
// configuration.

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <queue>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "contraflow/cost.hpp"
#include "contraflow/model.hpp"
#include "contraflow/parallel.hpp"

namespace contraflow {

enum class TapMode { SystemOptimal, UserCentric };

inline std::string to_string(TapMode m) { return m == TapMode::SystemOptimal ? "so" : "uc"; }

inline TapMode parse_tap_mode(const std::string& s) {
  if (s == "so" || s == "SO") return TapMode::SystemOptimal;
  if (s == "uc" || s == "UC") return TapMode::UserCentric;
  throw std::invalid_argument("unknown TAP mode '" + s + "' (expected so|uc)");
}

struct TapSettings {
  TapMode mode = TapMode::SystemOptimal;
  double relative_gap = 1e-4;
  int max_iterations = 1000;
  double line_search_tolerance = 1e-10;
  int threads = 1;

  void validate() const {
    if (!(relative_gap > 0.0)) throw std::invalid_argument("TAP relative gap must be > 0");
    if (max_iterations < 1) throw std::invalid_argument("TAP max iterations must be >= 1");
    if (!(line_search_tolerance > 0.0))
      throw std::invalid_argument("line-search tolerance must be > 0");
  }
};

struct TapTraceEntry {
  int iteration = 0;
  double objective = 0.0;
  double relative_gap = 0.0;
  double step = 0.0;
  // Largest linearisation lower bound seen so far and the gap against it.
  double best_lower_bound = 0.0;
  double best_bound_gap = 0.0;
};

struct TapSolution {
  FlowVector flows;
  double objective = 0.0;          // mode objective (SO total cost or UC Beckmann integral)
  double total_travel_time = 0.0;  // sum of x * t, regardless of mode
  double relative_gap = 0.0;
  double lower_bound = 0.0;  // best linearisation bound on the mode objective
  int iterations = 0;
  bool converged = false;
  std::vector<TapTraceEntry> trace;
};

struct ShortestPathTree {
  std::vector<double> distance;
  std::vector<ArcId> predecessor;  // -1 at the origin and at unreachable nodes

  bool reachable(NodeIndex v) const { return distance[v] < std::numeric_limits<double>::infinity(); }
};

// Dijkstra. Arcs with infinite weight are closed. Among equal-distance labels
// the predecessor with the smallest node index wins, then the smallest arc id.
inline ShortestPathTree shortest_paths(const Network& net, std::span<const double> weights,
                                       NodeIndex origin) {
  if (weights.size() != net.num_arcs())
    throw std::invalid_argument("weight vector size does not match the network");
  if (origin < 0 || static_cast<std::size_t>(origin) >= net.num_nodes())
    throw std::out_of_range("origin outside the network");
  const double inf = std::numeric_limits<double>::infinity();
  const std::size_t n = net.num_nodes();
  ShortestPathTree tree{std::vector<double>(n, inf), std::vector<ArcId>(n, -1)};
  std::vector<char> settled(n, 0);
  using Label = std::pair<double, NodeIndex>;
  std::priority_queue<Label, std::vector<Label>, std::greater<>> heap;
  tree.distance[origin] = 0.0;
  heap.push({0.0, origin});
  while (!heap.empty()) {
    auto [d, v] = heap.top();
    heap.pop();
    if (settled[v] || d > tree.distance[v]) continue;
    settled[v] = 1;
    for (ArcId a : net.out_arcs(v)) {
      const double w = weights[static_cast<std::size_t>(a)];
      if (!(w >= 0.0)) throw std::invalid_argument("shortest_paths needs nonnegative weights");
      if (w == inf) continue;
      const NodeIndex h = net.arc(a).head;
      if (settled[h]) continue;
      const double nd = d + w;
      const ArcId cur = tree.predecessor[h];
      bool better = nd < tree.distance[h];
      if (!better && nd == tree.distance[h] && cur >= 0) {
        const NodeIndex cur_tail = net.arc(cur).tail;
        better = v < cur_tail || (v == cur_tail && a < cur);
      }
      if (better) {
        tree.distance[h] = nd;
        tree.predecessor[h] = a;
        heap.push({nd, h});
      }
    }
  }
  return tree;
}

// Assigns every OD demand to its shortest path. Origins may be processed on
// several threads; per-origin loads are summed in ascending origin order.
inline FlowVector all_or_nothing(const Network& net, std::span<const double> weights,
                                 const ODMatrix& od, int threads = 1) {
  const auto groups = od.by_origin();
  std::vector<std::vector<double>> loads(groups.size());
  parallel_for(groups.size(), threads, [&](std::size_t g) {
    const auto& [origin, range] = groups[g];
    const ShortestPathTree tree = shortest_paths(net, weights, origin);
    std::vector<double> load(net.num_arcs(), 0.0);
    for (std::size_t k = range.first; k < range.second; ++k) {
      const NodeIndex dest = od.entries()[k].destination;
      if (!tree.reachable(dest))
        throw InfeasibleError("destination " + std::to_string(net.node_id(dest)) +
                              " unreachable from origin " + std::to_string(net.node_id(origin)));
      const double d = od.demand(k);
      for (NodeIndex v = dest; v != origin;) {
        const ArcId a = tree.predecessor[v];
        load[static_cast<std::size_t>(a)] += d;
        v = net.arc(a).tail;
      }
    }
    loads[g] = std::move(load);
  });
  FlowVector x{std::vector<double>(net.num_arcs(), 0.0)};
  for (const auto& load : loads)
    for (std::size_t a = 0; a < load.size(); ++a) x[a] += load[a];
  return x;
}

namespace detail {

// SO: marginal cost t + x dt/dx = t0 (1 + alpha (1 + p) r^p). UC: t itself.
inline double link_weight(TapMode mode, double x, int lanes, const ArcParams& p) {
  if (lanes <= 0) return std::numeric_limits<double>::infinity();
  const double r = x / (p.lane_capacity * lanes);
  const double factor = mode == TapMode::SystemOptimal ? 1.0 + p.bpr.power : 1.0;
  return p.free_flow_time * (1.0 + p.bpr.alpha * factor * power(r, p.bpr.power));
}

inline double link_objective(TapMode mode, double x, int lanes, const ArcParams& p) {
  if (x == 0.0) return 0.0;
  if (lanes <= 0) return std::numeric_limits<double>::infinity();
  const double c = congestion_cost(x, lanes, p);
  return p.free_flow_time * x + (mode == TapMode::SystemOptimal ? c : c / (p.bpr.power + 1.0));
}

}  // namespace detail

inline std::vector<double> link_weights(const Network& net, const LaneConfig& lanes,
                                        const FlowVector& flows, TapMode mode) {
  std::vector<double> w(net.num_arcs());
  for (const Arc& a : net.arcs()) w[a.id] = detail::link_weight(mode, flows[a.id], lanes[a.id], a.params);
  return w;
}

inline double tap_objective(const Network& net, const LaneConfig& lanes, const FlowVector& flows,
                            TapMode mode) {
  double s = 0.0;
  for (const Arc& a : net.arcs()) s += detail::link_objective(mode, flows[a.id], lanes[a.id], a.params);
  return s;
}

namespace detail {

struct GapEvaluation {
  double gap = 0.0;
  double absolute_gap = 0.0;
  FlowVector target;
};

inline GapEvaluation evaluate_gap(const Network& net, const LaneConfig& lanes,
                                  const FlowVector& flows, const ODMatrix& od, TapMode mode,
                                  int threads) {
  const std::vector<double> w = link_weights(net, lanes, flows, mode);
  GapEvaluation e;
  e.target = all_or_nothing(net, w, od, threads);
  double wx = 0.0, wy = 0.0;
  for (std::size_t a = 0; a < w.size(); ++a) {
    if (flows[a] != 0.0) wx += w[a] * flows[a];
    if (e.target[a] != 0.0) wy += w[a] * e.target[a];
  }
  e.absolute_gap = wx - wy;
  e.gap = wx > 0.0 ? e.absolute_gap / wx : 0.0;
  return e;
}

}  // namespace detail

// (w.x - w.y) / w.x with w the mode's link weights at `flows` and y the
// all-or-nothing assignment against w.
inline double relative_gap(const Network& net, const LaneConfig& lanes, const FlowVector& flows,
                           const ODMatrix& od, TapMode mode, int threads = 1) {
  return detail::evaluate_gap(net, lanes, flows, od, mode, threads).gap;
}

inline TapSolution solve_tap(const Network& net, const LaneConfig& lanes, const ODMatrix& od,
                             const TapSettings& settings = {}) {
  settings.validate();
  if (lanes.size() != net.num_arcs())
    throw std::invalid_argument("lane vector size does not match the network");
  const TapMode mode = settings.mode;

  TapSolution sol;
  {
    const FlowVector zero{std::vector<double>(net.num_arcs(), 0.0)};
    sol.flows = all_or_nothing(net, link_weights(net, lanes, zero, mode), od, settings.threads);
  }
  FlowVector& x = sol.flows;
  double best_lb = -std::numeric_limits<double>::infinity();

  for (int it = 1; it <= settings.max_iterations; ++it) {
    detail::GapEvaluation ge = detail::evaluate_gap(net, lanes, x, od, mode, settings.threads);
    const double z = tap_objective(net, lanes, x, mode);
    best_lb = std::max(best_lb, z - ge.absolute_gap);
    TapTraceEntry entry{it, z, ge.gap, 0.0, best_lb, z > 0.0 ? (z - best_lb) / z : 0.0};
    sol.relative_gap = ge.gap;
    sol.iterations = it;
    if (ge.gap <= settings.relative_gap) {
      sol.converged = true;
      sol.trace.push_back(entry);
      break;
    }

    // Exact line search: bisection on the directional derivative over [0, 1].
    const FlowVector& y = ge.target;
    std::vector<std::size_t> moving;
    for (std::size_t a = 0; a < x.size(); ++a)
      if (y[a] != x[a]) moving.push_back(a);
    auto slope = [&](double lambda) {
      double s = 0.0;
      for (std::size_t a : moving) {
        const Arc& arc = net.arc(static_cast<ArcId>(a));
        const double d = y[a] - x[a];
        const double xa = std::max(0.0, x[a] + lambda * d);
        s += detail::link_weight(mode, xa, lanes[a], arc.params) * d;
      }
      return s;
    };
    double lambda = 1.0;
    if (slope(1.0) > 0.0) {
      double lo = 0.0, hi = 1.0;
      while (hi - lo > settings.line_search_tolerance) {
        const double mid = 0.5 * (lo + hi);
        if (slope(mid) > 0.0) hi = mid;
        else lo = mid;
      }
      lambda = 0.5 * (lo + hi);
    }
    for (std::size_t a : moving) x[a] = std::max(0.0, x[a] + lambda * (y[a] - x[a]));
    entry.step = lambda;
    sol.trace.push_back(entry);
  }

  sol.objective = tap_objective(net, lanes, x, mode);
  if (!sol.converged) {
    const detail::GapEvaluation ge = detail::evaluate_gap(net, lanes, x, od, mode, settings.threads);
    sol.relative_gap = ge.gap;
    sol.converged = ge.gap <= settings.relative_gap;
    best_lb = std::max(best_lb, sol.objective - ge.absolute_gap);
  }
  sol.lower_bound = std::min(best_lb, sol.objective);
  sol.total_travel_time = total_cost(net, lanes, x);
  return sol;
}

}  // namespace contraflow
