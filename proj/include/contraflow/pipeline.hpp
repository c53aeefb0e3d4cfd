#pragma once

// Experiment drivers combining traffic assignment with lane optimisation:
// alternating TAP/LA, demand and budget sweeps, per-arc improvements and the
// single-reversal audit.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <random>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "contraflow/cost.hpp"
#include "contraflow/laneopt.hpp"
#include "contraflow/model.hpp"
#include "contraflow/parallel.hpp"
#include "contraflow/tap.hpp"

namespace contraflow {

struct PipelineSettings {
  TapSettings tap{};
  RelaxedBoundSettings bound{};
  int max_outer_iterations = 20;
  double improvement_tolerance = 1e-6;
  std::uint64_t seed = 42;
  int threads = 1;
  std::size_t full_audit_max_pairs = 64;
};

inline double percent_deviation(double value, double reference) {
  return 100.0 * (value - reference) / reference;
}

// One sweep point. "fixed" columns use the flows of a single TAP solve at the
// nominal lanes; "tap" columns re-solve TAP at each configuration. For budget
// sweeps `la_*` is the budgeted optimum and `unconstrained_*` the unbudgeted one.
struct SweepRow {
  double parameter = 0.0;
  int reversals = 0;
  double original_fixed = 0.0;
  double la_fixed = 0.0;
  double unconstrained_fixed = 0.0;
  std::optional<double> projected_fixed;
  std::optional<double> relaxed_bound;
  double original_tap = 0.0;
  double la_tap = 0.0;
  double unconstrained_tap = 0.0;
  std::optional<double> projected_tap;
  double tap_gap = 0.0;
  int tap_iterations = 0;
  bool tap_converged = true;
};

struct ArcImprovement {
  ArcId arc = 0;
  double flow = 0.0;
  double percent = 0.0;  // travel-time reduction relative to nominal lanes
  ArcId paired_arc = -1;
};

struct LasoIterate {
  int iteration = 0;
  LaneConfig lanes;
  double objective = 0.0;  // total travel time after a fresh TAP solve
  double tap_gap = 0.0;
  bool accepted = false;
};

struct LasoResult {
  LaneConfig lanes;
  TapSolution tap;
  double objective = 0.0;
  std::vector<LasoIterate> trace;
  bool fixed_point = false;
  int outer_iterations = 0;
};

namespace detail {

inline TapSettings inner_tap(const PipelineSettings& s, bool outer_parallel) {
  TapSettings t = s.tap;
  t.threads = outer_parallel ? 1 : s.threads;
  return t;
}

}  // namespace detail

// Alternates TAP at the current lanes and the fixed-flow LA optimum until the
// lanes repeat, the objective stops improving, or the iteration cap.
inline LasoResult sequential_laso(const Network& net, const ODMatrix& od,
                                  const PipelineSettings& settings) {
  const TapSettings tap_settings = detail::inner_tap(settings, false);
  LasoResult res;
  res.lanes = net.nominal_lanes();
  res.tap = solve_tap(net, res.lanes, od, tap_settings);
  res.objective = res.tap.total_travel_time;
  res.trace.push_back({0, res.lanes, res.objective, res.tap.relative_gap, true});
  std::set<std::vector<int>> visited{res.lanes.lanes};

  for (int k = 1; k <= settings.max_outer_iterations; ++k) {
    res.outer_iterations = k;
    const LaProblem prob = LaProblem::build(net, res.tap.flows, res.lanes);
    const LaneOptResult la = solve_la(prob);
    if (la.lanes == res.lanes) {
      res.fixed_point = true;
      break;
    }
    if (visited.count(la.lanes.lanes)) break;
    visited.insert(la.lanes.lanes);
    TapSolution candidate;
    try {
      candidate = solve_tap(net, la.lanes, od, tap_settings);
    } catch (const InfeasibleError&) {
      res.trace.push_back({k, la.lanes, kInfiniteCost, 0.0, false});
      break;
    }
    const double obj = candidate.total_travel_time;
    const bool improves = obj < res.objective * (1.0 - settings.improvement_tolerance);
    res.trace.push_back({k, la.lanes, obj, candidate.relative_gap, improves});
    if (!improves) break;
    res.lanes = la.lanes;
    res.tap = std::move(candidate);
    res.objective = obj;
  }
  return res;
}

inline std::vector<SweepRow> demand_sweep(const Network& net, const ODMatrix& od,
                                          const std::vector<double>& multipliers,
                                          const PipelineSettings& settings) {
  for (double m : multipliers)
    if (!(m > 0.0)) throw std::invalid_argument("demand multipliers must be > 0");
  std::vector<SweepRow> rows(multipliers.size());
  const bool outer = settings.threads > 1 && multipliers.size() > 1;
  const TapSettings ts = detail::inner_tap(settings, outer);
  const LaneConfig z0 = net.nominal_lanes();
  parallel_for(multipliers.size(), outer ? settings.threads : 1, [&](std::size_t i) {
    const ODMatrix odm = od.with_multiplier(multipliers[i]);
    const TapSolution base = solve_tap(net, z0, odm, ts);
    const LaProblem prob = LaProblem::build(net, base.flows);
    const LaneOptResult la = solve_la(prob);
    const RelaxedBound rb = relaxed_lower_bound(net, base.flows, settings.bound);
    const LaneConfig zp = project_bound(net, rb.lanes);

    SweepRow r;
    r.parameter = multipliers[i];
    r.reversals = la.reversals;
    r.original_fixed = total_cost(net, z0, base.flows);
    r.la_fixed = r.unconstrained_fixed = total_cost(net, la.lanes, base.flows);
    r.projected_fixed = total_cost(net, zp, base.flows);
    r.relaxed_bound = rb.bound;
    r.original_tap = base.total_travel_time;
    r.la_tap = r.unconstrained_tap = solve_tap(net, la.lanes, odm, ts).total_travel_time;
    r.projected_tap = solve_tap(net, zp, odm, ts).total_travel_time;
    r.tap_gap = base.relative_gap;
    r.tap_iterations = base.iterations;
    r.tap_converged = base.converged;
    rows[i] = r;
  });
  return rows;
}

// Budgeted optima for each budget at fixed flows.
inline std::vector<LaneOptResult> budget_sweep_fixed(const Network& net, const FlowVector& flows,
                                                     const std::vector<int>& budgets) {
  std::vector<LaneOptResult> out;
  for (int b : budgets) {
    if (b < 0) throw std::invalid_argument("budgets must be nonnegative");
    out.push_back(solve_la_budget(LaProblem::build(net, flows, std::nullopt, b)));
  }
  return out;
}

inline std::vector<SweepRow> budget_sweep(const Network& net, const ODMatrix& od,
                                          const std::vector<int>& budgets,
                                          const PipelineSettings& settings) {
  for (std::size_t i = 0; i < budgets.size(); ++i) {
    if (budgets[i] < 0) throw std::invalid_argument("budgets must be nonnegative");
    if (i > 0 && budgets[i] < budgets[i - 1]) throw std::invalid_argument("budgets must be ascending");
  }
  const bool outer = settings.threads > 1 && budgets.size() > 1;
  const TapSettings ts = detail::inner_tap(settings, outer);
  const LaneConfig z0 = net.nominal_lanes();
  const TapSolution base = solve_tap(net, z0, od, detail::inner_tap(settings, false));
  const LaneOptResult unconstrained = solve_la(LaProblem::build(net, base.flows));
  const double unconstrained_fixed = total_cost(net, unconstrained.lanes, base.flows);
  const double unconstrained_tap =
      solve_tap(net, unconstrained.lanes, od, detail::inner_tap(settings, false)).total_travel_time;
  const std::vector<LaneOptResult> results = budget_sweep_fixed(net, base.flows, budgets);

  std::vector<SweepRow> rows(budgets.size());
  parallel_for(budgets.size(), outer ? settings.threads : 1, [&](std::size_t i) {
    SweepRow r;
    r.parameter = budgets[i];
    r.reversals = results[i].reversals;
    r.original_fixed = total_cost(net, z0, base.flows);
    r.la_fixed = total_cost(net, results[i].lanes, base.flows);
    r.unconstrained_fixed = unconstrained_fixed;
    r.original_tap = base.total_travel_time;
    r.la_tap = results[i].lanes == z0 ? base.total_travel_time
                                      : solve_tap(net, results[i].lanes, od, ts).total_travel_time;
    r.unconstrained_tap = unconstrained_tap;
    r.tap_gap = base.relative_gap;
    r.tap_iterations = base.iterations;
    r.tap_converged = base.converged;
    rows[i] = r;
  });
  return rows;
}

inline std::vector<ArcImprovement> arc_improvements(const Network& net, const FlowVector& flows,
                                                    const LaneConfig& nominal,
                                                    const LaneConfig& optimized) {
  std::vector<ArcImprovement> out;
  for (const Arc& a : net.arcs()) {
    const double x = flows[a.id];
    if (!(x > 0.0)) continue;
    const double before = bpr_time(x, nominal[a.id], a.params);
    const double after = bpr_time(x, optimized[a.id], a.params);
    ArcImprovement imp{a.id, x, before == after ? 0.0 : 100.0 * (before - after) / before, -1};
    if (a.pair != kNoPair) {
      const ArcPair& p = net.pair(a.pair);
      imp.paired_arc = p.forward == a.id ? p.backward : p.forward;
    }
    out.push_back(imp);
  }
  return out;
}

struct PsiEntry {
  PairId pair = 0;
  ArcId gaining_arc = 0;
  ArcId losing_arc = 0;
  double psi = 0.0;      // objective change with flows re-equilibrated
  double psi_hat = 0.0;  // fixed-flow estimate
  double tolerance = 0.0;
  bool violation = false;
  bool failed = false;
  std::string message;
};

struct PsiAudit {
  double base_objective = 0.0;
  double base_gap = 0.0;
  std::vector<PairId> audited_pairs;
  std::vector<PsiEntry> entries;

  std::vector<std::size_t> violations() const {
    std::vector<std::size_t> v;
    for (std::size_t i = 0; i < entries.size(); ++i)
      if (entries[i].violation) v.push_back(i);
    return v;
  }
};

// K distinct pair ids drawn with a seeded Fisher–Yates shuffle, ascending.
inline std::vector<PairId> sample_pairs(std::size_t num_pairs, std::size_t k, std::uint64_t seed) {
  std::vector<PairId> ids(num_pairs);
  for (std::size_t i = 0; i < num_pairs; ++i) ids[i] = static_cast<PairId>(i);
  if (k >= num_pairs) return ids;
  std::mt19937_64 rng(seed);
  for (std::size_t i = 0; i < k; ++i) {
    const std::size_t j = i + static_cast<std::size_t>(rng() % (num_pairs - i));
    std::swap(ids[i], ids[j]);
  }
  ids.resize(k);
  std::sort(ids.begin(), ids.end());
  return ids;
}

// Re-solves TAP at every single-lane reversal of the audited pairs. A
// violation is a reversal that lowers total travel time by more than the
// combined optimality gaps of the two TAP solutions can explain.
inline PsiAudit psi_audit(const Network& net, const ODMatrix& od, const LaneConfig& lanes,
                          const PipelineSettings& settings,
                          std::optional<std::size_t> sample = std::nullopt) {
  if (!net.is_feasible(lanes)) throw std::invalid_argument("audit lanes are not feasible");
  PsiAudit audit;
  const TapSolution base = solve_tap(net, lanes, od, detail::inner_tap(settings, false));
  audit.base_objective = base.total_travel_time;
  audit.base_gap = base.relative_gap;
  const std::size_t k = sample ? *sample : std::min(net.num_pairs(), settings.full_audit_max_pairs);
  audit.audited_pairs = sample_pairs(net.num_pairs(), k, settings.seed);

  auto slack = [&](const TapSolution& s) {
    if (settings.tap.mode == TapMode::SystemOptimal) return std::max(0.0, s.objective - s.lower_bound);
    return s.relative_gap * s.total_travel_time;
  };

  std::vector<PsiEntry> entries(audit.audited_pairs.size() * 2);
  const bool outer = settings.threads > 1 && entries.size() > 1;
  const TapSettings ts = detail::inner_tap(settings, outer);
  parallel_for(entries.size(), outer ? settings.threads : 1, [&](std::size_t i) {
    const PairId pid = audit.audited_pairs[i / 2];
    const ArcPair& p = net.pair(pid);
    const Direction dir = i % 2 == 0 ? Direction::Forward : Direction::Backward;
    PsiEntry e;
    e.pair = pid;
    e.gaining_arc = dir == Direction::Forward ? p.forward : p.backward;
    e.losing_arc = dir == Direction::Forward ? p.backward : p.forward;
    e.psi_hat = psi_hat(pair_state(net, pid, base.flows, lanes), dir, p.min_lanes);
    if (lanes[e.losing_arc] - 1 < p.min_lanes) {
      e.psi = kInfiniteCost;
      e.message = "losing direction at minimum lanes";
      entries[i] = e;
      return;
    }
    LaneConfig z = lanes;
    z[e.gaining_arc] += 1;
    z[e.losing_arc] -= 1;
    try {
      const TapSolution n = solve_tap(net, z, od, ts);
      e.psi = n.total_travel_time - base.total_travel_time;
      e.tolerance = slack(base);
      e.violation = e.psi + e.tolerance < 0.0;
    } catch (const std::exception& ex) {
      e.failed = true;
      e.psi = std::numeric_limits<double>::quiet_NaN();
      e.message = ex.what();
    }
    entries[i] = e;
  });
  audit.entries = std::move(entries);
  return audit;
}

}  // namespace contraflow
