#pragma once

// Fixed-flow lane assignment.
//
// With flows fixed, each arc's cost is convex and nonincreasing in its lane
// count, so it is represented exactly at integer lane counts by a
// piecewise-affine function with sorted slopes. The only coupling constraint
// is z_ij + z_ji = n_ij within a pair, so the linear program decomposes into
// one small problem per pair. This header provides:
//   * solve_la              exact integer optimum (per-pair split scan)
//   * lp_relaxation_check   the continuous LP over unit increments, solved
//                           independently, with an integrality report
//   * relaxed_lower_bound   coordinate projected-gradient on real lane counts
//   * project_bound         rounding of the relaxed iterate
//   * solve_la_budget       reversal-budgeted optimum (greedy over lane moves)
//   * brute_force_pair / brute_force_budget   exhaustive oracles

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "contraflow/cost.hpp"
#include "contraflow/model.hpp"

namespace contraflow {

struct PairCosts {
  PairId pair = 0;
  ArcId forward = 0;
  ArcId backward = 0;
  int total_lanes = 0;
  int min_lanes = 1;
  int nominal_forward = 0;
  PiecewiseCost forward_cost;
  PiecewiseCost backward_cost;

  int min_forward() const { return min_lanes; }
  int max_forward() const { return total_lanes - min_lanes; }

  // Cost of every split, indexed by forward lanes - min_forward().
  std::vector<double> split_costs() const {
    const int lo = min_forward(), hi = max_forward();
    std::vector<double> fwd(static_cast<std::size_t>(hi - lo + 1));
    std::vector<double> bwd(fwd.size());
    // Accumulate along each direction once instead of calling value() per split.
    double v = forward_cost.value(lo);
    for (int f = lo; f <= hi; ++f) {
      if (f > lo) v = f <= forward_cost.base_lanes ? forward_cost.value(f) : v + forward_cost.step(f - 1);
      fwd[static_cast<std::size_t>(f - lo)] = v;
    }
    v = backward_cost.value(lo);
    for (int b = lo; b <= hi; ++b) {
      if (b > lo) v = b <= backward_cost.base_lanes ? backward_cost.value(b) : v + backward_cost.step(b - 1);
      bwd[static_cast<std::size_t>(b - lo)] = v;
    }
    std::vector<double> out(fwd.size());
    for (int f = lo; f <= hi; ++f)
      out[static_cast<std::size_t>(f - lo)] =
          fwd[static_cast<std::size_t>(f - lo)] + bwd[static_cast<std::size_t>(total_lanes - f - lo)];
    return out;
  }
};

// Fixed-flow lane assignment instance. Holds a pointer to the network, which
// must outlive the problem.
struct LaProblem {
  const Network* network = nullptr;
  FlowVector flows;
  LaneConfig nominal;
  std::vector<PairCosts> pairs;
  double fixed_cost = 0.0;  // arcs outside reversible pairs, at nominal lanes
  std::optional<int> budget;

  static LaProblem build(const Network& net, const FlowVector& flows,
                         std::optional<LaneConfig> nominal = std::nullopt,
                         std::optional<int> budget = std::nullopt) {
    if (flows.size() != net.num_arcs())
      throw std::invalid_argument("flow vector size does not match the network");
    for (double x : flows.flows)
      if (!(x >= 0.0)) throw std::domain_error("flows must be nonnegative");
    if (budget && *budget < 0) throw std::invalid_argument("reversal budget must be >= 0");
    LaProblem prob;
    prob.network = &net;
    prob.flows = flows;
    prob.nominal = nominal ? *nominal : net.nominal_lanes();
    prob.budget = budget;
    if (!net.is_feasible(prob.nominal))
      throw std::invalid_argument("nominal lane configuration is not feasible for the network");
    for (const Arc& a : net.arcs())
      if (!a.reversible) prob.fixed_cost += arc_cost(flows[a.id], prob.nominal[a.id], a.params);
    for (PairId p = 0; p < static_cast<PairId>(net.num_pairs()); ++p) {
      const ArcPair& ap = net.pair(p);
      const PairState s = pair_state(net, p, flows, prob.nominal);
      auto [fc, bc] = build_piecewise(s, ap.forward, ap.backward, ap.total_lanes, ap.min_lanes);
      prob.pairs.push_back(PairCosts{p, ap.forward, ap.backward, ap.total_lanes, ap.min_lanes,
                                     prob.nominal[ap.forward], std::move(fc), std::move(bc)});
    }
    return prob;
  }
};

struct LaneOptResult {
  LaneConfig lanes;
  LaneConfig nominal;
  double objective = 0.0;          // exact cost at `lanes`
  double nominal_objective = 0.0;  // exact cost at `nominal`
  std::vector<double> arc_cost_delta;  // J(x, z*) - J(x, z0) per arc
  int reversals = 0;                   // lanes moved, summed over pairs
  std::optional<int> budget;
  std::optional<double> relaxed_bound;
  std::optional<double> projected_objective;
  std::optional<LaneConfig> projected_lanes;
};

namespace detail {

inline double split_delta(double from, double to) {
  if (from == to) return 0.0;
  if (to == kInfiniteCost) return kInfiniteCost;
  if (from == kInfiniteCost) return -kInfiniteCost;
  return to - from;
}

// Argmin over splits: lowest cost, then closest to nominal, then more lanes forward.
inline int best_split(const PairCosts& pc, const std::vector<double>& costs) {
  int best = -1;
  for (int f = pc.min_forward(); f <= pc.max_forward(); ++f) {
    const double c = costs[static_cast<std::size_t>(f - pc.min_forward())];
    if (c == kInfiniteCost) continue;
    if (best < 0) { best = f; continue; }
    const double cb = costs[static_cast<std::size_t>(best - pc.min_forward())];
    const int db = std::abs(best - pc.nominal_forward), df = std::abs(f - pc.nominal_forward);
    if (c < cb || (c == cb && (df < db || (df == db && f > best)))) best = f;
  }
  if (best < 0)
    throw InfeasibleError("pair " + std::to_string(pc.pair) +
                          " has no finite-cost split (positive flow needs a lane in each direction)");
  return best;
}

// Exact cost at `lanes`, pair by pair then the fixed arcs. The piecewise sums
// only pick the split; they drift from this by rounding.
inline double exact_objective(const LaProblem& prob, const LaneConfig& lanes) {
  const Network& net = *prob.network;
  double c = 0.0;
  for (const PairCosts& pc : prob.pairs)
    c += arc_cost(prob.flows[pc.forward], lanes[pc.forward], net.arc(pc.forward).params) +
         arc_cost(prob.flows[pc.backward], lanes[pc.backward], net.arc(pc.backward).params);
  return c + prob.fixed_cost;
}

inline LaneOptResult finish_result(const LaProblem& prob, LaneConfig lanes, double objective) {
  const Network& net = *prob.network;
  LaneOptResult r;
  r.nominal = prob.nominal;
  r.objective = objective;
  r.nominal_objective = total_cost(net, prob.nominal, prob.flows);
  r.arc_cost_delta.resize(net.num_arcs());
  for (const Arc& a : net.arcs())
    r.arc_cost_delta[a.id] = arc_cost(prob.flows[a.id], lanes[a.id], a.params) -
                             arc_cost(prob.flows[a.id], prob.nominal[a.id], a.params);
  for (const PairCosts& pc : prob.pairs) r.reversals += std::abs(lanes[pc.forward] - pc.nominal_forward);
  r.lanes = std::move(lanes);
  r.budget = prob.budget;
  return r;
}

}  // namespace detail

inline LaneOptResult solve_la(const LaProblem& prob) {
  if (prob.budget) throw std::invalid_argument("solve_la: problem carries a budget, use solve_la_budget");
  LaneConfig z = prob.nominal;
  for (const PairCosts& pc : prob.pairs) {
    const int f = detail::best_split(pc, pc.split_costs());
    z[pc.forward] = f;
    z[pc.backward] = pc.total_lanes - f;
  }
  const double objective = detail::exact_objective(prob, z);
  return detail::finish_result(prob, std::move(z), objective);
}

// Result record for an arbitrary feasible configuration, objective from the
// exact BPR cost.
inline LaneOptResult evaluate_lanes(const LaProblem& prob, const LaneConfig& lanes) {
  if (!prob.network->is_feasible(lanes)) throw std::invalid_argument("lane configuration is not feasible");
  return detail::finish_result(prob, lanes, total_cost(*prob.network, lanes, prob.flows));
}

// Reversal-budgeted lane assignment: at most `budget` lanes moved away from
// the nominal split in total. Per pair, the cost along lane moves away from
// nominal is convex, so marginal gains shrink and repeatedly taking the most
// improving single-lane move is optimal for the budget.
inline LaneOptResult solve_la_budget(const LaProblem& prob) {
  if (!prob.budget) throw std::invalid_argument("solve_la_budget: problem has no budget");
  const int budget = *prob.budget;
  std::vector<std::vector<double>> costs;
  std::vector<int> split;
  costs.reserve(prob.pairs.size());
  for (const PairCosts& pc : prob.pairs) {
    costs.push_back(pc.split_costs());
    split.push_back(pc.nominal_forward);
  }
  auto cost_at = [&](std::size_t p, int f) {
    return costs[p][static_cast<std::size_t>(f - prob.pairs[p].min_forward())];
  };

  for (int used = 0; used < budget; ++used) {
    double best_delta = 0.0;
    std::size_t best_pair = 0;
    int best_move = 0;
    for (std::size_t p = 0; p < prob.pairs.size(); ++p) {
      const PairCosts& pc = prob.pairs[p];
      for (int move : {+1, -1}) {
        const int f = split[p] + move;
        if (f < pc.min_forward() || f > pc.max_forward()) continue;
        const double d = detail::split_delta(cost_at(p, split[p]), cost_at(p, f));
        if (d < best_delta) {
          best_delta = d;
          best_pair = p;
          best_move = move;
        }
      }
    }
    if (best_move == 0) break;
    split[best_pair] += best_move;
  }

  LaneConfig z = prob.nominal;
  for (std::size_t p = 0; p < prob.pairs.size(); ++p) {
    const PairCosts& pc = prob.pairs[p];
    z[pc.forward] = split[p];
    z[pc.backward] = pc.total_lanes - split[p];
  }
  const double objective = detail::exact_objective(prob, z);
  return detail::finish_result(prob, std::move(z), objective);
}

// ---------------------------------------------------------------------------
// LP relaxation

struct PairRelaxation {
  PairId pair = 0;
  double forward_lanes = 0.0;  // LP vertex, base lanes plus the sum of increments
  int optimal_forward_low = 0;  // ends of the interval of optimal splits
  int optimal_forward_high = 0;
  bool vertex_integral = true;
  double value = 0.0;
};

struct IntegralityReport {
  bool integral = true;
  double value = 0.0;
  std::vector<PairRelaxation> pairs;
};

// Solves, per pair, the LP whose variables are unit lane increments in [0, 1]
// for each direction with costs given by the piecewise slopes, subject to the
// increments filling the pair's free lanes exactly. This is a fractional
// knapsack with unit weights: fill the cheapest increments first.
inline IntegralityReport lp_relaxation_check(const LaProblem& prob) {
  if (prob.budget) throw std::invalid_argument("lp_relaxation_check: budgeted problems are not covered");
  IntegralityReport report;
  for (const PairCosts& pc : prob.pairs) {
    struct Item {
      double slope;
      int direction;  // 0 forward, 1 backward
      int index;
    };
    const PiecewiseCost& fc = pc.forward_cost;
    const PiecewiseCost& bc = pc.backward_cost;
    const int free_lanes = pc.total_lanes - fc.base_lanes - bc.base_lanes;
    if (free_lanes < 0 || fc.base == kInfiniteCost || bc.base == kInfiniteCost)
      throw InfeasibleError("pair " + std::to_string(pc.pair) + " has an empty LP feasible set");
    std::vector<Item> items;
    for (std::size_t k = 0; k < fc.slopes.size(); ++k) items.push_back({fc.slopes[k], 0, static_cast<int>(k)});
    for (std::size_t k = 0; k < bc.slopes.size(); ++k) items.push_back({bc.slopes[k], 1, static_cast<int>(k)});
    std::sort(items.begin(), items.end(), [](const Item& a, const Item& b) {
      if (a.slope != b.slope) return a.slope < b.slope;
      if (a.direction != b.direction) return a.direction < b.direction;
      return a.index < b.index;
    });

    PairRelaxation pr;
    pr.pair = pc.pair;
    double remaining = free_lanes;
    double value = fc.base + bc.base;
    double forward_fill = 0.0;
    double boundary_slope = -kInfiniteCost;
    for (const Item& it : items) {
      const double take = std::min(1.0, std::max(0.0, remaining));
      if (take > 0.0) boundary_slope = it.slope;
      if (take != 0.0 && take != 1.0) pr.vertex_integral = false;
      value += take * it.slope;
      if (it.direction == 0) forward_fill += take;
      remaining -= take;
    }
    pr.forward_lanes = fc.base_lanes + forward_fill;
    pr.value = value;

    // Alternative optima: increments priced exactly at the boundary slope can
    // be exchanged between directions.
    int strict_f = 0, strict_b = 0, tie_f = 0, tie_b = 0;
    if (free_lanes > 0) {
      for (const Item& it : items) {
        if (it.slope < boundary_slope) (it.direction == 0 ? strict_f : strict_b)++;
        else if (it.slope == boundary_slope) (it.direction == 0 ? tie_f : tie_b)++;
      }
    }
    const int need = free_lanes - strict_f - strict_b;
    pr.optimal_forward_low = fc.base_lanes + strict_f + std::max(0, need - tie_b);
    pr.optimal_forward_high = fc.base_lanes + strict_f + std::min(need, tie_f);

    report.integral = report.integral && pr.vertex_integral &&
                      pr.forward_lanes == std::floor(pr.forward_lanes);
    report.value += value;
    report.pairs.push_back(pr);
  }
  report.value += prob.fixed_cost;
  return report;
}

// ---------------------------------------------------------------------------
// Relaxed lower bound

struct RelaxedBoundSettings {
  double xi = 1e-9;           // stop when ||projected gradient|| < xi * max(1, J)
  double initial_step = 0.5;  // first trial move per pair, in lanes
  int max_sweeps = 20000;
  double interior_floor = 1e-3;  // lane floor for directions carrying flow

  void validate() const {
    if (!(xi > 0.0)) throw std::invalid_argument("relaxed bound tolerance xi must be > 0");
    if (!(initial_step > 0.0)) throw std::invalid_argument("relaxed bound initial step must be > 0");
    if (max_sweeps < 1) throw std::invalid_argument("relaxed bound needs at least one sweep");
  }
};

struct RelaxedBound {
  std::vector<double> lanes;    // per arc; non-reversible arcs at nominal
  double value = 0.0;           // exact cost at `lanes`
  std::vector<double> closed_form_lanes;
  double bound = 0.0;           // certified lower bound on the integer optimum
  double gradient_norm = 0.0;
  int sweeps = 0;
  bool converged = false;
  bool stalled = false;  // stopped because no step changed any coordinate
};

namespace detail {

struct RelaxedPair {
  ArcId forward, backward;
  DirectionState fwd, bwd;  // lanes field unused
  double total;
  int min_lanes;
  double lo, hi;  // iterate box for forward lanes

  double cost(double zf) const {
    return arc_cost(fwd.flow, zf, fwd.params) + arc_cost(bwd.flow, total - zf, bwd.params);
  }
  double gradient(double zf) const {
    const double zb = total - zf;
    if (zf > 0.0 && zb > 0.0)
      return pair_gradient({{fwd.params, fwd.flow, zf}, {bwd.params, bwd.flow, zb}});
    return arc_cost_lane_derivative(fwd.flow, zf, fwd.params) -
           arc_cost_lane_derivative(bwd.flow, zb, bwd.params);
  }
  double projected_gradient(double zf) const {
    const double g = gradient(zf);
    if ((zf <= lo && g > 0.0) || (zf >= hi && g < 0.0)) return 0.0;
    return g;
  }
};

inline std::vector<RelaxedPair> relaxed_pairs(const Network& net, const FlowVector& flows,
                                              double interior_floor) {
  std::vector<RelaxedPair> out;
  for (const ArcPair& p : net.pairs()) {
    const Arc& f = net.arc(p.forward);
    const Arc& b = net.arc(p.backward);
    RelaxedPair rp{p.forward, p.backward, {f.params, flows[f.id], 0.0}, {b.params, flows[b.id], 0.0},
                   static_cast<double>(p.total_lanes), p.min_lanes, 0.0, 0.0};
    const double floor_f = flows[f.id] > 0.0 ? std::max<double>(p.min_lanes, interior_floor) : p.min_lanes;
    const double floor_b = flows[b.id] > 0.0 ? std::max<double>(p.min_lanes, interior_floor) : p.min_lanes;
    rp.lo = floor_f;
    rp.hi = rp.total - floor_b;
    if (rp.lo > rp.hi) throw InfeasibleError("pair too narrow for its flows");
    out.push_back(rp);
  }
  return out;
}

// Exact minimiser of the continuous pair cost over [min_lanes, n - min_lanes].
// With equal BPR powers the stationary point is n a / (a + b) with
// a = gamma_ij^(1/(p+1)) x_ij; otherwise the monotone gradient is bisected.
inline double relaxed_pair_minimizer(const RelaxedPair& rp, double nominal_forward) {
  const double lo = rp.min_lanes, hi = rp.total - rp.min_lanes;
  if (rp.fwd.flow == 0.0 && rp.bwd.flow == 0.0) return std::clamp(nominal_forward, lo, hi);
  const double pf = rp.fwd.params.bpr.power, pb = rp.bwd.params.bpr.power;
  if (pf == pb) {
    const double a = std::pow(congestion_coefficient(rp.fwd.params), 1.0 / (pf + 1.0)) * rp.fwd.flow;
    const double b = std::pow(congestion_coefficient(rp.bwd.params), 1.0 / (pb + 1.0)) * rp.bwd.flow;
    if (a + b > 0.0) return std::clamp(rp.total * a / (a + b), lo, hi);
  }
  double left = std::max(lo, rp.fwd.flow > 0.0 ? 1e-12 : 0.0);
  double right = std::min(hi, rp.total - (rp.bwd.flow > 0.0 ? 1e-12 : 0.0));
  if (rp.gradient(left) >= 0.0) return left;
  if (rp.gradient(right) <= 0.0) return right;
  for (int i = 0; i < 200 && right - left > 1e-15 * rp.total; ++i) {
    const double mid = 0.5 * (left + right);
    if (rp.gradient(mid) > 0.0) right = mid;
    else left = mid;
  }
  return 0.5 * (left + right);
}

}  // namespace detail

// Coordinate projected-gradient descent on real lane counts with per-pair
// adaptive steps (halve and reject on increase, grow 1.1x on decrease). The
// reported `bound` is the exact relaxed optimum per pair, lowered to the
// cost of a neighbouring integer split where rounding would place it above.
inline RelaxedBound relaxed_lower_bound(const Network& net, const FlowVector& flows,
                                        const RelaxedBoundSettings& settings = {},
                                        std::optional<LaneConfig> nominal = std::nullopt) {
  settings.validate();
  if (flows.size() != net.num_arcs()) throw std::invalid_argument("flow vector size mismatch");
  const LaneConfig z0 = nominal ? *nominal : net.nominal_lanes();
  std::vector<detail::RelaxedPair> pairs = detail::relaxed_pairs(net, flows, settings.interior_floor);

  double fixed = 0.0;
  for (const Arc& a : net.arcs())
    if (!a.reversible) fixed += arc_cost(flows[a.id], z0[a.id], a.params);

  const std::size_t np = pairs.size();
  std::vector<double> z(np), step(np), value(np);
  for (std::size_t p = 0; p < np; ++p) {
    z[p] = std::clamp<double>(z0[pairs[p].forward], pairs[p].lo, pairs[p].hi);
    value[p] = pairs[p].cost(z[p]);
    const double g = std::abs(pairs[p].gradient(z[p]));
    step[p] = g > 0.0 ? settings.initial_step / g : settings.initial_step;
  }
  auto total = [&] {
    double s = 0.0;
    for (double v : value) s += v;
    return s + fixed;
  };

  RelaxedBound rb;
  for (rb.sweeps = 0; rb.sweeps < settings.max_sweeps; ++rb.sweeps) {
    double norm2 = 0.0;
    for (std::size_t p = 0; p < np; ++p) {
      const double pg = pairs[p].projected_gradient(z[p]);
      norm2 += pg * pg;
    }
    rb.gradient_norm = std::sqrt(norm2);
    if (rb.gradient_norm < settings.xi * std::max(1.0, total())) {
      rb.converged = true;
      break;
    }
    bool moved = false;
    for (std::size_t p = 0; p < np; ++p) {
      const detail::RelaxedPair& rp = pairs[p];
      const double g = rp.projected_gradient(z[p]);
      if (g == 0.0) continue;
      const double candidate = std::clamp(z[p] - step[p] * g, rp.lo, rp.hi);
      if (candidate == z[p]) continue;
      moved = true;
      const double v = rp.cost(candidate);
      if (v <= value[p]) {
        z[p] = candidate;
        value[p] = v;
        step[p] *= 1.1;
      } else {
        step[p] *= 0.5;
      }
    }
    if (!moved) {
      rb.stalled = rb.converged = true;
      break;
    }
  }

  rb.lanes.assign(net.num_arcs(), 0.0);
  rb.closed_form_lanes.assign(net.num_arcs(), 0.0);
  for (const Arc& a : net.arcs())
    if (!a.reversible) rb.lanes[a.id] = rb.closed_form_lanes[a.id] = z0[a.id];

  double bound = 0.0;
  for (std::size_t p = 0; p < np; ++p) {
    const detail::RelaxedPair& rp = pairs[p];
    rb.lanes[rp.forward] = z[p];
    rb.lanes[rp.backward] = rp.total - z[p];
    const double zc = detail::relaxed_pair_minimizer(rp, z0[rp.forward]);
    rb.closed_form_lanes[rp.forward] = zc;
    rb.closed_form_lanes[rp.backward] = rp.total - zc;
    // The integer optimum of a convex 1-D cost sits at floor or ceil of the
    // continuous minimiser, so neither neighbour can undercut the true bound.
    const double lo = rp.min_lanes, hi = rp.total - rp.min_lanes;
    double b = rp.cost(zc);
    b = std::min(b, rp.cost(std::clamp(std::floor(zc), lo, hi)));
    b = std::min(b, rp.cost(std::clamp(std::ceil(zc), lo, hi)));
    bound += b;
  }
  rb.value = total();
  rb.bound = bound + fixed;
  return rb;
}

// Rounds each pair's forward lanes to the nearest integer (exact halves go
// towards nominal), clamps to the pair's range and gives the rest backward.
inline LaneConfig project_bound(const Network& net, const std::vector<double>& lanes,
                                std::optional<LaneConfig> nominal = std::nullopt) {
  if (lanes.size() != net.num_arcs()) throw std::invalid_argument("lane vector size mismatch");
  LaneConfig z = nominal ? *nominal : net.nominal_lanes();
  for (const ArcPair& p : net.pairs()) {
    const double v = lanes[p.forward];
    const double lo = std::floor(v);
    const double frac = v - lo;
    double r;
    if (frac < 0.5) r = lo;
    else if (frac > 0.5) r = lo + 1.0;
    else r = z[p.forward] >= lo + 1.0 ? lo + 1.0 : lo;
    const int f = std::clamp(static_cast<int>(r), p.min_lanes, p.total_lanes - p.min_lanes);
    z[p.forward] = f;
    z[p.backward] = p.total_lanes - f;
  }
  return z;
}

// ---------------------------------------------------------------------------
// Exhaustive oracles

struct PairSplit {
  int forward_lanes = 0;
  double cost = 0.0;
};

// Scans every split evaluating the BPR cost directly; ties as in solve_la.
inline PairSplit brute_force_pair(const PairState& s, int total_lanes, int min_lanes,
                                  int nominal_forward) {
  if (total_lanes > 32) throw std::invalid_argument("brute_force_pair supports at most 32 lanes");
  PairSplit best{-1, kInfiniteCost};
  for (int f = min_lanes; f <= total_lanes - min_lanes; ++f) {
    const double c = arc_cost(s.forward.flow, f, s.forward.params) +
                     arc_cost(s.backward.flow, total_lanes - f, s.backward.params);
    if (c == kInfiniteCost) continue;
    if (best.forward_lanes < 0) { best = {f, c}; continue; }
    const int db = std::abs(best.forward_lanes - nominal_forward), df = std::abs(f - nominal_forward);
    if (c < best.cost || (c == best.cost && (df < db || (df == db && f > best.forward_lanes))))
      best = {f, c};
  }
  if (best.forward_lanes < 0) throw InfeasibleError("no finite-cost split");
  return best;
}

struct BruteForceResult {
  LaneConfig lanes;
  double objective = 0.0;
  int reversals = 0;
};

// Enumerates all configurations moving at most `budget` lanes from nominal.
inline BruteForceResult brute_force_budget(const Network& net, const FlowVector& flows,
                                           const LaneConfig& nominal, int budget) {
  if (net.num_pairs() > 8) throw std::invalid_argument("brute_force_budget: more than 8 pairs");
  double combos = 1.0;
  for (const ArcPair& p : net.pairs()) combos *= p.total_lanes - 2 * p.min_lanes + 1;
  if (combos > 1e6) throw std::invalid_argument("brute_force_budget: instance too large");

  double fixed = 0.0;
  for (const Arc& a : net.arcs())
    if (!a.reversible) fixed += arc_cost(flows[a.id], nominal[a.id], a.params);

  const auto& pairs = net.pairs();
  std::vector<int> f(pairs.size());
  for (std::size_t p = 0; p < pairs.size(); ++p) f[p] = pairs[p].min_lanes;

  BruteForceResult best{nominal, kInfiniteCost, 0};
  while (true) {
    int moved = 0;
    for (std::size_t p = 0; p < pairs.size(); ++p) moved += std::abs(f[p] - nominal[pairs[p].forward]);
    if (moved <= budget) {
      double c = 0.0;
      for (std::size_t p = 0; p < pairs.size(); ++p) {
        const Arc& fa = net.arc(pairs[p].forward);
        const Arc& ba = net.arc(pairs[p].backward);
        c += arc_cost(flows[fa.id], f[p], fa.params) +
             arc_cost(flows[ba.id], pairs[p].total_lanes - f[p], ba.params);
      }
      c += fixed;
      if (c < best.objective || (c == best.objective && moved < best.reversals)) {
        best.objective = c;
        best.reversals = moved;
        for (std::size_t p = 0; p < pairs.size(); ++p) {
          best.lanes[pairs[p].forward] = f[p];
          best.lanes[pairs[p].backward] = pairs[p].total_lanes - f[p];
        }
      }
    }
    std::size_t p = 0;
    for (; p < pairs.size(); ++p) {
      if (++f[p] <= pairs[p].total_lanes - pairs[p].min_lanes) break;
      f[p] = pairs[p].min_lanes;
    }
    if (p == pairs.size()) break;
  }
  if (best.objective == kInfiniteCost) throw InfeasibleError("no finite-cost configuration");
  return best;
}

}  // namespace contraflow
