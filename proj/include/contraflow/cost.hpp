#pragma once

// Closed-form arc cost mathematics under the BPR latency
//   t(x, z) = t0 * (1 + alpha * (x / (c z))^p)
// and the per-arc total cost J(x, z) = x * t(x, z).

#include <cassert>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <utility>
#include <vector>

#include "contraflow/model.hpp"

namespace contraflow {

inline constexpr double kInfiniteCost = std::numeric_limits<double>::infinity();

namespace detail {

inline double power(double base, double exponent) {
  if (exponent == 4.0) {
    const double b2 = base * base;
    return b2 * b2;
  }
  if (exponent == 5.0) {
    const double b2 = base * base;
    return b2 * b2 * base;
  }
  return std::pow(base, exponent);
}

inline void check_arc_inputs(double x, double z, const ArcParams& p) {
  if (!(p.lane_capacity > 0.0) || !(p.free_flow_time > 0.0) || !(x >= 0.0) || !(z >= 0.0))
    throw std::domain_error("BPR inputs must satisfy c > 0, t0 > 0, x >= 0, z >= 0");
}

}  // namespace detail

// gamma = alpha * t0 / c^p, so that J = t0 x + gamma x^(p+1) / z^p.
inline double congestion_coefficient(const ArcParams& p) {
  return p.bpr.alpha * p.free_flow_time / detail::power(p.lane_capacity, p.bpr.power);
}

inline double bpr_time(double x, double z, const ArcParams& p) {
  detail::check_arc_inputs(x, z, p);
  if (x == 0.0) return p.free_flow_time;
  if (z == 0.0) return kInfiniteCost;
  const double ratio = x / (p.lane_capacity * z);
  return p.free_flow_time * (1.0 + p.bpr.alpha * detail::power(ratio, p.bpr.power));
}

inline double bpr_time(double x, double z, double c, double t0) {
  return bpr_time(x, z, ArcParams{c, t0, {}});
}

inline double arc_cost(double x, double z, const ArcParams& p) {
  detail::check_arc_inputs(x, z, p);
  if (x == 0.0) return 0.0;
  return x * bpr_time(x, z, p);
}

inline double arc_cost(double x, double z, double c, double t0) {
  return arc_cost(x, z, ArcParams{c, t0, {}});
}

// Congestion part of J only: gamma x^(p+1) / z^p. Differences of J at fixed x
// are computed from this term so the constant t0 x cancels exactly.
inline double congestion_cost(double x, double z, const ArcParams& p) {
  if (x == 0.0) return 0.0;
  if (z == 0.0) return kInfiniteCost;
  const double ratio = x / (p.lane_capacity * z);
  return x * p.free_flow_time * p.bpr.alpha * detail::power(ratio, p.bpr.power);
}

// dJ/dz at fixed flow: -p * gamma x^(p+1) / z^(p+1).
inline double arc_cost_lane_derivative(double x, double z, const ArcParams& p) {
  if (x == 0.0) return 0.0;
  return -p.bpr.power * congestion_cost(x, z, p) / z;
}

struct DirectionState {
  ArcParams params{};
  double flow = 0.0;
  double lanes = 0.0;
};

struct PairState {
  DirectionState forward;
  DirectionState backward;
};

enum class Direction { Forward, Backward };

inline PairState swapped(const PairState& s) { return {s.backward, s.forward}; }

// Derivative of J_ij + J_ji when capacity moves from the backward arc to the
// forward arc at fixed flows.
inline double pair_gradient(const PairState& s) {
  if (!(s.forward.lanes > 0.0) || !(s.backward.lanes > 0.0))
    throw std::domain_error("pair_gradient needs an interior state (both lane counts > 0)");
  return arc_cost_lane_derivative(s.forward.flow, s.forward.lanes, s.forward.params) -
         arc_cost_lane_derivative(s.backward.flow, s.backward.lanes, s.backward.params);
}

inline double pair_cost(const PairState& s) {
  return arc_cost(s.forward.flow, s.forward.lanes, s.forward.params) +
         arc_cost(s.backward.flow, s.backward.lanes, s.backward.params);
}

// Fixed-flow change in pair cost when one lane is reversed towards `gaining`.
// Moves that push the losing direction below `min_lanes` return +inf.
inline double psi_hat(const PairState& s, Direction gaining, int min_lanes = 1) {
  const PairState& o = gaining == Direction::Forward ? s : swapped(s);
  const DirectionState& gain = o.forward;
  const DirectionState& lose = o.backward;
  if (lose.lanes - 1.0 < static_cast<double>(min_lanes)) return kInfiniteCost;
  const double after = arc_cost(gain.flow, gain.lanes + 1.0, gain.params) +
                       arc_cost(lose.flow, lose.lanes - 1.0, lose.params);
  const double before = arc_cost(gain.flow, gain.lanes, gain.params) +
                        arc_cost(lose.flow, lose.lanes, lose.params);
  if (after == kInfiniteCost) return kInfiniteCost;
  return after - before;
}

// Piecewise-affine representation of J for one arc at a fixed flow, with
// integer breakpoints. Lane counts in [floor_lanes, base_lanes) cost +inf
// (positive flow on zero lanes); from base_lanes on, the value at
// base_lanes + k is base + slopes[0] + ... + slopes[k-1].
struct PiecewiseCost {
  ArcId arc = 0;
  int floor_lanes = 0;
  int base_lanes = 0;
  double base = 0.0;
  std::vector<double> slopes;

  int max_lanes() const { return base_lanes + static_cast<int>(slopes.size()); }

  double value(int lanes) const {
    if (lanes < floor_lanes || lanes > max_lanes())
      throw std::out_of_range("lane count outside the piecewise cost domain");
    if (lanes < base_lanes) return kInfiniteCost;
    double v = base;
    for (int k = 0; k < lanes - base_lanes; ++k) v += slopes[static_cast<std::size_t>(k)];
    return v;
  }

  // Cost change from `lanes` to `lanes + 1`.
  double step(int lanes) const {
    if (lanes < floor_lanes || lanes >= max_lanes())
      throw std::out_of_range("lane step outside the piecewise cost domain");
    if (lanes < base_lanes) return -kInfiniteCost;
    return slopes[static_cast<std::size_t>(lanes - base_lanes)];
  }
};

// Breakpoints at every integer lane count in [min_lanes, max_lanes].
inline PiecewiseCost build_piecewise_arc(ArcId arc, const ArcParams& p, double flow,
                                         int min_lanes, int max_lanes) {
  if (!(flow >= 0.0)) throw std::domain_error("flow must be nonnegative");
  PiecewiseCost pc;
  pc.arc = arc;
  pc.floor_lanes = min_lanes;
  pc.base_lanes = (flow > 0.0 && min_lanes == 0) ? 1 : min_lanes;
  if (pc.base_lanes > max_lanes) {
    // Only infinite-cost points in range; keep an empty piece anchored at max.
    pc.base_lanes = max_lanes + 1;
    pc.base = kInfiniteCost;
    return pc;
  }
  pc.base = arc_cost(flow, pc.base_lanes, p);
  pc.slopes.reserve(static_cast<std::size_t>(max_lanes - pc.base_lanes));
  for (int z = pc.base_lanes; z < max_lanes; ++z) {
    const double s = congestion_cost(flow, z + 1.0, p) - congestion_cost(flow, z, p);
    pc.slopes.push_back(s);
  }
  // J is convex in z; rounding may only disturb this by a few ulps.
  for (std::size_t k = 1; k < pc.slopes.size(); ++k) {
    assert(pc.slopes[k] >= pc.slopes[k - 1] - 1e-12 * std::abs(pc.slopes[k - 1]));
    if (pc.slopes[k] < pc.slopes[k - 1]) pc.slopes[k] = pc.slopes[k - 1];
  }
  return pc;
}

// Forward and backward piecewise costs for a pair with `total_lanes` lanes.
// The lanes fields of `s` are ignored.
inline std::pair<PiecewiseCost, PiecewiseCost> build_piecewise(const PairState& s,
                                                               ArcId forward_arc,
                                                               ArcId backward_arc,
                                                               int total_lanes, int min_lanes) {
  if (total_lanes < 2 * min_lanes)
    throw InfeasibleError("pair has fewer lanes than twice the per-direction minimum");
  return {build_piecewise_arc(forward_arc, s.forward.params, s.forward.flow, min_lanes,
                              total_lanes - min_lanes),
          build_piecewise_arc(backward_arc, s.backward.params, s.backward.flow, min_lanes,
                              total_lanes - min_lanes)};
}

inline double total_cost(const Network& net, const LaneConfig& lanes, const FlowVector& flows) {
  if (lanes.size() != net.num_arcs() || flows.size() != net.num_arcs())
    throw std::invalid_argument("lane/flow vector size does not match the network");
  double sum = 0.0;
  for (const Arc& a : net.arcs()) {
    sum += arc_cost(flows[a.id], lanes[a.id], a.params);
  }
  return sum;
}

inline PairState pair_state(const Network& net, PairId pid, const FlowVector& flows,
                            const LaneConfig& lanes) {
  const ArcPair& p = net.pair(pid);
  const Arc& f = net.arc(p.forward);
  const Arc& b = net.arc(p.backward);
  return {{f.params, flows[f.id], static_cast<double>(lanes[f.id])},
          {b.params, flows[b.id], static_cast<double>(lanes[b.id])}};
}

}  // namespace contraflow
