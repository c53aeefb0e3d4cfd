#include <gtest/gtest.h>

#include <random>

#include "support/oracles.hpp"

namespace cf = contraflow;

namespace {

cf::ArcParams unit_params() { return {1.0, 1.0, {0.15, 4.0}}; }

cf::PairState state(double xf, double zf, double xb, double zb, cf::ArcParams p = unit_params()) {
  return {{p, xf, zf}, {p, xb, zb}};
}

}  // namespace

TEST(BprTime, FreeFlowAtZeroFlow) { EXPECT_DOUBLE_EQ(cf::bpr_time(0.0, 1.0, 1.0, 1.0), 1.0); }

TEST(BprTime, UnitRatio) {
  EXPECT_DOUBLE_EQ(cf::bpr_time(1.0, 1.0, 1.0, 1.0), 1.15);
  EXPECT_DOUBLE_EQ(cf::bpr_time(2.0, 2.0, 1.0, 1.0), 1.15);
}

TEST(BprTime, ZeroLanes) {
  EXPECT_EQ(cf::bpr_time(1.0, 0.0, 1.0, 1.0), cf::kInfiniteCost);
  EXPECT_DOUBLE_EQ(cf::bpr_time(0.0, 0.0, 1.0, 1.0), 1.0);
}

TEST(BprTime, RejectsBadInputs) {
  EXPECT_THROW(cf::bpr_time(-1.0, 1.0, 1.0, 1.0), std::domain_error);
  EXPECT_THROW(cf::bpr_time(1.0, -1.0, 1.0, 1.0), std::domain_error);
  EXPECT_THROW(cf::bpr_time(1.0, 1.0, 0.0, 1.0), std::domain_error);
}

TEST(BprTime, MatchesReference) {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(0.1, 5.0);
  for (int i = 0; i < 200; ++i) {
    const double x = 1000 * u(rng), z = u(rng), c = 400 * u(rng), t0 = u(rng);
    EXPECT_NEAR(cf::bpr_time(x, z, c, t0), oracle::bpr_reference(x, z, c, t0),
                1e-12 * oracle::bpr_reference(x, z, c, t0));
  }
}

TEST(ArcCost, Examples) {
  EXPECT_DOUBLE_EQ(cf::arc_cost(2.0, 2.0, 1.0, 1.0), 2.3);
  EXPECT_DOUBLE_EQ(cf::arc_cost(0.0, 0.0, 1.0, 1.0), 0.0);
  // x t = 2 (1 + 0.15 * 2^4)
  EXPECT_DOUBLE_EQ(cf::arc_cost(2.0, 1.0, 1.0, 1.0), 2.0 * oracle::bpr_reference(2, 1, 1, 1));
  EXPECT_NEAR(cf::arc_cost(2.0, 1.0, 1.0, 1.0), 6.8, 1e-12);
  EXPECT_EQ(cf::arc_cost(1.0, 0.0, 1.0, 1.0), cf::kInfiniteCost);
}

TEST(ArcCost, NonincreasingAndConvexInLanes) {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(0.1, 3.0);
  for (int i = 0; i < 100; ++i) {
    const cf::ArcParams p{1000 * u(rng), u(rng), {}};
    const double x = 2000 * u(rng);
    double prev = cf::kInfiniteCost, prev_step = -cf::kInfiniteCost;
    for (int z = 1; z <= 8; ++z) {
      const double j = cf::arc_cost(x, z, p);
      EXPECT_LE(j, prev);
      if (z > 1) {
        const double step = j - prev;
        if (z > 2) {
          EXPECT_GE(step, prev_step - 1e-9 * std::abs(prev_step));
        }
        prev_step = step;
      }
      prev = j;
    }
  }
}

TEST(PairGradient, SymmetricIsZero) {
  EXPECT_DOUBLE_EQ(cf::pair_gradient(state(1.7, 2.0, 1.7, 2.0)), 0.0);
}

TEST(PairGradient, Example) {
  const cf::PairState s = state(1.0, 1.0, 0.0, 1.0);
  EXPECT_NEAR(cf::pair_gradient(s), -0.6, 1e-14);
  const double fd = oracle::central_difference(
      [&](double d) { return cf::pair_cost(state(1.0, 1.0 + d, 0.0, 1.0 - d)); }, 0.0, 1e-4);
  EXPECT_NEAR(cf::pair_gradient(s), fd, 1e-6 * 0.6);
}

TEST(PairGradient, NeedsInteriorState) {
  EXPECT_THROW(cf::pair_gradient(state(1.0, 0.0, 1.0, 2.0)), std::domain_error);
}

TEST(PairGradient, MatchesFiniteDifferences) {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> t0(0.5, 2.0), cap(500, 2000), lanes(0.5, 6.0), u(0.0, 1.0);
  for (int i = 0; i < 300; ++i) {
    const cf::ArcParams pf{cap(rng), t0(rng), {}}, pb{cap(rng), t0(rng), {}};
    const double zf = lanes(rng), zb = lanes(rng);
    const double xf = u(rng) * 2.0 * pf.lane_capacity * zf, xb = u(rng) * 2.0 * pb.lane_capacity * zb;
    const cf::PairState s{{pf, xf, zf}, {pb, xb, zb}};
    auto f = [&](double d) {
      return cf::arc_cost(xf, zf + d, pf) + cf::arc_cost(xb, zb - d, pb);
    };
    const double fd = oracle::central_difference(f, 0.0, 1e-4);
    const double scale = std::abs(cf::arc_cost_lane_derivative(xf, zf, pf)) +
                         std::abs(cf::arc_cost_lane_derivative(xb, zb, pb));
    EXPECT_LE(std::abs(cf::pair_gradient(s) - fd), 1e-6 * std::max(scale, 1e-12)) << "case " << i;
  }
}

TEST(PsiHat, Example) {
  const cf::PairState s = state(2.0, 2.0, 2.0, 2.0);
  const double expected = (2.0 + 4.8 / 81.0) + (2.0 + 4.8) - 2.3 - 2.3;
  EXPECT_NEAR(cf::psi_hat(s, cf::Direction::Forward), expected, 1e-12);
  EXPECT_NEAR(expected, 4.259259259259, 1e-11);
  EXPECT_DOUBLE_EQ(cf::psi_hat(s, cf::Direction::Forward), cf::psi_hat(s, cf::Direction::Backward));
}

TEST(PsiHat, ReversalTowardsLoadedSideHelps) {
  const cf::PairState s = state(2.0, 1.0, 0.0, 1.0);
  // Losing side would reach zero lanes, below the default minimum of 1.
  EXPECT_EQ(cf::psi_hat(s, cf::Direction::Forward), cf::kInfiniteCost);
  EXPECT_LT(cf::psi_hat(s, cf::Direction::Forward, 0), 0.0);
  EXPECT_LT(cf::psi_hat(state(2.0, 1.0, 0.0, 2.0), cf::Direction::Forward), 0.0);
}

TEST(PsiHat, MatchesDirectEvaluation) {
  std::mt19937_64 rng(13);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int i = 0; i < 100; ++i) {
    const cf::ArcParams p{1000.0, 1.0, {}};
    const double zf = 1 + std::floor(4 * u(rng)), zb = 2 + std::floor(4 * u(rng));
    const double xf = 3000 * u(rng), xb = 3000 * u(rng);
    const double before = xf * oracle::bpr_reference(xf, zf, 1000, 1) + xb * oracle::bpr_reference(xb, zb, 1000, 1);
    const double after =
        xf * oracle::bpr_reference(xf, zf + 1, 1000, 1) + xb * oracle::bpr_reference(xb, zb - 1, 1000, 1);
    EXPECT_NEAR(cf::psi_hat(state(xf, zf, xb, zb, p), cf::Direction::Forward), after - before,
                1e-9 * std::max(1.0, before));
  }
}

TEST(Piecewise, ZeroFlowHasFlatSlopes) {
  const auto pc = cf::build_piecewise_arc(0, unit_params(), 0.0, 1, 5);
  EXPECT_EQ(pc.base, 0.0);
  for (double s : pc.slopes) EXPECT_EQ(s, 0.0);
}

TEST(Piecewise, Example) {
  const auto pc = cf::build_piecewise_arc(0, unit_params(), 2.0, 1, 3);
  ASSERT_EQ(pc.slopes.size(), 2u);
  EXPECT_NEAR(pc.slopes[0], -4.5, 1e-12);
  EXPECT_NEAR(pc.slopes[1], 2.0 + 4.8 / 81.0 - 2.3, 1e-12);
  EXPECT_NEAR(pc.slopes[1], -0.2407, 1e-4);
  for (int k = 1; k <= 3; ++k) EXPECT_NEAR(pc.value(k), cf::arc_cost(2.0, k, unit_params()), 1e-12);
}

TEST(Piecewise, ZeroLanesWithFlowIsInfinite) {
  const auto pc = cf::build_piecewise_arc(0, unit_params(), 1.0, 0, 3);
  EXPECT_EQ(pc.value(0), cf::kInfiniteCost);
  EXPECT_NEAR(pc.value(2), cf::arc_cost(1.0, 2.0, unit_params()), 1e-12);
}

TEST(Piecewise, AnchoredAndConvexOnRandomArcs) {
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> t0(0.5, 2.0), cap(500, 2000), u(0.0, 1.0);
  for (int i = 0; i < 200; ++i) {
    const cf::ArcParams p{cap(rng), t0(rng), {}};
    const double x = 3 * p.lane_capacity * 6 * u(rng);
    const auto pc = cf::build_piecewise_arc(0, p, x, 1, 8);
    for (std::size_t k = 1; k < pc.slopes.size(); ++k) EXPECT_LE(pc.slopes[k - 1], pc.slopes[k]);
    for (double s : pc.slopes) EXPECT_LE(s, 0.0);
    for (int z = 1; z <= 8; ++z) {
      const double j = cf::arc_cost(x, z, p);
      EXPECT_LE(std::abs(pc.value(z) - j), 1e-9 * std::max(1.0, j));
    }
  }
}

TEST(TotalCost, Examples) {
  const auto net = cf::Network::build({1, 2}, {{1, 2, unit_params(), 1}, {2, 1, unit_params(), 1}});
  EXPECT_EQ(cf::total_cost(net, net.nominal_lanes(), {{0.0, 0.0}}), 0.0);
  const auto one = cf::Network::build({1, 2}, {{1, 2, unit_params(), 1}});
  EXPECT_NEAR(cf::total_cost(one, one.nominal_lanes(), {{2.0}}), 6.8, 1e-12);
}

TEST(Network, PairsOppositeArcs) {
  const cf::ArcParams p{1000, 1, {}};
  const auto net = cf::Network::build({1, 2, 3}, {{2, 1, p, 2}, {1, 2, p, 2}, {2, 3, p, 1}, {3, 1, p, 1}});
  ASSERT_EQ(net.num_pairs(), 1u);
  const cf::ArcPair& pr = net.pair(0);
  EXPECT_EQ(pr.total_lanes, 4);
  EXPECT_EQ(net.node_id(net.arc(pr.forward).tail), 1);
  EXPECT_EQ(net.node_id(net.arc(pr.backward).tail), 2);
  int fixed = 0;
  for (const auto& a : net.arcs()) fixed += a.reversible ? 0 : 1;
  EXPECT_EQ(fixed, 2);
  EXPECT_TRUE(net.is_strongly_connected());
  EXPECT_EQ(net.total_lanes(), 6);
}

TEST(Network, OrderIndependent) {
  const cf::ArcParams p{1000, 1, {}};
  std::vector<cf::ArcSpec> specs{{1, 2, p, 2}, {2, 1, p, 1}, {2, 3, p, 1}, {3, 2, p, 3}, {3, 1, p, 1}};
  const auto a = cf::Network::build({1, 2, 3}, specs);
  std::reverse(specs.begin(), specs.end());
  const auto b = cf::Network::build({3, 2, 1}, specs);
  ASSERT_EQ(a.num_arcs(), b.num_arcs());
  for (std::size_t i = 0; i < a.num_arcs(); ++i) {
    EXPECT_EQ(a.arc(i).tail, b.arc(i).tail);
    EXPECT_EQ(a.arc(i).head, b.arc(i).head);
    EXPECT_EQ(a.arc(i).pair, b.arc(i).pair);
  }
}

TEST(Network, ThinRoadsAreNotReversible) {
  const cf::ArcParams p{1000, 1, {}};
  const auto net = cf::Network::build({1, 2}, {{1, 2, p, 2}, {2, 1, p, 0}});
  EXPECT_EQ(net.num_pairs(), 0u);
  EXPECT_FALSE(net.is_strongly_connected());
  const auto loose = cf::Network::build({1, 2}, {{1, 2, p, 2}, {2, 1, p, 0}}, 0);
  EXPECT_EQ(loose.num_pairs(), 1u);
}

TEST(Network, RejectsBadArcs) {
  const cf::ArcParams p{1000, 1, {}};
  EXPECT_THROW(cf::Network::build({1}, {{1, 1, p, 1}}), std::invalid_argument);
  EXPECT_THROW(cf::Network::build({1, 2}, {{1, 3, p, 1}}), std::invalid_argument);
  EXPECT_THROW(cf::Network::build({1, 2}, {{1, 2, {0.0, 1.0, {}}, 1}}), std::invalid_argument);
  EXPECT_THROW(cf::Network::build({1, 2}, {{1, 2, p, -1}}), std::invalid_argument);
}

TEST(Network, Feasibility) {
  const cf::ArcParams p{1000, 1, {}};
  const auto net = cf::Network::build({1, 2}, {{1, 2, p, 2}, {2, 1, p, 2}});
  EXPECT_TRUE(net.is_feasible({{3, 1}}));
  EXPECT_FALSE(net.is_feasible({{4, 0}}));
  EXPECT_FALSE(net.is_feasible({{3, 2}}));
  EXPECT_FALSE(net.is_feasible({{3}}));
}

TEST(ODMatrix, MultiplierAndMerging) {
  const cf::ArcParams p{1000, 1, {}};
  const auto net = cf::Network::build({1, 2, 3}, {{1, 2, p, 1}, {2, 3, p, 1}, {3, 1, p, 1}});
  const cf::ODMatrix od(net, {{0, 2, 10.0}}, 1.5);
  EXPECT_DOUBLE_EQ(od.demand(0), 15.0);
  const cf::ODMatrix merged(net, {{1, 2, 1.0}, {0, 2, 2.0}, {1, 2, 3.0}, {0, 1, 0.0}});
  ASSERT_EQ(merged.size(), 2u);
  EXPECT_EQ(merged.entries()[0].origin, 0);
  EXPECT_DOUBLE_EQ(merged.demand(1), 4.0);
  EXPECT_DOUBLE_EQ(merged.with_multiplier(2.0).total_demand(), 12.0);
}

TEST(ODMatrix, Rejects) {
  const cf::ArcParams p{1000, 1, {}};
  const auto net = cf::Network::build({1, 2}, {{1, 2, p, 1}, {2, 1, p, 1}});
  EXPECT_THROW(cf::ODMatrix(net, {{0, 1, 1.0}}, 0.0), std::invalid_argument);
  EXPECT_THROW(cf::ODMatrix(net, {{0, 1, -1.0}}), std::invalid_argument);
  EXPECT_THROW(cf::ODMatrix(net, {{0, 0, 1.0}}), std::invalid_argument);
  EXPECT_THROW(cf::ODMatrix(net, {{0, 5, 1.0}}), std::invalid_argument);
  EXPECT_NO_THROW(cf::ODMatrix(net, {{1, 1, 0.0}}));
}
