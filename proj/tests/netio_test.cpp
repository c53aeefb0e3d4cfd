#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <random>

#include "support/oracles.hpp"

namespace cf = contraflow;
namespace fs = std::filesystem;

namespace {

class TempDir : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("contraflow_netio_" + std::to_string(::getpid()) + "_" +
            ::testing::UnitTest::GetInstance()->current_test_info()->name());
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  std::string write(const std::string& name, const std::string& content) {
    const auto p = dir_ / name;
    std::ofstream(p) << content;
    return p.string();
  }

  fs::path dir_;
};

const char* kHeader = "<NUMBER OF NODES> 3\n<END OF METADATA>\n~ init term cap len fftt b power speed toll type ;\n";

}  // namespace

using NetworkFile = TempDir;

TEST_F(NetworkFile, LanesDerivedFromCapacity) {
  const auto path = write("net.tntp", "<NUMBER OF NODES> 2\n<END OF METADATA>\n"
                                      "1 2 2000 1 0.5 0.15 4 0 0 1 ;\n2 1 2000 1 0.5 0.15 4 0 0 1 ;\n");
  const auto net = cf::parse_network(path, std::nullopt, cf::Config{});
  ASSERT_EQ(net.num_pairs(), 1u);
  EXPECT_EQ(net.pair(0).total_lanes, 4);
  for (const auto& a : net.arcs()) {
    EXPECT_EQ(a.nominal_lanes, 2);
    EXPECT_DOUBLE_EQ(a.params.lane_capacity, 1000.0);
    EXPECT_DOUBLE_EQ(a.params.free_flow_time, 0.5);
  }
}

TEST_F(NetworkFile, OneWayArcIsNotReversible) {
  const auto path = write("net.tntp", std::string(kHeader) +
                                          "1 2 1000 1 1 ;\n2 1 1000 1 1 ;\n2 3 1500 1 1 ;\n3 1 900 1 1 ;\n");
  const auto net = cf::parse_network(path, std::nullopt, cf::Config{});
  EXPECT_EQ(net.num_pairs(), 1u);
  EXPECT_EQ(net.num_arcs(), 4u);
  EXPECT_EQ(net.arc(2).nominal_lanes, 2);  // round(1.5)
  EXPECT_EQ(net.arc(3).nominal_lanes, 1);  // max(1, round(0.9))
}

TEST_F(NetworkFile, LaneTableOverridesDerivation) {
  const auto net_path = write("net.tntp", "<NUMBER OF NODES> 2\n<END OF METADATA>\n1 2 3000 1 1 ;\n2 1 3000 1 1 ;\n");
  const auto lanes = write("lanes.csv", "init,term,lanes\n1,2,1\n2,1,2\n");
  const auto net = cf::parse_network(net_path, lanes, cf::Config{});
  EXPECT_EQ(net.arc(0).nominal_lanes, 1);
  EXPECT_DOUBLE_EQ(net.arc(0).params.lane_capacity, 3000.0);
  EXPECT_DOUBLE_EQ(net.arc(1).params.lane_capacity, 1500.0);
}

TEST_F(NetworkFile, LaneTableErrors) {
  const auto net_path = write("net.tntp", "<NUMBER OF NODES> 2\n<END OF METADATA>\n1 2 3000 1 1 ;\n2 1 3000 1 1 ;\n");
  EXPECT_THROW(cf::parse_network(net_path, write("a.csv", "1,2,1\n1,2,2\n"), cf::Config{}), cf::ParseError);
  EXPECT_THROW(cf::parse_network(net_path, write("b.csv", "1,3,1\n"), cf::Config{}), cf::ParseError);
  EXPECT_THROW(cf::parse_network(net_path, write("c.csv", "1,2\n"), cf::Config{}), cf::ParseError);
  EXPECT_THROW(cf::parse_network(net_path, write("d.csv", "1,2,-1\n"), cf::Config{}), cf::ParseError);
}

TEST_F(NetworkFile, ErrorsNameFileAndLine) {
  const auto path = write("bad.tntp", std::string(kHeader) + "1 2 1000 1 1 ;\n2 x 1000 1 1 ;\n");
  try {
    cf::parse_network(path, std::nullopt, cf::Config{});
    FAIL() << "expected a parse error";
  } catch (const cf::ParseError& e) {
    EXPECT_EQ(e.line(), 5);
    EXPECT_NE(std::string(e.what()).find("bad.tntp"), std::string::npos);
  }
  EXPECT_THROW(cf::parse_network(write("neg.tntp", std::string(kHeader) + "1 2 -5 1 1 ;\n"), std::nullopt,
                                 cf::Config{}),
               cf::ParseError);
  EXPECT_THROW(cf::parse_network(write("short.tntp", std::string(kHeader) + "1 2 5 ;\n"), std::nullopt,
                                 cf::Config{}),
               cf::ParseError);
}

TEST_F(NetworkFile, ConnectivityPolicy) {
  const auto path = write("oneway.tntp", "<NUMBER OF NODES> 2\n<END OF METADATA>\n1 2 1000 1 1 ;\n");
  EXPECT_THROW(cf::parse_network(path, std::nullopt, cf::Config{}), std::runtime_error);
  cf::Config lax;
  lax.require_strongly_connected = false;
  std::vector<std::string> warnings;
  EXPECT_NO_THROW(cf::parse_network(path, std::nullopt, lax, &warnings));
  EXPECT_EQ(warnings.size(), 1u);
}

TEST_F(NetworkFile, FileBprOnlyWhenRequested) {
  const auto path = write("net.tntp", "<NUMBER OF NODES> 2\n<END OF METADATA>\n1 2 1000 1 1 0.5 2 ;\n2 1 1000 1 1 0.5 2 ;\n");
  EXPECT_DOUBLE_EQ(cf::parse_network(path, std::nullopt, cf::Config{}).arc(0).params.bpr.alpha, 0.15);
  cf::Config c;
  c.use_file_bpr = true;
  const auto net = cf::parse_network(path, std::nullopt, c);
  EXPECT_DOUBLE_EQ(net.arc(0).params.bpr.alpha, 0.5);
  EXPECT_DOUBLE_EQ(net.arc(0).params.bpr.power, 2.0);
}

TEST_F(NetworkFile, WriteParseRoundTrip) {
  std::mt19937_64 rng(109);
  for (int i = 0; i < 10; ++i) {
    const auto inst = oracle::random_network(rng, 9, 8, 3, 10.0);
    const auto path = write("rt.tntp", cf::format_network_tntp(inst.net));
    const auto lanes = write("rt.csv", cf::format_lane_table(inst.net, inst.net.nominal_lanes()));
    const auto back = cf::parse_network(path, lanes, cf::Config{});
    ASSERT_EQ(back.num_arcs(), inst.net.num_arcs());
    EXPECT_EQ(back.num_pairs(), inst.net.num_pairs());
    for (std::size_t a = 0; a < back.num_arcs(); ++a) {
      const auto& x = inst.net.arc(a);
      const auto& y = back.arc(a);
      EXPECT_EQ(x.tail, y.tail);
      EXPECT_EQ(x.head, y.head);
      EXPECT_EQ(x.nominal_lanes, y.nominal_lanes);
      EXPECT_NEAR(x.params.lane_capacity, y.params.lane_capacity, 1e-15 * x.params.lane_capacity);
      EXPECT_EQ(x.params.free_flow_time, y.params.free_flow_time);
    }
  }
}

TEST_F(NetworkFile, SampleData) {
  const auto net = cf::parse_network(oracle::data_file("grid4_net.tntp"), std::nullopt, cf::Config{});
  EXPECT_EQ(net.num_nodes(), 16u);
  EXPECT_EQ(net.num_arcs(), 48u);
  EXPECT_EQ(net.num_pairs(), 24u);
  const auto od = cf::parse_demand(oracle::data_file("grid4_trips.tntp"), net, 1.0);
  EXPECT_EQ(od.size(), 32u);
  EXPECT_DOUBLE_EQ(od.total_demand(), 4768.0);
}

using DemandFile = TempDir;

TEST_F(DemandFile, ParsesAndScales) {
  const auto net = cf::parse_network(oracle::data_file("toy_net.tntp"), std::nullopt, cf::Config{});
  const auto path = write("trips.tntp", "<NUMBER OF ZONES> 3\n<END OF METADATA>\n\nOrigin 1\n  3 : 10.0;  2 : 0;\n"
                                        "Origin 3\n 1 : 4; 3 : 2;\n");
  std::vector<std::string> warnings;
  const auto od = cf::parse_demand(path, net, 1.5, &warnings);
  ASSERT_EQ(od.size(), 2u);
  EXPECT_DOUBLE_EQ(od.demand(0), 15.0);
  EXPECT_DOUBLE_EQ(od.demand(1), 6.0);
  EXPECT_EQ(warnings.size(), 1u);
}

TEST_F(DemandFile, Errors) {
  const auto net = cf::parse_network(oracle::data_file("toy_net.tntp"), std::nullopt, cf::Config{});
  const auto ok = write("ok.tntp", "Origin 1\n 3 : 1;\n");
  EXPECT_THROW(cf::parse_demand(ok, net, 0.0), std::invalid_argument);
  EXPECT_THROW(cf::parse_demand(write("a.tntp", "3 : 1;\n"), net, 1.0), cf::ParseError);
  EXPECT_THROW(cf::parse_demand(write("b.tntp", "Origin 9\n 3 : 1;\n"), net, 1.0), cf::ParseError);
  EXPECT_THROW(cf::parse_demand(write("c.tntp", "Origin 1\n 3 : -1;\n"), net, 1.0), cf::ParseError);
  EXPECT_THROW(cf::parse_demand(write("d.tntp", "Origin 1\n 3 : ;\n"), net, 1.0), cf::ParseError);
  EXPECT_THROW(cf::parse_demand(dir_.string() + "/missing.tntp", net, 1.0), std::runtime_error);
}

TEST(ResultFiles, EmptySweepIsHeaderOnly) {
  const std::string csv = cf::format_sweep_csv({}, cf::SweepKind::Demand);
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 1);
  EXPECT_EQ(csv.rfind("multiplier,", 0), 0u);
}

TEST(ResultFiles, OnePairTable) {
  const cf::ArcParams p{1, 1, {}};
  const auto net = cf::Network::build({1, 2}, {{1, 2, p, 1}, {2, 1, p, 2}});
  const cf::FlowVector x{{2.0, 1.0}};
  const auto res = cf::solve_la(cf::LaProblem::build(net, x));
  const std::string csv = cf::format_lane_result_csv(net, x, res);
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 3);
  EXPECT_NE(csv.find("1,2,1,2,1,2,1,"), std::string::npos);
}

TEST(ResultFiles, JsonRoundTrip) {
  std::mt19937_64 rng(113);
  for (int i = 0; i < 20; ++i) {
    const auto inst = oracle::random_pairs(rng, 4, 6);
    auto res = cf::solve_la(cf::LaProblem::build(inst.net, inst.flows));
    if (i % 2) {
      const auto rb = cf::relaxed_lower_bound(inst.net, inst.flows);
      res.relaxed_bound = rb.bound;
      res.projected_lanes = cf::project_bound(inst.net, rb.lanes);
      res.projected_objective = cf::total_cost(inst.net, *res.projected_lanes, inst.flows);
    }
    const auto j = cf::lane_result_json(inst.net, inst.flows, res);
    const auto back = cf::lane_result_from_json(nlohmann::json::parse(j.dump()));
    auto same12 = [](double a, double b) {
      return a == b || std::abs(a - b) <= 1e-11 * std::max(std::abs(a), std::abs(b));
    };
    EXPECT_EQ(back.result.lanes, res.lanes);
    EXPECT_EQ(back.result.nominal, res.nominal);
    EXPECT_EQ(back.result.reversals, res.reversals);
    EXPECT_EQ(back.result.projected_lanes, res.projected_lanes);
    EXPECT_TRUE(same12(back.result.objective, res.objective));
    EXPECT_TRUE(same12(back.result.nominal_objective, res.nominal_objective));
    EXPECT_EQ(back.result.relaxed_bound.has_value(), res.relaxed_bound.has_value());
    for (std::size_t a = 0; a < res.arc_cost_delta.size(); ++a) {
      EXPECT_TRUE(same12(back.flows[a], inst.flows[a]));
      EXPECT_TRUE(same12(back.result.arc_cost_delta[a], res.arc_cost_delta[a]));
    }
    // Writing the re-parsed record gives the same document.
    cf::LaneOptResult again = back.result;
    EXPECT_EQ(cf::lane_result_json(inst.net, back.flows, again).dump(), j.dump());
  }
}

TEST(ConfigFile, DefaultsAndOverrides) {
  const cf::Config c = cf::config_from_json(nlohmann::json::parse(R"({"bpr_power": 5, "seed": 7})"));
  EXPECT_EQ(c.bpr_power, 5.0);
  EXPECT_EQ(c.seed, 7u);
  EXPECT_EQ(c.fw_rel_gap, 1e-4);
  EXPECT_EQ(c.per_lane_capacity, 1000.0);
  nlohmann::ordered_json j;
  cf::to_json(j, c);
  const cf::Config back = cf::config_from_json(nlohmann::json::parse(j.dump()));
  EXPECT_EQ(back.bpr_power, 5.0);
  EXPECT_EQ(back.seed, 7u);
}

TEST(ConfigFile, Rejects) {
  EXPECT_THROW(cf::config_from_json(nlohmann::json::parse(R"({"bpr_pow": 5})")), std::invalid_argument);
  EXPECT_THROW(cf::config_from_json(nlohmann::json::parse(R"({"fw_rel_gap": 0})")), std::invalid_argument);
  EXPECT_THROW(cf::config_from_json(nlohmann::json::parse(R"({"tap_mode": "x"})")), std::invalid_argument);
  EXPECT_THROW(cf::config_from_json(nlohmann::json::parse("[1]")), std::invalid_argument);
}
