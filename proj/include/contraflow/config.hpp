#pragma once

#include <cstdint>
#include <fstream>
#include <set>
#include <stdexcept>
#include <string>

#include <json.hpp>

#include "contraflow/pipeline.hpp"
#include "contraflow/tap.hpp"

namespace contraflow {

// Run configuration. JSON keys match the member names.
struct Config {
  double bpr_alpha = 0.15;
  double bpr_power = 4.0;
  double per_lane_capacity = 1000.0;  // veh/h/lane, used when no lane table is given
  int min_lanes = 1;
  double fw_rel_gap = 1e-4;
  int fw_max_iters = 1000;
  double line_search_tol = 1e-10;
  std::string tap_mode = "so";
  double lb_xi = 1e-9;
  double lb_step = 0.5;
  int lb_max_sweeps = 20000;
  int laso_max_iters = 20;
  std::uint64_t seed = 42;
  bool use_file_bpr = false;
  bool require_strongly_connected = true;

  void validate() const {
    if (!(bpr_alpha >= 0.0)) throw std::invalid_argument("bpr_alpha must be >= 0");
    if (!(bpr_power > 0.0)) throw std::invalid_argument("bpr_power must be > 0");
    if (!(per_lane_capacity > 0.0)) throw std::invalid_argument("per_lane_capacity must be > 0");
    if (min_lanes < 0) throw std::invalid_argument("min_lanes must be >= 0");
    parse_tap_mode(tap_mode);
    tap_settings(1).validate();
    pipeline_settings(1).bound.validate();
  }

  TapSettings tap_settings(int threads) const {
    TapSettings t;
    t.mode = parse_tap_mode(tap_mode);
    t.relative_gap = fw_rel_gap;
    t.max_iterations = fw_max_iters;
    t.line_search_tolerance = line_search_tol;
    t.threads = threads;
    return t;
  }

  PipelineSettings pipeline_settings(int threads) const {
    PipelineSettings p;
    p.tap = tap_settings(threads);
    p.bound.xi = lb_xi;
    p.bound.initial_step = lb_step;
    p.bound.max_sweeps = lb_max_sweeps;
    p.max_outer_iterations = laso_max_iters;
    p.seed = seed;
    p.threads = threads;
    return p;
  }
};

inline void to_json(nlohmann::ordered_json& j, const Config& c) {
  j = nlohmann::ordered_json{{"bpr_alpha", c.bpr_alpha},
                             {"bpr_power", c.bpr_power},
                             {"per_lane_capacity", c.per_lane_capacity},
                             {"min_lanes", c.min_lanes},
                             {"fw_rel_gap", c.fw_rel_gap},
                             {"fw_max_iters", c.fw_max_iters},
                             {"line_search_tol", c.line_search_tol},
                             {"tap_mode", c.tap_mode},
                             {"lb_xi", c.lb_xi},
                             {"lb_step", c.lb_step},
                             {"lb_max_sweeps", c.lb_max_sweeps},
                             {"laso_max_iters", c.laso_max_iters},
                             {"seed", c.seed},
                             {"use_file_bpr", c.use_file_bpr},
                             {"require_strongly_connected", c.require_strongly_connected}};
}

// Unknown keys are rejected so that typos do not silently fall back to defaults.
inline Config config_from_json(const nlohmann::json& j) {
  static const std::set<std::string> known{
      "bpr_alpha", "bpr_power", "per_lane_capacity", "min_lanes", "fw_rel_gap",
      "fw_max_iters", "line_search_tol", "tap_mode", "lb_xi", "lb_step", "lb_max_sweeps",
      "laso_max_iters", "seed", "use_file_bpr", "require_strongly_connected"};
  if (!j.is_object()) throw std::invalid_argument("config must be a JSON object");
  for (const auto& [key, value] : j.items())
    if (!known.count(key)) throw std::invalid_argument("unknown config key '" + key + "'");
  Config c;
  auto get = [&](const char* key, auto& field) {
    if (j.contains(key)) j.at(key).get_to(field);
  };
  get("bpr_alpha", c.bpr_alpha);
  get("bpr_power", c.bpr_power);
  get("per_lane_capacity", c.per_lane_capacity);
  get("min_lanes", c.min_lanes);
  get("fw_rel_gap", c.fw_rel_gap);
  get("fw_max_iters", c.fw_max_iters);
  get("line_search_tol", c.line_search_tol);
  get("tap_mode", c.tap_mode);
  get("lb_xi", c.lb_xi);
  get("lb_step", c.lb_step);
  get("lb_max_sweeps", c.lb_max_sweeps);
  get("laso_max_iters", c.laso_max_iters);
  get("seed", c.seed);
  get("use_file_bpr", c.use_file_bpr);
  get("require_strongly_connected", c.require_strongly_connected);
  c.validate();
  return c;
}

inline Config load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config file " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::parse_error& e) {
    throw std::runtime_error(path + ": " + e.what());
  }
  return config_from_json(j);
}

}  // namespace contraflow
