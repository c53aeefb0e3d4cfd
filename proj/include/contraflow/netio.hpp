#pragma once

// File formats.
//
// Network: TNTP arc table (`<KEY> value` metadata, `~` comments, rows
//   `init term capacity length fftt b power speed toll type ;`).
// Lanes:   CSV `init,term,lanes` with optional header row.
// Demand:  TNTP trips (`Origin o` followed by `d : demand;` entries).
// Results: CSV and JSON; floats carry 12 significant digits, arcs are
//   ordered by (tail, head).

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "contraflow/config.hpp"
#include "contraflow/cost.hpp"
#include "contraflow/laneopt.hpp"
#include "contraflow/model.hpp"
#include "contraflow/pipeline.hpp"
#include "contraflow/tap.hpp"

namespace contraflow {

class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& file, int line, const std::string& message)
      : std::runtime_error(file + ":" + std::to_string(line) + ": " + message),
        file_(file),
        line_(line) {}
  const std::string& file() const { return file_; }
  int line() const { return line_; }

 private:
  std::string file_;
  int line_;
};

namespace detail {

inline std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

inline std::vector<std::string> read_lines(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) lines.push_back(line);
  return lines;
}

inline double parse_number(const std::string& token, const std::string& file, int line) {
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(token, &used);
  } catch (const std::exception&) {
    throw ParseError(file, line, "expected a number, got '" + token + "'");
  }
  if (used != token.size()) throw ParseError(file, line, "expected a number, got '" + token + "'");
  return v;
}

inline int parse_int(const std::string& token, const std::string& file, int line) {
  const double v = parse_number(token, file, line);
  if (v != std::floor(v)) throw ParseError(file, line, "expected an integer, got '" + token + "'");
  return static_cast<int>(v);
}

// Splits TNTP metadata from the body. Returns the index of the first body line.
inline std::size_t read_metadata(const std::vector<std::string>& lines,
                                 std::map<std::string, std::string>& meta) {
  bool saw_meta = false;
  for (std::size_t i = 0; i < lines.size(); ++i) {
    const std::string t = trim(lines[i]);
    if (t.empty() || t[0] == '~') continue;
    if (t[0] != '<') return saw_meta ? i : 0;
    saw_meta = true;
    const auto close = t.find('>');
    if (close == std::string::npos) continue;
    const std::string key = t.substr(1, close - 1);
    if (key == "END OF METADATA") return i + 1;
    meta[key] = trim(t.substr(close + 1));
  }
  return lines.size();
}

inline std::string format_double(double v, int digits = 12) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*g", digits, v);
  return buf;
}

// Value rounded to 12 significant digits, for JSON output.
inline nlohmann::ordered_json json_number(double v) {
  if (!std::isfinite(v)) return nullptr;
  return std::stod(format_double(v));
}

inline double json_to_double(const nlohmann::json& j) {
  return j.is_null() ? kInfiniteCost : j.get<double>();
}

inline void write_atomically(const std::string& path, const std::string& content) {
  const std::filesystem::path target(path);
  if (target.has_parent_path()) std::filesystem::create_directories(target.parent_path());
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + tmp);
    out << content;
    if (!out) throw std::runtime_error("write failed for " + tmp);
  }
  std::filesystem::rename(tmp, target);
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Parsing

struct NetworkFileRecord {
  int init = 0;
  int term = 0;
  double capacity = 0.0;
  double length = 0.0;
  double free_flow_time = 0.0;
  double bpr_b = 0.15;
  double bpr_power = 4.0;
  double speed = 0.0;
  double toll = 0.0;
  int link_type = 0;
};

inline std::vector<NetworkFileRecord> read_network_records(const std::string& path,
                                                           std::optional<int>* num_nodes = nullptr) {
  const auto lines = detail::read_lines(path);
  std::map<std::string, std::string> meta;
  const std::size_t body = detail::read_metadata(lines, meta);
  if (num_nodes) {
    auto it = meta.find("NUMBER OF NODES");
    *num_nodes = it == meta.end() ? std::nullopt
                                  : std::optional<int>(detail::parse_int(it->second, path, 0));
  }
  std::vector<NetworkFileRecord> recs;
  for (std::size_t i = body; i < lines.size(); ++i) {
    const int ln = static_cast<int>(i) + 1;
    std::string t = detail::trim(lines[i]);
    if (t.empty() || t[0] == '~') continue;
    if (auto semi = t.find(';'); semi != std::string::npos) t = t.substr(0, semi);
    std::istringstream ss(t);
    std::vector<std::string> tok;
    for (std::string s; ss >> s;) tok.push_back(s);
    if (tok.empty()) continue;
    if (tok.size() < 5) throw ParseError(path, ln, "arc row needs at least 5 columns");
    NetworkFileRecord r;
    r.init = detail::parse_int(tok[0], path, ln);
    r.term = detail::parse_int(tok[1], path, ln);
    r.capacity = detail::parse_number(tok[2], path, ln);
    r.length = detail::parse_number(tok[3], path, ln);
    r.free_flow_time = detail::parse_number(tok[4], path, ln);
    if (tok.size() > 5) r.bpr_b = detail::parse_number(tok[5], path, ln);
    if (tok.size() > 6) r.bpr_power = detail::parse_number(tok[6], path, ln);
    if (tok.size() > 7) r.speed = detail::parse_number(tok[7], path, ln);
    if (tok.size() > 8) r.toll = detail::parse_number(tok[8], path, ln);
    if (tok.size() > 9) r.link_type = detail::parse_int(tok[9], path, ln);
    if (r.init == r.term) throw ParseError(path, ln, "arc starts and ends at the same node");
    if (!(r.capacity > 0.0)) throw ParseError(path, ln, "capacity must be positive");
    if (!(r.free_flow_time > 0.0)) throw ParseError(path, ln, "free-flow time must be positive");
    recs.push_back(r);
  }
  return recs;
}

struct LaneTableRecord {
  int init = 0;
  int term = 0;
  int lanes = 0;
  int line = 0;
};

inline std::vector<LaneTableRecord> read_lane_table(const std::string& path) {
  const auto lines = detail::read_lines(path);
  std::vector<LaneTableRecord> recs;
  for (std::size_t i = 0; i < lines.size(); ++i) {
    const int ln = static_cast<int>(i) + 1;
    const std::string t = detail::trim(lines[i]);
    if (t.empty() || t[0] == '#') continue;
    std::vector<std::string> cols;
    std::stringstream ss(t);
    for (std::string c; std::getline(ss, c, ',');) cols.push_back(detail::trim(c));
    if (cols.size() != 3) throw ParseError(path, ln, "lane row needs 3 columns: init,term,lanes");
    if (recs.empty() && cols[0] == "init") continue;
    LaneTableRecord r{detail::parse_int(cols[0], path, ln), detail::parse_int(cols[1], path, ln),
                      detail::parse_int(cols[2], path, ln), ln};
    if (r.lanes < 0) throw ParseError(path, ln, "lane count must be >= 0");
    recs.push_back(r);
  }
  return recs;
}

// Builds the network. Without a lane table each arc gets
// max(1, round(capacity / per_lane_capacity)) lanes; per-lane capacity is
// always the file capacity divided by the lane count (or the full capacity
// for zero-lane arcs).
inline Network parse_network(const std::string& net_path, const std::optional<std::string>& lanes_path,
                             const Config& config, std::vector<std::string>* warnings = nullptr) {
  std::optional<int> num_nodes;
  const auto recs = read_network_records(net_path, &num_nodes);

  std::map<std::pair<int, int>, LaneTableRecord> table;
  if (lanes_path) {
    for (const LaneTableRecord& r : read_lane_table(*lanes_path)) {
      if (!table.emplace(std::make_pair(r.init, r.term), r).second)
        throw ParseError(*lanes_path, r.line, "duplicate lane record");
    }
    std::map<std::pair<int, int>, int> present;
    for (const auto& r : recs) present[{r.init, r.term}]++;
    for (const auto& [key, r] : table)
      if (!present.count(key))
        throw ParseError(*lanes_path, r.line,
                         "lane record " + std::to_string(r.init) + "->" + std::to_string(r.term) +
                             " does not match any arc");
  }

  std::vector<int> nodes;
  if (num_nodes) {
    for (int v = 1; v <= *num_nodes; ++v) nodes.push_back(v);
  }
  std::vector<ArcSpec> specs;
  for (const auto& r : recs) {
    if (num_nodes && (r.init < 1 || r.init > *num_nodes || r.term < 1 || r.term > *num_nodes))
      throw std::runtime_error(net_path + ": arc " + std::to_string(r.init) + "->" +
                               std::to_string(r.term) + " references a node outside 1.." +
                               std::to_string(*num_nodes));
    if (!num_nodes) {
      nodes.push_back(r.init);
      nodes.push_back(r.term);
    }
    int lanes = std::max(1, static_cast<int>(std::lround(r.capacity / config.per_lane_capacity)));
    if (auto it = table.find({r.init, r.term}); it != table.end()) lanes = it->second.lanes;
    ArcSpec s;
    s.tail_id = r.init;
    s.head_id = r.term;
    s.lanes = lanes;
    s.params.lane_capacity = lanes > 0 ? r.capacity / lanes : r.capacity;
    s.params.free_flow_time = r.free_flow_time;
    s.params.bpr = config.use_file_bpr ? BprCoefficients{r.bpr_b, r.bpr_power}
                                       : BprCoefficients{config.bpr_alpha, config.bpr_power};
    specs.push_back(s);
  }
  Network net = Network::build(std::move(nodes), std::move(specs), config.min_lanes);
  if (!net.is_strongly_connected()) {
    const std::string msg = net_path + ": network is not strongly connected over arcs with lanes";
    if (config.require_strongly_connected) throw std::runtime_error(msg);
    if (warnings) warnings->push_back(msg);
  }
  return net;
}

// Self-pairs are skipped (they never load an arc) and reported as warnings.
inline ODMatrix parse_demand(const std::string& path, const Network& net, double multiplier,
                             std::vector<std::string>* warnings = nullptr) {
  if (!(multiplier > 0.0)) throw std::invalid_argument("demand multiplier must be > 0");
  const auto lines = detail::read_lines(path);
  std::map<std::string, std::string> meta;
  const std::size_t body = detail::read_metadata(lines, meta);
  std::vector<OdEntry> entries;
  std::optional<int> origin;
  double skipped_diagonal = 0.0;
  for (std::size_t i = body; i < lines.size(); ++i) {
    const int ln = static_cast<int>(i) + 1;
    std::string t = detail::trim(lines[i]);
    if (t.empty() || t[0] == '~') continue;
    if (t.rfind("Origin", 0) == 0) {
      const int o = detail::parse_int(detail::trim(t.substr(6)), path, ln);
      if (!net.has_node(o)) throw ParseError(path, ln, "origin " + std::to_string(o) + " not in network");
      origin = o;
      continue;
    }
    if (!origin) throw ParseError(path, ln, "demand entry before any 'Origin' line");
    for (char& c : t)
      if (c == ':' || c == ';') c = ' ';
    std::istringstream ss(t);
    std::vector<std::string> tok;
    for (std::string s; ss >> s;) tok.push_back(s);
    if (tok.size() % 2 != 0) throw ParseError(path, ln, "malformed 'destination : demand' list");
    for (std::size_t k = 0; k < tok.size(); k += 2) {
      const int d = detail::parse_int(tok[k], path, ln);
      const double v = detail::parse_number(tok[k + 1], path, ln);
      if (!net.has_node(d)) throw ParseError(path, ln, "destination " + std::to_string(d) + " not in network");
      if (v < 0.0) throw ParseError(path, ln, "negative demand");
      if (d == *origin) {
        skipped_diagonal += v;
        continue;
      }
      entries.push_back({net.index_of(*origin), net.index_of(d), v});
    }
  }
  if (skipped_diagonal > 0.0 && warnings)
    warnings->push_back(path + ": skipped " + detail::format_double(skipped_diagonal) +
                        " veh/h of intrazonal demand");
  return ODMatrix(net, std::move(entries), multiplier);
}

// ---------------------------------------------------------------------------
// Network writers (full precision so that parse -> write -> parse is exact)

inline std::string format_network_tntp(const Network& net) {
  std::ostringstream out;
  // The node count implies ids 1..N on reading, so only write it when true.
  const auto& ids = net.node_ids();
  if (!ids.empty() && ids.front() == 1 && ids.back() == static_cast<int>(ids.size()))
    out << "<NUMBER OF NODES> " << net.num_nodes() << "\n";
  out << "<NUMBER OF LINKS> " << net.num_arcs() << "\n";
  out << "<END OF METADATA>\n\n";
  out << "~\tinit\tterm\tcapacity\tlength\tfftt\tb\tpower\tspeed\ttoll\ttype\t;\n";
  for (const Arc& a : net.arcs()) {
    const double cap = a.params.lane_capacity * std::max(1, a.nominal_lanes);
    out << "\t" << net.node_id(a.tail) << "\t" << net.node_id(a.head) << "\t"
        << detail::format_double(cap, 17) << "\t0\t" << detail::format_double(a.params.free_flow_time, 17)
        << "\t" << detail::format_double(a.params.bpr.alpha, 17) << "\t"
        << detail::format_double(a.params.bpr.power, 17) << "\t0\t0\t1\t;\n";
  }
  return out.str();
}

inline std::string format_lane_table(const Network& net, const LaneConfig& lanes) {
  std::ostringstream out;
  out << "init,term,lanes\n";
  for (const Arc& a : net.arcs())
    out << net.node_id(a.tail) << "," << net.node_id(a.head) << "," << lanes[a.id] << "\n";
  return out.str();
}

// ---------------------------------------------------------------------------
// Result writers

inline std::string format_flows_csv(const Network& net, const LaneConfig& lanes, const FlowVector& flows) {
  std::ostringstream out;
  out << "tail,head,lanes,flow,time,cost\n";
  for (const Arc& a : net.arcs()) {
    out << net.node_id(a.tail) << "," << net.node_id(a.head) << "," << lanes[a.id] << ","
        << detail::format_double(flows[a.id]) << ","
        << detail::format_double(bpr_time(flows[a.id], lanes[a.id], a.params)) << ","
        << detail::format_double(arc_cost(flows[a.id], lanes[a.id], a.params)) << "\n";
  }
  return out.str();
}

inline std::string format_lane_result_csv(const Network& net, const FlowVector& flows,
                                          const LaneOptResult& r) {
  std::ostringstream out;
  out << "tail,head,reversible,flow,z0,z_opt,delta_lanes,cost_nominal,cost_opt,cost_delta";
  if (r.projected_lanes) out << ",z_projected";
  out << "\n";
  for (const Arc& a : net.arcs()) {
    const double x = flows[a.id];
    out << net.node_id(a.tail) << "," << net.node_id(a.head) << "," << (a.reversible ? 1 : 0) << ","
        << detail::format_double(x) << "," << r.nominal[a.id] << "," << r.lanes[a.id] << ","
        << r.lanes[a.id] - r.nominal[a.id] << ","
        << detail::format_double(arc_cost(x, r.nominal[a.id], a.params)) << ","
        << detail::format_double(arc_cost(x, r.lanes[a.id], a.params)) << ","
        << detail::format_double(r.arc_cost_delta[a.id]);
    if (r.projected_lanes) out << "," << (*r.projected_lanes)[a.id];
    out << "\n";
  }
  return out.str();
}

inline nlohmann::ordered_json lane_result_json(const Network& net, const FlowVector& flows,
                                               const LaneOptResult& r) {
  using detail::json_number;
  nlohmann::ordered_json summary;
  summary["objective"] = json_number(r.objective);
  summary["nominal_objective"] = json_number(r.nominal_objective);
  summary["reversals"] = r.reversals;
  summary["total_lanes"] = net.total_lanes();
  summary["budget"] = r.budget ? nlohmann::ordered_json(*r.budget) : nlohmann::ordered_json(nullptr);
  summary["relaxed_bound"] = r.relaxed_bound ? json_number(*r.relaxed_bound) : nullptr;
  summary["projected_objective"] = r.projected_objective ? json_number(*r.projected_objective) : nullptr;
  nlohmann::ordered_json arcs = nlohmann::ordered_json::array();
  for (const Arc& a : net.arcs()) {
    nlohmann::ordered_json row;
    row["tail"] = net.node_id(a.tail);
    row["head"] = net.node_id(a.head);
    row["flow"] = json_number(flows[a.id]);
    row["z0"] = r.nominal[a.id];
    row["z"] = r.lanes[a.id];
    row["cost_delta"] = json_number(r.arc_cost_delta[a.id]);
    if (r.projected_lanes) row["z_projected"] = (*r.projected_lanes)[a.id];
    arcs.push_back(row);
  }
  return nlohmann::ordered_json{{"summary", summary}, {"arcs", arcs}};
}

struct LaneResultRecord {
  LaneOptResult result;
  FlowVector flows;
  std::vector<std::pair<int, int>> arcs;  // (tail id, head id)
  int total_lanes = 0;
};

inline LaneResultRecord lane_result_from_json(const nlohmann::json& j) {
  LaneResultRecord rec;
  const auto& s = j.at("summary");
  rec.result.objective = detail::json_to_double(s.at("objective"));
  rec.result.nominal_objective = detail::json_to_double(s.at("nominal_objective"));
  rec.result.reversals = s.at("reversals").get<int>();
  rec.total_lanes = s.at("total_lanes").get<int>();
  if (!s.at("budget").is_null()) rec.result.budget = s.at("budget").get<int>();
  if (!s.at("relaxed_bound").is_null()) rec.result.relaxed_bound = s.at("relaxed_bound").get<double>();
  if (!s.at("projected_objective").is_null())
    rec.result.projected_objective = s.at("projected_objective").get<double>();
  bool projected = false;
  LaneConfig zp;
  for (const auto& row : j.at("arcs")) {
    rec.arcs.emplace_back(row.at("tail").get<int>(), row.at("head").get<int>());
    rec.flows.flows.push_back(detail::json_to_double(row.at("flow")));
    rec.result.nominal.lanes.push_back(row.at("z0").get<int>());
    rec.result.lanes.lanes.push_back(row.at("z").get<int>());
    rec.result.arc_cost_delta.push_back(detail::json_to_double(row.at("cost_delta")));
    if (row.contains("z_projected")) {
      projected = true;
      zp.lanes.push_back(row.at("z_projected").get<int>());
    }
  }
  if (projected) rec.result.projected_lanes = zp;
  return rec;
}

inline LaneResultRecord read_lane_result_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  nlohmann::json j;
  in >> j;
  return lane_result_from_json(j);
}

enum class SweepKind { Demand, Budget };

inline std::string format_sweep_csv(const std::vector<SweepRow>& rows, SweepKind kind) {
  using detail::format_double;
  auto opt = [](const std::optional<double>& v) { return v ? format_double(*v) : std::string(); };
  std::ostringstream out;
  out << (kind == SweepKind::Demand ? "multiplier" : "budget")
      << ",reversals,original_fixed,la_fixed,unconstrained_fixed,projected_fixed,relaxed_bound,"
         "original_tap,la_tap,unconstrained_tap,projected_tap,"
         "original_dev_fixed_pct,projected_dev_fixed_pct,relaxed_dev_fixed_pct,"
         "original_dev_tap_pct,projected_dev_tap_pct,tap_gap,tap_iterations,tap_converged\n";
  for (const SweepRow& r : rows) {
    out << format_double(r.parameter) << "," << r.reversals << "," << format_double(r.original_fixed)
        << "," << format_double(r.la_fixed) << "," << format_double(r.unconstrained_fixed) << ","
        << opt(r.projected_fixed) << "," << opt(r.relaxed_bound) << "," << format_double(r.original_tap)
        << "," << format_double(r.la_tap) << "," << format_double(r.unconstrained_tap) << ","
        << opt(r.projected_tap) << "," << format_double(percent_deviation(r.original_fixed, r.la_fixed))
        << ","
        << (r.projected_fixed ? format_double(percent_deviation(*r.projected_fixed, r.la_fixed)) : "")
        << "," << (r.relaxed_bound ? format_double(percent_deviation(*r.relaxed_bound, r.la_fixed)) : "")
        << "," << format_double(percent_deviation(r.original_tap, r.la_tap)) << ","
        << (r.projected_tap ? format_double(percent_deviation(*r.projected_tap, r.la_tap)) : "") << ","
        << format_double(r.tap_gap) << "," << r.tap_iterations << "," << (r.tap_converged ? 1 : 0)
        << "\n";
  }
  return out.str();
}

// Whitespace-separated numeric table for plotting. Demand sweeps give percent
// deviations against the LA optimum; budget sweeps give objectives and the
// share of the unconstrained improvement captured.
inline std::string format_sweep_plot(const std::vector<SweepRow>& rows, SweepKind kind) {
  using detail::format_double;
  std::ostringstream out;
  if (kind == SweepKind::Demand) {
    out << "# multiplier original_pct projected_pct lower_bound_pct original_tap_pct projected_tap_pct\n";
    for (const SweepRow& r : rows)
      out << format_double(r.parameter) << " " << format_double(percent_deviation(r.original_fixed, r.la_fixed))
          << " " << format_double(percent_deviation(r.projected_fixed.value_or(r.la_fixed), r.la_fixed)) << " "
          << format_double(percent_deviation(r.relaxed_bound.value_or(r.la_fixed), r.la_fixed)) << " "
          << format_double(percent_deviation(r.original_tap, r.la_tap)) << " "
          << format_double(percent_deviation(r.projected_tap.value_or(r.la_tap), r.la_tap)) << "\n";
  } else {
    out << "# budget objective_fixed objective_tap captured_fixed captured_tap\n";
    for (const SweepRow& r : rows) {
      const double span_f = r.original_fixed - r.unconstrained_fixed;
      const double span_t = r.original_tap - r.unconstrained_tap;
      out << format_double(r.parameter) << " " << format_double(r.la_fixed) << " " << format_double(r.la_tap)
          << " " << format_double(span_f > 0 ? (r.original_fixed - r.la_fixed) / span_f : 1.0) << " "
          << format_double(span_t > 0 ? (r.original_tap - r.la_tap) / span_t : 1.0) << "\n";
    }
  }
  return out.str();
}

inline std::string format_improvements_csv(const Network& net, const std::vector<ArcImprovement>& rows) {
  std::ostringstream out;
  out << "tail,head,flow,improvement_pct,paired_tail,paired_head\n";
  for (const ArcImprovement& r : rows) {
    const Arc& a = net.arc(r.arc);
    out << net.node_id(a.tail) << "," << net.node_id(a.head) << "," << detail::format_double(r.flow) << ","
        << detail::format_double(r.percent) << ",";
    if (r.paired_arc >= 0) {
      const Arc& b = net.arc(r.paired_arc);
      out << net.node_id(b.tail) << "," << net.node_id(b.head);
    } else {
      out << ",";
    }
    out << "\n";
  }
  return out.str();
}

inline std::string format_psi_csv(const Network& net, const PsiAudit& audit) {
  std::ostringstream out;
  out << "gaining_tail,gaining_head,losing_tail,losing_head,psi,psi_hat,tolerance,violation,failed,note\n";
  for (const PsiEntry& e : audit.entries) {
    const Arc& g = net.arc(e.gaining_arc);
    const Arc& l = net.arc(e.losing_arc);
    out << net.node_id(g.tail) << "," << net.node_id(g.head) << "," << net.node_id(l.tail) << ","
        << net.node_id(l.head) << "," << detail::format_double(e.psi) << ","
        << detail::format_double(e.psi_hat) << "," << detail::format_double(e.tolerance) << ","
        << (e.violation ? 1 : 0) << "," << (e.failed ? 1 : 0) << ",\"" << e.message << "\"\n";
  }
  return out.str();
}

inline void write_text(const std::string& path, const std::string& content) {
  detail::write_atomically(path, content);
}

inline void write_json(const std::string& path, const nlohmann::ordered_json& j) {
  detail::write_atomically(path, j.dump(2) + "\n");
}

}  // namespace contraflow
