// contraflow: command-line driver for traffic assignment, lane optimisation,
// sweeps and single-reversal audits.
//
// Exit codes: 0 success, 1 input or usage error, 2 a solver stopped before
// reaching its convergence target.

#include <chrono>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <iterator>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <openssl/evp.h>

#include <CLI11.hpp>
#include <json.hpp>

#include "contraflow/contraflow.hpp"

namespace cf = contraflow;
using ojson = nlohmann::ordered_json;

namespace {

constexpr const char* kVersion = "0.1.0";
constexpr int kExitOk = 0;
constexpr int kExitInput = 1;
constexpr int kExitNotConverged = 2;

std::string sha256_file(const std::string& path, std::uintmax_t* bytes) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path);
  const std::string data((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  *bytes = data.size();
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> ctx(EVP_MD_CTX_new(), EVP_MD_CTX_free);
  if (!ctx || EVP_DigestInit_ex(ctx.get(), EVP_sha256(), nullptr) != 1 ||
      EVP_DigestUpdate(ctx.get(), data.data(), data.size()) != 1 ||
      EVP_DigestFinal_ex(ctx.get(), digest, &len) != 1)
    throw std::runtime_error("sha256 failed for " + path);
  std::ostringstream hex;
  for (unsigned int i = 0; i < len; ++i) hex << std::hex << std::setw(2) << std::setfill('0') << int(digest[i]);
  return hex.str();
}

std::string utc_now() {
  const std::time_t t = std::time(nullptr);
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

struct GlobalOptions {
  std::string config_path;
  int threads = 1;
  std::optional<std::uint64_t> seed;
  std::string out_dir = ".";
};

struct InputFiles {
  std::string net;
  std::string trips;
  std::string lanes;
};

// Records inputs and outputs of one command and writes the manifest next to
// the data files.
class Run {
 public:
  Run(std::string command, const GlobalOptions& g, cf::Config cfg)
      : command_(std::move(command)), global_(g), config_(std::move(cfg)),
        start_(std::chrono::steady_clock::now()) {}

  const cf::Config& config() const { return config_; }
  const GlobalOptions& global() const { return global_; }

  void input(const std::string& role, const std::string& path) {
    std::uintmax_t bytes = 0;
    const std::string digest = sha256_file(path, &bytes);
    inputs_.push_back({{"role", role}, {"path", path}, {"sha256", digest}, {"bytes", bytes}});
  }

  std::string path(const std::string& stem, const std::string& suffix) const {
    return (std::filesystem::path(global_.out_dir) / (stem + suffix)).string();
  }

  void write(const std::string& path, const std::string& content) {
    cf::write_text(path, content);
    outputs_.push_back(path);
  }
  void write(const std::string& path, const ojson& j) {
    cf::write_json(path, j);
    outputs_.push_back(path);
  }

  ojson& diagnostics() { return diagnostics_; }

  void finish(const std::string& stem, const std::vector<std::string>& argv) {
    ojson cfg;
    cf::to_json(cfg, config_);
    const double elapsed =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
    ojson m{{"command", command_},
            {"argv", argv},
            {"tool_version", kVersion},
            {"config", cfg},
            {"threads", global_.threads},
            {"inputs", inputs_},
            {"outputs", outputs_},
            {"wall_clock_utc", utc_now()},
            {"elapsed_seconds", elapsed},
            {"diagnostics", diagnostics_}};
    cf::write_json(path(stem, ".manifest.json"), m);
  }

 private:
  std::string command_;
  GlobalOptions global_;
  cf::Config config_;
  std::chrono::steady_clock::time_point start_;
  ojson inputs_ = ojson::array();
  std::vector<std::string> outputs_;
  ojson diagnostics_ = ojson::object();
};

cf::Config load_config(const GlobalOptions& g) {
  cf::Config c = g.config_path.empty() ? cf::Config{} : cf::load_config(g.config_path);
  if (g.seed) c.seed = *g.seed;
  c.validate();
  return c;
}

void print_warnings(const std::vector<std::string>& warnings) {
  for (const auto& w : warnings) std::cerr << "warning: " << w << "\n";
}

cf::Network load_network(Run& run, const InputFiles& in, std::vector<std::string>& warnings) {
  run.input("net", in.net);
  std::optional<std::string> lanes;
  if (!in.lanes.empty()) {
    run.input("lanes", in.lanes);
    lanes = in.lanes;
  }
  return cf::parse_network(in.net, lanes, run.config(), &warnings);
}

ojson tap_diagnostics(const cf::TapSolution& s) {
  return ojson{{"relative_gap", s.relative_gap},
               {"iterations", s.iterations},
               {"converged", s.converged},
               {"objective", s.objective},
               {"total_travel_time", s.total_travel_time}};
}

// ---------------------------------------------------------------------------

struct TapArgs {
  InputFiles in;
  std::string mode;
  double multiplier = 1.0;
  std::optional<double> rel_gap;
  std::string out = "tap";
};

int cmd_tap(const TapArgs& a, Run& run, const std::vector<std::string>& argv) {
  std::vector<std::string> warnings;
  const cf::Network net = load_network(run, a.in, warnings);
  run.input("trips", a.in.trips);
  const cf::ODMatrix od = cf::parse_demand(a.in.trips, net, a.multiplier, &warnings);
  print_warnings(warnings);
  cf::TapSettings ts = run.config().tap_settings(run.global().threads);
  if (!a.mode.empty()) ts.mode = cf::parse_tap_mode(a.mode);
  if (a.rel_gap) ts.relative_gap = *a.rel_gap;
  const cf::LaneConfig z0 = net.nominal_lanes();
  const cf::TapSolution sol = cf::solve_tap(net, z0, od, ts);

  run.write(run.path(a.out, ".csv"), cf::format_flows_csv(net, z0, sol.flows));
  run.diagnostics()["tap"] = tap_diagnostics(sol);
  run.diagnostics()["mode"] = cf::to_string(ts.mode);
  run.diagnostics()["multiplier"] = a.multiplier;
  run.finish(a.out, argv);

  std::cout << "mode " << cf::to_string(ts.mode) << "  total travel time "
            << cf::detail::format_double(sol.total_travel_time) << " veh*h  relative gap "
            << cf::detail::format_double(sol.relative_gap, 4) << "  iterations " << sol.iterations << "\n";
  if (!sol.converged) {
    std::cerr << "warning: relative gap target not reached\n";
    return kExitNotConverged;
  }
  return kExitOk;
}

struct OptimizeArgs {
  InputFiles in;
  std::optional<int> budget;
  double multiplier = 1.0;
  bool bound = false;
  bool sequential = false;
  std::string out = "optimize";
};

int cmd_optimize(const OptimizeArgs& a, Run& run, const std::vector<std::string>& argv) {
  std::vector<std::string> warnings;
  const cf::Network net = load_network(run, a.in, warnings);
  run.input("trips", a.in.trips);
  const cf::ODMatrix od = cf::parse_demand(a.in.trips, net, a.multiplier, &warnings);
  print_warnings(warnings);
  const cf::PipelineSettings ps = run.config().pipeline_settings(run.global().threads);
  const cf::LaneConfig z0 = net.nominal_lanes();
  bool converged = true;

  const cf::TapSolution base = cf::solve_tap(net, z0, od, ps.tap);
  converged = converged && base.converged;
  run.diagnostics()["tap_nominal"] = tap_diagnostics(base);

  cf::FlowVector flows = base.flows;
  cf::LaneOptResult result;
  if (a.sequential) {
    const cf::LasoResult laso = cf::sequential_laso(net, od, ps);
    converged = converged && laso.tap.converged;
    const cf::LaProblem prob = cf::LaProblem::build(net, laso.tap.flows);
    result = cf::evaluate_lanes(prob, laso.lanes);
    flows = laso.tap.flows;
    std::ostringstream trace;
    trace << "iteration,objective,tap_gap,accepted,reversals\n";
    for (const auto& it : laso.trace) {
      int rev = 0;
      for (const auto& p : net.pairs()) rev += std::abs(it.lanes[p.forward] - z0[p.forward]);
      trace << it.iteration << "," << cf::detail::format_double(it.objective) << ","
            << cf::detail::format_double(it.tap_gap) << "," << (it.accepted ? 1 : 0) << "," << rev << "\n";
    }
    run.write(run.path(a.out, ".laso.csv"), trace.str());
    run.diagnostics()["laso"] = ojson{{"outer_iterations", laso.outer_iterations},
                                      {"fixed_point", laso.fixed_point},
                                      {"objective", laso.objective},
                                      {"nominal_objective", base.total_travel_time}};
  } else {
    const cf::LaProblem prob = cf::LaProblem::build(net, flows, std::nullopt, a.budget);
    result = a.budget ? cf::solve_la_budget(prob) : cf::solve_la(prob);
    if (a.bound) {
      const cf::RelaxedBound rb = cf::relaxed_lower_bound(net, flows, ps.bound);
      const cf::LaneConfig zp = cf::project_bound(net, rb.lanes);
      result.relaxed_bound = rb.bound;
      result.projected_objective = cf::total_cost(net, zp, flows);
      result.projected_lanes = zp;
      converged = converged && rb.converged;
      run.diagnostics()["relaxed_bound"] = ojson{{"sweeps", rb.sweeps},
                                                 {"converged", rb.converged},
                                                 {"gradient_norm", rb.gradient_norm},
                                                 {"iterate_value", rb.value},
                                                 {"bound", rb.bound}};
    }
  }

  run.write(run.path(a.out, ".csv"), cf::format_lane_result_csv(net, flows, result));
  run.write(run.path(a.out, ".json"), cf::lane_result_json(net, flows, result));
  run.write(run.path(a.out, ".lanes.csv"), cf::format_lane_table(net, result.lanes));
  run.write(run.path(a.out, ".improvements.csv"),
            cf::format_improvements_csv(net, cf::arc_improvements(net, flows, z0, result.lanes)));
  run.diagnostics()["multiplier"] = a.multiplier;
  run.finish(a.out, argv);

  std::cout << "nodes " << net.num_nodes() << "  arcs " << net.num_arcs() << "  lanes " << net.total_lanes()
            << "  reversible pairs " << net.num_pairs() << "\n";
  std::cout << "nominal cost " << cf::detail::format_double(result.nominal_objective) << "  optimized cost "
            << cf::detail::format_double(result.objective) << "  reversals " << result.reversals << "\n";
  if (result.relaxed_bound)
    std::cout << "relaxed bound " << cf::detail::format_double(*result.relaxed_bound) << "  projected cost "
              << cf::detail::format_double(*result.projected_objective) << "\n";
  return converged ? kExitOk : kExitNotConverged;
}

struct SweepArgs {
  InputFiles in;
  std::string kind;
  std::vector<double> values;
  double multiplier = 1.0;
  std::string out = "sweep";
};

int cmd_sweep(const SweepArgs& a, Run& run, const std::vector<std::string>& argv) {
  std::vector<std::string> warnings;
  const cf::Network net = load_network(run, a.in, warnings);
  run.input("trips", a.in.trips);
  const cf::ODMatrix od = cf::parse_demand(a.in.trips, net, a.multiplier, &warnings);
  print_warnings(warnings);
  const cf::PipelineSettings ps = run.config().pipeline_settings(run.global().threads);

  cf::SweepKind kind;
  std::vector<cf::SweepRow> rows;
  if (a.kind == "demand") {
    kind = cf::SweepKind::Demand;
    rows = cf::demand_sweep(net, od, a.values, ps);
  } else {
    kind = cf::SweepKind::Budget;
    std::vector<int> budgets;
    for (double v : a.values) {
      if (v < 0 || v != std::floor(v)) throw std::invalid_argument("budget values must be nonnegative integers");
      budgets.push_back(static_cast<int>(v));
    }
    rows = cf::budget_sweep(net, od, budgets, ps);
  }
  bool converged = true;
  for (const auto& r : rows) converged = converged && r.tap_converged;

  run.write(run.path(a.out, ".csv"), cf::format_sweep_csv(rows, kind));
  run.write(run.path(a.out, ".plot.dat"), cf::format_sweep_plot(rows, kind));
  run.diagnostics()["kind"] = a.kind;
  run.diagnostics()["points"] = rows.size();
  run.diagnostics()["multiplier"] = a.multiplier;
  run.finish(a.out, argv);
  std::cout << a.kind << " sweep: " << rows.size() << " points written to " << a.out << ".csv\n";
  return converged ? kExitOk : kExitNotConverged;
}

struct AuditArgs {
  InputFiles in;
  std::optional<std::size_t> sample;
  double multiplier = 1.0;
  std::string out = "audit";
};

int cmd_audit(const AuditArgs& a, Run& run, const std::vector<std::string>& argv) {
  std::vector<std::string> warnings;
  // Reversibility is defined by the nominal (file-derived) lanes; the audited
  // configuration comes from the lane table.
  run.input("net", a.in.net);
  run.input("lanes", a.in.lanes);
  const cf::Network nominal_net = cf::parse_network(a.in.net, std::nullopt, run.config(), &warnings);
  const auto table = cf::read_lane_table(a.in.lanes);
  cf::LaneConfig lanes = nominal_net.nominal_lanes();
  for (const auto& rec : table) {
    bool matched = false;
    for (const cf::Arc& arc : nominal_net.arcs()) {
      if (nominal_net.node_id(arc.tail) == rec.init && nominal_net.node_id(arc.head) == rec.term) {
        lanes[arc.id] = rec.lanes;
        matched = true;
      }
    }
    if (!matched) throw cf::ParseError(a.in.lanes, rec.line, "lane record does not match any arc");
  }
  if (!nominal_net.is_feasible(lanes))
    throw std::invalid_argument(a.in.lanes + ": lane configuration violates pair totals or minimum lanes");
  run.input("trips", a.in.trips);
  const cf::ODMatrix od = cf::parse_demand(a.in.trips, nominal_net, a.multiplier, &warnings);
  print_warnings(warnings);
  const cf::PipelineSettings ps = run.config().pipeline_settings(run.global().threads);
  const cf::PsiAudit audit = cf::psi_audit(nominal_net, od, lanes, ps, a.sample);

  run.write(run.path(a.out, ".csv"), cf::format_psi_csv(nominal_net, audit));
  const auto violations = audit.violations();
  run.diagnostics()["audited_pairs"] = audit.audited_pairs;
  run.diagnostics()["violations"] = violations.size();
  run.diagnostics()["base_objective"] = audit.base_objective;
  run.diagnostics()["base_gap"] = audit.base_gap;
  run.finish(a.out, argv);
  std::cout << "audited " << audit.audited_pairs.size() << " pairs, " << violations.size()
            << " profitable single reversals\n";
  return audit.base_gap <= ps.tap.relative_gap ? kExitOk : kExitNotConverged;
}

int cmd_validate(const InputFiles& in, double multiplier, Run& run) {
  std::vector<std::string> warnings;
  cf::Config cfg = run.config();
  std::optional<std::string> lanes;
  if (!in.lanes.empty()) lanes = in.lanes;
  const cf::Network net = cf::parse_network(in.net, lanes, cfg, &warnings);
  std::cout << "nodes " << net.num_nodes() << "\n"
            << "arcs " << net.num_arcs() << "\n"
            << "lanes " << net.total_lanes() << "\n"
            << "reversible pairs " << net.num_pairs() << "\n"
            << "strongly connected " << (net.is_strongly_connected() ? "yes" : "no") << "\n";
  if (!in.trips.empty()) {
    const cf::ODMatrix od = cf::parse_demand(in.trips, net, multiplier, &warnings);
    std::cout << "od pairs " << od.size() << "\n"
              << "total demand " << cf::detail::format_double(od.total_demand()) << "\n";
  }
  print_warnings(warnings);
  return kExitOk;
}

void add_inputs(CLI::App* sub, InputFiles& in, bool trips_required, bool lanes_required) {
  sub->add_option("--net", in.net, "TNTP network file")->required()->check(CLI::ExistingFile);
  auto* t = sub->add_option("--trips", in.trips, "TNTP trips file")->check(CLI::ExistingFile);
  if (trips_required) t->required();
  auto* l = sub->add_option("--lanes", in.lanes, "lane table CSV (init,term,lanes)")->check(CLI::ExistingFile);
  if (lanes_required) l->required();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Contraflow lane planning: traffic assignment and lane reversal optimisation"};
  app.require_subcommand(1);
  app.fallthrough();
  app.set_version_flag("--version", kVersion);

  GlobalOptions g;
  std::uint64_t seed = 0;
  app.add_option("--config", g.config_path, "JSON configuration file")->check(CLI::ExistingFile);
  app.add_option("--threads", g.threads, "worker threads")->check(CLI::PositiveNumber);
  auto* seed_opt = app.add_option("--seed", seed, "random seed for sampled audits");
  app.add_option("--out-dir", g.out_dir, "directory for output files");

  TapArgs tap;
  auto* tap_cmd = app.add_subcommand("tap", "solve traffic assignment at the nominal lanes");
  add_inputs(tap_cmd, tap.in, true, false);
  tap_cmd->add_option("--mode", tap.mode, "so|uc")->check(CLI::IsMember({"so", "uc"}));
  tap_cmd->add_option("--multiplier", tap.multiplier, "demand multiplier")->check(CLI::PositiveNumber);
  tap_cmd->add_option("--rel-gap", tap.rel_gap, "relative gap target")->check(CLI::PositiveNumber);
  tap_cmd->add_option("--out", tap.out, "output file stem");

  OptimizeArgs opt;
  auto* opt_cmd = app.add_subcommand("optimize", "optimise lane directions at equilibrated flows");
  add_inputs(opt_cmd, opt.in, true, false);
  opt_cmd->add_option("--budget", opt.budget, "maximum lanes reversed")->check(CLI::NonNegativeNumber);
  opt_cmd->add_option("--multiplier", opt.multiplier, "demand multiplier")->check(CLI::PositiveNumber);
  opt_cmd->add_flag("--bound", opt.bound, "add relaxed lower bound and its rounding");
  opt_cmd->add_flag("--sequential", opt.sequential, "alternate TAP and lane optimisation to a fixed point");
  opt_cmd->add_option("--out", opt.out, "output file stem");

  SweepArgs sweep;
  auto* sweep_cmd = app.add_subcommand("sweep", "demand-multiplier or reversal-budget sweep");
  add_inputs(sweep_cmd, sweep.in, true, false);
  sweep_cmd->add_option("--kind", sweep.kind, "demand|budget")->required()->check(CLI::IsMember({"demand", "budget"}));
  sweep_cmd->add_option("--values", sweep.values, "comma-separated sweep values")->required()->delimiter(',');
  sweep_cmd->add_option("--multiplier", sweep.multiplier, "demand multiplier (budget sweeps)")
      ->check(CLI::PositiveNumber);
  sweep_cmd->add_option("--out", sweep.out, "output file stem");

  AuditArgs audit;
  auto* audit_cmd = app.add_subcommand("audit", "re-solve TAP at every single-lane reversal");
  add_inputs(audit_cmd, audit.in, true, true);
  audit_cmd->add_option("--sample", audit.sample, "audit K randomly chosen pairs")->check(CLI::PositiveNumber);
  audit_cmd->add_option("--multiplier", audit.multiplier, "demand multiplier")->check(CLI::PositiveNumber);
  audit_cmd->add_option("--out", audit.out, "output file stem");

  InputFiles validate_in;
  double validate_multiplier = 1.0;
  auto* validate_cmd = app.add_subcommand("validate", "parse inputs and print network statistics");
  add_inputs(validate_cmd, validate_in, false, false);
  validate_cmd->add_option("--multiplier", validate_multiplier, "demand multiplier")->check(CLI::PositiveNumber);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitInput;
  }
  if (*seed_opt) g.seed = seed;
  const std::vector<std::string> args(argv + 1, argv + argc);

  try {
    const cf::Config cfg = load_config(g);
    if (*tap_cmd) {
      Run run("tap", g, cfg);
      return cmd_tap(tap, run, args);
    }
    if (*opt_cmd) {
      Run run("optimize", g, cfg);
      return cmd_optimize(opt, run, args);
    }
    if (*sweep_cmd) {
      Run run("sweep", g, cfg);
      return cmd_sweep(sweep, run, args);
    }
    if (*audit_cmd) {
      Run run("audit", g, cfg);
      return cmd_audit(audit, run, args);
    }
    Run run("validate", g, cfg);
    return cmd_validate(validate_in, validate_multiplier, run);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInput;
  }
}
