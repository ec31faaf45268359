#include <cmath>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "apmp/energy.hpp"
#include "apmp/equivalence.hpp"
#include "apmp/flow.hpp"
#include "apmp/io.hpp"
#include "apmp/messages.hpp"
#include "apmp/solver.hpp"

namespace {

using nlohmann::json;

enum class LogLevel { kOff = 0, kInfo = 1, kDebug = 2 };

LogLevel log_level() {
  const char* v = std::getenv("APMP_LOG");
  if (v == nullptr) return LogLevel::kOff;
  const std::string s = v;
  if (s == "debug") return LogLevel::kDebug;
  if (s == "info") return LogLevel::kInfo;
  return LogLevel::kOff;
}

void log_line(LogLevel at, const std::string& msg) {
  if (static_cast<int>(log_level()) >= static_cast<int>(at)) {
    std::cerr << "[apmp] " << msg << "\n";
  }
}

// An input argument is either a file path or inline JSON (first
// non-whitespace character '{').
std::string read_input(const std::string& arg) {
  const auto pos = arg.find_first_not_of(" \t\r\n");
  if (pos != std::string::npos && arg[pos] == '{') return arg;
  std::ifstream in(arg);
  if (!in) {
    throw apmp::InputError("Malformed", "cannot read input file: " + arg);
  }
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

struct SolveOutcome {
  apmp::Assignment assignment;
  double energy = 0.0;
  long long iterations = 0;
  bool converged = true;
};

int strictmp_round_cap(const apmp::Energy& e) {
  double lambda_max = 0.0;
  double alpha_min = 0.0;
  const auto feed = [&alpha_min](double v) {
    if (v > 0.0) alpha_min = alpha_min == 0.0 ? v : std::min(alpha_min, v);
  };
  for (const apmp::Edge& ed : e.edges) {
    lambda_max = std::max({lambda_max, ed.theta01, ed.theta10});
    feed(ed.theta01);
    feed(ed.theta10);
  }
  for (const auto& u : e.unaries) {
    for (const double v : u) feed(v);
  }
  int cap = 2 * e.num_vars + 2;
  if (lambda_max > 0.0 && alpha_min > 0.0) {
    const double m = 2.0 * static_cast<double>(e.edges.size()) + e.num_vars;
    cap += static_cast<int>(std::ceil(m * lambda_max / alpha_min));
  }
  return cap;
}

SolveOutcome run_strictmp(const apmp::Energy& e) {
  const apmp::Topology topo = apmp::build_topology(e);
  apmp::MessageState st = apmp::make_zero_state(e);
  const int cap = strictmp_round_cap(e);
  SolveOutcome out;
  out.converged = false;
  for (int round = 0; round < cap; ++round) {
    auto [next, rep] = apmp::strict_mp_round(e, topo, st);
    ++out.iterations;
    if (rep.is_fixed_point) {
      out.converged = true;
      break;
    }
    st = std::move(next);
  }
  out.assignment = apmp::decode(apmp::compute_beliefs(e, topo, st));
  out.energy = apmp::evaluate(e, out.assignment);
  return out;
}

SolveOutcome run_method(const apmp::Energy& e, const std::string& method,
                        apmp::Phase2Mode mode) {
  SolveOutcome out;
  if (method == "apmp") {
    const apmp::ApmpResult res = apmp::apmp_solve(e, mode);
    out.assignment = res.assignment;
    out.energy = res.value;
    out.iterations = res.phase1_iterations + res.phase2_rounds;
    out.converged = res.converged;
  } else if (method == "maxflow") {
    const apmp::MaxflowResult res = apmp::maxflow_solve(e);
    out.assignment = res.decode.labels;
    out.energy = apmp::evaluate(e, out.assignment);
    out.iterations = static_cast<long long>(res.augmentations.size());
  } else if (method == "bruteforce") {
    auto [x, value] = apmp::brute_force_map(e);
    out.assignment = std::move(x);
    out.energy = value;
    out.iterations = 1ll << e.num_vars;
  } else {
    out = run_strictmp(e);
  }
  return out;
}

void print_result(const SolveOutcome& out, const std::string& method,
                  const std::string& format) {
  if (format == "text") {
    std::cout << "method: " << method << "\n";
    std::cout << "energy: " << out.energy << "\n";
    std::cout << "assignment:";
    for (const auto x : out.assignment) std::cout << " " << int(x);
    std::cout << "\n";
    std::cout << "iterations: " << out.iterations << "\n";
    std::cout << "converged: " << (out.converged ? "true" : "false") << "\n";
    return;
  }
  json doc;
  doc["assignment"] = json::array();
  for (const auto x : out.assignment) doc["assignment"].push_back(int(x));
  doc["energy"] = out.energy;
  doc["method"] = method;
  doc["iterations"] = out.iterations;
  doc["converged"] = out.converged;
  std::cout << doc.dump() << "\n";
}

int cmd_solve(const std::string& input, const std::string& method,
              const std::string& phase2_mode, bool canonicalize_input,
              const std::string& dimacs_out, const std::string& format) {
  const apmp::Energy e =
      apmp::load_energy_json(read_input(input), canonicalize_input);
  if (!dimacs_out.empty()) {
    std::ofstream dout(dimacs_out);
    if (!dout) {
      throw apmp::InputError("Malformed", "cannot write " + dimacs_out);
    }
    dout << apmp::export_dimacs(e);
    log_line(LogLevel::kInfo, "wrote DIMACS to " + dimacs_out);
  }
  const apmp::Phase2Mode mode = phase2_mode == "strict"
                                    ? apmp::Phase2Mode::kStrict
                                    : apmp::Phase2Mode::kFast;
  log_line(LogLevel::kInfo, "solving " + std::to_string(e.num_vars) +
                                " variables with method " + method);
  const SolveOutcome out = run_method(e, method, mode);
  print_result(out, method, format);
  return 0;
}

// One instance of the verification pipeline: the flow-equivalence check plus
// optimality against brute force. Returns mismatch records.
json verify_instance(const apmp::Energy& e, int index, long long* iterations) {
  json mismatches = json::array();
  const apmp::LockstepReport rep = apmp::lockstep_check(e);
  *iterations += rep.iterations;
  for (const auto& m : rep.mismatches) {
    mismatches.push_back({{"instance", index},
                          {"iteration", m.iteration},
                          {"field", m.field},
                          {"detail", m.detail}});
  }
  const apmp::ApmpResult res = apmp::apmp_solve(e, apmp::Phase2Mode::kStrict);
  const auto [bf_x, bf_value] = apmp::brute_force_map(e);
  if (res.value != bf_value) {
    mismatches.push_back({{"instance", index},
                          {"iteration", -1},
                          {"field", "optimal"},
                          {"detail", "solver value " + std::to_string(res.value) +
                                         " vs exhaustive " +
                                         std::to_string(bf_value)}});
  }
  return mismatches;
}

json verify_state(const apmp::Energy& e, const std::string& state_text) {
  json mismatches = json::array();
  const apmp::MessageState st = apmp::load_messages_json(state_text, e);
  const apmp::Topology topo = apmp::build_topology(e);
  auto [next, rep] = apmp::strict_mp_round(e, topo, st);
  if (!rep.is_fixed_point) {
    mismatches.push_back(
        {{"instance", 0},
         {"iteration", -1},
         {"field", "fixed_point"},
         {"detail", "message " + rep.violating_edge.value_or("?") +
                        " moved by " + std::to_string(rep.max_message_change)}});
  }
  const apmp::ResidualView rv = apmp::residual_view(e, topo, st);
  for (int i = 0; i < e.num_vars; ++i) {
    if (rv.r_source[i] < -apmp::kSumTol || rv.r_sink[i] < -apmp::kSumTol) {
      mismatches.push_back({{"instance", 0},
                            {"iteration", -1},
                            {"field", "residuals"},
                            {"detail", "negative terminal residual at variable " +
                                           std::to_string(i)}});
    }
  }
  if (e.num_vars <= 25) {
    const apmp::Assignment x =
        apmp::decode(apmp::compute_beliefs(e, topo, st));
    const auto [bf_x, bf_value] = apmp::brute_force_map(e);
    if (apmp::evaluate(e, x) != bf_value) {
      mismatches.push_back({{"instance", 0},
                            {"iteration", -1},
                            {"field", "optimal"},
                            {"detail", "state decodes to a suboptimal assignment"}});
    }
  }
  return mismatches;
}

int cmd_verify(const std::string& input, const std::string& state_file,
               int instances, std::uint64_t seed) {
  json report;
  report["mismatches"] = json::array();
  long long iterations_total = 0;
  int instance_count = 0;

  if (!state_file.empty()) {
    if (input.empty()) {
      throw apmp::InputError("Malformed", "--state needs an energy input");
    }
    const apmp::Energy e = apmp::load_energy_json(read_input(input), false);
    report["mismatches"] = verify_state(e, read_input(state_file));
    instance_count = 1;
  } else if (!input.empty()) {
    const apmp::Energy e = apmp::load_energy_json(read_input(input), false);
    report["mismatches"] = verify_instance(e, 0, &iterations_total);
    instance_count = 1;
  } else {
    const double densities[] = {0.3, 0.6, 1.0};
    for (int k = 0; k < instances; ++k) {
      const int n = 1 + k % 10;
      const apmp::Energy e = apmp::random_instance(
          n, densities[k % 3], 10, 10, seed + static_cast<std::uint64_t>(k));
      log_line(LogLevel::kDebug, "instance " + std::to_string(k) + " n=" +
                                     std::to_string(n));
      for (auto& m : verify_instance(e, k, &iterations_total)) {
        report["mismatches"].push_back(std::move(m));
      }
      ++instance_count;
      if ((k + 1) % 50 == 0) {
        log_line(LogLevel::kInfo,
                 "verified " + std::to_string(k + 1) + " instances");
      }
    }
  }
  report["instances"] = instance_count;
  report["iterations_total"] = iterations_total;
  std::cout << report.dump() << "\n";
  return report["mismatches"].empty() ? 0 : 2;
}

int cmd_generate(int n, double density, double max_unary, double max_pairwise,
                 std::uint64_t seed) {
  const apmp::Energy e =
      apmp::random_instance(n, density, max_unary, max_pairwise, seed);
  std::cout << apmp::save_energy_json(e) << "\n";
  return 0;
}

int cmd_trace(const std::string& input, bool canonicalize_input) {
  const apmp::Energy e =
      apmp::load_energy_json(read_input(input), canonicalize_input);
  const apmp::Topology topo = apmp::build_topology(e);
  const apmp::Phase1Result p1 = apmp::phase1_run(e, topo);
  for (std::size_t k = 0; k < p1.trace.size(); ++k) {
    std::cout << apmp::phase1_record_json(static_cast<int>(k), p1.trace[k])
              << "\n";
  }
  const apmp::Phase2Result p2 =
      apmp::phase2_run(e, topo, p1.state, apmp::Phase2Mode::kStrict);
  json summary;
  summary["phase2_rounds"] = p2.rounds;
  summary["phase2_round_cap"] = p2.round_cap;
  summary["assignment"] = json::array();
  for (const auto x : p2.assignment) summary["assignment"].push_back(int(x));
  summary["energy"] = apmp::evaluate(e, p2.assignment);
  std::cout << summary.dump() << "\n";
  return 0;
}

int report_error(const std::string& code, const std::string& message, int exit_code) {
  json err;
  err["error"] = code;
  err["message"] = message;
  std::cerr << err.dump() << "\n";
  return exit_code;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "Minimize binary submodular pairwise energies by max-flow, by "
      "augmenting-path-scheduled max-product message passing, or by "
      "exhaustive search.\n"
      "Exit codes: 0 success, 2 solver error, 3 invalid input."};
  app.require_subcommand(1);

  std::string input;
  std::string method = "apmp";
  std::string phase2_mode = "fast";
  std::string format = "json";
  std::string dimacs_out;
  std::string state_file;
  bool canonicalize_input = false;
  int instances = 200;
  std::uint64_t seed = 1;
  int n = 8;
  double density = 0.5;
  double max_unary = 10;
  double max_pairwise = 10;

  CLI::App* solve = app.add_subcommand("solve", "Minimize one energy");
  solve->add_option("input", input, "energy JSON file or inline JSON")->required();
  solve->add_option("--method", method, "apmp, maxflow, strictmp, or bruteforce")
      ->check(CLI::IsMember({"apmp", "maxflow", "strictmp", "bruteforce"}));
  solve->add_option("--phase2-mode", phase2_mode, "fast or strict decode phase")
      ->check(CLI::IsMember({"fast", "strict"}));
  solve->add_flag("--canonicalize", canonicalize_input,
                  "convert non-canonical input instead of rejecting it");
  solve->add_option("--dimacs-out", dimacs_out,
                    "also write the max-flow network in DIMACS format");
  solve->add_option("--format", format, "json or text output")
      ->check(CLI::IsMember({"json", "text"}));

  CLI::App* verify = app.add_subcommand(
      "verify", "Check message-passing against the max-flow oracle");
  verify->add_option("input", input, "optional energy JSON to verify");
  verify->add_option("--state", state_file,
                     "check a saved message state instead of running lockstep");
  verify->add_option("--instances", instances, "number of random instances");
  verify->add_option("--seed", seed, "base seed for generated instances");

  CLI::App* generate =
      app.add_subcommand("generate", "Emit a random canonical energy as JSON");
  generate->add_option("--n", n, "number of variables");
  generate->add_option("--density", density, "edge probability in (0, 1]");
  generate->add_option("--max-unary", max_unary, "unary entries drawn from 0..max");
  generate->add_option("--max-pairwise", max_pairwise,
                       "pairwise entries drawn from 0..max");
  generate->add_option("--seed", seed, "generator seed");

  CLI::App* trace = app.add_subcommand(
      "trace", "Print one JSONL record per chain update, then a summary");
  trace->add_option("input", input, "energy JSON file or inline JSON")->required();
  trace->add_flag("--canonicalize", canonicalize_input,
                  "convert non-canonical input instead of rejecting it");

  try {
    app.parse(argc, argv);
    if (solve->parsed()) {
      return cmd_solve(input, method, phase2_mode, canonicalize_input,
                       dimacs_out, format);
    }
    if (verify->parsed()) return cmd_verify(input, state_file, instances, seed);
    if (generate->parsed()) {
      return cmd_generate(n, density, max_unary, max_pairwise, seed);
    }
    return cmd_trace(input, canonicalize_input);
  } catch (const CLI::CallForHelp& ex) {
    return app.exit(ex);
  } catch (const CLI::ParseError& ex) {
    return report_error("Malformed", ex.what(), 3);
  } catch (const apmp::InputError& ex) {
    return report_error(ex.code(), ex.what(), 3);
  } catch (const apmp::SolverError& ex) {
    return report_error(ex.code(), ex.what(), 2);
  } catch (const std::exception& ex) {
    return report_error("Internal", ex.what(), 2);
  }
}
