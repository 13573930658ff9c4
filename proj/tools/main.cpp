// Command-line driver: reads a problem (SDPA or JSON format) or generates a
// benchmark instance, runs the two-phase solver (or the first phase alone),
// prints a summary, and optionally writes a JSON result report.
//
// Exit codes: 0 when the target tolerance was reached, 2 when the solver
// stopped on an iteration/time budget or stagnation (a result is still
// written), 1 on input errors.
#include <CLI11.hpp>

#include <cstdio>
#include <iostream>
#include <stdexcept>
#include <string>
#include <vector>

#include "sdpal/io.hpp"
#include "sdpal/phase1.hpp"
#include "sdpal/phase2.hpp"
#include "sdpal/problems.hpp"

using namespace sdpal;

namespace {

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> parts;
  std::string cur;
  for (char c : s) {
    if (c == sep) {
      parts.push_back(cur);
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  parts.push_back(cur);
  return parts;
}

int parse_int(const std::string& s, const std::string& what) {
  try {
    size_t pos = 0;
    const int v = std::stoi(s, &pos);
    if (pos != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw std::runtime_error("--gen: expected an integer " + what + ", got '" + s + "'");
  }
}

Graph parse_graph_args(const std::vector<std::string>& args) {
  if (args.empty()) throw std::runtime_error("--gen: missing graph family");
  const std::string& family = args[0];
  if (family == "file") {
    if (args.size() != 2) throw std::runtime_error("--gen: file family needs a path");
    return read_edge_list(args[1]);
  }
  if (args.size() != 2) throw std::runtime_error("--gen: graph family '" + family + "' needs n");
  const int n = parse_int(args[1], "node count");
  if (family == "cycle") return make_cycle(n);
  if (family == "complete") return make_complete(n);
  if (family == "empty") return make_empty(n);
  throw std::runtime_error("--gen: unknown graph family '" + family +
                           "' (use cycle, complete, empty, or file)");
}

// Grammar: NAME:ARGS with comma-separated ARGS.
//   theta:cycle,N | theta:complete,N | theta:empty,N | theta:file,PATH
//   thetaplus:<same graph families>
//   ncm:N[,SEED]   fap:N[,K[,SEED]]   edm:N[,SEED]   qap:N[,SEED]
ProblemData generate(const std::string& spec) {
  const auto head = split(spec, ':');
  if (head.size() != 2 || head[0].empty() || head[1].empty())
    throw std::runtime_error("--gen: expected NAME:ARGS, got '" + spec + "'");
  const std::string& name = head[0];
  const auto args = split(head[1], ',');

  auto seed_arg = [&](size_t idx, unsigned dflt) {
    return args.size() > idx ? static_cast<unsigned>(parse_int(args[idx], "seed")) : dflt;
  };

  if (name == "theta") return gen_theta(parse_graph_args(args));
  if (name == "thetaplus") return gen_thetaplus(parse_graph_args(args));
  if (name == "ncm") {
    if (args.empty() || args.size() > 2) throw std::runtime_error("--gen: ncm:N[,SEED]");
    return gen_ncm(parse_int(args[0], "size"), seed_arg(1, 1));
  }
  if (name == "fap") {
    if (args.empty() || args.size() > 3) throw std::runtime_error("--gen: fap:N[,K[,SEED]]");
    const int n = parse_int(args[0], "size");
    const int k = args.size() > 1 ? parse_int(args[1], "channel count") : 3;
    return gen_fap(make_random_fap(n, 0.5, k, seed_arg(2, 1)));
  }
  if (name == "edm") {
    if (args.empty() || args.size() > 2) throw std::runtime_error("--gen: edm:N[,SEED]");
    return gen_edm(make_random_edm(parse_int(args[0], "point count"), 2, 0.5, seed_arg(1, 1)));
  }
  if (name == "qap") {
    if (args.empty() || args.size() > 2) throw std::runtime_error("--gen: qap:N[,SEED]");
    return gen_qap(parse_int(args[0], "size"), seed_arg(1, 1));
  }
  throw std::runtime_error("--gen: unknown generator '" + name +
                           "' (use theta, thetaplus, ncm, fap, edm, or qap)");
}

std::string lower_ext(const std::string& path) {
  const size_t dot = path.rfind('.');
  if (dot == std::string::npos) return "";
  std::string ext = path.substr(dot + 1);
  for (char& c : ext) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return ext;
}

void print_summary(const ProblemData& d, const SolveResult& r, bool phase1_only) {
  std::printf("name       : %s\n", d.name.c_str());
  std::printf("size       : %d block(s), m = %d, p = %d\n", d.blk.count(), d.m(), d.p());
  std::printf("status     : %s%s\n", to_string(r.reason), phase1_only ? " (first phase only)" : "");
  std::printf("objective  : %.7f\n", d.reported_objective(r.res.pobj));
  std::printf("pobj/dobj  : %.10g / %.10g (gap %.2e)\n", r.res.pobj, r.res.dobj, r.res.rel_gap);
  std::printf("eta        : %.2e (P %.2e, D %.2e, cone %.2e, box %.2e)\n", r.res.eta,
              r.res.eta_primal, r.res.eta_dual, r.res.eta_cone, r.res.eta_box);
  std::printf("iterations : %d first-phase + %d second-phase\n", r.iterations_phase1,
              r.iterations_phase2);
  std::printf("time       : %.3f s\n", r.seconds);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "Two-phase augmented-Lagrangian solver for semidefinite programs with "
      "bound constraints"};

  std::string input, format, output, gen_spec, sdpa_sign = "min", aat_method;
  SolverParams params;
  bool phase1_only = false;

  app.add_option("--input", input, "Problem file to read");
  app.add_option("--format", format, "Input format: sdpa or json (default: by file extension)")
      ->check(CLI::IsMember({"sdpa", "json"}));
  app.add_option("--sdpa-sign", sdpa_sign,
                 "Objective reporting for SDPA sources: 'min' reports the converted "
                 "minimization value, 'max' reports the original maximization value")
      ->check(CLI::IsMember({"min", "max"}));
  app.add_option("--gen", gen_spec,
                 "Generate an instance instead of reading a file. Grammar NAME:ARGS, e.g. "
                 "theta:cycle,5 thetaplus:file,G.txt ncm:20,7 fap:10,3,1 edm:12,4 qap:4,2");
  auto* tol_opt = app.add_option("--tol", params.tol, "Target KKT residual (default 1e-6)");
  app.add_option("--maxiter", params.max_iter, "Iteration budget per phase");
  app.add_option("--maxtime", params.max_time, "Wall-time budget in seconds");
  app.add_option("--tolADM", params.tol_admm, "First-phase warm-start tolerance");
  app.add_option("--maxiterADM", params.max_iter_admm,
                 "First-phase iteration budget (0 = automatic)");
  app.add_option("--printlevel", params.print_level, "0 silent, 1 periodic, 2 every iteration");
  app.add_option("--stopoption", params.stop_option, "1 enables the stagnation exit, 0 disables");
  app.add_option("--aat-method", aat_method,
                 "Normal-equation solve: direct (Cholesky) or iterative (PCG)")
      ->check(CLI::IsMember({"direct", "iterative"}));
  app.add_flag("--phase1-only", phase1_only, "Run the first-phase method alone");
  app.add_option("--output", output, "Write a JSON result report to this path");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 1;
  }

  if (aat_method == "direct") params.m_method = MSolveMethod::direct;
  if (aat_method == "iterative") params.m_method = MSolveMethod::iterative;

  ProblemData d;
  try {
    if (!input.empty() && !gen_spec.empty())
      throw std::runtime_error("--input and --gen are mutually exclusive");
    if (input.empty() && gen_spec.empty())
      throw std::runtime_error("nothing to solve: pass --input PATH or --gen NAME:ARGS");
    if (!gen_spec.empty()) {
      d = generate(gen_spec);
    } else {
      std::string fmt = format;
      if (fmt.empty()) fmt = lower_ext(input) == "json" ? "json" : "sdpa";
      if (fmt == "json") {
        d = read_json(input);
      } else {
        d = read_sdpa(input, sdpa_sign == "max" ? SdpaSign::maximize_reported
                                                : SdpaSign::minimize_converted);
      }
    }
    const std::vector<std::string> findings = validate(d);
    if (!findings.empty()) {
      std::cerr << "error: the problem data is inconsistent:\n";
      for (const std::string& f : findings) std::cerr << "  - " << f << "\n";
      return 1;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }

  if (tol_opt->count() == 0 && d.recommended_tol > 0.0 && d.recommended_tol > params.tol) {
    params.tol = d.recommended_tol;
    if (params.print_level > 0)
      std::printf("using the instance's recommended tolerance %.1e (override with --tol)\n",
                  params.tol);
  }

  SolveResult result;
  if (phase1_only) {
    PhaseResult pr = run_phase1(d, params);
    result.state = pr.state;
    result.res = pr.res;
    result.reason = pr.reason;
    result.iterations_phase1 = pr.iterations;
    result.seconds = pr.seconds;
    result.history = pr.history;
  } else {
    result = solve(d, params);
  }

  print_summary(d, result, phase1_only);

  if (!output.empty()) {
    try {
      write_result_json(output, result, d);
      if (params.print_level > 0) std::printf("result written to %s\n", output.c_str());
    } catch (const std::exception& e) {
      std::cerr << "error: " << e.what() << "\n";
      return 1;
    }
  }

  return result.reason == StopReason::converged ? 0 : 2;
}
