#pragma once

namespace sdpal {

enum class StopReason { in_progress, converged, max_iterations, max_time, stagnation };

const char* to_string(StopReason r);

enum class MSolveMethod { automatic, direct, iterative };

struct SolverParams {
  double tol = 1e-6;        // target for the aggregate KKT residual
  int max_iter = 20000;     // per phase
  double max_time = 10000;  // seconds, whole solve
  double tol_admm = 1e-4;   // warm-start phase target when running both phases
  int max_iter_admm = 0;    // 0 = auto: 200 without box/row constraints, else 2000
  int print_level = 1;      // 0 silent, 1 periodic, 2 every iteration
  int stop_option = 1;      // 1 enables the stagnation exit, 0 disables it
  double sigma0 = 0.0;      // initial penalty; 0 = heuristic from data norms
  double tau = 1.618;       // multiplier steplength, in (0, (1+sqrt(5))/2)
  bool scale_data = true;
  bool adapt_sigma = true;
  MSolveMethod m_method = MSolveMethod::automatic;
  double ridge = 1e-12;     // diagonal lift for degenerate normal systems
  int newton_max_iter = 50; // inner semismooth Newton budget per subproblem
  int cg_max_iter = 500;

  int effective_max_iter_admm(bool has_box_or_rows) const {
    if (max_iter_admm > 0) return max_iter_admm;
    return has_box_or_rows ? 2000 : 200;
  }
};

// One accepted iteration of either phase, recorded in original (unscaled) units.
struct RunRecord {
  int phase = 1;
  int iter = 0;
  double pobj = 0, dobj = 0, rel_gap = 0;
  double eta_primal = 0, eta_dual = 0, eta_cone = 0, eta_box = 0, eta = 0;
  double sigma = 0;
  double time = 0;  // seconds since the phase started
  int newton_steps = 0;
  int cg_iters = 0;
};

}  // namespace sdpal
