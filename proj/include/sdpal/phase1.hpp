#pragma once

#include "sdpal/normal_system.hpp"
#include "sdpal/residuals.hpp"
#include "sdpal/scaling.hpp"

namespace sdpal {

// ---- Step kernels, exposed for direct testing ----

// Proximal refresh of a box dual.  A is the dual residual with the previous
// dual removed; the result is argmin over Z of
//   support(-Z | box) + sigma/2 * |A + Z|^2,
// computed through the box projection of sigma * A.
Mat box_dual_from_residual(const BlockBounds& bb, const Mat& A, double sigma);
Vec row_dual_from_residual(const Vec& A, const Vec& lo, const Vec& hi, double sigma);

// First step of one sweep: refresh Z (blockwise) and v from the current state.
void update_box_duals(const ProblemData& d, const IterateState& st, double sigma,
                      BlockVars& Z_new, Vec& v_new);

// Cone-dual refresh: blockwise projection of S_old - R1 onto the cone.
BlockVars cone_dual_update(const BlockStructure& blk, const BlockVars& S_old,
                           const BlockVars& R1_new);

// Middle steps of one sweep: solve the joint normal system for (y, ybar) with
// S frozen, refresh S by projection, then keep the multipliers or re-solve
// against the refreshed right-hand side when it moved too much.
struct SweepResult {
  Vec y, ybar;
  BlockVars S;
  bool resolved = false;    // a second normal solve was needed
  double lin_residual = 0;  // final ||rhs - M [y; ybar]||
  int cg_iterations = 0;
};
SweepResult sgs_sweep(const ProblemData& d, const NormalSystem& nsys, const IterateState& st,
                      const BlockVars& Z_new, const Vec& v_new, double sigma, double eps_k);

// Final step of one sweep: multiplier ascent along the dual residuals,
//   X += tau*sigma*(A*y + B*ybar + S + Z - C),   s += tau*sigma*(v - ybar).
void update_primal_multipliers(const ProblemData& d, double tau, double sigma, const Vec& y,
                               const Vec& ybar, const BlockVars& S, const BlockVars& Z,
                               const Vec& v, IterateState& st);

// ---- Shared loop machinery ----

// Summable per-iteration inexactness budget, k >= 1.  On top of the k^-1.5
// decay the budget tracks the latest overall residual, so inner solves
// tighten together with the outer progress instead of flooring it.
double eps_schedule(int k, double b_norm, double eta_prev);

// Penalty rebalancing: multiply or divide sigma by 1.25 once the ratio
// eta_primal/eta_dual has stayed outside [0.2, 5] for ten consecutive
// accepted iterations.  Adaptation pauses while neither of the two map
// residuals is the binding part of the overall residual: their ratio is then
// numerical noise and chasing it can run the penalty away.
class SigmaAdapter {
 public:
  double update(double sigma, double eta_primal, double eta_dual, double eta_total);

 private:
  int high_ = 0, low_ = 0;
};

double initial_sigma(const SolverParams& params, const ProblemData& work);

struct PhaseResult {
  IterateState state;  // original units
  Residuals res;
  StopReason reason = StopReason::in_progress;
  int iterations = 0;
  double seconds = 0;
  std::vector<RunRecord> history;
};

// First-phase solver.  init, when given, is in original units.  The
// three-argument form stops at params.tol/max_iter/max_time; the StopRule
// overload lets the two-phase driver run it as a warm start.
PhaseResult run_phase1(const ProblemData& d, const SolverParams& params,
                       const IterateState* init = nullptr);
PhaseResult run_phase1(const ProblemData& d, const SolverParams& params,
                       const IterateState* init, const StopRule& rule);

namespace detail {

// Scaled working copy plus the per-iteration bookkeeping both phases share.
struct LoopFrame {
  Scaling scal;
  ProblemData work;
  double sigma = 1.0;
  double b_norm = 0.0;
  // Best residual seen so far.  The inner-solve budget keys off this rather
  // than the latest value: a transiently worse iterate must tighten nothing,
  // or the loop would loosen its own subproblems while drifting away.
  double best_eta = 1.0;
  std::vector<double> etas;
  std::vector<RunRecord> history;

  LoopFrame(const ProblemData& d, const SolverParams& params);
  // Unscales, measures against the original data, appends to the history.
  Residuals record(const ProblemData& orig, const IterateState& work_state, int phase, int iter,
                   double elapsed, int print_level, int newton_steps = 0, int cg_iters = 0);
};

void print_record(const RunRecord& r, int print_level);
StopRule stop_rule_from(const SolverParams& params);

}  // namespace detail

}  // namespace sdpal
