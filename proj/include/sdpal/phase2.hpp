#pragma once

#include "sdpal/phase1.hpp"

namespace sdpal {

// Smooth merit function of the multiplier pair (y, ybar) once the cone dual S
// has been eliminated through the projection.  With
//   T = A*y + B*ybar + Z - C + X/sigma,      q = v - ybar + s/sigma,
// the eliminated cone dual is S = proj_cone(-T) and the value is
//   f(y, ybar) = -<b, y> + sigma/2 |proj_cone(T)|^2 + sigma/2 |q|^2
// (an additive constant is dropped).  The gradient is
//   g_y    = sigma * A(proj_cone(T)) - b,
//   g_ybar = sigma * B(proj_cone(T)) - sigma * q.
// An evaluation caches the eigendecompositions of T so that the generalized
// Hessian can be applied at the same point.
class InnerObjective {
 public:
  InnerObjective(const ProblemData& d, const IterateState& st, const BlockVars& Z_new,
                 const Vec& v_new, double sigma);

  struct Eval {
    double value = 0;
    Vec grad;            // stacked [g_y; g_ybar], length m + p
    BlockVars T;         // the affine map at (y, ybar)
    BlockVars proj_T;    // projection of T onto the cone
    std::vector<EigResult> eigs;  // per psd block, descending eigenvalues
  };
  Eval eval(const Vec& y, const Vec& ybar) const;

  // Directional derivative of the gradient: applies one element of the
  // generalized Hessian at the cached evaluation to the stacked direction
  // [dy; dybar].  The psd-block kernel scales the eigenbasis coordinates of
  // the perturbation by the projection's first divided differences.
  Vec hessian_apply(const Eval& e, const Vec& dir) const;

  // Primal candidate and eliminated cone dual at an evaluation.
  BlockVars x_candidate(const Eval& e) const;  // sigma * proj_cone(T)
  BlockVars s_eliminated(const Eval& e) const;  // proj_cone(-T) = proj_T - T

  int dim() const { return m_ + p_; }
  const ProblemData& data() const { return *d_; }
  double sigma() const { return sigma_; }

 private:
  const ProblemData* d_;
  const IterateState* st_;
  BlockVars base_;  // Z - C + X/sigma
  Vec q_base_;      // v + s/sigma
  double sigma_;
  int m_ = 0, p_ = 0;
};

// First divided differences of the positive-part map at the (descending)
// eigenvalues lam: entry (i, j) is (lam_i^+ - lam_j^+) / (lam_i - lam_j),
// with the convention 1 on ties of positive values, 0 on ties of negative
// values, and 1/2 on double zeros.
Mat positive_part_divided_differences(const Vec& lam);

struct NewtonStats {
  int newton_steps = 0;
  int cg_iterations = 0;
  bool converged = false;   // inner gradient tolerance reached
  double grad_norm = 0;     // max(|g_y|, |g_ybar|) at exit
};

// Inexact semismooth Newton with conjugate-gradient solves and an Armijo
// backtracking line search, run until
//   sqrt(sigma) * max(|g_y|, |g_ybar|) <= eps_k
// or the step/iteration budget runs out.  y/ybar are updated in place.
NewtonStats sncg_minimize(const InnerObjective& f, Vec& y, Vec& ybar, double eps_k,
                          const SolverParams& params);

// Second-phase solver: the same outer multiplier loop as the first phase, with
// the (y, ybar, S) sweep replaced by the Newton minimization.  Sweeps fall
// back to one first-phase pass whenever Newton fails to reduce the gradient.
PhaseResult run_phase2(const ProblemData& d, const SolverParams& params,
                       const IterateState* init = nullptr);
PhaseResult run_phase2(const ProblemData& d, const SolverParams& params, const IterateState* init,
                       const StopRule& rule);

struct SolveResult {
  IterateState state;
  Residuals res;
  StopReason reason = StopReason::in_progress;
  int iterations_phase1 = 0;
  int iterations_phase2 = 0;
  double seconds = 0;
  std::vector<RunRecord> history;  // both phases, in order
};

// Two-phase driver: a bounded first-phase warm start (params.tol_admm,
// params.effective_max_iter_admm) followed by the second phase.  When the
// warm start already meets params.tol, the second phase is skipped.
SolveResult solve(const ProblemData& d, const SolverParams& params);

}  // namespace sdpal
