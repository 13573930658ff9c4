#pragma once

#include <vector>

#include "sdpal/model.hpp"
#include "sdpal/params.hpp"

namespace sdpal {

// Primal/dual iterate of the augmented-Lagrangian method.  X and s are the
// primal variable and row-constraint slack; (Z, v, S, y, ybar) are the duals
// attached to the box, the row box, the cone, and the two constraint maps.
// For problems without row constraints, s/ybar/v are empty; for blocks
// without a box, the matching Z block is identically zero.
struct IterateState {
  BlockVars X, S, Z;
  Vec s, y, ybar, v;

  static IterateState zeros(const ProblemData& d);
};

// Relative KKT residuals, objective values and duality gap, all measured on
// the data passed in (callers unscale first when iterating on scaled data).
struct Residuals {
  double eta_primal = 0;  // constraint maps
  double eta_dual = 0;    // dual constraint and ybar == v
  double eta_cone = 0;    // cone complementarity, damped by 1/5
  double eta_box = 0;     // box complementarity, damped by 1/5
  double eta = 0;         // max of the four
  double pobj = 0;
  double dobj = 0;        // -inf when a box dual leaves the support's domain
  double rel_gap = 0;     // |pobj-dobj|/(1+|pobj|+|dobj|); 1 when dobj = -inf
  bool dual_infinite = false;
};

// sup over { lo <= W <= hi } of <g, W>; the 0 * inf convention is 0, and a
// nonzero coefficient against an infinite side yields +inf.
double support_box(const Mat& g, const Mat& lo, const Mat& hi);
double support_box(const Vec& g, const Vec& lo, const Vec& hi);

Residuals compute_residuals(const ProblemData& d, const IterateState& st);

// Termination policy shared by both phases.
struct StopRule {
  double tol = 1e-6;
  int max_iter = 20000;
  double max_time = 10000;
  int stop_option = 1;
  // Stagnation window: exit when the best residual seen improved by less than
  // 5% over the last 300 accepted iterations.  The window is deliberately wide:
  // the alternating method routinely crawls through flat stretches of a
  // hundred iterations or more before speeding up again.
  int window = 300;
  double min_improvement = 0.05;
};

StopReason should_stop(const StopRule& rule, const std::vector<double>& eta_history,
                       double elapsed_seconds);

}  // namespace sdpal
