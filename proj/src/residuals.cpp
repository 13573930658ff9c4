#include "sdpal/residuals.hpp"

#include <cmath>
#include <limits>

namespace sdpal {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
}

const char* to_string(StopReason r) {
  switch (r) {
    case StopReason::in_progress: return "in_progress";
    case StopReason::converged: return "converged";
    case StopReason::max_iterations: return "max_iterations";
    case StopReason::max_time: return "max_time";
    case StopReason::stagnation: return "stagnation";
  }
  return "unknown";
}

IterateState IterateState::zeros(const ProblemData& d) {
  IterateState st;
  st.X = BlockVars::zeros(d.blk);
  st.S = BlockVars::zeros(d.blk);
  st.Z = BlockVars::zeros(d.blk);
  st.s = Vec::Zero(d.p());
  st.y = Vec::Zero(d.m());
  st.ybar = Vec::Zero(d.p());
  st.v = Vec::Zero(d.p());
  return st;
}

namespace {

// One term of the support function with the 0 * inf = 0 convention.
double support_term(double g, double lo, double hi) {
  double t = 0.0;
  if (g > 0.0) t = std::isinf(hi) ? kInf : g * hi;
  else if (g < 0.0) t = std::isinf(lo) ? kInf : g * lo;
  return t;
}

}  // namespace

double support_box(const Mat& g, const Mat& lo, const Mat& hi) {
  double total = 0.0;
  for (Eigen::Index idx = 0; idx < g.size(); ++idx) {
    const double t = support_term(g.data()[idx], lo.data()[idx], hi.data()[idx]);
    if (std::isinf(t)) return kInf;
    total += t;
  }
  return total;
}

double support_box(const Vec& g, const Vec& lo, const Vec& hi) {
  double total = 0.0;
  for (Eigen::Index idx = 0; idx < g.size(); ++idx) {
    const double t = support_term(g[idx], lo[idx], hi[idx]);
    if (std::isinf(t)) return kInf;
    total += t;
  }
  return total;
}

Residuals compute_residuals(const ProblemData& d, const IterateState& st) {
  Residuals r;
  const bool rows = d.has_rows_B();

  // Primal feasibility.
  const Vec Ax = apply_A(d, st.X);
  r.eta_primal = (Ax - d.b).norm() / (1.0 + d.b.norm());
  if (rows) {
    const double t = (apply_B(d, st.X) - st.s).norm() / (1.0 + st.s.norm());
    r.eta_primal = std::max(r.eta_primal, t);
  }

  // Dual feasibility.
  BlockVars RD = adjoint_A(d, st.y);
  if (rows) RD += adjoint_B(d, st.ybar);
  RD += st.S;
  RD += st.Z;
  RD -= d.C;
  r.eta_dual = RD.norm() / (1.0 + d.C.norm());
  if (rows) {
    const double t = (st.ybar - st.v).norm() / (1.0 + st.v.norm());
    r.eta_dual = std::max(r.eta_dual, t);
  }

  // Cone complementarity: distance from X to the projection of X - S.
  double cone_sq = 0.0;
  for (int j = 0; j < d.blk.count(); ++j) {
    const Block& blk = d.blk.blocks[j];
    const Mat diff = st.X.blocks[j] - st.S.blocks[j];
    Mat proj;
    if (blk.kind == BlockKind::psd) proj = proj_psd(diff);
    else proj = diff.cwiseMax(0.0);
    cone_sq += (st.X.blocks[j] - proj).squaredNorm();
  }
  r.eta_cone = 0.2 * std::sqrt(cone_sq) / (1.0 + st.X.norm() + st.S.norm());

  // Box complementarity: X against its box, s against the row box.
  double box_x = 0.0;
  if (d.any_bounds()) {
    double sq = 0.0;
    for (int j = 0; j < d.blk.count(); ++j) {
      if (!d.block_bounded(j)) continue;
      const BlockBounds& bb = d.bounds[j];
      const Mat proj = proj_box(Mat(st.X.blocks[j] - st.Z.blocks[j]), bb.lower, bb.upper);
      sq += (st.X.blocks[j] - proj).squaredNorm();
    }
    box_x = 0.2 * std::sqrt(sq) / (1.0 + st.X.norm() + st.Z.norm());
  }
  double box_s = 0.0;
  if (rows) {
    const Vec proj = proj_box(Vec(st.s - st.v), d.l, d.u);
    box_s = 0.2 * (st.s - proj).norm() / (1.0 + st.s.norm() + st.v.norm());
  }
  r.eta_box = std::max(box_x, box_s);

  r.eta = std::max(std::max(r.eta_primal, r.eta_dual), std::max(r.eta_cone, r.eta_box));

  // Objectives and gap.
  r.pobj = d.C.dot(st.X);
  double supp = 0.0;
  for (int j = 0; j < d.blk.count() && !std::isinf(supp); ++j) {
    if (!d.block_bounded(j)) continue;
    supp += support_box(Mat(-st.Z.blocks[j]), d.bounds[j].lower, d.bounds[j].upper);
  }
  if (rows && !std::isinf(supp)) supp += support_box(Vec(-st.v), d.l, d.u);
  if (std::isinf(supp)) {
    r.dobj = -kInf;
    r.dual_infinite = true;
    r.rel_gap = 1.0;
  } else {
    r.dobj = d.b.dot(st.y) - supp;
    r.rel_gap = std::abs(r.pobj - r.dobj) / (1.0 + std::abs(r.pobj) + std::abs(r.dobj));
  }
  return r;
}

StopReason should_stop(const StopRule& rule, const std::vector<double>& eta_history,
                       double elapsed_seconds) {
  if (!eta_history.empty() && eta_history.back() <= rule.tol) return StopReason::converged;
  if (elapsed_seconds >= rule.max_time) return StopReason::max_time;
  const int n = static_cast<int>(eta_history.size());
  if (n - 1 >= rule.max_iter) return StopReason::max_iterations;
  if (rule.stop_option == 1 && n > rule.window) {
    double best_old = kInf, best_now = kInf;
    for (int i = 0; i < n - rule.window; ++i) best_old = std::min(best_old, eta_history[i]);
    best_now = best_old;
    for (int i = n - rule.window; i < n; ++i) best_now = std::min(best_now, eta_history[i]);
    if (best_old < kInf && best_now > (1.0 - rule.min_improvement) * best_old)
      return StopReason::stagnation;
  }
  return StopReason::in_progress;
}

}  // namespace sdpal
