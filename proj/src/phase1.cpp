#include "sdpal/phase1.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>

namespace sdpal {

Mat box_dual_from_residual(const BlockBounds& bb, const Mat& A, double sigma) {
  if (!bb.present) return Mat::Zero(A.rows(), A.cols());
  const Mat W = proj_box(Mat(sigma * A), bb.lower, bb.upper);
  return W / sigma - A;
}

Vec row_dual_from_residual(const Vec& A, const Vec& lo, const Vec& hi, double sigma) {
  const Vec W = proj_box(Vec(sigma * A), lo, hi);
  return W / sigma - A;
}

void update_box_duals(const ProblemData& d, const IterateState& st, double sigma,
                      BlockVars& Z_new, Vec& v_new) {
  // Dual residual with Z removed: A*y + B*ybar + S - C + X/sigma.
  BlockVars A = adjoint_A(d, st.y);
  if (d.has_rows_B()) A += adjoint_B(d, st.ybar);
  A += st.S;
  A -= d.C;
  A.axpy(1.0 / sigma, st.X);
  Z_new = BlockVars::zeros(d.blk);
  for (int j = 0; j < d.blk.count(); ++j) {
    if (!d.block_bounded(j)) continue;
    Z_new.blocks[j] = box_dual_from_residual(d.bounds[j], A.blocks[j], sigma);
  }
  if (d.has_rows_B()) {
    const Vec A2 = -st.ybar + st.s / sigma;
    v_new = row_dual_from_residual(A2, d.l, d.u, sigma);
  } else {
    v_new = Vec();
  }
}

BlockVars cone_dual_update(const BlockStructure& blk, const BlockVars& S_old,
                           const BlockVars& R1_new) {
  BlockVars S = BlockVars::zeros(blk);
  for (int j = 0; j < blk.count(); ++j) {
    const Mat D = S_old.blocks[j] - R1_new.blocks[j];
    if (blk.blocks[j].kind == BlockKind::psd) S.blocks[j] = proj_psd(D);
    else S.blocks[j] = D.cwiseMax(0.0);
  }
  return S;
}

SweepResult sgs_sweep(const ProblemData& d, const NormalSystem& nsys, const IterateState& st,
                      const BlockVars& Z_new, const Vec& v_new, double sigma, double eps_k) {
  const bool rows = d.has_rows_B();
  const double sqrt_sigma = std::sqrt(sigma);
  const double lin_tol = eps_k / sqrt_sigma;

  // Right-hand side built around the S- and y-free part of the dual residual.
  BlockVars G = st.S + Z_new - d.C;
  G.axpy(1.0 / sigma, st.X);
  Vec h1 = d.b / sigma - apply_A(d, G);
  Vec h2;
  if (rows) h2 = v_new + st.s / sigma - apply_B(d, G);

  Vec warm(nsys.dim());
  warm.head(d.m()) = st.y;
  if (rows) warm.tail(d.p()) = st.ybar;

  SweepResult out;
  NormalSystem::Solve first = nsys.solve(h1, h2, lin_tol, &warm);
  out.cg_iterations = first.cg_iterations;

  // Cone-dual refresh at the tentative multipliers.
  BlockVars R1 = adjoint_A(d, first.y);
  if (rows) R1 += adjoint_B(d, first.ybar);
  R1 += G;
  out.S = cone_dual_update(d.blk, st.S, R1);

  // If the refreshed S barely moves the right-hand side, keep the tentative
  // multipliers; otherwise solve once more against the updated system.
  const BlockVars dS = out.S - st.S;
  const Vec h1_new = h1 - apply_A(d, dS);
  Vec h2_new;
  if (rows) h2_new = h2 - apply_B(d, dS);
  Vec rhs_new(nsys.dim());
  rhs_new.head(d.m()) = h1_new;
  if (rows) rhs_new.tail(d.p()) = h2_new;
  Vec sol(nsys.dim());
  sol.head(d.m()) = first.y;
  if (rows) sol.tail(d.p()) = first.ybar;
  const double check = (rhs_new - nsys.apply(sol)).norm();
  if (sqrt_sigma * check <= 10.0 * eps_k) {
    out.y = first.y;
    out.ybar = first.ybar;
    out.lin_residual = check;
  } else {
    NormalSystem::Solve second = nsys.solve(h1_new, h2_new, lin_tol, &sol);
    out.y = second.y;
    out.ybar = second.ybar;
    out.lin_residual = second.residual;
    out.cg_iterations += second.cg_iterations;
    out.resolved = true;
  }
  return out;
}

void update_primal_multipliers(const ProblemData& d, double tau, double sigma, const Vec& y,
                               const Vec& ybar, const BlockVars& S, const BlockVars& Z,
                               const Vec& v, IterateState& st) {
  BlockVars Rd = adjoint_A(d, y);
  if (d.has_rows_B()) Rd += adjoint_B(d, ybar);
  Rd += S;
  Rd += Z;
  Rd -= d.C;
  st.X.axpy(tau * sigma, Rd);
  if (d.has_rows_B()) st.s += tau * sigma * (v - ybar);
}

double eps_schedule(int k, double b_norm, double eta_prev) {
  const double base = std::min({1e-2, 1.0 / std::pow(double(k), 1.5), 0.2 * eta_prev});
  return base * std::max(1.0, b_norm);
}

double SigmaAdapter::update(double sigma, double eta_primal, double eta_dual,
                            double eta_total) {
  if (std::max(eta_primal, eta_dual) < 0.5 * eta_total) {
    high_ = low_ = 0;
    return sigma;
  }
  const double ratio = eta_primal / std::max(eta_dual, 1e-300);
  if (ratio > 5.0) ++high_; else high_ = 0;
  if (ratio < 0.2) ++low_; else low_ = 0;
  if (high_ >= 10) {
    sigma /= 1.25;
    high_ = 0;
  }
  if (low_ >= 10) {
    sigma *= 1.25;
    low_ = 0;
  }
  return std::clamp(sigma, 1e-6, 1e8);
}

double initial_sigma(const SolverParams& params, const ProblemData& work) {
  if (params.sigma0 > 0) return params.sigma0;
  const double ratio = std::max(1e-8, work.b.norm()) / std::max(1e-8, work.C.norm());
  return std::clamp(ratio, 1e-4, 1e4);
}

namespace detail {

LoopFrame::LoopFrame(const ProblemData& d, const SolverParams& params) {
  scal = make_scaling(d, params.scale_data);
  work = apply_scaling(d, scal);
  b_norm = work.b.norm();
}

Residuals LoopFrame::record(const ProblemData& orig, const IterateState& work_state, int phase,
                            int iter, double elapsed, int print_level, int newton_steps,
                            int cg_iters) {
  const IterateState st = unscale_state(scal, work_state);
  const Residuals r = compute_residuals(orig, st);
  RunRecord rec;
  rec.phase = phase;
  rec.iter = iter;
  rec.pobj = r.pobj;
  rec.dobj = r.dobj;
  rec.rel_gap = r.rel_gap;
  rec.eta_primal = r.eta_primal;
  rec.eta_dual = r.eta_dual;
  rec.eta_cone = r.eta_cone;
  rec.eta_box = r.eta_box;
  rec.eta = r.eta;
  rec.sigma = sigma;
  rec.time = elapsed;
  rec.newton_steps = newton_steps;
  rec.cg_iters = cg_iters;
  history.push_back(rec);
  etas.push_back(r.eta);
  best_eta = std::min(best_eta, r.eta);
  print_record(rec, print_level);
  return r;
}

void print_record(const RunRecord& r, int print_level) {
  if (print_level <= 0) return;
  const int stride = r.phase == 1 ? 100 : 5;
  if (print_level == 1 && r.iter % stride != 0) return;
  std::printf(
      "  ph%d it %5d  pobj % .8e  dobj % .8e  gap %.2e  etaP %.2e  etaD %.2e  etaK %.2e  "
      "etaB %.2e  eta %.2e  sigma %.2e  t %.2fs\n",
      r.phase, r.iter, r.pobj, r.dobj, r.rel_gap, r.eta_primal, r.eta_dual, r.eta_cone, r.eta_box,
      r.eta, r.sigma, r.time);
}

StopRule stop_rule_from(const SolverParams& params) {
  StopRule rule;
  rule.tol = params.tol;
  rule.max_iter = params.max_iter;
  rule.max_time = params.max_time;
  rule.stop_option = params.stop_option;
  return rule;
}

}  // namespace detail

PhaseResult run_phase1(const ProblemData& d, const SolverParams& params,
                       const IterateState* init) {
  return run_phase1(d, params, init, detail::stop_rule_from(params));
}

PhaseResult run_phase1(const ProblemData& d, const SolverParams& params, const IterateState* init,
                       const StopRule& rule) {
  const auto t0 = std::chrono::steady_clock::now();
  auto elapsed = [&t0] {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  };

  detail::LoopFrame frame(d, params);
  NormalSystem nsys(frame.work, params.m_method, params.ridge, params.cg_max_iter);
  IterateState st = init ? scale_state(frame.scal, *init) : IterateState::zeros(frame.work);
  frame.sigma = initial_sigma(params, frame.work);
  SigmaAdapter adapter;

  Residuals res = frame.record(d, st, 1, 0, 0.0, params.print_level);
  StopReason reason;
  int k = 0;
  while ((reason = should_stop(rule, frame.etas, elapsed())) == StopReason::in_progress) {
    ++k;
    const double eps_k = eps_schedule(k, frame.b_norm, frame.best_eta);
    BlockVars Z_new;
    Vec v_new;
    update_box_duals(frame.work, st, frame.sigma, Z_new, v_new);
    const SweepResult sw =
        sgs_sweep(frame.work, nsys, st, Z_new, v_new, frame.sigma, eps_k);
    update_primal_multipliers(frame.work, params.tau, frame.sigma, sw.y, sw.ybar, sw.S, Z_new,
                              v_new, st);
    st.Z = Z_new;
    st.v = v_new;
    st.S = sw.S;
    st.y = sw.y;
    st.ybar = sw.ybar;
    res = frame.record(d, st, 1, k, elapsed(), params.print_level, 0, sw.cg_iterations);
    if (params.adapt_sigma) frame.sigma = adapter.update(frame.sigma, res.eta_primal, res.eta_dual, res.eta);
  }

  PhaseResult out;
  out.state = unscale_state(frame.scal, st);
  out.res = res;
  out.reason = reason;
  out.iterations = k;
  out.seconds = elapsed();
  out.history = std::move(frame.history);
  if (params.print_level >= 1)
    std::printf("  phase 1: %s after %d iterations, eta %.3e, t %.2fs\n", to_string(reason), k,
                res.eta, out.seconds);
  return out;
}

}  // namespace sdpal
