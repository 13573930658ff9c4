#include "sdpal/phase2.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <memory>

namespace sdpal {

InnerObjective::InnerObjective(const ProblemData& d, const IterateState& st,
                               const BlockVars& Z_new, const Vec& v_new, double sigma)
    : d_(&d), st_(&st), sigma_(sigma), m_(d.m()), p_(d.p()) {
  base_ = Z_new - d.C;
  base_.axpy(1.0 / sigma, st.X);
  if (p_ > 0) q_base_ = v_new + st.s / sigma;
}

InnerObjective::Eval InnerObjective::eval(const Vec& y, const Vec& ybar) const {
  Eval e;
  e.T = adjoint_A(*d_, y);
  if (p_ > 0) e.T += adjoint_B(*d_, ybar);
  e.T += base_;

  e.proj_T = BlockVars::zeros(d_->blk);
  e.eigs.resize(d_->blk.count());
  for (int j = 0; j < d_->blk.count(); ++j) {
    if (d_->blk.blocks[j].kind == BlockKind::psd) {
      e.eigs[j] = sym_eig(e.T.blocks[j]);
      e.proj_T.blocks[j] = proj_psd(e.eigs[j]);
    } else {
      e.proj_T.blocks[j] = e.T.blocks[j].cwiseMax(0.0);
    }
  }

  e.value = -d_->b.dot(y) + 0.5 * sigma_ * e.proj_T.squared_norm();
  e.grad = Vec(m_ + p_);
  e.grad.head(m_) = sigma_ * apply_A(*d_, e.proj_T) - d_->b;
  if (p_ > 0) {
    const Vec q = q_base_ - ybar;
    e.value += 0.5 * sigma_ * q.squaredNorm();
    e.grad.tail(p_) = sigma_ * apply_B(*d_, e.proj_T) - sigma_ * q;
  }
  return e;
}

Mat positive_part_divided_differences(const Vec& lam) {
  const int n = static_cast<int>(lam.size());
  Mat W(n, n);
  auto sign3 = [](double x) { return x > 0 ? 1 : (x < 0 ? -1 : 0); };
  for (int i = 0; i < n; ++i) {
    for (int j = i; j < n; ++j) {
      const double li = lam[i], lj = lam[j];
      const int si = sign3(li), sj = sign3(lj);
      double w = 0;
      if (si > 0 && sj > 0) w = 1.0;
      else if (si > 0 && sj < 0) w = li / (li - lj);
      else if (si < 0 && sj > 0) w = lj / (lj - li);
      else if (si == 0 && sj == 0) w = 0.5;
      else if ((si > 0 && sj == 0) || (si == 0 && sj > 0)) w = 1.0;
      // negative-negative and negative-zero combinations stay 0
      W(i, j) = W(j, i) = w;
    }
  }
  return W;
}

Vec InnerObjective::hessian_apply(const Eval& e, const Vec& dir) const {
  const Vec dy = dir.head(m_);
  const Vec dybar = p_ > 0 ? Vec(dir.tail(p_)) : Vec();
  BlockVars H = adjoint_A(*d_, dy);
  if (p_ > 0) H += adjoint_B(*d_, dybar);

  for (int j = 0; j < d_->blk.count(); ++j) {
    if (d_->blk.blocks[j].kind == BlockKind::psd) {
      const EigResult& eg = e.eigs[j];
      const Mat W = positive_part_divided_differences(eg.values);
      const Mat M = eg.vectors.transpose() * H.blocks[j] * eg.vectors;
      H.blocks[j] = eg.vectors * (W.array() * M.array()).matrix() * eg.vectors.transpose();
    } else {
      for (int i = 0; i < H.blocks[j].rows(); ++i) {
        const double t = e.T.blocks[j](i, 0);
        H.blocks[j](i, 0) *= t > 0 ? 1.0 : (t == 0 ? 0.5 : 0.0);
      }
    }
  }

  Vec out(m_ + p_);
  out.head(m_) = sigma_ * apply_A(*d_, H);
  if (p_ > 0) out.tail(p_) = sigma_ * apply_B(*d_, H) + sigma_ * dybar;
  return out;
}

BlockVars InnerObjective::x_candidate(const Eval& e) const { return sigma_ * e.proj_T; }

BlockVars InnerObjective::s_eliminated(const Eval& e) const { return e.proj_T - e.T; }

NewtonStats sncg_minimize(const InnerObjective& f, Vec& y, Vec& ybar, double eps_k,
                          const SolverParams& params) {
  const int m = static_cast<int>(y.size());
  const int p = static_cast<int>(ybar.size());
  const double sqrt_sigma = std::sqrt(f.sigma());
  NewtonStats stats;

  InnerObjective::Eval e = f.eval(y, ybar);
  for (int it = 0; it < params.newton_max_iter; ++it) {
    const double gy = e.grad.head(m).norm();
    const double gybar = p > 0 ? e.grad.tail(p).norm() : 0.0;
    stats.grad_norm = std::max(gy, gybar);
    if (sqrt_sigma * stats.grad_norm <= eps_k) {
      stats.converged = true;
      return stats;
    }

    const double gnorm = e.grad.norm();
    const double forcing = std::min(0.5, std::pow(gnorm, 0.6));
    const double cg_tol = 0.1 * forcing * gnorm;
    // Gradient-proportional damping: keeps the direction bounded where the
    // generalized Hessian is singular (inactive cone) and vanishes with the
    // gradient, so the fast local convergence is untouched.
    const double damping = std::max(params.ridge, 1e-4 * std::min(1.0, gnorm));
    auto op = [&](const Vec& v) { return Vec(f.hessian_apply(e, v) + damping * v); };
    const PcgResult cg =
        pcg_solve(op, Vec(-e.grad), Vec::Ones(m + p), cg_tol, params.cg_max_iter);
    stats.cg_iterations += cg.iterations;
    Vec dir = cg.x;
    double slope = e.grad.dot(dir);
    if (!(slope < 0)) {  // degenerate direction: fall back to steepest descent
      dir = -e.grad;
      slope = -gnorm * gnorm;
    }

    double alpha = 1.0;
    bool accepted = false;
    for (int ls = 0; ls < 40; ++ls) {
      const Vec y_try = y + alpha * dir.head(m);
      const Vec ybar_try = p > 0 ? Vec(ybar + alpha * dir.tail(p)) : ybar;
      InnerObjective::Eval e_try = f.eval(y_try, ybar_try);
      if (e_try.value <= e.value + 1e-4 * alpha * slope) {
        y = y_try;
        ybar = ybar_try;
        e = std::move(e_try);
        accepted = true;
        break;
      }
      alpha *= 0.5;
    }
    ++stats.newton_steps;
    if (!accepted) return stats;  // line search exhausted; caller falls back
  }
  const double gy = e.grad.head(m).norm();
  const double gybar = p > 0 ? e.grad.tail(p).norm() : 0.0;
  stats.grad_norm = std::max(gy, gybar);
  stats.converged = sqrt_sigma * stats.grad_norm <= eps_k;
  return stats;
}

PhaseResult run_phase2(const ProblemData& d, const SolverParams& params,
                       const IterateState* init) {
  return run_phase2(d, params, init, detail::stop_rule_from(params));
}

PhaseResult run_phase2(const ProblemData& d, const SolverParams& params, const IterateState* init,
                       const StopRule& rule) {
  const auto t0 = std::chrono::steady_clock::now();
  auto elapsed = [&t0] {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  };

  detail::LoopFrame frame(d, params);
  std::unique_ptr<NormalSystem> nsys;  // built only if a fallback sweep is needed
  IterateState st = init ? scale_state(frame.scal, *init) : IterateState::zeros(frame.work);
  frame.sigma = initial_sigma(params, frame.work);
  SigmaAdapter adapter;

  // A plateau in the outer residual means the subproblems are being solved
  // too loosely for the outer step to contract (the leftover inner error
  // keeps feeding a limit cycle of the same size).  Each time the best
  // residual goes twenty iterations without improving, halve the inner
  // tolerance until progress resumes.
  double inner_scale = 1.0;
  double plateau_ref = frame.best_eta;
  int plateau_iter = 0;

  Residuals res = frame.record(d, st, 2, 0, 0.0, params.print_level);
  StopReason reason;
  int k = 0;
  while ((reason = should_stop(rule, frame.etas, elapsed())) == StopReason::in_progress) {
    ++k;
    const double eps_k = inner_scale * eps_schedule(k, frame.b_norm, frame.best_eta);
    BlockVars Z_new;
    Vec v_new;
    update_box_duals(frame.work, st, frame.sigma, Z_new, v_new);

    const InnerObjective f(frame.work, st, Z_new, v_new, frame.sigma);
    Vec y = st.y, ybar = st.ybar;
    const NewtonStats stats = sncg_minimize(f, y, ybar, eps_k, params);

    BlockVars S_new;
    int cg_iters = stats.cg_iterations;
    if (stats.converged) {
      const InnerObjective::Eval e = f.eval(y, ybar);
      S_new = f.s_eliminated(e);
    } else {
      // Newton could not reach the inner tolerance: take one first-phase
      // sweep instead, which is always well defined.
      if (!nsys)
        nsys = std::make_unique<NormalSystem>(frame.work, params.m_method, params.ridge,
                                              params.cg_max_iter);
      const SweepResult sw = sgs_sweep(frame.work, *nsys, st, Z_new, v_new, frame.sigma, eps_k);
      y = sw.y;
      ybar = sw.ybar;
      S_new = sw.S;
      cg_iters += sw.cg_iterations;
    }

    update_primal_multipliers(frame.work, params.tau, frame.sigma, y, ybar, S_new, Z_new, v_new,
                              st);
    st.Z = Z_new;
    st.v = v_new;
    st.S = S_new;
    st.y = y;
    st.ybar = ybar;
    res = frame.record(d, st, 2, k, elapsed(), params.print_level, stats.newton_steps, cg_iters);
    if (params.adapt_sigma) frame.sigma = adapter.update(frame.sigma, res.eta_primal, res.eta_dual, res.eta);
    if (frame.best_eta <= 0.98 * plateau_ref) {
      plateau_ref = frame.best_eta;
      plateau_iter = k;
    } else if (k - plateau_iter >= 20) {
      inner_scale = std::max(0.5 * inner_scale, 1e-4);
      plateau_ref = frame.best_eta;
      plateau_iter = k;
    }
  }

  PhaseResult out;
  out.state = unscale_state(frame.scal, st);
  out.res = res;
  out.reason = reason;
  out.iterations = k;
  out.seconds = elapsed();
  out.history = std::move(frame.history);
  if (params.print_level >= 1)
    std::printf("  phase 2: %s after %d iterations, eta %.3e, t %.2fs\n", to_string(reason), k,
                res.eta, out.seconds);
  return out;
}

SolveResult solve(const ProblemData& d, const SolverParams& params) {
  const auto t0 = std::chrono::steady_clock::now();
  auto elapsed = [&t0] {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  };

  StopRule warm_rule = detail::stop_rule_from(params);
  warm_rule.tol = std::max(params.tol, params.tol_admm);
  warm_rule.max_iter = params.effective_max_iter_admm(d.has_rows_B() || d.any_bounds());
  const PhaseResult warm = run_phase1(d, params, nullptr, warm_rule);

  SolveResult out;
  out.iterations_phase1 = warm.iterations;
  out.history = warm.history;

  if (warm.res.eta <= params.tol || warm.reason == StopReason::max_time) {
    out.state = warm.state;
    out.res = warm.res;
    out.reason = warm.res.eta <= params.tol ? StopReason::converged : warm.reason;
    out.seconds = elapsed();
    return out;
  }

  SolverParams prm2 = params;
  prm2.max_time = params.max_time - elapsed();
  if (!warm.history.empty()) prm2.sigma0 = warm.history.back().sigma;
  const PhaseResult second = run_phase2(d, prm2, &warm.state);

  out.state = second.state;
  out.res = second.res;
  out.reason = second.reason;
  out.iterations_phase2 = second.iterations;
  out.history.insert(out.history.end(), second.history.begin(), second.history.end());
  out.seconds = elapsed();
  return out;
}

}  // namespace sdpal
