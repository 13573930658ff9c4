#include "sdpal/scaling.hpp"

#include <cmath>

namespace sdpal {

namespace {

Vec stacked_column_norms(const std::vector<SpMat>& Mt, int cols) {
  Vec sq = Vec::Zero(cols);
  for (const SpMat& M : Mt)
    for (int k = 0; k < M.outerSize(); ++k)
      for (SpMat::InnerIterator it(M, k); it; ++it) sq[k] += it.value() * it.value();
  return sq.cwiseSqrt();
}

void scale_columns(std::vector<SpMat>& Mt, const Vec& factors) {
  for (SpMat& M : Mt)
    for (int k = 0; k < M.outerSize(); ++k)
      for (SpMat::InnerIterator it(M, k); it; ++it) it.valueRef() *= factors[k];
}

}  // namespace

Scaling make_scaling(const ProblemData& d, bool enable) {
  Scaling s;
  s.enabled = enable;
  s.row_a = Vec::Ones(d.m());
  s.row_b = Vec::Ones(d.p());
  if (!enable) return s;

  const Vec na = stacked_column_norms(d.At, d.m());
  for (int k = 0; k < d.m(); ++k) s.row_a[k] = na[k] > 1e-12 ? 1.0 / na[k] : 1.0;
  const Vec nb = stacked_column_norms(d.Bt, d.p());
  for (int k = 0; k < d.p(); ++k) s.row_b[k] = nb[k] > 1e-12 ? 1.0 / nb[k] : 1.0;

  s.b_scale = std::max(1.0, (s.row_a.cwiseProduct(d.b)).norm());
  s.c_scale = std::max(1.0, d.C.norm());
  return s;
}

ProblemData apply_scaling(const ProblemData& d, const Scaling& s) {
  ProblemData out = d;
  if (!s.enabled) return out;
  scale_columns(out.At, s.row_a);
  scale_columns(out.Bt, s.row_b);
  out.b = s.row_a.cwiseProduct(d.b) / s.b_scale;
  out.C *= 1.0 / s.c_scale;
  out.l = s.row_b.cwiseProduct(d.l) / s.b_scale;
  out.u = s.row_b.cwiseProduct(d.u) / s.b_scale;
  for (BlockBounds& bb : out.bounds) {
    if (!bb.present) continue;
    bb.lower /= s.b_scale;
    bb.upper /= s.b_scale;
  }
  return out;
}

IterateState unscale_state(const Scaling& s, const IterateState& st) {
  if (!s.enabled) return st;
  IterateState out = st;
  out.X *= s.b_scale;
  out.S *= s.c_scale;
  out.Z *= s.c_scale;
  for (int i = 0; i < out.s.size(); ++i) out.s[i] = s.b_scale * st.s[i] / s.row_b[i];
  for (int i = 0; i < out.y.size(); ++i) out.y[i] = s.c_scale * s.row_a[i] * st.y[i];
  for (int i = 0; i < out.ybar.size(); ++i) out.ybar[i] = s.c_scale * s.row_b[i] * st.ybar[i];
  for (int i = 0; i < out.v.size(); ++i) out.v[i] = s.c_scale * s.row_b[i] * st.v[i];
  return out;
}

IterateState scale_state(const Scaling& s, const IterateState& st) {
  if (!s.enabled) return st;
  IterateState out = st;
  out.X *= 1.0 / s.b_scale;
  out.S *= 1.0 / s.c_scale;
  out.Z *= 1.0 / s.c_scale;
  for (int i = 0; i < out.s.size(); ++i) out.s[i] = s.row_b[i] * st.s[i] / s.b_scale;
  for (int i = 0; i < out.y.size(); ++i) out.y[i] = st.y[i] / (s.c_scale * s.row_a[i]);
  for (int i = 0; i < out.ybar.size(); ++i) out.ybar[i] = st.ybar[i] / (s.c_scale * s.row_b[i]);
  for (int i = 0; i < out.v.size(); ++i) out.v[i] = st.v[i] / (s.c_scale * s.row_b[i]);
  return out;
}

}  // namespace sdpal
