#include "sdpal/modeling.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <stdexcept>
#include <utility>

namespace sdpal {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
const double kSqrt2 = std::sqrt(2.0);

// Packed upper-triangle slots are shared by sdp and symm variables.
bool packed_var(VarKind k) { return k == VarKind::sdp || k == VarKind::symm; }

int entry_slot(VarKind kind, int rows, int i, int j) {
  if (packed_var(kind)) return svec_index(std::min(i, j), std::max(i, j));
  return i + j * rows;
}

// Inverse of the packed index: slot -> (i, j) with i <= j.
std::pair<int, int> packed_coords(int s) {
  int j = static_cast<int>((std::sqrt(8.0 * s + 1.0) - 1.0) / 2.0);
  while (j > 0 && svec_index(0, j) > s) --j;
  while (svec_index(0, j + 1) <= s) ++j;
  return {s - svec_index(0, j), j};
}

const Model* join_models(const Expr& a, const Expr& b) {
  if (a.model && b.model && a.model != b.model)
    throw std::invalid_argument("cannot combine expressions from different models");
  return a.model ? a.model : b.model;
}

Expr scalar_const(double c) {
  Expr e;
  e.rows = e.cols = 1;
  e.offset = Vec::Constant(1, c);
  return e;
}

// Replicates a 1x1 expression across an r x c output.
Expr broadcast(const Expr& e, int r, int c) {
  if (e.rows == r && e.cols == c) return e;
  if (e.size() != 1) throw std::invalid_argument("expression dimensions do not match");
  Expr out;
  out.model = e.model;
  out.rows = r;
  out.cols = c;
  out.offset = Vec::Constant(r * c, e.offset(0));
  out.terms.reserve(e.terms.size() * static_cast<size_t>(r) * c);
  for (int k = 0; k < r * c; ++k)
    for (const LinTerm& t : e.terms) out.terms.push_back({k, t.var, t.slot, t.coeff});
  return out;
}

void check_nonempty(const Expr& e) {
  if (e.empty()) throw std::invalid_argument("empty expression");
}

Vec flatten(const Mat& M) { return Eigen::Map<const Vec>(M.data(), M.size()); }

Vec bound_vec(double c, int n) { return Vec::Constant(n, c); }

Vec bound_vec(const Mat& M, const Expr& e) {
  if (M.rows() != e.rows || M.cols() != e.cols)
    throw std::invalid_argument("comparison bound dimensions do not match the expression");
  return flatten(M);
}

Expr to_expr_const(const Mat& M) {
  Expr e;
  e.rows = static_cast<int>(M.rows());
  e.cols = static_cast<int>(M.cols());
  e.offset = flatten(M);
  return e;
}

void reject_chained_constants(const Expr& mid) {
  for (int k = 0; k < mid.offset.size(); ++k)
    if (mid.offset(k) != 0.0)
      throw std::invalid_argument(
          "the middle of a chained comparison must not contain constant terms");
}

[[noreturn]] void strict_comparison() {
  throw std::invalid_argument("strict inequalities are not supported; use <=, >= or ==");
}

// Per-output coefficient maps keyed by (variable, slot), zeros dropped.
using CoeffMap = std::map<std::pair<int, int>, double>;

std::vector<CoeffMap> bucket_terms(const Expr& e) {
  std::vector<CoeffMap> out(static_cast<size_t>(e.size()));
  for (const LinTerm& t : e.terms) out[static_cast<size_t>(t.out)][{t.var, t.slot}] += t.coeff;
  for (CoeffMap& m : out)
    for (auto it = m.begin(); it != m.end();)
      it = (it->second == 0.0) ? m.erase(it) : std::next(it);
  return out;
}

bool structurally_symmetric(const Expr& e, const std::vector<CoeffMap>& bkt) {
  if (e.rows != e.cols) return false;
  const int n = e.rows;
  for (int j = 0; j < n; ++j)
    for (int i = 0; i < j; ++i) {
      if (e.offset(i + j * n) != e.offset(j + i * n)) return false;
      if (bkt[static_cast<size_t>(i + j * n)] != bkt[static_cast<size_t>(j + i * n)])
        return false;
    }
  return true;
}

}  // namespace

// ---- expression arithmetic -------------------------------------------------

Expr operator+(const Expr& a, const Expr& b) {
  check_nonempty(a);
  check_nonempty(b);
  const Model* model = join_models(a, b);
  int r = a.rows, c = a.cols;
  if (a.size() == 1 && b.size() != 1) r = b.rows, c = b.cols;
  const Expr ax = broadcast(a, r, c);
  const Expr bx = broadcast(b, r, c);
  Expr out = ax;
  out.model = model;
  out.terms.insert(out.terms.end(), bx.terms.begin(), bx.terms.end());
  out.offset += bx.offset;
  return out;
}

Expr operator*(double a, const Expr& e) {
  check_nonempty(e);
  Expr out = e;
  for (LinTerm& t : out.terms) t.coeff *= a;
  out.offset *= a;
  return out;
}

Expr operator*(const Expr& e, double a) { return a * e; }
Expr operator-(const Expr& a) { return -1.0 * a; }
Expr operator-(const Expr& a, const Expr& b) { return a + (-1.0 * b); }
Expr operator+(const Expr& e, double c) { return e + scalar_const(c); }
Expr operator+(double c, const Expr& e) { return e + scalar_const(c); }
Expr operator-(const Expr& e, double c) { return e + scalar_const(-c); }
Expr operator-(double c, const Expr& e) { return (-1.0 * e) + scalar_const(c); }
Expr operator+(const Expr& e, const Mat& M) { return e + to_expr_const(M); }
Expr operator+(const Mat& M, const Expr& e) { return e + to_expr_const(M); }
Expr operator-(const Expr& e, const Mat& M) { return e + to_expr_const(Mat(-M)); }
Expr operator-(const Mat& M, const Expr& e) { return (-1.0 * e) + to_expr_const(M); }

// ---- variable references ---------------------------------------------------

namespace {
void check_bound_ref(const VarRef& v) {
  if (v.id < 0 || v.model == nullptr)
    throw std::invalid_argument("variable reference is not bound to a model");
}
}  // namespace

Expr VarRef::expr() const {
  check_bound_ref(*this);
  Expr e;
  e.model = model;
  e.rows = rows;
  e.cols = cols;
  e.offset = Vec::Zero(rows * cols);
  e.terms.reserve(static_cast<size_t>(rows) * cols);
  for (int j = 0; j < cols; ++j)
    for (int i = 0; i < rows; ++i)
      e.terms.push_back({i + j * rows, id, entry_slot(kind, rows, i, j), 1.0});
  return e;
}

Expr VarRef::operator()(int i, int j) const {
  check_bound_ref(*this);
  if (i < 0 || i >= rows || j < 0 || j >= cols)
    throw std::invalid_argument("variable index out of range");
  Expr e;
  e.model = model;
  e.rows = e.cols = 1;
  e.offset = Vec::Zero(1);
  e.terms.push_back({0, id, entry_slot(kind, rows, i, j), 1.0});
  return e;
}

Expr VarRef::operator()(int i) const {
  check_bound_ref(*this);
  if (i < 0 || i >= rows * cols) throw std::invalid_argument("variable index out of range");
  return (*this)(i % rows, i / rows);
}

Expr VarRef::operator()(const std::vector<int>& I, const std::vector<int>& J) const {
  check_bound_ref(*this);
  if (I.empty() || J.empty()) throw std::invalid_argument("empty index selection");
  for (int i : I)
    if (i < 0 || i >= rows) throw std::invalid_argument("variable index out of range");
  for (int j : J)
    if (j < 0 || j >= cols) throw std::invalid_argument("variable index out of range");
  Expr e;
  e.model = model;
  e.rows = static_cast<int>(I.size());
  e.cols = static_cast<int>(J.size());
  e.offset = Vec::Zero(e.size());
  e.terms.reserve(static_cast<size_t>(e.size()));
  for (int b = 0; b < e.cols; ++b)
    for (int a = 0; a < e.rows; ++a)
      e.terms.push_back({a + b * e.rows, id, entry_slot(kind, rows, I[a], J[b]), 1.0});
  return e;
}

// ---- shaping maps ----------------------------------------------------------

Expr trace(const Expr& e) {
  check_nonempty(e);
  if (e.rows != e.cols) throw std::invalid_argument("trace requires a square expression");
  Expr out;
  out.model = e.model;
  out.rows = out.cols = 1;
  double off = 0.0;
  for (int i = 0; i < e.rows; ++i) off += e.offset(i + i * e.rows);
  out.offset = Vec::Constant(1, off);
  for (const LinTerm& t : e.terms)
    if (t.out % e.rows == t.out / e.rows) out.terms.push_back({0, t.var, t.slot, t.coeff});
  return out;
}

Expr sum(const Expr& e) {
  check_nonempty(e);
  Expr out;
  out.model = e.model;
  out.rows = out.cols = 1;
  out.offset = Vec::Constant(1, e.offset.sum());
  out.terms.reserve(e.terms.size());
  for (const LinTerm& t : e.terms) out.terms.push_back({0, t.var, t.slot, t.coeff});
  return out;
}

Expr inprod(const Mat& A, const Expr& e) {
  check_nonempty(e);
  if (A.rows() != e.rows || A.cols() != e.cols)
    throw std::invalid_argument("inprod dimensions do not match");
  const Vec a = flatten(A);
  Expr out;
  out.model = e.model;
  out.rows = out.cols = 1;
  out.offset = Vec::Constant(1, a.dot(e.offset));
  out.terms.reserve(e.terms.size());
  for (const LinTerm& t : e.terms)
    out.terms.push_back({0, t.var, t.slot, t.coeff * a(t.out)});
  return out;
}

Expr map_diag(const Expr& e) {
  check_nonempty(e);
  if (e.rows != e.cols) throw std::invalid_argument("map_diag requires a square expression");
  const int n = e.rows;
  Expr out;
  out.model = e.model;
  out.rows = n;
  out.cols = 1;
  out.offset = Vec::Zero(n);
  for (int i = 0; i < n; ++i) out.offset(i) = e.offset(i + i * n);
  for (const LinTerm& t : e.terms)
    if (t.out % n == t.out / n) out.terms.push_back({t.out % n, t.var, t.slot, t.coeff});
  return out;
}

Expr map_svec(const Expr& e) {
  check_nonempty(e);
  if (e.rows != e.cols) throw std::invalid_argument("map_svec requires a square expression");
  const auto bkt = bucket_terms(e);
  if (!structurally_symmetric(e, bkt))
    throw std::invalid_argument("map_svec requires a symmetric-valued expression");
  const int n = e.rows;
  Expr out;
  out.model = e.model;
  out.rows = svec_len(n);
  out.cols = 1;
  out.offset = Vec::Zero(out.rows);
  for (int j = 0; j < n; ++j)
    for (int i = 0; i <= j; ++i) {
      const int k = svec_index(i, j);
      const double scale = (i == j) ? 1.0 : kSqrt2;
      out.offset(k) = scale * e.offset(i + j * n);
      for (const auto& [key, c] : bkt[static_cast<size_t>(i + j * n)])
        out.terms.push_back({k, key.first, key.second, scale * c});
    }
  return out;
}

Expr map_vec(const Expr& e) {
  check_nonempty(e);
  Expr out = e;
  out.rows = e.size();
  out.cols = 1;
  return out;
}

Expr hadamard(const Mat& A, const Expr& e) {
  check_nonempty(e);
  if (A.rows() != e.rows || A.cols() != e.cols)
    throw std::invalid_argument("elementwise product dimensions do not match");
  const Vec a = flatten(A);
  Expr out = e;
  for (LinTerm& t : out.terms) t.coeff *= a(t.out);
  out.offset = e.offset.cwiseProduct(a);
  return out;
}

Objective l1_norm(const Expr& e) {
  check_nonempty(e);
  if (e.model == nullptr)
    throw std::invalid_argument("l1_norm requires an expression with variables");
  Objective o;
  o.l1_terms.push_back(e);
  return o;
}

Objective operator+(Objective a, const Objective& b) {
  if (a.linear.empty())
    a.linear = b.linear;
  else if (!b.linear.empty())
    a.linear = a.linear + b.linear;
  a.l1_terms.insert(a.l1_terms.end(), b.l1_terms.begin(), b.l1_terms.end());
  return a;
}

Objective operator+(Objective a, double c) { return std::move(a) + Objective(scalar_const(c)); }
Objective operator+(double c, Objective a) { return std::move(a) + c; }

// ---- comparisons -----------------------------------------------------------

EqConstraint operator==(const Expr& a, const Expr& b) { return {a - b}; }
EqConstraint operator==(const Expr& a, double c) { return {a - scalar_const(c)}; }
EqConstraint operator==(double c, const Expr& a) { return {a - scalar_const(c)}; }
EqConstraint operator==(const Expr& a, const Mat& M) { return {a - M}; }
EqConstraint operator==(const Mat& M, const Expr& a) { return {a - M}; }

RangeConstraint operator<=(const Expr& a, const Expr& b) {
  Expr mid = a - b;
  const int n = mid.size();
  return {std::move(mid), bound_vec(-kInf, n), bound_vec(0.0, n), false};
}
RangeConstraint operator<=(const Expr& a, double c) {
  return {a, bound_vec(-kInf, a.size()), bound_vec(c, a.size()), false};
}
RangeConstraint operator<=(const Expr& a, const Mat& M) {
  return {a, bound_vec(-kInf, a.size()), bound_vec(M, a), false};
}
LowerBoundedExpr operator<=(double c, const Expr& a) { return {bound_vec(c, a.size()), a}; }
LowerBoundedExpr operator<=(const Mat& M, const Expr& a) { return {bound_vec(M, a), a}; }
RangeConstraint operator<=(const LowerBoundedExpr& lb, double c) {
  reject_chained_constants(lb.mid);
  return {lb.mid, lb.lo, bound_vec(c, lb.mid.size()), true};
}
RangeConstraint operator<=(const LowerBoundedExpr& lb, const Mat& M) {
  reject_chained_constants(lb.mid);
  return {lb.mid, lb.lo, bound_vec(M, lb.mid), true};
}

RangeConstraint operator>=(const Expr& a, const Expr& b) {
  Expr mid = a - b;
  const int n = mid.size();
  return {std::move(mid), bound_vec(0.0, n), bound_vec(kInf, n), false};
}
RangeConstraint operator>=(const Expr& a, double c) {
  return {a, bound_vec(c, a.size()), bound_vec(kInf, a.size()), false};
}
RangeConstraint operator>=(const Expr& a, const Mat& M) {
  return {a, bound_vec(M, a), bound_vec(kInf, a.size()), false};
}
UpperBoundedExpr operator>=(double c, const Expr& a) { return {bound_vec(c, a.size()), a}; }
UpperBoundedExpr operator>=(const Mat& M, const Expr& a) { return {bound_vec(M, a), a}; }
RangeConstraint operator>=(const UpperBoundedExpr& ub, double c) {
  reject_chained_constants(ub.mid);
  return {ub.mid, bound_vec(c, ub.mid.size()), ub.hi, true};
}
RangeConstraint operator>=(const UpperBoundedExpr& ub, const Mat& M) {
  reject_chained_constants(ub.mid);
  return {ub.mid, bound_vec(M, ub.mid), ub.hi, true};
}

EqConstraint operator<(const Expr&, const Expr&) { strict_comparison(); }
EqConstraint operator<(const Expr&, double) { strict_comparison(); }
EqConstraint operator<(double, const Expr&) { strict_comparison(); }
EqConstraint operator<(const Expr&, const Mat&) { strict_comparison(); }
EqConstraint operator<(const Mat&, const Expr&) { strict_comparison(); }
EqConstraint operator>(const Expr&, const Expr&) { strict_comparison(); }
EqConstraint operator>(const Expr&, double) { strict_comparison(); }
EqConstraint operator>(double, const Expr&) { strict_comparison(); }
EqConstraint operator>(const Expr&, const Mat&) { strict_comparison(); }
EqConstraint operator>(const Mat&, const Expr&) { strict_comparison(); }

// ---- model -----------------------------------------------------------------

Model::Model(std::string name) : name_(std::move(name)) {}

namespace {
void check_shape(int r, int c) {
  if (r < 1 || c < 1) throw std::invalid_argument("variable dimensions must be positive");
}
}  // namespace

VarRef Model::var_sdp(int n) { return var_sdp(n, n); }
VarRef Model::var_sdp(int r, int c) {
  check_shape(r, c);
  if (r != c) throw std::invalid_argument("an sdp variable must be a square matrix");
  vars_.push_back({VarKind::sdp, r, c});
  return {var_count() - 1, VarKind::sdp, r, c, this};
}
VarRef Model::var_symm(int n) { return var_symm(n, n); }
VarRef Model::var_symm(int r, int c) {
  check_shape(r, c);
  if (r != c) throw std::invalid_argument("a symm variable must be a square matrix");
  vars_.push_back({VarKind::symm, r, c});
  return {var_count() - 1, VarKind::symm, r, c, this};
}
VarRef Model::var_nn(int r, int c) {
  check_shape(r, c);
  vars_.push_back({VarKind::nonneg, r, c});
  return {var_count() - 1, VarKind::nonneg, r, c, this};
}
VarRef Model::var_free(int r, int c) {
  check_shape(r, c);
  vars_.push_back({VarKind::free_var, r, c});
  return {var_count() - 1, VarKind::free_var, r, c, this};
}

namespace {
void check_owned(const Model* self, const Expr& e, const char* what) {
  if (e.model != self)
    throw std::invalid_argument(std::string(what) + " does not reference this model's variables");
}
}  // namespace

void Model::add(const EqConstraint& con) {
  check_nonempty(con.diff);
  check_owned(this, con.diff, "equality constraint");
  eqs_.push_back(con);
}

void Model::add(const RangeConstraint& con) {
  check_nonempty(con.mid);
  check_owned(this, con.mid, "comparison constraint");
  ranges_.push_back(con);
}

void Model::add(const LowerBoundedExpr& con) {
  add(RangeConstraint{con.mid, con.lo, bound_vec(kInf, con.mid.size()), false});
}

void Model::add(const UpperBoundedExpr& con) {
  add(RangeConstraint{con.mid, bound_vec(-kInf, con.mid.size()), con.hi, false});
}

void Model::add_psd(const Expr& e) {
  check_nonempty(e);
  check_owned(this, e, "cone constraint");
  if (e.rows != e.cols)
    throw std::invalid_argument("cone constraints require a square expression");
  for (const LinTerm& t : e.terms)
    if (!packed_var(vars_.at(static_cast<size_t>(t.var)).kind))
      throw std::invalid_argument("cone constraints accept sdp and symm variables only");
  const auto bkt = bucket_terms(e);
  if (!structurally_symmetric(e, bkt))
    throw std::invalid_argument("cone constraint expression is not symmetric");
  psd_cons_.push_back(e);
}

void Model::add_psd_range(const Mat& G1, const Expr& e, const Mat& G2) {
  add_psd(e - G1);
  add_psd(G2 - e);
}

void Model::minimize(const Objective& obj) {
  if (has_objective_) throw std::invalid_argument("the model already has an objective");
  if (!obj.linear.empty()) {
    if (obj.linear.size() != 1) throw std::invalid_argument("the objective must be scalar");
    if (obj.linear.model != nullptr) check_owned(this, obj.linear, "objective");
  }
  for (const Expr& t : obj.l1_terms) {
    check_nonempty(t);
    check_owned(this, t, "objective l1 term");
  }
  objective_ = obj;
  obj_sense_ = +1;
  has_objective_ = true;
}

void Model::maximize(const Objective& obj) {
  minimize(obj);
  obj_sense_ = -1;
}

// ---- compilation -----------------------------------------------------------

namespace {

// Matches expressions of the form alpha * (one whole variable) with
// alpha > 0 and no constant part; used for cone upgrades and the
// bound-versus-row rule.
struct WholeVar {
  int var = -1;
  double alpha = 0.0;
};

WholeVar whole_var_scale(const std::vector<Model::VarDecl>& vars, const Expr& e,
                         const std::vector<CoeffMap>& bkt) {
  WholeVar none;
  for (int k = 0; k < e.offset.size(); ++k)
    if (e.offset(k) != 0.0) return none;
  if (e.size() == 0 || bkt[0].size() != 1) return none;
  const int v = bkt[0].begin()->first.first;
  const double alpha = bkt[0].begin()->second;
  if (alpha <= 0.0) return none;
  const Model::VarDecl& decl = vars.at(static_cast<size_t>(v));
  if (e.rows != decl.rows || e.cols != decl.cols) return none;
  for (int j = 0; j < e.cols; ++j)
    for (int i = 0; i < e.rows; ++i) {
      const CoeffMap& m = bkt[static_cast<size_t>(i + j * e.rows)];
      if (m.size() != 1) return none;
      const auto& [key, c] = *m.begin();
      if (key.first != v || key.second != entry_slot(decl.kind, decl.rows, i, j) || c != alpha)
        return none;
    }
  return {v, alpha};
}

}  // namespace

ProblemData Model::compile(std::vector<std::string>* warnings) const {
  if (vars_.empty()) throw std::invalid_argument("the model declares no variables");
  if (!has_objective_) throw std::invalid_argument("the model has no objective");

  const int nvars = var_count();

  // Cone constraints on a positively scaled whole symm/sdp variable upgrade
  // the variable in place (a no-op for sdp); the rest get slack blocks.
  std::vector<bool> upgraded(static_cast<size_t>(nvars), false);
  std::vector<int> slack_cons;
  std::vector<std::vector<CoeffMap>> psd_bkts(psd_cons_.size());
  for (size_t c = 0; c < psd_cons_.size(); ++c) {
    psd_bkts[c] = bucket_terms(psd_cons_[c]);
    const WholeVar w = whole_var_scale(vars_, psd_cons_[c], psd_bkts[c]);
    if (w.var >= 0)
      upgraded[static_cast<size_t>(w.var)] = true;
    else
      slack_cons.push_back(static_cast<int>(c));
  }
  auto eff_kind = [&](int v) {
    const VarKind k = vars_[static_cast<size_t>(v)].kind;
    return (k == VarKind::symm && upgraded[static_cast<size_t>(v)]) ? VarKind::sdp : k;
  };

  // Split comparisons into per-variable boxes and inequality rows.
  struct VarBox {
    bool present = false;
    Mat L, U;
  };
  std::vector<VarBox> box(static_cast<size_t>(nvars));
  std::vector<int> row_ranges;
  std::vector<bool> upper_tri_only(ranges_.size(), false);
  std::vector<std::vector<CoeffMap>> range_bkts(ranges_.size());
  for (size_t r = 0; r < ranges_.size(); ++r) {
    const RangeConstraint& con = ranges_[r];
    range_bkts[r] = bucket_terms(con.mid);
    const WholeVar w = whole_var_scale(vars_, con.mid, range_bkts[r]);
    if (w.var >= 0) {
      const VarKind k = eff_kind(w.var);
      const Model::VarDecl& decl = vars_[static_cast<size_t>(w.var)];
      if (k == VarKind::sdp || k == VarKind::nonneg) {
        VarBox& bx = box[static_cast<size_t>(w.var)];
        if (!bx.present) {
          bx.present = true;
          bx.L = Mat::Constant(decl.rows, decl.cols, -kInf);
          bx.U = Mat::Constant(decl.rows, decl.cols, kInf);
        }
        for (int j = 0; j < decl.cols; ++j)
          for (int i = 0; i < decl.rows; ++i) {
            const int out = i + j * decl.rows;
            bx.L(i, j) = std::max(bx.L(i, j), con.lo(out) / w.alpha);
            bx.U(i, j) = std::min(bx.U(i, j), con.hi(out) / w.alpha);
          }
        continue;
      }
      // A box on a symm variable constrains its packed upper triangle; the
      // mirrored rows are redundant and dropped.
      if (k == VarKind::symm) upper_tri_only[r] = true;
    }
    row_ranges.push_back(static_cast<int>(r));
  }

  // The l1 objective terms: symmetric matrix expressions are linked through
  // packed (svec) rows so that both triangles are counted; everything else
  // is linked entry by entry.
  struct L1Plan {
    bool symmetric = false;
    int count = 0;
  };
  std::vector<L1Plan> l1(objective_.l1_terms.size());
  std::vector<std::vector<CoeffMap>> l1_bkts(objective_.l1_terms.size());
  for (size_t t = 0; t < objective_.l1_terms.size(); ++t) {
    const Expr& e = objective_.l1_terms[t];
    l1_bkts[t] = bucket_terms(e);
    l1[t].symmetric = structurally_symmetric(e, l1_bkts[t]);
    l1[t].count = l1[t].symmetric ? svec_len(e.rows) : e.size();
  }

  // Block layout: variables in declaration order, then the l1 split pairs,
  // then the cone-constraint slacks.
  BlockStructure blk;
  auto add_block = [&](BlockKind kind, int size) {
    blk.blocks.push_back({kind, size});
    return blk.count() - 1;
  };
  struct BlockPair {
    int plus = -1, minus = -1;
  };
  std::vector<BlockPair> vblock(static_cast<size_t>(nvars));
  for (int v = 0; v < nvars; ++v) {
    const Model::VarDecl& decl = vars_[static_cast<size_t>(v)];
    switch (eff_kind(v)) {
      case VarKind::sdp:
        vblock[v].plus = add_block(BlockKind::psd, decl.rows);
        break;
      case VarKind::nonneg:
        vblock[v].plus = add_block(BlockKind::linear, decl.rows * decl.cols);
        break;
      case VarKind::free_var:
        vblock[v].plus = add_block(BlockKind::linear, decl.rows * decl.cols);
        vblock[v].minus = add_block(BlockKind::linear, decl.rows * decl.cols);
        break;
      case VarKind::symm:
        vblock[v].plus = add_block(BlockKind::linear, svec_len(decl.rows));
        vblock[v].minus = add_block(BlockKind::linear, svec_len(decl.rows));
        break;
    }
  }
  std::vector<BlockPair> l1block(l1.size());
  for (size_t t = 0; t < l1.size(); ++t) {
    l1block[t].plus = add_block(BlockKind::linear, l1[t].count);
    l1block[t].minus = add_block(BlockKind::linear, l1[t].count);
  }
  std::vector<int> slack_block(slack_cons.size());
  for (size_t c = 0; c < slack_cons.size(); ++c)
    slack_block[c] = add_block(BlockKind::psd, psd_cons_[slack_cons[c]].rows);

  // Row counts.
  int m = 0;
  for (const EqConstraint& eq : eqs_) m += eq.diff.size();
  for (const L1Plan& plan : l1) m += plan.count;
  for (int c : slack_cons) m += svec_len(psd_cons_[static_cast<size_t>(c)].rows);
  int p = 0;
  for (int r : row_ranges)
    p += upper_tri_only[static_cast<size_t>(r)] ? svec_len(ranges_[static_cast<size_t>(r)].mid.rows)
                                                : ranges_[static_cast<size_t>(r)].mid.size();

  ProblemData d = make_problem(blk, m, p);
  ConstraintAccumulator accA(blk, m);
  ConstraintAccumulator accB(blk, p);

  auto emit = [&](ConstraintAccumulator& acc, int row, const CoeffMap& cm, double scale) {
    for (const auto& [key, c0] : cm) {
      const int v = key.first;
      const int slot = key.second;
      const double c = c0 * scale;
      if (c == 0.0) continue;
      const BlockPair& bp = vblock[static_cast<size_t>(v)];
      switch (eff_kind(v)) {
        case VarKind::sdp: {
          const auto [i, j] = packed_coords(slot);
          acc.add_entry(row, bp.plus, i, j, i == j ? c : 0.5 * c);
          break;
        }
        case VarKind::nonneg:
          acc.add_entry(row, bp.plus, slot, slot, c);
          break;
        case VarKind::free_var:
        case VarKind::symm:
          acc.add_entry(row, bp.plus, slot, slot, c);
          acc.add_entry(row, bp.minus, slot, slot, -c);
          break;
      }
    }
  };

  // Equality rows, then l1 linking rows, then cone-constraint rows.
  int row = 0;
  for (const EqConstraint& eq : eqs_) {
    const auto bkt = bucket_terms(eq.diff);
    for (int out = 0; out < eq.diff.size(); ++out) {
      emit(accA, row, bkt[static_cast<size_t>(out)], 1.0);
      d.b(row) = -eq.diff.offset(out);
      ++row;
    }
  }
  for (size_t t = 0; t < l1.size(); ++t) {
    const Expr& e = objective_.l1_terms[t];
    if (l1[t].symmetric) {
      const int n = e.rows;
      for (int j = 0; j < n; ++j)
        for (int i = 0; i <= j; ++i) {
          const int k = svec_index(i, j);
          const double scale = (i == j) ? 1.0 : kSqrt2;
          emit(accA, row, l1_bkts[t][static_cast<size_t>(i + j * n)], scale);
          accA.add_entry(row, l1block[t].plus, k, k, -1.0);
          accA.add_entry(row, l1block[t].minus, k, k, 1.0);
          d.b(row) = -scale * e.offset(i + j * n);
          ++row;
        }
    } else {
      for (int out = 0; out < e.size(); ++out) {
        emit(accA, row, l1_bkts[t][static_cast<size_t>(out)], 1.0);
        accA.add_entry(row, l1block[t].plus, out, out, -1.0);
        accA.add_entry(row, l1block[t].minus, out, out, 1.0);
        d.b(row) = -e.offset(out);
        ++row;
      }
    }
  }
  for (size_t c = 0; c < slack_cons.size(); ++c) {
    const Expr& e = psd_cons_[static_cast<size_t>(slack_cons[c])];
    const auto& bkt = psd_bkts[static_cast<size_t>(slack_cons[c])];
    const int n = e.rows;
    for (int j = 0; j < n; ++j)
      for (int i = 0; i <= j; ++i) {
        const double scale = (i == j) ? 1.0 : kSqrt2;
        emit(accA, row, bkt[static_cast<size_t>(i + j * n)], scale);
        accA.add_entry(row, slack_block[c], i, j, i == j ? -1.0 : -0.5 * kSqrt2);
        d.b(row) = -scale * e.offset(i + j * n);
        ++row;
      }
  }

  // Inequality rows.
  int prow = 0;
  for (int r : row_ranges) {
    const RangeConstraint& con = ranges_[static_cast<size_t>(r)];
    const auto& bkt = range_bkts[static_cast<size_t>(r)];
    if (upper_tri_only[static_cast<size_t>(r)]) {
      const int n = con.mid.rows;
      for (int j = 0; j < n; ++j)
        for (int i = 0; i <= j; ++i) {
          const int out = i + j * n;
          emit(accB, prow, bkt[static_cast<size_t>(out)], 1.0);
          d.l(prow) = con.lo(out) - con.mid.offset(out);
          d.u(prow) = con.hi(out) - con.mid.offset(out);
          ++prow;
        }
    } else {
      for (int out = 0; out < con.mid.size(); ++out) {
        emit(accB, prow, bkt[static_cast<size_t>(out)], 1.0);
        d.l(prow) = con.lo(out) - con.mid.offset(out);
        d.u(prow) = con.hi(out) - con.mid.offset(out);
        ++prow;
      }
    }
  }

  // Objective coefficients and constant.
  if (!objective_.linear.empty()) {
    const auto bkt = bucket_terms(objective_.linear);
    for (const auto& [key, c] : bkt[0]) {
      const int v = key.first;
      const int slot = key.second;
      const BlockPair& bp = vblock[static_cast<size_t>(v)];
      switch (eff_kind(v)) {
        case VarKind::sdp: {
          const auto [i, j] = packed_coords(slot);
          if (i == j) {
            d.C.blocks[static_cast<size_t>(bp.plus)](i, i) += c;
          } else {
            d.C.blocks[static_cast<size_t>(bp.plus)](i, j) += 0.5 * c;
            d.C.blocks[static_cast<size_t>(bp.plus)](j, i) += 0.5 * c;
          }
          break;
        }
        case VarKind::nonneg:
          d.C.blocks[static_cast<size_t>(bp.plus)](slot, 0) += c;
          break;
        case VarKind::free_var:
        case VarKind::symm:
          d.C.blocks[static_cast<size_t>(bp.plus)](slot, 0) += c;
          d.C.blocks[static_cast<size_t>(bp.minus)](slot, 0) -= c;
          break;
      }
    }
    d.obj_constant = objective_.linear.offset(0);
  }
  for (size_t t = 0; t < l1.size(); ++t) {
    const Expr& e = objective_.l1_terms[t];
    if (l1[t].symmetric) {
      const int n = e.rows;
      for (int j = 0; j < n; ++j)
        for (int i = 0; i <= j; ++i) {
          const double w = (i == j) ? 1.0 : kSqrt2;
          d.C.blocks[static_cast<size_t>(l1block[t].plus)](svec_index(i, j), 0) += w;
          d.C.blocks[static_cast<size_t>(l1block[t].minus)](svec_index(i, j), 0) += w;
        }
    } else {
      for (int k = 0; k < l1[t].count; ++k) {
        d.C.blocks[static_cast<size_t>(l1block[t].plus)](k, 0) += 1.0;
        d.C.blocks[static_cast<size_t>(l1block[t].minus)](k, 0) += 1.0;
      }
    }
  }
  if (obj_sense_ == -1) {
    for (Mat& Cb : d.C.blocks) Cb = -Cb;
    d.obj_constant = -d.obj_constant;
    d.obj_sense = -1;
  }

  // Per-variable boxes.
  for (int v = 0; v < nvars; ++v) {
    if (!box[static_cast<size_t>(v)].present) continue;
    const VarBox& bx = box[static_cast<size_t>(v)];
    BlockBounds& bb = d.bounds[static_cast<size_t>(vblock[static_cast<size_t>(v)].plus)];
    bb.present = true;
    if (eff_kind(v) == VarKind::sdp) {
      // Both orientations of an entry bound the same symmetric value.
      bb.lower = bx.L.cwiseMax(bx.L.transpose());
      bb.upper = bx.U.cwiseMin(bx.U.transpose());
    } else {
      bb.lower = flatten(bx.L);
      bb.upper = flatten(bx.U);
    }
  }

  d.At = accA.assemble();
  if (p > 0) d.Bt = accB.assemble();
  d.name = name_;

  if (warnings) {
    std::vector<bool> constrained(static_cast<size_t>(nvars), false);
    auto mark = [&](const Expr& e) {
      for (const LinTerm& t : e.terms) constrained[static_cast<size_t>(t.var)] = true;
    };
    for (const EqConstraint& eq : eqs_) mark(eq.diff);
    for (const RangeConstraint& con : ranges_) mark(con.mid);
    for (const Expr& e : psd_cons_) mark(e);
    for (const Expr& e : objective_.l1_terms) mark(e);
    if (!objective_.linear.empty()) {
      std::vector<bool> in_obj(static_cast<size_t>(nvars), false);
      for (const LinTerm& t : objective_.linear.terms)
        in_obj[static_cast<size_t>(t.var)] = true;
      for (int v = 0; v < nvars; ++v)
        if (in_obj[static_cast<size_t>(v)] && !constrained[static_cast<size_t>(v)] &&
            vars_[static_cast<size_t>(v)].kind == VarKind::free_var)
          warnings->push_back("free variable " + std::to_string(v) +
                              " appears only in the objective; the problem is unbounded");
    }
  }

  return d;
}

}  // namespace sdpal
