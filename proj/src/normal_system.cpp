#include "sdpal/normal_system.hpp"

#include <vector>

#include "sdpal/linalg.hpp"

namespace sdpal {

namespace {

// Gathers triplets of dst += P^T Q shifted to (row_off, col_off).
void add_product(std::vector<Eigen::Triplet<double>>& trips, const SpMat& P, const SpMat& Q,
                 int row_off, int col_off) {
  if (P.nonZeros() == 0 || Q.nonZeros() == 0) return;
  const SpMat prod = SpMat(P.transpose() * Q);
  for (int k = 0; k < prod.outerSize(); ++k)
    for (SpMat::InnerIterator it(prod, k); it; ++it)
      trips.emplace_back(static_cast<int>(it.row()) + row_off,
                         static_cast<int>(it.col()) + col_off, it.value());
}

}  // namespace

NormalSystem::NormalSystem(const ProblemData& d, MSolveMethod method, double ridge,
                           int cg_max_iter)
    : d_(&d), m_(d.m()), p_(d.p()), ridge_(ridge), cg_max_iter_(cg_max_iter) {
  const int n = dim();
  std::vector<Eigen::Triplet<double>> trips;
  for (int j = 0; j < d.blk.count(); ++j) {
    add_product(trips, d.At[j], d.At[j], 0, 0);
    if (p_ > 0) {
      add_product(trips, d.At[j], d.Bt[j], 0, m_);
      add_product(trips, d.Bt[j], d.At[j], m_, 0);
      add_product(trips, d.Bt[j], d.Bt[j], m_, m_);
    }
  }
  for (int i = 0; i < p_; ++i) trips.emplace_back(m_ + i, m_ + i, 1.0);
  if (ridge_ > 0)
    for (int i = 0; i < n; ++i) trips.emplace_back(i, i, ridge_);
  M_.resize(n, n);
  M_.setFromTriplets(trips.begin(), trips.end());
  diag_ = M_.diagonal();

  direct_ = (method != MSolveMethod::iterative) && n <= 20000;
  if (direct_) {
    factor_ = std::make_unique<Eigen::SimplicialLDLT<SpMat>>(M_);
    if (factor_->info() != Eigen::Success) {
      factor_.reset();
      direct_ = false;
    } else if (method == MSolveMethod::automatic && n > 2000) {
      // Keep the factorization only while it stays reasonably sparse.
      const double cap = 0.2 * 0.5 * double(n) * double(n + 1);
      if (double(factor_->matrixL().nestedExpression().nonZeros()) > cap) {
        factor_.reset();
        direct_ = false;
      }
    }
  }
}

Vec NormalSystem::apply(const Vec& yy) const { return M_ * yy; }

NormalSystem::Solve NormalSystem::solve(const Vec& h1, const Vec& h2, double tol_abs,
                                        const Vec* warm) const {
  Vec rhs(dim());
  rhs.head(m_) = h1;
  if (p_ > 0) rhs.tail(p_) = h2;

  Solve out;
  Vec x;
  if (direct_) {
    x = factor_->solve(rhs);
    out.residual = (rhs - M_ * x).norm();
  } else {
    auto op = [this](const Vec& v) { return Vec(M_ * v); };
    const PcgResult r = pcg_solve(op, rhs, diag_, tol_abs, cg_max_iter_, warm);
    x = r.x;
    out.residual = r.residual_norm;
    out.cg_iterations = r.iterations;
  }
  out.y = x.head(m_);
  out.ybar = p_ > 0 ? Vec(x.tail(p_)) : Vec();
  return out;
}

}  // namespace sdpal
