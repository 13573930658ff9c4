#include "sdpal/linalg.hpp"

#include <cmath>
#include <stdexcept>

namespace sdpal {

namespace {
constexpr double kSqrt2 = 1.4142135623730951;
}

Vec svec(const Mat& X) {
  const int n = static_cast<int>(X.rows());
  if (X.cols() != n) throw std::invalid_argument("svec: matrix must be square");
  Vec out(svec_len(n));
  int k = 0;
  for (int j = 0; j < n; ++j) {
    for (int i = 0; i < j; ++i) out[k++] = kSqrt2 * X(i, j);
    out[k++] = X(j, j);
  }
  return out;
}

Mat smat(const Vec& x) {
  const int len = static_cast<int>(x.size());
  const int n = static_cast<int>(std::lround((std::sqrt(8.0 * len + 1.0) - 1.0) / 2.0));
  if (svec_len(n) != len) throw std::invalid_argument("smat: length is not triangular");
  Mat X(n, n);
  int k = 0;
  for (int j = 0; j < n; ++j) {
    for (int i = 0; i < j; ++i) {
      const double v = x[k++] / kSqrt2;
      X(i, j) = v;
      X(j, i) = v;
    }
    X(j, j) = x[k++];
  }
  return X;
}

EigResult sym_eig(const Mat& A) {
  Eigen::SelfAdjointEigenSolver<Mat> es(A);
  if (es.info() != Eigen::Success) throw std::runtime_error("sym_eig: eigensolver failed");
  const int n = static_cast<int>(A.rows());
  EigResult r;
  r.values = es.eigenvalues().reverse();
  r.vectors = Mat(n, n);
  for (int j = 0; j < n; ++j) r.vectors.col(j) = es.eigenvectors().col(n - 1 - j);
  return r;
}

Mat proj_psd(const EigResult& eig) {
  const Vec pos = eig.values.cwiseMax(0.0);
  return eig.vectors * pos.asDiagonal() * eig.vectors.transpose();
}

Mat proj_psd(const Mat& A) { return proj_psd(sym_eig(A)); }

Mat proj_box(const Mat& x, const Mat& lo, const Mat& hi) {
  return x.cwiseMax(lo).cwiseMin(hi);
}

Vec proj_box(const Vec& x, const Vec& lo, const Vec& hi) {
  return x.cwiseMax(lo).cwiseMin(hi);
}

Mat kron(const Mat& A, const Mat& B) {
  Mat K(A.rows() * B.rows(), A.cols() * B.cols());
  for (Eigen::Index i = 0; i < A.rows(); ++i)
    for (Eigen::Index j = 0; j < A.cols(); ++j)
      K.block(i * B.rows(), j * B.cols(), B.rows(), B.cols()) = A(i, j) * B;
  return K;
}

PcgResult pcg_solve(const std::function<Vec(const Vec&)>& apply_M, const Vec& rhs,
                    const Vec& precond_diag, double tol, int max_iter, const Vec* x0) {
  PcgResult res;
  const auto n = rhs.size();
  res.x = x0 ? *x0 : Vec::Zero(n);
  Vec r = rhs - (x0 ? apply_M(res.x) : (res.x.isZero() ? Vec(Vec::Zero(n)) : apply_M(res.x)));
  res.residual_norm = r.norm();
  if (res.residual_norm <= tol) {
    res.status = PcgStatus::converged;
    return res;
  }
  const Vec inv_diag = precond_diag.unaryExpr([](double d) { return d > 0.0 ? 1.0 / d : 1.0; });
  Vec z = inv_diag.cwiseProduct(r);
  Vec p = z;
  double rz = r.dot(z);
  for (int it = 1; it <= max_iter; ++it) {
    const Vec Mp = apply_M(p);
    const double curv = p.dot(Mp);
    if (curv <= 1e-300 * std::max(1.0, p.squaredNorm())) {
      res.iterations = it;
      res.status = PcgStatus::breakdown;
      return res;
    }
    const double alpha = rz / curv;
    res.x += alpha * p;
    r -= alpha * Mp;
    res.residual_norm = r.norm();
    res.iterations = it;
    if (res.residual_norm <= tol) {
      res.status = PcgStatus::converged;
      return res;
    }
    z = inv_diag.cwiseProduct(r);
    const double rz_new = r.dot(z);
    p = z + (rz_new / rz) * p;
    rz = rz_new;
  }
  res.status = PcgStatus::max_iterations;
  return res;
}

DenseCholesky::DenseCholesky(const Mat& M) : llt_(M) {
  ok_ = (llt_.info() == Eigen::Success);
}

Vec DenseCholesky::solve(const Vec& rhs) const {
  if (!ok_) throw std::runtime_error("DenseCholesky: factorization failed");
  return llt_.solve(rhs);
}

}  // namespace sdpal
