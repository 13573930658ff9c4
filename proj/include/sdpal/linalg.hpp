#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <functional>

namespace sdpal {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;
using SpMat = Eigen::SparseMatrix<double>;

// Length of the packed upper-triangle vector of an n x n symmetric matrix.
constexpr int svec_len(int n) { return n * (n + 1) / 2; }

// Position of entry (i, j), i <= j, 0-based, in column-major upper-triangle order.
constexpr int svec_index(int i, int j) { return j * (j + 1) / 2 + i; }

// Packs a symmetric matrix into a vector, scanning the upper triangle column by
// column with off-diagonal entries multiplied by sqrt(2).  The scaling makes the
// map an isometry: dot(svec(X), svec(Y)) equals the Frobenius inner product.
Vec svec(const Mat& X);

// Inverse of svec; n is recovered from the vector length.
Mat smat(const Vec& x);

// Eigendecomposition of a symmetric matrix, eigenvalues sorted in descending
// order, eigenvectors as matching columns.
struct EigResult {
  Vec values;
  Mat vectors;
};
EigResult sym_eig(const Mat& A);

// Projection onto the positive semidefinite cone: eigenvalues clipped at zero.
Mat proj_psd(const Mat& A);
Mat proj_psd(const EigResult& eig);

// Elementwise projection onto the box [lo, hi]; +/-inf entries disable a side.
Mat proj_box(const Mat& x, const Mat& lo, const Mat& hi);
Vec proj_box(const Vec& x, const Vec& lo, const Vec& hi);

// Kronecker product of dense matrices.
Mat kron(const Mat& A, const Mat& B);

// Preconditioned conjugate gradients for a symmetric positive semidefinite
// operator.  Stops when ||rhs - M x|| <= tol (absolute).  A division by
// near-zero curvature is reported as breakdown, distinct from running out of
// iterations.
enum class PcgStatus { converged, max_iterations, breakdown };

struct PcgResult {
  Vec x;
  double residual_norm = 0.0;
  int iterations = 0;
  PcgStatus status = PcgStatus::converged;
};

PcgResult pcg_solve(const std::function<Vec(const Vec&)>& apply_M, const Vec& rhs,
                    const Vec& precond_diag, double tol, int max_iter,
                    const Vec* x0 = nullptr);

// Dense Cholesky factorization with cached factor for repeated right-hand
// sides.  ok() is false when the matrix is not numerically positive definite,
// signalling the caller to fall back to an iterative solve.
class DenseCholesky {
 public:
  explicit DenseCholesky(const Mat& M);
  bool ok() const { return ok_; }
  Vec solve(const Vec& rhs) const;

 private:
  Eigen::LLT<Mat> llt_;
  bool ok_ = false;
};

}  // namespace sdpal
