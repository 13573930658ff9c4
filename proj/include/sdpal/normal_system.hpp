#pragma once

#include <memory>

#include "sdpal/model.hpp"
#include "sdpal/params.hpp"

namespace sdpal {

// The joint normal operator of the two constraint maps,
//   [ A A*    A B*   ]
//   [ B A*    B B* + I ]  (+ ridge * I),
// assembled once per solve.  Solves go through a cached sparse Cholesky
// factorization when the dimension and fill allow it, otherwise through
// diagonally preconditioned CG on the operator form.
class NormalSystem {
 public:
  NormalSystem(const ProblemData& d, MSolveMethod method, double ridge, int cg_max_iter);

  int dim() const { return m_ + p_; }
  bool direct() const { return direct_; }

  // Operator application to a stacked [y; ybar] vector.
  Vec apply(const Vec& yy) const;

  struct Solve {
    Vec y, ybar;
    double residual = 0;  // ||rhs - M x||
    int cg_iterations = 0;
  };
  // Solves to absolute residual tol_abs (the direct path ignores it and is
  // effectively exact).  warm seeds the iterative path.
  Solve solve(const Vec& h1, const Vec& h2, double tol_abs, const Vec* warm = nullptr) const;

 private:
  const ProblemData* d_;
  int m_ = 0, p_ = 0;
  double ridge_ = 0;
  int cg_max_iter_ = 500;
  bool direct_ = true;
  SpMat M_;
  Vec diag_;
  std::unique_ptr<Eigen::SimplicialLDLT<SpMat>> factor_;
};

}  // namespace sdpal
