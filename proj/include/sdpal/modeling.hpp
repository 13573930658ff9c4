#pragma once

#include <string>
#include <vector>

#include "sdpal/model.hpp"

namespace sdpal {

class Model;

// Kinds of declared variables.
//   free_var : unrestricted matrix/vector (compiled as a difference of two
//              nonnegative blocks).
//   sdp      : symmetric positive semidefinite matrix (one psd block).
//   nonneg   : elementwise nonnegative matrix/vector (one linear block,
//              entries stored column-major).
//   symm     : symmetric but otherwise unrestricted matrix (compiled as a
//              difference of two nonnegative blocks over the packed upper
//              triangle, unless a cone constraint upgrades it to sdp).
enum class VarKind { free_var, sdp, nonneg, symm };

// One scalar coefficient of an affine expression: entry `out` of the output
// (column-major) accumulates `coeff` times scalar slot `slot` of variable
// `var`.  Square sdp/symm variables address their packed upper triangle
// (slot = svec_index(i, j) for i <= j, representing the symmetric pair);
// other variables address entries column-major.
struct LinTerm {
  int out = 0;
  int var = 0;
  int slot = 0;
  double coeff = 0.0;
};

// A matrix-shaped affine function of model variables: entry (i, j) equals
// sum of its terms' coefficients times the referenced variable entries, plus
// a constant offset.  Built from variable references by the overloaded
// arithmetic operators and the shaping maps below; consumed by Model::add,
// Model::add_psd, and the objective.
struct Expr {
  const Model* model = nullptr;
  int rows = 0;
  int cols = 0;
  std::vector<LinTerm> terms;
  Vec offset;  // size rows*cols, column-major

  int size() const { return rows * cols; }
  bool empty() const { return size() == 0; }
};

// Handle to a declared variable.  Converts implicitly to the whole-variable
// expression; operator() selects single entries (column-major for the
// one-argument form) or a submatrix by index lists.
struct VarRef {
  int id = -1;
  VarKind kind = VarKind::sdp;
  int rows = 0;
  int cols = 0;
  const Model* model = nullptr;

  Expr expr() const;
  operator Expr() const { return expr(); }
  Expr operator()(int i, int j) const;
  Expr operator()(int i) const;
  Expr operator()(const std::vector<int>& I, const std::vector<int>& J) const;
};

// expr == 0 after moving everything to the left-hand side.
struct EqConstraint {
  Expr diff;
};

// lo <= expr <= hi elementwise; +/-inf entries mean the side is absent.
// `chained` records that both sides were given in one comparison chain, in
// which case the middle must not carry constant terms.
struct RangeConstraint {
  Expr mid;
  Vec lo, hi;
  bool chained = false;
};

// Partially built chains: (lo <= expr) waiting for "<= hi", and
// (hi >= expr) waiting for ">= lo".
struct LowerBoundedExpr {
  Vec lo;
  Expr mid;
};
struct UpperBoundedExpr {
  Vec hi;
  Expr mid;
};

// Objective: a scalar affine part plus a sum of elementwise l1 penalties
// ||e||_1 over affine expressions e (each lowered to a nonnegative split with
// linking equality rows at compile time).
struct Objective {
  Objective() = default;
  Objective(const Expr& e) : linear(e) {}  // NOLINT: implicit by design

  Expr linear;                 // scalar (1x1) or empty meaning zero
  std::vector<Expr> l1_terms;  // each any shape
};

// ---- expression arithmetic -------------------------------------------------

Expr operator+(const Expr& a, const Expr& b);
Expr operator-(const Expr& a, const Expr& b);
Expr operator-(const Expr& a);
Expr operator*(double a, const Expr& e);
Expr operator*(const Expr& e, double a);
Expr operator+(const Expr& e, double c);
Expr operator+(double c, const Expr& e);
Expr operator-(const Expr& e, double c);
Expr operator-(double c, const Expr& e);
Expr operator+(const Expr& e, const Mat& M);
Expr operator+(const Mat& M, const Expr& e);
Expr operator-(const Expr& e, const Mat& M);
Expr operator-(const Mat& M, const Expr& e);

// ---- shaping maps ----------------------------------------------------------

// Sum of the diagonal of a square expression (1x1 output).
Expr trace(const Expr& e);
// Sum of all entries (1x1 output).
Expr sum(const Expr& e);
// Frobenius inner product <A, e> = sum of A .* e (1x1 output; shapes match).
Expr inprod(const Mat& A, const Expr& e);
// Diagonal of a square expression as an n x 1 column.
Expr map_diag(const Expr& e);
// Packed upper triangle of a symmetric-valued square expression with
// sqrt(2)-scaled off-diagonals, as an n(n+1)/2 x 1 column.  The expression
// must be structurally symmetric.
Expr map_svec(const Expr& e);
// Column-major reshape to an mn x 1 column.
Expr map_vec(const Expr& e);
// Elementwise product A .* e (shapes match).
Expr hadamard(const Mat& A, const Expr& e);
// l1 objective term ||e||_1 (sum of absolute values of all entries; for a
// structurally symmetric matrix expression both triangles count).
Objective l1_norm(const Expr& e);

Objective operator+(Objective a, const Objective& b);
Objective operator+(Objective a, double c);
Objective operator+(double c, Objective a);

// ---- comparisons -----------------------------------------------------------

EqConstraint operator==(const Expr& a, const Expr& b);
EqConstraint operator==(const Expr& a, double c);
EqConstraint operator==(double c, const Expr& a);
EqConstraint operator==(const Expr& a, const Mat& M);
EqConstraint operator==(const Mat& M, const Expr& a);

RangeConstraint operator<=(const Expr& a, const Expr& b);  // a - b <= 0
RangeConstraint operator<=(const Expr& a, double c);
RangeConstraint operator<=(const Expr& a, const Mat& M);
LowerBoundedExpr operator<=(double c, const Expr& a);
LowerBoundedExpr operator<=(const Mat& M, const Expr& a);
RangeConstraint operator<=(const LowerBoundedExpr& lb, double c);
RangeConstraint operator<=(const LowerBoundedExpr& lb, const Mat& M);

RangeConstraint operator>=(const Expr& a, const Expr& b);  // a - b >= 0
RangeConstraint operator>=(const Expr& a, double c);
RangeConstraint operator>=(const Expr& a, const Mat& M);
UpperBoundedExpr operator>=(double c, const Expr& a);
UpperBoundedExpr operator>=(const Mat& M, const Expr& a);
RangeConstraint operator>=(const UpperBoundedExpr& ub, double c);
RangeConstraint operator>=(const UpperBoundedExpr& ub, const Mat& M);

// Strict comparisons are not part of the constraint language; every overload
// throws std::invalid_argument.
EqConstraint operator<(const Expr& a, const Expr& b);
EqConstraint operator<(const Expr& a, double c);
EqConstraint operator<(double c, const Expr& a);
EqConstraint operator<(const Expr& a, const Mat& M);
EqConstraint operator<(const Mat& M, const Expr& a);
EqConstraint operator>(const Expr& a, const Expr& b);
EqConstraint operator>(const Expr& a, double c);
EqConstraint operator>(double c, const Expr& a);
EqConstraint operator>(const Expr& a, const Mat& M);
EqConstraint operator>(const Mat& M, const Expr& a);

// ---- model -----------------------------------------------------------------

// Declarative model builder.  Declare variables, state one objective and any
// number of constraints, then compile() to the solver's standard form:
//
//   * blocks appear in declaration order: sdp variables as psd blocks,
//     nonneg variables as linear blocks (column-major), free_var and symm
//     variables as plus/minus pairs of linear blocks; after the variables
//     come the l1 split pairs (objective term order) and the slack blocks of
//     cone constraints (add order).
//   * equality constraints become rows of the equality operator in add
//     order, followed by the l1 linking rows and the cone-constraint rows.
//   * two-sided comparisons become either per-block bound boxes (when the
//     middle is exactly one whole sdp/nonneg variable, possibly scaled by a
//     positive scalar) or rows of the inequality operator.
//   * maximize compiles the negated objective and flips the reporting sign.
class Model {
 public:
  struct VarDecl {
    VarKind kind = VarKind::sdp;
    int rows = 0;
    int cols = 0;
  };

  explicit Model(std::string name = "model");

  VarRef var_sdp(int n);
  VarRef var_sdp(int r, int c);
  VarRef var_symm(int n);
  VarRef var_symm(int r, int c);
  VarRef var_nn(int r, int c = 1);
  VarRef var_free(int r, int c = 1);

  void add(const EqConstraint& con);
  void add(const RangeConstraint& con);
  void add(const LowerBoundedExpr& con);  // one-sided lo <= expr
  void add(const UpperBoundedExpr& con);  // one-sided expr <= hi

  // expr is constrained to the positive semidefinite cone.  Every variable
  // appearing in expr must be of sdp or symm kind and the expression must be
  // structurally symmetric.  A whole symm variable (positively scaled)
  // upgrades in place to an sdp block; anything else introduces a fresh psd
  // slack block Y and the packed equality rows svec(expr) - svec(Y) = 0.
  void add_psd(const Expr& e);
  // G1 <= expr <= G2 in the semidefinite order: two cone constraints.
  void add_psd_range(const Mat& G1, const Expr& e, const Mat& G2);

  void minimize(const Objective& obj);
  void maximize(const Objective& obj);

  int var_count() const { return static_cast<int>(vars_.size()); }
  const VarDecl& var_decl(int id) const { return vars_.at(id); }
  const std::string& name() const { return name_; }

  // Lowers the model to standard form.  Throws std::invalid_argument on an
  // empty model or a missing objective; structural advisories (a free
  // variable that appears only in the objective) go to *warnings.
  ProblemData compile(std::vector<std::string>* warnings = nullptr) const;

 private:
  friend struct VarRef;

  std::string name_;
  std::vector<VarDecl> vars_;
  std::vector<EqConstraint> eqs_;
  std::vector<RangeConstraint> ranges_;
  std::vector<Expr> psd_cons_;
  bool has_objective_ = false;
  int obj_sense_ = +1;
  Objective objective_;
};

}  // namespace sdpal
