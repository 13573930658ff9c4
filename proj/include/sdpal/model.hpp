#pragma once

#include <string>
#include <vector>

#include "sdpal/linalg.hpp"

namespace sdpal {

// A problem variable is a tuple of blocks: dense symmetric matrices constrained
// to the positive semidefinite cone ("psd") and nonnegative vectors ("linear").
enum class BlockKind { psd, linear };

struct Block {
  BlockKind kind = BlockKind::psd;
  int size = 0;

  // Length of the packed coordinate vector: triangular for psd, size for linear.
  int vec_len() const { return kind == BlockKind::psd ? svec_len(size) : size; }
  int rows() const { return size; }
  int cols() const { return kind == BlockKind::psd ? size : 1; }
  bool operator==(const Block&) const = default;
};

struct BlockStructure {
  std::vector<Block> blocks;

  int count() const { return static_cast<int>(blocks.size()); }
  int vec_len_total() const;
  bool operator==(const BlockStructure&) const = default;
};

// One value per block: an n x n symmetric matrix for psd blocks, an n x 1
// column for linear blocks.
struct BlockVars {
  std::vector<Mat> blocks;

  static BlockVars zeros(const BlockStructure& blk);
  void set_zero();
  double dot(const BlockVars& other) const;
  double squared_norm() const;
  double norm() const;

  BlockVars& operator+=(const BlockVars& o);
  BlockVars& operator-=(const BlockVars& o);
  BlockVars& operator*=(double a);
  // y += a * x
  void axpy(double a, const BlockVars& x);
};

BlockVars operator+(BlockVars a, const BlockVars& b);
BlockVars operator-(BlockVars a, const BlockVars& b);
BlockVars operator*(double a, BlockVars x);

// Elementwise box for one block; +/-inf entries mean the side is absent.
// present == false means the block is unconstrained (no box at all), in which
// case the matching dual block is identically zero and is skipped everywhere.
struct BlockBounds {
  bool present = false;
  Mat lower, upper;
};

// Standard-form problem
//   minimize  <C, X>
//   s.t.      A(X) = b,  l <= B(X) <= u,  X in cone x box.
// Constraint coefficients are stored per block as sparse matrices whose k-th
// column is the packed (svec) form of the k-th constraint matrix, so that
// A(X) = sum_j At[j]^T * pack(X_j) and the adjoint is the plain product.
struct ProblemData {
  BlockStructure blk;
  std::vector<SpMat> At;  // per block: vec_len(j) x m
  std::vector<SpMat> Bt;  // per block: vec_len(j) x p (all empty when p == 0)
  BlockVars C;
  Vec b;
  Vec l, u;                         // size p
  std::vector<BlockBounds> bounds;  // size blk.count()

  // Reporting metadata (does not affect the solve): the user-facing objective
  // is obj_sense * (obj_scale * <C, X> + obj_constant).
  int obj_sense = +1;  // +1 minimize, -1 problem was stated as maximize
  double obj_scale = 1.0;
  double obj_constant = 0.0;
  double recommended_tol = 0.0;  // 0 = no special recommendation
  std::string name;

  int m() const { return static_cast<int>(b.size()); }
  int p() const { return static_cast<int>(l.size()); }
  bool has_rows_B() const { return p() > 0; }
  bool block_bounded(int j) const { return !bounds.empty() && bounds[j].present; }
  bool any_bounds() const;
  double reported_objective(double pobj) const {
    return obj_sense * (obj_scale * pobj + obj_constant);
  }
};

// Fresh problem with zeroed coefficients of the given shape.
ProblemData make_problem(const BlockStructure& blk, int m, int p);

// Packed coordinates of one block value (svec for psd, identity for linear).
Vec block_vec(const Block& blk, const Mat& X);
Mat block_unvec(const Block& blk, const Vec& x);

// Forward maps and adjoints. apply_B/adjoint_B require p > 0 on the caller's
// side only in the sense that they return empty results when p == 0.
Vec apply_A(const ProblemData& d, const BlockVars& X);
BlockVars adjoint_A(const ProblemData& d, const Vec& y);
Vec apply_B(const ProblemData& d, const BlockVars& X);
BlockVars adjoint_B(const ProblemData& d, const Vec& ybar);

// (M + M^T)/2
Mat symmetrize_input(const Mat& M);

// Structural checks: dimension mismatches, NaN coefficients, inverted bounds,
// empty constraint rows.  Returns human-readable findings; empty means clean.
std::vector<std::string> validate(const ProblemData& d);

// Incrementally builds the per-block sparse coefficient matrices from
// symmetric-entry or dense inserts; duplicates accumulate.
class ConstraintAccumulator {
 public:
  ConstraintAccumulator(const BlockStructure& blk, int rows);

  // Coefficient of the symmetric pair (i, j) of a psd block (both triangles
  // implied; i == j is the diagonal), or of entry i (== j) of a linear block.
  void add_entry(int row, int block, int i, int j, double value);
  // Adds a whole dense coefficient block: symmetric matrix or column vector.
  void add_dense(int row, int block, const Mat& A);

  std::vector<SpMat> assemble() const;
  int rows() const { return rows_; }

 private:
  const BlockStructure blk_;
  int rows_;
  std::vector<std::vector<Eigen::Triplet<double>>> trips_;
};

}  // namespace sdpal
