#include "sdpal/model.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

namespace sdpal {

namespace {
constexpr double kSqrt2 = 1.4142135623730951;

bool all_finite(const Mat& M) { return M.allFinite(); }

std::string block_label(int j) {
  std::ostringstream os;
  os << "block " << j;
  return os.str();
}
}  // namespace

int BlockStructure::vec_len_total() const {
  int t = 0;
  for (const Block& b : blocks) t += b.vec_len();
  return t;
}

BlockVars BlockVars::zeros(const BlockStructure& blk) {
  BlockVars v;
  v.blocks.reserve(blk.blocks.size());
  for (const Block& b : blk.blocks) v.blocks.emplace_back(Mat::Zero(b.rows(), b.cols()));
  return v;
}

void BlockVars::set_zero() {
  for (Mat& m : blocks) m.setZero();
}

double BlockVars::dot(const BlockVars& other) const {
  double t = 0.0;
  for (size_t j = 0; j < blocks.size(); ++j)
    t += (blocks[j].array() * other.blocks[j].array()).sum();
  return t;
}

double BlockVars::squared_norm() const {
  double t = 0.0;
  for (const Mat& m : blocks) t += m.squaredNorm();
  return t;
}

double BlockVars::norm() const { return std::sqrt(squared_norm()); }

BlockVars& BlockVars::operator+=(const BlockVars& o) {
  for (size_t j = 0; j < blocks.size(); ++j) blocks[j] += o.blocks[j];
  return *this;
}

BlockVars& BlockVars::operator-=(const BlockVars& o) {
  for (size_t j = 0; j < blocks.size(); ++j) blocks[j] -= o.blocks[j];
  return *this;
}

BlockVars& BlockVars::operator*=(double a) {
  for (Mat& m : blocks) m *= a;
  return *this;
}

void BlockVars::axpy(double a, const BlockVars& x) {
  for (size_t j = 0; j < blocks.size(); ++j) blocks[j] += a * x.blocks[j];
}

BlockVars operator+(BlockVars a, const BlockVars& b) {
  a += b;
  return a;
}
BlockVars operator-(BlockVars a, const BlockVars& b) {
  a -= b;
  return a;
}
BlockVars operator*(double a, BlockVars x) {
  x *= a;
  return x;
}

bool ProblemData::any_bounds() const {
  for (const BlockBounds& bb : bounds)
    if (bb.present) return true;
  return false;
}

ProblemData make_problem(const BlockStructure& blk, int m, int p) {
  ProblemData d;
  d.blk = blk;
  d.C = BlockVars::zeros(blk);
  d.b = Vec::Zero(m);
  d.l = Vec::Zero(p);
  d.u = Vec::Zero(p);
  d.bounds.resize(blk.count());
  d.At.reserve(blk.count());
  d.Bt.reserve(blk.count());
  for (const Block& b : blk.blocks) {
    d.At.emplace_back(b.vec_len(), m);
    d.Bt.emplace_back(b.vec_len(), p);
  }
  return d;
}

Vec block_vec(const Block& blk, const Mat& X) {
  return blk.kind == BlockKind::psd ? svec(X) : Vec(X.col(0));
}

Mat block_unvec(const Block& blk, const Vec& x) {
  return blk.kind == BlockKind::psd ? smat(x) : Mat(x);
}

namespace {

Vec apply_map(const std::vector<SpMat>& Mt, const BlockStructure& blk, const BlockVars& X,
              int out_dim) {
  Vec r = Vec::Zero(out_dim);
  for (int j = 0; j < blk.count(); ++j) {
    if (Mt[j].nonZeros() == 0) continue;
    r.noalias() += Mt[j].transpose() * block_vec(blk.blocks[j], X.blocks[j]);
  }
  return r;
}

BlockVars adjoint_map(const std::vector<SpMat>& Mt, const BlockStructure& blk, const Vec& y) {
  BlockVars out = BlockVars::zeros(blk);
  for (int j = 0; j < blk.count(); ++j) {
    if (Mt[j].nonZeros() == 0) continue;
    const Vec w = Mt[j] * y;
    out.blocks[j] = block_unvec(blk.blocks[j], w);
  }
  return out;
}

}  // namespace

Vec apply_A(const ProblemData& d, const BlockVars& X) { return apply_map(d.At, d.blk, X, d.m()); }

BlockVars adjoint_A(const ProblemData& d, const Vec& y) { return adjoint_map(d.At, d.blk, y); }

Vec apply_B(const ProblemData& d, const BlockVars& X) { return apply_map(d.Bt, d.blk, X, d.p()); }

BlockVars adjoint_B(const ProblemData& d, const Vec& ybar) {
  return adjoint_map(d.Bt, d.blk, ybar);
}

Mat symmetrize_input(const Mat& M) { return 0.5 * (M + M.transpose()); }

std::vector<std::string> validate(const ProblemData& d) {
  std::vector<std::string> out;
  const int nb = d.blk.count();
  auto complain = [&out](const std::string& s) { out.push_back(s); };

  for (int j = 0; j < nb; ++j)
    if (d.blk.blocks[j].size <= 0) complain(block_label(j) + ": nonpositive size");

  if (static_cast<int>(d.At.size()) != nb) complain("At: wrong number of blocks");
  if (static_cast<int>(d.Bt.size()) != nb) complain("Bt: wrong number of blocks");
  if (static_cast<int>(d.C.blocks.size()) != nb) complain("C: wrong number of blocks");
  if (static_cast<int>(d.bounds.size()) != nb) complain("bounds: wrong number of blocks");
  if (!out.empty()) return out;

  for (int j = 0; j < nb; ++j) {
    const Block& b = d.blk.blocks[j];
    if (d.At[j].rows() != b.vec_len() || d.At[j].cols() != d.m())
      complain(block_label(j) + ": At has wrong shape");
    if (d.Bt[j].rows() != b.vec_len() || d.Bt[j].cols() != d.p())
      complain(block_label(j) + ": Bt has wrong shape");
    if (d.C.blocks[j].rows() != b.rows() || d.C.blocks[j].cols() != b.cols())
      complain(block_label(j) + ": C has wrong shape");
    if (!all_finite(d.C.blocks[j])) complain(block_label(j) + ": C has non-finite entries");
    if (b.kind == BlockKind::psd &&
        (d.C.blocks[j] - d.C.blocks[j].transpose()).lpNorm<Eigen::Infinity>() >
            1e-12 * (1.0 + d.C.blocks[j].lpNorm<Eigen::Infinity>()))
      complain(block_label(j) + ": C is not symmetric");
    const BlockBounds& bb = d.bounds[j];
    if (bb.present) {
      if (bb.lower.rows() != b.rows() || bb.lower.cols() != b.cols() ||
          bb.upper.rows() != b.rows() || bb.upper.cols() != b.cols()) {
        complain(block_label(j) + ": bounds have wrong shape");
        continue;
      }
      if ((bb.lower.array() > bb.upper.array()).any())
        complain(block_label(j) + ": lower bound exceeds upper bound");
      if (bb.lower.hasNaN() || bb.upper.hasNaN())
        complain(block_label(j) + ": bounds contain NaN");
    }
  }
  if (!d.b.allFinite()) complain("b has non-finite entries");
  if (d.l.hasNaN() || d.u.hasNaN()) complain("l/u contain NaN");
  if (d.p() > 0 && ((d.l.array() > d.u.array()).any()))
    complain("row bounds: l exceeds u");

  // Empty constraint rows break surjectivity of the constraint map.
  if (d.m() > 0) {
    Vec colnorm = Vec::Zero(d.m());
    for (int j = 0; j < nb; ++j)
      for (int k = 0; k < d.At[j].outerSize(); ++k)
        for (SpMat::InnerIterator it(d.At[j], k); it; ++it)
          colnorm[k] += it.value() * it.value();
    for (int k = 0; k < d.m(); ++k)
      if (colnorm[k] == 0.0) complain("constraint row " + std::to_string(k) + " of A is empty");
  }
  return out;
}

ConstraintAccumulator::ConstraintAccumulator(const BlockStructure& blk, int rows)
    : blk_(blk), rows_(rows), trips_(blk.blocks.size()) {}

void ConstraintAccumulator::add_entry(int row, int block, int i, int j, double value) {
  const Block& b = blk_.blocks.at(block);
  if (row < 0 || row >= rows_) throw std::out_of_range("ConstraintAccumulator: row out of range");
  if (b.kind == BlockKind::psd) {
    if (i > j) std::swap(i, j);
    if (j >= b.size || i < 0) throw std::out_of_range("ConstraintAccumulator: index out of range");
    const double scaled = (i == j) ? value : kSqrt2 * value;
    trips_[block].emplace_back(svec_index(i, j), row, scaled);
  } else {
    if (i != j) throw std::invalid_argument("ConstraintAccumulator: linear block needs i == j");
    if (i < 0 || i >= b.size) throw std::out_of_range("ConstraintAccumulator: index out of range");
    trips_[block].emplace_back(i, row, value);
  }
}

void ConstraintAccumulator::add_dense(int row, int block, const Mat& A) {
  const Block& b = blk_.blocks.at(block);
  if (b.kind == BlockKind::psd) {
    for (int j = 0; j < b.size; ++j) {
      for (int i = 0; i < j; ++i)
        if (A(i, j) != 0.0 || A(j, i) != 0.0)
          trips_[block].emplace_back(svec_index(i, j), row,
                                     kSqrt2 * 0.5 * (A(i, j) + A(j, i)));
      if (A(j, j) != 0.0) trips_[block].emplace_back(svec_index(j, j), row, A(j, j));
    }
  } else {
    for (int i = 0; i < b.size; ++i)
      if (A(i, 0) != 0.0) trips_[block].emplace_back(i, row, A(i, 0));
  }
}

std::vector<SpMat> ConstraintAccumulator::assemble() const {
  std::vector<SpMat> out;
  out.reserve(blk_.blocks.size());
  for (size_t j = 0; j < blk_.blocks.size(); ++j) {
    SpMat M(blk_.blocks[j].vec_len(), rows_);
    M.setFromTriplets(trips_[j].begin(), trips_[j].end());
    out.push_back(std::move(M));
  }
  return out;
}

}  // namespace sdpal
