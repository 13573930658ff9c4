#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "sdpal/model.hpp"

using namespace sdpal;

namespace {

Mat random_symmetric(int n, std::mt19937& rng) {
  std::normal_distribution<double> g;
  Mat A(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) A(i, j) = g(rng);
  return 0.5 * (A + A.transpose());
}

Mat random_block_value(const Block& b, std::mt19937& rng) {
  if (b.kind == BlockKind::psd) return random_symmetric(b.size, rng);
  std::normal_distribution<double> g;
  Mat v(b.size, 1);
  for (int i = 0; i < b.size; ++i) v(i, 0) = g(rng);
  return v;
}

// Dense coefficient matrices kept alongside the packed representation so the
// forward map can be cross-checked entry by entry.
struct DenseRows {
  std::vector<std::vector<Mat>> rows;  // rows[k][block]
};

ProblemData random_problem(const BlockStructure& blk, int m, int p, std::mt19937& rng,
                           DenseRows* dense_a, DenseRows* dense_b) {
  ProblemData d = make_problem(blk, m, p);
  ConstraintAccumulator accA(blk, m), accB(blk, p);
  auto fill = [&](int rows, ConstraintAccumulator& acc, DenseRows* keep) {
    for (int k = 0; k < rows; ++k) {
      std::vector<Mat> per_block;
      for (int j = 0; j < blk.count(); ++j) {
        Mat A = random_block_value(blk.blocks[j], rng);
        acc.add_dense(k, j, A);
        per_block.push_back(A);
      }
      if (keep) keep->rows.push_back(per_block);
    }
  };
  fill(m, accA, dense_a);
  fill(p, accB, dense_b);
  d.At = accA.assemble();
  d.Bt = accB.assemble();
  std::normal_distribution<double> g;
  for (int k = 0; k < m; ++k) d.b[k] = g(rng);
  for (int k = 0; k < p; ++k) {
    d.l[k] = -1.0;
    d.u[k] = 1.0;
  }
  return d;
}

}  // namespace

TEST_CASE("forward map equals dense inner products") {
  std::mt19937 rng(101);
  BlockStructure blk{{{BlockKind::psd, 4}, {BlockKind::linear, 6}, {BlockKind::psd, 2}}};
  DenseRows da, db;
  ProblemData d = random_problem(blk, 7, 3, rng, &da, &db);
  REQUIRE(validate(d).empty());

  for (int trial = 0; trial < 20; ++trial) {
    BlockVars X = BlockVars::zeros(blk);
    for (int j = 0; j < blk.count(); ++j) X.blocks[j] = random_block_value(blk.blocks[j], rng);
    const Vec r = apply_A(d, X);
    for (int k = 0; k < d.m(); ++k) {
      double expect = 0.0;
      for (int j = 0; j < blk.count(); ++j)
        expect += (da.rows[k][j].array() * X.blocks[j].array()).sum();
      CHECK(std::abs(r[k] - expect) <= 1e-12 * (1.0 + std::abs(expect)));
    }
    const Vec rb = apply_B(d, X);
    for (int k = 0; k < d.p(); ++k) {
      double expect = 0.0;
      for (int j = 0; j < blk.count(); ++j)
        expect += (db.rows[k][j].array() * X.blocks[j].array()).sum();
      CHECK(std::abs(rb[k] - expect) <= 1e-12 * (1.0 + std::abs(expect)));
    }
  }
}

TEST_CASE("adjoint identity <A(X), y> == <X, A*(y)>") {
  std::mt19937 rng(103);
  BlockStructure blk{{{BlockKind::psd, 5}, {BlockKind::linear, 4}}};
  ProblemData d = random_problem(blk, 6, 2, rng, nullptr, nullptr);
  std::normal_distribution<double> g;
  for (int trial = 0; trial < 50; ++trial) {
    BlockVars X = BlockVars::zeros(blk);
    for (int j = 0; j < blk.count(); ++j) X.blocks[j] = random_block_value(blk.blocks[j], rng);
    Vec y(d.m()), ybar(d.p());
    for (int i = 0; i < y.size(); ++i) y[i] = g(rng);
    for (int i = 0; i < ybar.size(); ++i) ybar[i] = g(rng);
    CHECK(std::abs(apply_A(d, X).dot(y) - X.dot(adjoint_A(d, y))) <= 1e-12 * (1.0 + X.norm() * y.norm()));
    CHECK(std::abs(apply_B(d, X).dot(ybar) - X.dot(adjoint_B(d, ybar))) <=
          1e-12 * (1.0 + X.norm() * ybar.norm()));
  }
}

TEST_CASE("adjoint of A produces symmetric psd blocks") {
  std::mt19937 rng(107);
  BlockStructure blk{{{BlockKind::psd, 4}}};
  ProblemData d = random_problem(blk, 5, 0, rng, nullptr, nullptr);
  Vec y(5);
  y << 1, -2, 0.5, 3, -1;
  const BlockVars W = adjoint_A(d, y);
  CHECK((W.blocks[0] - W.blocks[0].transpose()).lpNorm<Eigen::Infinity>() <= 1e-14);
}

TEST_CASE("single entry insertion matches the symmetric-pair convention") {
  BlockStructure blk{{{BlockKind::psd, 3}}};
  ConstraintAccumulator acc(blk, 1);
  acc.add_entry(0, 0, 0, 1, 1.0);  // coefficient matrix E_01 + E_10
  ProblemData d = make_problem(blk, 1, 0);
  d.At = acc.assemble();
  BlockVars X = BlockVars::zeros(blk);
  X.blocks[0] << 1, 2, 3, 2, 4, 5, 3, 5, 6;
  // <E01 + E10, X> = 2 * X01
  CHECK(apply_A(d, X)[0] == doctest::Approx(4.0).epsilon(1e-14));
}

TEST_CASE("block vars arithmetic") {
  BlockStructure blk{{{BlockKind::psd, 2}, {BlockKind::linear, 3}}};
  BlockVars a = BlockVars::zeros(blk), b = BlockVars::zeros(blk);
  a.blocks[0] << 1, 2, 2, 3;
  b.blocks[1] << 1, 1, 1;
  BlockVars c = a + 2.0 * b;
  CHECK(c.blocks[0](0, 1) == 2.0);
  CHECK(c.blocks[1](2, 0) == 2.0);
  CHECK(c.dot(c) == doctest::Approx(1 + 4 + 4 + 9 + 12.0));
  c.axpy(-2.0, b);
  CHECK(c.blocks[1].norm() == 0.0);
}

TEST_CASE("validate flags structural defects") {
  BlockStructure blk{{{BlockKind::psd, 3}, {BlockKind::linear, 2}}};
  std::mt19937 rng(113);
  ProblemData good = random_problem(blk, 4, 2, rng, nullptr, nullptr);
  CHECK(validate(good).empty());

  ProblemData bad = good;
  bad.b[0] = std::numeric_limits<double>::quiet_NaN();
  CHECK_FALSE(validate(bad).empty());

  bad = good;
  bad.bounds[0].present = true;
  bad.bounds[0].lower = Mat::Constant(3, 3, 1.0);
  bad.bounds[0].upper = Mat::Constant(3, 3, -1.0);
  CHECK_FALSE(validate(bad).empty());

  bad = good;
  bad.C.blocks[0](0, 1) += 1.0;  // breaks symmetry
  CHECK_FALSE(validate(bad).empty());

  bad = good;
  bad.At[0] = SpMat(blk.blocks[0].vec_len(), 4);
  bad.At[1] = SpMat(blk.blocks[1].vec_len(), 4);  // all rows now empty
  CHECK_FALSE(validate(bad).empty());

  bad = good;
  bad.l[0] = 2.0;
  bad.u[0] = -2.0;
  CHECK_FALSE(validate(bad).empty());
}

TEST_CASE("symmetrize_input averages the transpose") {
  Mat M(2, 2);
  M << 1, 4, 0, 3;
  const Mat S = symmetrize_input(M);
  CHECK(S(0, 1) == 2.0);
  CHECK(S(1, 0) == 2.0);
  CHECK(S(0, 0) == 1.0);
}

TEST_CASE("reported objective applies sense, scale and constant") {
  ProblemData d;
  d.obj_sense = -1;
  d.obj_scale = 2.0;
  d.obj_constant = 1.0;
  CHECK(d.reported_objective(3.0) == doctest::Approx(-7.0));
}
