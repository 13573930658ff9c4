#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <limits>
#include <random>

#include "sdpal/linalg.hpp"

using namespace sdpal;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

Mat random_symmetric(int n, std::mt19937& rng, double scale = 1.0) {
  std::normal_distribution<double> g(0.0, scale);
  Mat A(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) A(i, j) = g(rng);
  return 0.5 * (A + A.transpose());
}

// Independent construction of the packed vector straight from its definition:
// walk upper-triangle columns, sqrt(2) on off-diagonals.
Vec svec_oracle(const Mat& X) {
  const int n = static_cast<int>(X.rows());
  Vec out(n * (n + 1) / 2);
  int k = 0;
  for (int j = 0; j < n; ++j)
    for (int i = 0; i <= j; ++i) out[k++] = (i == j) ? X(i, j) : std::sqrt(2.0) * X(i, j);
  return out;
}

// Closed-form eigenvalues of a symmetric 2x2 matrix [[a,b],[b,c]].
std::pair<double, double> eig2x2_oracle(double a, double b, double c) {
  const double mid = 0.5 * (a + c);
  const double rad = std::sqrt(0.25 * (a - c) * (a - c) + b * b);
  return {mid + rad, mid - rad};
}

}  // namespace

TEST_CASE("svec packs the upper triangle column-major with sqrt(2) off-diagonals") {
  Mat X(2, 2);
  X << 1, 2, 2, 3;
  const Vec v = svec(X);
  REQUIRE(v.size() == 3);
  CHECK(v[0] == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(v[1] == doctest::Approx(2.8284271247461903).epsilon(1e-15));
  CHECK(v[2] == doctest::Approx(3.0).epsilon(1e-15));

  std::mt19937 rng(7);
  for (int t = 0; t < 50; ++t) {
    const int n = 1 + t % 8;
    const Mat A = random_symmetric(n, rng);
    CHECK((svec(A) - svec_oracle(A)).lpNorm<Eigen::Infinity>() == 0.0);
  }
}

TEST_CASE("svec is an isometry for the Frobenius inner product") {
  std::mt19937 rng(11);
  for (int t = 0; t < 200; ++t) {
    const int n = 1 + t % 10;
    const Mat A = random_symmetric(n, rng, 2.0);
    const Mat B = random_symmetric(n, rng, 2.0);
    const double frob = (A.array() * B.array()).sum();
    const double packed = svec(A).dot(svec(B));
    CHECK(std::abs(frob - packed) <= 1e-12 * (1.0 + std::abs(frob)));
  }
}

TEST_CASE("smat inverts svec exactly") {
  std::mt19937 rng(13);
  for (int t = 0; t < 50; ++t) {
    const int n = 1 + t % 9;
    const Mat A = random_symmetric(n, rng);
    CHECK((smat(svec(A)) - A).lpNorm<Eigen::Infinity>() <= 1e-15);
    // Round trip in the other direction is exact: no sqrt cancellation on diag.
    Vec x(svec_len(n));
    std::normal_distribution<double> g;
    for (int i = 0; i < x.size(); ++i) x[i] = g(rng);
    CHECK((svec(smat(x)) - x).lpNorm<Eigen::Infinity>() <= 1e-15 * x.lpNorm<Eigen::Infinity>());
  }
  CHECK_THROWS(smat(Vec::Zero(5)));
}

TEST_CASE("sym_eig matches the closed-form 2x2 spectrum and sorts descending") {
  std::mt19937 rng(17);
  std::normal_distribution<double> g(0.0, 3.0);
  for (int t = 0; t < 100; ++t) {
    const double a = g(rng), b = g(rng), c = g(rng);
    Mat A(2, 2);
    A << a, b, b, c;
    const auto [hi, lo] = eig2x2_oracle(a, b, c);
    const EigResult e = sym_eig(A);
    CHECK(e.values[0] == doctest::Approx(hi).epsilon(1e-12));
    CHECK(e.values[1] == doctest::Approx(lo).epsilon(1e-12));
  }
}

TEST_CASE("sym_eig reconstructs and returns orthonormal vectors") {
  std::mt19937 rng(19);
  for (int t = 0; t < 40; ++t) {
    const int n = 2 + t % 12;
    const Mat A = random_symmetric(n, rng, 4.0);
    const EigResult e = sym_eig(A);
    const Mat R = e.vectors * e.values.asDiagonal() * e.vectors.transpose();
    CHECK((R - A).norm() <= 1e-12 * (1.0 + A.norm()));
    CHECK((e.vectors.transpose() * e.vectors - Mat::Identity(n, n)).norm() <= 1e-12);
    for (int i = 0; i + 1 < n; ++i) CHECK(e.values[i] >= e.values[i + 1]);
  }
}

TEST_CASE("proj_psd clips eigenvalues and satisfies the Moreau identity") {
  Mat D = Mat::Zero(2, 2);
  D(0, 0) = 5.0;
  D(1, 1) = -3.0;
  const Mat P = proj_psd(D);
  CHECK(P(0, 0) == doctest::Approx(5.0));
  CHECK(P(1, 1) == doctest::Approx(0.0));

  std::mt19937 rng(23);
  for (int t = 0; t < 100; ++t) {
    const int n = 2 + t % 10;
    const Mat A = random_symmetric(n, rng, 2.0);
    const Mat Ap = proj_psd(A);
    const Mat Am = proj_psd(Mat(-A));
    CHECK((A - (Ap - Am)).norm() <= 1e-10 * (1.0 + A.norm()));
    CHECK(std::abs((Ap.array() * Am.array()).sum()) <= 1e-9 * (1.0 + A.squaredNorm()));
    CHECK(sym_eig(Ap).values.minCoeff() >= -1e-12);
    CHECK((proj_psd(Ap) - Ap).norm() <= 1e-9 * (1.0 + Ap.norm()));
  }
}

TEST_CASE("proj_box honors infinite bounds") {
  Vec x(4), lo(4), hi(4);
  x << -2, 0.5, 3, 7;
  lo << 0, 0, -kInf, 5;
  hi << 1, 1, 2, kInf;
  const Vec p = proj_box(x, lo, hi);
  CHECK(p[0] == 0.0);
  CHECK(p[1] == 0.5);
  CHECK(p[2] == 2.0);
  CHECK(p[3] == 7.0);

  Mat M(2, 2), L(2, 2), U(2, 2);
  M << -1, 4, 0, 2;
  L.setConstant(-kInf);
  U.setConstant(3.0);
  const Mat Pm = proj_box(M, L, U);
  CHECK(Pm(0, 1) == 3.0);
  CHECK(Pm(0, 0) == -1.0);
}

TEST_CASE("pcg solves a diagonal system to the expected inverse-scaled vector") {
  Vec d(5);
  d << 1, 2, 3, 4, 5;
  auto apply = [&](const Vec& v) { return Vec(d.cwiseProduct(v)); };
  const PcgResult r = pcg_solve(apply, Vec::Ones(5), d, 1e-12, 100);
  REQUIRE(r.status == PcgStatus::converged);
  Vec expect(5);
  expect << 1.0, 0.5, 1.0 / 3.0, 0.25, 0.2;
  CHECK((r.x - expect).lpNorm<Eigen::Infinity>() <= 1e-12);
  CHECK(r.iterations <= 5);
}

TEST_CASE("pcg on the identity converges in one iteration") {
  auto apply = [](const Vec& v) { return v; };
  Vec rhs(3);
  rhs << 1, -2, 4;
  const PcgResult r = pcg_solve(apply, rhs, Vec::Ones(3), 1e-14, 10);
  CHECK(r.status == PcgStatus::converged);
  CHECK(r.iterations == 1);
  CHECK((r.x - rhs).norm() <= 1e-13);
}

TEST_CASE("pcg reports breakdown on zero curvature, max_iterations when starved") {
  auto zero_op = [](const Vec& v) { return Vec(Vec::Zero(v.size())); };
  const PcgResult r = pcg_solve(zero_op, Vec::Ones(3), Vec::Ones(3), 1e-10, 10);
  CHECK(r.status == PcgStatus::breakdown);

  std::mt19937 rng(29);
  Mat G(20, 6);
  std::normal_distribution<double> g;
  for (int i = 0; i < G.size(); ++i) G.data()[i] = g(rng);
  // Ill-conditioned SPD system, absurdly tight budget.
  Mat M = G.transpose() * G + 1e-12 * Mat::Identity(6, 6);
  auto apply = [&](const Vec& v) { return Vec(M * v); };
  const PcgResult r2 = pcg_solve(apply, Vec::Ones(6), M.diagonal(), 1e-15, 1);
  CHECK(r2.status != PcgStatus::converged);
}

TEST_CASE("dense cholesky solves and flags indefinite input") {
  Mat M(2, 2);
  M << 4, 2, 2, 3;
  DenseCholesky chol(M);
  REQUIRE(chol.ok());
  Vec rhs(2);
  rhs << 2, 3;
  const Vec x = chol.solve(rhs);
  CHECK(x[0] == doctest::Approx(0.0).epsilon(1e-14));
  CHECK(x[1] == doctest::Approx(1.0).epsilon(1e-14));
  CHECK((M * x - rhs).norm() <= 1e-14);

  Mat Ind(2, 2);
  Ind << 1, 2, 2, 1;
  CHECK_FALSE(DenseCholesky(Ind).ok());
}

TEST_CASE("pcg agrees with a direct solve on random SPD systems") {
  std::mt19937 rng(31);
  std::normal_distribution<double> g;
  for (int t = 0; t < 50; ++t) {
    const int n = 3 + t % 12;
    Mat G(n + 5, n);
    for (int i = 0; i < G.size(); ++i) G.data()[i] = g(rng);
    const Mat M = G.transpose() * G + 0.1 * Mat::Identity(n, n);
    Vec rhs(n);
    for (int i = 0; i < n; ++i) rhs[i] = g(rng);
    DenseCholesky chol(M);
    REQUIRE(chol.ok());
    const Vec xd = chol.solve(rhs);
    auto apply = [&](const Vec& v) { return Vec(M * v); };
    const PcgResult r = pcg_solve(apply, rhs, M.diagonal(), 1e-12 * rhs.norm(), 10 * n);
    REQUIRE(r.status == PcgStatus::converged);
    CHECK((r.x - xd).norm() <= 1e-8 * (1.0 + xd.norm()));
  }
}

TEST_CASE("kron lays out blocks of scaled copies") {
  Mat A(2, 2), B(1, 2);
  A << 1, 2, 3, 4;
  B << 10, 20;
  const Mat K = kron(A, B);
  REQUIRE(K.rows() == 2);
  REQUIRE(K.cols() == 4);
  CHECK(K(0, 0) == 10);
  CHECK(K(0, 1) == 20);
  CHECK(K(0, 2) == 20);
  CHECK(K(0, 3) == 40);
  CHECK(K(1, 0) == 30);
  CHECK(K(1, 3) == 80);
}
