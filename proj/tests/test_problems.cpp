#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>
#include <random>

#include "sdpal/phase2.hpp"
#include "sdpal/problems.hpp"

using namespace sdpal;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

SolverParams quiet(double tol) {
  SolverParams prm;
  prm.print_level = 0;
  prm.tol = tol;
  return prm;
}

// Writes `text` to a fresh temp file and returns its path.
std::string write_temp(const std::string& text) {
  static int counter = 0;
  std::string path = "/tmp/sdpal_graph_" + std::to_string(counter++) + ".txt";
  std::ofstream out(path);
  out << text;
  return path;
}

}  // namespace

TEST_CASE("graph builders produce sorted unique edge lists") {
  const Graph c5 = make_cycle(5);
  CHECK(c5.n == 5);
  REQUIRE(c5.edges.size() == 5);
  CHECK(c5.edges.front() == std::make_pair(0, 1));
  CHECK(c5.edges.back() == std::make_pair(3, 4));
  for (size_t e = 1; e < c5.edges.size(); ++e) CHECK(c5.edges[e - 1] < c5.edges[e]);

  CHECK_THROWS(make_cycle(2));
  CHECK(make_complete(4).edges.size() == 6);
  CHECK(make_empty(7).edges.empty());

  const Graph r1 = make_random_graph(10, 0.4, 3);
  const Graph r2 = make_random_graph(10, 0.4, 3);
  CHECK(r1.edges == r2.edges);
  for (const auto& [i, j] : r1.edges) {
    CHECK(i < j);
    CHECK(j < 10);
  }
}

TEST_CASE("edge list files parse with comments and fail with line numbers") {
  const std::string good = write_temp(
      "# a comment\n"
      "% another\n"
      "4 3\n"
      "1 2\n"
      "\n"
      "2 3\n"
      "1 4\n");
  const Graph g = read_edge_list(good);
  CHECK(g.n == 4);
  REQUIRE(g.edges.size() == 3);
  CHECK(g.edges[0] == std::make_pair(0, 1));
  CHECK(g.edges[2] == std::make_pair(1, 2));

  CHECK_THROWS(read_edge_list("/tmp/definitely_missing_graph_file.txt"));

  const std::string bad_header = write_temp("oops\n1 2\n");
  CHECK_THROWS_WITH_AS(read_edge_list(bad_header), doctest::Contains(":1:"),
                       std::runtime_error);

  const std::string bad_edge = write_temp("3 1\n1 5\n");
  CHECK_THROWS_WITH_AS(read_edge_list(bad_edge), doctest::Contains(":2:"),
                       std::runtime_error);

  const std::string bad_count = write_temp("3 2\n1 2\n");
  CHECK_THROWS(read_edge_list(bad_count));
}

TEST_CASE("independence-number relaxation: structure") {
  const Graph g = make_cycle(5);
  const ProblemData d = gen_theta(g);
  CHECK(d.m() == 6);
  CHECK(d.p() == 0);
  CHECK(d.blk.count() == 1);
  CHECK(d.C.blocks[0].isApprox(-Mat::Ones(5, 5)));
  CHECK(d.obj_sense == -1);
  CHECK(d.name.find("theta(n=5") == 0);

  // Edge rows pick out single off-diagonal entries; the trace row closes the list.
  BlockVars X = BlockVars::zeros(d.blk);
  X.blocks[0] = Mat::Identity(5, 5) / 5.0;
  X.blocks[0](0, 1) = X.blocks[0](1, 0) = 0.25;
  const Vec ax = apply_A(d, X);
  CHECK(ax[0] == doctest::Approx(0.5).epsilon(1e-14));  // edge (0,1): both triangles
  for (int r = 1; r < 5; ++r) CHECK(ax[r] == 0.0);
  CHECK(ax[5] == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(d.b[5] == 1.0);
  CHECK(d.b.head(5).isZero());
}

TEST_CASE("independence-number relaxation: known values on complete and empty graphs") {
  // Complete graph: only diagonal survives, trace 1 -> value 1.
  const SolveResult kc = solve(gen_theta(make_complete(4)), quiet(1e-6));
  CHECK(kc.reason == StopReason::converged);
  CHECK(kc.res.eta <= 1e-6);
  CHECK(std::abs(gen_theta(make_complete(4)).reported_objective(kc.res.pobj) - 1.0) <= 1e-4);

  // Empty graph: the all-pairs matrix (1/n) * ones is optimal -> value n.
  const SolveResult ke = solve(gen_theta(make_empty(4)), quiet(1e-6));
  CHECK(ke.reason == StopReason::converged);
  CHECK(std::abs(gen_theta(make_empty(4)).reported_objective(ke.res.pobj) - 4.0) <= 1e-4);
}

TEST_CASE("nonnegative variant can only shrink the relaxation value") {
  const Graph g = make_random_graph(8, 0.4, 11);
  const ProblemData dt = gen_theta(g);
  const ProblemData dp = gen_thetaplus(g);
  CHECK(dp.bounds[0].present);
  CHECK(dp.bounds[0].lower.isZero());
  CHECK(!dt.bounds.empty());
  CHECK(!dt.bounds[0].present);

  const SolveResult rt = solve(dt, quiet(1e-6));
  const SolveResult rp = solve(dp, quiet(1e-6));
  CHECK(rt.res.eta <= 1e-6);
  CHECK(rp.res.eta <= 1e-6);
  const double vt = dt.reported_objective(rt.res.pobj);
  const double vp = dp.reported_objective(rp.res.pobj);
  CHECK(vp <= vt + 1e-4);
  CHECK(vp >= 1.0 - 1e-4);  // any graph admits a singleton independent set
}

TEST_CASE("correlation-fit rows reproduce the packed misfit identity") {
  const ProblemData d = gen_ncm(5, 77);
  const int n = 5, nbar = svec_len(n);
  CHECK(d.m() == n + nbar);
  REQUIRE(d.blk.count() == 2);
  CHECK(d.blk.blocks[1].kind == BlockKind::linear);
  CHECK(d.blk.blocks[1].size == 2 * nbar);
  CHECK(d.C.blocks[0].isZero());
  CHECK(d.C.blocks[1].topRows(nbar).isApprox(d.C.blocks[1].bottomRows(nbar)));
  CHECK(d.C.blocks[1].minCoeff() >= 0.1);

  // A(X) rows n.. must equal svec(Xpsd) - xplus + xminus for any iterate.
  BlockVars X = BlockVars::zeros(d.blk);
  Mat M(n, n);
  for (int j = 0; j < n; ++j)
    for (int i = 0; i < n; ++i) M(i, j) = 0.1 * (i + 1) + 0.01 * (j + 1);
  X.blocks[0] = symmetrize_input(M);
  for (int k = 0; k < 2 * nbar; ++k) X.blocks[1](k, 0) = 0.05 * k;
  const Vec ax = apply_A(d, X);
  const Vec expect = svec(X.blocks[0]) - X.blocks[1].col(0).head(nbar) +
                     X.blocks[1].col(0).tail(nbar);
  CHECK((ax.tail(nbar) - expect).lpNorm<Eigen::Infinity>() <= 1e-13);
  for (int i = 0; i < n; ++i) CHECK(ax[i] == doctest::Approx(X.blocks[0](i, i)).epsilon(1e-14));
}

TEST_CASE("correlation fit of a matrix that is already a correlation matrix") {
  // G = I is itself a correlation matrix, so the misfit optimum is exactly 0
  // with X = I regardless of the positive weights.
  const Mat G = Mat::Identity(6, 6);
  const Mat H = Mat::Ones(6, 6);
  const ProblemData d = gen_ncm(G, H);
  const SolveResult r = solve(d, quiet(1e-6));
  CHECK(r.reason == StopReason::converged);
  CHECK(std::abs(r.res.pobj) <= 1e-5);
  CHECK((r.state.X.blocks[0] - Mat::Identity(6, 6)).lpNorm<Eigen::Infinity>() <= 1e-4);
}

TEST_CASE("channel-assignment relaxation: bounds form and rows form agree") {
  const FapInstance inst = make_random_fap(7, 0.5, 3, 5);
  int n_hard = 0;
  for (const auto& e : inst.edges) n_hard += e.hard ? 1 : 0;
  const int n_soft = static_cast<int>(inst.edges.size()) - n_hard;

  const ProblemData db = gen_fap(inst, false);
  const ProblemData dr = gen_fap(inst, true);
  CHECK(db.m() == 7);
  CHECK(db.p() == 0);
  CHECK(db.bounds[0].present);
  CHECK(dr.m() == 7 + n_hard);
  CHECK(dr.p() == n_soft);
  CHECK(!dr.bounds[0].present);

  const double cut = -0.5;  // k = 3 channels
  for (const auto& e : inst.edges) {
    CHECK(db.bounds[0].lower(e.i, e.j) == cut);
    CHECK(db.bounds[0].upper(e.i, e.j) == (e.hard ? cut : kInf));
  }

  const SolveResult rb = solve(db, quiet(1e-6));
  const SolveResult rr = solve(dr, quiet(1e-6));
  CHECK(rb.res.eta <= 1e-6);
  CHECK(rr.res.eta <= 1e-6);
  const double vb = db.reported_objective(rb.res.pobj);
  const double vr = dr.reported_objective(rr.res.pobj);
  CHECK(vb == doctest::Approx(vr).epsilon(2e-4));

  // Both encodings enforce the same edge conditions at their solutions.
  for (const auto& e : inst.edges) {
    CHECK(rb.state.X.blocks[0](e.i, e.j) >= cut - 1e-4);
    CHECK(rr.state.X.blocks[0](e.i, e.j) >= cut - 1e-4);
    if (e.hard) {
      CHECK(std::abs(rb.state.X.blocks[0](e.i, e.j) - cut) <= 1e-4);
      CHECK(std::abs(rr.state.X.blocks[0](e.i, e.j) - cut) <= 1e-4);
    }
  }
}

TEST_CASE("distance-recovery rows match their data on the generating points") {
  EdmInstance inst = make_random_edm(7, 3, 0.5, 9);
  const int n = 7, me = static_cast<int>(inst.edges.size());
  ProblemData d = gen_edm(inst);
  CHECK(d.m() == me + 1);
  CHECK(d.blk.blocks[1].size == 2 * me);
  CHECK(d.recommended_tol == 1e-4);
  CHECK(d.C.blocks[0].isApprox(-Mat::Identity(n, n)));
  CHECK(d.C.blocks[1].isApprox(Mat::Ones(2 * me, 1)));

  // Center the generating points; their Gram matrix then satisfies every row
  // exactly (distances are translation invariant, the last row needs centering).
  Mat P = inst.points;
  const Vec mean = P.rowwise().mean();
  P.colwise() -= mean;
  BlockVars X = BlockVars::zeros(d.blk);
  X.blocks[0] = P.transpose() * P;
  const Vec ax = apply_A(d, X);
  CHECK((ax - d.b).lpNorm<Eigen::Infinity>() <= 1e-12);
}

TEST_CASE("distance recovery solves to its recommended accuracy") {
  const EdmInstance inst = make_random_edm(6, 2, 0.4, 4);
  const ProblemData d = gen_edm(inst);
  const SolveResult r = solve(d, quiet(d.recommended_tol));
  CHECK(r.res.eta <= d.recommended_tol);

  // The centered Gram matrix of the true points is feasible with zero misfit,
  // so the optimum can only improve on its objective value.
  Mat P = inst.points;
  P.colwise() -= Vec(P.rowwise().mean());
  BlockVars X = BlockVars::zeros(d.blk);
  X.blocks[0] = P.transpose() * P;
  const double truth_obj = d.C.dot(X);
  CHECK(r.res.pobj <= truth_obj + 1e-3);
}

TEST_CASE("assignment relaxation rows hold on every permutation lifting") {
  const int n = 3;
  const ProblemData d = gen_qap(n, 2);
  CHECK(d.m() == 3 * (n * (n + 1) / 2 - 1) + 1);
  CHECK(d.bounds[0].present);
  CHECK(d.bounds[0].lower.isZero());
  CHECK(d.obj_scale >= 1.0);

  std::vector<int> perm(n);
  std::iota(perm.begin(), perm.end(), 0);
  do {
    Mat P = Mat::Zero(n, n);
    for (int i = 0; i < n; ++i) P(perm[i], i) = 1.0;
    Vec x(n * n);
    for (int i = 0; i < n; ++i)
      for (int k = 0; k < n; ++k) x[i * n + k] = P(k, i);
    BlockVars X = BlockVars::zeros(d.blk);
    X.blocks[0] = x * x.transpose();
    const Vec ax = apply_A(d, X);
    CHECK((ax - d.b).lpNorm<Eigen::Infinity>() <= 1e-12);
  } while (std::next_permutation(perm.begin(), perm.end()));
}

TEST_CASE("assignment relaxation: the two dropped rows are implied at the solution") {
  const int n = 3;
  const ProblemData d = gen_qap(n, 2);
  const SolveResult r = solve(d, quiet(1e-5));
  CHECK(r.res.eta <= 1e-5);

  // Dropped row one: trace of the last diagonal block equals 1.
  const Mat& Y = r.state.X.blocks[0];
  double block_trace = 0;
  for (int t = 0; t < n; ++t) block_trace += Y((n - 1) * n + t, (n - 1) * n + t);
  CHECK(block_trace == doctest::Approx(1.0).epsilon(1e-3));

  // Dropped row two: the last diagonal block sums to 1.
  double block_sum = 0;
  for (int s = 0; s < n; ++s)
    for (int t = 0; t < n; ++t) block_sum += Y((n - 1) * n + s, (n - 1) * n + t);
  CHECK(block_sum == doctest::Approx(1.0).epsilon(1e-3));

  // The relaxation value reads through the scaling metadata and lower-bounds
  // the best assignment cost.
  std::vector<int> perm(n);
  std::iota(perm.begin(), perm.end(), 0);
  std::mt19937 rng(2);
  std::uniform_int_distribution<int> wt(0, 9);
  Mat A = Mat::Zero(n, n), B = Mat::Zero(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) {
      A(i, j) = A(j, i) = wt(rng);
      B(i, j) = B(j, i) = wt(rng);
    }
  double best = kInf;
  do {
    double cost = 0;
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) cost += A(perm[i], perm[j]) * B(i, j);
    best = std::min(best, cost);
  } while (std::next_permutation(perm.begin(), perm.end()));
  CHECK(d.reported_objective(r.res.pobj) <= best + 1e-3);
}
