#include "sdpal/problems.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <random>
#include <set>
#include <sstream>
#include <stdexcept>

namespace sdpal {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void sort_edges(std::vector<std::pair<int, int>>& edges) {
  for (auto& e : edges)
    if (e.first > e.second) std::swap(e.first, e.second);
  std::sort(edges.begin(), edges.end());
  edges.erase(std::unique(edges.begin(), edges.end()), edges.end());
}

std::string graph_tag(const char* base, const Graph& g) {
  std::ostringstream os;
  os << base << "(n=" << g.n << ",edges=" << g.edges.size() << ")";
  return os.str();
}

}  // namespace

Graph make_cycle(int n) {
  if (n < 3) throw std::invalid_argument("cycle graph needs n >= 3");
  Graph g;
  g.n = n;
  for (int i = 0; i + 1 < n; ++i) g.edges.emplace_back(i, i + 1);
  g.edges.emplace_back(0, n - 1);
  sort_edges(g.edges);
  return g;
}

Graph make_complete(int n) {
  Graph g;
  g.n = n;
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) g.edges.emplace_back(i, j);
  return g;
}

Graph make_empty(int n) {
  Graph g;
  g.n = n;
  return g;
}

Graph make_random_graph(int n, double density, unsigned seed) {
  Graph g;
  g.n = n;
  std::mt19937 rng(seed);
  std::uniform_real_distribution<double> coin(0.0, 1.0);
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j)
      if (coin(rng) < density) g.edges.emplace_back(i, j);
  return g;
}

Graph read_edge_list(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open graph file: " + path);
  Graph g;
  std::string line;
  int lineno = 0;
  long expected = -1;
  auto fail = [&](const std::string& what) {
    throw std::runtime_error(path + ":" + std::to_string(lineno) + ": " + what);
  };
  while (std::getline(in, line)) {
    ++lineno;
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos) continue;
    if (line[first] == '#' || line[first] == '%') continue;
    std::istringstream ls(line);
    if (expected < 0) {
      long m = 0;
      if (!(ls >> g.n >> m) || g.n <= 0 || m < 0) fail("expected header \"n m\"");
      expected = m;
      continue;
    }
    int i = 0, j = 0;
    if (!(ls >> i >> j)) fail("expected edge \"i j\"");
    if (i < 1 || j < 1 || i > g.n || j > g.n || i == j) fail("edge endpoints out of range");
    g.edges.emplace_back(i - 1, j - 1);
  }
  if (expected < 0) throw std::runtime_error(path + ": missing header line");
  if (static_cast<long>(g.edges.size()) != expected)
    throw std::runtime_error(path + ": header promised " + std::to_string(expected) +
                             " edges, found " + std::to_string(g.edges.size()));
  sort_edges(g.edges);
  return g;
}

ProblemData gen_theta(const Graph& g) {
  const int n = g.n;
  const int m = static_cast<int>(g.edges.size()) + 1;
  BlockStructure blk;
  blk.blocks.push_back({BlockKind::psd, n});
  ProblemData d = make_problem(blk, m, 0);
  d.C.blocks[0] = -Mat::Ones(n, n);

  ConstraintAccumulator acc(blk, m);
  int r = 0;
  for (const auto& [i, j] : g.edges) {
    acc.add_entry(r, 0, i, j, 1.0);
    d.b[r] = 0.0;
    ++r;
  }
  for (int i = 0; i < n; ++i) acc.add_entry(r, 0, i, i, 1.0);
  d.b[r] = 1.0;
  d.At = acc.assemble();
  d.obj_sense = -1;
  d.name = graph_tag("theta", g);
  return d;
}

ProblemData gen_thetaplus(const Graph& g) {
  ProblemData d = gen_theta(g);
  const int n = g.n;
  d.bounds[0].present = true;
  d.bounds[0].lower = Mat::Zero(n, n);
  d.bounds[0].upper = Mat::Constant(n, n, kInf);
  d.name = graph_tag("thetaplus", g);
  return d;
}

ProblemData gen_ncm(const Mat& G, const Mat& H) {
  const int n = static_cast<int>(G.rows());
  if (G.cols() != n || H.rows() != n || H.cols() != n)
    throw std::invalid_argument("gen_ncm: G and H must be square of equal size");
  const Mat Gs = symmetrize_input(G);
  const Mat Hs = symmetrize_input(H);
  const int nbar = svec_len(n);
  const int m = n + nbar;

  BlockStructure blk;
  blk.blocks.push_back({BlockKind::psd, n});
  blk.blocks.push_back({BlockKind::linear, 2 * nbar});
  ProblemData d = make_problem(blk, m, 0);
  const Vec h = svec(Hs);
  d.C.blocks[1].topRows(nbar) = h;
  d.C.blocks[1].bottomRows(nbar) = h;

  ConstraintAccumulator acc(blk, m);
  for (int i = 0; i < n; ++i) {
    acc.add_entry(i, 0, i, i, 1.0);
    d.b[i] = 1.0;
  }
  // Packed-coordinate misfit rows: svec(X) - x+ + x- = svec(G).
  const Vec g = svec(Gs);
  for (int j = 0; j < n; ++j) {
    for (int i = 0; i <= j; ++i) {
      const int k = svec_index(i, j);
      const int r = n + k;
      acc.add_entry(r, 0, i, j, i == j ? 1.0 : 0.5 * std::sqrt(2.0));
      acc.add_entry(r, 1, k, k, -1.0);
      acc.add_entry(r, 1, nbar + k, nbar + k, 1.0);
      d.b[r] = g[k];
    }
  }
  d.At = acc.assemble();
  d.name = "ncm(n=" + std::to_string(n) + ")";
  return d;
}

ProblemData gen_ncm(int n, unsigned seed) {
  std::mt19937 rng(seed);
  std::uniform_real_distribution<double> off(-1.0, 1.0);
  std::uniform_real_distribution<double> wt(0.1, 10.0);
  Mat G = Mat::Identity(n, n);
  Mat H = Mat::Zero(n, n);
  for (int j = 0; j < n; ++j) {
    for (int i = 0; i <= j; ++i) {
      if (i < j) G(i, j) = G(j, i) = off(rng);
      H(i, j) = H(j, i) = wt(rng);
    }
  }
  ProblemData d = gen_ncm(G, H);
  d.name = "ncm(n=" + std::to_string(n) + ",seed=" + std::to_string(seed) + ")";
  return d;
}

FapInstance make_random_fap(int n, double density, int k, unsigned seed) {
  FapInstance inst;
  inst.n = n;
  inst.k = k;
  std::mt19937 rng(seed);
  std::uniform_real_distribution<double> coin(0.0, 1.0);
  std::uniform_real_distribution<double> wt(0.5, 10.0);
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j)
      if (coin(rng) < density) inst.edges.push_back({i, j, wt(rng), coin(rng) < 0.3});
  if (inst.edges.empty()) inst.edges.push_back({0, 1, wt(rng), false});
  return inst;
}

ProblemData gen_fap(const FapInstance& inst, bool rows_form) {
  const int n = inst.n;
  const int k = inst.k;
  if (k < 2) throw std::invalid_argument("gen_fap: need k >= 2 channels");
  Mat W = Mat::Zero(n, n);
  for (const auto& e : inst.edges) {
    W(e.i, e.j) += e.w;
    W(e.j, e.i) += e.w;
  }
  const Vec we = W.rowwise().sum();
  const Mat Cobj = ((k - 1.0) / (2.0 * k)) * (Mat(we.asDiagonal()) - W) - 0.5 * Mat(we.asDiagonal());
  const double cut = -1.0 / (k - 1.0);

  int n_hard = 0;
  for (const auto& e : inst.edges) n_hard += e.hard ? 1 : 0;
  const int n_soft = static_cast<int>(inst.edges.size()) - n_hard;

  BlockStructure blk;
  blk.blocks.push_back({BlockKind::psd, n});
  const int m = rows_form ? n + n_hard : n;
  const int p = rows_form ? n_soft : 0;
  ProblemData d = make_problem(blk, m, p);
  d.C.blocks[0] = -Cobj;
  d.obj_sense = -1;

  ConstraintAccumulator acc(blk, m);
  for (int i = 0; i < n; ++i) {
    acc.add_entry(i, 0, i, i, 1.0);
    d.b[i] = 1.0;
  }
  if (rows_form) {
    ConstraintAccumulator rows(blk, p);
    int ra = n, rb = 0;
    for (const auto& e : inst.edges) {
      if (e.hard) {
        acc.add_entry(ra, 0, e.i, e.j, -1.0);
        d.b[ra] = -2.0 * cut;
        ++ra;
      } else {
        rows.add_entry(rb, 0, e.i, e.j, -1.0);
        d.l[rb] = -kInf;
        d.u[rb] = -2.0 * cut;
        ++rb;
      }
    }
    d.Bt = rows.assemble();
  } else {
    d.bounds[0].present = true;
    d.bounds[0].lower = Mat::Constant(n, n, -kInf);
    d.bounds[0].upper = Mat::Constant(n, n, kInf);
    for (const auto& e : inst.edges) {
      d.bounds[0].lower(e.i, e.j) = d.bounds[0].lower(e.j, e.i) = cut;
      if (e.hard) d.bounds[0].upper(e.i, e.j) = d.bounds[0].upper(e.j, e.i) = cut;
    }
  }
  d.At = acc.assemble();
  d.name = "fap(n=" + std::to_string(n) + ",k=" + std::to_string(k) +
           (rows_form ? ",rows)" : ")");
  return d;
}

EdmInstance make_random_edm(int n, int dim, double density, unsigned seed, double alpha) {
  EdmInstance inst;
  inst.alpha = alpha;
  std::mt19937 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  inst.points = Mat::Zero(dim, n);
  for (int j = 0; j < n; ++j)
    for (int i = 0; i < dim; ++i) inst.points(i, j) = unit(rng);
  // A spanning cycle keeps every point tied down; extra pairs are sampled.
  std::set<std::pair<int, int>> edges;
  for (int i = 0; i + 1 < n; ++i) edges.insert({i, i + 1});
  edges.insert({0, n - 1});
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j)
      if (unit(rng) < density) edges.insert({i, j});
  inst.edges.assign(edges.begin(), edges.end());
  return inst;
}

ProblemData gen_edm(const EdmInstance& inst) {
  const int n = static_cast<int>(inst.points.cols());
  const int me = static_cast<int>(inst.edges.size());
  const int m = me + 1;
  BlockStructure blk;
  blk.blocks.push_back({BlockKind::psd, n});
  blk.blocks.push_back({BlockKind::linear, 2 * me});
  ProblemData d = make_problem(blk, m, 0);
  d.C.blocks[0] = -inst.alpha * Mat::Identity(n, n);
  d.C.blocks[1] = Mat::Ones(2 * me, 1);

  ConstraintAccumulator acc(blk, m);
  for (int e = 0; e < me; ++e) {
    const auto [i, j] = inst.edges[e];
    acc.add_entry(e, 0, i, i, 1.0);
    acc.add_entry(e, 0, j, j, 1.0);
    acc.add_entry(e, 0, i, j, -1.0);
    acc.add_entry(e, 1, e, e, -1.0);
    acc.add_entry(e, 1, me + e, me + e, 1.0);
    d.b[e] = (inst.points.col(i) - inst.points.col(j)).squaredNorm();
  }
  acc.add_dense(me, 0, Mat::Ones(n, n));
  d.b[me] = 0.0;
  d.At = acc.assemble();
  d.recommended_tol = 1e-4;
  d.name = "edm(n=" + std::to_string(n) + ",pairs=" + std::to_string(me) + ")";
  return d;
}

ProblemData gen_qap(const Mat& A, const Mat& B) {
  const int n = static_cast<int>(A.rows());
  if (A.cols() != n || B.rows() != n || B.cols() != n)
    throw std::invalid_argument("gen_qap: A and B must be square of equal size");
  const double a_scale = std::max(1.0, A.norm());
  const double b_scale = std::max(1.0, B.norm());
  const int N = n * n;
  const int m = 3 * (n * (n + 1) / 2 - 1) + 1;

  BlockStructure blk;
  blk.blocks.push_back({BlockKind::psd, N});
  ProblemData d = make_problem(blk, m, 0);
  d.C.blocks[0] = symmetrize_input(kron(B / b_scale, A / a_scale));
  d.bounds[0].present = true;
  d.bounds[0].lower = Mat::Zero(N, N);
  d.bounds[0].upper = Mat::Constant(N, N, kInf);
  d.obj_scale = a_scale * b_scale;

  ConstraintAccumulator acc(blk, m);
  int r = 0;
  // Diagonal-sum rows: the inner (k, l) entries of the diagonal blocks add up
  // to the identity.  The (n-1, n-1) row is appended last instead.
  for (int k = 0; k < n; ++k) {
    for (int l = k; l < n; ++l) {
      if (k == n - 1 && l == n - 1) continue;
      for (int i = 0; i < n; ++i) acc.add_entry(r, 0, i * n + k, i * n + l, 1.0);
      d.b[r] = k == l ? 1.0 : 0.0;
      ++r;
    }
  }
  // Block trace rows: tr(Y^{ij}) vanishes off the diagonal and is 1 on it.
  for (int i = 0; i < n; ++i) {
    for (int j = i; j < n; ++j) {
      if (i == n - 1 && j == n - 1) continue;
      for (int t = 0; t < n; ++t) acc.add_entry(r, 0, i * n + t, j * n + t, 1.0);
      d.b[r] = i == j ? 1.0 : 0.0;
      ++r;
    }
  }
  // Block sum rows: every block of the lifted matrix sums to one.
  for (int i = 0; i < n; ++i) {
    for (int j = i; j < n; ++j) {
      if (i == n - 1 && j == n - 1) continue;
      if (i == j) {
        for (int s = 0; s < n; ++s)
          for (int t = s; t < n; ++t) acc.add_entry(r, 0, i * n + s, i * n + t, 1.0);
        d.b[r] = 1.0;
      } else {
        for (int s = 0; s < n; ++s)
          for (int t = 0; t < n; ++t) acc.add_entry(r, 0, i * n + s, j * n + t, 1.0);
        d.b[r] = 2.0;
      }
      ++r;
    }
  }
  for (int i = 0; i < n; ++i) acc.add_entry(r, 0, i * n + n - 1, i * n + n - 1, 1.0);
  d.b[r] = 1.0;
  d.At = acc.assemble();
  d.name = "qap(n=" + std::to_string(n) + ")";
  return d;
}

ProblemData gen_qap(int n, unsigned seed) {
  std::mt19937 rng(seed);
  std::uniform_int_distribution<int> wt(0, 9);
  Mat A = Mat::Zero(n, n), B = Mat::Zero(n, n);
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      A(i, j) = A(j, i) = wt(rng);
      B(i, j) = B(j, i) = wt(rng);
    }
  }
  ProblemData d = gen_qap(A, B);
  d.name = "qap(n=" + std::to_string(n) + ",seed=" + std::to_string(seed) + ")";
  return d;
}

}  // namespace sdpal
