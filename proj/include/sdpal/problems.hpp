#pragma once

#include <string>
#include <utility>
#include <vector>

#include "sdpal/model.hpp"

namespace sdpal {

// Simple undirected graph on vertices 0..n-1; edges are stored with i < j,
// sorted lexicographically, without duplicates.
struct Graph {
  int n = 0;
  std::vector<std::pair<int, int>> edges;
};

Graph make_cycle(int n);
Graph make_complete(int n);
Graph make_empty(int n);
Graph make_random_graph(int n, double density, unsigned seed);
// Text format: optional '#'/'%' comment lines, a header "n m", then m lines
// "i j" with 1-based endpoints.
Graph read_edge_list(const std::string& path);

// Lovasz theta relaxation: maximize <ones, X> over psd X with unit trace and
// X_ij = 0 on edges.  One row per edge followed by the trace row.
ProblemData gen_theta(const Graph& g);
// The same problem with the elementwise constraint X >= 0 added as a box.
ProblemData gen_thetaplus(const Graph& g);

// Nearest correlation matrix with an elementwise weighted l1 misfit: minimize
// ||H o (X - G)||_1 over correlation matrices X.  The misfit is split into
// nonnegative parts x+ and x- living in one linear block of length n(n+1).
ProblemData gen_ncm(const Mat& G, const Mat& H);
// Random symmetric G with unit diagonal and weights H in [0.1, 10].
ProblemData gen_ncm(int n, unsigned seed);

// Frequency assignment relaxation on a weighted graph with k channels.  Edge
// set E carries interference weights; the subset marked hard must be exactly
// at the cut value.  With rows_form=false the edge conditions enter as bounds
// on X; with rows_form=true they enter as extra equality and interval rows.
struct FapEdge {
  int i = 0, j = 0;
  double w = 0;
  bool hard = false;
};
struct FapInstance {
  int n = 0;
  int k = 3;
  std::vector<FapEdge> edges;
};
FapInstance make_random_fap(int n, double density, int k, unsigned seed);
ProblemData gen_fap(const FapInstance& inst, bool rows_form = false);

// Euclidean distance matrix recovery from squared distances on a subset of
// pairs, with an l1 misfit and a trace reward `alpha` that spreads the Gram
// matrix.  points is dim x n; edges index point pairs.
struct EdmInstance {
  Mat points;
  std::vector<std::pair<int, int>> edges;
  double alpha = 1.0;
};
EdmInstance make_random_edm(int n, int dim, double density, unsigned seed, double alpha = 1.0);
ProblemData gen_edm(const EdmInstance& inst);

// Quadratic assignment relaxation over the n^2 x n^2 lifted matrix Y with
// block trace, block sum, and diagonal-sum rows (two redundant rows dropped),
// elementwise Y >= 0, and cost kron(B, A) scaled to unit size.
ProblemData gen_qap(const Mat& A, const Mat& B);
ProblemData gen_qap(int n, unsigned seed);

}  // namespace sdpal
