#include <cmath>
#include <fstream>
#include <json.hpp>
#include <limits>
#include <sstream>
#include <stdexcept>
#include <vector>

#include "sdpal/io.hpp"

namespace sdpal {

namespace {

using nlohmann::json;

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr long kMaxBlockSize = 50'000;
constexpr long kMaxDenseEntries = 20'000'000;
constexpr long kMaxRows = 1'000'000;

[[noreturn]] void fail(const std::string& origin, const std::string& path,
                       const std::string& what) {
  throw std::runtime_error(origin + ": " + path + ": " + what);
}

// ---- writing ---------------------------------------------------------------

json encode_extended(double v) {
  if (std::isnan(v)) throw std::runtime_error("cannot serialize NaN");
  if (v == kInf) return "inf";
  if (v == -kInf) return "-inf";
  return v;
}

double require_finite(double v, const char* what) {
  if (!std::isfinite(v)) throw std::runtime_error(std::string("cannot serialize non-finite ") + what);
  return v;
}

// Scalar when every entry matches, nested row-major arrays otherwise.
json encode_bound_matrix(const Mat& M) {
  const double first = M(0, 0);
  bool uniform = true;
  for (int c = 0; c < M.cols() && uniform; ++c)
    for (int r = 0; r < M.rows() && uniform; ++r) uniform = M(r, c) == first;
  if (uniform) return encode_extended(first);
  json rows = json::array();
  for (int r = 0; r < M.rows(); ++r) {
    json row = json::array();
    for (int c = 0; c < M.cols(); ++c) row.push_back(encode_extended(M(r, c)));
    rows.push_back(row);
  }
  return rows;
}

json dense_matrix(const Mat& M) {
  json rows = json::array();
  for (int r = 0; r < M.rows(); ++r) {
    json row = json::array();
    for (int c = 0; c < M.cols(); ++c) row.push_back(require_finite(M(r, c), "state entry"));
    rows.push_back(row);
  }
  return rows;
}

json dense_vector(const Vec& v) {
  json a = json::array();
  for (int k = 0; k < v.size(); ++k) a.push_back(require_finite(v[k], "state entry"));
  return a;
}

// Inverse of the packed upper-triangle position: q -> (i, j), i <= j.
std::pair<int, int> svec_coords(int q) {
  int j = static_cast<int>((std::sqrt(8.0 * q + 1.0) - 1.0) / 2.0);
  while (svec_len(j + 1) <= q) ++j;
  while (svec_len(j) > q) --j;
  return {q - svec_len(j), j};
}

json constraint_rows(const BlockStructure& blk, const std::vector<SpMat>& At, int rows) {
  std::vector<json> out(rows, json::array());
  for (int bj = 0; bj < blk.count(); ++bj) {
    const bool psd = blk.blocks[bj].kind == BlockKind::psd;
    for (int k = 0; k < At[bj].outerSize(); ++k) {
      for (SpMat::InnerIterator it(At[bj], k); it; ++it) {
        const auto [i, j] =
            psd ? svec_coords(static_cast<int>(it.row()))
                : std::pair<int, int>(static_cast<int>(it.row()), static_cast<int>(it.row()));
        out[k].push_back(json::array({bj, i, j, require_finite(it.value(), "coefficient")}));
      }
    }
  }
  json a = json::array();
  for (auto& row : out) a.push_back(std::move(row));
  return a;
}

// ---- reading ---------------------------------------------------------------

struct Reader {
  const std::string& origin;

  const json& member(const json& j, const std::string& path, const char* key) const {
    const auto it = j.find(key);
    if (it == j.end()) fail(origin, path, std::string("missing required key \"") + key + "\"");
    return *it;
  }

  long integer(const json& j, const std::string& path) const {
    if (!j.is_number_integer()) fail(origin, path, "expected an integer");
    return j.get<long>();
  }

  double number(const json& j, const std::string& path) const {
    if (!j.is_number()) fail(origin, path, "expected a number");
    return j.get<double>();
  }

  double extended(const json& j, const std::string& path) const {
    if (j.is_string()) {
      const std::string s = j.get<std::string>();
      if (s == "inf") return kInf;
      if (s == "-inf") return -kInf;
      fail(origin, path, "expected a number or \"inf\"/\"-inf\", got \"" + s + "\"");
    }
    return number(j, path);
  }

  const json& array(const json& j, const std::string& path) const {
    if (!j.is_array()) fail(origin, path, "expected an array");
    return j;
  }
};

struct Triplet5 {
  int block, i, j;
  double v;
};

Triplet5 read_triplet(const Reader& rd, const json& t, const std::string& path,
                      const BlockStructure& blk) {
  rd.array(t, path);
  if (t.size() != 4) fail(rd.origin, path, "expected [block, i, j, value]");
  const long bj = rd.integer(t[0], path + "/0");
  if (bj < 0 || bj >= blk.count()) fail(rd.origin, path + "/0", "block index out of range");
  const Block& b = blk.blocks[bj];
  const long i = rd.integer(t[1], path + "/1");
  const long j = rd.integer(t[2], path + "/2");
  if (i < 0 || j < 0 || i >= b.size || j >= b.size)
    fail(rd.origin, path, "entry indices outside the block");
  if (i > j) fail(rd.origin, path, "entries must satisfy i <= j");
  if (b.kind == BlockKind::linear && i != j)
    fail(rd.origin, path, "vector blocks take diagonal entries only");
  return {static_cast<int>(bj), static_cast<int>(i), static_cast<int>(j),
          rd.number(t[3], path + "/3")};
}

std::vector<SpMat> read_rows(const Reader& rd, const json& rows, const std::string& path,
                             const BlockStructure& blk) {
  std::vector<std::vector<Eigen::Triplet<double>>> trips(blk.count());
  for (size_t k = 0; k < rows.size(); ++k) {
    const std::string rp = path + "/" + std::to_string(k);
    rd.array(rows[k], rp);
    for (size_t e = 0; e < rows[k].size(); ++e) {
      const Triplet5 t =
          read_triplet(rd, rows[k][e], rp + "/" + std::to_string(e), blk);
      const int pos = blk.blocks[t.block].kind == BlockKind::psd ? svec_index(t.i, t.j) : t.i;
      trips[t.block].emplace_back(pos, static_cast<int>(k), t.v);
    }
  }
  std::vector<SpMat> out(blk.count());
  for (int bj = 0; bj < blk.count(); ++bj) {
    out[bj] = SpMat(blk.blocks[bj].vec_len(), static_cast<int>(rows.size()));
    out[bj].setFromTriplets(trips[bj].begin(), trips[bj].end());
  }
  return out;
}

Mat read_bound_matrix(const Reader& rd, const json& j, const std::string& path,
                      const Block& b) {
  if (!j.is_array()) return Mat::Constant(b.rows(), b.cols(), rd.extended(j, path));
  if (static_cast<int>(j.size()) != b.rows()) fail(rd.origin, path, "wrong number of rows");
  Mat M(b.rows(), b.cols());
  for (int r = 0; r < b.rows(); ++r) {
    const std::string rp = path + "/" + std::to_string(r);
    rd.array(j[r], rp);
    if (static_cast<int>(j[r].size()) != b.cols()) fail(rd.origin, rp, "wrong number of columns");
    for (int c = 0; c < b.cols(); ++c)
      M(r, c) = rd.extended(j[r][c], rp + "/" + std::to_string(c));
  }
  return M;
}

}  // namespace

std::string problem_json_text(const ProblemData& d) {
  json j;
  if (!d.name.empty()) j["name"] = d.name;
  json blocks = json::array();
  for (const Block& b : d.blk.blocks)
    blocks.push_back({{"kind", b.kind == BlockKind::psd ? "s" : "l"}, {"size", b.size}});
  j["blocks"] = blocks;

  json cents = json::array();
  for (int bj = 0; bj < d.blk.count(); ++bj) {
    const Block& b = d.blk.blocks[bj];
    if (b.kind == BlockKind::psd) {
      for (int c = 0; c < b.size; ++c)
        for (int r = 0; r <= c; ++r)
          if (const double v = d.C.blocks[bj](r, c); v != 0)
            cents.push_back(json::array({bj, r, c, require_finite(v, "objective entry")}));
    } else {
      for (int i = 0; i < b.size; ++i)
        if (const double v = d.C.blocks[bj](i, 0); v != 0)
          cents.push_back(json::array({bj, i, i, require_finite(v, "objective entry")}));
    }
  }
  j["C"] = cents;

  j["A"] = constraint_rows(d.blk, d.At, d.m());
  j["b"] = dense_vector(d.b);
  if (d.p() > 0) {
    j["B"] = constraint_rows(d.blk, d.Bt, d.p());
    json l = json::array(), u = json::array();
    for (int k = 0; k < d.p(); ++k) {
      l.push_back(encode_extended(d.l[k]));
      u.push_back(encode_extended(d.u[k]));
    }
    j["l"] = l;
    j["u"] = u;
  }

  json bounds = json::array();
  for (int bj = 0; bj < d.blk.count(); ++bj)
    if (d.block_bounded(bj))
      bounds.push_back({{"block", bj},
                        {"lower", encode_bound_matrix(d.bounds[bj].lower)},
                        {"upper", encode_bound_matrix(d.bounds[bj].upper)}});
  if (!bounds.empty()) j["bounds"] = bounds;

  j["objective"] = {{"sense", d.obj_sense},
                    {"scale", require_finite(d.obj_scale, "objective scale")},
                    {"constant", require_finite(d.obj_constant, "objective constant")}};
  if (d.recommended_tol != 0) j["recommended_tol"] = d.recommended_tol;
  return j.dump(2, ' ', false, nlohmann::json::error_handler_t::replace) + "\n";
}

ProblemData parse_json(const std::string& text, const std::string& origin) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw std::runtime_error(origin + ": " + e.what());
  }
  const Reader rd{origin};
  if (!j.is_object()) fail(origin, "/", "expected a JSON object");

  static const char* known[] = {"name", "blocks", "C",      "A",         "b",
                                "B",    "l",      "u",      "bounds",    "objective",
                                "recommended_tol"};
  for (const auto& [key, _] : j.items()) {
    bool ok = false;
    for (const char* k : known) ok = ok || key == k;
    if (!ok) fail(origin, "/" + key, "unknown key");
  }

  const json& jb = rd.array(rd.member(j, "/", "blocks"), "/blocks");
  BlockStructure blk;
  long dense_entries = 0;
  for (size_t k = 0; k < jb.size(); ++k) {
    const std::string path = "/blocks/" + std::to_string(k);
    if (!jb[k].is_object()) fail(origin, path, "expected an object");
    const json& kindj = rd.member(jb[k], path, "kind");
    if (!kindj.is_string() || (kindj != "s" && kindj != "l"))
      fail(origin, path + "/kind", "expected \"s\" or \"l\"");
    const long size = rd.integer(rd.member(jb[k], path, "size"), path + "/size");
    if (size < 1 || size > kMaxBlockSize) fail(origin, path + "/size", "block size out of range");
    Block b;
    b.kind = kindj == "s" ? BlockKind::psd : BlockKind::linear;
    b.size = static_cast<int>(size);
    dense_entries += b.kind == BlockKind::psd ? size * size : size;
    if (dense_entries > kMaxDenseEntries) fail(origin, path, "blocks imply an absurd allocation");
    blk.blocks.push_back(b);
  }
  if (blk.count() == 0) fail(origin, "/blocks", "at least one block is required");

  const json& ja = rd.array(rd.member(j, "/", "A"), "/A");
  const json& jvb = rd.array(rd.member(j, "/", "b"), "/b");
  if (ja.size() != jvb.size()) fail(origin, "/A", "row count differs from the length of \"b\"");
  if (static_cast<long>(ja.size()) > kMaxRows) fail(origin, "/A", "too many rows");

  const bool has_B = j.contains("B") || j.contains("l") || j.contains("u");
  if (has_B && !(j.contains("B") && j.contains("l") && j.contains("u")))
    fail(origin, "/B", "\"B\", \"l\" and \"u\" must be given together");

  ProblemData d = make_problem(blk, static_cast<int>(ja.size()),
                               has_B ? static_cast<int>(rd.array(j["B"], "/B").size()) : 0);
  d.At = read_rows(rd, ja, "/A", blk);
  for (size_t k = 0; k < jvb.size(); ++k)
    d.b[k] = rd.number(jvb[k], "/b/" + std::to_string(k));

  if (has_B) {
    const json& jB = j["B"];
    if (static_cast<long>(jB.size()) > kMaxRows) fail(origin, "/B", "too many rows");
    d.Bt = read_rows(rd, jB, "/B", blk);
    const json& jl = rd.array(j["l"], "/l");
    const json& ju = rd.array(j["u"], "/u");
    if (jl.size() != jB.size()) fail(origin, "/l", "length differs from the row count of \"B\"");
    if (ju.size() != jB.size()) fail(origin, "/u", "length differs from the row count of \"B\"");
    for (size_t k = 0; k < jB.size(); ++k) {
      d.l[k] = rd.extended(jl[k], "/l/" + std::to_string(k));
      d.u[k] = rd.extended(ju[k], "/u/" + std::to_string(k));
    }
  }

  if (j.contains("C")) {
    const json& jc = rd.array(j["C"], "/C");
    for (size_t k = 0; k < jc.size(); ++k) {
      const Triplet5 t = read_triplet(rd, jc[k], "/C/" + std::to_string(k), blk);
      if (blk.blocks[t.block].kind == BlockKind::psd) {
        d.C.blocks[t.block](t.i, t.j) += t.v;
        if (t.i != t.j) d.C.blocks[t.block](t.j, t.i) += t.v;
      } else {
        d.C.blocks[t.block](t.i, 0) += t.v;
      }
    }
  }

  if (j.contains("bounds")) {
    const json& jbs = rd.array(j["bounds"], "/bounds");
    for (size_t k = 0; k < jbs.size(); ++k) {
      const std::string path = "/bounds/" + std::to_string(k);
      if (!jbs[k].is_object()) fail(origin, path, "expected an object");
      const long bj = rd.integer(rd.member(jbs[k], path, "block"), path + "/block");
      if (bj < 0 || bj >= blk.count()) fail(origin, path + "/block", "block index out of range");
      if (d.bounds[bj].present) fail(origin, path + "/block", "duplicate bound for this block");
      d.bounds[bj].present = true;
      d.bounds[bj].lower = read_bound_matrix(rd, rd.member(jbs[k], path, "lower"),
                                             path + "/lower", blk.blocks[bj]);
      d.bounds[bj].upper = read_bound_matrix(rd, rd.member(jbs[k], path, "upper"),
                                             path + "/upper", blk.blocks[bj]);
    }
  }

  if (j.contains("objective")) {
    const json& jo = j["objective"];
    if (!jo.is_object()) fail(origin, "/objective", "expected an object");
    if (jo.contains("sense")) {
      const long s = rd.integer(jo["sense"], "/objective/sense");
      if (s != 1 && s != -1) fail(origin, "/objective/sense", "expected 1 or -1");
      d.obj_sense = static_cast<int>(s);
    }
    if (jo.contains("scale")) d.obj_scale = rd.number(jo["scale"], "/objective/scale");
    if (jo.contains("constant"))
      d.obj_constant = rd.number(jo["constant"], "/objective/constant");
  }
  if (j.contains("name")) {
    if (!j["name"].is_string()) fail(origin, "/name", "expected a string");
    d.name = j["name"].get<std::string>();
  }
  if (j.contains("recommended_tol"))
    d.recommended_tol = rd.number(j["recommended_tol"], "/recommended_tol");
  return d;
}

ProblemData read_json(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open file: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_json(buf.str(), path);
}

void write_json(const std::string& path, const ProblemData& d) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open file for writing: " + path);
  out << problem_json_text(d);
  if (!out) throw std::runtime_error("failed writing " + path);
}

std::string result_json_text(const SolveResult& r, const ProblemData& d, bool include_state) {
  json j;
  j["obj"] = {{"pobj", require_finite(r.res.pobj, "objective")},
              {"dobj", encode_extended(r.res.dobj)},
              {"reported", require_finite(d.reported_objective(r.res.pobj), "objective")}};
  j["info"] = {{"eta", r.res.eta},
               {"eta_primal", r.res.eta_primal},
               {"eta_dual", r.res.eta_dual},
               {"eta_cone", r.res.eta_cone},
               {"eta_box", r.res.eta_box},
               {"rel_gap", r.res.rel_gap},
               {"iterations_phase1", r.iterations_phase1},
               {"iterations_phase2", r.iterations_phase2},
               {"reason", to_string(r.reason)},
               {"seconds", r.seconds}};
  json hist = json::array();
  for (const RunRecord& rec : r.history)
    hist.push_back({{"phase", rec.phase},
                    {"iter", rec.iter},
                    {"pobj", rec.pobj},
                    {"dobj", encode_extended(rec.dobj)},
                    {"rel_gap", rec.rel_gap},
                    {"eta", rec.eta},
                    {"eta_primal", rec.eta_primal},
                    {"eta_dual", rec.eta_dual},
                    {"eta_cone", rec.eta_cone},
                    {"eta_box", rec.eta_box},
                    {"sigma", rec.sigma},
                    {"time", rec.time},
                    {"newton_steps", rec.newton_steps},
                    {"cg_iters", rec.cg_iters}});
  j["runhist"] = hist;
  if (include_state) {
    json X = json::array(), S = json::array(), Z = json::array();
    for (int bj = 0; bj < d.blk.count(); ++bj) {
      X.push_back(dense_matrix(r.state.X.blocks[bj]));
      S.push_back(dense_matrix(r.state.S.blocks[bj]));
      Z.push_back(dense_matrix(r.state.Z.blocks[bj]));
    }
    j["state"] = {{"X", X},           {"S", S},
                  {"Z", Z},           {"y", dense_vector(r.state.y)},
                  {"ybar", dense_vector(r.state.ybar)}, {"v", dense_vector(r.state.v)},
                  {"s", dense_vector(r.state.s)}};
  }
  return j.dump(2, ' ', false, nlohmann::json::error_handler_t::replace) + "\n";
}

void write_result_json(const std::string& path, const SolveResult& r, const ProblemData& d,
                       bool include_state) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open file for writing: " + path);
  out << result_json_text(r, d, include_state);
  if (!out) throw std::runtime_error("failed writing " + path);
}

}  // namespace sdpal
