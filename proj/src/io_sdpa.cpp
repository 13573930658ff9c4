#include <cctype>
#include <cerrno>
#include <cstdlib>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>
#include <vector>

#include "sdpal/io.hpp"

namespace sdpal {

namespace {

// Allocation guards: inputs implying more dense storage than this are
// rejected up front so that corrupt headers cannot drive the process into
// out-of-memory territory.
constexpr long kMaxRows = 1'000'000;
constexpr long kMaxBlocks = 100'000;
constexpr long kMaxBlockSize = 50'000;
constexpr long kMaxDenseEntries = 20'000'000;
constexpr long kMaxSparseCells = 50'000'000;  // blocks x rows bookkeeping

// Token stream over the input text: tracks line numbers, skips comment lines
// (first nonblank character '*' or '"'), and treats braces, parentheses and
// commas as spacing so bracketed numeric lists parse transparently.
class Lexer {
 public:
  Lexer(const std::string& text, std::string origin)
      : in_(text), origin_(std::move(origin)) {}

  [[noreturn]] void fail(const std::string& what) const {
    throw std::runtime_error(origin_ + ":" + std::to_string(lineno_) + ": " + what);
  }

  // Next whitespace-delimited token, crossing line boundaries; false at EOF.
  bool next(std::string& tok) {
    for (;;) {
      while (pos_ < line_.size() && is_space(line_[pos_])) ++pos_;
      if (pos_ < line_.size()) break;
      if (!std::getline(in_, line_)) return false;
      ++lineno_;
      pos_ = 0;
      const auto first = line_.find_first_not_of(" \t\r\f\v");
      if (first != std::string::npos && (line_[first] == '*' || line_[first] == '"'))
        pos_ = line_.size();  // comment line
    }
    const size_t start = pos_;
    while (pos_ < line_.size() && !is_space(line_[pos_])) ++pos_;
    tok = line_.substr(start, pos_ - start);
    return true;
  }

  std::string need(const char* what) {
    std::string tok;
    if (!next(tok)) fail(std::string("unexpected end of input, expected ") + what);
    return tok;
  }

  long integer(const char* what) {
    const std::string tok = need(what);
    errno = 0;
    char* end = nullptr;
    const long v = std::strtol(tok.c_str(), &end, 10);
    if (errno != 0 || end != tok.c_str() + tok.size())
      fail(std::string("expected an integer for ") + what + ", got \"" + tok + "\"");
    return v;
  }

  double real(const char* what) {
    const std::string tok = need(what);
    errno = 0;
    char* end = nullptr;
    const double v = std::strtod(tok.c_str(), &end);
    if (errno == ERANGE || end != tok.c_str() + tok.size())
      fail(std::string("expected a number for ") + what + ", got \"" + tok + "\"");
    return v;
  }

  int lineno() const { return lineno_; }

 private:
  static bool is_space(char c) {
    return std::isspace(static_cast<unsigned char>(c)) || c == ',' || c == '{' ||
           c == '}' || c == '(' || c == ')';
  }

  std::istringstream in_;
  std::string origin_;
  std::string line_;
  size_t pos_ = 0;
  int lineno_ = 0;
};

}  // namespace

ProblemData parse_sdpa(const std::string& text, const std::string& origin, SdpaSign sign) {
  Lexer lex(text, origin);

  const long m = lex.integer("the number of constraint rows");
  if (m < 0 || m > kMaxRows) lex.fail("constraint count out of range: " + std::to_string(m));
  const long nblocks = lex.integer("the number of blocks");
  if (nblocks < 1 || nblocks > kMaxBlocks)
    lex.fail("block count out of range: " + std::to_string(nblocks));
  if (nblocks * (m + 1) > kMaxSparseCells)
    lex.fail("row and block counts imply an absurd allocation");

  BlockStructure blk;
  long dense_entries = 0;
  for (long j = 0; j < nblocks; ++j) {
    const long s = lex.integer("a block size");
    if (s == 0 || s > kMaxBlockSize || s < -kMaxBlockSize)
      lex.fail("block size out of range: " + std::to_string(s));
    Block b;
    b.kind = s > 0 ? BlockKind::psd : BlockKind::linear;
    b.size = static_cast<int>(s > 0 ? s : -s);
    dense_entries += b.kind == BlockKind::psd ? static_cast<long>(b.size) * b.size : b.size;
    if (dense_entries > kMaxDenseEntries) lex.fail("blocks imply an absurd allocation");
    blk.blocks.push_back(b);
  }

  ProblemData d = make_problem(blk, static_cast<int>(m), 0);
  for (long k = 0; k < m; ++k) d.b[k] = lex.real("a right-hand-side value");

  BlockVars F0 = BlockVars::zeros(blk);
  ConstraintAccumulator acc(blk, static_cast<int>(m));
  std::string tok;
  while (lex.next(tok)) {
    // First token of a record is already consumed; reparse it as the matrix
    // number and pull the remaining four fields.
    errno = 0;
    char* end = nullptr;
    const long matno = std::strtol(tok.c_str(), &end, 10);
    if (errno != 0 || end != tok.c_str() + tok.size())
      lex.fail("expected an integer matrix number, got \"" + tok + "\"");
    const long blkno = lex.integer("a block number");
    const long i = lex.integer("a row index");
    const long j = lex.integer("a column index");
    const double v = lex.real("an entry value");

    if (matno < 0 || matno > m) lex.fail("matrix number out of range: " + std::to_string(matno));
    if (blkno < 1 || blkno > nblocks) lex.fail("block number out of range: " + std::to_string(blkno));
    const Block& bb = blk.blocks[blkno - 1];
    if (i < 1 || j < 1 || i > bb.size || j > bb.size)
      lex.fail("entry indices (" + std::to_string(i) + ", " + std::to_string(j) +
               ") outside block " + std::to_string(blkno) + " of size " +
               std::to_string(bb.size));
    if (i > j) lex.fail("entries must satisfy i <= j");
    if (bb.kind == BlockKind::linear && i != j)
      lex.fail("vector blocks take diagonal entries only");

    const int bi = static_cast<int>(blkno - 1);
    const int ii = static_cast<int>(i - 1), jj = static_cast<int>(j - 1);
    if (matno == 0) {
      if (bb.kind == BlockKind::psd) {
        F0.blocks[bi](ii, jj) += v;
        if (ii != jj) F0.blocks[bi](jj, ii) += v;
      } else {
        F0.blocks[bi](ii, 0) += v;
      }
    } else {
      acc.add_entry(static_cast<int>(matno - 1), bi, ii, jj, v);
    }
  }

  d.At = acc.assemble();
  d.C = (-1.0) * F0;
  d.obj_sense = sign == SdpaSign::maximize_reported ? -1 : +1;
  d.name = origin;
  return d;
}

ProblemData read_sdpa(const std::string& path, SdpaSign sign) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open file: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_sdpa(buf.str(), path, sign);
}

}  // namespace sdpal
