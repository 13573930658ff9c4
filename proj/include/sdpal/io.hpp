#pragma once

#include <string>

#include "sdpal/model.hpp"
#include "sdpal/phase2.hpp"

namespace sdpal {

// The SDPA sparse text format states a maximization of <F0, X>; the solver
// always minimizes <C, X> with C = -F0.  The flag only selects the sign of
// the REPORTED objective:
//   minimize_converted (default): report <C, X> itself (the converted
//                                 minimization value; negative for problems
//                                 the file states as maximizations of a
//                                 positive quantity).
//   maximize_reported:            report -<C, X>, the file's own objective.
enum class SdpaSign { minimize_converted, maximize_reported };

// Parses the SDPA sparse format from a string.  `origin` names the source in
// error messages ("origin:line: message").  Accepted grammar:
//   - comment lines start with '*' or '"' (skipped wherever they appear);
//   - the number of constraint rows m;
//   - the number of blocks, then that many nonzero block sizes (negative size
//     -s means a nonnegative vector block of length s);
//   - m right-hand-side values;
//   - entry records "matno blkno i j value" with 1-based indices, i <= j,
//     matno 0 for the objective and 1..m for constraint rows; vector blocks
//     take diagonal entries only (i == j); duplicate entries are summed.
// Braces, parentheses and commas are treated as spacing; numeric lists may
// span lines.  Every malformed input raises std::runtime_error with the
// offending line number; inputs implying absurd allocations are rejected.
ProblemData parse_sdpa(const std::string& text, const std::string& origin,
                       SdpaSign sign = SdpaSign::minimize_converted);
ProblemData read_sdpa(const std::string& path,
                      SdpaSign sign = SdpaSign::minimize_converted);

// Native JSON problem format.  Lossless: write followed by read reproduces
// every field of ProblemData bit for bit.  Layout (all indices 0-based):
//   {
//     "name": "...",                          // optional
//     "blocks": [{"kind": "s"|"l", "size": n}, ...],
//     "C": [[block, i, j, value], ...],       // symmetric entries, i <= j
//     "A": [row, row, ...],                   // row = [[block, i, j, value], ...]
//     "b": [numbers],
//     "B": [row, ...], "l": [...], "u": [...],  // optional trio (row bands)
//     "bounds": [{"block": k, "lower": x, "upper": x}, ...],   // optional;
//                 x is a scalar (broadcast) or a dense row-major nested array
//     "objective": {"sense": 1|-1, "scale": s, "constant": c},  // optional
//     "recommended_tol": t                    // optional
//   }
// "l"/"u" entries and bound scalars/entries admit the strings "inf"/"-inf".
// Constraint values in "A"/"B" are the packed coefficients used internally:
// for a psd block, an off-diagonal record [blk, i, j, v] contributes
// v/sqrt(2) to each of the two mirrored matrix entries (records produced by
// write_json always carry this convention, which is what makes the round
// trip exact).  Objective records in "C" are plain symmetric entries.
// Schema violations raise std::runtime_error naming the JSON path.
ProblemData parse_json(const std::string& text, const std::string& origin);
ProblemData read_json(const std::string& path);
std::string problem_json_text(const ProblemData& d);
void write_json(const std::string& path, const ProblemData& d);

// Result report: objective values, termination info, per-iteration history,
// and (optionally) the full primal/dual state.  Floating-point values are
// serialized with round-trip-exact precision.
std::string result_json_text(const SolveResult& r, const ProblemData& d,
                             bool include_state = true);
void write_result_json(const std::string& path, const SolveResult& r,
                       const ProblemData& d, bool include_state = true);

}  // namespace sdpal
