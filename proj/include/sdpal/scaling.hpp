#pragma once

#include "sdpal/residuals.hpp"

namespace sdpal {

// Row/column equilibration of the problem data: every constraint row of A and
// B is normalized to unit packed norm, then b and C are brought to unit scale
// with the primal variable rescaled along.  All iterates of the solver live in
// the scaled space; reporting and stopping happen in original units.
struct Scaling {
  bool enabled = false;
  Vec row_a;  // size m: scaled row k = row_a[k] * original row k
  Vec row_b;  // size p
  double b_scale = 1.0;
  double c_scale = 1.0;
};

Scaling make_scaling(const ProblemData& d, bool enable);

// The equivalent problem the iterations run on.
ProblemData apply_scaling(const ProblemData& d, const Scaling& s);

// Maps an iterate of the scaled problem back to original units.
IterateState unscale_state(const Scaling& s, const IterateState& st);

// Inverse map, for warm starts given in original units.
IterateState scale_state(const Scaling& s, const IterateState& st);

}  // namespace sdpal
