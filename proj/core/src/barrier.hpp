#pragma once

#include "gradwave/constraints.hpp"
#include "gradwave/curve.hpp"

#include <optional>

namespace gradwave::detail {

struct BarrierResult {
  Matrix s;
  Matrix q1, q2;   ///< multipliers of the speed / acceleration bounds (operators at unit step)
  double gap = 0.0;
  int newton_steps = 0;
};

/// Minimizes 1/2 |s - c|^2 subject to |D s| <= a, |D2 s| <= b (per-sample norms of the
/// unit-step difference operators) and A s = v, by a feasible-start log-barrier method.
/// s0 must satisfy the bounds strictly and the affine constraints. Returns nothing if the
/// Newton iteration breaks down.
std::optional<BarrierResult> barrier_solve(const Matrix& c, double a, double b, NormMode mode,
                                           const AffineConstraintSet& affine, const Matrix& s0,
                                           double gap_tol, int max_newton = 400);

}  // namespace gradwave::detail
