#pragma once

#include "gradwave/constraints.hpp"
#include "gradwave/curve.hpp"

#include <optional>
#include <utility>
#include <vector>

namespace gradwave {

/// Dual variables of the projection: q1 for the speed bound, q2 for the acceleration
/// bound, (y1, y2) the extrapolated point the next gradient step is taken from.
struct DualState {
  Matrix q1, q2;
  Matrix y1, y2;
  int k = 0;
};

struct ProjectionSettings {
  int n_it = 5000;
  /// Gradient step; defaults to 1/L with L from lipschitz_constant.
  std::optional<double> step;
  /// Relative tolerance on the speed and acceleration bounds.
  double feasibility_tol = 1e-6;
  /// Affine residual tolerance, scaled by max(1, |v|_inf).
  double affine_tol = 1e-8;
  /// Keep every primal iterate s(q^k) (needed by convergence_certificate).
  bool track_iterates = false;

  /// Run the iteration on the time-rescaled problem (difference operators at unit step,
  /// bounds alpha*dt and beta*dt^2). Same minimizer, much better scaled dual.
  bool normalize_time = true;
  /// Warm start the dual from a chain of coarser time grids (each level runs up to n_it).
  bool coarse_to_fine = false;
  Index coarse_min_size = 64;
  /// If the last iterate still violates the bounds, shrink it towards a constant curve
  /// that satisfies the affine constraints until it is feasible.
  bool restore_feasibility = true;
  /// If the last iterate misses the tolerances, finish with a barrier Newton solve started
  /// from the restored curve, until its duality gap is below polish_gap_tol times the
  /// objective 1/2 |s_start - c|^2 at the start.
  bool polish = true;
  double polish_gap_tol = 1e-10;

  /// Stop once the bounds hold and d(s, c) moved less than stagnation_tol (relative)
  /// over the last stagnation_window iterations.
  bool stop_when_converged = true;
  double stagnation_tol = 1e-9;
  int stagnation_window = 50;
  /// Residuals and the dual objective are evaluated every check_every iterations.
  int check_every = 1;
  /// Power-iteration cap for the Lipschitz constant (the analytic bound is used past it).
  int power_iters = 500;

  void validate() const;
};

struct ProjectionResult {
  explicit ProjectionResult(DiscreteCurve c) : curve(std::move(c)) {}

  DiscreteCurve curve;
  double distance = 0.0;             ///< sqrt(sum |s_i - c_i|^2 dt)
  double distance_normalized = 0.0;  ///< coupling_bound(s, c)
  FeasibilityReport residuals;       ///< of the returned curve
  FeasibilityReport raw_residuals;   ///< of the last iterate, before restoration
  double restoration_scale = 1.0;    ///< contraction applied by restoration (1 = none)
  bool restored = false;
  bool converged = false;            ///< returned curve meets all tolerances
  bool iteration_converged = false;  ///< last iterate met the tolerances without restoration
  bool polished = false;             ///< returned curve comes from the Newton finish
  int newton_steps = 0;
  double duality_gap = 0.0;          ///< of the Newton finish, in the units of the iteration
  int iterations = 0;                ///< on the full-resolution grid
  int coarse_iterations = 0;         ///< summed over the warm-start levels
  std::vector<Index> level_sizes;    ///< coarse grids used, coarsest first
  double lipschitz = 0.0;
  double step = 0.0;
  double time_unit = 1.0;            ///< step the difference operators were scaled with
  DualState dual;                    ///< in the units of the iteration (see time_unit)
  DualState initial_dual;
  std::vector<double> dual_objective_history;
  std::vector<double> iterate_distances;  ///< d(s(q^k), c) at each check
  std::vector<Matrix> iterates;           ///< s(q^k), k = 1.. (track_iterates only)
};

/// s*(q1, q2) = P_A(c - Mdot^* q1 - Mddot^* q2), with the operators at the curve's dt.
DiscreteCurve primal_from_dual(const VectorSeries& q1, const VectorSeries& q2,
                               const DiscreteCurve& c, const AffineSolver& solver);

/// Gradient of the negated smooth dual part F~(q) = -F(q), which is -(Mdot s*, Mddot s*).
/// A descent step on F~ is therefore q - t * grad = q + t (Mdot s*, Mddot s*).
std::pair<VectorSeries, VectorSeries> grad_dual(const VectorSeries& q1, const VectorSeries& q2,
                                                const DiscreteCurve& c,
                                                const AffineSolver& solver);

/// F~(q) = -( <Mdot s*, q1> + <Mddot s*, q2> + 1/2 |s* - c|^2 ), the convex smooth part.
double dual_smooth_value(const VectorSeries& q1, const VectorSeries& q2, const DiscreteCurve& c,
                         const AffineSolver& solver);

/// Full dual objective (to be maximized): -F~(q) - alpha |q1|_* - beta |q2|_*.
double dual_objective(const VectorSeries& q1, const VectorSeries& q2, const DiscreteCurve& c,
                      const KinematicLimits& limits, const AffineSolver& solver);

/// Proximal map of threshold * dual_norm: soft thresholding (RV) or per-sample group
/// soft thresholding (RIV).
Matrix prox_dual(const Matrix& q, double threshold, NormMode mode);

/// Euclidean projection of c onto {speed <= alpha, acceleration <= beta} intersected
/// with the affine set. Throws NumericFailure if the iteration produces NaN.
ProjectionResult project_curve(const DiscreteCurve& c, const KinematicLimits& limits,
                               const AffineConstraintSet& affine,
                               const ProjectionSettings& settings = {});
ProjectionResult project_curve(const DiscreteCurve& c, const KinematicLimits& limits,
                               const ProjectionSettings& settings = {});

struct CertificateReport {
  bool trivial = false;            ///< reference dual is zero and every iterate sits on it
  std::vector<double> sq_distances;  ///< |s^k - s_ref|^2, k = 1..K
  std::vector<double> ratios;        ///< k^2 |s^k - s_ref|^2 / (2 L |q^0 - q*|^2)
  double max_ratio = 0.0;
  int worst_k = 0;
  double slope = 0.0;              ///< least-squares slope of log |s^k - s_ref| vs log k
  double denominator = 0.0;        ///< 2 L |q^0 - q*|^2
};

/// Checks the O(1/k^2) bound on the primal iterates of `run` against a high-accuracy
/// `reference` solved in the same units. The slope is fitted over k in [k_lo, k_hi].
/// Throws InvalidArgument if run has no iterates or the reference is neither converged
/// nor polished.
CertificateReport convergence_certificate(const ProjectionResult& run,
                                          const ProjectionResult& reference, int k_lo = 10,
                                          int k_hi = 0);

}  // namespace gradwave
