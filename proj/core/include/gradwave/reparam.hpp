#pragma once

#include "gradwave/constraints.hpp"
#include "gradwave/curve.hpp"
#include "gradwave/density.hpp"
#include "gradwave/projector.hpp"

#include <optional>
#include <vector>

namespace gradwave {

/// Geometric support of a curve: vertices, cumulative arc length and the corner vertices
/// where the traversal must come to rest.
struct SupportPath {
  Matrix vertices;
  std::vector<double> arclength;    ///< arclength[i] = length up to vertex i
  std::vector<Index> singular;      ///< sorted vertex indices
  std::vector<double> turning_deg;  ///< turning angle per vertex (0 at the ends)

  double length() const { return arclength.empty() ? 0.0 : arclength.back(); }
  Index size() const { return vertices.rows(); }
};

/// Coincident consecutive vertices are merged. The first vertex is always singular; the last
/// one is singular when end_at_rest is set. Throws if fewer than two distinct vertices remain.
SupportPath build_support(const Matrix& polyline, double angle_tol_deg = 5.0,
                          bool end_at_rest = true);

struct ReparamOptions {
  /// Target spacing of the nodes the speed profile is computed on; default alpha * dt / 4.
  std::optional<double> node_spacing;
};

struct ReparamResult {
  explicit ReparamResult(DiscreteCurve c) : curve(std::move(c)) {}

  DiscreteCurve curve;        ///< samples at t = j dt; the last one is the path end
  double duration = 0.0;      ///< T_rep of the continuous profile
  std::vector<double> sigma;  ///< arc length of each profile node
  std::vector<double> speed;  ///< speed of each profile node
};

/// Fastest traversal of the support under the speed and acceleration bounds, stopping at
/// singular vertices. RIV: |v| <= alpha, v^2 kappa <= beta, tangential budget
/// sqrt(beta^2 - (v^2 kappa)^2). RV: speed capped per axis along the tangent, acceleration
/// bounded in l2 by beta (which implies the per-axis bound). Where the sampled curve still
/// overshoots a bound (steps spanning several short segments) the profile is lowered locally
/// and recomputed.
ReparamResult time_optimal_reparam(const SupportPath& path, const KinematicLimits& limits,
                                   double dt, const ReparamOptions& options = {});

struct TraversalOptions {
  /// Support to reparameterize; defaults to the input curve's own samples.
  std::optional<Matrix> support;
  /// Density the histograms are compared against; defaults to the input curve's histogram.
  std::optional<TargetDensity> target;
  DensityGrid grid{6.0, 64};
  /// Sampling step for the histograms; defaults to the curve's dt.
  std::optional<double> sample_dt;
  double angle_tol_deg = 5.0;
  bool end_at_rest = true;
  ReparamOptions reparam;
  ProjectionSettings projection;
  std::optional<AffineConstraintSet> affine;
};

struct TraversalReport {
  double t_input = 0.0;
  double t_rep = 0.0;
  double t_projection = 0.0;
  double ratio = 0.0;  ///< t_rep / t_projection
  double rel_error_input = 0.0;
  double rel_error_projection = 0.0;
  double rel_error_reparam = 0.0;
  std::optional<ProjectionResult> projection;
  std::optional<ReparamResult> reparam;
};

TraversalReport compare_traversal(const DiscreteCurve& input, const KinematicLimits& limits,
                                  const TraversalOptions& options = {});

}  // namespace gradwave
