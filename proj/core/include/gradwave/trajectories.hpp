#pragma once

#include "gradwave/constraints.hpp"
#include "gradwave/curve.hpp"
#include "gradwave/density.hpp"

#include <cstdint>
#include <numbers>
#include <optional>
#include <vector>

namespace gradwave {

/// k(u) = k_max sin(omega1 u) (cos(omega2 u), sin(omega2 u)), u in [0, param_span].
struct RosetteSpec {
  double k_max = 6.0;
  double omega1 = 1.419;
  double omega2 = 0.8233;
  /// Shape-parameter span; unset means 5 pi / omega1 (five petals, ending at the center).
  std::optional<double> param_span;
  double speed_fraction = 0.9;
  Index shape_samples = 200000;

  double span() const { return param_span ? *param_span : 5.0 * std::numbers::pi / omega1; }
  void validate() const;
};

/// c(t) = r(t / n) (cos 2 pi t, sin 2 pi t) for t in [0, n], with r tabulated on [0, 1].
struct SpiralSpec {
  std::vector<double> radius_table;  ///< r at u = j / (size - 1); strictly increasing
  int revolutions = 100;
  int direction = 1;                 ///< +1 counter-clockwise, -1 clockwise
  int samples_per_revolution = 720;

  /// r(u) = k_max u.
  static SpiralSpec archimedean(double k_max, int revolutions, Index table_size = 1025);
  double radius(double u) const;
  /// u with radius(u) = rho (rho clamped to the table range).
  double inverse_radius(double rho) const;
  void validate() const;
};

struct TspSpec {
  TargetDensity city_density;
  Index n_cities = 300;
  std::uint64_t seed = 1;
  int two_opt_passes = 50;
  /// Prepend the k-space origin so the path starts at the center.
  bool start_at_origin = false;
};

struct TspResult {
  TspResult(DiscreteCurve c, TargetDensity limit) : curve(std::move(c)), limit_density(std::move(limit)) {}

  DiscreteCurve curve;
  TargetDensity limit_density;  ///< q^{(d-1)/d}, renormalized
  Matrix tour;                  ///< cities in visiting order
  double nearest_neighbor_length = 0.0;
  double tour_length = 0.0;
};

/// Resamples a polyline so consecutive samples are speed * dt apart along the arc; the last
/// sample is the polyline end (that final step may be shorter).
DiscreteCurve constant_speed_parameterization(const Matrix& polyline, double speed, double dt);

/// The rosette shape sampled at shape_samples equispaced parameter values.
Matrix rosette_polyline(const RosetteSpec& spec);
/// Rosette at speed_fraction * alpha, starting at the origin.
DiscreteCurve gen_rosette(const RosetteSpec& spec, const KinematicLimits& limits, double dt);

DiscreteCurve gen_spiral(const SpiralSpec& spec, double dt, double speed);

/// pi(x, y) = (r^-1)'(rho) / (2 pi int_{r(0)}^{r(1)} (r^-1)'(p) p dp) on the annulus
/// r(0) <= rho <= r(1), zero elsewhere; renormalized on the grid.
TargetDensity spiral_target_density(const SpiralSpec& spec, const DensityGrid& grid);
/// The same formula evaluated at one point without grid renormalization.
double spiral_density_at(const SpiralSpec& spec, double x, double y, double h);

/// Draws cities from the density, orders them (nearest neighbor from the city closest to
/// the origin, then 2-opt on the open path) and parameterizes the path at constant speed.
TspResult gen_tsp_trajectory(const TspSpec& spec, double dt, double speed);

/// Inverse-CDF draw of n points from a gridded density, uniform inside each chosen bin.
Matrix sample_from_density(const TargetDensity& density, Index n, std::uint64_t seed);

/// City density whose TSP limit density is the given target: q proportional to pi^{d/(d-1)}.
TargetDensity city_density_for_target(const TargetDensity& target, int d = 2);

double polyline_length(const Matrix& polyline);

}  // namespace gradwave
