#include "gradwave/trajectories.hpp"

#include "gradwave/error.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <string>

namespace gradwave {

namespace {

double uniform01(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

double segment_length(const Matrix& p, Index i) { return (p.row(i + 1) - p.row(i)).norm(); }

}  // namespace

double polyline_length(const Matrix& polyline) {
  double total = 0.0;
  for (Index i = 0; i + 1 < polyline.rows(); ++i) total += segment_length(polyline, i);
  return total;
}

DiscreteCurve constant_speed_parameterization(const Matrix& polyline, double speed, double dt) {
  if (!(speed > 0.0) || !std::isfinite(speed)) throw InvalidArgument("speed must be positive");
  if (!(dt > 0.0) || !std::isfinite(dt)) throw InvalidArgument("dt must be positive");
  if (polyline.rows() < 2) throw InvalidArgument("polyline needs at least 2 vertices");
  if (!polyline.allFinite()) throw InvalidArgument("polyline coordinates must be finite");
  const double total = polyline_length(polyline);
  if (!(total > 0.0)) throw InvalidArgument("polyline has zero length");

  const double step = speed * dt;
  const double step_sq = step * step;
  const Index d = polyline.cols();
  const Index nv = polyline.rows();
  std::vector<Eigen::RowVectorXd> out;
  out.reserve(static_cast<std::size_t>(total / step) + 2);

  // Walk forward from the current point p (on segment seg, starting at `from`) to the first
  // point along the path at Euclidean distance `step` from p.
  Eigen::RowVectorXd p = polyline.row(0);
  Eigen::RowVectorXd from = p;
  Index seg = 0;
  out.push_back(p);
  while (true) {
    bool found = false;
    while (seg < nv - 1) {
      const Eigen::RowVectorXd b = polyline.row(seg + 1);
      if ((b - p).squaredNorm() >= step_sq) {
        // |from + tau (b - from) - p|^2 = step^2 with |from - p| < step: take the root in [0, 1].
        const Eigen::RowVectorXd dir = b - from;
        const Eigen::RowVectorXd off = from - p;
        const double qa = dir.squaredNorm();
        const double qb = 2.0 * off.dot(dir);
        const double qc = off.squaredNorm() - step_sq;
        const double disc = std::max(0.0, qb * qb - 4.0 * qa * qc);
        double tau = (-qb + std::sqrt(disc)) / (2.0 * qa);
        tau = std::clamp(tau, 0.0, 1.0);
        p = from + tau * dir;
        from = p;
        found = true;
        break;
      }
      ++seg;
      if (seg < nv - 1) from = polyline.row(seg);
    }
    if (!found) break;
    out.push_back(p);
  }
  const Eigen::RowVectorXd end = polyline.row(nv - 1);
  if ((end - out.back()).norm() > 1e-12 * std::max(1.0, total)) out.push_back(end);
  if (out.size() < 2) out.push_back(end);

  Matrix pts(static_cast<Index>(out.size()), d);
  for (std::size_t i = 0; i < out.size(); ++i) pts.row(static_cast<Index>(i)) = out[i];
  return DiscreteCurve(std::move(pts), dt);
}

void RosetteSpec::validate() const {
  if (!(k_max > 0.0)) throw InvalidArgument("rosette k_max must be positive");
  if (!(speed_fraction > 0.0) || speed_fraction > 1.0)
    throw InvalidArgument("rosette speed_fraction must lie in (0, 1]");
  if (!std::isfinite(omega1) || !std::isfinite(omega2))
    throw InvalidArgument("rosette frequencies must be finite");
  if (shape_samples < 2) throw InvalidArgument("rosette needs at least 2 shape samples");
}

Matrix rosette_polyline(const RosetteSpec& spec) {
  spec.validate();
  const double span = spec.span();
  if (!(span > 0.0) || !std::isfinite(span) || spec.omega1 == 0.0)
    throw InvalidArgument("rosette parameter span is degenerate");
  const Index m = spec.shape_samples;
  Matrix shape(m, 2);
  for (Index j = 0; j < m; ++j) {
    const double u = span * static_cast<double>(j) / static_cast<double>(m - 1);
    const double r = spec.k_max * std::sin(spec.omega1 * u);
    shape(j, 0) = r * std::cos(spec.omega2 * u);
    shape(j, 1) = r * std::sin(spec.omega2 * u);
  }
  if (!(polyline_length(shape) > 0.0)) throw InvalidArgument("rosette has zero length");
  return shape;
}

DiscreteCurve gen_rosette(const RosetteSpec& spec, const KinematicLimits& limits, double dt) {
  limits.validate();
  return constant_speed_parameterization(rosette_polyline(spec), spec.speed_fraction * limits.alpha,
                                         dt);
}

// ---------------------------------------------------------------------------------------------

SpiralSpec SpiralSpec::archimedean(double k_max, int revolutions, Index table_size) {
  if (table_size < 2) throw InvalidArgument("spiral radius table needs at least 2 entries");
  SpiralSpec s;
  s.revolutions = revolutions;
  s.radius_table.resize(static_cast<std::size_t>(table_size));
  for (Index j = 0; j < table_size; ++j)
    s.radius_table[static_cast<std::size_t>(j)] =
        k_max * static_cast<double>(j) / static_cast<double>(table_size - 1);
  return s;
}

void SpiralSpec::validate() const {
  if (radius_table.size() < 2) throw InvalidArgument("spiral radius table needs at least 2 entries");
  if (!(radius_table.front() >= 0.0)) throw InvalidArgument("spiral radius must start at r0 >= 0");
  for (std::size_t j = 1; j < radius_table.size(); ++j)
    if (!(radius_table[j] > radius_table[j - 1]))
      throw InvalidArgument("spiral radius table must be strictly increasing");
  if (revolutions < 1) throw InvalidArgument("spiral needs at least one revolution");
  if (direction != 1 && direction != -1) throw InvalidArgument("spiral direction must be +1 or -1");
  if (samples_per_revolution < 8) throw InvalidArgument("spiral needs >= 8 samples per revolution");
}

double SpiralSpec::radius(double u) const {
  const double pos = std::clamp(u, 0.0, 1.0) * static_cast<double>(radius_table.size() - 1);
  const std::size_t j = std::min(static_cast<std::size_t>(pos), radius_table.size() - 2);
  const double f = pos - static_cast<double>(j);
  return (1.0 - f) * radius_table[j] + f * radius_table[j + 1];
}

double SpiralSpec::inverse_radius(double rho) const {
  const std::size_t m = radius_table.size();
  if (rho <= radius_table.front()) return 0.0;
  if (rho >= radius_table.back()) return 1.0;
  const auto it = std::upper_bound(radius_table.begin(), radius_table.end(), rho);
  const std::size_t j = static_cast<std::size_t>(it - radius_table.begin()) - 1;
  const double f = (rho - radius_table[j]) / (radius_table[j + 1] - radius_table[j]);
  return (static_cast<double>(j) + f) / static_cast<double>(m - 1);
}

DiscreteCurve gen_spiral(const SpiralSpec& spec, double dt, double speed) {
  spec.validate();
  const Index m = static_cast<Index>(spec.revolutions) * spec.samples_per_revolution + 1;
  const double n = static_cast<double>(spec.revolutions);
  Matrix shape(m, 2);
  for (Index j = 0; j < m; ++j) {
    const double t = n * static_cast<double>(j) / static_cast<double>(m - 1);
    const double r = spec.radius(t / n);
    const double ang = 2.0 * std::numbers::pi * t * spec.direction;
    shape(j, 0) = r * std::cos(ang);
    shape(j, 1) = r * std::sin(ang);
  }
  return constant_speed_parameterization(shape, speed, dt);
}

namespace {

// Central difference of r^-1 with spacing h, one-sided near the ends of the table range.
double inverse_radius_derivative(const SpiralSpec& spec, double rho, double h) {
  const double r0 = spec.radius_table.front(), r1 = spec.radius_table.back();
  const double lo = std::max(r0, rho - 0.5 * h);
  const double hi = std::min(r1, rho + 0.5 * h);
  if (!(hi > lo)) return 0.0;
  return (spec.inverse_radius(hi) - spec.inverse_radius(lo)) / (hi - lo);
}

double spiral_normalizer(const SpiralSpec& spec, double h) {
  const double r0 = spec.radius_table.front(), r1 = spec.radius_table.back();
  const int pieces = 4096;
  const double w = (r1 - r0) / pieces;
  double acc = 0.0;
  for (int j = 0; j < pieces; ++j) {
    const double rho = r0 + (j + 0.5) * w;
    acc += inverse_radius_derivative(spec, rho, h) * rho * w;
  }
  return 2.0 * std::numbers::pi * acc;
}

}  // namespace

double spiral_density_at(const SpiralSpec& spec, double x, double y, double h) {
  spec.validate();
  if (!(h > 0.0)) throw InvalidArgument("derivative spacing must be positive");
  const double rho = std::hypot(x, y);
  if (rho < spec.radius_table.front() || rho > spec.radius_table.back()) return 0.0;
  return inverse_radius_derivative(spec, rho, h) / spiral_normalizer(spec, h);
}

TargetDensity spiral_target_density(const SpiralSpec& spec, const DensityGrid& grid) {
  spec.validate();
  grid.validate();
  if (spec.radius_table.back() > grid.k_max * (1.0 + 1e-12))
    throw InvalidArgument("spiral annulus extends beyond the density grid");
  const double h = grid.cell_width();
  const double norm = spiral_normalizer(spec, h);
  const double r0 = spec.radius_table.front(), r1 = spec.radius_table.back();
  return TargetDensity::from_function(grid, [&](double x, double y) {
    const double rho = std::hypot(x, y);
    if (rho < r0 || rho > r1) return 0.0;
    return inverse_radius_derivative(spec, rho, h) / norm;
  });
}

// ---------------------------------------------------------------------------------------------

Matrix sample_from_density(const TargetDensity& density, Index n, std::uint64_t seed) {
  if (n < 0) throw InvalidArgument("sample count must be >= 0");
  const GridArray mass = density.masses();
  const Index bins = mass.size();
  std::vector<double> cdf(static_cast<std::size_t>(bins));
  double acc = 0.0;
  for (Index b = 0; b < bins; ++b) {
    acc += mass.data()[b];
    cdf[static_cast<std::size_t>(b)] = acc;
  }
  std::mt19937_64 rng(seed);
  const double w = density.grid.cell_width();
  const Index res = density.grid.resolution;
  Matrix out(n, 2);
  for (Index i = 0; i < n; ++i) {
    const double u = uniform01(rng) * acc;
    auto it = std::upper_bound(cdf.begin(), cdf.end(), u);
    if (it == cdf.end()) --it;
    Index b = static_cast<Index>(it - cdf.begin());
    while (mass.data()[b] <= 0.0 && b > 0) --b;  // guard against landing on an empty bin
    const Index iy = b / res, ix = b % res;
    out(i, 0) = density.grid.center(ix) + (uniform01(rng) - 0.5) * w;
    out(i, 1) = density.grid.center(iy) + (uniform01(rng) - 0.5) * w;
  }
  return out;
}

TargetDensity city_density_for_target(const TargetDensity& target, int d) {
  if (d < 2) throw InvalidArgument("TSP densities need d >= 2");
  return target.power(static_cast<double>(d) / static_cast<double>(d - 1));
}

TspResult gen_tsp_trajectory(const TspSpec& spec, double dt, double speed) {
  if (spec.n_cities < 1) throw InvalidArgument("TSP needs at least one city");
  if (spec.two_opt_passes < 0) throw InvalidArgument("two_opt_passes must be >= 0");
  const TargetDensity& q = spec.city_density;
  const double mass = q.values.sum() * q.grid.cell_area();
  if (std::abs(mass - 1.0) > 1e-9) throw InvalidArgument("city density must be normalized");
  if (spec.n_cities > q.support_size())
    throw InvalidArgument("n_cities (" + std::to_string(spec.n_cities) +
                          ") exceeds the number of bins with positive mass (" +
                          std::to_string(q.support_size()) + ")");

  const Matrix cities = sample_from_density(q, spec.n_cities, spec.seed);
  const Index n = cities.rows();

  // Nearest neighbor from the city closest to the origin.
  std::vector<Index> order;
  order.reserve(static_cast<std::size_t>(n));
  std::vector<char> used(static_cast<std::size_t>(n), 0);
  Index start = 0;
  for (Index i = 1; i < n; ++i)
    if (cities.row(i).squaredNorm() < cities.row(start).squaredNorm()) start = i;
  order.push_back(start);
  used[static_cast<std::size_t>(start)] = 1;
  for (Index step = 1; step < n; ++step) {
    const Index last = order.back();
    Index best = -1;
    double best_d = 0.0;
    for (Index j = 0; j < n; ++j) {
      if (used[static_cast<std::size_t>(j)]) continue;
      const double dd = (cities.row(j) - cities.row(last)).squaredNorm();
      if (best < 0 || dd < best_d) {
        best = j;
        best_d = dd;
      }
    }
    order.push_back(best);
    used[static_cast<std::size_t>(best)] = 1;
  }

  Matrix path(n, 2);
  for (Index i = 0; i < n; ++i) path.row(i) = cities.row(order[static_cast<std::size_t>(i)]);
  const double nn_length = polyline_length(path);

  // 2-opt on the open path, first city fixed; reversing a tail changes only one edge.
  auto dist = [&](Index a, Index b) { return (path.row(a) - path.row(b)).norm(); };
  for (int pass = 0; pass < spec.two_opt_passes; ++pass) {
    bool improved = false;
    for (Index i = 0; i + 2 < n; ++i) {
      for (Index j = i + 2; j < n; ++j) {
        double delta;
        if (j == n - 1) {
          delta = dist(i, j) - dist(i, i + 1);
        } else {
          delta = dist(i, j) + dist(i + 1, j + 1) - dist(i, i + 1) - dist(j, j + 1);
        }
        if (delta < -1e-12) {
          for (Index a = i + 1, b = j; a < b; ++a, --b) path.row(a).swap(path.row(b));
          improved = true;
        }
      }
    }
    if (!improved) break;
  }

  TspResult out(DiscreteCurve(Matrix::Zero(2, 2), dt), q.power(0.5));
  out.tour = path;
  out.nearest_neighbor_length = nn_length;
  out.tour_length = polyline_length(path);
  Matrix poly = path;
  if (spec.start_at_origin) {
    poly.resize(n + 1, 2);
    poly.row(0).setZero();
    poly.bottomRows(n) = path;
  }
  if (poly.rows() < 2 || !(polyline_length(poly) > 0.0)) {
    Matrix pts(2, 2);
    pts.row(0) = poly.row(0);
    pts.row(1) = poly.row(0);
    out.curve = DiscreteCurve(std::move(pts), dt);
  } else {
    out.curve = constant_speed_parameterization(poly, speed, dt);
  }
  return out;
}

}  // namespace gradwave
