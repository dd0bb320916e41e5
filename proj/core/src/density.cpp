#include "gradwave/density.hpp"

#include "gradwave/error.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

namespace gradwave {

void DensityGrid::validate() const {
  if (!(k_max > 0.0) || !std::isfinite(k_max)) throw InvalidArgument("grid k_max must be positive");
  if (resolution < 1) throw InvalidArgument("grid resolution must be >= 1");
}

std::optional<Index> DensityGrid::bin_of(double x, double y) const noexcept {
  const double w = cell_width();
  const double fx = (x + k_max) / w;
  const double fy = (y + k_max) / w;
  if (!(fx >= 0.0) || !(fy >= 0.0)) return std::nullopt;
  const double r = static_cast<double>(resolution);
  if (fx > r || fy > r) return std::nullopt;
  // The upper edge belongs to the last bin.
  const Index ix = std::min(static_cast<Index>(fx), resolution - 1);
  const Index iy = std::min(static_cast<Index>(fy), resolution - 1);
  return iy * resolution + ix;
}

TargetDensity TargetDensity::from_values(const DensityGrid& grid, GridArray values) {
  grid.validate();
  if (values.rows() != grid.resolution || values.cols() != grid.resolution)
    throw InvalidArgument("density values do not match the grid resolution");
  if (!values.allFinite() || (values.array() < 0.0).any())
    throw InvalidArgument("density values must be finite and nonnegative");
  const double mass = values.sum() * grid.cell_area();
  if (!(mass > 0.0)) throw InvalidArgument("density has no mass on the grid");
  return TargetDensity{grid, values / mass};
}

TargetDensity TargetDensity::from_function(const DensityGrid& grid,
                                           const std::function<double(double, double)>& f) {
  grid.validate();
  GridArray v(grid.resolution, grid.resolution);
  for (Index iy = 0; iy < grid.resolution; ++iy)
    for (Index ix = 0; ix < grid.resolution; ++ix) v(iy, ix) = f(grid.center(ix), grid.center(iy));
  return from_values(grid, std::move(v));
}

TargetDensity TargetDensity::power(double exponent) const {
  if (!(exponent > 0.0)) throw InvalidArgument("density exponent must be positive");
  return from_values(grid, values.array().pow(exponent).matrix());
}

Index TargetDensity::support_size() const { return (values.array() > 0.0).count(); }

EmpiricalHistogram::EmpiricalHistogram(const DensityGrid& g) : grid(g) {
  grid.validate();
  counts.setZero(grid.resolution, grid.resolution);
}

void EmpiricalHistogram::add(double x, double y) {
  if (const auto bin = grid.bin_of(x, y)) {
    counts.data()[*bin] += 1;
    ++total;
  } else {
    ++clipped;
  }
}

void EmpiricalHistogram::add(const Matrix& points) {
  if (points.cols() != 2) throw InvalidArgument("histograms are defined for 2D samples only");
  for (Index i = 0; i < points.rows(); ++i) add(points(i, 0), points(i, 1));
}

void EmpiricalHistogram::merge(const EmpiricalHistogram& other) {
  if (!(grid == other.grid)) throw InvalidArgument("cannot merge histograms on different grids");
  counts += other.counts;
  total += other.total;
  clipped += other.clipped;
}

GridArray EmpiricalHistogram::density() const {
  if (total <= 0) throw InvalidArgument("histogram has no in-grid samples");
  return counts.cast<double>() / (static_cast<double>(total) * grid.cell_area());
}

TargetDensity radial_density(double exponent, double k_max, Index resolution) {
  if (!(exponent >= 0.0)) throw InvalidArgument("radial exponent must be >= 0");
  const DensityGrid grid{k_max, resolution};
  return TargetDensity::from_function(grid, [&](double x, double y) {
    const double rho = std::hypot(x, y) / k_max;
    if (rho > 1.0) return 0.0;
    return std::pow(1.0 - rho, exponent);
  });
}

EmpiricalHistogram empirical_histogram(const Matrix& samples, const DensityGrid& grid) {
  if (samples.rows() == 0) throw InvalidArgument("no samples to histogram");
  EmpiricalHistogram h(grid);
  h.add(samples);
  if (h.total == 0) throw InvalidArgument("every sample lies outside the histogram grid");
  return h;
}

double relative_error(const EmpiricalHistogram& hist, const TargetDensity& target) {
  if (!(hist.grid == target.grid)) throw InvalidArgument("histogram and target grids differ");
  if (hist.total <= 0) throw InvalidArgument("histogram has no in-grid samples");
  const GridArray h = hist.counts.cast<double>() / static_cast<double>(hist.total);
  const GridArray p = target.masses();
  return (h - p).cwiseAbs().sum() / p.sum();
}

GridArray difference_grid(const EmpiricalHistogram& hist, const TargetDensity& target) {
  if (!(hist.grid == target.grid)) throw InvalidArgument("histogram and target grids differ");
  return hist.density() - target.values;
}

namespace {

// Squared 1D W2 between uniform measures on the sorted values a and b (any sizes):
// integral over u in (0,1) of (F_a^{-1}(u) - F_b^{-1}(u))^2.
double w2_sq_1d(const std::vector<double>& a, const std::vector<double>& b) {
  const std::size_t na = a.size(), nb = b.size();
  if (na == nb) {
    double acc = 0.0;
    for (std::size_t i = 0; i < na; ++i) acc += (a[i] - b[i]) * (a[i] - b[i]);
    return acc / static_cast<double>(na);
  }
  double acc = 0.0, u = 0.0;
  std::size_t i = 0, j = 0;
  while (i < na && j < nb) {
    const double ua = static_cast<double>(i + 1) / static_cast<double>(na);
    const double ub = static_cast<double>(j + 1) / static_cast<double>(nb);
    const double next = std::min(ua, ub);
    const double diff = a[i] - b[j];
    acc += (next - u) * diff * diff;
    u = next;
    if (ua <= next) ++i;
    if (ub <= next) ++j;
  }
  return acc;
}

}  // namespace

double wasserstein2_sliced(const Matrix& a, const Matrix& b, int n_projections,
                           std::uint64_t seed) {
  if (n_projections < 1) throw InvalidArgument("sliced W2 needs at least one projection");
  if (a.cols() != b.cols()) throw InvalidArgument("sliced W2: dimension mismatch");
  if (a.rows() == 0 || b.rows() == 0) throw InvalidArgument("sliced W2: empty point set");
  const Index d = a.cols();

  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  std::normal_distribution<double> normal(0.0, 1.0);
  // In 2D the directions are evenly spread over the half circle from a random offset; the
  // average of <x, theta>^2 is then exactly |x|^2 / 2 for every x.
  const double offset = unif(rng) * std::numbers::pi;

  std::vector<double> pa(static_cast<std::size_t>(a.rows())), pb(static_cast<std::size_t>(b.rows()));
  double acc = 0.0;
  for (int p = 0; p < n_projections; ++p) {
    Eigen::VectorXd theta(d);
    if (d == 1) {
      theta(0) = 1.0;
    } else if (d == 2) {
      const double ang = offset + std::numbers::pi * p / n_projections;
      theta << std::cos(ang), std::sin(ang);
    } else {
      for (Index k = 0; k < d; ++k) theta(k) = normal(rng);
      theta.normalize();
    }
    for (Index i = 0; i < a.rows(); ++i) pa[static_cast<std::size_t>(i)] = a.row(i).dot(theta);
    for (Index i = 0; i < b.rows(); ++i) pb[static_cast<std::size_t>(i)] = b.row(i).dot(theta);
    std::sort(pa.begin(), pa.end());
    std::sort(pb.begin(), pb.end());
    acc += w2_sq_1d(pa, pb);
  }
  return std::sqrt(static_cast<double>(d) * acc / n_projections);
}

double coupling_bound(const DiscreteCurve& s, const DiscreteCurve& c) {
  if (s.size() != c.size() || s.dim() != c.dim())
    throw InvalidArgument("coupling_bound: curves must have the same shape");
  if (std::abs(s.dt() - c.dt()) > 1e-12 * c.dt())
    throw InvalidArgument("coupling_bound: curves must share dt");
  // Each sample carries weight T / n, the mass of its atom in the empirical measure.
  return std::sqrt((s.points() - c.points()).squaredNorm() / static_cast<double>(s.size()));
}

}  // namespace gradwave
