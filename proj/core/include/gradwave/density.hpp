#pragma once

#include "gradwave/curve.hpp"

#include <Eigen/Core>

#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

namespace gradwave {

/// Square 2D grid of resolution x resolution bins over [-k_max, k_max]^2.
/// Bin (iy, ix) has center (-k_max + (ix + 0.5) w, -k_max + (iy + 0.5) w), w = 2 k_max / resolution.
struct DensityGrid {
  double k_max = 6.0;
  Index resolution = 64;

  void validate() const;
  double cell_width() const noexcept { return 2.0 * k_max / static_cast<double>(resolution); }
  double cell_area() const noexcept { return cell_width() * cell_width(); }
  double center(Index i) const noexcept {
    return -k_max + (static_cast<double>(i) + 0.5) * cell_width();
  }
  /// Flat bin index iy * resolution + ix, or nothing if (x, y) lies outside the grid.
  std::optional<Index> bin_of(double x, double y) const noexcept;
  bool operator==(const DensityGrid& o) const noexcept {
    return k_max == o.k_max && resolution == o.resolution;
  }
};

using GridArray = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// Probability density sampled at bin centers, normalized so that sum(values) * cell_area = 1.
struct TargetDensity {
  DensityGrid grid;
  GridArray values;  ///< (iy, ix)

  /// Evaluates f at every bin center and normalizes. Throws if f is negative or has no mass.
  static TargetDensity from_function(const DensityGrid& grid,
                                     const std::function<double(double, double)>& f);
  /// Builds from raw nonnegative values (any scale) and normalizes.
  static TargetDensity from_values(const DensityGrid& grid, GridArray values);

  /// Per-bin probability mass (values * cell_area); sums to 1.
  GridArray masses() const { return values * grid.cell_area(); }
  /// values^exponent, renormalized.
  TargetDensity power(double exponent) const;
  Index support_size() const;
};

/// Binned sample counts. Samples outside the grid are counted in `clipped`, not in any bin.
struct EmpiricalHistogram {
  DensityGrid grid;
  Eigen::Matrix<std::int64_t, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> counts;
  std::int64_t total = 0;    ///< in-grid samples (sum of counts)
  std::int64_t clipped = 0;  ///< samples that fell outside the grid

  explicit EmpiricalHistogram(const DensityGrid& g);
  void add(double x, double y);
  void add(const Matrix& points);
  void merge(const EmpiricalHistogram& other);
  /// Count-normalized density: counts / (total * cell_area).
  GridArray density() const;
};

/// p(k) proportional to (1 - |k| / k_max)^exponent inside the disk |k| <= k_max, zero outside.
TargetDensity radial_density(double exponent, double k_max, Index resolution);

/// Histogram of the 2D points (one per row). Throws if empty or if every sample is off-grid.
EmpiricalHistogram empirical_histogram(const Matrix& samples, const DensityGrid& grid);

/// sum |h - p| / sum p over bins, with h the histogram's mass per bin and p the target's.
/// In [0, 2].
double relative_error(const EmpiricalHistogram& hist, const TargetDensity& target);

/// Per-bin density difference (histogram density - target density), (iy, ix).
GridArray difference_grid(const EmpiricalHistogram& hist, const TargetDensity& target);

/// Minimum-cost perfect matching for a square cost matrix (Hungarian method, O(m^3)).
/// Returns assignment[i] = column matched to row i.
std::vector<Index> optimal_assignment(const Eigen::MatrixXd& cost);

/// Exact W2 between two equal-size uniform point clouds (rows are points), m <= 4096.
double wasserstein2_exact(const Matrix& a, const Matrix& b);

/// Sliced W2 surrogate: sqrt(d * mean over random directions of the squared 1D W2 of the
/// projections). Exact for pure translations, never above the exact W2 for equal sizes.
/// The point sets may have different sizes.
double wasserstein2_sliced(const Matrix& a, const Matrix& b, int n_projections,
                           std::uint64_t seed);

/// Transport cost of the time coupling s(t) <-> c(t): sqrt((1/T) sum |s_i - c_i|^2 dt).
double coupling_bound(const DiscreteCurve& s, const DiscreteCurve& c);

}  // namespace gradwave
