#pragma once

#include <Eigen/Core>

#include <string_view>

namespace gradwave {

/// Row-major n x d array; row i is the i-th sample of a curve or series.
using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Index = Eigen::Index;

/// Norm used for the speed and acceleration bounds.
///   RV:  max over samples and axes of |x|           (rotation variant)
///   RIV: max over samples of the Euclidean norm      (rotation invariant)
enum class NormMode { RV, RIV };

const char* to_string(NormMode mode) noexcept;
NormMode parse_norm_mode(std::string_view text);

/// A k-space curve sampled at n uniformly spaced times 0, dt, ..., (n-1) dt.
/// Coordinates are in 1/cm and time in ms.
class DiscreteCurve {
 public:
  DiscreteCurve(Matrix points, double dt);

  Index size() const noexcept { return points_.rows(); }
  Index dim() const noexcept { return points_.cols(); }
  double dt() const noexcept { return dt_; }
  double duration() const noexcept { return static_cast<double>(size() - 1) * dt_; }

  const Matrix& points() const noexcept { return points_; }
  auto point(Index i) const { return points_.row(i); }

 private:
  Matrix points_;
  double dt_;
};

/// Per-sample vectors attached to a curve (velocity, acceleration, dual variables).
struct VectorSeries {
  Matrix values;
  double dt = 1.0;
};

// Matrix-free difference operators. Row 0 of the first difference is pinned to zero;
// the second difference is defined as -D^T D so that its boundary rows are one-sided.
Matrix first_difference(const Matrix& s, double dt);
Matrix adjoint_first_difference(const Matrix& y, double dt);
Matrix second_difference(const Matrix& s, double dt);
/// Adjoint of second_difference, evaluated as -D^T(D y) rather than by the direct stencil.
Matrix adjoint_second_difference(const Matrix& y, double dt);

VectorSeries first_difference(const DiscreteCurve& curve);
VectorSeries adjoint_first_difference(const VectorSeries& series);
VectorSeries second_difference(const DiscreteCurve& curve);

double series_norm(const Matrix& values, NormMode mode);
double dual_norm(const Matrix& values, NormMode mode);
inline double series_norm(const VectorSeries& s, NormMode mode) { return series_norm(s.values, mode); }
inline double dual_norm(const VectorSeries& s, NormMode mode) { return dual_norm(s.values, mode); }

struct SpectralBound {
  double value = 0.0;     ///< step-size constant: estimate * 1.01, or the analytic bound
  double estimate = 0.0;  ///< raw power-iteration eigenvalue
  int iterations = 0;
  bool converged = false;
};

/// Spectral norm of D^T D + (D^T D)^2 for curves with n samples at step dt, by power
/// iteration. Falls back to the bound 4/dt^2 + 16/dt^4 if the iteration stalls.
SpectralBound lipschitz_constant(Index n, Index d, double dt, int max_iters = 5000);

/// Analytic upper bound 4/dt^2 + 16/dt^4 on the same operator norm.
double lipschitz_upper_bound(double dt) noexcept;

/// Points s(j * sample_dt) for 0 <= j <= floor(T / sample_dt), linearly interpolated.
Matrix sample_at_rate(const DiscreteCurve& curve, double sample_dt);

}  // namespace gradwave
