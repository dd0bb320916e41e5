#pragma once

#include "gradwave/curve.hpp"

#include <Eigen/Core>
#include <Eigen/Cholesky>

#include <optional>
#include <string>
#include <variant>
#include <vector>

namespace gradwave {

/// Scanner gradient hardware. g_max in mT/m, s_max in mT/m/ms, gamma in MHz/T.
struct HardwareSpec {
  double g_max = 40.0;
  double s_max = 150.0;
  double gamma = 42.576;

  void validate() const;
};

/// Bounds on the k-space velocity (1/cm/ms) and acceleration (1/cm/ms^2).
struct KinematicLimits {
  double alpha = 1.0;
  double beta = 1.0;
  NormMode mode = NormMode::RIV;

  void validate() const;
};

/// Multiplier taking gamma * (mT/m) to 1/cm/ms: 1e6 Hz/T * 1e-3 T/mT * 1e-5 (m s -> cm ms).
inline constexpr double kGammaUnitScale = 1e-2;

KinematicLimits limits_from_hardware(const HardwareSpec& hw, NormMode mode);
HardwareSpec hardware_from_limits(const KinematicLimits& limits, double gamma);

/// Gradient waveform g = sdot / gamma in mT/m, one row per sample.
Matrix gradient_waveform(const DiscreteCurve& curve, double gamma);

/// One linear functional on the flattened curve (index i * d + k), with its target value.
struct AffineRow {
  std::vector<Index> cols;
  std::vector<double> coefs;
  double rhs = 0.0;
  std::string label;
};

/// Linear equality constraints A(s) = v over curves of a fixed shape.
///
/// Constraints are recorded both as assembled rows and as resolution-independent
/// descriptions, so the same set can be rebuilt on a coarser time grid.
class AffineConstraintSet {
 public:
  AffineConstraintSet(Index n, Index d, double dt);

  /// Pins s(time_index) = position (time_index is 0-based).
  void add_point_constraint(Index time_index, const Eigen::VectorXd& position);
  /// Pins s(k * tr_ms) = 0 for 0 <= k <= floor(T / tr_ms); tr_ms must be a multiple of dt.
  void add_multishot_constraints(double tr_ms);
  /// s(1) - s(0) = 0: the first non-trivial discrete velocity vanishes.
  void add_initial_speed_zero();
  /// sum_j t_j^order * sdot(j) * dt = 0 for every axis (rectangle rule on [0, T]).
  void add_moment_nulling(int order);

  Index n() const noexcept { return n_; }
  Index d() const noexcept { return d_; }
  double dt() const noexcept { return dt_; }
  Index size() const noexcept { return static_cast<Index>(rows_.size()); }
  bool empty() const noexcept { return rows_.empty(); }
  const std::vector<AffineRow>& rows() const noexcept { return rows_; }
  Eigen::VectorXd rhs() const;

  Eigen::VectorXd apply(const Matrix& s) const;
  Matrix apply_adjoint(const Eigen::VectorXd& w) const;

  /// Same constraints re-assembled for n samples at step dt, with pinned times rounded to
  /// the nearest grid point. Used to warm-start on coarser grids.
  AffineConstraintSet resampled(Index n, double dt) const;

  /// Constant curve x (every sample equal) satisfying the constraints, closest to `near`,
  /// if one exists.
  std::optional<Eigen::VectorXd> constant_solution(const Eigen::VectorXd& near) const;

 private:
  struct Point {
    double t_ms;
    Eigen::VectorXd position;
  };
  struct Multishot {
    double tr_ms;
  };
  struct InitialSpeed {};
  struct Moment {
    int order;
  };
  using Description = std::variant<Point, Multishot, InitialSpeed, Moment>;

  void push_point_rows(Index time_index, const Eigen::VectorXd& position, const std::string& tag);

  Index n_;
  Index d_;
  double dt_;
  std::vector<AffineRow> rows_;
  std::vector<Description> descriptions_;
};

/// Factorized pseudo-inverse A^+ = A^T (A A^T)^{-1}. Immutable once built.
class AffineSolver {
 public:
  /// Factorizes the Gram matrix of the set. Throws DependentConstraints when the
  /// (diagonally equilibrated) Gram matrix has condition number above 1e12.
  explicit AffineSolver(AffineConstraintSet set);

  const AffineConstraintSet& constraints() const noexcept { return set_; }
  double condition_number() const noexcept { return condition_; }
  bool empty() const noexcept { return set_.empty(); }

  /// A^+ w for w in R^p.
  Matrix apply_pseudo_inverse(const Eigen::VectorXd& w) const;
  /// z + A^+(v - A z): orthogonal projection onto {A s = v}.
  Matrix project(const Matrix& z) const;
  /// Max-abs residual |A s - v|.
  double residual(const Matrix& s) const;

 private:
  AffineConstraintSet set_;
  Eigen::LDLT<Eigen::MatrixXd> gram_;
  double condition_ = 1.0;
};

inline AffineSolver factorize(AffineConstraintSet set) { return AffineSolver(std::move(set)); }
inline Matrix project_affine(const AffineSolver& solver, const Matrix& z) {
  return solver.project(z);
}

struct FeasibilityReport {
  double speed = 0.0;              ///< series_norm of the velocity
  double acceleration = 0.0;       ///< series_norm of the acceleration
  double speed_residual = 0.0;     ///< max(0, speed - alpha) / alpha
  double accel_residual = 0.0;     ///< max(0, acceleration - beta) / beta
  double affine_residual = 0.0;    ///< max |A s - v|

  bool within(double rel_tol, double affine_tol) const noexcept {
    return speed_residual <= rel_tol && accel_residual <= rel_tol && affine_residual <= affine_tol;
  }
};

FeasibilityReport feasibility_report(const DiscreteCurve& curve, const KinematicLimits& limits,
                                     const AffineSolver* affine = nullptr);
FeasibilityReport feasibility_report(const DiscreteCurve& curve, const KinematicLimits& limits,
                                     const AffineSolver& affine);

}  // namespace gradwave
