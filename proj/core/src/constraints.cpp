#include "gradwave/constraints.hpp"

#include "gradwave/error.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/QR>

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace gradwave {

const char* to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::InvalidArgument: return "E_INVALID_ARGUMENT";
    case ErrorCode::Parse: return "E_PARSE";
    case ErrorCode::NumericFailure: return "E_NUMERIC";
    case ErrorCode::DependentConstraints: return "E_CONSTRAINTS";
  }
  return "E_UNKNOWN";
}

void HardwareSpec::validate() const {
  if (!(g_max > 0.0) || !(s_max > 0.0) || !(gamma > 0.0))
    throw InvalidArgument("hardware g_max, s_max and gamma must be strictly positive");
}

void KinematicLimits::validate() const {
  if (!(alpha > 0.0) || !(beta > 0.0))
    throw InvalidArgument("kinematic limits alpha and beta must be strictly positive");
}

KinematicLimits limits_from_hardware(const HardwareSpec& hw, NormMode mode) {
  hw.validate();
  return {hw.gamma * hw.g_max * kGammaUnitScale, hw.gamma * hw.s_max * kGammaUnitScale, mode};
}

HardwareSpec hardware_from_limits(const KinematicLimits& limits, double gamma) {
  limits.validate();
  if (!(gamma > 0.0)) throw InvalidArgument("gamma must be positive");
  return {limits.alpha / (gamma * kGammaUnitScale), limits.beta / (gamma * kGammaUnitScale), gamma};
}

Matrix gradient_waveform(const DiscreteCurve& curve, double gamma) {
  if (!(gamma > 0.0)) throw InvalidArgument("gamma must be positive");
  return first_difference(curve.points(), curve.dt()) / (gamma * kGammaUnitScale);
}

// ---------------------------------------------------------------------------------------------

AffineConstraintSet::AffineConstraintSet(Index n, Index d, double dt) : n_(n), d_(d), dt_(dt) {
  if (n < 2 || d < 1) throw InvalidArgument("constraint set needs n >= 2 and d >= 1");
  if (!(dt > 0.0)) throw InvalidArgument("constraint set needs dt > 0");
}

void AffineConstraintSet::push_point_rows(Index time_index, const Eigen::VectorXd& position,
                                          const std::string& tag) {
  for (Index k = 0; k < d_; ++k) {
    AffineRow row;
    row.cols = {time_index * d_ + k};
    row.coefs = {1.0};
    row.rhs = position(k);
    row.label = tag + "[" + std::to_string(k) + "]";
    rows_.push_back(std::move(row));
  }
}

void AffineConstraintSet::add_point_constraint(Index time_index, const Eigen::VectorXd& position) {
  if (time_index < 0 || time_index >= n_)
    throw InvalidArgument("point constraint index " + std::to_string(time_index) +
                          " outside [0, " + std::to_string(n_ - 1) + "]");
  if (position.size() != d_)
    throw InvalidArgument("point constraint position has wrong dimension");
  if (!position.allFinite()) throw InvalidArgument("point constraint position must be finite");
  push_point_rows(time_index, position, "point@" + std::to_string(time_index));
  descriptions_.push_back(Point{static_cast<double>(time_index) * dt_, position});
}

void AffineConstraintSet::add_multishot_constraints(double tr_ms) {
  if (!(tr_ms > 0.0)) throw InvalidArgument("multishot TR must be positive");
  const double steps = tr_ms / dt_;
  const double rounded = std::round(steps);
  if (rounded < 1.0 || std::abs(steps - rounded) > 1e-9 * std::max(1.0, steps))
    throw InvalidArgument("multishot TR must be an integer multiple of dt");
  const Index stride = static_cast<Index>(rounded);
  const Eigen::VectorXd zero = Eigen::VectorXd::Zero(d_);
  for (Index i = 0; i < n_; i += stride) push_point_rows(i, zero, "multishot@" + std::to_string(i));
  descriptions_.push_back(Multishot{tr_ms});
}

void AffineConstraintSet::add_initial_speed_zero() {
  for (Index k = 0; k < d_; ++k) {
    AffineRow row;
    row.cols = {k, d_ + k};
    row.coefs = {-1.0, 1.0};
    row.label = "initial_speed[" + std::to_string(k) + "]";
    rows_.push_back(std::move(row));
  }
  descriptions_.push_back(InitialSpeed{});
}

void AffineConstraintSet::add_moment_nulling(int order) {
  if (order < 0) throw InvalidArgument("moment order must be >= 0");
  // sum_{j>=1} t_j^order (s_j - s_{j-1}) with t_j = j dt; the dt of the rectangle rule
  // cancels against the 1/dt of the difference quotient.
  std::vector<double> coef(static_cast<std::size_t>(n_), 0.0);
  for (Index j = 1; j < n_; ++j) {
    const double w = std::pow(static_cast<double>(j) * dt_, order);
    coef[static_cast<std::size_t>(j)] += w;
    coef[static_cast<std::size_t>(j - 1)] -= w;
  }
  for (Index k = 0; k < d_; ++k) {
    AffineRow row;
    for (Index j = 0; j < n_; ++j) {
      if (coef[static_cast<std::size_t>(j)] == 0.0) continue;
      row.cols.push_back(j * d_ + k);
      row.coefs.push_back(coef[static_cast<std::size_t>(j)]);
    }
    row.label = "moment" + std::to_string(order) + "[" + std::to_string(k) + "]";
    rows_.push_back(std::move(row));
  }
  descriptions_.push_back(Moment{order});
}

Eigen::VectorXd AffineConstraintSet::rhs() const {
  Eigen::VectorXd v(size());
  for (Index r = 0; r < size(); ++r) v(r) = rows_[static_cast<std::size_t>(r)].rhs;
  return v;
}

Eigen::VectorXd AffineConstraintSet::apply(const Matrix& s) const {
  Eigen::VectorXd out(size());
  const double* data = s.data();
  for (Index r = 0; r < size(); ++r) {
    const auto& row = rows_[static_cast<std::size_t>(r)];
    double acc = 0.0;
    for (std::size_t e = 0; e < row.cols.size(); ++e) acc += row.coefs[e] * data[row.cols[e]];
    out(r) = acc;
  }
  return out;
}

Matrix AffineConstraintSet::apply_adjoint(const Eigen::VectorXd& w) const {
  Matrix out = Matrix::Zero(n_, d_);
  double* data = out.data();
  for (Index r = 0; r < size(); ++r) {
    const auto& row = rows_[static_cast<std::size_t>(r)];
    for (std::size_t e = 0; e < row.cols.size(); ++e) data[row.cols[e]] += row.coefs[e] * w(r);
  }
  return out;
}

AffineConstraintSet AffineConstraintSet::resampled(Index n, double dt) const {
  AffineConstraintSet out(n, d_, dt);
  for (const auto& desc : descriptions_) {
    if (const auto* p = std::get_if<Point>(&desc)) {
      const Index idx = std::clamp<Index>(static_cast<Index>(std::llround(p->t_ms / dt)), 0, n - 1);
      out.add_point_constraint(idx, p->position);
    } else if (const auto* m = std::get_if<Multishot>(&desc)) {
      const Index stride = std::max<Index>(1, static_cast<Index>(std::llround(m->tr_ms / dt)));
      out.add_multishot_constraints(static_cast<double>(stride) * dt);
    } else if (std::holds_alternative<InitialSpeed>(desc)) {
      out.add_initial_speed_zero();
    } else if (const auto* mo = std::get_if<Moment>(&desc)) {
      out.add_moment_nulling(mo->order);
    }
  }
  return out;
}

std::optional<Eigen::VectorXd> AffineConstraintSet::constant_solution(
    const Eigen::VectorXd& near) const {
  if (empty()) return near;
  // A applied to the constant curve x is B x with B(r, k) = sum of row r's coefficients on axis k.
  Eigen::MatrixXd B = Eigen::MatrixXd::Zero(size(), d_);
  for (Index r = 0; r < size(); ++r) {
    const auto& row = rows_[static_cast<std::size_t>(r)];
    for (std::size_t e = 0; e < row.cols.size(); ++e) B(r, row.cols[e] % d_) += row.coefs[e];
  }
  const Eigen::VectorXd v = rhs();
  Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod(B);
  const Eigen::VectorXd x = near + cod.solve(v - B * near);
  const double scale = std::max(1.0, v.cwiseAbs().maxCoeff());
  if ((B * x - v).cwiseAbs().maxCoeff() > 1e-10 * scale) return std::nullopt;
  return x;
}

// ---------------------------------------------------------------------------------------------

namespace {

double sparse_dot(const AffineRow& a, const AffineRow& b) {
  double acc = 0.0;
  std::size_t i = 0, j = 0;
  // Rows are assembled with increasing column indices.
  while (i < a.cols.size() && j < b.cols.size()) {
    if (a.cols[i] == b.cols[j]) {
      acc += a.coefs[i] * b.coefs[j];
      ++i;
      ++j;
    } else if (a.cols[i] < b.cols[j]) {
      ++i;
    } else {
      ++j;
    }
  }
  return acc;
}

}  // namespace

AffineSolver::AffineSolver(AffineConstraintSet set) : set_(std::move(set)) {
  const Index p = set_.size();
  if (p == 0) return;
  if (p >= set_.n() * set_.d())
    throw DependentConstraints("more affine constraints than curve degrees of freedom");

  Eigen::MatrixXd gram(p, p);
  const auto& rows = set_.rows();
  for (Index a = 0; a < p; ++a)
    for (Index b = a; b < p; ++b) {
      const double g = sparse_dot(rows[static_cast<std::size_t>(a)], rows[static_cast<std::size_t>(b)]);
      gram(a, b) = g;
      gram(b, a) = g;
    }

  Eigen::VectorXd diag = gram.diagonal();
  for (Index a = 0; a < p; ++a) {
    if (!(diag(a) > 0.0))
      throw DependentConstraints("affine constraint '" + rows[static_cast<std::size_t>(a)].label +
                                 "' is identically zero");
  }
  const Eigen::VectorXd inv_sqrt = diag.cwiseSqrt().cwiseInverse();
  const Eigen::MatrixXd equilibrated = inv_sqrt.asDiagonal() * gram * inv_sqrt.asDiagonal();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(equilibrated);
  const Eigen::VectorXd lambda = eig.eigenvalues();
  const double lo = lambda(0);
  const double hi = lambda(p - 1);
  condition_ = lo > 0.0 ? hi / lo : std::numeric_limits<double>::infinity();
  if (!(condition_ <= 1e12)) {
    const Eigen::VectorXd null_dir = eig.eigenvectors().col(0).cwiseAbs();
    const double peak = null_dir.maxCoeff();
    std::ostringstream msg;
    msg << "affine constraints are linearly dependent (condition number " << condition_
        << "); involved:";
    for (Index a = 0; a < p; ++a)
      if (null_dir(a) > 0.1 * peak) msg << ' ' << rows[static_cast<std::size_t>(a)].label;
    throw DependentConstraints(msg.str());
  }
  gram_.compute(gram);
}

Matrix AffineSolver::apply_pseudo_inverse(const Eigen::VectorXd& w) const {
  if (set_.empty()) return Matrix::Zero(set_.n(), set_.d());
  return set_.apply_adjoint(gram_.solve(w));
}

Matrix AffineSolver::project(const Matrix& z) const {
  if (set_.empty()) return z;
  const Eigen::VectorXd misfit = set_.rhs() - set_.apply(z);
  Matrix out = z + apply_pseudo_inverse(misfit);
  return out;
}

double AffineSolver::residual(const Matrix& s) const {
  if (set_.empty()) return 0.0;
  return (set_.apply(s) - set_.rhs()).cwiseAbs().maxCoeff();
}

FeasibilityReport feasibility_report(const DiscreteCurve& curve, const KinematicLimits& limits,
                                     const AffineSolver* affine) {
  limits.validate();
  FeasibilityReport r;
  r.speed = series_norm(first_difference(curve.points(), curve.dt()), limits.mode);
  r.acceleration = series_norm(second_difference(curve.points(), curve.dt()), limits.mode);
  r.speed_residual = std::max(0.0, r.speed - limits.alpha) / limits.alpha;
  r.accel_residual = std::max(0.0, r.acceleration - limits.beta) / limits.beta;
  if (affine) {
    if (affine->constraints().n() != curve.size() || affine->constraints().d() != curve.dim())
      throw InvalidArgument("feasibility_report: constraint set shape does not match the curve");
    r.affine_residual = affine->residual(curve.points());
  }
  return r;
}

FeasibilityReport feasibility_report(const DiscreteCurve& curve, const KinematicLimits& limits,
                                     const AffineSolver& affine) {
  return feasibility_report(curve, limits, &affine);
}

}  // namespace gradwave
