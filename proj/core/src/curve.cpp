#include "gradwave/curve.hpp"

#include "gradwave/error.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <string>

namespace gradwave {

const char* to_string(NormMode mode) noexcept { return mode == NormMode::RV ? "RV" : "RIV"; }

NormMode parse_norm_mode(std::string_view text) {
  if (text == "RV" || text == "rv") return NormMode::RV;
  if (text == "RIV" || text == "riv") return NormMode::RIV;
  throw InvalidArgument("unknown norm mode '" + std::string(text) + "' (expected RV or RIV)");
}

DiscreteCurve::DiscreteCurve(Matrix points, double dt) : points_(std::move(points)), dt_(dt) {
  if (points_.rows() < 2) throw InvalidArgument("a curve needs at least 2 samples");
  if (points_.cols() < 1) throw InvalidArgument("a curve needs at least one coordinate");
  if (!(dt_ > 0.0) || !std::isfinite(dt_)) throw InvalidArgument("curve dt must be positive");
  if (!points_.allFinite()) throw InvalidArgument("curve coordinates must be finite");
}

Matrix first_difference(const Matrix& s, double dt) {
  const Index n = s.rows();
  Matrix y(n, s.cols());
  y.row(0).setZero();
  if (n > 1) y.bottomRows(n - 1) = (s.bottomRows(n - 1) - s.topRows(n - 1)) / dt;
  return y;
}

Matrix adjoint_first_difference(const Matrix& y, double dt) {
  const Index n = y.rows();
  Matrix x(n, y.cols());
  if (n == 1) {
    x.setZero();
    return x;
  }
  x.row(0) = -y.row(1) / dt;
  if (n > 2) x.middleRows(1, n - 2) = (y.middleRows(1, n - 2) - y.bottomRows(n - 2)) / dt;
  x.row(n - 1) = y.row(n - 1) / dt;
  return x;
}

Matrix second_difference(const Matrix& s, double dt) {
  const Index n = s.rows();
  const double inv = 1.0 / (dt * dt);
  Matrix a(n, s.cols());
  if (n == 1) {
    a.setZero();
    return a;
  }
  a.row(0) = (s.row(1) - s.row(0)) * inv;
  if (n > 2) {
    a.middleRows(1, n - 2) =
        (s.bottomRows(n - 2) - 2.0 * s.middleRows(1, n - 2) + s.topRows(n - 2)) * inv;
  }
  a.row(n - 1) = -(s.row(n - 1) - s.row(n - 2)) * inv;
  return a;
}

Matrix adjoint_second_difference(const Matrix& y, double dt) {
  return -adjoint_first_difference(first_difference(y, dt), dt);
}

VectorSeries first_difference(const DiscreteCurve& curve) {
  return {first_difference(curve.points(), curve.dt()), curve.dt()};
}

VectorSeries adjoint_first_difference(const VectorSeries& series) {
  return {adjoint_first_difference(series.values, series.dt), series.dt};
}

VectorSeries second_difference(const DiscreteCurve& curve) {
  return {second_difference(curve.points(), curve.dt()), curve.dt()};
}

double series_norm(const Matrix& values, NormMode mode) {
  if (values.size() == 0) return 0.0;
  if (mode == NormMode::RV) return values.cwiseAbs().maxCoeff();
  return values.rowwise().norm().maxCoeff();
}

double dual_norm(const Matrix& values, NormMode mode) {
  if (values.size() == 0) return 0.0;
  if (mode == NormMode::RV) return values.cwiseAbs().sum();
  return values.rowwise().norm().sum();
}

double lipschitz_upper_bound(double dt) noexcept {
  const double dt2 = dt * dt;
  return 4.0 / dt2 + 16.0 / (dt2 * dt2);
}

namespace {

// (D^T D + (D^T D)^2) x with D = first difference at step dt. Equals -M2 x + M2 (M2 x).
Matrix composite_normal(const Matrix& x, double dt) {
  Matrix b = -second_difference(x, dt);
  Matrix bb = -second_difference(b, dt);
  return b + bb;
}

}  // namespace

SpectralBound lipschitz_constant(Index n, Index d, double dt, int max_iters) {
  if (n < 2) throw InvalidArgument("lipschitz_constant needs n >= 2");
  if (d < 1) throw InvalidArgument("lipschitz_constant needs d >= 1");
  if (max_iters < 1) throw InvalidArgument("lipschitz_constant needs at least one iteration");
  if (!(dt > 0.0)) throw InvalidArgument("lipschitz_constant needs dt > 0");

  // Start near the highest-frequency mode; the random part keeps every mode represented.
  std::mt19937_64 rng(0x5eedULL);
  std::uniform_real_distribution<double> unif(-0.5, 0.5);
  Matrix x(n, d);
  for (Index i = 0; i < n; ++i)
    for (Index k = 0; k < d; ++k) x(i, k) = ((i % 2 == 0) ? 1.0 : -1.0) + unif(rng);
  x.normalize();

  SpectralBound out;
  double lambda = 0.0;
  for (int it = 1; it <= max_iters; ++it) {
    Matrix y = composite_normal(x, dt);
    const double next = x.cwiseProduct(y).sum();
    const double norm = y.norm();
    if (!(norm > 0.0) || !std::isfinite(norm)) break;
    x = y / norm;
    out.iterations = it;
    if (it > 1 && std::abs(next - lambda) <= 1e-8 * std::abs(next)) {
      lambda = next;
      out.converged = true;
      break;
    }
    lambda = next;
  }
  out.estimate = lambda;
  out.value = out.converged ? 1.01 * lambda : lipschitz_upper_bound(dt);
  return out;
}

Matrix sample_at_rate(const DiscreteCurve& curve, double sample_dt) {
  if (!(sample_dt > 0.0) || !std::isfinite(sample_dt))
    throw InvalidArgument("sample_dt must be positive");
  const double T = curve.duration();
  const Index m = static_cast<Index>(std::floor(T / sample_dt * (1.0 + 1e-12) + 1e-12));
  const Matrix& p = curve.points();
  const Index n = curve.size();
  Matrix out(m + 1, curve.dim());
  for (Index j = 0; j <= m; ++j) {
    const double pos = static_cast<double>(j) * sample_dt / curve.dt();
    Index i0 = static_cast<Index>(std::floor(pos));
    double frac = pos - static_cast<double>(i0);
    if (i0 >= n - 1) {
      i0 = n - 2;
      frac = 1.0;
    } else if (frac < 1e-12) {
      frac = 0.0;
    }
    out.row(j) = (1.0 - frac) * p.row(i0) + frac * p.row(i0 + 1);
  }
  return out;
}

}  // namespace gradwave
