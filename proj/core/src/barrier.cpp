#include "barrier.hpp"

#include <Eigen/Cholesky>
#include <Eigen/SparseCore>

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>

namespace gradwave::detail {

namespace {

using Vec = Eigen::VectorXd;
using Small = Eigen::Matrix<double, Eigen::Dynamic, 1, 0, 3, 1>;
using SmallMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, 0, 3, 3>;
using Sparse = Eigen::SparseMatrix<double>;

// Symmetric band matrix, lower band stored row by row; factored in place.
class BandedSym {
 public:
  BandedSym(Index n, Index w) : n_(n), w_(w), a_(static_cast<std::size_t>(n * (w + 1)), 0.0) {}

  void clear() { std::fill(a_.begin(), a_.end(), 0.0); }
  // Adds v at (r, c); only r >= c is kept.
  void add(Index r, Index c, double v) {
    if (r >= c) at(r, r - c) += v;
  }

  // LDL^T without pivoting; only an exactly zero pivot fails.
  bool factor() {
    for (Index j = 0; j < n_; ++j) {
      // Row j of L times D, computed in place of the band entries.
      const Index lo = std::max<Index>(0, j - w_);
      for (Index k = lo; k < j; ++k) {
        double v = at(j, j - k);
        for (Index m = std::max<Index>(lo, k - w_); m < k; ++m) v -= at(j, j - m) * at(k, k - m) * at(m, 0);
        at(j, j - k) = v / at(k, 0);
      }
      double diag = at(j, 0);
      for (Index k = lo; k < j; ++k) diag -= at(j, j - k) * at(j, j - k) * at(k, 0);
      if (diag == 0.0 || !std::isfinite(diag)) return false;
      at(j, 0) = diag;
    }
    return true;
  }

  void solve_in_place(double* x) const {
    for (Index i = 0; i < n_; ++i) {
      double v = x[i];
      for (Index k = std::max<Index>(0, i - w_); k < i; ++k) v -= at(i, i - k) * x[k];
      x[i] = v;
    }
    for (Index i = 0; i < n_; ++i) x[i] /= at(i, 0);
    for (Index i = n_ - 1; i >= 0; --i) {
      double v = x[i];
      for (Index k = i + 1; k <= std::min(n_ - 1, i + w_); ++k) v -= at(k, k - i) * x[k];
      x[i] = v;
    }
  }

  Vec solve(Vec x) const {
    solve_in_place(x.data());
    return x;
  }


 private:
  double& at(Index r, Index off) { return a_[static_cast<std::size_t>(r * (w_ + 1) + off)]; }
  double at(Index r, Index off) const { return a_[static_cast<std::size_t>(r * (w_ + 1) + off)]; }

  Index n_, w_;
  std::vector<double> a_;
};

// One bounded linear map of the curve: u = sum_j w_j s_{first + j}.
struct Stencil {
  Index first;
  int len;
  std::array<double, 3> w;
};

std::vector<Stencil> speed_stencils(Index n) {
  std::vector<Stencil> out;
  for (Index i = 1; i < n; ++i) out.push_back({i - 1, 2, {-1.0, 1.0, 0.0}});
  return out;
}

std::vector<Stencil> accel_stencils(Index n) {
  std::vector<Stencil> out;
  out.push_back({0, 2, {-1.0, 1.0, 0.0}});
  for (Index i = 1; i + 1 < n; ++i) out.push_back({i - 1, 3, {1.0, -2.0, 1.0}});
  out.push_back({n - 2, 2, {1.0, -1.0, 0.0}});
  return out;
}

// One family of bounded values (speed or acceleration) with its barrier.
struct Family {
  std::vector<Stencil> st;
  double bound;
  NormMode mode;
  Index d;

  Small apply(const Vec& s, const Stencil& k) const {
    Small u = Small::Zero(d);
    for (int j = 0; j < k.len; ++j)
      u += k.w[static_cast<std::size_t>(j)] * s.segment((k.first + j) * d, d);
    return u;
  }

  // -log of the slack; +inf outside.
  double barrier(const Small& u) const {
    if (mode == NormMode::RIV) {
      const double g = bound * bound - u.squaredNorm();
      return g > 0.0 ? -std::log(g) : std::numeric_limits<double>::infinity();
    }
    double v = 0.0;
    for (Index k = 0; k < d; ++k) {
      const double lo = bound + u[k], hi = bound - u[k];
      if (!(lo > 0.0 && hi > 0.0)) return std::numeric_limits<double>::infinity();
      v -= std::log(lo) + std::log(hi);
    }
    return v;
  }

  Small gradient(const Small& u) const {
    if (mode == NormMode::RIV) return (2.0 / (bound * bound - u.squaredNorm())) * u;
    Small g(d);
    for (Index k = 0; k < d; ++k) g[k] = 1.0 / (bound - u[k]) - 1.0 / (bound + u[k]);
    return g;
  }

  SmallMat hessian(const Small& u) const {
    if (mode == NormMode::RIV) {
      const double g = bound * bound - u.squaredNorm();
      return (2.0 / g) * SmallMat::Identity(d, d) + (4.0 / (g * g)) * u * u.transpose();
    }
    SmallMat h = SmallMat::Zero(d, d);
    for (Index k = 0; k < d; ++k)
      h(k, k) = 1.0 / ((bound - u[k]) * (bound - u[k])) + 1.0 / ((bound + u[k]) * (bound + u[k]));
    return h;
  }

  // Largest step after which every slack keeps at least `keep` of its current value.
  double max_step(const Small& u, const Small& du, double keep) const {
    double t = std::numeric_limits<double>::infinity();
    if (mode == NormMode::RIV) {
      // Along the unit direction e = du / |du| (du may be tiny enough to underflow when squared).
      const double m = du.cwiseAbs().maxCoeff();
      if (!(m > 0.0)) return t;
      const Small e = du / m;
      const double len = e.norm();
      const double B = u.dot(e) / len;
      const double C = -(1.0 - keep) * std::max(0.0, bound * bound - u.squaredNorm());
      const double root = std::sqrt(B * B - C);
      // Positive root of tau^2 + 2 B tau + C, in the form that avoids cancellation.
      const double tau = B > 0.0 ? -C / (B + root) : root - B;
      return tau / (m * len);
    }
    for (Index k = 0; k < d; ++k) {
      if (du[k] > 0.0) t = std::min(t, (1.0 - keep) * (bound - u[k]) / du[k]);
      if (du[k] < 0.0) t = std::min(t, (1.0 - keep) * (-bound - u[k]) / du[k]);
    }
    return t;
  }

  // bound * |q|_* - <u, q>: this constraint's share of the duality gap.
  double gap(const Small& u, const Small& q) const {
    const double dn = mode == NormMode::RIV ? q.norm() : q.lpNorm<1>();
    return bound * dn - u.dot(q);
  }
};

}  // namespace

std::optional<BarrierResult> barrier_solve(const Matrix& c, double a, double b, NormMode mode,
                                           const AffineConstraintSet& affine, const Matrix& s0,
                                           double gap_tol, int max_newton) {
  const Index n = c.rows(), d = c.cols(), N = n * d;
  if (n < 2 || d < 1 || d > 3) return std::nullopt;
  const std::array<Family, 2> fam{Family{speed_stencils(n), a, mode, d},
                                  Family{accel_stencils(n), b, mode, d}};

  const Vec cv = Eigen::Map<const Vec>(c.data(), N);
  Vec s = Eigen::Map<const Vec>(s0.data(), N);

  // Affine rows as a sparse p x N matrix.
  const Index p = affine.size();
  Sparse A(p, N);
  Vec rhs(p);
  {
    std::vector<Eigen::Triplet<double>> trip;
    for (Index r = 0; r < p; ++r) {
      const AffineRow& row = affine.rows()[static_cast<std::size_t>(r)];
      for (std::size_t j = 0; j < row.cols.size(); ++j) trip.emplace_back(r, row.cols[j], row.coefs[j]);
      rhs[r] = row.rhs;
    }
    A.setFromTriplets(trip.begin(), trip.end());
  }
  const Eigen::MatrixXd At = Eigen::MatrixXd(A.transpose());

  auto objective = [&](const Vec& x, double mu) {
    double v = 0.5 * (x - cv).squaredNorm();
    for (const Family& f : fam)
      for (const Stencil& k : f.st) {
        const double phi = f.barrier(f.apply(x, k));
        if (!std::isfinite(phi)) return std::numeric_limits<double>::infinity();
        v += mu * phi;
      }
    return v;
  };
  if (!std::isfinite(objective(s, 1.0))) return std::nullopt;

  // Samples interact through stencils spanning three of them.
  BandedSym H(N, 3 * d - 1);

  Vec grad(N);
  auto assemble = [&](double mu) {
    H.clear();
    grad = s - cv;
    for (Index i = 0; i < N; ++i) H.add(i, i, 1.0);
    for (const Family& f : fam)
      for (const Stencil& k : f.st) {
        const Small u = f.apply(s, k);
        const Small g = mu * f.gradient(u);
        const SmallMat h = mu * f.hessian(u);
        for (int j = 0; j < k.len; ++j) {
          const double wj = k.w[static_cast<std::size_t>(j)];
          grad.segment((k.first + j) * d, d) += wj * g;
          for (int l = 0; l <= j; ++l) {
            const double wl = k.w[static_cast<std::size_t>(l)];
            for (Index r = 0; r < d; ++r)
              for (Index q = 0; q < d; ++q)
                H.add((k.first + j) * d + r, (k.first + l) * d + q, wj * wl * h(r, q));
          }
        }
      }
  };

  // Multipliers mu grad(phi) at s.
  auto multipliers = [&](double mu, Matrix& q1, Matrix& q2) {
    q1 = Matrix::Zero(n, d);
    q2 = Matrix::Zero(n, d);
    for (std::size_t j = 0; j < fam[0].st.size(); ++j)
      q1.row(static_cast<Index>(j) + 1) = (mu * fam[0].gradient(fam[0].apply(s, fam[0].st[j]))).transpose();
    for (std::size_t j = 0; j < fam[1].st.size(); ++j)
      q2.row(static_cast<Index>(j)) = (mu * fam[1].gradient(fam[1].apply(s, fam[1].st[j]))).transpose();
  };
  // Duality gap on the central path.
  auto central_gap = [&](double mu) {
    double g = 0.0;
    for (const Family& f : fam)
      for (const Stencil& k : f.st) {
        const Small u = f.apply(s, k);
        g += f.gap(u, mu * f.gradient(u));
      }
    return g;
  };

  const double scale = std::max(1.0, 0.5 * (s - cv).squaredNorm());
  const double n_terms = static_cast<double>(fam[0].st.size() + fam[1].st.size());
  double mu = 0.5 * scale / n_terms;
  double last_decrement = 0.0;
  BarrierResult out;
  std::optional<BarrierResult> best;
  bool out_of_steps = false;
  Eigen::MatrixXd Y;
  while (true) {
    // Centered enough once the decrement is small next to the gap of this barrier weight;
    // past 50 steps the Hessian is too ill-conditioned to do better.
    const double newton_tol = std::max(1e-3 * n_terms * mu, 1e-15 * scale);
    for (int it = 0; it < 50; ++it) {
      if (out.newton_steps >= max_newton) {
        out_of_steps = true;
        break;
      }
      assemble(mu);
      if (!H.factor()) return best;

      Vec step = -H.solve(grad);
      if (p > 0) {
        // Equality-constrained step through the p x p Schur complement.
        Y = At;
        for (Index col = 0; col < p; ++col) H.solve_in_place(Y.col(col).data());
        const Eigen::MatrixXd S = A * Y;
        const Vec r = rhs - A * s;
        const Vec w = S.ldlt().solve(-(r - A * step));
        step -= Y * w;
      }
      if (!step.allFinite()) return best;
      ++out.newton_steps;
      const double decrement = -grad.dot(step);
      // A non-descent direction means the factorization has run out of digits.
      if (!(decrement > 0.0)) break;
      last_decrement = decrement;
      if (decrement <= 2.0 * newton_tol) break;

      double tmax = 1.0;
      for (const Family& f : fam)
        for (const Stencil& k : f.st)
          tmax = std::min(tmax, f.max_step(f.apply(s, k), f.apply(step, k), 0.01));
      double t = tmax;
      const double f0 = objective(s, mu);
      bool moved = false;
      while (t >= 1e-14) {
        const Vec trial = s + t * step;
        if (objective(trial, mu) <= f0 - 0.25 * t * decrement) {
          s = trial;
          moved = true;
          break;
        }
        t *= 0.5;
      }
      // No progress possible at this precision; treat as centered.
      if (!moved) break;
    }
    multipliers(mu, out.q1, out.q2);
    out.gap = central_gap(mu) + 0.5 * last_decrement;
    // Stop at the tolerance, or once shrinking the barrier no longer pays at this precision.
    const bool stalled = best && out.gap > 0.5 * best->gap;
    if (!best || out.gap < best->gap) {
      out.s = Matrix(n, d);
      Eigen::Map<Vec>(out.s.data(), N) = s;
      best = out;
    } else {
      best->newton_steps = out.newton_steps;
    }
    if (out.gap <= gap_tol || stalled || out_of_steps) break;
    mu *= 0.1;
  }
  return best;
}

}  // namespace gradwave::detail
