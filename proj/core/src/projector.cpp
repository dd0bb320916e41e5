#include "gradwave/projector.hpp"

#include "gradwave/error.hpp"

#include "barrier.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace gradwave {

void ProjectionSettings::validate() const {
  if (n_it < 1) throw InvalidArgument("n_it must be >= 1");
  if (step && !(*step > 0.0)) throw InvalidArgument("step must be positive");
  if (!(feasibility_tol >= 0.0)) throw InvalidArgument("feasibility_tol must be >= 0");
  if (!(affine_tol >= 0.0)) throw InvalidArgument("affine_tol must be >= 0");
  if (check_every < 1) throw InvalidArgument("check_every must be >= 1");
  if (stagnation_window < 1) throw InvalidArgument("stagnation_window must be >= 1");
  if (power_iters < 1) throw InvalidArgument("power_iters must be >= 1");
  if (coarse_min_size < 2) throw InvalidArgument("coarse_min_size must be >= 2");
}

namespace {

void require_same_shape(const Matrix& a, const Matrix& b, const char* what) {
  if (a.rows() != b.rows() || a.cols() != b.cols())
    throw InvalidArgument(std::string(what) + ": shape mismatch");
}

void require_solver_shape(const AffineSolver& solver, const DiscreteCurve& c) {
  if (solver.constraints().n() != c.size() || solver.constraints().d() != c.dim())
    throw InvalidArgument("affine constraint set shape does not match the curve");
}

// The problem as iterated: operators at step h, bounds a and b in matching units.
struct Formulation {
  const Matrix* c = nullptr;
  Index n = 0;
  Index d = 0;
  double h = 1.0;
  double a = 1.0;
  double b = 1.0;
  NormMode mode = NormMode::RIV;
  const AffineSolver* solver = nullptr;
};

// s = P_A(c - Mdot^* y1 - Mddot y2), written into s.
void recover_primal(const Formulation& f, const Matrix& y1, const Matrix& y2, Matrix& s) {
  const Index n = f.n, d = f.d;
  const double ih = 1.0 / f.h;
  const double ih2 = ih * ih;
  const double* C = f.c->data();
  const double* Y1 = y1.data();
  const double* Y2 = y2.data();
  double* S = s.data();
  for (Index k = 0; k < d; ++k) {
    S[k] = C[k] + Y1[d + k] * ih - (Y2[d + k] - Y2[k]) * ih2;
  }
  for (Index i = 1; i + 1 < n; ++i) {
    const Index base = i * d;
    for (Index k = 0; k < d; ++k) {
      const Index idx = base + k;
      const double adj1 = (Y1[idx] - Y1[idx + d]) * ih;
      const double m2 = (Y2[idx + d] - 2.0 * Y2[idx] + Y2[idx - d]) * ih2;
      S[idx] = C[idx] - adj1 - m2;
    }
  }
  const Index last = (n - 1) * d;
  for (Index k = 0; k < d; ++k) {
    const Index idx = last + k;
    S[idx] = C[idx] - Y1[idx] * ih + (Y2[idx] - Y2[idx - d]) * ih2;
  }
  if (f.solver && !f.solver->empty()) s = f.solver->project(s);
}

// Velocity and acceleration of s at sample i, axis k.
inline double velocity_at(const double* S, Index i, Index k, Index d, double ih) {
  return i == 0 ? 0.0 : (S[i * d + k] - S[(i - 1) * d + k]) * ih;
}

inline double accel_at(const double* S, Index i, Index k, Index n, Index d, double ih2) {
  if (i == 0) return (S[d + k] - S[k]) * ih2;
  if (i == n - 1) return -(S[i * d + k] - S[(i - 1) * d + k]) * ih2;
  return (S[(i + 1) * d + k] - 2.0 * S[i * d + k] + S[(i - 1) * d + k]) * ih2;
}

// In-place prox of threshold * dual_norm on one sample of length d.
inline void prox_sample(double* u, Index d, double threshold, NormMode mode) {
  if (threshold <= 0.0) return;
  if (mode == NormMode::RV) {
    for (Index k = 0; k < d; ++k) {
      const double mag = std::abs(u[k]) - threshold;
      u[k] = mag > 0.0 ? std::copysign(mag, u[k]) : 0.0;
    }
    return;
  }
  double sq = 0.0;
  for (Index k = 0; k < d; ++k) sq += u[k] * u[k];
  const double norm = std::sqrt(sq);
  const double scale = norm > threshold ? 1.0 - threshold / norm : 0.0;
  for (Index k = 0; k < d; ++k) u[k] *= scale;
}

struct CheckValues {
  double speed = 0.0;
  double accel = 0.0;
  double distance_sq = 0.0;  // sum |s - c|^2
  double dual_value = 0.0;
};

CheckValues evaluate(const Formulation& f, const Matrix& s, const Matrix& q1, const Matrix& q2) {
  const Index n = f.n, d = f.d;
  const double ih = 1.0 / f.h;
  const double ih2 = ih * ih;
  const double* S = s.data();
  const double* C = f.c->data();
  const double* Q1 = q1.data();
  const double* Q2 = q2.data();
  CheckValues out;
  double pairing = 0.0, dual1 = 0.0, dual2 = 0.0;
  for (Index i = 0; i < n; ++i) {
    double vs = 0.0, as = 0.0, vmax = 0.0, amax = 0.0, n1 = 0.0, n2 = 0.0, r1 = 0.0, r2 = 0.0;
    for (Index k = 0; k < d; ++k) {
      const Index idx = i * d + k;
      const double v = velocity_at(S, i, k, d, ih);
      const double a = accel_at(S, i, k, n, d, ih2);
      pairing += v * Q1[idx] + a * Q2[idx];
      const double diff = S[idx] - C[idx];
      out.distance_sq += diff * diff;
      vs += v * v;
      as += a * a;
      vmax = std::max(vmax, std::abs(v));
      amax = std::max(amax, std::abs(a));
      n1 += Q1[idx] * Q1[idx];
      n2 += Q2[idx] * Q2[idx];
      r1 += std::abs(Q1[idx]);
      r2 += std::abs(Q2[idx]);
    }
    if (f.mode == NormMode::RV) {
      out.speed = std::max(out.speed, vmax);
      out.accel = std::max(out.accel, amax);
      dual1 += r1;
      dual2 += r2;
    } else {
      out.speed = std::max(out.speed, std::sqrt(vs));
      out.accel = std::max(out.accel, std::sqrt(as));
      dual1 += std::sqrt(n1);
      dual2 += std::sqrt(n2);
    }
  }
  out.dual_value = pairing + 0.5 * out.distance_sq - f.a * dual1 - f.b * dual2;
  return out;
}

struct RunRecord {
  std::vector<double>* dual_history = nullptr;
  std::vector<double>* distances = nullptr;
  std::vector<Matrix>* iterates = nullptr;
};

struct RunOutcome {
  int iterations = 0;
  bool converged = false;
};

// Accelerated proximal gradient on the dual, starting from (q1, q2); updates them in place.
RunOutcome run_dual_iteration(const Formulation& f, double step, const ProjectionSettings& st,
                              Matrix& q1, Matrix& q2, Matrix& y1, Matrix& y2, int& k_counter,
                              const RunRecord& record) {
  const Index n = f.n, d = f.d;
  const double ih = 1.0 / f.h;
  const double ih2 = ih * ih;
  const double th1 = step * f.a;
  const double th2 = step * f.b;
  const bool every = st.track_iterates;
  const int stride = every ? 1 : st.check_every;
  const std::size_t lookback =
      static_cast<std::size_t>((st.stagnation_window + stride - 1) / stride);

  Matrix s(n, d), sq(n, d), q1n(n, d), q2n(n, d);
  std::vector<double> buf1(static_cast<std::size_t>(d)), buf2(static_cast<std::size_t>(d));
  std::vector<double> local_distances;

  RunOutcome out;
  for (int it = 1; it <= st.n_it; ++it) {
    recover_primal(f, y1, y2, s);
    const double* S = s.data();
    const double* Y1 = y1.data();
    const double* Y2 = y2.data();
    double* N1 = q1n.data();
    double* N2 = q2n.data();
    for (Index i = 0; i < n; ++i) {
      for (Index k = 0; k < d; ++k) {
        const Index idx = i * d + k;
        buf1[static_cast<std::size_t>(k)] = Y1[idx] + step * velocity_at(S, i, k, d, ih);
        buf2[static_cast<std::size_t>(k)] = Y2[idx] + step * accel_at(S, i, k, n, d, ih2);
      }
      prox_sample(buf1.data(), d, th1, f.mode);
      prox_sample(buf2.data(), d, th2, f.mode);
      for (Index k = 0; k < d; ++k) {
        N1[i * d + k] = buf1[static_cast<std::size_t>(k)];
        N2[i * d + k] = buf2[static_cast<std::size_t>(k)];
      }
    }
    ++k_counter;
    const double kk = static_cast<double>(k_counter);
    const double momentum = (kk - 1.0) / (kk + 2.0);
    y1 = q1n + momentum * (q1n - q1);
    y2 = q2n + momentum * (q2n - q2);
    q1.swap(q1n);
    q2.swap(q2n);
    out.iterations = it;

    if (!y1.allFinite() || !y2.allFinite())
      throw NumericFailure("dual iteration produced a non-finite value at iteration " +
                           std::to_string(it));

    if (it % stride != 0 && it != st.n_it) continue;
    recover_primal(f, q1, q2, sq);
    const CheckValues cv = evaluate(f, sq, q1, q2);
    if (!std::isfinite(cv.dual_value))
      throw NumericFailure("dual objective is not finite at iteration " + std::to_string(it));
    const double dist = std::sqrt(cv.distance_sq);
    if (record.dual_history) record.dual_history->push_back(cv.dual_value);
    if (record.distances) record.distances->push_back(dist);
    if (record.iterates) record.iterates->push_back(sq);
    local_distances.push_back(dist);

    const bool feasible = (cv.speed - f.a) <= st.feasibility_tol * f.a &&
                          (cv.accel - f.b) <= st.feasibility_tol * f.b;
    bool stagnant = false;
    if (local_distances.size() > lookback) {
      const double past = local_distances[local_distances.size() - 1 - lookback];
      stagnant = std::abs(dist - past) <= st.stagnation_tol * std::max(dist, 1e-300) ||
                 (dist == 0.0 && past == 0.0);
    }
    out.converged = feasible && stagnant;
    if (out.converged && st.stop_when_converged) break;
  }
  return out;
}

// Linear interpolation of the rows of x onto m equally spaced positions spanning the same range.
Matrix resample_rows(const Matrix& x, Index m) {
  const Index n = x.rows();
  Matrix out(m, x.cols());
  for (Index j = 0; j < m; ++j) {
    const double pos = m == 1 ? 0.0 : static_cast<double>(j) * static_cast<double>(n - 1) /
                                          static_cast<double>(m - 1);
    Index i0 = static_cast<Index>(std::floor(pos));
    if (i0 >= n - 1) i0 = n - 2;
    const double frac = pos - static_cast<double>(i0);
    out.row(j) = (1.0 - frac) * x.row(i0) + frac * x.row(i0 + 1);
  }
  return out;
}

double distance_sq(const Matrix& a, const Matrix& b) { return (a - b).squaredNorm(); }

Matrix blend(const Matrix& anchor, const Matrix& s, double theta) {
  return anchor + theta * (s - anchor);
}

double max_speed(const Matrix& s, double dt, NormMode mode) {
  return series_norm(first_difference(s, dt), mode);
}
double max_accel(const Matrix& s, double dt, NormMode mode) {
  return series_norm(second_difference(s, dt), mode);
}

// A curve satisfying the affine constraints strictly inside the bounds: the constant
// solution nearest the centroid of s if there is one, else the projection of that centroid.
std::optional<Matrix> feasible_anchor(const AffineConstraintSet& affine, const AffineSolver& solver,
                                      const Matrix& s, const KinematicLimits& limits, double dt) {
  const Eigen::RowVectorXd centroid = s.colwise().mean();
  if (const auto x = affine.constant_solution(centroid.transpose())) {
    Matrix p(s.rows(), s.cols());
    p.rowwise() = x->transpose();
    return p;
  }
  Matrix p(s.rows(), s.cols());
  p.rowwise() = centroid;
  p = solver.project(p);
  if (max_speed(p, dt, limits.mode) < limits.alpha && max_accel(p, dt, limits.mode) < limits.beta)
    return p;
  return std::nullopt;
}

// Largest theta in [0, 1] with anchor + theta (s - anchor) inside the bounds.
double restoration_scale(const Matrix& anchor, const Matrix& s, const KinematicLimits& limits,
                         double dt) {
  auto fits = [&](double theta) {
    const Matrix x = blend(anchor, s, theta);
    return max_speed(x, dt, limits.mode) <= limits.alpha &&
           max_accel(x, dt, limits.mode) <= limits.beta;
  };
  if (fits(1.0)) return 1.0;
  if (max_speed(anchor, dt, limits.mode) == 0.0 && max_accel(anchor, dt, limits.mode) == 0.0) {
    // Constant anchor: the bounds scale linearly.
    const double over = std::max(max_speed(s, dt, limits.mode) / limits.alpha,
                                 max_accel(s, dt, limits.mode) / limits.beta);
    double theta = 1.0 / over;
    while (theta > 0.0 && !fits(theta)) theta = std::nextafter(theta, 0.0);
    return theta;
  }
  double lo = 0.0, hi = 1.0;
  for (int i = 0; i < 60; ++i) {
    const double mid = 0.5 * (lo + hi);
    (fits(mid) ? lo : hi) = mid;
  }
  return lo;
}

}  // namespace

// ---------------------------------------------------------------------------------------------

Matrix prox_dual(const Matrix& q, double threshold, NormMode mode) {
  if (!(threshold >= 0.0)) throw InvalidArgument("prox threshold must be >= 0");
  Matrix out = q;
  for (Index i = 0; i < out.rows(); ++i) prox_sample(out.row(i).data(), out.cols(), threshold, mode);
  return out;
}

DiscreteCurve primal_from_dual(const VectorSeries& q1, const VectorSeries& q2,
                               const DiscreteCurve& c, const AffineSolver& solver) {
  require_same_shape(q1.values, c.points(), "primal_from_dual q1");
  require_same_shape(q2.values, c.points(), "primal_from_dual q2");
  require_solver_shape(solver, c);
  Formulation f;
  f.c = &c.points();
  f.n = c.size();
  f.d = c.dim();
  f.h = c.dt();
  f.solver = &solver;
  Matrix s(f.n, f.d);
  recover_primal(f, q1.values, q2.values, s);
  return DiscreteCurve(std::move(s), c.dt());
}

std::pair<VectorSeries, VectorSeries> grad_dual(const VectorSeries& q1, const VectorSeries& q2,
                                                const DiscreteCurve& c,
                                                const AffineSolver& solver) {
  const DiscreteCurve s = primal_from_dual(q1, q2, c, solver);
  return {VectorSeries{-first_difference(s.points(), c.dt()), c.dt()},
          VectorSeries{-second_difference(s.points(), c.dt()), c.dt()}};
}

double dual_smooth_value(const VectorSeries& q1, const VectorSeries& q2, const DiscreteCurve& c,
                         const AffineSolver& solver) {
  const DiscreteCurve s = primal_from_dual(q1, q2, c, solver);
  const Matrix v = first_difference(s.points(), c.dt());
  const Matrix a = second_difference(s.points(), c.dt());
  return -(v.cwiseProduct(q1.values).sum() + a.cwiseProduct(q2.values).sum() +
           0.5 * distance_sq(s.points(), c.points()));
}

double dual_objective(const VectorSeries& q1, const VectorSeries& q2, const DiscreteCurve& c,
                      const KinematicLimits& limits, const AffineSolver& solver) {
  limits.validate();
  return -dual_smooth_value(q1, q2, c, solver) - limits.alpha * dual_norm(q1.values, limits.mode) -
         limits.beta * dual_norm(q2.values, limits.mode);
}

ProjectionResult project_curve(const DiscreteCurve& c, const KinematicLimits& limits,
                               const ProjectionSettings& settings) {
  return project_curve(c, limits, AffineConstraintSet(c.size(), c.dim(), c.dt()), settings);
}

ProjectionResult project_curve(const DiscreteCurve& c, const KinematicLimits& limits,
                               const AffineConstraintSet& affine,
                               const ProjectionSettings& settings) {
  limits.validate();
  settings.validate();
  if (affine.n() != c.size() || affine.d() != c.dim())
    throw InvalidArgument("affine constraint set shape does not match the curve");
  if (std::abs(affine.dt() - c.dt()) > 1e-12 * c.dt())
    throw InvalidArgument("affine constraint set dt does not match the curve");

  const Index n = c.size(), d = c.dim();
  const double T = c.duration();
  const AffineSolver solver(affine);

  auto unit_for = [&](double dt) { return settings.normalize_time ? 1.0 : dt; };
  auto make_formulation = [&](const Matrix& pts, Index m, double dt, const AffineSolver* sol) {
    Formulation f;
    f.c = &pts;
    f.n = m;
    f.d = d;
    f.h = unit_for(dt);
    f.a = limits.alpha * dt / f.h;
    f.b = limits.beta * dt * dt / (f.h * f.h);
    f.mode = limits.mode;
    f.solver = sol;
    return f;
  };
  auto step_for = [&](Index m, double h, double& lipschitz) {
    lipschitz = lipschitz_constant(m, d, h, settings.power_iters).value;
    return settings.step ? *settings.step : 1.0 / lipschitz;
  };

  ProjectionResult result(DiscreteCurve(c.points(), c.dt()));
  Matrix q1 = Matrix::Zero(n, d), q2 = Matrix::Zero(n, d);

  // Coarse-to-fine warm start.
  if (settings.coarse_to_fine) {
    std::vector<Index> sizes;
    Index m = n;
    while ((m - 1) / 2 + 1 >= settings.coarse_min_size && (m - 1) / 2 + 1 < m) {
      m = (m - 1) / 2 + 1;
      sizes.push_back(m);
    }
    std::reverse(sizes.begin(), sizes.end());
    Matrix cq1, cq2;
    double prev_dt = 0.0;
    bool have = false;
    for (const Index lvl : sizes) {
      const double dt_l = T / static_cast<double>(lvl - 1);
      std::optional<AffineSolver> lsolver;
      try {
        lsolver.emplace(affine.resampled(lvl, dt_l));
      } catch (const Error&) {
        // The constraints do not survive this coarsening; start over from a finer grid.
        have = false;
        continue;
      }
      const Matrix cl = resample_rows(c.points(), lvl);
      const Formulation f = make_formulation(cl, lvl, dt_l, &*lsolver);
      Matrix lq1, lq2;
      if (have) {
        const double r1 = (prev_dt / unit_for(prev_dt)) * (f.h / dt_l);
        lq1 = resample_rows(cq1, lvl) * r1;
        lq2 = resample_rows(cq2, lvl) * (r1 * r1);
      } else {
        lq1 = Matrix::Zero(lvl, d);
        lq2 = Matrix::Zero(lvl, d);
      }
      Matrix y1 = lq1, y2 = lq2;
      int k_counter = 0;
      double lip = 0.0;
      const double step = step_for(lvl, f.h, lip);
      ProjectionSettings lst = settings;
      lst.track_iterates = false;
      const RunOutcome o = run_dual_iteration(f, step, lst, lq1, lq2, y1, y2, k_counter, {});
      result.coarse_iterations += o.iterations;
      result.level_sizes.push_back(lvl);
      cq1 = std::move(lq1);
      cq2 = std::move(lq2);
      prev_dt = dt_l;
      have = true;
    }
    if (have) {
      const double r1 = (prev_dt / unit_for(prev_dt)) * (unit_for(c.dt()) / c.dt());
      q1 = resample_rows(cq1, n) * r1;
      q2 = resample_rows(cq2, n) * (r1 * r1);
    } else {
      result.level_sizes.clear();
    }
  }

  const Formulation f = make_formulation(c.points(), n, c.dt(), &solver);
  double lip = 0.0;
  const double step = step_for(n, f.h, lip);
  result.lipschitz = lip;
  result.step = step;
  result.time_unit = f.h;
  result.initial_dual.q1 = q1;
  result.initial_dual.q2 = q2;

  Matrix y1 = q1, y2 = q2;
  int k_counter = 0;
  RunRecord record;
  record.dual_history = &result.dual_objective_history;
  record.distances = &result.iterate_distances;
  if (settings.track_iterates) record.iterates = &result.iterates;
  const RunOutcome o = run_dual_iteration(f, step, settings, q1, q2, y1, y2, k_counter, record);
  result.iterations = o.iterations;

  Matrix s(n, d);
  recover_primal(f, q1, q2, s);
  if (!s.allFinite()) throw NumericFailure("projection produced a non-finite curve");
  DiscreteCurve raw(s, c.dt());
  result.raw_residuals = feasibility_report(raw, limits, solver);

  const double affine_tol =
      settings.affine_tol * std::max(1.0, affine.empty() ? 0.0 : affine.rhs().cwiseAbs().maxCoeff());
  const double tol = settings.feasibility_tol;
  result.iteration_converged = result.raw_residuals.within(tol, affine_tol);

  if (!result.iteration_converged && (settings.restore_feasibility || settings.polish) &&
      result.raw_residuals.affine_residual <= affine_tol) {
    if (const auto anchor = feasible_anchor(affine, solver, s, limits, c.dt())) {
      const double theta = restoration_scale(*anchor, s, limits, c.dt());
      const Matrix restored = blend(*anchor, s, theta);
      bool done = false;
      if (settings.polish) {
        // Strictly inside, as the barrier needs.
        const Matrix start = blend(*anchor, s, 0.98 * theta);
        const double objective = 0.5 * distance_sq(start, c.points());
        const double h = f.h;
        if (auto b = detail::barrier_solve(c.points(), f.a * h, f.b * h * h, limits.mode, affine,
                                           start, settings.polish_gap_tol * objective)) {
          result.newton_steps = b->newton_steps;
          result.duality_gap = b->gap;
          Matrix polished = std::move(b->s);
          if (!affine.empty()) polished = solver.project(polished);
          const FeasibilityReport rep = feasibility_report(DiscreteCurve(polished, c.dt()), limits, solver);
          if (rep.within(tol, affine_tol)) {
            s = std::move(polished);
            q1 = b->q1 * h;
            q2 = b->q2 * (h * h);
            y1 = q1;
            y2 = q2;
            result.polished = true;
            done = true;
          }
        }
      }
      if (!done && settings.restore_feasibility) {
        s = restored;
        result.restoration_scale = theta;
        result.restored = theta < 1.0;
      }
    }
  }

  result.curve = DiscreteCurve(std::move(s), c.dt());
  result.residuals = feasibility_report(result.curve, limits, solver);
  result.converged = result.residuals.within(tol, affine_tol);
  const double dsq = distance_sq(result.curve.points(), c.points());
  result.distance = std::sqrt(dsq * c.dt());
  result.distance_normalized = std::sqrt(dsq / static_cast<double>(n));
  result.dual.q1 = std::move(q1);
  result.dual.q2 = std::move(q2);
  result.dual.y1 = std::move(y1);
  result.dual.y2 = std::move(y2);
  result.dual.k = k_counter;
  return result;
}

CertificateReport convergence_certificate(const ProjectionResult& run,
                                          const ProjectionResult& reference, int k_lo, int k_hi) {
  if (run.iterates.empty())
    throw InvalidArgument("certificate needs a run with track_iterates enabled");
  if (!reference.iteration_converged && !reference.polished)
    throw InvalidArgument("certificate reference run did not converge");
  const Matrix& s_ref = reference.curve.points();
  require_same_shape(run.iterates.front(), s_ref, "convergence_certificate");
  if (std::abs(run.time_unit - reference.time_unit) > 1e-15 * run.time_unit)
    throw InvalidArgument("run and reference were solved in different units");
  if (run.initial_dual.q1.size() != reference.dual.q1.size())
    throw InvalidArgument("run and reference dual shapes differ");

  CertificateReport rep;
  const double qdist = distance_sq(run.initial_dual.q1, reference.dual.q1) +
                       distance_sq(run.initial_dual.q2, reference.dual.q2);
  rep.denominator = 2.0 * run.lipschitz * qdist;

  const int K = static_cast<int>(run.iterates.size());
  rep.sq_distances.reserve(static_cast<std::size_t>(K));
  rep.ratios.reserve(static_cast<std::size_t>(K));
  double max_sq = 0.0;
  for (int k = 1; k <= K; ++k) {
    const double dsq = distance_sq(run.iterates[static_cast<std::size_t>(k - 1)], s_ref);
    rep.sq_distances.push_back(dsq);
    max_sq = std::max(max_sq, dsq);
  }
  const double scale = std::max(1.0, s_ref.cwiseAbs().maxCoeff());
  if (qdist <= 1e-24 && max_sq <= 1e-20 * scale * scale) {
    rep.trivial = true;
    rep.ratios.assign(static_cast<std::size_t>(K), 0.0);
    rep.slope = std::numeric_limits<double>::quiet_NaN();
    return rep;
  }
  for (int k = 1; k <= K; ++k) {
    const double kk = static_cast<double>(k);
    const double r = rep.denominator > 0.0
                         ? kk * kk * rep.sq_distances[static_cast<std::size_t>(k - 1)] / rep.denominator
                         : std::numeric_limits<double>::infinity();
    rep.ratios.push_back(r);
    if (r > rep.max_ratio) {
      rep.max_ratio = r;
      rep.worst_k = k;
    }
  }

  const int hi = k_hi > 0 ? std::min(k_hi, K) : K;
  const int lo = std::max(1, k_lo);
  double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
  int cnt = 0;
  for (int k = lo; k <= hi; ++k) {
    const double dsq = rep.sq_distances[static_cast<std::size_t>(k - 1)];
    if (!(dsq > 0.0)) continue;
    const double x = std::log(static_cast<double>(k));
    const double y = 0.5 * std::log(dsq);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
    ++cnt;
  }
  const double den = cnt * sxx - sx * sx;
  rep.slope = cnt >= 2 && den > 0.0 ? (cnt * sxy - sx * sy) / den
                                    : std::numeric_limits<double>::quiet_NaN();
  return rep;
}

}  // namespace gradwave
