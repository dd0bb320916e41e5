#include "oracle.hpp"

#include <doctest.h>

#include <gradwave/error.hpp>
#include <gradwave/projector.hpp>
#include <gradwave/reparam.hpp>
#include <gradwave/trajectories.hpp>

using namespace gradwave;

namespace {

Matrix row2(double a, double b) {
  Matrix m(1, 2);
  m << a, b;
  return m;
}

// Random walk whose steps exceed the bounds, so both constraints bind somewhere.
DiscreteCurve wiggly(Index n, std::uint64_t seed, double step = 1.5) {
  std::mt19937_64 rng(seed);
  Matrix p = Matrix::Zero(n, 2);
  for (Index i = 1; i < n; ++i) p.row(i) = p.row(i - 1) + oracle::random_matrix(1, 2, rng, step);
  return DiscreteCurve(p, 1.0);
}

ProjectionSettings accurate() {
  ProjectionSettings s;
  s.n_it = 20000;
  s.polish_gap_tol = 1e-14;
  return s;
}

}  // namespace

TEST_CASE("prox of the dual norms") {
  Matrix q(2, 1);
  q << 3.0, -0.5;
  CHECK(prox_dual(q, 0.0, NormMode::RV) == q);
  const Matrix rv = prox_dual(q, 1.0, NormMode::RV);
  CHECK(rv(0, 0) == 2.0);
  CHECK(rv(1, 0) == 0.0);

  CHECK(prox_dual(row2(3, 4), 5.0, NormMode::RIV).norm() == 0.0);
  const Matrix riv = prox_dual(row2(3, 4), 2.5, NormMode::RIV);
  CHECK(riv(0, 0) == doctest::Approx(1.5));
  CHECK(riv(0, 1) == doctest::Approx(2.0));
  CHECK(prox_dual(Matrix::Zero(3, 2), 1.0, NormMode::RIV) == Matrix::Zero(3, 2));
}

TEST_CASE("prox matches a brute-force minimization") {
  // argmin_x 1/2 |x - q|^2 + t |x|_* over a grid, one two-dimensional sample.
  const Matrix q = row2(1.3, -0.7);
  const double t = 0.6;
  for (NormMode mode : {NormMode::RV, NormMode::RIV}) {
    double best = 1e300;
    Matrix arg = Matrix::Zero(1, 2);
    const int steps = 800;
    for (int i = 0; i <= steps; ++i)
      for (int j = 0; j <= steps; ++j) {
        const Matrix x = row2(-2.0 + 4.0 * i / steps, -2.0 + 4.0 * j / steps);
        const double f = 0.5 * (x - q).squaredNorm() + t * dual_norm(x, mode);
        if (f < best) {
          best = f;
          arg = x;
        }
      }
    CHECK((prox_dual(q, t, mode) - arg).norm() <= 0.01);
  }
  // Moreau: prox of t |.|_1 plus projection onto the max-norm ball of radius t gives q.
  const Matrix p = prox_dual(q, t, NormMode::RV);
  const Matrix clip = q.cwiseMax(-t).cwiseMin(t);
  CHECK((p + clip - q).norm() < 1e-15);
}

TEST_CASE("primal from dual") {
  std::mt19937_64 rng(1);
  const Index n = 8;
  const DiscreteCurve c(oracle::random_matrix(n, 2, rng), 0.5);
  const VectorSeries zero{Matrix::Zero(n, 2), 0.5};
  const AffineSolver none(AffineConstraintSet(n, 2, 0.5));
  CHECK(primal_from_dual(zero, zero, c, none).points() == c.points());

  AffineConstraintSet pin(n, 2, 0.5);
  pin.add_point_constraint(0, Eigen::Vector2d::Zero());
  const AffineSolver pinned(pin);
  Matrix expect = c.points();
  expect.row(0).setZero();
  CHECK((primal_from_dual(zero, zero, c, pinned).points() - expect).norm() < 1e-15);

  // Minimizer of 1/2|s - c|^2 + <q1, D s> + <q2, D2 s> on {A s = v}, by a dense KKT solve.
  AffineConstraintSet a(n, 2, 0.5);
  a.add_point_constraint(0, Eigen::Vector2d(0.3, -0.2));
  a.add_moment_nulling(1);
  const AffineSolver solver(a);
  const Eigen::MatrixXd d1 = oracle::lift(oracle::first_difference(n, 0.5), 2);
  const Eigen::MatrixXd d2 = oracle::lift(oracle::second_difference(n, 0.5), 2);
  const Eigen::MatrixXd A = oracle::dense_affine(a);
  const Index m = n * 2, p = A.rows();
  for (int t = 0; t < 10; ++t) {
    const VectorSeries q1{oracle::random_matrix(n, 2, rng), 0.5};
    const VectorSeries q2{oracle::random_matrix(n, 2, rng), 0.5};
    Eigen::MatrixXd kkt = Eigen::MatrixXd::Zero(m + p, m + p);
    kkt.topLeftCorner(m, m).setIdentity();
    kkt.topRightCorner(m, p) = A.transpose();
    kkt.bottomLeftCorner(p, m) = A;
    Eigen::VectorXd rhs(m + p);
    rhs.head(m) = oracle::flat(c.points()) - d1.transpose() * oracle::flat(q1.values) -
                  d2.transpose() * oracle::flat(q2.values);
    rhs.tail(p) = a.rhs();
    const Eigen::VectorXd sol = kkt.fullPivLu().solve(rhs);
    const Eigen::VectorXd got = oracle::flat(primal_from_dual(q1, q2, c, solver).points());
    CHECK((got - sol.head(m)).norm() <= 1e-8 * std::max(1.0, sol.head(m).norm()));
  }
}

TEST_CASE("dual gradient") {
  std::mt19937_64 rng(2);
  const Index n = 6;
  const double dt = 0.5;
  const DiscreteCurve c(oracle::random_matrix(n, 2, rng), dt);
  AffineConstraintSet a(n, 2, dt);
  a.add_point_constraint(0, Eigen::Vector2d::Zero());
  const AffineSolver solver(a);

  // At q = 0 the gradient of the negated smooth part is -(D c', D2 c'), c' = P_A c.
  const VectorSeries zero{Matrix::Zero(n, 2), dt};
  const auto [g1, g2] = grad_dual(zero, zero, c, solver);
  const Matrix cp = solver.project(c.points());
  CHECK((g1.values + first_difference(cp, dt)).norm() < 1e-12);
  CHECK((g2.values + second_difference(cp, dt)).norm() < 1e-10);

  // Central differences of the smooth part.
  for (int t = 0; t < 10; ++t) {
    VectorSeries q1{oracle::random_matrix(n, 2, rng), dt};
    VectorSeries q2{oracle::random_matrix(n, 2, rng), dt};
    const auto [a1, a2] = grad_dual(q1, q2, c, solver);
    Matrix fd1(n, 2), fd2(n, 2);
    const double h = 1e-5;
    for (Index i = 0; i < n; ++i)
      for (Index k = 0; k < 2; ++k) {
        for (int which = 0; which < 2; ++which) {
          VectorSeries& q = which == 0 ? q1 : q2;
          const double keep = q.values(i, k);
          q.values(i, k) = keep + h;
          const double fp = dual_smooth_value(q1, q2, c, solver);
          q.values(i, k) = keep - h;
          const double fm = dual_smooth_value(q1, q2, c, solver);
          q.values(i, k) = keep;
          (which == 0 ? fd1 : fd2)(i, k) = (fp - fm) / (2.0 * h);
        }
      }
    CHECK((fd1 - a1.values).norm() <= 1e-5 * a1.values.norm());
    CHECK((fd2 - a2.values).norm() <= 1e-5 * a2.values.norm());
  }

  // Lipschitz constant of the gradient.
  const double L = lipschitz_constant(n, 2, dt).value;
  for (int t = 0; t < 100; ++t) {
    const VectorSeries p1{oracle::random_matrix(n, 2, rng), dt}, p2{oracle::random_matrix(n, 2, rng), dt};
    const VectorSeries r1{oracle::random_matrix(n, 2, rng), dt}, r2{oracle::random_matrix(n, 2, rng), dt};
    const auto [x1, x2] = grad_dual(p1, p2, c, solver);
    const auto [y1, y2] = grad_dual(r1, r2, c, solver);
    const double lhs = std::sqrt((x1.values - y1.values).squaredNorm() + (x2.values - y2.values).squaredNorm());
    const double rhs = std::sqrt((p1.values - r1.values).squaredNorm() + (p2.values - r2.values).squaredNorm());
    CHECK(lhs <= L * rhs * (1.0 + 1e-12));
  }
}

TEST_CASE("feasible input is returned unchanged") {
  Matrix p(50, 2);
  for (Index i = 0; i < 50; ++i) p.row(i) << 0.1 * std::cos(0.05 * i), 0.1 * std::sin(0.05 * i);
  const DiscreteCurve c(p, 1.0);
  ProjectionSettings s;
  s.n_it = 500;
  const ProjectionResult r = project_curve(c, KinematicLimits{1.0, 1.0, NormMode::RIV}, s);
  CHECK(r.converged);
  CHECK((r.curve.points() - p).norm() <= 1e-6 * p.norm());

  ProjectionSettings tracked = s;
  tracked.track_iterates = true;
  const ProjectionResult run = project_curve(c, KinematicLimits{1.0, 1.0, NormMode::RIV}, tracked);
  const CertificateReport cert = convergence_certificate(run, r);
  CHECK(cert.trivial);
}

TEST_CASE("two-sample projection") {
  Matrix p(2, 1);
  p << 0.0, 10.0;
  const ProjectionResult r =
      project_curve(DiscreteCurve(p, 1.0), KinematicLimits{1.0, 100.0, NormMode::RV}, accurate());
  CHECK(r.converged);
  CHECK(r.curve.points()(0, 0) == doctest::Approx(4.5).epsilon(1e-7));
  CHECK(r.curve.points()(1, 0) == doctest::Approx(5.5).epsilon(1e-7));
}

TEST_CASE("projection output properties") {
  const KinematicLimits lim{1.0, 0.5, NormMode::RIV};
  const DiscreteCurve c = wiggly(120, 3);
  AffineConstraintSet pin(c.size(), 2, 1.0);
  pin.add_point_constraint(0, Eigen::Vector2d::Zero());
  const ProjectionResult r = project_curve(c, lim, pin, accurate());
  REQUIRE(r.converged);
  CHECK(series_norm(first_difference(r.curve.points(), 1.0), NormMode::RIV) <= lim.alpha * (1 + 1e-6));
  CHECK(series_norm(second_difference(r.curve.points(), 1.0), NormMode::RIV) <= lim.beta * (1 + 1e-6));
  CHECK(r.residuals.affine_residual <= 1e-8);

  // Obtuse angle against feasible test curves.
  std::mt19937_64 rng(4);
  const Matrix s = r.curve.points();
  for (int t = 0; t < 5; ++t) {
    const DiscreteCurve pert(s + oracle::random_matrix(c.size(), 2, rng, 2.0), 1.0);
    const ProjectionResult w = project_curve(pert, lim, pin, accurate());
    REQUIRE(w.converged);
    const Matrix dw = w.curve.points() - s;
    const double ip = (c.points() - s).cwiseProduct(dw).sum();
    CHECK(ip <= 1e-5 * c.points().norm() * dw.norm());
  }

  // Weak duality: every dual value sits below the primal optimum 1/2 |s - c|^2.
  const double primal = 0.5 * (s - c.points()).squaredNorm();
  REQUIRE(!r.dual_objective_history.empty());
  const double best = *std::max_element(r.dual_objective_history.begin(), r.dual_objective_history.end());
  CHECK(best <= primal * (1.0 + 1e-8));
  CHECK(best >= 0.5 * primal);
  for (int t = 0; t < 20; ++t) {
    const VectorSeries q1{oracle::random_matrix(c.size(), 2, rng, 0.1), 1.0};
    const VectorSeries q2{oracle::random_matrix(c.size(), 2, rng, 0.1), 1.0};
    CHECK(dual_objective(q1, q2, c, lim, AffineSolver(pin)) <= primal * (1.0 + 1e-10));
  }
}

TEST_CASE("projection is non-expansive") {
  const KinematicLimits lim{1.0, 0.5, NormMode::RV};
  std::mt19937_64 rng(5);
  for (int t = 0; t < 5; ++t) {
    const DiscreteCurve c1 = wiggly(80, 10 + t);
    const DiscreteCurve c2(c1.points() + oracle::random_matrix(80, 2, rng, 0.5), 1.0);
    const ProjectionResult p1 = project_curve(c1, lim, accurate());
    const ProjectionResult p2 = project_curve(c2, lim, accurate());
    REQUIRE(p1.converged);
    REQUIRE(p2.converged);
    CHECK((p1.curve.points() - p2.curve.points()).norm() <=
          (c1.points() - c2.points()).norm() * (1.0 + 1e-4));
  }
}

TEST_CASE("rotation-invariant set is the smaller one") {
  for (int t = 0; t < 4; ++t) {
    const DiscreteCurve c = wiggly(100, 20 + t);
    const ProjectionResult rv = project_curve(c, KinematicLimits{1.0, 0.5, NormMode::RV}, accurate());
    const ProjectionResult riv = project_curve(c, KinematicLimits{1.0, 0.5, NormMode::RIV}, accurate());
    REQUIRE(rv.converged);
    REQUIRE(riv.converged);
    CHECK(riv.distance >= rv.distance - 1e-6);
  }
}

TEST_CASE("piecewise-linear input at max speed: projection beats reparameterization") {
  const HardwareSpec hw;
  const KinematicLimits lim = limits_from_hardware(hw, NormMode::RIV);
  Matrix poly(5, 2);
  poly << 0, 0, 2, 0, 2, 2, 4, 2, 4, 4;
  const DiscreteCurve c = constant_speed_parameterization(poly, lim.alpha, 0.004);
  AffineConstraintSet pin(c.size(), 2, c.dt());
  pin.add_point_constraint(0, Eigen::Vector2d::Zero());
  const ProjectionResult r = project_curve(c, lim, pin);
  CHECK(r.converged);
  const ReparamResult rep = time_optimal_reparam(build_support(poly), lim, 0.004);
  CHECK(r.curve.duration() < rep.duration);
}

TEST_CASE("settings validation and shape checks") {
  ProjectionSettings s;
  s.n_it = 0;
  CHECK_THROWS_AS(s.validate(), InvalidArgument);
  ProjectionSettings t;
  t.step = -1.0;
  CHECK_THROWS_AS(t.validate(), InvalidArgument);
  const DiscreteCurve c = wiggly(10, 1);
  CHECK_THROWS_AS(project_curve(c, KinematicLimits{1.0, 1.0, NormMode::RV}, s), InvalidArgument);
  const AffineConstraintSet wrong(11, 2, 1.0);
  CHECK_THROWS(project_curve(c, KinematicLimits{1.0, 1.0, NormMode::RV}, wrong));
}
