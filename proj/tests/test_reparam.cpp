#include "oracle.hpp"

#include <doctest.h>

#include <gradwave/error.hpp>
#include <gradwave/reparam.hpp>
#include <gradwave/trajectories.hpp>

using namespace gradwave;

namespace {

Matrix arc(double radius, double degrees, double step_deg = 1.0) {
  const Index n = static_cast<Index>(std::lround(degrees / step_deg)) + 1;
  Matrix m(n, 2);
  for (Index i = 0; i < n; ++i) {
    const double a = i * step_deg * std::numbers::pi / 180.0;
    m.row(i) << radius * std::cos(a), radius * std::sin(a);
  }
  return m;
}

Matrix segment(double length) {
  Matrix m(2, 2);
  m << 0, 0, length, 0;
  return m;
}

double distance_to_polyline(const Eigen::RowVectorXd& p, const Matrix& poly) {
  double best = 1e300;
  for (Index i = 0; i + 1 < poly.rows(); ++i) {
    const Eigen::RowVectorXd a = poly.row(i), ab = poly.row(i + 1) - poly.row(i);
    const double f = std::clamp((p - a).dot(ab) / ab.squaredNorm(), 0.0, 1.0);
    best = std::min(best, (p - a - f * ab).norm());
  }
  return best;
}

// Speed profile value at a given arc length (nodes include every vertex).
double speed_at(const ReparamResult& r, double sigma) {
  for (std::size_t j = 0; j < r.sigma.size(); ++j)
    if (std::abs(r.sigma[j] - sigma) < 1e-12) return r.speed[j];
  return -1.0;
}

}  // namespace

TEST_CASE("support construction") {
  Matrix line(3, 2);
  line << 0, 0, 1, 0, 2, 0;
  const SupportPath s = build_support(line, 1.0);
  CHECK(s.singular == std::vector<Index>{0, 2});
  CHECK(s.length() == doctest::Approx(2.0));

  Matrix corner(3, 2);
  corner << 0, 0, 1, 0, 1, 1;
  CHECK(build_support(corner, 5.0).singular == std::vector<Index>{0, 1, 2});
  CHECK(build_support(corner, 5.0, false).singular == std::vector<Index>{0, 1});
  CHECK(build_support(corner).turning_deg[1] == doctest::Approx(90.0));

  const SupportPath circle = build_support(arc(2.0, 359.0), 5.0);
  CHECK(circle.singular == std::vector<Index>{0, circle.size() - 1});

  Matrix dup(5, 2);
  dup << 0, 0, 0, 0, 1, 0, 1, 0, 2, 0;
  const SupportPath d = build_support(dup, 1.0);
  CHECK(d.size() == 3);
  for (std::size_t i = 1; i < d.arclength.size(); ++i) CHECK(d.arclength[i] > d.arclength[i - 1]);
  CHECK_THROWS_AS(build_support(Matrix::Constant(4, 2, 1.0)), InvalidArgument);
  CHECK_THROWS_AS(build_support(Matrix::Zero(1, 2)), InvalidArgument);
}

TEST_CASE("straight segments have closed-form profiles") {
  // Trapezoid: L / alpha + alpha / beta.
  const ReparamResult trap = time_optimal_reparam(build_support(segment(4.0)), {1.0, 1.0, NormMode::RIV}, 1e-3);
  CHECK(trap.duration == doctest::Approx(5.0).epsilon(1e-3));
  CHECK(*std::max_element(trap.speed.begin(), trap.speed.end()) == doctest::Approx(1.0));
  // Triangle: 2 sqrt(L / beta).
  const ReparamResult tri = time_optimal_reparam(build_support(segment(1.0)), {10.0, 1.0, NormMode::RIV}, 1e-3);
  CHECK(tri.duration == doctest::Approx(2.0).epsilon(1e-3));
  CHECK(tri.curve.duration() >= tri.duration - 1e-12);
  CHECK(tri.curve.duration() < tri.duration + 1e-3);
}

TEST_CASE("circle at the centripetal limit") {
  const KinematicLimits lim{17.03, 63.86, NormMode::RIV};
  const ReparamResult r = time_optimal_reparam(build_support(arc(1.0, 3 * 360.0 - 0.1, 0.1)), lim, 0.004);
  CHECK(speed_at(r, r.sigma[r.sigma.size() / 2]) == doctest::Approx(std::sqrt(63.86)).epsilon(0.01));
  CHECK(*std::max_element(r.speed.begin(), r.speed.end()) <= std::sqrt(63.86) * 1.001);
}

TEST_CASE("output feasibility, rest points and support") {
  std::mt19937_64 rng(1);
  std::vector<Matrix> supports{segment(3.0), arc(2.0, 270.0), arc(0.5, 720.0, 2.0)};
  for (int t = 0; t < 4; ++t) supports.push_back(oracle::random_matrix(6, 2, rng, 3.0));
  for (const Matrix& poly : supports) {
    for (NormMode mode : {NormMode::RIV, NormMode::RV}) {
      const KinematicLimits lim{8.0, 60.0, mode};
      const SupportPath path = build_support(poly);
      const ReparamResult r = time_optimal_reparam(path, lim, 0.004);
      const FeasibilityReport f = feasibility_report(r.curve, lim);
      CHECK(f.speed_residual <= 0.02);
      CHECK(f.accel_residual <= 0.02);
      for (const Index s : path.singular) CHECK(speed_at(r, path.arclength[static_cast<std::size_t>(s)]) == 0.0);
      double worst = 0.0;
      for (Index i = 0; i < r.curve.size(); ++i) worst = std::max(worst, distance_to_polyline(r.curve.point(i), poly));
      CHECK(worst <= 1e-6 * 6.0);
      CHECK(r.curve.point(0) == poly.row(0));
      CHECK((r.curve.point(r.curve.size() - 1) - poly.row(poly.rows() - 1)).norm() < 1e-12);
    }
  }
}

TEST_CASE("tighter limits never shorten the traversal") {
  std::mt19937_64 rng(2);
  const SupportPath path = build_support(oracle::random_matrix(8, 2, rng, 3.0));
  const double base = time_optimal_reparam(path, {8.0, 60.0, NormMode::RIV}, 0.004).duration;
  CHECK(time_optimal_reparam(path, {4.0, 60.0, NormMode::RIV}, 0.004).duration >= base);
  CHECK(time_optimal_reparam(path, {8.0, 30.0, NormMode::RIV}, 0.004).duration >= base);
  CHECK(time_optimal_reparam(path, {16.0, 120.0, NormMode::RIV}, 0.004).duration <= base);
}

TEST_CASE("a feasible smooth traversal can only get faster") {
  // A traversal planned for half the limits, starting and ending at rest.
  const KinematicLimits lim{8.0, 60.0, NormMode::RIV};
  const DiscreteCurve slow =
      time_optimal_reparam(build_support(arc(3.0, 300.0)), {4.0, 30.0, NormMode::RIV}, 0.004).curve;
  REQUIRE(feasibility_report(slow, lim).within(0.0, 0.0));
  TraversalOptions opt;
  opt.support = arc(3.0, 300.0);
  const TraversalReport rep = compare_traversal(slow, lim, opt);
  CHECK(rep.t_rep <= rep.t_input);
  CHECK(rep.t_projection == doctest::Approx(rep.t_input));
  CHECK(rep.ratio == doctest::Approx(rep.t_rep / rep.t_projection));
  CHECK(rep.rel_error_input == doctest::Approx(0.0).scale(1.0));
  CHECK(rep.projection->converged);
}

TEST_CASE("reparam input validation") {
  const SupportPath p = build_support(segment(1.0));
  CHECK_THROWS_AS(time_optimal_reparam(p, {1.0, 1.0, NormMode::RIV}, 0.0), InvalidArgument);
  CHECK_THROWS_AS(time_optimal_reparam(p, {-1.0, 1.0, NormMode::RIV}, 0.1), InvalidArgument);
  Matrix fold(3, 2);
  fold << 0, 0, 1, 0, 0, 0;
  CHECK_THROWS_AS(time_optimal_reparam(build_support(fold, 200.0), {1.0, 1.0, NormMode::RIV}, 0.1),
                  InvalidArgument);
}
