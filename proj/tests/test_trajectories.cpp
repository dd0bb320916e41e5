#include "oracle.hpp"

#include <doctest.h>

#include <gradwave/error.hpp>
#include <gradwave/trajectories.hpp>

using namespace gradwave;

namespace {

std::vector<double> steps(const DiscreteCurve& c) {
  std::vector<double> out;
  for (Index i = 1; i < c.size(); ++i) out.push_back((c.point(i) - c.point(i - 1)).norm());
  return out;
}

const KinematicLimits kScanner = limits_from_hardware(HardwareSpec{}, NormMode::RIV);

}  // namespace

TEST_CASE("constant speed on a single segment") {
  Matrix seg(2, 2);
  seg << 0, 0, 1, 0;
  const DiscreteCurve c = constant_speed_parameterization(seg, 1.0, 0.25);
  REQUIRE(c.size() == 5);
  for (Index i = 0; i < 5; ++i) {
    CHECK(c.point(i)(0) == doctest::Approx(0.25 * i).epsilon(1e-12));
    CHECK(c.point(i)(1) == 0.0);
  }
  CHECK(c.dt() == 0.25);
}

TEST_CASE("constant speed on random polylines") {
  std::mt19937_64 rng(1);
  for (int t = 0; t < 20; ++t) {
    const Matrix poly = oracle::random_matrix(12, 2, rng, 2.0);
    const double speed = 0.3, dt = 0.1;
    const DiscreteCurve c = constant_speed_parameterization(poly, speed, dt);
    const std::vector<double> d = steps(c);
    for (std::size_t i = 0; i + 1 < d.size(); ++i) CHECK(d[i] == doctest::Approx(speed * dt).epsilon(1e-9));
    CHECK(d.back() <= speed * dt * (1 + 1e-9));
    CHECK(c.point(0) == poly.row(0));
    CHECK((c.point(c.size() - 1) - poly.row(poly.rows() - 1)).norm() < 1e-12);

    // Chords cut corners, so each interior vertex may shift the count by about one step.
    const DiscreteCurve fast = constant_speed_parameterization(poly, 2 * speed, dt);
    CHECK(std::abs(2.0 * static_cast<double>(fast.size() - 1) - static_cast<double>(c.size() - 1)) <=
          2.0 + 2.0 * static_cast<double>(poly.rows() - 2));

    // RIV speed of the samples, excluding the pinned first row and the partial last step.
    const Matrix v = first_difference(c.points(), dt);
    CHECK(series_norm(v.middleRows(1, v.rows() - 2), NormMode::RIV) ==
          doctest::Approx(speed).epsilon(0.005));
  }
}

TEST_CASE("doubling the speed halves the step count on a smooth path") {
  Matrix circle(361, 2);
  for (Index i = 0; i <= 360; ++i)
    circle.row(i) << 4.0 * std::cos(i * std::numbers::pi / 180), 4.0 * std::sin(i * std::numbers::pi / 180);
  for (double speed : {0.5, 1.3, 7.0}) {
    const Index slow = constant_speed_parameterization(circle, speed, 0.01).size() - 1;
    const Index fast = constant_speed_parameterization(circle, 2 * speed, 0.01).size() - 1;
    CHECK(std::abs(static_cast<double>(2 * fast - slow)) <= 2.0);
  }
}

TEST_CASE("constant speed rejects degenerate input") {
  Matrix same(3, 2);
  same << 1, 1, 1, 1, 1, 1;
  CHECK_THROWS_AS(constant_speed_parameterization(same, 1.0, 0.1), InvalidArgument);
  Matrix seg(2, 2);
  seg << 0, 0, 1, 0;
  CHECK_THROWS_AS(constant_speed_parameterization(seg, 0.0, 0.1), InvalidArgument);
  CHECK_THROWS_AS(constant_speed_parameterization(seg, 1.0, -0.1), InvalidArgument);
}

TEST_CASE("rosette") {
  const RosetteSpec spec;
  const DiscreteCurve c = gen_rosette(spec, kScanner, 0.004);
  CHECK(c.point(0).norm() == 0.0);
  double rmax = 0.0;
  for (Index i = 0; i < c.size(); ++i) rmax = std::max(rmax, c.point(i).norm());
  CHECK(rmax <= spec.k_max * (1 + 1e-12));
  CHECK(rmax >= 0.99 * spec.k_max);

  const double target = 0.9 * kScanner.alpha * 0.004;
  const std::vector<double> d = steps(c);
  for (std::size_t i = 0; i + 1 < d.size(); ++i) CHECK(d[i] == doctest::Approx(target).epsilon(1e-3));

  RosetteSpec bad;
  bad.param_span = 0.0;
  CHECK_THROWS_AS(gen_rosette(bad, kScanner, 0.004), InvalidArgument);
  RosetteSpec slow;
  slow.speed_fraction = 1.5;
  CHECK_THROWS_AS(gen_rosette(slow, kScanner, 0.004), InvalidArgument);
}

TEST_CASE("spiral") {
  const SpiralSpec spec = SpiralSpec::archimedean(6.0, 20);
  const DiscreteCurve c = gen_spiral(spec, 0.004, 5.0);
  CHECK(c.point(c.size() - 1).norm() == doctest::Approx(6.0).epsilon(1e-9));
  CHECK(c.point(0).norm() == 0.0);
  for (Index i = 0; i < c.size(); ++i) CHECK(c.point(i).norm() <= 6.0 + 1e-9);

  // Constant radius: a circle traversed n times (the table is strictly increasing, so a
  // vanishing increment stands in for r0 = r1).
  SpiralSpec circle;
  circle.radius_table = {3.0, 3.0 + 1e-12};
  circle.revolutions = 3;
  const DiscreteCurve ring = gen_spiral(circle, 0.01, 4.0);
  for (Index i = 0; i < ring.size(); ++i) CHECK(ring.point(i).norm() == doctest::Approx(3.0).epsilon(1e-4));
  const double length = polyline_length(ring.points());
  CHECK(length == doctest::Approx(3 * 2 * std::numbers::pi * 3.0).epsilon(1e-3));

  SpiralSpec bad;
  bad.radius_table = {0.0, 2.0, 1.0};
  CHECK_THROWS_AS(gen_spiral(bad, 0.01, 1.0), InvalidArgument);
}

TEST_CASE("archimedean spiral density is uniform on the disk") {
  const SpiralSpec spec = SpiralSpec::archimedean(6.0, 100);
  const DensityGrid grid{6.0, 64};
  const TargetDensity t = spiral_target_density(spec, grid);
  CHECK(t.values.sum() * grid.cell_area() == doctest::Approx(1.0).epsilon(1e-9));
  const double uniform = 1.0 / (std::numbers::pi * 36.0);
  CHECK(spiral_density_at(spec, 1.0, 2.0, grid.cell_width()) == doctest::Approx(uniform).epsilon(1e-6));
  CHECK(spiral_density_at(spec, 5.0, 4.0, grid.cell_width()) == 0.0);
  for (Index iy = 0; iy < 64; ++iy)
    for (Index ix = 0; ix < 64; ++ix)
      if (std::hypot(grid.center(ix), grid.center(iy)) > 6.0) CHECK(t.values(iy, ix) == 0.0);

  // Radial histogram of the samples grows linearly with radius.
  const DiscreteCurve c = gen_spiral(spec, 0.004, 5.0);
  std::vector<double> ring(6, 0.0);
  for (Index i = 0; i < c.size(); ++i) {
    const auto b = static_cast<std::size_t>(std::min(5.0, c.point(i).norm()));
    ring[b] += 1.0;
  }
  for (std::size_t b = 1; b < 6; ++b) {
    const double expect = (2.0 * b + 1.0) / 36.0;  // area fraction of the annulus
    CHECK(ring[b] / static_cast<double>(c.size()) == doctest::Approx(expect).epsilon(0.05));
  }

  SpiralSpec wide = SpiralSpec::archimedean(7.0, 10);
  CHECK_THROWS_AS(spiral_target_density(wide, grid), InvalidArgument);
}

TEST_CASE("TSP sampler") {
  const DensityGrid grid{6.0, 64};
  TspSpec spec{radial_density(1.0, 6.0, 64)};
  spec.n_cities = 300;
  spec.seed = 7;
  const TspResult a = gen_tsp_trajectory(spec, 0.004, 5.0);
  const TspResult b = gen_tsp_trajectory(spec, 0.004, 5.0);
  CHECK(a.curve.points() == b.curve.points());
  CHECK(a.tour_length <= a.nearest_neighbor_length + 1e-9);
  CHECK(a.tour.rows() == 300);
  for (Index i = 0; i < a.curve.size(); ++i) CHECK(a.curve.point(i).cwiseAbs().maxCoeff() <= 6.0 + 1e-9);

  spec.two_opt_passes = 0;
  const TspResult nn = gen_tsp_trajectory(spec, 0.004, 5.0);
  CHECK(nn.tour_length == doctest::Approx(nn.nearest_neighbor_length).epsilon(1e-12));

  spec.seed = 8;
  CHECK(gen_tsp_trajectory(spec, 0.004, 5.0).tour != a.tour);

  // Limit density is q^{1/2}.
  const TargetDensity expect = spec.city_density.power(0.5);
  CHECK((a.limit_density.values - expect.values).cwiseAbs().maxCoeff() < 1e-12);
  const TargetDensity uniform = TargetDensity::from_function(grid, [](double, double) { return 1.0; });
  TspSpec flat{uniform};
  flat.n_cities = 10;
  const TspResult u = gen_tsp_trajectory(flat, 0.004, 5.0);
  CHECK((u.limit_density.values - uniform.values).cwiseAbs().maxCoeff() < 1e-12);

  TspSpec one{uniform};
  one.n_cities = 1;
  const TspResult single = gen_tsp_trajectory(one, 0.004, 5.0);
  CHECK((single.curve.points().rowwise() - single.tour.row(0)).norm() == 0.0);
  CHECK((single.curve.point(0) - single.curve.point(single.curve.size() - 1)).norm() == 0.0);

  TspSpec too_many{TargetDensity::from_function(DensityGrid{6.0, 4}, [](double, double) { return 1.0; })};
  too_many.n_cities = 17;
  CHECK_THROWS_AS(gen_tsp_trajectory(too_many, 0.004, 5.0), InvalidArgument);

  TspSpec origin{uniform};
  origin.n_cities = 20;
  origin.start_at_origin = true;
  CHECK(gen_tsp_trajectory(origin, 0.004, 5.0).curve.point(0).norm() == 0.0);
}

TEST_CASE("density-to-cities exponent and sampling") {
  const TargetDensity target = radial_density(1.0, 6.0, 32);
  const TargetDensity q = city_density_for_target(target);
  CHECK((q.power(0.5).values - target.values).cwiseAbs().maxCoeff() < 1e-10);

  const Matrix pts = sample_from_density(target, 20000, 3);
  CHECK(pts == sample_from_density(target, 20000, 3));
  const EmpiricalHistogram h = empirical_histogram(pts, target.grid);
  CHECK(h.clipped == 0);
  CHECK(relative_error(h, target) < 0.15);
}
