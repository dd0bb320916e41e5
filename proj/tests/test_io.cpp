#include "oracle.hpp"

#include <doctest.h>

#include <gradwave/error.hpp>
#include <gradwave/io.hpp>

#include <filesystem>

#include <unistd.h>

using namespace gradwave;
namespace fs = std::filesystem;

namespace {

fs::path scratch_dir() {
  const fs::path p = fs::temp_directory_path() / ("gradwave_io_" + std::to_string(::getpid()));
  fs::create_directories(p);
  return p;
}

}  // namespace

TEST_CASE("curve CSV round trip") {
  std::mt19937_64 rng(1);
  for (Index d : {1, 2, 3}) {
    const DiscreteCurve c(oracle::random_matrix(17, d, rng), 0.004);
    const DiscreteCurve back = io::parse_curve_csv(io::format_curve_csv(c));
    CHECK(back.points() == c.points());
    CHECK(back.dt() == doctest::Approx(0.004).epsilon(1e-12));
  }
  const std::string text = "t_ms,kx,ky\n0,0,0\n0.5,1,2\n1.0,2,4\n";
  const DiscreteCurve c = io::parse_curve_csv(text);
  CHECK(c.size() == 3);
  CHECK(c.dt() == 0.5);
  CHECK(c.point(2)(1) == 4.0);
}

TEST_CASE("curve CSV rejections") {
  CHECK_THROWS_AS(io::parse_curve_csv(""), ParseError);
  CHECK_THROWS_AS(io::parse_curve_csv("t,kx\n0,1\n1,2\n"), ParseError);
  CHECK_THROWS_AS(io::parse_curve_csv("t_ms,kx,ky\n0,0,0\n1,1\n"), ParseError);
  CHECK_THROWS_AS(io::parse_curve_csv("t_ms,kx\n0,0\n1,abc\n"), ParseError);
  CHECK_THROWS_AS(io::parse_curve_csv("t_ms,kx\n0,0\n1,nan\n"), ParseError);
  CHECK_THROWS_AS(io::parse_curve_csv("t_ms,kx\n0,0\n1,1\n2.001,2\n"), ParseError);
  CHECK_THROWS_AS(io::parse_curve_csv("t_ms,kx\n0,0\n"), ParseError);
  CHECK_THROWS_AS(io::parse_curve_csv("t_ms,kx\n1,0\n0,1\n"), ParseError);
  CHECK_THROWS_AS(io::read_curve_csv("/nonexistent/curve.csv"), ParseError);
  // Within the 1e-9 relative spacing tolerance.
  CHECK_NOTHROW(io::parse_curve_csv("t_ms,kx\n0,0\n1,1\n2.0000000000001,2\n"));
}

TEST_CASE("gradient and profile CSV") {
  // Moving at alpha along x, then at alpha / 2 along y, gives G_max and G_max / 2.
  const HardwareSpec hw;
  const double alpha = limits_from_hardware(hw, NormMode::RIV).alpha;
  Matrix p(3, 2);
  p << 0, 0, alpha * 0.5, 0, alpha * 0.5, alpha * 0.25;
  const std::string g = io::format_gradient_csv(DiscreteCurve(p, 0.5), hw.gamma);
  CHECK(g.rfind("t_ms,gx_mT_m,gy_mT_m\n0,0,0\n", 0) == 0);
  const DiscreteCurve back = io::parse_curve_csv("t_ms,kx,ky" + g.substr(g.find('\n')));
  CHECK(back.point(1)(0) == doctest::Approx(hw.g_max).epsilon(1e-12));
  CHECK(back.point(2)(1) == doctest::Approx(0.5 * hw.g_max).epsilon(1e-12));
  CHECK(back.point(2)(0) == 0.0);
  CHECK(io::format_profile_csv({0.0, 1.0}, {0.0, 2.5}) == "sigma,v\n0,0\n1,2.5\n");
  CHECK_THROWS_AS(io::format_profile_csv({0.0}, {}), InvalidArgument);
}

TEST_CASE("density CSV round trip") {
  const TargetDensity t = radial_density(2.0, 6.0, 16);
  const TargetDensity back = io::parse_density_csv(io::format_grid_csv(t.grid, t.values));
  CHECK(back.grid == t.grid);
  CHECK((back.values - t.values).cwiseAbs().maxCoeff() <= 1e-15 * t.values.maxCoeff());
  CHECK_THROWS_AS(io::parse_density_csv("kx,ky,v\n0,0,1\n"), ParseError);
  CHECK_THROWS_AS(io::parse_density_csv("kx,ky,value\n0,0,1\n1,0,1\n"), ParseError);
  CHECK_THROWS_AS(io::parse_density_csv("kx,ky,value\n-0.5,-0.5,-1\n0.5,-0.5,1\n-0.5,0.5,1\n0.5,0.5,1\n"),
                  ParseError);
}

TEST_CASE("constraint documents") {
  const std::string doc = R"({"constraints": [
    {"type": "point", "at": "start", "position": [0, 0]},
    {"type": "point", "t_ms": 2.0, "position": [1, 1]},
    {"type": "point", "index": 9, "position": [2, 0]},
    {"type": "initial_speed"},
    {"type": "moment", "order": 1}]})";
  const AffineConstraintSet a = io::parse_constraints_json(doc, 10, 2, 0.5);
  CHECK(a.size() == 10);
  Matrix s = Matrix::Zero(10, 2);
  s.row(4) << 1, 1;
  s.row(9) << 2, 0;
  const Eigen::VectorXd r = a.apply(s) - a.rhs();
  CHECK(r.head(6).norm() == 0.0);

  const AffineConstraintSet list = io::parse_constraints_json(R"([{"type": "multishot", "tr_ms": 2.5}])", 11, 2, 0.5);
  CHECK(list.size() == 6);

  CHECK_THROWS_AS(io::parse_constraints_json("{", 10, 2, 0.5), ParseError);
  CHECK_THROWS_AS(io::parse_constraints_json(R"({"x": []})", 10, 2, 0.5), ParseError);
  CHECK_THROWS_AS(io::parse_constraints_json(R"([{"type": "warp"}])", 10, 2, 0.5), ParseError);
  CHECK_THROWS_AS(io::parse_constraints_json(R"([{"type": "point", "index": 1, "position": [0]}])", 10, 2, 0.5),
                  ParseError);
  CHECK_THROWS_AS(io::parse_constraints_json(R"([{"type": "point", "position": [0, 0]}])", 10, 2, 0.5),
                  ParseError);
  CHECK_THROWS_AS(io::parse_constraints_json(R"([{"type": "point", "t_ms": 0.3, "position": [0, 0]}])", 10, 2, 0.5),
                  InvalidArgument);
  CHECK_THROWS_AS(io::parse_constraints_json(R"([{"type": "point", "index": 10, "position": [0, 0]}])", 10, 2, 0.5),
                  InvalidArgument);
}

TEST_CASE("hardware documents") {
  const HardwareSpec hw = io::parse_hardware_json(R"({"g_max": 80})");
  CHECK(hw.g_max == 80.0);
  CHECK(hw.s_max == HardwareSpec{}.s_max);
  CHECK(hw.gamma == HardwareSpec{}.gamma);
  CHECK_THROWS_AS(io::parse_hardware_json("[1]"), ParseError);
  CHECK_THROWS_AS(io::parse_hardware_json(R"({"g_max": "big"})"), ParseError);
  CHECK_THROWS_AS(io::parse_hardware_json(R"({"g_max": -1})"), InvalidArgument);
}

TEST_CASE("atomic writes and number formatting") {
  const fs::path dir = scratch_dir();
  const fs::path f = dir / "out.txt";
  io::write_text_atomic(f, "first");
  io::write_text_atomic(f, "second");
  CHECK(io::read_text(f) == "second");
  std::size_t entries = 0;
  for ([[maybe_unused]] const auto& e : fs::directory_iterator(dir)) ++entries;
  CHECK(entries == 1);  // no temporary left behind
  io::write_text_atomic(dir / "nested" / "x.txt", "z");
  CHECK(io::read_text(dir / "nested" / "x.txt") == "z");
  CHECK_THROWS_AS(io::write_text_atomic(dir / "nested", "z"), InvalidArgument);
  CHECK(fs::is_directory(dir / "nested"));
  fs::remove_all(dir);

  std::mt19937_64 rng(3);
  std::normal_distribution<double> nd(0.0, 1e3);
  for (int t = 0; t < 1000; ++t) {
    const double x = nd(rng);
    CHECK(std::stod(io::format_double(x)) == x);
  }
  CHECK(io::format_double(0.5) == "0.5");
  CHECK(io::format_double(2.0) == "2");
}
