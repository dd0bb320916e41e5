#include <doctest.h>

#include "commands.hpp"

#include <gradwave/io.hpp>

#include <json.hpp>

#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <sstream>

#include <unistd.h>

using gradwave::cli::run_cli;
using json = nlohmann::json;
namespace fs = std::filesystem;
namespace io = gradwave::io;

namespace {

// Fresh directory per test case, removed on scope exit.
struct TempDir {
  fs::path path;
  explicit TempDir(const std::string& tag) {
    path = fs::temp_directory_path() / ("gradwave_cli_" + tag + "_" + std::to_string(::getpid()));
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
  std::string operator/(const std::string& name) const { return (path / name).string(); }
  std::size_t count() const {
    std::size_t n = 0;
    for ([[maybe_unused]] const auto& e : fs::directory_iterator(path)) ++n;
    return n;
  }
};

struct Run {
  int code = 0;
  std::string err;
};

Run run(std::vector<std::string> args) {
  std::ostringstream err, out;
  auto* old_err = std::cerr.rdbuf(err.rdbuf());
  auto* old_out = std::cout.rdbuf(out.rdbuf());
  Run r;
  r.code = run_cli(args);
  std::cerr.rdbuf(old_err);
  std::cout.rdbuf(old_out);
  r.err = err.str();
  return r;
}

json error_line(const std::string& err) {
  const std::string tag = "gradwave-error ";
  const auto at = err.find(tag);
  REQUIRE(at != std::string::npos);
  REQUIRE(err.find('\n', at) == err.size() - 1);
  return json::parse(err.substr(at + tag.size()));
}

json read_json(const std::string& path) { return json::parse(io::read_text(path)); }

}  // namespace

TEST_CASE("generate, project and re-project") {
  TempDir d("project");
  REQUIRE(run({"--out-dir", d.path.string(), "gen", "rosette", "--out", "ros.csv"}).code == 0);
  REQUIRE(fs::exists(d / "ros.csv"));
  REQUIRE(run({"--out-dir", d.path.string(), "project", "--input", d / "ros.csv", "--pin-start",
               "--out", "p.csv"}).code == 0);
  const json rep = read_json(d / "p.report.json");
  CHECK(rep["converged"].get<bool>());
  CHECK(rep["residuals"]["speed_residual"].get<double>() <= 1e-6);
  CHECK(rep["residuals"]["accel_residual"].get<double>() <= 1e-6);
  CHECK(rep["residuals"]["affine_residual"].get<double>() <= 1e-8);
  CHECK(fs::exists(d / "p.gradient.csv"));

  // Projecting the output again leaves it in place.
  REQUIRE(run({"--out-dir", d.path.string(), "project", "--input", d / "p.csv", "--out", "pp.csv"}).code == 0);
  const auto c = io::read_curve_csv(d / "p.csv");
  CHECK(read_json(d / "pp.report.json")["distance"].get<double>() <= 1e-6 * c.points().norm() * std::sqrt(c.dt()));

  // Every output has a sidecar.
  for (const auto& e : fs::directory_iterator(d.path)) {
    const std::string name = e.path().filename().string();
    if (name.ends_with(".meta.json")) continue;
    REQUIRE(fs::exists(e.path().string() + ".meta.json"));
    const json meta = read_json(e.path().string() + ".meta.json");
    CHECK(meta["file"].get<std::string>() == name);
    CHECK(meta["config_hash"].get<std::string>().size() == 16);
    CHECK(meta.contains("wall_time_s"));
    CHECK(meta["versions"].contains("core"));
    CHECK(meta["config"].is_object());
  }
}

TEST_CASE("reparam and analyze") {
  TempDir d("reparam");
  REQUIRE(run({"--out-dir", d.path.string(), "gen", "spiral", "--revolutions", "20", "--out", "s.csv"}).code == 0);
  REQUIRE(run({"--out-dir", d.path.string(), "reparam", "--input", d / "s.csv", "--out", "r.csv"}).code == 0);
  const json rep = read_json(d / "r.report.json");
  CHECK(rep["t_rep_ms"].get<double>() > 0.0);
  CHECK(io::read_text(d / "r.profile.csv").rfind("sigma,v\n", 0) == 0);

  REQUIRE(run({"--out-dir", d.path.string(), "analyze", "--input", d / "s.csv", "--target", d / "s.target.csv",
               "--reference", d / "r.csv", "--out", "a.json"}).code == 0);
  const json a = read_json(d / "a.json");
  CHECK(a.contains("rel_error"));
  CHECK(a["rel_error"].get<double>() >= 0.0);
  CHECK(a["rel_error"].get<double>() <= 2.0);
  CHECK(a["bins"] == 64);
  CHECK(a["comparison"].contains("w2_sliced"));
  CHECK(fs::exists(d / "a.diff.csv"));
}

TEST_CASE("same seed, same bytes") {
  TempDir a("det_a"), b("det_b"), c("det_c");
  for (const TempDir* d : {&a, &b})
    REQUIRE(run({"--out-dir", d->path.string(), "--seed", "5", "gen", "tsp", "--cities", "200"}).code == 0);
  REQUIRE(run({"--out-dir", c.path.string(), "--seed", "6", "gen", "tsp", "--cities", "200"}).code == 0);
  CHECK(io::read_text(a / "tsp.csv") == io::read_text(b / "tsp.csv"));
  CHECK(io::read_text(a / "tsp.tour.csv") == io::read_text(b / "tsp.tour.csv"));
  CHECK(io::read_text(a / "tsp.csv") != io::read_text(c / "tsp.csv"));
  CHECK(read_json(a / "tsp.csv.meta.json")["config_hash"] == read_json(b / "tsp.csv.meta.json")["config_hash"]);
  CHECK(read_json(a / "tsp.csv.meta.json")["config_hash"] != read_json(c / "tsp.csv.meta.json")["config_hash"]);
}

TEST_CASE("bad input exits 2 without partial outputs") {
  TempDir d("bad");
  Run r = run({"--out-dir", d.path.string(), "project", "--input", d / "missing.csv"});
  CHECK(r.code == 2);
  CHECK(d.count() == 0);
  const json e = error_line(r.err);
  CHECK(e["exit"] == 2);
  CHECK(e["code"].get<std::string>().size() > 0);

  CHECK(run({"--out-dir", d.path.string(), "frobnicate"}).code == 2);
  CHECK(run({"--out-dir", d.path.string(), "project"}).code == 2);
  CHECK(run({"--out-dir", d.path.string(), "--mode", "L7", "gen", "rosette"}).code == 2);

  io::write_text_atomic(d.path / "cfg.json", R"({"sed": 3})");
  r = run({"--config", d / "cfg.json", "--out-dir", d.path.string(), "gen", "rosette"});
  CHECK(r.code == 2);
  CHECK(error_line(r.err)["message"].get<std::string>().find("sed") != std::string::npos);

  io::write_text_atomic(d.path / "bad.csv", "t_ms,kx\n0,0\n1,zz\n");
  CHECK(run({"--out-dir", d.path.string(), "project", "--input", d / "bad.csv"}).code == 2);
  CHECK(run({"--out-dir", d.path.string(), "--hardware", d / "bad.csv", "gen", "rosette"}).code == 2);
  CHECK(d.count() == 2);
}

TEST_CASE("dependent constraints exit 4") {
  TempDir d("dep");
  io::write_text_atomic(d.path / "c.csv", "t_ms,kx,ky\n0,0,0\n1,0.5,0\n2,1,0\n3,1.5,0\n");
  io::write_text_atomic(d.path / "pins.json", R"([{"type": "point", "at": "start", "position": [0, 0]}])");
  const Run r = run({"--out-dir", d.path.string(), "project", "--input", d / "c.csv", "--constraints",
                     d / "pins.json", "--pin-start"});
  CHECK(r.code == 4);
  CHECK(error_line(r.err)["exit"] == 4);
  CHECK(d.count() == 2);
}

TEST_CASE("unreachable tolerances exit 4") {
  TempDir d("infeasible");
  REQUIRE(run({"--out-dir", d.path.string(), "gen", "tsp", "--cities", "50", "--speed-fraction", "1"}).code == 0);
  io::write_text_atomic(d.path / "cfg.json",
                        R"({"projection": {"polish": false, "restore_feasibility": false, "n_it": 1}})");
  const std::size_t before = d.count();
  const Run r = run({"--config", d / "cfg.json", "--out-dir", d.path.string(), "project", "--input", d / "tsp.csv"});
  CHECK(r.code == 4);
  CHECK(d.count() == before);
}

TEST_CASE("flags override the config, the environment only fills the output directory") {
  TempDir d("prec"), env("env");
  io::write_text_atomic(d.path / "cfg.json", R"({"seed": 11, "tsp": {"n_cities": 40}})");
  REQUIRE(run({"--config", d / "cfg.json", "--seed", "12", "--out-dir", d.path.string(), "gen", "tsp"}).code == 0);
  const json meta = read_json(d / "tsp.csv.meta.json");
  CHECK(meta["seed"] == 12);
  CHECK(read_json(d / "tsp.report.json")["n_cities"] == 40);

  ::setenv("GRADWAVE_OUT_DIR", env.path.string().c_str(), 1);
  const int code = run({"gen", "rosette", "--out", "r.csv"}).code;
  ::unsetenv("GRADWAVE_OUT_DIR");
  CHECK(code == 0);
  CHECK(fs::exists(env / "r.csv"));

  io::write_text_atomic(d.path / "hw.json", R"({"g_max": 20})");
  REQUIRE(run({"--hardware", d / "hw.json", "--out-dir", d.path.string(), "project", "--input", d / "tsp.csv",
               "--out", "hw.csv"}).code == 0);
  const json rep = read_json(d / "hw.report.json");
  CHECK(rep["alpha"].get<double>() == doctest::Approx(20 * 42.576 / 100));
  CHECK(read_json(d / "hw.csv.meta.json")["config"]["hardware"]["g_max"] == 20.0);
}
