#include "commands.hpp"

#include "bench.hpp"

#include <gradwave/error.hpp>
#include <gradwave/io.hpp>
#include <gradwave/reparam.hpp>
#include <gradwave/trajectories.hpp>

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdlib>
#include <iostream>
#include <sstream>

namespace gradwave::cli {

namespace fs = std::filesystem;
using nlohmann::json;

OutputSet::OutputSet(const RunConfig& cfg, std::string command)
    : cfg_(cfg), command_(std::move(command)), start_(std::chrono::steady_clock::now()) {}

void OutputSet::add(const std::string& name, std::string content) {
  files_.emplace_back(name, std::move(content));
}

std::vector<fs::path> OutputSet::commit() const {
  const double wall =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  const std::string hash = config_hash(cfg_);
  std::vector<fs::path> written;
  for (const auto& [name, content] : files_) {
    const fs::path path = cfg_.out_dir / name;
    io::write_text_atomic(path, content);
    const json meta{{"file", name},
                    {"command", command_},
                    {"config_hash", hash},
                    {"seed", cfg_.seed},
                    {"versions", {{"core", GRADWAVE_VERSION}, {"cli", GRADWAVE_VERSION}}},
                    {"wall_time_s", wall},
                    {"config", to_json(cfg_)}};
    io::write_text_atomic(fs::path(path.string() + ".meta.json"), meta.dump(2) + "\n");
    written.push_back(path);
  }
  return written;
}

namespace {

struct Flags {
  std::string config, out_dir, mode, hardware;
  std::uint64_t seed = 0;
  int jobs = 1;

  std::string out, input, constraints, support, target, reference;
  double speed_fraction = 0.0, k_max = 0.0, radial_exponent = 1.0;
  int revolutions = 0, n_it = 0, replications = 0;
  Index cities = 0;
  bool pin_start = false;

  CLI::Option *o_config = nullptr, *o_out_dir = nullptr, *o_mode = nullptr, *o_seed = nullptr,
              *o_jobs = nullptr, *o_hardware = nullptr;
  CLI::Option *o_speed = nullptr, *o_kmax = nullptr, *o_revs = nullptr, *o_nit = nullptr,
              *o_reps = nullptr, *o_cities = nullptr, *o_radial = nullptr;
};

bool given(const CLI::Option* o) { return o != nullptr && o->count() > 0; }

std::string stem_of(const std::string& name) {
  const fs::path p(name);
  return (p.parent_path() / p.stem()).string();
}

std::string polyline_csv(const Matrix& p) {
  std::ostringstream out;
  out << "kx,ky\n";
  for (Index i = 0; i < p.rows(); ++i)
    out << io::format_double(p(i, 0)) << ',' << io::format_double(p(i, 1)) << '\n';
  return out.str();
}

void print_written(const std::vector<fs::path>& paths) {
  for (const auto& p : paths) std::cout << p.string() << '\n';
}

std::string dump(const json& j) { return j.dump(2) + "\n"; }

int cmd_gen_rosette(const RunConfig& cfg, const Flags& f) {
  OutputSet out(cfg, "gen rosette");
  RosetteSpec spec;
  spec.k_max = cfg.rosette.k_max;
  spec.omega1 = cfg.rosette.omega1;
  spec.omega2 = cfg.rosette.omega2;
  spec.speed_fraction = cfg.rosette.speed_fraction;
  const DiscreteCurve c = gen_rosette(spec, cfg.limits(), cfg.dt_curve);
  const std::string name = f.out.empty() ? "rosette.csv" : f.out;
  out.add(name, io::format_curve_csv(c));
  print_written(out.commit());
  return kOk;
}

int cmd_gen_spiral(const RunConfig& cfg, const Flags& f) {
  OutputSet out(cfg, "gen spiral");
  const SpiralSpec spec = SpiralSpec::archimedean(cfg.spiral.k_max, cfg.spiral.revolutions);
  const DiscreteCurve c =
      gen_spiral(spec, cfg.dt_curve, cfg.spiral.speed_fraction * cfg.limits().alpha);
  const std::string name = f.out.empty() ? "spiral.csv" : f.out;
  out.add(name, io::format_curve_csv(c));
  const TargetDensity target = spiral_target_density(spec, cfg.grid);
  out.add(stem_of(name) + ".target.csv", io::format_grid_csv(target.grid, target.values));
  print_written(out.commit());
  return kOk;
}

int cmd_gen_tsp(const RunConfig& cfg, const Flags& f) {
  OutputSet out(cfg, "gen tsp");
  TspSpec ts;
  const TargetDensity target =
      radial_density(cfg.tsp.density_exponent, cfg.grid.k_max, cfg.grid.resolution);
  ts.city_density = city_density_for_target(target);
  ts.n_cities = cfg.tsp.n_cities;
  ts.seed = cfg.seed;
  ts.two_opt_passes = cfg.tsp.two_opt_passes;
  ts.start_at_origin = cfg.tsp.start_at_origin;
  const TspResult r = gen_tsp_trajectory(ts, cfg.dt_curve, cfg.tsp.speed_fraction * cfg.limits().alpha);
  const std::string name = f.out.empty() ? "tsp.csv" : f.out;
  const std::string stem = stem_of(name);
  out.add(name, io::format_curve_csv(r.curve));
  out.add(stem + ".tour.csv", polyline_csv(r.tour));
  out.add(stem + ".target.csv", io::format_grid_csv(r.limit_density.grid, r.limit_density.values));
  out.add(stem + ".report.json", dump({{"n_cities", ts.n_cities},
                                       {"samples", r.curve.size()},
                                       {"duration_ms", r.curve.duration()},
                                       {"tour_length", r.tour_length},
                                       {"nearest_neighbor_length", r.nearest_neighbor_length}}));
  print_written(out.commit());
  return kOk;
}

AffineConstraintSet constraints_for(const DiscreteCurve& c, const Flags& f) {
  AffineConstraintSet a = f.constraints.empty()
                              ? AffineConstraintSet(c.size(), c.dim(), c.dt())
                              : io::read_constraints_json(f.constraints, c.size(), c.dim(), c.dt());
  if (f.pin_start) a.add_point_constraint(0, c.points().row(0).transpose());
  return a;
}

int cmd_project(const RunConfig& cfg, const Flags& f) {
  OutputSet out(cfg, "project");
  const DiscreteCurve c = io::read_curve_csv(f.input);
  const KinematicLimits limits = cfg.limits();
  const AffineConstraintSet affine = constraints_for(c, f);
  const auto t0 = std::chrono::steady_clock::now();
  const ProjectionResult r = project_curve(c, limits, affine, cfg.projection);
  const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  if (!r.converged) {
    std::ostringstream msg;
    msg << "projection missed the tolerances (speed residual " << r.residuals.speed_residual
        << ", acceleration residual " << r.residuals.accel_residual << ", affine residual "
        << r.residuals.affine_residual << ")";
    throw Infeasible(msg.str());
  }
  const std::string name = f.out.empty() ? "projected.csv" : f.out;
  const std::string stem = stem_of(name);
  out.add(name, io::format_curve_csv(r.curve));
  out.add(stem + ".gradient.csv", io::format_gradient_csv(r.curve, cfg.hardware.gamma));
  out.add(stem + ".report.json",
          dump({{"input", f.input},
                {"samples", c.size()},
                {"dim", c.dim()},
                {"dt_ms", c.dt()},
                {"duration_ms", r.curve.duration()},
                {"mode", to_string(limits.mode)},
                {"alpha", limits.alpha},
                {"beta", limits.beta},
                {"affine_rows", affine.size()},
                {"distance", r.distance},
                {"distance_normalized", r.distance_normalized},
                {"residuals", to_json(r.residuals)},
                {"converged", r.converged},
                {"iteration_converged", r.iteration_converged},
                {"polished", r.polished},
                {"restored", r.restored},
                {"iterations", r.iterations},
                {"newton_steps", r.newton_steps},
                {"lipschitz", r.lipschitz},
                {"wall_s", wall}}));
  print_written(out.commit());
  return kOk;
}

int cmd_reparam(const RunConfig& cfg, const Flags& f) {
  OutputSet out(cfg, "reparam");
  const DiscreteCurve c = io::read_curve_csv(f.input);
  const Matrix support = f.support.empty() ? c.points() : io::read_curve_csv(f.support).points();
  const KinematicLimits limits = cfg.limits();
  const SupportPath path = build_support(support, cfg.angle_tol_deg);
  const ReparamResult r = time_optimal_reparam(path, limits, c.dt());
  const FeasibilityReport fr = feasibility_report(r.curve, limits);
  const std::string name = f.out.empty() ? "reparam.csv" : f.out;
  const std::string stem = stem_of(name);
  out.add(name, io::format_curve_csv(r.curve));
  out.add(stem + ".profile.csv", io::format_profile_csv(r.sigma, r.speed));
  out.add(stem + ".report.json", dump({{"input", f.input},
                                       {"t_input_ms", c.duration()},
                                       {"t_rep_ms", r.duration},
                                       {"support_vertices", path.size()},
                                       {"singular_vertices", path.singular.size()},
                                       {"support_length", path.length()},
                                       {"mode", to_string(limits.mode)},
                                       {"residuals", to_json(fr)}}));
  print_written(out.commit());
  return kOk;
}

int cmd_analyze(const RunConfig& cfg, const Flags& f) {
  OutputSet out(cfg, "analyze");
  const DiscreteCurve c = io::read_curve_csv(f.input);
  const KinematicLimits limits = cfg.limits();
  json rep{{"input", f.input},
           {"samples", c.size()},
           {"dim", c.dim()},
           {"duration_ms", c.duration()},
           {"mode", to_string(limits.mode)},
           {"feasibility", to_json(feasibility_report(c, limits))}};
  const std::string name = f.out.empty() ? "analysis.json" : f.out;
  const std::string stem = stem_of(name);
  if (c.dim() == 2) {
    const EmpiricalHistogram h = empirical_histogram(sample_at_rate(c, cfg.dt_sample), cfg.grid);
    rep["histogram"] = {{"samples", h.total}, {"clipped", h.clipped}};
    rep["bins"] = cfg.grid.resolution;
    rep["grid_k_max"] = cfg.grid.k_max;
    std::optional<TargetDensity> target;
    if (!f.target.empty())
      target = io::read_density_csv(f.target);
    else if (given(f.o_radial))
      target = radial_density(f.radial_exponent, cfg.grid.k_max, cfg.grid.resolution);
    if (target) {
      if (!(target->grid == cfg.grid))
        throw InvalidArgument("target density grid does not match the configured grid");
      rep["rel_error"] = relative_error(h, *target);
      out.add(stem + ".diff.csv", io::format_grid_csv(cfg.grid, difference_grid(h, *target)));
    }
    out.add(stem + ".hist.csv", io::format_grid_csv(cfg.grid, h.density()));
  }
  if (!f.reference.empty()) {
    const DiscreteCurve ref = io::read_curve_csv(f.reference);
    if (ref.dim() != c.dim()) throw InvalidArgument("reference curve has a different dimension");
    json cmp{{"reference", f.reference},
             {"w2_sliced", wasserstein2_sliced(c.points(), ref.points(), 64, cfg.seed)}};
    if (ref.size() == c.size() && ref.dt() == c.dt()) {
      cmp["coupling_bound"] = coupling_bound(c, ref);
      if (c.size() <= 4096) cmp["w2_exact"] = wasserstein2_exact(c.points(), ref.points());
    }
    rep["comparison"] = cmp;
  }
  out.add(name, dump(rep));
  print_written(out.commit());
  return kOk;
}

int cmd_bench_rosette(const RunConfig& cfg, const Flags&) {
  OutputSet out(cfg, "bench rosette");
  const RosetteBench b = run_rosette_bench(cfg);
  json modes = json::array();
  for (const auto& s : b.modes) modes.push_back(to_json(s));
  out.add("rosette.summary.json", dump({{"samples", b.n}, {"modes", modes}}));
  out.add("rosette.input.csv", io::format_curve_csv(b.input));
  for (std::size_t k = 0; k < b.reports.size(); ++k) {
    const std::string tag = "rosette_" + b.modes[k].mode;
    out.add(tag + ".projected.csv", io::format_curve_csv(b.reports[k].projection->curve));
    out.add(tag + ".reparam.csv", io::format_curve_csv(b.reports[k].reparam->curve));
    out.add(tag + ".profile.csv",
            io::format_profile_csv(b.reports[k].reparam->sigma, b.reports[k].reparam->speed));
  }
  print_written(out.commit());
  return kOk;
}

int cmd_bench_tsp(const RunConfig& cfg, const Flags&) {
  OutputSet out(cfg, "bench tsp");
  const TspBench b = run_tsp_bench(cfg);
  out.add("tsp.summary.json", dump({{"samples", b.n},
                                    {"cities", cfg.tsp.n_cities},
                                    {"speed_fraction", cfg.tsp.speed_fraction},
                                    {"tour_length", b.tour_length},
                                    {"result", to_json(b.summary)}}));
  out.add("tsp.input.csv", io::format_curve_csv(b.input));
  out.add("tsp.projected.csv", io::format_curve_csv(b.report.projection->curve));
  out.add("tsp.reparam.csv", io::format_curve_csv(b.report.reparam->curve));
  out.add("tsp.profile.csv", io::format_profile_csv(b.report.reparam->sigma, b.report.reparam->speed));
  print_written(out.commit());
  return kOk;
}

int cmd_bench_mc(const RunConfig& cfg, const Flags&) {
  OutputSet out(cfg, "bench mc_density");
  const McDensity m = run_mc_density(cfg);
  out.add("mc_density.summary.json", dump(to_json(m)));
  auto grid_out = [&](const McArm& a) {
    out.add("mc_density." + a.name + ".diff.csv",
            io::format_grid_csv(m.target.grid, difference_grid(a.hist, m.target)));
  };
  for (const auto& a : m.projection) grid_out(a);
  grid_out(m.reparam);
  grid_out(m.input);
  out.add("mc_density.target.csv", io::format_grid_csv(m.target.grid, m.target.values));
  print_written(out.commit());
  return kOk;
}

RunConfig resolve_config(const Flags& f) {
  RunConfig cfg;
  cfg.out_dir.clear();
  if (given(f.o_config)) cfg = load_config(f.config, cfg);
  if (given(f.o_hardware)) cfg.hardware = io::read_hardware_json(f.hardware);
  if (given(f.o_seed)) cfg.seed = f.seed;
  if (given(f.o_jobs)) cfg.jobs = f.jobs;
  if (given(f.o_mode)) cfg.mode = parse_norm_mode(f.mode);
  if (given(f.o_out_dir)) cfg.out_dir = f.out_dir;
  if (cfg.out_dir.empty()) {
    const char* env = std::getenv("GRADWAVE_OUT_DIR");
    cfg.out_dir = (env && *env) ? fs::path(env) : fs::path(".");
  }
  if (given(f.o_nit)) cfg.projection.n_it = f.n_it;
  if (given(f.o_reps)) cfg.bench.replications = f.replications;
  return cfg;
}

void report_error(const std::string& code, int exit_code, const std::string& message) {
  std::cerr << "gradwave-error "
            << json{{"code", code}, {"exit", exit_code}, {"message", message}}.dump() << std::endl;
}

int exit_for(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidArgument:
    case ErrorCode::Parse:
      return kBadInput;
    case ErrorCode::NumericFailure:
      return kNumeric;
    case ErrorCode::DependentConstraints:
      return kInfeasible;
  }
  return kInternal;
}

}  // namespace

int run_cli(int argc, const char* const* argv) {
  Flags f;
  CLI::App app{"Projection of k-space trajectories onto gradient hardware constraints"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(GRADWAVE_VERSION));
  f.o_config = app.add_option("--config", f.config, "JSON run configuration");
  f.o_seed = app.add_option("--seed", f.seed, "Base random seed");
  f.o_jobs = app.add_option("--jobs", f.jobs, "Worker threads for bench replications")
                 ->check(CLI::PositiveNumber);
  f.o_out_dir = app.add_option("--out-dir", f.out_dir, "Output directory (else $GRADWAVE_OUT_DIR, else .)");
  f.o_mode = app.add_option("--mode", f.mode, "Norm of the bounds: RIV or RV");
  f.o_hardware = app.add_option("--hardware", f.hardware, "Hardware JSON {g_max, s_max, gamma}");

  auto* gen = app.add_subcommand("gen", "Generate an input trajectory");
  gen->require_subcommand(1);
  auto* gen_rosette = gen->add_subcommand("rosette", "Rosette at a fraction of the max speed");
  auto* gen_spiral = gen->add_subcommand("spiral", "Archimedean spiral");
  auto* gen_tsp = gen->add_subcommand("tsp", "Travelling-salesman tour through random cities");
  for (auto* sc : {gen_rosette, gen_spiral, gen_tsp}) sc->add_option("--out", f.out, "Output file name");
  CLI::Option* speed_r = gen_rosette->add_option("--speed-fraction", f.speed_fraction);
  CLI::Option* kmax_r = gen_rosette->add_option("--k-max", f.k_max);
  CLI::Option* speed_s = gen_spiral->add_option("--speed-fraction", f.speed_fraction);
  CLI::Option* kmax_s = gen_spiral->add_option("--k-max", f.k_max);
  f.o_revs = gen_spiral->add_option("--revolutions", f.revolutions);
  CLI::Option* speed_t = gen_tsp->add_option("--speed-fraction", f.speed_fraction);
  f.o_cities = gen_tsp->add_option("--cities", f.cities);
  CLI::Option* exp_t = gen_tsp->add_option("--density-exponent", f.radial_exponent);

  auto* project = app.add_subcommand("project", "Project a curve onto the constraint set");
  project->add_option("--input", f.input, "Curve CSV (t_ms,kx,ky[,kz])")->required();
  project->add_option("--constraints", f.constraints, "Affine constraints JSON");
  project->add_flag("--pin-start", f.pin_start, "Keep the first sample fixed");
  project->add_option("--out", f.out, "Output file name");
  f.o_nit = project->add_option("--n-it", f.n_it, "Iteration cap");

  auto* reparam = app.add_subcommand("reparam", "Time-optimal traversal of a curve's support");
  reparam->add_option("--input", f.input, "Curve CSV")->required();
  reparam->add_option("--support", f.support, "Curve CSV whose samples define the support");
  reparam->add_option("--out", f.out, "Output file name");

  auto* analyze = app.add_subcommand("analyze", "Feasibility and density metrics of a curve");
  analyze->add_option("--input", f.input, "Curve CSV")->required();
  analyze->add_option("--target", f.target, "Target density CSV (kx,ky,value)");
  f.o_radial = analyze->add_option("--radial-exponent", f.radial_exponent,
                                   "Use (1 - |k|/k_max)^e as the target");
  analyze->add_option("--reference", f.reference, "Curve CSV to compare against");
  analyze->add_option("--out", f.out, "Output file name");

  auto* bench = app.add_subcommand("bench", "Reproduction experiments");
  bench->require_subcommand(1);
  auto* b_rosette = bench->add_subcommand("rosette", "Rosette timing, both norms");
  auto* b_tsp = bench->add_subcommand("tsp", "TSP timing");
  auto* b_mc = bench->add_subcommand("mc_density", "Monte Carlo density distortion");
  f.o_reps = b_mc->add_option("--replications", f.replications);
  CLI::Option* mc_cities = b_mc->add_option("--cities", f.cities);
  CLI::Option* tsp_cities = b_tsp->add_option("--cities", f.cities);

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    report_error("usage", kBadInput, e.what());
    return kBadInput;
  }

  try {
    RunConfig cfg = resolve_config(f);
    if (given(speed_r)) cfg.rosette.speed_fraction = f.speed_fraction;
    if (given(kmax_r)) cfg.rosette.k_max = f.k_max;
    if (given(speed_s)) cfg.spiral.speed_fraction = f.speed_fraction;
    if (given(kmax_s)) cfg.spiral.k_max = f.k_max;
    if (given(f.o_revs)) cfg.spiral.revolutions = f.revolutions;
    if (given(speed_t)) cfg.tsp.speed_fraction = f.speed_fraction;
    if (given(f.o_cities) || given(tsp_cities)) cfg.tsp.n_cities = f.cities;
    if (given(exp_t)) cfg.tsp.density_exponent = f.radial_exponent;
    if (given(mc_cities)) cfg.bench.mc_cities = f.cities;
    cfg.validate();

    if (gen_rosette->parsed()) return cmd_gen_rosette(cfg, f);
    if (gen_spiral->parsed()) return cmd_gen_spiral(cfg, f);
    if (gen_tsp->parsed()) return cmd_gen_tsp(cfg, f);
    if (project->parsed()) return cmd_project(cfg, f);
    if (reparam->parsed()) return cmd_reparam(cfg, f);
    if (analyze->parsed()) return cmd_analyze(cfg, f);
    if (b_rosette->parsed()) return cmd_bench_rosette(cfg, f);
    if (b_tsp->parsed()) return cmd_bench_tsp(cfg, f);
    if (b_mc->parsed()) return cmd_bench_mc(cfg, f);
    report_error("usage", kBadInput, "no command given");
    return kBadInput;
  } catch (const Infeasible& e) {
    report_error("infeasible", kInfeasible, e.what());
    return kInfeasible;
  } catch (const Error& e) {
    const int code = exit_for(e.code());
    report_error(to_string(e.code()), code, e.what());
    return code;
  } catch (const std::exception& e) {
    report_error("internal", kInternal, e.what());
    return kInternal;
  }
}

int run_cli(const std::vector<std::string>& args) {
  std::vector<const char*> argv;
  argv.reserve(args.size() + 1);
  argv.push_back("gradwave");
  for (const auto& a : args) argv.push_back(a.c_str());
  return run_cli(static_cast<int>(argv.size()), argv.data());
}

}  // namespace gradwave::cli
