#include "bench.hpp"

#include "runner.hpp"

#include <gradwave/error.hpp>
#include <gradwave/trajectories.hpp>

#include <chrono>

namespace gradwave::cli {

using nlohmann::json;

namespace {

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

AffineConstraintSet pin_start(const DiscreteCurve& c) {
  AffineConstraintSet a(c.size(), c.dim(), c.dt());
  a.add_point_constraint(0, c.points().row(0).transpose());
  return a;
}

TraversalSummary summarize(const TraversalReport& r, const KinematicLimits& limits) {
  TraversalSummary s;
  s.mode = to_string(limits.mode);
  s.t_input = r.t_input;
  s.t_projection = r.t_projection;
  s.t_rep = r.t_rep;
  s.ratio = r.ratio;
  s.rel_error_input = r.rel_error_input;
  s.rel_error_projection = r.rel_error_projection;
  s.rel_error_reparam = r.rel_error_reparam;
  s.projection_residuals = r.projection->residuals;
  s.reparam_residuals = feasibility_report(r.reparam->curve, limits);
  s.converged = r.projection->converged;
  s.iterations = r.projection->iterations;
  s.newton_steps = r.projection->newton_steps;
  s.distance_normalized = r.projection->distance_normalized;
  return s;
}

Matrix tsp_polyline(const TspResult& res, bool start_at_origin) {
  if (!start_at_origin) return res.tour;
  Matrix poly(res.tour.rows() + 1, 2);
  poly.row(0).setZero();
  poly.bottomRows(res.tour.rows()) = res.tour;
  return poly;
}

TspSpec tsp_spec(const RunConfig& cfg, Index cities, std::uint64_t seed) {
  TspSpec ts;
  ts.city_density =
      city_density_for_target(radial_density(cfg.tsp.density_exponent, cfg.grid.k_max, cfg.grid.resolution));
  ts.n_cities = cities;
  ts.seed = seed;
  ts.two_opt_passes = cfg.tsp.two_opt_passes;
  ts.start_at_origin = cfg.tsp.start_at_origin;
  return ts;
}

}  // namespace

RosetteBench run_rosette_bench(const RunConfig& cfg) {
  RosetteSpec spec;
  spec.k_max = cfg.rosette.k_max;
  spec.omega1 = cfg.rosette.omega1;
  spec.omega2 = cfg.rosette.omega2;
  spec.speed_fraction = cfg.rosette.speed_fraction;
  const Matrix shape = rosette_polyline(spec);

  RosetteBench out;
  for (NormMode mode : {NormMode::RIV, NormMode::RV}) {
    const KinematicLimits limits = limits_from_hardware(cfg.hardware, mode);
    const DiscreteCurve c = gen_rosette(spec, limits, cfg.dt_curve);
    if (mode == NormMode::RIV) out.input = c;
    out.n = c.size();
    TraversalOptions opt;
    opt.support = shape;  // the exact shape, not its coarse resampling
    opt.grid = cfg.grid;
    opt.sample_dt = cfg.dt_sample;
    opt.angle_tol_deg = cfg.angle_tol_deg;
    opt.projection = cfg.projection;
    opt.affine = pin_start(c);
    const auto t0 = std::chrono::steady_clock::now();
    TraversalReport r = compare_traversal(c, limits, opt);
    TraversalSummary s = summarize(r, limits);
    s.wall_s = seconds_since(t0);
    out.modes.push_back(s);
    out.reports.push_back(std::move(r));
  }
  return out;
}

TspBench run_tsp_bench(const RunConfig& cfg) {
  const KinematicLimits limits = cfg.limits();
  const TspSpec ts = tsp_spec(cfg, cfg.tsp.n_cities, cfg.seed);
  const TspResult res = gen_tsp_trajectory(ts, cfg.dt_curve, cfg.tsp.speed_fraction * limits.alpha);

  TspBench out;
  out.input = res.curve;
  out.n = res.curve.size();
  out.tour_length = res.tour_length;
  TraversalOptions opt;
  opt.support = tsp_polyline(res, ts.start_at_origin);
  opt.target = res.limit_density;
  opt.grid = cfg.grid;
  opt.sample_dt = cfg.dt_sample;
  opt.angle_tol_deg = cfg.angle_tol_deg;
  opt.projection = cfg.projection;
  opt.affine = pin_start(res.curve);
  const auto t0 = std::chrono::steady_clock::now();
  out.report = compare_traversal(res.curve, limits, opt);
  out.summary = summarize(out.report, limits);
  out.summary.wall_s = seconds_since(t0);
  return out;
}

namespace {

struct Replication {
  std::vector<EmpiricalHistogram> projection;
  std::vector<double> t_projection, distance;
  std::vector<char> converged;
  EmpiricalHistogram reparam{DensityGrid{}};
  EmpiricalHistogram input{DensityGrid{}};
  double t_rep = 0.0, t_input = 0.0, tour_length = 0.0;
};

}  // namespace

McDensity run_mc_density(const RunConfig& cfg) {
  const auto t0 = std::chrono::steady_clock::now();
  const KinematicLimits limits = cfg.limits();
  ProjectionSettings ps = cfg.projection;
  ps.n_it = cfg.bench.mc_iterations;
  const auto& speeds = cfg.bench.speeds;

  const auto reps = parallel_map(cfg.bench.replications, cfg.jobs, [&](int i) {
    const TspSpec ts = tsp_spec(cfg, cfg.bench.mc_cities, cfg.seed + static_cast<std::uint64_t>(i));
    const TspResult res = gen_tsp_trajectory(ts, cfg.dt_curve, cfg.bench.arm_speed * limits.alpha);
    const Matrix poly = tsp_polyline(res, ts.start_at_origin);

    Replication r;
    r.tour_length = res.tour_length;
    r.input = empirical_histogram(sample_at_rate(res.curve, cfg.dt_sample), cfg.grid);
    r.t_input = res.curve.duration();
    for (double f : speeds) {
      const DiscreteCurve c = constant_speed_parameterization(poly, f * limits.alpha, cfg.dt_curve);
      const ProjectionResult p = project_curve(c, limits, pin_start(c), ps);
      r.projection.push_back(empirical_histogram(sample_at_rate(p.curve, cfg.dt_sample), cfg.grid));
      r.t_projection.push_back(p.curve.duration());
      r.distance.push_back(p.distance_normalized);
      r.converged.push_back(p.converged ? 1 : 0);
    }
    const ReparamResult rep =
        time_optimal_reparam(build_support(poly, cfg.angle_tol_deg), limits, cfg.dt_curve);
    r.reparam = empirical_histogram(sample_at_rate(rep.curve, cfg.dt_sample), cfg.grid);
    r.t_rep = rep.duration;
    return r;
  });

  McDensity out;
  out.replications = cfg.bench.replications;
  out.cities = cfg.bench.mc_cities;
  out.target = radial_density(cfg.tsp.density_exponent, cfg.grid.k_max, cfg.grid.resolution);
  const double R = static_cast<double>(reps.size());
  for (std::size_t k = 0; k < speeds.size(); ++k) {
    McArm arm;
    arm.name = "projection_" + std::to_string(static_cast<int>(std::lround(speeds[k] * 100))) + "pct";
    arm.speed_fraction = speeds[k];
    arm.hist = EmpiricalHistogram(cfg.grid);
    for (const auto& r : reps) {
      arm.hist.merge(r.projection[k]);
      arm.mean_duration += r.t_projection[k] / R;
      arm.mean_distance_normalized += r.distance[k] / R;
      arm.unconverged += r.converged[k] ? 0 : 1;
    }
    arm.rel_error = relative_error(arm.hist, out.target);
    out.projection.push_back(std::move(arm));
  }
  out.reparam.name = "reparam";
  out.reparam.hist = EmpiricalHistogram(cfg.grid);
  out.input.name = "arclength_input";
  out.input.speed_fraction = cfg.bench.arm_speed;
  out.input.hist = EmpiricalHistogram(cfg.grid);
  for (const auto& r : reps) {
    out.reparam.hist.merge(r.reparam);
    out.reparam.mean_duration += r.t_rep / R;
    out.input.hist.merge(r.input);
    out.input.mean_duration += r.t_input / R;
    out.mean_tour_length += r.tour_length / R;
  }
  out.reparam.rel_error = relative_error(out.reparam.hist, out.target);
  out.input.rel_error = relative_error(out.input.hist, out.target);
  out.wall_s = seconds_since(t0);
  return out;
}

json to_json(const FeasibilityReport& r) {
  return json{{"speed", r.speed},
              {"acceleration", r.acceleration},
              {"speed_residual", r.speed_residual},
              {"accel_residual", r.accel_residual},
              {"affine_residual", r.affine_residual}};
}

json to_json(const TraversalSummary& s) {
  return json{{"mode", s.mode},
              {"t_input_ms", s.t_input},
              {"t_projection_ms", s.t_projection},
              {"t_rep_ms", s.t_rep},
              {"ratio", s.ratio},
              {"rel_error_input", s.rel_error_input},
              {"rel_error_projection", s.rel_error_projection},
              {"rel_error_reparam", s.rel_error_reparam},
              {"projection_residuals", to_json(s.projection_residuals)},
              {"reparam_residuals", to_json(s.reparam_residuals)},
              {"converged", s.converged},
              {"iterations", s.iterations},
              {"newton_steps", s.newton_steps},
              {"distance_normalized", s.distance_normalized},
              {"wall_s", s.wall_s}};
}

json to_json(const McDensity& m) {
  auto arm_json = [](const McArm& a) {
    return json{{"name", a.name},
                {"speed_fraction", a.speed_fraction},
                {"rel_error", a.rel_error},
                {"mean_duration_ms", a.mean_duration},
                {"mean_distance_normalized", a.mean_distance_normalized},
                {"unconverged", a.unconverged},
                {"samples", a.hist.total},
                {"clipped", a.hist.clipped}};
  };
  json arms = json::array();
  for (const auto& a : m.projection) arms.push_back(arm_json(a));
  return json{{"replications", m.replications},
              {"cities", m.cities},
              {"grid", {{"k_max", m.target.grid.k_max}, {"resolution", m.target.grid.resolution}}},
              {"mean_tour_length", m.mean_tour_length},
              {"projection", arms},
              {"reparam", arm_json(m.reparam)},
              {"arclength_input", arm_json(m.input)},
              {"wall_s", m.wall_s}};
}

}  // namespace gradwave::cli
