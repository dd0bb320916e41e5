#include "config.hpp"

#include <gradwave/error.hpp>
#include <gradwave/io.hpp>

#include <cmath>
#include <cstdio>

namespace gradwave::cli {

using nlohmann::json;

namespace {

template <class T>
void take(const json& obj, const char* key, T& out, const std::string& ctx) {
  auto it = obj.find(key);
  if (it == obj.end()) return;
  try {
    out = it->get<T>();
  } catch (const json::exception&) {
    throw ParseError("config key '" + ctx + key + "' has the wrong type");
  }
}

void check_keys(const json& obj, std::initializer_list<const char*> allowed, const std::string& ctx) {
  if (!obj.is_object()) throw ParseError("config section '" + ctx + "' must be an object");
  for (auto it = obj.begin(); it != obj.end(); ++it) {
    bool ok = false;
    for (const char* a : allowed) ok = ok || it.key() == a;
    if (!ok) throw ParseError("unknown config key '" + ctx + it.key() + "'");
  }
}

}  // namespace

void RunConfig::validate() const {
  hardware.validate();
  if (!(dt_curve > 0.0) || !std::isfinite(dt_curve)) throw InvalidArgument("dt_curve must be positive");
  if (!(dt_sample >= dt_curve)) throw InvalidArgument("dt_sample must be >= dt_curve");
  if (jobs < 1) throw InvalidArgument("jobs must be >= 1");
  grid.validate();
  projection.validate();
  if (!(rosette.speed_fraction > 0.0 && rosette.speed_fraction <= 1.0))
    throw InvalidArgument("rosette.speed_fraction must lie in (0, 1]");
  if (!(tsp.speed_fraction > 0.0 && tsp.speed_fraction <= 1.0))
    throw InvalidArgument("tsp.speed_fraction must lie in (0, 1]");
  if (!(spiral.speed_fraction > 0.0 && spiral.speed_fraction <= 1.0))
    throw InvalidArgument("spiral.speed_fraction must lie in (0, 1]");
  if (tsp.n_cities < 1 || bench.mc_cities < 1) throw InvalidArgument("city counts must be >= 1");
  if (bench.replications < 1) throw InvalidArgument("bench.replications must be >= 1");
  if (bench.speeds.empty()) throw InvalidArgument("bench.speeds is empty");
  for (double s : bench.speeds)
    if (!(s > 0.0 && s <= 1.0)) throw InvalidArgument("bench.speeds must lie in (0, 1]");
}

void apply_config_json(RunConfig& cfg, const json& doc) {
  check_keys(doc,
             {"hardware", "mode", "dt_curve", "dt_sample", "seed", "jobs", "out_dir", "grid",
              "projection", "angle_tol_deg", "rosette", "spiral", "tsp", "bench"},
             "");
  if (auto it = doc.find("hardware"); it != doc.end()) {
    check_keys(*it, {"g_max", "s_max", "gamma"}, "hardware.");
    take(*it, "g_max", cfg.hardware.g_max, "hardware.");
    take(*it, "s_max", cfg.hardware.s_max, "hardware.");
    take(*it, "gamma", cfg.hardware.gamma, "hardware.");
  }
  if (auto it = doc.find("mode"); it != doc.end()) {
    if (!it->is_string()) throw ParseError("config key 'mode' must be \"RV\" or \"RIV\"");
    try {
      cfg.mode = parse_norm_mode(it->get<std::string>());
    } catch (const Error& e) {
      throw ParseError(e.what());
    }
  }
  take(doc, "dt_curve", cfg.dt_curve, "");
  take(doc, "dt_sample", cfg.dt_sample, "");
  take(doc, "seed", cfg.seed, "");
  take(doc, "jobs", cfg.jobs, "");
  if (auto it = doc.find("out_dir"); it != doc.end()) {
    std::string s;
    take(doc, "out_dir", s, "");
    cfg.out_dir = s;
  }
  take(doc, "angle_tol_deg", cfg.angle_tol_deg, "");
  if (auto it = doc.find("grid"); it != doc.end()) {
    check_keys(*it, {"k_max", "resolution"}, "grid.");
    take(*it, "k_max", cfg.grid.k_max, "grid.");
    take(*it, "resolution", cfg.grid.resolution, "grid.");
  }
  if (auto it = doc.find("projection"); it != doc.end()) {
    auto& p = cfg.projection;
    check_keys(*it,
               {"n_it", "feasibility_tol", "affine_tol", "normalize_time", "coarse_to_fine",
                "restore_feasibility", "polish", "polish_gap_tol", "stop_when_converged",
                "power_iters"},
               "projection.");
    take(*it, "n_it", p.n_it, "projection.");
    take(*it, "feasibility_tol", p.feasibility_tol, "projection.");
    take(*it, "affine_tol", p.affine_tol, "projection.");
    take(*it, "normalize_time", p.normalize_time, "projection.");
    take(*it, "coarse_to_fine", p.coarse_to_fine, "projection.");
    take(*it, "restore_feasibility", p.restore_feasibility, "projection.");
    take(*it, "polish", p.polish, "projection.");
    take(*it, "polish_gap_tol", p.polish_gap_tol, "projection.");
    take(*it, "stop_when_converged", p.stop_when_converged, "projection.");
    take(*it, "power_iters", p.power_iters, "projection.");
  }
  if (auto it = doc.find("rosette"); it != doc.end()) {
    check_keys(*it, {"k_max", "omega1", "omega2", "speed_fraction"}, "rosette.");
    take(*it, "k_max", cfg.rosette.k_max, "rosette.");
    take(*it, "omega1", cfg.rosette.omega1, "rosette.");
    take(*it, "omega2", cfg.rosette.omega2, "rosette.");
    take(*it, "speed_fraction", cfg.rosette.speed_fraction, "rosette.");
  }
  if (auto it = doc.find("spiral"); it != doc.end()) {
    check_keys(*it, {"k_max", "revolutions", "speed_fraction"}, "spiral.");
    take(*it, "k_max", cfg.spiral.k_max, "spiral.");
    take(*it, "revolutions", cfg.spiral.revolutions, "spiral.");
    take(*it, "speed_fraction", cfg.spiral.speed_fraction, "spiral.");
  }
  if (auto it = doc.find("tsp"); it != doc.end()) {
    check_keys(*it,
               {"n_cities", "speed_fraction", "density_exponent", "two_opt_passes",
                "start_at_origin"},
               "tsp.");
    take(*it, "n_cities", cfg.tsp.n_cities, "tsp.");
    take(*it, "speed_fraction", cfg.tsp.speed_fraction, "tsp.");
    take(*it, "density_exponent", cfg.tsp.density_exponent, "tsp.");
    take(*it, "two_opt_passes", cfg.tsp.two_opt_passes, "tsp.");
    take(*it, "start_at_origin", cfg.tsp.start_at_origin, "tsp.");
  }
  if (auto it = doc.find("bench"); it != doc.end()) {
    check_keys(*it, {"replications", "speeds", "mc_cities", "mc_iterations", "arm_speed"},
               "bench.");
    take(*it, "replications", cfg.bench.replications, "bench.");
    take(*it, "speeds", cfg.bench.speeds, "bench.");
    take(*it, "mc_cities", cfg.bench.mc_cities, "bench.");
    take(*it, "mc_iterations", cfg.bench.mc_iterations, "bench.");
    take(*it, "arm_speed", cfg.bench.arm_speed, "bench.");
  }
}

RunConfig load_config(const std::filesystem::path& path, RunConfig base) {
  const std::string text = io::read_text(path);
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ParseError("config '" + path.string() + "' is not valid JSON: " + e.what());
  }
  apply_config_json(base, doc);
  return base;
}

json to_json(const RunConfig& c) {
  const auto& p = c.projection;
  return json{
      {"hardware", {{"g_max", c.hardware.g_max}, {"s_max", c.hardware.s_max}, {"gamma", c.hardware.gamma}}},
      {"mode", to_string(c.mode)},
      {"dt_curve", c.dt_curve},
      {"dt_sample", c.dt_sample},
      {"seed", c.seed},
      {"grid", {{"k_max", c.grid.k_max}, {"resolution", c.grid.resolution}}},
      {"projection",
       {{"n_it", p.n_it},
        {"feasibility_tol", p.feasibility_tol},
        {"affine_tol", p.affine_tol},
        {"normalize_time", p.normalize_time},
        {"coarse_to_fine", p.coarse_to_fine},
        {"restore_feasibility", p.restore_feasibility},
        {"polish", p.polish},
        {"polish_gap_tol", p.polish_gap_tol},
        {"stop_when_converged", p.stop_when_converged},
        {"power_iters", p.power_iters}}},
      {"angle_tol_deg", c.angle_tol_deg},
      {"rosette",
       {{"k_max", c.rosette.k_max},
        {"omega1", c.rosette.omega1},
        {"omega2", c.rosette.omega2},
        {"speed_fraction", c.rosette.speed_fraction}}},
      {"spiral",
       {{"k_max", c.spiral.k_max},
        {"revolutions", c.spiral.revolutions},
        {"speed_fraction", c.spiral.speed_fraction}}},
      {"tsp",
       {{"n_cities", c.tsp.n_cities},
        {"speed_fraction", c.tsp.speed_fraction},
        {"density_exponent", c.tsp.density_exponent},
        {"two_opt_passes", c.tsp.two_opt_passes},
        {"start_at_origin", c.tsp.start_at_origin}}},
      {"bench",
       {{"replications", c.bench.replications},
        {"speeds", c.bench.speeds},
        {"mc_cities", c.bench.mc_cities},
        {"mc_iterations", c.bench.mc_iterations},
        {"arm_speed", c.bench.arm_speed}}},
  };
}

std::uint64_t fnv1a64(const std::string& bytes) noexcept {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : bytes) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  return h;
}

// jobs and out_dir are left out: they change where and how fast, not what is computed.
std::string config_hash(const RunConfig& cfg) {
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx",
                static_cast<unsigned long long>(fnv1a64(to_json(cfg).dump())));
  return buf;
}

}  // namespace gradwave::cli
