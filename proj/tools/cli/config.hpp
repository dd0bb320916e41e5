#pragma once

#include <gradwave/constraints.hpp>
#include <gradwave/density.hpp>
#include <gradwave/projector.hpp>

#include <json.hpp>

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace gradwave::cli {

struct RosetteOptions {
  double k_max = 6.0;
  double omega1 = 1.419;
  double omega2 = 0.8233;
  double speed_fraction = 0.9;
};

struct SpiralOptions {
  double k_max = 6.0;
  int revolutions = 100;
  double speed_fraction = 0.5;
};

struct TspOptions {
  Index n_cities = 2000;
  double speed_fraction = 0.5;
  /// Target density (1 - |k|/k_max)^exponent; cities are drawn from its square.
  double density_exponent = 1.0;
  int two_opt_passes = 50;
  bool start_at_origin = true;
};

struct BenchOptions {
  int replications = 200;
  std::vector<double> speeds{0.1, 0.5, 1.0};
  /// Cities per replication in mc_density (the single-curve tsp bench uses tsp.n_cities).
  Index mc_cities = 300;
  /// Iteration cap used for every projection in mc_density.
  int mc_iterations = 200;
  /// Speed fraction of the input the reparameterization and arc-length arms start from.
  double arm_speed = 0.5;
};

/// Everything a run depends on. Precedence: command-line flags > config file > defaults.
struct RunConfig {
  HardwareSpec hardware;
  NormMode mode = NormMode::RIV;
  double dt_curve = 0.004;   // ms
  double dt_sample = 0.004;  // ms, histogram sampling step
  std::uint64_t seed = 1;
  int jobs = 1;
  std::filesystem::path out_dir = ".";
  DensityGrid grid{6.0, 64};
  ProjectionSettings projection;
  double angle_tol_deg = 5.0;
  RosetteOptions rosette;
  SpiralOptions spiral;
  TspOptions tsp;
  BenchOptions bench;

  KinematicLimits limits() const { return limits_from_hardware(hardware, mode); }
  void validate() const;
};

/// Overlays the keys present in `doc` on `cfg`. Unknown keys are rejected (ParseError).
void apply_config_json(RunConfig& cfg, const nlohmann::json& doc);
RunConfig load_config(const std::filesystem::path& path, RunConfig base = {});

nlohmann::json to_json(const RunConfig& cfg);

/// FNV-1a 64 of the canonical (sorted-key) JSON dump.
std::uint64_t fnv1a64(const std::string& bytes) noexcept;
std::string config_hash(const RunConfig& cfg);

}  // namespace gradwave::cli
