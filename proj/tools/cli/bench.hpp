#pragma once

#include "config.hpp"

#include <gradwave/density.hpp>
#include <gradwave/reparam.hpp>

#include <json.hpp>

#include <string>
#include <vector>

namespace gradwave::cli {

struct TraversalSummary {
  std::string mode;
  double t_input = 0.0;
  double t_projection = 0.0;
  double t_rep = 0.0;
  double ratio = 0.0;
  double rel_error_input = 0.0;
  double rel_error_projection = 0.0;
  double rel_error_reparam = 0.0;
  FeasibilityReport projection_residuals;
  FeasibilityReport reparam_residuals;
  bool converged = false;
  int iterations = 0;
  int newton_steps = 0;
  double distance_normalized = 0.0;
  double wall_s = 0.0;
};

struct RosetteBench {
  Index n = 0;
  std::vector<TraversalSummary> modes;  // RIV, RV
  std::vector<TraversalReport> reports;
  DiscreteCurve input{Matrix::Zero(2, 2), 1.0};
};

struct TspBench {
  Index n = 0;
  double tour_length = 0.0;
  TraversalSummary summary;
  TraversalReport report;
  DiscreteCurve input{Matrix::Zero(2, 2), 1.0};
};

struct McArm {
  std::string name;
  double speed_fraction = 0.0;  // 0 for the reparameterization arm
  double rel_error = 0.0;
  double mean_duration = 0.0;
  double mean_distance_normalized = 0.0;
  int unconverged = 0;
  EmpiricalHistogram hist{DensityGrid{}};
};

struct McDensity {
  int replications = 0;
  Index cities = 0;
  double mean_tour_length = 0.0;
  TargetDensity target;
  std::vector<McArm> projection;  // one per speed fraction, in configured order
  McArm reparam;
  McArm input;
  double wall_s = 0.0;
};

RosetteBench run_rosette_bench(const RunConfig& cfg);
TspBench run_tsp_bench(const RunConfig& cfg);
McDensity run_mc_density(const RunConfig& cfg);

nlohmann::json to_json(const TraversalSummary& s);
nlohmann::json to_json(const FeasibilityReport& r);
nlohmann::json to_json(const McDensity& m);

}  // namespace gradwave::cli
