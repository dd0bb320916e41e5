#pragma once

#include "gradwave/constraints.hpp"
#include "gradwave/curve.hpp"
#include "gradwave/density.hpp"

#include <filesystem>
#include <string>
#include <vector>

namespace gradwave::io {

/// Reads `t_ms,kx[,ky[,kz]]`. Rejects ragged rows, non-numeric cells and time stamps whose
/// spacing deviates from uniform by more than 1e-9 relative. Throws ParseError.
DiscreteCurve read_curve_csv(const std::filesystem::path& path);
DiscreteCurve parse_curve_csv(const std::string& text);
std::string format_curve_csv(const DiscreteCurve& curve);

/// `t_ms,gx_mT_m,gy_mT_m[,gz_mT_m]` with g = velocity / gamma.
std::string format_gradient_csv(const DiscreteCurve& curve, double gamma);

/// `kx,ky,value`, one row per bin, ky varying slowest. Values are densities (per cm^-2).
std::string format_grid_csv(const DensityGrid& grid, const GridArray& values);
TargetDensity read_density_csv(const std::filesystem::path& path);
TargetDensity parse_density_csv(const std::string& text);

/// `sigma,v` speed profile.
std::string format_profile_csv(const std::vector<double>& sigma, const std::vector<double>& v);

/// Constraint document: either a list or {"constraints": [...]} of objects
///   {"type": "point", "index": i | "t_ms": t | "at": "start"|"end", "position": [..]}
///   {"type": "multishot", "tr_ms": TR}
///   {"type": "initial_speed"}
///   {"type": "moment", "order": k}
/// Indices are 0-based. Throws ParseError on malformed documents.
AffineConstraintSet parse_constraints_json(const std::string& text, Index n, Index d, double dt);
AffineConstraintSet read_constraints_json(const std::filesystem::path& path, Index n, Index d,
                                          double dt);

/// {"g_max": .., "s_max": .., "gamma": ..}; missing keys keep the defaults.
HardwareSpec parse_hardware_json(const std::string& text);
HardwareSpec read_hardware_json(const std::filesystem::path& path);

std::string read_text(const std::filesystem::path& path);
/// Writes to a temporary file in the same directory and renames it into place.
void write_text_atomic(const std::filesystem::path& path, const std::string& content);

/// Shortest text that parses back to the same double.
std::string format_double(double x);

}  // namespace gradwave::io
