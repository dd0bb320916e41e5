#include "gradwave/io.hpp"

#include "gradwave/error.hpp"

#include <json.hpp>

#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <random>
#include <sstream>
#include <system_error>
#include <unistd.h>

namespace gradwave::io {

namespace fs = std::filesystem;
using nlohmann::json;

std::string format_double(double x) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), x);
  return std::string(buf, res.ptr);
}

std::string read_text(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot open '" + path.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text_atomic(const fs::path& path, const std::string& content) {
  const fs::path dir = path.has_parent_path() ? path.parent_path() : fs::path(".");
  std::error_code ec;
  fs::create_directories(dir, ec);
  const fs::path tmp =
      dir / ("." + path.filename().string() + ".tmp" + std::to_string(::getpid()));
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw InvalidArgument("cannot write '" + tmp.string() + "'");
    out << content;
    out.flush();
    if (!out) {
      fs::remove(tmp, ec);
      throw InvalidArgument("failed writing '" + tmp.string() + "'");
    }
  }
  fs::rename(tmp, path, ec);
  if (ec) {
    fs::remove(tmp, ec);
    throw InvalidArgument("cannot move output into place at '" + path.string() + "'");
  }
}

namespace {

std::string trim(std::string s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return s.substr(first, last - first + 1);
}

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> cells;
  std::string cell;
  std::istringstream ss(line);
  while (std::getline(ss, cell, ',')) cells.push_back(trim(cell));
  if (!line.empty() && line.back() == ',') cells.emplace_back();
  return cells;
}

double parse_number(const std::string& cell, std::size_t line_no) {
  double v = 0.0;
  const char* first = cell.data();
  const char* last = cell.data() + cell.size();
  if (!cell.empty() && *first == '+') ++first;
  const auto res = std::from_chars(first, last, v);
  if (cell.empty() || res.ec != std::errc() || res.ptr != last || !std::isfinite(v))
    throw ParseError("line " + std::to_string(line_no) + ": '" + cell + "' is not a finite number");
  return v;
}

// Non-empty lines after the header, split into cells.
std::vector<std::vector<std::string>> read_rows(const std::string& text,
                                                std::vector<std::string>& header) {
  std::istringstream in(text);
  std::string line;
  std::vector<std::vector<std::string>> rows;
  std::size_t line_no = 0;
  bool have_header = false;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    if (!have_header) {
      header = split_csv(trim(line));
      have_header = true;
      continue;
    }
    rows.push_back(split_csv(trim(line)));
    if (rows.back().size() != header.size())
      throw ParseError("line " + std::to_string(line_no) + ": expected " +
                       std::to_string(header.size()) + " columns");
  }
  if (!have_header) throw ParseError("empty CSV document");
  return rows;
}

}  // namespace

DiscreteCurve parse_curve_csv(const std::string& text) {
  std::vector<std::string> header;
  const auto rows = read_rows(text, header);
  static const char* names[] = {"t_ms", "kx", "ky", "kz"};
  if (header.size() < 2 || header.size() > 4)
    throw ParseError("curve CSV header must be t_ms,kx[,ky[,kz]]");
  for (std::size_t j = 0; j < header.size(); ++j)
    if (header[j] != names[j])
      throw ParseError("curve CSV column " + std::to_string(j + 1) + " must be '" + names[j] + "'");
  if (rows.size() < 2) throw ParseError("curve CSV needs at least 2 rows");

  const Index n = static_cast<Index>(rows.size());
  const Index d = static_cast<Index>(header.size()) - 1;
  std::vector<double> t(static_cast<std::size_t>(n));
  Matrix pts(n, d);
  for (Index i = 0; i < n; ++i) {
    const auto& r = rows[static_cast<std::size_t>(i)];
    t[static_cast<std::size_t>(i)] = parse_number(r[0], static_cast<std::size_t>(i) + 2);
    for (Index k = 0; k < d; ++k)
      pts(i, k) = parse_number(r[static_cast<std::size_t>(k) + 1], static_cast<std::size_t>(i) + 2);
  }
  const double dt = (t.back() - t.front()) / static_cast<double>(n - 1);
  if (!(dt > 0.0)) throw ParseError("curve time stamps must be increasing");
  for (Index i = 1; i < n; ++i) {
    const double step = t[static_cast<std::size_t>(i)] - t[static_cast<std::size_t>(i - 1)];
    const double slack = 4.0 * std::numeric_limits<double>::epsilon() * std::abs(t[static_cast<std::size_t>(i)]);
    if (std::abs(step - dt) > 1e-9 * dt + slack)
      throw ParseError("curve time stamps are not uniformly spaced (row " + std::to_string(i + 2) +
                       ")");
  }
  return DiscreteCurve(std::move(pts), dt);
}

DiscreteCurve read_curve_csv(const fs::path& path) { return parse_curve_csv(read_text(path)); }

std::string format_curve_csv(const DiscreteCurve& curve) {
  static const char* names[] = {"kx", "ky", "kz"};
  std::string out = "t_ms";
  for (Index k = 0; k < curve.dim(); ++k)
    out += std::string(",") + (k < 3 ? names[k] : ("k" + std::to_string(k)).c_str());
  out += '\n';
  for (Index i = 0; i < curve.size(); ++i) {
    out += format_double(static_cast<double>(i) * curve.dt());
    for (Index k = 0; k < curve.dim(); ++k) out += "," + format_double(curve.points()(i, k));
    out += '\n';
  }
  return out;
}

std::string format_gradient_csv(const DiscreteCurve& curve, double gamma) {
  static const char* names[] = {"gx_mT_m", "gy_mT_m", "gz_mT_m"};
  const Matrix g = gradient_waveform(curve, gamma);
  std::string out = "t_ms";
  for (Index k = 0; k < curve.dim(); ++k)
    out += std::string(",") + (k < 3 ? std::string(names[k]) : "g" + std::to_string(k) + "_mT_m");
  out += '\n';
  for (Index i = 0; i < curve.size(); ++i) {
    out += format_double(static_cast<double>(i) * curve.dt());
    for (Index k = 0; k < curve.dim(); ++k) out += "," + format_double(g(i, k));
    out += '\n';
  }
  return out;
}

std::string format_grid_csv(const DensityGrid& grid, const GridArray& values) {
  std::string out = "kx,ky,value\n";
  for (Index iy = 0; iy < grid.resolution; ++iy)
    for (Index ix = 0; ix < grid.resolution; ++ix)
      out += format_double(grid.center(ix)) + "," + format_double(grid.center(iy)) + "," +
             format_double(values(iy, ix)) + "\n";
  return out;
}

TargetDensity parse_density_csv(const std::string& text) {
  std::vector<std::string> header;
  const auto rows = read_rows(text, header);
  if (header != std::vector<std::string>{"kx", "ky", "value"})
    throw ParseError("density CSV header must be kx,ky,value");
  const std::size_t m = rows.size();
  const Index res = static_cast<Index>(std::llround(std::sqrt(static_cast<double>(m))));
  if (res < 1 || static_cast<std::size_t>(res * res) != m)
    throw ParseError("density CSV must hold a square grid");
  std::vector<double> kx(m), ky(m), val(m);
  for (std::size_t i = 0; i < m; ++i) {
    kx[i] = parse_number(rows[i][0], i + 2);
    ky[i] = parse_number(rows[i][1], i + 2);
    val[i] = parse_number(rows[i][2], i + 2);
  }
  const double w = res > 1 ? kx[1] - kx[0] : 0.0;
  const double k_max = res > 1 ? 0.5 * w * static_cast<double>(res) : std::abs(kx[0]) * 2.0;
  if (!(k_max > 0.0)) throw ParseError("density CSV grid spacing is not positive");
  const DensityGrid grid{k_max, res};
  GridArray values(res, res);
  const double tol = 1e-6 * grid.cell_width();
  for (Index iy = 0; iy < res; ++iy)
    for (Index ix = 0; ix < res; ++ix) {
      const std::size_t i = static_cast<std::size_t>(iy * res + ix);
      if (std::abs(kx[i] - grid.center(ix)) > tol || std::abs(ky[i] - grid.center(iy)) > tol)
        throw ParseError("density CSV row " + std::to_string(i + 2) +
                         " is not on a centered square grid (kx inner, ky outer)");
      values(iy, ix) = val[i];
    }
  try {
    return TargetDensity::from_values(grid, std::move(values));
  } catch (const InvalidArgument& e) {
    throw ParseError(std::string("density CSV: ") + e.what());
  }
}

TargetDensity read_density_csv(const fs::path& path) { return parse_density_csv(read_text(path)); }

std::string format_profile_csv(const std::vector<double>& sigma, const std::vector<double>& v) {
  if (sigma.size() != v.size()) throw InvalidArgument("profile arrays differ in length");
  std::string out = "sigma,v\n";
  for (std::size_t i = 0; i < sigma.size(); ++i)
    out += format_double(sigma[i]) + "," + format_double(v[i]) + "\n";
  return out;
}

namespace {

json parse_json(const std::string& text, const char* what) {
  try {
    return json::parse(text);
  } catch (const json::exception& e) {
    throw ParseError(std::string(what) + ": " + e.what());
  }
}

template <class T>
T get_field(const json& obj, const char* key, const std::string& ctx) {
  try {
    return obj.at(key).get<T>();
  } catch (const json::exception&) {
    throw ParseError(ctx + ": missing or invalid '" + key + "'");
  }
}

}  // namespace

AffineConstraintSet parse_constraints_json(const std::string& text, Index n, Index d, double dt) {
  const json doc = parse_json(text, "constraints JSON");
  const json* list = &doc;
  if (doc.is_object()) {
    if (!doc.contains("constraints")) throw ParseError("constraints JSON needs a 'constraints' list");
    list = &doc["constraints"];
  }
  if (!list->is_array()) throw ParseError("constraints JSON must be a list");

  AffineConstraintSet set(n, d, dt);
  std::size_t idx = 0;
  for (const json& item : *list) {
    const std::string ctx = "constraint #" + std::to_string(idx++);
    if (!item.is_object()) throw ParseError(ctx + " must be an object");
    const auto type = get_field<std::string>(item, "type", ctx);
    if (type == "point") {
      Index at = 0;
      if (item.contains("index")) {
        at = get_field<Index>(item, "index", ctx);
      } else if (item.contains("t_ms")) {
        const double t = get_field<double>(item, "t_ms", ctx);
        const double pos = t / dt;
        if (std::abs(pos - std::round(pos)) > 1e-9 * std::max(1.0, pos))
          throw InvalidArgument(ctx + ": t_ms is not on the time grid");
        at = static_cast<Index>(std::llround(pos));
      } else if (item.contains("at")) {
        const auto where = get_field<std::string>(item, "at", ctx);
        if (where == "start") at = 0;
        else if (where == "end") at = n - 1;
        else throw ParseError(ctx + ": 'at' must be 'start' or 'end'");
      } else {
        throw ParseError(ctx + ": point constraint needs 'index', 't_ms' or 'at'");
      }
      const auto p = get_field<std::vector<double>>(item, "position", ctx);
      if (static_cast<Index>(p.size()) != d)
        throw ParseError(ctx + ": position must have " + std::to_string(d) + " entries");
      set.add_point_constraint(at, Eigen::Map<const Eigen::VectorXd>(p.data(), d));
    } else if (type == "multishot") {
      set.add_multishot_constraints(get_field<double>(item, "tr_ms", ctx));
    } else if (type == "initial_speed") {
      set.add_initial_speed_zero();
    } else if (type == "moment") {
      set.add_moment_nulling(get_field<int>(item, "order", ctx));
    } else {
      throw ParseError(ctx + ": unknown type '" + type + "'");
    }
  }
  return set;
}

AffineConstraintSet read_constraints_json(const fs::path& path, Index n, Index d, double dt) {
  return parse_constraints_json(read_text(path), n, d, dt);
}

HardwareSpec parse_hardware_json(const std::string& text) {
  const json doc = parse_json(text, "hardware JSON");
  if (!doc.is_object()) throw ParseError("hardware JSON must be an object");
  HardwareSpec hw;
  const std::string ctx = "hardware JSON";
  if (doc.contains("g_max")) hw.g_max = get_field<double>(doc, "g_max", ctx);
  if (doc.contains("s_max")) hw.s_max = get_field<double>(doc, "s_max", ctx);
  if (doc.contains("gamma")) hw.gamma = get_field<double>(doc, "gamma", ctx);
  hw.validate();
  return hw;
}

HardwareSpec read_hardware_json(const fs::path& path) { return parse_hardware_json(read_text(path)); }

}  // namespace gradwave::io
