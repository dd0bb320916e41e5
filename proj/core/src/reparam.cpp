#include "gradwave/reparam.hpp"

#include "gradwave/error.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

namespace gradwave {

SupportPath build_support(const Matrix& polyline, double angle_tol_deg, bool end_at_rest) {
  if (polyline.rows() < 2) throw InvalidArgument("a support path needs at least 2 vertices");
  if (!polyline.allFinite()) throw InvalidArgument("support vertices must be finite");
  if (!(angle_tol_deg >= 0.0)) throw InvalidArgument("angle tolerance must be >= 0");

  const double scale = std::max(1.0, polyline.cwiseAbs().maxCoeff());
  std::vector<Index> keep{0};
  for (Index i = 1; i < polyline.rows(); ++i)
    if ((polyline.row(i) - polyline.row(keep.back())).norm() > 1e-12 * scale) keep.push_back(i);
  if (keep.size() < 2) throw InvalidArgument("support path vertices all coincide");

  SupportPath path;
  const Index n = static_cast<Index>(keep.size());
  path.vertices.resize(n, polyline.cols());
  for (Index i = 0; i < n; ++i) path.vertices.row(i) = polyline.row(keep[static_cast<std::size_t>(i)]);
  path.arclength.assign(static_cast<std::size_t>(n), 0.0);
  path.turning_deg.assign(static_cast<std::size_t>(n), 0.0);
  for (Index i = 1; i < n; ++i)
    path.arclength[static_cast<std::size_t>(i)] =
        path.arclength[static_cast<std::size_t>(i - 1)] +
        (path.vertices.row(i) - path.vertices.row(i - 1)).norm();

  path.singular.push_back(0);
  for (Index i = 1; i + 1 < n; ++i) {
    const Eigen::RowVectorXd a = path.vertices.row(i) - path.vertices.row(i - 1);
    const Eigen::RowVectorXd b = path.vertices.row(i + 1) - path.vertices.row(i);
    const double c = std::clamp(a.dot(b) / (a.norm() * b.norm()), -1.0, 1.0);
    const double deg = std::acos(c) * 180.0 / std::numbers::pi;
    path.turning_deg[static_cast<std::size_t>(i)] = deg;
    if (deg > angle_tol_deg) path.singular.push_back(i);
  }
  if (end_at_rest) path.singular.push_back(n - 1);
  return path;
}

namespace {

// Curvature of the circle through a, b, c: 4 * area / (|ab| |bc| |ca|).
double circumcircle_curvature(const Eigen::RowVectorXd& a, const Eigen::RowVectorXd& b,
                              const Eigen::RowVectorXd& c) {
  const Eigen::RowVectorXd u = b - a, v = c - b, w = c - a;
  const double uu = u.squaredNorm(), vv = v.squaredNorm();
  const double cross_sq = std::max(0.0, uu * vv - std::pow(u.dot(v), 2));
  const double denom = std::sqrt(uu) * std::sqrt(vv) * w.norm();
  if (!(denom > 0.0)) throw InvalidArgument("curvature undefined at a folded-back vertex");
  return 2.0 * std::sqrt(cross_sq) / denom;
}

}  // namespace

ReparamResult time_optimal_reparam(const SupportPath& path, const KinematicLimits& limits,
                                   double dt, const ReparamOptions& options) {
  limits.validate();
  if (!(dt > 0.0)) throw InvalidArgument("dt must be positive");
  const Index nv = path.size();
  if (nv < 2 || static_cast<Index>(path.arclength.size()) != nv)
    throw InvalidArgument("support path is not valid");
  const Index d = path.vertices.cols();
  const double alpha = limits.alpha, beta = limits.beta;
  const double h_target = options.node_spacing ? *options.node_spacing : alpha * dt / 4.0;
  if (!(h_target > 0.0)) throw InvalidArgument("node spacing must be positive");

  std::vector<char> is_singular(static_cast<std::size_t>(nv), 0);
  for (const Index s : path.singular) is_singular[static_cast<std::size_t>(s)] = 1;

  // Per-vertex curvature and speed cap.
  std::vector<double> kappa_v(static_cast<std::size_t>(nv), 0.0);
  std::vector<double> cap_v(static_cast<std::size_t>(nv), std::numeric_limits<double>::infinity());
  std::vector<double> kink_turn(static_cast<std::size_t>(nv), 0.0);  // 2 sin(theta / 2)
  std::vector<double> kink_len(static_cast<std::size_t>(nv), 0.0);
  for (Index i = 1; i + 1 < nv; ++i) {
    const std::size_t is = static_cast<std::size_t>(i);
    if (is_singular[is]) continue;
    const Eigen::RowVectorXd a = path.vertices.row(i - 1), b = path.vertices.row(i),
                             c = path.vertices.row(i + 1);
    kappa_v[is] = circumcircle_curvature(a, b, c);
    // A sampled traversal turns through the whole kink angle within one step of length
    // min(segment, v dt): v^2 * 2 sin(theta/2) / min(l, v dt) <= beta.
    const double s = std::sin(0.5 * path.turning_deg[is] * std::numbers::pi / 180.0);
    if (s > 0.0) {
      const double l = std::min((b - a).norm(), (c - b).norm());
      kink_turn[is] = 2.0 * s;
      kink_len[is] = l;
      const double slow = beta * dt / (2.0 * s);
      cap_v[is] = slow * dt <= l ? slow : std::sqrt(beta * l / (2.0 * s));
    }
  }

  // Profile nodes: every vertex plus at least one interior node per segment.
  std::vector<double> sigma;
  std::vector<Index> seg_of;   // segment holding the node (node sits at its start or inside)
  std::vector<double> frac;    // position inside that segment
  std::vector<Index> vertex;   // vertex index or -1
  for (Index i = 0; i + 1 < nv; ++i) {
    const double len = path.arclength[static_cast<std::size_t>(i + 1)] -
                       path.arclength[static_cast<std::size_t>(i)];
    const Index pieces = std::max<Index>(2, static_cast<Index>(std::ceil(len / h_target)));
    for (Index p = 0; p < pieces; ++p) {
      const double f = static_cast<double>(p) / static_cast<double>(pieces);
      sigma.push_back(path.arclength[static_cast<std::size_t>(i)] + f * len);
      seg_of.push_back(i);
      frac.push_back(f);
      vertex.push_back(p == 0 ? i : -1);
    }
  }
  sigma.push_back(path.length());
  seg_of.push_back(nv - 2);
  frac.push_back(1.0);
  vertex.push_back(nv - 1);
  const std::size_t N = sigma.size();

  std::vector<double> kappa(N), vmax(N);
  for (std::size_t j = 0; j < N; ++j) {
    const Index i = seg_of[j];
    const std::size_t is = static_cast<std::size_t>(i);
    // Curvature interpolated between the segment's end vertices.
    const double k0 = kappa_v[is], k1 = kappa_v[is + 1];
    kappa[j] = (1.0 - frac[j]) * k0 + frac[j] * k1;

    double cap = alpha;
    auto tangent_cap = [&](Index seg) {
      if (limits.mode == NormMode::RIV) return alpha;
      const Eigen::RowVectorXd t = path.vertices.row(seg + 1) - path.vertices.row(seg);
      return alpha * t.norm() / t.cwiseAbs().maxCoeff();
    };
    cap = std::min(cap, tangent_cap(i));
    if (vertex[j] > 0 && vertex[j] < nv - 1) cap = std::min(cap, tangent_cap(vertex[j] - 1));
    if (kappa[j] > 0.0) cap = std::min(cap, std::sqrt(beta / kappa[j]));
    if (vertex[j] >= 0) {
      const std::size_t vs = static_cast<std::size_t>(vertex[j]);
      cap = std::min(cap, cap_v[vs]);
      if (is_singular[vs]) cap = 0.0;
    }
    vmax[j] = cap;
  }

  // Nodes within one step of a non-singular kink feel its normal acceleration as well.
  std::vector<Index> kink_of(N, -1);
  for (std::size_t j = 0; j < N; ++j) {
    const Index i = seg_of[j];
    for (const Index vtx : {i, i + 1}) {
      const std::size_t vs = static_cast<std::size_t>(vtx);
      if (vtx <= 0 || vtx >= nv - 1 || is_singular[vs] || kink_turn[vs] <= 0.0) continue;
      if (std::abs(sigma[j] - path.arclength[vs]) <= alpha * dt) kink_of[j] = vtx;
    }
  }
  auto normal_accel = [&](double speed, std::size_t j) {
    double an = speed * speed * kappa[j];
    if (kink_of[j] >= 0) {
      const std::size_t vs = static_cast<std::size_t>(kink_of[j]);
      const double step = std::min(kink_len[vs], speed * dt);
      if (step > 0.0) an = std::max(an, speed * speed * kink_turn[vs] / step);
    }
    return an;
  };

  auto tangential = [&](double speed, std::size_t j) {
    const double an = normal_accel(speed, j);
    return std::sqrt(std::max(0.0, beta * beta - an * an));
  };
  auto node_point = [&](std::size_t j) -> Eigen::RowVectorXd {
    const Index i = seg_of[j];
    return (1.0 - frac[j]) * path.vertices.row(i) + frac[j] * path.vertices.row(i + 1);
  };

  std::vector<double> v, tau;
  std::vector<double> sample_sigma;
  Matrix pts;
  double T = 0.0;
  auto solve = [&]() {
    v = vmax;
    for (std::size_t j = 0; j + 1 < N; ++j) {
      const double h = sigma[j + 1] - sigma[j];
      const double reach = std::sqrt(v[j] * v[j] + 2.0 * tangential(v[j], j) * h);
      v[j + 1] = std::min(v[j + 1], reach);
    }
    for (std::size_t j = N - 1; j > 0; --j) {
      const double h = sigma[j] - sigma[j - 1];
      const double reach = std::sqrt(v[j] * v[j] + 2.0 * tangential(v[j], j) * h);
      v[j - 1] = std::min(v[j - 1], reach);
    }

    tau.assign(N, 0.0);
    for (std::size_t j = 0; j + 1 < N; ++j) {
      const double h = sigma[j + 1] - sigma[j];
      const double vsum = v[j] + v[j + 1];
      if (!(vsum > 0.0)) throw NumericFailure("speed profile stalls between two rest points");
      tau[j + 1] = tau[j] + 2.0 * h / vsum;
    }
    T = tau.back();
    if (!std::isfinite(T)) throw NumericFailure("reparameterized duration is not finite");

    const Index m = std::max<Index>(1, static_cast<Index>(std::ceil(T / dt - 1e-9)));
    pts.resize(m + 1, d);
    sample_sigma.assign(static_cast<std::size_t>(m + 1), 0.0);
    std::size_t j = 0;
    for (Index s = 0; s <= m; ++s) {
      const double t = std::min(static_cast<double>(s) * dt, T);
      while (j + 2 < N && tau[j + 1] <= t) ++j;
      const double h = sigma[j + 1] - sigma[j];
      const double acc = (v[j + 1] * v[j + 1] - v[j] * v[j]) / (2.0 * h);
      const double dtau = t - tau[j];
      double ds = v[j] * dtau + 0.5 * acc * dtau * dtau;
      ds = std::clamp(ds, 0.0, h);
      const double f = ds / h;
      pts.row(s) = (1.0 - f) * node_point(j) + f * node_point(j + 1);
      sample_sigma[static_cast<std::size_t>(s)] = sigma[j] + ds;
    }
    pts.row(m) = path.vertices.row(nv - 1);
    sample_sigma.back() = path.length();
  };

  // The profile bounds the continuous motion; the samples can still overshoot where a step
  // spans several short segments. Lower the caps under each offending sample and resolve.
  auto lower = [&](double lo, double hi, double factor) {
    const auto first = std::lower_bound(sigma.begin(), sigma.end(), lo);
    for (auto it = first; it != sigma.end() && *it <= hi; ++it) {
      const std::size_t j = static_cast<std::size_t>(it - sigma.begin());
      vmax[j] = std::min(vmax[j], v[j] * factor);
    }
  };
  const int refinements = 40;
  for (int pass = 0;; ++pass) {
    solve();
    if (pass == refinements) break;
    const Matrix vel = first_difference(pts, dt);
    const Matrix acc = second_difference(pts, dt);
    bool clean = true;
    const Index m = pts.rows() - 1;
    for (Index s = 1; s <= m; ++s) {
      const double speed = series_norm(vel.row(s), limits.mode);
      const double a = series_norm(acc.row(s), limits.mode);
      const std::size_t ss = static_cast<std::size_t>(s);
      if (speed > alpha * (1.0 + 1e-3)) {
        clean = false;
        lower(sample_sigma[ss - 1], sample_sigma[ss], 0.998 * alpha / speed);
      }
      if (a > beta * (1.0 + 1e-3) && s < m) {
        clean = false;
        lower(sample_sigma[ss - 1], sample_sigma[ss + 1], 0.998 * std::sqrt(beta / a));
      }
    }
    if (clean) break;
  }

  ReparamResult out(DiscreteCurve(std::move(pts), dt));
  out.duration = T;
  out.sigma = std::move(sigma);
  out.speed = std::move(v);
  return out;
}

TraversalReport compare_traversal(const DiscreteCurve& input, const KinematicLimits& limits,
                                  const TraversalOptions& options) {
  limits.validate();
  const Matrix& support = options.support ? *options.support : input.points();
  const SupportPath path = build_support(support, options.angle_tol_deg, options.end_at_rest);

  TraversalReport rep;
  rep.t_input = input.duration();
  rep.reparam = time_optimal_reparam(path, limits, input.dt(), options.reparam);
  rep.t_rep = rep.reparam->duration;

  if (options.affine)
    rep.projection = project_curve(input, limits, *options.affine, options.projection);
  else
    rep.projection = project_curve(input, limits, options.projection);
  rep.t_projection = rep.projection->curve.duration();
  rep.ratio = rep.t_rep / rep.t_projection;

  if (input.dim() == 2) {
    const double sdt = options.sample_dt ? *options.sample_dt : input.dt();
    const EmpiricalHistogram h_in = empirical_histogram(sample_at_rate(input, sdt), options.grid);
    const TargetDensity target =
        options.target ? *options.target
                       : TargetDensity::from_values(options.grid, h_in.counts.cast<double>());
    rep.rel_error_input = relative_error(h_in, target);
    rep.rel_error_projection = relative_error(
        empirical_histogram(sample_at_rate(rep.projection->curve, sdt), options.grid), target);
    rep.rel_error_reparam = relative_error(
        empirical_histogram(sample_at_rate(rep.reparam->curve, sdt), options.grid), target);
  }
  return rep;
}

}  // namespace gradwave
