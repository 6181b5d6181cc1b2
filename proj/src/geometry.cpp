#include "limitlab/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <set>

#include "limitlab/errors.hpp"

namespace limitlab {

namespace {
constexpr double kPi = std::numbers::pi;
}

void DomainSpec::validate() const {
  if (!(eps > 0.0 && eps < 1.0)) throw GeometryError("DomainSpec: eps must be in (0,1)");
  if (!(delta > 1.0)) throw GeometryError("DomainSpec: delta must be > 1");
  if (!(beta > 0.0 && beta < 0.25)) throw GeometryError("DomainSpec: beta must be in (0, 1/4)");
  if (!(r_obs > 0.0)) throw GeometryError("DomainSpec: r_obs must be > 0");
  if (amp < 0.0) throw GeometryError("DomainSpec: amp must be >= 0");
  if (amp * rugosity_scale() >= 0.5)
    throw GeometryError("DomainSpec: oscillation amplitude too large, obstacle curve degenerates");
  if (!(outer_radius() > r_obs * (1.0 + amp * rugosity_scale()) * 1.25))
    throw GeometryError("DomainSpec: outer boundary too close to the obstacle");
  if (nr < 2 || nphi < 8) throw GeometryError("DomainSpec: resolution too coarse");
}

double DomainSpec::rugosity_scale() const { return std::pow(eps, 2.0 * beta); }

int DomainSpec::oscillation_wavenumber() const {
  return std::max(1, static_cast<int>(std::lround(freq / rugosity_scale())));
}

double DomainSpec::inner_radius(double phi) const {
  if (amp == 0.0) return r_obs;
  const int m = oscillation_wavenumber();
  return r_obs * (1.0 + rugosity_scale() * amp * std::sin(m * phi));
}

double DomainSpec::inner_radius_deriv(double phi) const {
  if (amp == 0.0) return 0.0;
  const int m = oscillation_wavenumber();
  return r_obs * rugosity_scale() * amp * m * std::cos(m * phi);
}

double DomainSpec::outer_radius() const {
  const double full = std::pow(eps, -delta);
  return cap_radius > 0.0 ? std::min(full, cap_radius) : full;
}

bool DomainSpec::contains(const Eigen::Vector2d& x) const {
  const double r = x.norm();
  if (r >= outer_radius()) return false;
  const double phi = std::atan2(x.y(), x.x());
  return r > inner_radius(phi);
}

double DomainSpec::obstacle_distance(const Eigen::Vector2d& x) const {
  // Sample the curve finely, then refine by ternary search around the best
  // arc. Adequate for the admissibility reports; not a hot path.
  const int m = oscillation_wavenumber();
  const int n = std::max(512, 64 * m);
  double best = 1e300;
  double best_phi = 0.0;
  for (int k = 0; k < n; ++k) {
    const double phi = 2.0 * kPi * k / n;
    const double r = inner_radius(phi);
    const Eigen::Vector2d p(r * std::cos(phi), r * std::sin(phi));
    const double d = (x - p).squaredNorm();
    if (d < best) {
      best = d;
      best_phi = phi;
    }
  }
  double lo = best_phi - 2.0 * kPi / n, hi = best_phi + 2.0 * kPi / n;
  auto dist2 = [&](double phi) {
    const double r = inner_radius(phi);
    const Eigen::Vector2d p(r * std::cos(phi), r * std::sin(phi));
    return (x - p).squaredNorm();
  };
  for (int it = 0; it < 60; ++it) {
    const double a = lo + (hi - lo) / 3.0, b = hi - (hi - lo) / 3.0;
    if (dist2(a) < dist2(b))
      hi = b;
    else
      lo = a;
  }
  const double d = std::sqrt(dist2(0.5 * (lo + hi)));
  const double phi_x = std::atan2(x.y(), x.x());
  return x.norm() > inner_radius(phi_x) ? d : -d;
}

Mesh build_domain(const DomainSpec& spec) {
  spec.validate();
  const double r_out = spec.outer_radius();

  StructuredBuild b;
  b.ni = spec.nr;
  b.nj = spec.nphi;
  b.periodic_j = true;
  b.tag_i_lo = BoundaryTag::Obstacle;
  b.tag_i_hi = BoundaryTag::Outer;

  auto radial = [&](double s, double r_in) {
    if (spec.grading == RadialGrading::Uniform) return r_in + s * (r_out - r_in);
    return r_in * std::pow(r_out / r_in, s);
  };
  Mesh mesh = build_structured(b, [&](int i, int j) {
    const double phi = 2.0 * kPi * j / spec.nphi;
    const double r = radial(static_cast<double>(i) / spec.nr, spec.inner_radius(phi));
    return Eigen::Vector2d(r * std::cos(phi), r * std::sin(phi));
  });
  return mesh;
}

ConeReport check_cone_condition(const DomainSpec& spec, double alpha_cone,
                                double gamma_aperture) {
  const int n_boundary = 64;
  const int n_dirs = 48;
  const int n_near = 12;     // fluid points near each boundary point
  const int n_cone_r = 6;
  const int n_cone_a = 7;

  auto in_fluid = [&](const Eigen::Vector2d& p) { return spec.contains(p); };

  auto cone_ok = [&](const Eigen::Vector2d& x, const Eigen::Vector2d& xi, double alpha) {
    for (int ir = 1; ir <= n_cone_r; ++ir) {
      const double rho = alpha * ir / n_cone_r;
      for (int ia = 0; ia < n_cone_a; ++ia) {
        const double ang = -gamma_aperture + 2.0 * gamma_aperture * ia / (n_cone_a - 1);
        const Eigen::Vector2d dir(std::cos(ang) * xi.x() - std::sin(ang) * xi.y(),
                                  std::sin(ang) * xi.x() + std::cos(ang) * xi.y());
        if (!in_fluid(x + rho * dir)) return false;
      }
    }
    return true;
  };

  ConeReport rep{alpha_cone, gamma_aperture, 1e300, Eigen::Vector2d::Zero(), true};
  for (int k = 0; k < n_boundary; ++k) {
    const double phi = 2.0 * kPi * k / n_boundary;
    const double r0 = spec.inner_radius(phi);
    const Eigen::Vector2d x0(r0 * std::cos(phi), r0 * std::sin(phi));

    // fluid sample points within distance alpha of x0
    std::vector<Eigen::Vector2d> near;
    for (int a = 0; a < n_near; ++a) {
      const double ang = 2.0 * kPi * a / n_near;
      for (double frac : {0.15, 0.5, 0.95}) {
        const Eigen::Vector2d p =
            x0 + alpha_cone * frac * Eigen::Vector2d(std::cos(ang), std::sin(ang));
        if (in_fluid(p)) near.push_back(p);
      }
    }

    double best_alpha = 0.0;
    for (int d = 0; d < n_dirs; ++d) {
      const double ang = 2.0 * kPi * d / n_dirs;
      const Eigen::Vector2d xi(std::cos(ang), std::sin(ang));
      // admissible height for this orientation: all nearby points pass
      double alpha_ok = 0.0;
      for (double frac : {0.25, 0.5, 0.75, 1.0}) {
        const double alpha = alpha_cone * frac;
        bool ok = true;
        for (const auto& p : near)
          if (!cone_ok(p, xi, alpha)) {
            ok = false;
            break;
          }
        if (ok)
          alpha_ok = alpha;
        else
          break;
      }
      best_alpha = std::max(best_alpha, alpha_ok);
      if (best_alpha == alpha_cone) break;
    }
    if (best_alpha < rep.worst_alpha) {
      rep.worst_alpha = best_alpha;
      rep.worst_point = x0;
    }
  }
  rep.passed = rep.worst_alpha >= alpha_cone * (1.0 - 1e-12);
  return rep;
}

BallReport check_ball_condition(const DomainSpec& spec, double c_b) {
  const int n_boundary = 96;
  BallReport rep{};
  rep.c_b = c_b;
  rep.required_radius = c_b * std::pow(spec.eps, spec.beta);
  rep.min_interior_radius = 1e300;
  rep.min_exterior_radius = 1e300;

  const double r_out = spec.outer_radius();
  auto largest_tangent_ball = [&](const Eigen::Vector2d& x0, const Eigen::Vector2d& n,
                                  bool interior) {
    // largest rho with B(x0 + rho n, rho) inside the fluid (or the obstacle)
    double lo = 0.0, hi = interior ? 0.45 * (r_out - x0.norm()) : 0.9 * x0.norm();
    for (int it = 0; it < 40; ++it) {
      const double rho = 0.5 * (lo + hi);
      const Eigen::Vector2d c = x0 + rho * n;
      const double d = spec.obstacle_distance(c);
      bool ok;
      if (interior)
        ok = d >= rho * (1.0 - 1e-9) && c.norm() + rho <= r_out;
      else
        ok = -d >= rho * (1.0 - 1e-9);
      if (ok)
        lo = rho;
      else
        hi = rho;
    }
    return lo;
  };

  for (int k = 0; k < n_boundary; ++k) {
    const double phi = 2.0 * kPi * k / n_boundary;
    const double r0 = spec.inner_radius(phi);
    const double dr = spec.inner_radius_deriv(phi);
    const Eigen::Vector2d x0(r0 * std::cos(phi), r0 * std::sin(phi));
    // outward normal of the curve r(phi): (r' e_phi? ) tangent t = dr e_r + r e_phi
    const Eigen::Vector2d e_r(std::cos(phi), std::sin(phi));
    const Eigen::Vector2d e_phi(-std::sin(phi), std::cos(phi));
    Eigen::Vector2d t = dr * e_r + r0 * e_phi;
    t.normalize();
    Eigen::Vector2d n(t.y(), -t.x());  // rotate -90deg: points outward for CCW curve
    if (n.dot(e_r) < 0.0) n = -n;

    rep.min_interior_radius =
        std::min(rep.min_interior_radius, largest_tangent_ball(x0, n, true));
    rep.min_exterior_radius =
        std::min(rep.min_exterior_radius, largest_tangent_ball(x0, -n, false));
  }
  rep.passed = rep.min_interior_radius >= rep.required_radius &&
               rep.min_exterior_radius >= rep.required_radius;
  return rep;
}

BoundaryGraphReport boundary_graph_report(const std::vector<DomainSpec>& specs) {
  if (specs.size() < 2)
    throw std::invalid_argument("boundary_graph_report: need at least two specs");
  for (const auto& s : specs)
    if (s.r_obs != specs[0].r_obs || s.amp != specs[0].amp || s.freq != specs[0].freq)
      throw std::invalid_argument("boundary_graph_report: specs must share the base profile");

  BoundaryGraphReport rep{};
  const int n = 4096;
  for (const auto& s : specs) {
    rep.eps.push_back(s.eps);
    double sup = 0.0, lip = 0.0, smin = 1e300, smax = -1e300;
    for (int k = 0; k < n; ++k) {
      const double phi = 2.0 * kPi * k / n;
      sup = std::max(sup, std::abs(s.inner_radius(phi) - s.r_obs));
      // slope of the deviation graph wrt base arc length s = r_obs phi
      const double slope = s.inner_radius_deriv(phi) / s.r_obs;
      lip = std::max(lip, std::abs(slope));
      smin = std::min(smin, slope);
      smax = std::max(smax, slope);
    }
    rep.sup_distance.push_back(sup);
    rep.lipschitz_bound.push_back(lip);
    rep.slope_min.push_back(smin);
    rep.slope_max.push_back(smax);
  }
  // distinct slope values over the finest-eps profile
  const auto& fine = specs.back();
  std::set<long long> distinct;
  for (int k = 0; k < 257; ++k) {
    const double phi = 2.0 * kPi * k / 257.0;
    distinct.insert(std::llround(1e6 * fine.inner_radius_deriv(phi) / fine.r_obs));
  }
  rep.distinct_slope_values = static_cast<int>(distinct.size());
  rep.young_condition_degenerate = true;
  return rep;
}

double domain_area_within(const Mesh& mesh, double radius) {
  double a = 0.0;
  for (int c = 0; c < mesh.n_cells(); ++c)
    if (mesh.cell_center.col(c).norm() <= radius) a += mesh.cell_volume[c];
  return a;
}

double domain_area_within_exact(const DomainSpec& spec, double radius) {
  const double r_cap = std::min(radius, spec.outer_radius());
  const int n = std::max(4096, 128 * spec.oscillation_wavenumber());
  double a = 0.0;
  for (int k = 0; k < n; ++k) {
    const double phi = 2.0 * kPi * (k + 0.5) / n;
    const double r_in = std::min(spec.inner_radius(phi), r_cap);
    a += 0.5 * (r_cap * r_cap - r_in * r_in);
  }
  return a * 2.0 * kPi / n;
}

}  // namespace limitlab
