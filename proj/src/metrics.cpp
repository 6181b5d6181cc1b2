#include "limitlab/metrics.hpp"

#include <cmath>

#include "limitlab/errors.hpp"

namespace limitlab {

namespace {
constexpr double kTwoPi = 6.28318530717958648;
}

KGrid make_kgrid(const KRegion& region) {
  if (!(region.r1 > region.r0) || region.nr < 1 || region.nphi < 4)
    throw std::invalid_argument("make_kgrid: malformed K region");
  KGrid g;
  g.region = region;
  const int n = region.nr * region.nphi;
  g.center.resize(2, n);
  g.volume.resize(n);
  const double dr = (region.r1 - region.r0) / region.nr;
  const double dphi = kTwoPi / region.nphi;
  int c = 0;
  for (int i = 0; i < region.nr; ++i) {
    const double ra = region.r0 + i * dr, rb = ra + dr;
    for (int j = 0; j < region.nphi; ++j, ++c) {
      const double phi = (j + 0.5) * dphi;
      const double rm = 0.5 * (ra + rb);
      g.center.col(c) = Eigen::Vector2d(rm * std::cos(phi), rm * std::sin(phi));
      g.volume[c] = 0.5 * (rb * rb - ra * ra) * dphi;
    }
  }
  return g;
}

int locate_cell(const DomainSpec& spec, const Eigen::Vector2d& x) {
  const double r = x.norm();
  double phi = std::atan2(x.y(), x.x());
  if (phi < 0.0) phi += kTwoPi;
  const double r_in = spec.inner_radius(phi);
  const double r_out = spec.outer_radius();
  if (r <= r_in || r >= r_out) return -1;
  double s;
  if (spec.grading == RadialGrading::Uniform)
    s = (r - r_in) / (r_out - r_in);
  else
    s = std::log(r / r_in) / std::log(r_out / r_in);
  int i = static_cast<int>(s * spec.nr);
  i = std::min(std::max(i, 0), spec.nr - 1);
  int j = static_cast<int>(phi / kTwoPi * spec.nphi);
  j = std::min(std::max(j, 0), spec.nphi - 1);
  return i * spec.nphi + j;
}

namespace {

template <typename Getter>
void remap_impl(const DomainSpec& spec, const KGrid& grid, const Getter& value, double* out,
                int dim) {
  const KRegion& kr = grid.region;
  const double dr = (kr.r1 - kr.r0) / kr.nr;
  const double dphi = kTwoPi / kr.nphi;
  int c = 0;
  for (int i = 0; i < kr.nr; ++i) {
    for (int j = 0; j < kr.nphi; ++j, ++c) {
      double acc[2] = {0.0, 0.0};
      int hits = 0;
      for (int a = 0; a < 3; ++a) {
        for (int b = 0; b < 3; ++b) {
          const double r = kr.r0 + (i + (a + 0.5) / 3.0) * dr;
          const double phi = (j + (b + 0.5) / 3.0) * dphi;
          const Eigen::Vector2d x(r * std::cos(phi), r * std::sin(phi));
          const int cell = locate_cell(spec, x);
          if (cell < 0) continue;
          ++hits;
          value(cell, acc);
        }
      }
      for (int d = 0; d < dim; ++d) out[c * dim + d] = hits > 0 ? acc[d] / hits : 0.0;
    }
  }
}

}  // namespace

Eigen::ArrayXd remap_scalar(const DomainSpec& spec, const Eigen::ArrayXd& f, const KGrid& grid) {
  Eigen::ArrayXd out(grid.n());
  std::vector<double> buf(grid.n());
  remap_impl(spec, grid, [&](int cell, double* acc) { acc[0] += f[cell]; }, buf.data(), 1);
  for (int c = 0; c < grid.n(); ++c) out[c] = buf[c];
  return out;
}

VecField remap_vector(const DomainSpec& spec, const VecField& v, const KGrid& grid) {
  std::vector<double> buf(2 * grid.n());
  remap_impl(spec, grid,
             [&](int cell, double* acc) {
               acc[0] += v(0, cell);
               acc[1] += v(1, cell);
             },
             buf.data(), 2);
  VecField out(2, grid.n());
  for (int c = 0; c < grid.n(); ++c) {
    out(0, c) = buf[2 * c];
    out(1, c) = buf[2 * c + 1];
  }
  return out;
}

std::vector<std::pair<Eigen::Vector2d, Eigen::Vector2d>> momentum_test_centers(
    const KRegion& region, int count) {
  std::vector<std::pair<Eigen::Vector2d, Eigen::Vector2d>> out;
  const double rc = 0.5 * (region.r0 + region.r1);
  for (int k = 0; k < count; ++k) {
    const double ang = kTwoPi * k / count + 0.15;
    const Eigen::Vector2d x0(rc * std::cos(ang), rc * std::sin(ang));
    Eigen::Vector2d dir;
    switch (k % 4) {
      case 0: dir = Eigen::Vector2d(std::cos(ang), std::sin(ang)); break;   // radial
      case 1: dir = Eigen::Vector2d(-std::sin(ang), std::cos(ang)); break;  // tangential
      case 2: dir = Eigen::Vector2d::UnitX(); break;
      default: dir = Eigen::Vector2d::UnitY(); break;
    }
    out.emplace_back(x0, dir);
  }
  return out;
}

MetricRecord convergence_metrics(const NSFTrajectory& nsf_traj, const DomainSpec& nsf_spec,
                                 const Mesh& nsf_mesh, const OBTrajectory& ob_traj,
                                 const DomainSpec& ob_spec, const Mesh& ob_mesh, double eps,
                                 const KRegion& region, const ThermoParams& par,
                                 const LinearizedCoeffs& coeffs) {
  const size_t nt = nsf_traj.frames.size();
  if (nt != ob_traj.frames.size() || nt < 2)
    throw std::invalid_argument("convergence_metrics: trajectories must share frame times");
  const double r_in_max = nsf_spec.r_obs * (1.0 + nsf_spec.amp * nsf_spec.rugosity_scale());
  if (region.r0 <= r_in_max || region.r1 >= nsf_spec.outer_radius() ||
      region.r1 >= ob_spec.outer_radius())
    throw std::invalid_argument("convergence_metrics: K region leaves the fluid domain");

  const KGrid grid = make_kgrid(region);
  const double rb = par.rho_bar, tb = par.theta_bar;

  MetricRecord rec;
  rec.eps = eps;

  std::vector<double> w(nt, 0.0);  // trapezoid weights over frames
  for (size_t k = 0; k + 1 < nt; ++k) {
    const double dt = nsf_traj.frames[k + 1].t - nsf_traj.frames[k].t;
    w[k] += 0.5 * dt;
    w[k + 1] += 0.5 * dt;
  }

  const auto battery = momentum_test_centers(region);
  const double bump_w = 0.22 * (region.r1 - region.r0);
  auto bump = [&](const Eigen::Vector2d& x, const Eigen::Vector2d& x0) {
    const double r2 = (x - x0).squaredNorm() / (2.0 * bump_w * bump_w);
    return std::exp(-r2);
  };

  double m2_sq = 0.0, m3_sq = 0.0, m4_sq = 0.0, m5_sq = 0.0;
  std::vector<double> m6_sq(battery.size(), 0.0);

  for (size_t k = 0; k < nt; ++k) {
    const NSFState& s = nsf_traj.frames[k];
    const OBState& o = ob_traj.frames[k];

    const Eigen::ArrayXd rho_k = remap_scalar(nsf_spec, s.rho, grid);
    const VecField u_k = remap_vector(nsf_spec, s.u, grid);
    const Eigen::ArrayXd th_k = remap_scalar(nsf_spec, s.theta, grid);
    const VecField cap_u_k = remap_vector(ob_spec, o.U, grid);
    const Eigen::ArrayXd cap_th_k = remap_scalar(ob_spec, o.theta, grid);

    const Eigen::ArrayXd div_u =
        face_divergence(nsf_mesh, face_normal_flux(nsf_mesh, s.u));
    const Eigen::ArrayXd div_k = remap_scalar(nsf_spec, div_u, grid);

    // M1: sup_t L^{5/3}(K)
    double l53 = 0.0;
    for (int c = 0; c < grid.n(); ++c)
      l53 += std::pow(std::abs(rho_k[c] - rb), 5.0 / 3.0) * grid.volume[c];
    rec.m1 = std::max(rec.m1, std::pow(l53, 3.0 / 5.0));

    double du = 0.0, dth = 0.0, dv = 0.0, bres = 0.0;
    for (int c = 0; c < grid.n(); ++c) {
      const double vol = grid.volume[c];
      du += (u_k.col(c) - cap_u_k.col(c)).squaredNorm() * vol;
      const double theta_dev = (th_k[c] - tb) / eps;
      dth += std::pow(theta_dev - cap_th_k[c], 2) * vol;
      dv += div_k[c] * div_k[c] * vol;
      const double rho_dev = (rho_k[c] - rb) / eps;
      bres += std::pow(rho_dev + rb * coeffs.alpha * theta_dev, 2) * vol;
    }
    m2_sq += w[k] * du;
    m3_sq += w[k] * dth;
    m4_sq += w[k] * dv;
    m5_sq += w[k] * bres;

    // M6: momentum functionals on the native meshes
    for (size_t ib = 0; ib < battery.size(); ++ib) {
      const auto& [x0, dir] = battery[ib];
      double mn = 0.0, mo = 0.0;
      for (int c = 0; c < nsf_mesh.n_cells(); ++c)
        mn += s.rho[c] * s.u.col(c).dot(dir) * bump(nsf_mesh.cell_center.col(c), x0) *
              nsf_mesh.cell_volume[c];
      for (int c = 0; c < ob_mesh.n_cells(); ++c)
        mo += rb * o.U.col(c).dot(dir) * bump(ob_mesh.cell_center.col(c), x0) *
              ob_mesh.cell_volume[c];
      m6_sq[ib] += w[k] * (mn - mo) * (mn - mo);
    }
  }

  rec.m2 = std::sqrt(m2_sq);
  rec.m3 = std::sqrt(m3_sq);
  rec.m4 = std::sqrt(m4_sq);
  rec.m5 = std::sqrt(m5_sq);
  double acc = 0.0;
  for (double v : m6_sq) acc += v;
  rec.m6 = std::sqrt(acc / m6_sq.size());
  return rec;
}

}  // namespace limitlab
