#include "limitlab/equilibrium.hpp"

#include <cmath>
#include <random>

#include "limitlab/errors.hpp"

namespace limitlab {

double PotentialField::value(const Eigen::Vector2d& x) const {
  switch (kind) {
    case Kind::Constant:
      return amplitude;
    case Kind::LinearX:
      return amplitude * x.x();
    case Kind::Gaussian:
      return amplitude * std::exp(-(x - center).squaredNorm() / (2.0 * width * width));
  }
  return 0.0;
}

Eigen::Vector2d PotentialField::gradient(const Eigen::Vector2d& x) const {
  switch (kind) {
    case Kind::Constant:
      return Eigen::Vector2d::Zero();
    case Kind::LinearX:
      return Eigen::Vector2d(amplitude, 0.0);
    case Kind::Gaussian: {
      const Eigen::Vector2d d = x - center;
      return -value(x) / (width * width) * d;
    }
  }
  return Eigen::Vector2d::Zero();
}

double PotentialField::reference_value() const {
  return kind == Kind::Constant ? amplitude : 0.0;
}

Eigen::ArrayXd PotentialField::values(const Mesh& mesh) const {
  Eigen::ArrayXd out(mesh.n_cells());
  for (int c = 0; c < mesh.n_cells(); ++c) out[c] = value(mesh.cell_center.col(c));
  return out;
}

VecField PotentialField::gradients(const Mesh& mesh) const {
  VecField out(2, mesh.n_cells());
  for (int c = 0; c < mesh.n_cells(); ++c) out.col(c) = gradient(mesh.cell_center.col(c));
  return out;
}

std::pair<double, double> PotentialField::sup_bounds(const Mesh& mesh) const {
  double fs = 0.0, gs = 0.0;
  for (int c = 0; c < mesh.n_cells(); ++c) {
    fs = std::max(fs, std::abs(value(mesh.cell_center.col(c))));
    gs = std::max(gs, gradient(mesh.cell_center.col(c)).norm());
  }
  return {fs, gs};
}

StaticState static_state(const PotentialField& f, double eps, const ThermoParams& par,
                         const Mesh& mesh) {
  par.validate();
  StaticState st;
  st.theta_bar = par.theta_bar;
  st.rho_tilde.resize(mesh.n_cells());

  const double pi_bar = first_integral(par.rho_bar, par);
  const double f_ref = f.reference_value();
  for (int c = 0; c < mesh.n_cells(); ++c) {
    const double target = eps * (f.value(mesh.cell_center.col(c)) - f_ref) + pi_bar;
    double rho = par.rho_bar;
    bool done = false;
    for (int it = 0; it < 100; ++it) {
      const double g = first_integral(rho, par) - target;
      if (std::abs(g) < 1e-12 * std::max(1.0, std::abs(target))) {
        done = true;
        break;
      }
      const double dg = first_integral_deriv(rho, par);
      double next = rho - g / dg;
      if (next <= 0.0) next = 0.5 * rho;  // keep the iterate positive
      rho = next;
    }
    if (!done || !(rho > 0.0))
      throw EquilibriumError("static_state: Newton failed in cell " + std::to_string(c));
    st.rho_tilde[c] = rho;
  }
  return st;
}

ExpansionReport verify_expansion(const StaticState& state, const PotentialField& f, double eps,
                                 const ThermoParams& par, const Mesh& mesh) {
  ExpansionReport rep{0.0, 0.0, 0, 0.0};
  const double pi_prime = first_integral_deriv(par.rho_bar, par);
  const double f_tol = 1e-10;

  const VecField grad_rho = green_gauss_gradient(mesh, state.rho_tilde);
  const double f_ref = f.reference_value();
  for (int c = 0; c < mesh.n_cells(); ++c) {
    const Eigen::Vector2d x = mesh.cell_center.col(c);
    const double fv = f.value(x) - f_ref;
    const double dev = state.rho_tilde[c] - par.rho_bar;
    rep.linear_coeff = std::max(rep.linear_coeff, std::abs(dev) / eps);
    if (std::abs(fv) < f_tol) {
      ++rep.skipped_cells;
    } else {
      const double h = (dev - eps * fv / pi_prime) / (eps * eps * fv);
      rep.h_eps_norm = std::max(rep.h_eps_norm, std::abs(h));
    }
    const double gf = f.gradient(x).norm();
    if (gf > f_tol)
      rep.grad_ratio_sup = std::max(rep.grad_ratio_sup, grad_rho.col(c).norm() / (eps * gf));
  }
  return rep;
}

namespace {

double radial_window(double r, double r_lo, double r_hi) {
  // C^inf bump in the annulus (r_lo, r_hi)
  const double t = (r - r_lo) / (r_hi - r_lo);
  if (t <= 0.0 || t >= 1.0) return 0.0;
  const double u = 2.0 * t - 1.0;
  return std::exp(-1.0 / (1.0 - u * u)) * std::exp(1.0);
}

std::pair<double, double> annulus_bounds(const Mesh& mesh) {
  double lo = 1e300, hi = 0.0;
  for (int c = 0; c < mesh.n_cells(); ++c) {
    const double r = mesh.cell_center.col(c).norm();
    lo = std::min(lo, r);
    hi = std::max(hi, r);
  }
  return {lo, hi};
}

}  // namespace

Eigen::ArrayXd ScalarProfile::evaluate(const Mesh& mesh) const {
  Eigen::ArrayXd out = Eigen::ArrayXd::Zero(mesh.n_cells());
  if (kind == Kind::None || amplitude == 0.0) return out;

  const auto [r_lo, r_hi] = annulus_bounds(mesh);
  const double rc = r_center > 0.0 ? r_center : 0.5 * (r_lo + r_hi);

  switch (kind) {
    case Kind::AngularSine: {
      const double wlo = std::max(r_lo, rc - width), whi = std::min(r_hi, rc + width);
      for (int c = 0; c < mesh.n_cells(); ++c) {
        const Eigen::Vector2d x = mesh.cell_center.col(c);
        const double phi = std::atan2(x.y(), x.x());
        out[c] = amplitude * radial_window(x.norm(), wlo, whi) * std::sin(wavenumber * phi);
      }
      break;
    }
    case Kind::GaussianBump: {
      Eigen::Vector2d x0 = center;
      if (x0.squaredNorm() == 0.0) x0 = Eigen::Vector2d(rc, 0.0);
      for (int c = 0; c < mesh.n_cells(); ++c) {
        const double d2 = (mesh.cell_center.col(c) - x0).squaredNorm();
        out[c] = amplitude * std::exp(-d2 / (2.0 * width * width));
      }
      break;
    }
    case Kind::RandomBumps: {
      std::mt19937_64 rng(seed);
      std::uniform_real_distribution<double> uang(0.0, 2.0 * 3.14159265358979324);
      std::uniform_real_distribution<double> urad(rc - spread, rc + spread);
      std::normal_distribution<double> amp(0.0, 1.0);
      for (int b = 0; b < n_bumps; ++b) {
        const double ang = uang(rng), r = urad(rng), a = amp(rng);
        const Eigen::Vector2d x0(r * std::cos(ang), r * std::sin(ang));
        for (int c = 0; c < mesh.n_cells(); ++c) {
          const double d2 = (mesh.cell_center.col(c) - x0).squaredNorm();
          out[c] += amplitude * a * std::exp(-d2 / (2.0 * width * width));
        }
      }
      break;
    }
    case Kind::None:
      break;
  }
  return out;
}

VecField VelocityProfile::evaluate(const Mesh& mesh) const {
  VecField out = VecField::Zero(2, mesh.n_cells());
  if (kind == Kind::Zero || amplitude == 0.0) return out;

  const auto [r_lo, r_hi] = annulus_bounds(mesh);
  const double rc = r_center > 0.0 ? r_center : 0.5 * (r_lo + r_hi);
  const double wlo = std::max(r_lo, rc - width), whi = std::min(r_hi, rc + width);

  switch (kind) {
    case Kind::Swirl: {
      for (int c = 0; c < mesh.n_cells(); ++c) {
        const Eigen::Vector2d x = mesh.cell_center.col(c);
        const double r = x.norm();
        const Eigen::Vector2d e_phi(-x.y() / r, x.x() / r);
        out.col(c) = amplitude * radial_window(r, wlo, whi) * e_phi;
      }
      break;
    }
    case Kind::RadialPulse: {
      for (int c = 0; c < mesh.n_cells(); ++c) {
        const Eigen::Vector2d x = mesh.cell_center.col(c);
        const double r = x.norm();
        out.col(c) = amplitude * radial_window(r, wlo, whi) * (x / r);
      }
      break;
    }
    case Kind::DirectionalBump: {
      Eigen::Vector2d x0 = center;
      if (x0.squaredNorm() == 0.0) x0 = Eigen::Vector2d(rc, 0.0);
      const Eigen::Vector2d dir = direction.normalized();
      for (int c = 0; c < mesh.n_cells(); ++c) {
        const double d2 = (mesh.cell_center.col(c) - x0).squaredNorm();
        out.col(c) = amplitude * std::exp(-d2 / (2.0 * width * width)) * dir;
      }
      break;
    }
    case Kind::RandomBumps: {
      std::mt19937_64 rng(seed);
      std::uniform_real_distribution<double> uang(0.0, 2.0 * 3.14159265358979324);
      std::uniform_real_distribution<double> urad(rc - spread, rc + spread);
      std::normal_distribution<double> amp(0.0, 1.0);
      for (int b = 0; b < n_bumps; ++b) {
        const double ang = uang(rng), r = urad(rng);
        const Eigen::Vector2d x0(r * std::cos(ang), r * std::sin(ang));
        const Eigen::Vector2d dir(amp(rng), amp(rng));
        for (int c = 0; c < mesh.n_cells(); ++c) {
          const double d2 = (mesh.cell_center.col(c) - x0).squaredNorm();
          out.col(c) += amplitude * std::exp(-d2 / (2.0 * width * width)) * dir;
        }
      }
      break;
    }
    case Kind::Zero:
      break;
  }
  return out;
}

InitialData make_initial_data(const StaticState& state, double eps,
                              const ScalarProfile& rho1_profile,
                              const ScalarProfile& theta1_profile,
                              const VelocityProfile& u0_profile, const Mesh& mesh) {
  InitialData out;
  out.rho1 = rho1_profile.evaluate(mesh);
  out.theta1 = theta1_profile.evaluate(mesh);
  out.rho1 -= mean(mesh, out.rho1);
  out.theta1 -= mean(mesh, out.theta1);
  out.u0 = u0_profile.evaluate(mesh);

  out.rho0 = state.rho_tilde + eps * out.rho1;
  out.theta0 = Eigen::ArrayXd::Constant(mesh.n_cells(), state.theta_bar) + eps * out.theta1;
  if ((out.rho0 <= 0.0).any() || (out.theta0 <= 0.0).any())
    throw std::invalid_argument("make_initial_data: perturbation too large, state not positive");
  return out;
}

}  // namespace limitlab
