#include "limitlab/oberbeck.hpp"

#include <cmath>

#include "limitlab/errors.hpp"

namespace limitlab {

OBState ob_init(const VecField& u0_raw, const Eigen::ArrayXd& theta0, const Mesh& mesh,
                const NeumannSolver& solver, const LinearizedCoeffs& coeffs,
                const ThermoParams& par) {
  OBState st;
  const FaceField raw = face_normal_flux(mesh, u0_raw);
  const HelmholtzParts parts = helmholtz_project(mesh, solver, raw);
  st.u_face = parts.solenoidal;
  st.U = u0_raw;
  const VecField gp = green_gauss_gradient(mesh, parts.potential);
  st.U -= gp;
  st.theta = theta0;
  st.r = -par.rho_bar * coeffs.alpha * theta0;
  st.t = 0.0;
  return st;
}

namespace {

Eigen::ArrayXd cell_width(const Mesh& mesh) {
  Eigen::ArrayXd inv = Eigen::ArrayXd::Zero(mesh.n_cells());
  for (int f = 0; f < mesh.n_faces(); ++f) {
    inv[mesh.face_cell_l[f]] = std::max(inv[mesh.face_cell_l[f]], mesh.face_area[f]);
    if (!mesh.is_boundary(f))
      inv[mesh.face_cell_r[f]] = std::max(inv[mesh.face_cell_r[f]], mesh.face_area[f]);
  }
  return mesh.cell_volume / inv;
}

}  // namespace

double ob_cfl_dt(const OBState& state, const FluidModel& model,
                 const LinearizedCoeffs& coeffs, const Mesh& mesh, const OBConfig& cfg) {
  const double theta_bar = model.thermo.theta_bar;
  const double rho_bar = model.thermo.rho_bar;
  const auto tc = transport(theta_bar, model.transp);
  const Eigen::ArrayXd width = cell_width(mesh);
  double dt = 1e300;
  for (int c = 0; c < mesh.n_cells(); ++c) {
    const double h = width[c];
    const double speed = state.U.col(c).norm() + 1e-14;
    dt = std::min(dt, cfg.cfl * h / speed);
    dt = std::min(dt, cfg.cfl * h * h * rho_bar / (4.0 * tc.mu));
    dt = std::min(dt, cfg.cfl * h * h * rho_bar * coeffs.c_p / (4.0 * tc.kappa));
  }
  return dt;
}

OBState ob_step(const OBState& state, double dt, const PotentialField& f,
                const LinearizedCoeffs& coeffs, const FluidModel& model, const Mesh& mesh,
                const NeumannSolver& solver, const OBConfig& cfg) {
  if (dt > ob_cfl_dt(state, model, coeffs, mesh, cfg) * (1.0 + 1e-9))
    throw StepError("ob_step: dt violates the advective/diffusive CFL bound");

  const int n = mesh.n_cells();
  const double rho_bar = model.thermo.rho_bar;
  const double theta_bar = model.thermo.theta_bar;
  const auto tc = transport(theta_bar, model.transp);

  // predictor: advection (flux form with solenoidal fluxes), viscosity, buoyancy
  VecField rate = VecField::Zero(2, n);
  for (int fidx = 0; fidx < mesh.n_faces(); ++fidx) {
    const int l = mesh.face_cell_l[fidx];
    const int r = mesh.face_cell_r[fidx];
    const double area = mesh.face_area[fidx];
    if (r < 0) {
      if (cfg.bc == ObstacleBC::NoSlip && mesh.face_tag[fidx] == BoundaryTag::Obstacle) {
        // wall value 0 across half a cell
        const Eigen::Vector2d flux = tc.mu * (-state.U.col(l)) / mesh.face_delta[fidx] * area;
        rate.col(l) += flux / rho_bar;
      }
      // slip walls carry no viscous or advective flux
      continue;
    }
    const double uf = state.u_face[fidx] * area;
    const Eigen::Vector2d upwind = uf >= 0.0 ? state.U.col(l) : state.U.col(r);
    const Eigen::Vector2d adv = upwind * uf;
    const Eigen::Vector2d visc =
        tc.mu * (state.U.col(r) - state.U.col(l)) / mesh.face_delta[fidx] * area;
    const Eigen::Vector2d total = -adv + visc / rho_bar;
    rate.col(l) += total;
    rate.col(r) -= total;
  }
  VecField u_star(2, n);
  for (int c = 0; c < n; ++c) {
    const Eigen::Vector2d force = state.r[c] * f.gradient(mesh.cell_center.col(c)) / rho_bar;
    u_star.col(c) = state.U.col(c) + dt * (rate.col(c) / mesh.cell_volume[c] + force);
  }

  // projection
  const FaceField star_flux = face_normal_flux(mesh, u_star);
  const HelmholtzParts parts = helmholtz_project(mesh, solver, star_flux);

  OBState out;
  out.u_face = parts.solenoidal;
  out.U = u_star - green_gauss_gradient(mesh, parts.potential);

  // temperature update with the projected fluxes
  Eigen::ArrayXd th_rate = Eigen::ArrayXd::Zero(n);
  for (int fidx = 0; fidx < mesh.n_faces(); ++fidx) {
    if (mesh.is_boundary(fidx)) continue;  // insulated, impermeable
    const int l = mesh.face_cell_l[fidx];
    const int r = mesh.face_cell_r[fidx];
    const double area = mesh.face_area[fidx];
    const double uf = out.u_face[fidx] * area;
    const double th_up = uf >= 0.0 ? state.theta[l] : state.theta[r];
    const double cond =
        tc.kappa * (state.theta[r] - state.theta[l]) / mesh.face_delta[fidx] * area;
    const double f_face = f.value(mesh.face_center.col(fidx));
    const double source = theta_bar * coeffs.alpha / coeffs.c_p * f_face * uf;
    const double total = -th_up * uf + cond / (rho_bar * coeffs.c_p) + source;
    th_rate[l] += total;
    th_rate[r] -= total;
  }
  out.theta = state.theta + dt * th_rate / mesh.cell_volume;
  out.r = -rho_bar * coeffs.alpha * out.theta;
  out.t = state.t + dt;

  if (!out.U.allFinite() || !out.theta.allFinite()) throw StepError("ob_step: non-finite state");
  return out;
}

OBTrajectory run_ob(const OBState& initial, double t_end, int n_frames,
                    const PotentialField& f, const LinearizedCoeffs& coeffs,
                    const FluidModel& model, const Mesh& mesh, const NeumannSolver& solver,
                    const OBConfig& cfg) {
  OBTrajectory traj;
  OBState state = initial;
  traj.frames.push_back(state);
  for (int frame = 1; frame <= n_frames; ++frame) {
    const double t_frame = t_end * frame / n_frames;
    while (state.t < t_frame - 1e-13 * t_end) {
      const double dt =
          std::min(ob_cfl_dt(state, model, coeffs, mesh, cfg), t_frame - state.t);
      state = ob_step(state, dt, f, coeffs, model, mesh, solver, cfg);
      ++traj.n_steps;
    }
    traj.frames.push_back(state);
  }
  return traj;
}

OBEnergyReport ob_energy_report(const OBTrajectory& traj, const PotentialField& f,
                                const FluidModel& model, const Mesh& mesh) {
  OBEnergyReport rep;
  const double rho_bar = model.thermo.rho_bar;
  const auto tc = transport(model.thermo.theta_bar, model.transp);

  std::vector<double> work(traj.frames.size());
  for (size_t k = 0; k < traj.frames.size(); ++k) {
    const OBState& s = traj.frames[k];
    rep.t.push_back(s.t);
    double ke = 0.0, wk = 0.0;
    for (int c = 0; c < mesh.n_cells(); ++c) {
      ke += 0.5 * rho_bar * s.U.col(c).squaredNorm() * mesh.cell_volume[c];
      wk += s.r[c] * f.gradient(mesh.cell_center.col(c)).dot(s.U.col(c)) * mesh.cell_volume[c];
    }
    rep.kinetic.push_back(ke);
    work[k] = wk;

    const Eigen::ArrayXd ux = s.U.row(0).transpose().array();
    const Eigen::ArrayXd uy = s.U.row(1).transpose().array();
    const double gu2 = std::pow(l2_norm(mesh, green_gauss_gradient(mesh, ux)), 2) +
                       std::pow(l2_norm(mesh, green_gauss_gradient(mesh, uy)), 2);
    rep.grad_u_sq.push_back(gu2);
    rep.theta_l2.push_back(l2_norm(mesh, s.theta));
    rep.grad_theta_l2.push_back(l2_norm(mesh, green_gauss_gradient(mesh, s.theta)));
  }
  for (size_t k = 0; k + 1 < traj.frames.size(); ++k) {
    const double dt = rep.t[k + 1] - rep.t[k];
    if (dt <= 0.0) continue;
    const double dke = (rep.kinetic[k + 1] - rep.kinetic[k]) / dt;
    const double rhs = -tc.mu * 0.5 * (rep.grad_u_sq[k] + rep.grad_u_sq[k + 1]) +
                       0.5 * (work[k] + work[k + 1]);
    rep.max_inequality_violation = std::max(rep.max_inequality_violation, dke - rhs);
  }
  return rep;
}

double max_divergence(const Mesh& mesh, const FaceField& u_face) {
  return face_divergence(mesh, u_face).abs().maxCoeff();
}

}  // namespace limitlab
