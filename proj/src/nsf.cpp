#include "limitlab/nsf.hpp"

#include <cmath>

#include "limitlab/errors.hpp"

namespace limitlab {

WellBalancedForce make_well_balanced_force(const StaticState& st, double eps,
                                           const ThermoParams& par, const Mesh& mesh) {
  WellBalancedForce wb;
  wb.rho_tilde = st.rho_tilde;
  wb.p_tilde.resize(mesh.n_cells());
  for (int c = 0; c < mesh.n_cells(); ++c)
    wb.p_tilde[c] = pressure(st.rho_tilde[c], st.theta_bar, par);
  const VecField gp = green_gauss_gradient(mesh, wb.p_tilde);
  wb.g_tilde.resize(2, mesh.n_cells());
  for (int c = 0; c < mesh.n_cells(); ++c)
    wb.g_tilde.col(c) = gp.col(c) / (eps * st.rho_tilde[c]);
  return wb;
}

namespace {

struct CellThermo {
  Eigen::ArrayXd p, c_s, mu, eta, kappa, e_theta, p_theta;
};

CellThermo cell_thermo(const NSFState& s, const FluidModel& model, const Mesh& mesh) {
  CellThermo t;
  const int n = mesh.n_cells();
  t.p.resize(n);
  t.c_s.resize(n);
  t.mu.resize(n);
  t.eta.resize(n);
  t.kappa.resize(n);
  t.e_theta.resize(n);
  t.p_theta.resize(n);
  for (int c = 0; c < n; ++c) {
    const double rho = s.rho[c], th = s.theta[c];
    t.p[c] = pressure(rho, th, model.thermo);
    t.c_s[c] = std::sqrt(sound_speed_sq(rho, th, model.thermo));
    const auto tc = transport(th, model.transp);
    t.mu[c] = tc.mu;
    t.eta[c] = tc.eta;
    t.kappa[c] = tc.kappa;
    t.e_theta[c] = energy_theta(rho, th, model.thermo);
    t.p_theta[c] = pressure_theta(rho, th, model.thermo);
  }
  return t;
}

// Newton stress from a velocity gradient (2D reduction of the 3D law).
inline Eigen::Matrix2d newton_stress(const Eigen::Matrix2d& g, double mu, double eta) {
  const double div = g.trace();
  Eigen::Matrix2d s = mu * (g + g.transpose());
  s(0, 0) += (eta - 2.0 / 3.0 * mu) * div;
  s(1, 1) += (eta - 2.0 / 3.0 * mu) * div;
  return s;
}

struct Rates {
  Eigen::ArrayXd rho;
  VecField mom;
  Eigen::ArrayXd theta;
};

Rates compute_rates(const NSFState& s, double eps, const WellBalancedForce& wb,
                    const FluidModel& model, const Mesh& mesh) {
  const int n = mesh.n_cells();
  const CellThermo th = cell_thermo(s, model, mesh);

  const Eigen::ArrayXd ux = s.u.row(0).transpose().array();
  const Eigen::ArrayXd uy = s.u.row(1).transpose().array();
  const VecField gux = green_gauss_gradient(mesh, ux);
  const VecField guy = green_gauss_gradient(mesh, uy);

  Rates r;
  r.rho = Eigen::ArrayXd::Zero(n);
  r.mom = VecField::Zero(2, n);
  r.theta = Eigen::ArrayXd::Zero(n);

  Eigen::ArrayXd div_u = Eigen::ArrayXd::Zero(n);  // slip-consistent face divergence
  Eigen::ArrayXd theta_adv = Eigen::ArrayXd::Zero(n);
  Eigen::ArrayXd cond = Eigen::ArrayXd::Zero(n);

  const double inv_eps2 = 1.0 / (eps * eps);

  for (int f = 0; f < mesh.n_faces(); ++f) {
    const int l = mesh.face_cell_l[f];
    const int rr = mesh.face_cell_r[f];
    const Eigen::Vector2d nrm = mesh.face_normal.col(f);
    const double area = mesh.face_area[f];

    if (rr < 0) {
      // slip wall: zero mass flux; mirror-state momentum flux + pressure
      const double un = s.u.col(l).dot(nrm);
      const double lam = std::abs(un) + th.c_s[l] / eps;
      const Eigen::Vector2d fmom =
          (inv_eps2 * th.p[l] + s.rho[l] * un * un + lam * s.rho[l] * un) * area * nrm;
      r.mom.col(l) -= fmom;
      continue;  // no heat or viscous flux through insulated slip walls
    }

    const double un_l = s.u.col(l).dot(nrm), un_r = s.u.col(rr).dot(nrm);
    const double un_f = 0.5 * (un_l + un_r);
    const double lam =
        std::max(std::abs(un_l) + th.c_s[l] / eps, std::abs(un_r) + th.c_s[rr] / eps);

    // mass: central flux + upwind dissipation on the deviation from the
    // static density (keeps the hydrostatic state exact)
    const double dev_l = s.rho[l] - wb.rho_tilde[l];
    const double dev_r = s.rho[rr] - wb.rho_tilde[rr];
    const double fmass =
        (0.5 * (s.rho[l] * un_l + s.rho[rr] * un_r) - 0.5 * lam * (dev_r - dev_l)) * area;
    r.rho[l] -= fmass;
    r.rho[rr] += fmass;

    // momentum: convective + pressure flux + characteristic-split dissipation.
    // The acoustic rate applies to the normal momentum jump only; the shear
    // jump is advected at the material rate, which avoids the low-Mach
    // over-dissipation of a plain single-rate flux.
    const Eigen::Vector2d mom_l = s.rho[l] * s.u.col(l), mom_r = s.rho[rr] * s.u.col(rr);
    const Eigen::Vector2d dmom = mom_r - mom_l;
    const double lam_t = std::max(std::abs(un_l), std::abs(un_r));
    const Eigen::Vector2d tangent(-nrm.y(), nrm.x());
    Eigen::Vector2d fmom = 0.5 * (mom_l * un_l + mom_r * un_r) -
                           0.5 * lam * dmom.dot(nrm) * nrm -
                           0.5 * lam_t * dmom.dot(tangent) * tangent;
    fmom += inv_eps2 * 0.5 * (th.p[l] + th.p[rr]) * nrm;

    // viscous flux from the face velocity gradient: cell average plus a
    // two-point correction along the face normal (periodic-seam safe)
    {
      Eigen::Matrix2d g;
      g.row(0) = 0.5 * (gux.col(l) + gux.col(rr)).transpose();
      g.row(1) = 0.5 * (guy.col(l) + guy.col(rr)).transpose();
      const Eigen::Vector2d du = (s.u.col(rr) - s.u.col(l)) / mesh.face_delta[f];
      const Eigen::Vector2d corr = du - g * nrm;
      g += corr * nrm.transpose();
      const double mu_f = 0.5 * (th.mu[l] + th.mu[rr]);
      const double eta_f = 0.5 * (th.eta[l] + th.eta[rr]);
      fmom -= newton_stress(g, mu_f, eta_f) * nrm;
    }
    fmom *= area;
    r.mom.col(l) -= fmom;
    r.mom.col(rr) += fmom;

    // temperature: upwind advection pieces, conduction, face divergence
    const double theta_up = un_f >= 0.0 ? s.theta[l] : s.theta[rr];
    theta_adv[l] += theta_up * un_f * area;
    theta_adv[rr] -= theta_up * un_f * area;
    div_u[l] += un_f * area;
    div_u[rr] -= un_f * area;

    const double kap_f = 0.5 * (th.kappa[l] + th.kappa[rr]);
    const double q = kap_f * (s.theta[rr] - s.theta[l]) / mesh.face_delta[f] * area;
    cond[l] += q;
    cond[rr] -= q;
  }

  for (int c = 0; c < n; ++c) {
    const double vol = mesh.cell_volume[c];
    r.rho[c] /= vol;
    r.mom.col(c) /= vol;
    // force term: (1/eps) rho g_tilde balances the pressure flux exactly at
    // the static state
    r.mom.col(c) += s.rho[c] / eps * wb.g_tilde.col(c);

    div_u[c] /= vol;
    theta_adv[c] /= vol;
    Eigen::Matrix2d g;
    g.row(0) = gux.col(c).transpose();
    g.row(1) = guy.col(c).transpose();
    const double diss = eps * eps * (newton_stress(g, th.mu[c], th.eta[c]).array() * g.array()).sum();
    const double compress = -s.theta[c] * th.p_theta[c] * div_u[c];
    const double adv = theta_adv[c] - s.theta[c] * div_u[c];  // u . grad theta
    r.theta[c] = -adv + (cond[c] / vol + diss + compress) / (s.rho[c] * th.e_theta[c]);
  }
  return r;
}

void check_state(const NSFState& s) {
  if (!s.rho.allFinite() || !s.theta.allFinite() || !s.u.allFinite())
    throw StepError("nsf step: non-finite state");
  if ((s.rho <= 0.0).any() || (s.theta <= 0.0).any())
    throw StepError("nsf step: positivity loss, suggest smaller dt");
}

NSFState apply_rates(const NSFState& s, const Rates& r, double dt) {
  NSFState out;
  out.rho = s.rho + dt * r.rho;
  out.theta = s.theta + dt * r.theta;
  out.u.resize(2, s.u.cols());
  for (int c = 0; c < s.u.cols(); ++c) {
    const Eigen::Vector2d mom = s.rho[c] * s.u.col(c) + dt * r.mom.col(c);
    out.u.col(c) = mom / out.rho[c];
  }
  out.t = s.t + dt;
  check_state(out);
  return out;
}

}  // namespace

double cfl_dt(const NSFState& state, double eps, const FluidModel& model, const Mesh& mesh,
              const FluxConfig& cfg) {
  cfg.validate();
  if (!state.rho.allFinite() || !state.theta.allFinite() || !state.u.allFinite())
    throw StepError("cfl_dt: non-finite state");

  // cell width: volume over largest face area
  Eigen::ArrayXd width = Eigen::ArrayXd::Constant(mesh.n_cells(), 1e300);
  for (int f = 0; f < mesh.n_faces(); ++f) {
    const double w = 1.0 / mesh.face_area[f];
    width[mesh.face_cell_l[f]] = std::min(width[mesh.face_cell_l[f]], w);
    if (!mesh.is_boundary(f))
      width[mesh.face_cell_r[f]] = std::min(width[mesh.face_cell_r[f]], w);
  }
  width *= mesh.cell_volume;

  double dt = 1e300;
  for (int c = 0; c < mesh.n_cells(); ++c) {
    const double rho = state.rho[c], th = state.theta[c];
    const double cs = std::sqrt(sound_speed_sq(rho, th, model.thermo));
    const double speed = state.u.col(c).norm() + cs / eps;
    const double h = width[c];
    double cell_dt = cfg.cfl_acoustic * h / speed;
    const auto tc = transport(th, model.transp);
    const double mu_eff = 4.0 / 3.0 * tc.mu + tc.eta;
    cell_dt = std::min(cell_dt, h * h * rho / (4.0 * mu_eff));
    cell_dt = std::min(cell_dt, h * h * rho * energy_theta(rho, th, model.thermo) / (4.0 * tc.kappa));
    dt = std::min(dt, cell_dt);
  }
  return dt;
}

NSFState step(const NSFState& state, double dt, double eps, const WellBalancedForce& wb,
              const FluidModel& model, const Mesh& mesh, const FluxConfig& cfg) {
  cfg.validate();
  // Heun / SSP-RK2
  const Rates r1 = compute_rates(state, eps, wb, model, mesh);
  const NSFState s1 = apply_rates(state, r1, dt);
  const Rates r2 = compute_rates(s1, eps, wb, model, mesh);
  const NSFState s2 = apply_rates(s1, r2, dt);

  NSFState out;
  out.rho = 0.5 * (state.rho + s2.rho);
  out.theta = 0.5 * (state.theta + s2.theta);
  out.u.resize(2, mesh.n_cells());
  for (int c = 0; c < mesh.n_cells(); ++c) {
    const Eigen::Vector2d mom = 0.5 * (state.rho[c] * state.u.col(c) + s2.rho[c] * s2.u.col(c));
    out.u.col(c) = mom / out.rho[c];
  }
  out.t = state.t + dt;
  check_state(out);
  return out;
}

EntropyProduction entropy_production(const NSFState& before, const NSFState& after, double dt,
                                     double eps, const FluidModel& model, const Mesh& mesh) {
  EntropyProduction ep;
  const int n = mesh.n_cells();
  ep.sigma.resize(n);

  const Eigen::ArrayXd ux = after.u.row(0).transpose().array();
  const Eigen::ArrayXd uy = after.u.row(1).transpose().array();
  const VecField gux = green_gauss_gradient(mesh, ux);
  const VecField guy = green_gauss_gradient(mesh, uy);
  const VecField gth = green_gauss_gradient(mesh, after.theta);

  for (int c = 0; c < n; ++c) {
    const double th = after.theta[c];
    const auto tc = transport(th, model.transp);
    Eigen::Matrix2d g;
    g.row(0) = gux.col(c).transpose();
    g.row(1) = guy.col(c).transpose();
    const double visc = (newton_stress(g, tc.mu, tc.eta).array() * g.array()).sum();
    const double four = tc.kappa * gth.col(c).squaredNorm() / th;
    ep.sigma[c] = (eps * eps * visc + four) / th;
  }
  ep.total_sigma = integrate(mesh, ep.sigma);

  // discrete entropy balance residual of the flux-form entropy equation
  ep.balance_residual = Eigen::ArrayXd::Zero(n);
  Eigen::ArrayXd s_before(n), s_after(n);
  for (int c = 0; c < n; ++c) {
    s_before[c] = before.rho[c] * entropy(before.rho[c], before.theta[c], model.thermo);
    s_after[c] = after.rho[c] * entropy(after.rho[c], after.theta[c], model.thermo);
  }
  Eigen::ArrayXd flux_div = Eigen::ArrayXd::Zero(n);
  for (int f = 0; f < mesh.n_faces(); ++f) {
    if (mesh.is_boundary(f)) continue;  // u.n = 0 and q.n = 0
    const int l = mesh.face_cell_l[f], r = mesh.face_cell_r[f];
    const Eigen::Vector2d nrm = mesh.face_normal.col(f);
    const double un_f = 0.5 * (before.u.col(l).dot(nrm) + before.u.col(r).dot(nrm));
    const double s_up = un_f >= 0.0 ? s_before[l] : s_before[r];
    const double th_f = 0.5 * (before.theta[l] + before.theta[r]);
    const double kap_f = 0.5 * (transport(before.theta[l], model.transp).kappa +
                                transport(before.theta[r], model.transp).kappa);
    const double q_over_theta =
        -kap_f * (before.theta[r] - before.theta[l]) / mesh.face_delta[f] / th_f;
    const double flux = (s_up * un_f + q_over_theta) * mesh.face_area[f];
    flux_div[l] += flux;
    flux_div[r] -= flux;
  }
  for (int c = 0; c < n; ++c)
    ep.balance_residual[c] =
        (s_after[c] - s_before[c]) / dt + flux_div[c] / mesh.cell_volume[c] - ep.sigma[c];
  ep.total_residual_l1 = integrate(mesh, ep.balance_residual.abs());
  return ep;
}

double total_energy(const NSFState& state, double eps, const PotentialField& f,
                    const ThermoParams& par, const Mesh& mesh) {
  double e = 0.0;
  for (int c = 0; c < mesh.n_cells(); ++c) {
    const double rho = state.rho[c];
    const double kinetic = 0.5 * rho * state.u.col(c).squaredNorm();
    const double internal = rho * internal_energy(rho, state.theta[c], par) / (eps * eps);
    const double potential = -rho * f.value(mesh.cell_center.col(c)) / eps;
    e += (kinetic + internal + potential) * mesh.cell_volume[c];
  }
  return e;
}

NSFTrajectory run_nsf(const NSFState& initial, double t_end, int n_frames, double eps,
                      const WellBalancedForce& wb, const PotentialField& f,
                      const FluidModel& model, const Mesh& mesh, const FluxConfig& cfg) {
  NSFTrajectory traj;
  traj.eps = eps;
  NSFState state = initial;
  Eigen::ArrayXd sigma_cum = Eigen::ArrayXd::Zero(mesh.n_cells());
  double sigma_total = 0.0;

  auto record = [&](const NSFState& s) {
    traj.frames.push_back(s);
    traj.sigma_lift.push_back(sigma_cum);
    traj.sigma_total.push_back(sigma_total);
    traj.energy_total.push_back(total_energy(s, eps, f, model.thermo, mesh));
  };
  record(state);

  for (int frame = 1; frame <= n_frames; ++frame) {
    const double t_frame = t_end * frame / n_frames;
    while (state.t < t_frame - 1e-13 * t_end) {
      double dt = std::min(cfl_dt(state, eps, model, mesh, cfg), t_frame - state.t);
      NSFState next;
      bool ok = false;
      for (int attempt = 0; attempt <= cfg.max_dt_halvings; ++attempt) {
        try {
          next = step(state, dt, eps, wb, model, mesh, cfg);
          ok = true;
          break;
        } catch (const StepError&) {
          dt *= 0.5;
        }
      }
      if (!ok) throw StepError("run_nsf: step rejected after max dt halvings at t = " +
                               std::to_string(state.t));
      const EntropyProduction ep = entropy_production(state, next, dt, eps, model, mesh);
      sigma_cum += dt * ep.sigma;
      sigma_total += dt * ep.total_sigma;
      state = next;
      ++traj.n_steps;
    }
    record(state);
  }
  return traj;
}

BalanceSeries dissipation_balance(const NSFTrajectory& traj, double eps, const ThermoParams& par,
                                  const StaticState& st, const Mesh& mesh) {
  BalanceSeries out;
  const double inv_eps2 = 1.0 / (eps * eps);
  for (size_t k = 0; k < traj.frames.size(); ++k) {
    const NSFState& s = traj.frames[k];
    double kinetic = 0.0, ballistic = 0.0;
    for (int c = 0; c < mesh.n_cells(); ++c) {
      kinetic += 0.5 * s.rho[c] * s.u.col(c).squaredNorm() * mesh.cell_volume[c];
      ballistic +=
          ballistic_free_energy(s.rho[c], s.theta[c], st.rho_tilde[c], par) * mesh.cell_volume[c];
    }
    const double lhs = kinetic + inv_eps2 * ballistic + inv_eps2 * par.theta_bar * traj.sigma_total[k];
    out.t.push_back(s.t);
    out.lhs.push_back(lhs);
    if (k == 0) out.rhs = lhs;
  }
  for (double v : out.lhs)
    out.max_rel_drift =
        std::max(out.max_rel_drift, std::abs(v - out.rhs) / std::max(std::abs(out.rhs), 1e-300));
  return out;
}

std::vector<MonitorEntry> uniform_bound_monitor(const NSFTrajectory& traj, double eps,
                                                const StaticState& st,
                                                const EssResWindow& window,
                                                const FluidModel& model, const Mesh& mesh) {
  const int n = mesh.n_cells();
  double sup_sqrt_rho_u = 0.0, sup_ess_rho = 0.0, sup_ess_theta = 0.0;
  double sup_res_rho53 = 0.0, sup_res_theta4 = 0.0, sup_res_measure = 0.0;
  double sup_res_rho_l1 = 0.0, sup_res_state = 0.0;
  double int_u_w12 = 0.0, int_theta_w12 = 0.0;

  const double tb = st.theta_bar;
  std::vector<double> w12_u(traj.frames.size()), w12_th(traj.frames.size());

  for (size_t k = 0; k < traj.frames.size(); ++k) {
    const NSFState& s = traj.frames[k];
    Eigen::ArrayXd rho_dev = (s.rho - st.rho_tilde) / eps;
    Eigen::ArrayXd theta_dev = (s.theta - tb) / eps;

    double sru = 0.0;
    for (int c = 0; c < n; ++c)
      sru += s.rho[c] * s.u.col(c).squaredNorm() * mesh.cell_volume[c];
    sup_sqrt_rho_u = std::max(sup_sqrt_rho_u, std::sqrt(sru));

    auto [ess_r, res_r] = ess_res_split(s.rho, s.theta, rho_dev, window);
    auto [ess_t, res_t] = ess_res_split(s.rho, s.theta, theta_dev, window);
    sup_ess_rho = std::max(sup_ess_rho, l2_norm(mesh, ess_r));
    sup_ess_theta = std::max(sup_ess_theta, l2_norm(mesh, ess_t));
    sup_res_rho_l1 = std::max(sup_res_rho_l1, integrate(mesh, res_r.abs()));

    double r53 = 0.0, t4 = 0.0, meas = 0.0, res_state = 0.0;
    for (int c = 0; c < n; ++c) {
      const double chi = window.chi(s.rho[c], s.theta[c]);
      const double indicator = 1.0 - chi;
      meas += indicator * mesh.cell_volume[c];
      r53 += indicator * std::pow(s.rho[c], 5.0 / 3.0) * mesh.cell_volume[c];
      t4 += indicator * std::pow(s.theta[c], 4.0) * mesh.cell_volume[c];
      const double rho = s.rho[c], th = s.theta[c];
      res_state += indicator *
                   (std::abs(rho * internal_energy(rho, th, model.thermo)) +
                    std::abs(pressure(rho, th, model.thermo)) +
                    std::abs(rho * entropy(rho, th, model.thermo))) *
                   mesh.cell_volume[c];
    }
    sup_res_rho53 = std::max(sup_res_rho53, r53);
    sup_res_theta4 = std::max(sup_res_theta4, t4);
    sup_res_measure = std::max(sup_res_measure, meas);
    sup_res_state = std::max(sup_res_state, res_state);

    const Eigen::ArrayXd ux = s.u.row(0).transpose().array();
    const Eigen::ArrayXd uy = s.u.row(1).transpose().array();
    const double gu = l2_norm(mesh, green_gauss_gradient(mesh, ux)) +
                      l2_norm(mesh, green_gauss_gradient(mesh, uy));
    const double nu = l2_norm(mesh, ux) + l2_norm(mesh, uy);
    w12_u[k] = nu * nu + gu * gu;
    const double gth = l2_norm(mesh, green_gauss_gradient(mesh, theta_dev));
    const double nth = l2_norm(mesh, theta_dev);
    w12_th[k] = nth * nth + gth * gth;
  }
  // trapezoidal time integral over frames
  for (size_t k = 0; k + 1 < traj.frames.size(); ++k) {
    const double dt = traj.frames[k + 1].t - traj.frames[k].t;
    int_u_w12 += 0.5 * dt * (w12_u[k] + w12_u[k + 1]);
    int_theta_w12 += 0.5 * dt * (w12_th[k] + w12_th[k + 1]);
  }
  const double sigma_total = traj.sigma_total.empty() ? 0.0 : traj.sigma_total.back();

  auto entry = [eps](std::string name, std::string norm, double value, double power) {
    return MonitorEntry{std::move(name), std::move(norm), value, power,
                        value / std::pow(eps, power)};
  };
  return {
      entry("sqrt_rho_u", "sup_t L2(Omega)", sup_sqrt_rho_u, 0.0),
      entry("ess_rho_dev", "sup_t L2(Omega) of [(rho-rho_tilde)/eps]_ess", sup_ess_rho, 0.0),
      entry("ess_theta_dev", "sup_t L2(Omega) of [(theta-theta_bar)/eps]_ess", sup_ess_theta, 0.0),
      entry("sigma_total", "M+([0,T]xOmega)", sigma_total, 2.0),
      entry("res_rho_53", "sup_t L1(Omega) of [rho]_res^{5/3}", sup_res_rho53, 2.0),
      entry("res_theta_4", "sup_t L1(Omega) of [theta]_res^4", sup_res_theta4, 2.0),
      entry("res_measure", "sup_t |res set|", sup_res_measure, 2.0),
      entry("res_state_fns", "sup_t L1(Omega) of |[rho e]_res|+|[p]_res|+|[rho s]_res|",
            sup_res_state, 2.0),
      entry("res_rho_dev_l1", "sup_t L1(Omega) of [(rho-rho_tilde)/eps]_res", sup_res_rho_l1, 1.0),
      entry("u_w12_sq", "int_0^T W^{1,2}(Omega)^2 dt", int_u_w12, 0.0),
      entry("theta_dev_w12_sq", "int_0^T W^{1,2}(Omega)^2 dt", int_theta_w12, 0.0),
  };
}

double boundary_normal_speed(const NSFState& state, const Mesh& mesh) {
  // Normal velocity of the mirror-state average at boundary faces, i.e. the
  // value the flux loop actually uses for the wall mass flux.
  double worst = 0.0;
  for (int f = 0; f < mesh.n_faces(); ++f) {
    if (!mesh.is_boundary(f)) continue;
    const Eigen::Vector2d nrm = mesh.face_normal.col(f);
    const Eigen::Vector2d u = state.u.col(mesh.face_cell_l[f]);
    const Eigen::Vector2d ghost = u - 2.0 * u.dot(nrm) * nrm;
    worst = std::max(worst, std::abs(0.5 * (u + ghost).dot(nrm)));
  }
  return worst;
}

}  // namespace limitlab
