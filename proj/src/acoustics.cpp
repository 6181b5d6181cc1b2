#include "limitlab/acoustics.hpp"

#include <cmath>
#include <complex>
#include <random>

#include "limitlab/errors.hpp"

namespace limitlab {

AcousticData assemble_acoustic_data(const NSFState& state, const Eigen::ArrayXd& sigma_lift,
                                    double eps, const PotentialField& f,
                                    const LinearizedCoeffs& coeffs, const FluidModel& model,
                                    const Mesh& mesh, const NeumannSolver& solver) {
  if (sigma_lift.size() != mesh.n_cells())
    throw std::invalid_argument("assemble_acoustic_data: missing or mismatched entropy lifting");
  const int n = mesh.n_cells();
  const ThermoParams& par = model.thermo;
  const double rb = par.rho_bar, tb = par.theta_bar;
  const double s_bar = entropy(rb, tb, par);
  const double p_bar = pressure(rb, tb, par);
  const double A = coeffs.A, B = coeffs.B;

  AcousticData out;
  out.S.resize(n);
  out.V.resize(2, n);
  out.H1.resize(2, n);
  out.H2.resize(2, n);
  out.G1.resize(n);
  out.G3.resize(n);
  out.G21.resize(3, n);
  out.G22.resize(3, n);
  out.G4.resize(2, n);

  const Eigen::ArrayXd ux = state.u.row(0).transpose().array();
  const Eigen::ArrayXd uy = state.u.row(1).transpose().array();
  const VecField gux = green_gauss_gradient(mesh, ux);
  const VecField guy = green_gauss_gradient(mesh, uy);
  const VecField gth = green_gauss_gradient(mesh, state.theta);

  for (int c = 0; c < n; ++c) {
    const double rho = state.rho[c], th = state.theta[c];
    const double s = entropy(rho, th, par);
    const double rho_dev = (rho - rb) / eps;
    const double rs_dev = (rho * s - rb * s_bar) / eps;
    const double fv = f.value(mesh.cell_center.col(c));

    out.S[c] = A * rho_dev + B * rs_dev - rb * fv + B / eps * sigma_lift[c];
    out.V.col(c) = rho * state.u.col(c);

    out.H1.col(c) = B * rho * (s_bar - s) / eps * state.u.col(c);
    const auto tc = transport(th, model.transp);
    out.H2.col(c) = B * tc.kappa / th * gth.col(c) / eps;

    const double p_dev = (pressure(rho, th, par) - p_bar) / eps;
    out.G3[c] = (A * rho_dev + B * rs_dev - p_dev) / eps;

    Eigen::Matrix2d g;
    g.row(0) = gux.col(c).transpose();
    g.row(1) = guy.col(c).transpose();
    const double div = g.trace();
    Eigen::Matrix2d stress = tc.mu * (g + g.transpose());
    stress(0, 0) += (tc.eta - 2.0 / 3.0 * tc.mu) * div;
    stress(1, 1) += (tc.eta - 2.0 / 3.0 * tc.mu) * div;
    out.G21.col(c) << stress(0, 0), stress(0, 1), stress(1, 1);
    out.G22.col(c) << rho * ux[c] * ux[c], rho * ux[c] * uy[c], rho * uy[c] * uy[c];

    out.G4.col(c) = rho_dev * f.gradient(mesh.cell_center.col(c));
    out.G1[c] = B / (eps * eps) * sigma_lift[c];
  }

  out.V_face = face_normal_flux(mesh, out.V);
  const HelmholtzParts parts = helmholtz_project(mesh, solver, out.V_face);
  out.Phi = parts.potential;
  out.V_solenoidal = parts.solenoidal;
  out.V_gradient = parts.gradient;
  return out;
}

// --- test battery -------------------------------------------------------------

std::vector<SpaceTimeTest> make_test_battery(double r0, double r1, double t_end, int count) {
  std::vector<SpaceTimeTest> battery;
  const double rc = 0.5 * (r0 + r1);
  const double w = 0.30 * (r1 - r0);

  for (int k = 0; k < count; ++k) {
    const double ang = 2.0 * 3.14159265358979324 * k / count + 0.2;
    const Eigen::Vector2d xp(rc * std::cos(ang), rc * std::sin(ang));
    const Eigen::Vector2d xm(rc * std::cos(ang + 3.14159265358979324),
                             rc * std::sin(ang + 3.14159265358979324));
    // difference of two Gaussians: mean-zero up to exponentially small tails
    auto b = [xp, xm, w](const Eigen::Vector2d& x) {
      return std::exp(-(x - xp).squaredNorm() / (2.0 * w * w)) -
             std::exp(-(x - xm).squaredNorm() / (2.0 * w * w));
    };
    auto grad_b = [xp, xm, w](const Eigen::Vector2d& x) -> Eigen::Vector2d {
      const Eigen::Vector2d dp = x - xp, dm = x - xm;
      return -dp / (w * w) * std::exp(-dp.squaredNorm() / (2.0 * w * w)) +
             dm / (w * w) * std::exp(-dm.squaredNorm() / (2.0 * w * w));
    };
    const int mode = k % 3;
    auto tau = [t_end, mode](double t) {
      const double s = t / t_end;
      if (s >= 1.0) return 0.0;
      switch (mode) {
        case 0: return (1.0 - s * s) * (1.0 - s * s);
        case 1: return (1.0 - s) * (1.0 - s) * (1.0 - s);
        default: return std::cos(2.0 * s) * (1.0 - s) * (1.0 - s);
      }
    };
    auto dtau = [t_end, mode](double t) {
      const double s = t / t_end;
      if (s >= 1.0) return 0.0;
      switch (mode) {
        case 0: return -4.0 * s * (1.0 - s * s) / t_end;
        case 1: return -3.0 * (1.0 - s) * (1.0 - s) / t_end;
        default:
          return (-2.0 * std::sin(2.0 * s) * (1.0 - s) * (1.0 - s) -
                  2.0 * std::cos(2.0 * s) * (1.0 - s)) /
                 t_end;
      }
    };
    battery.push_back({tau, dtau, b, grad_b});
  }
  return battery;
}

WeakResidualReport acoustic_weak_residual(const std::vector<AcousticData>& frames,
                                          const std::vector<double>& times, double eps,
                                          double omega, const std::vector<SpaceTimeTest>& tests,
                                          const Mesh& mesh, const NeumannOperator& op,
                                          const NeumannSolver& solver) {
  if (frames.size() != times.size() || frames.size() < 2)
    throw std::invalid_argument("acoustic_weak_residual: need matching frames and times");
  const int n = mesh.n_cells();

  WeakResidualReport rep;
  for (const auto& test : tests) {
    // spatial profiles at cell centers
    Eigen::ArrayXd b(n);
    VecField gb(2, n);
    for (int c = 0; c < n; ++c) {
      const Eigen::Vector2d x = mesh.cell_center.col(c);
      b[c] = test.b(x);
      gb.col(c) = test.grad_b(x);
    }
    // exact discrete mean-zero for the inverse Laplacian
    b -= (b * mesh.cell_volume).sum() / mesh.cell_volume.sum();
    // w = Delta^{-1} b : K w = -M b
    const Eigen::ArrayXd w = solver.solve(-(b * mesh.cell_volume));
    const VecField gw = green_gauss_gradient(mesh, w);
    const HessianField hw = hessian_logical(mesh, w);

    // spatial integrals per frame
    const size_t nt = frames.size();
    Eigen::ArrayXd s_b(nt), gphi_gb(nt), h_gb(nt), phi_b(nt), g1_b(nt), g3_b(nt), g4_gw(nt),
        g2_hw(nt);
    for (size_t k = 0; k < nt; ++k) {
      const AcousticData& a = frames[k];
      const VecField gphi = green_gauss_gradient(mesh, a.Phi);
      double i_sb = 0, i_gg = 0, i_hgb = 0, i_pb = 0, i_g1 = 0, i_g3 = 0, i_g4 = 0, i_g2 = 0;
      for (int c = 0; c < n; ++c) {
        const double vol = mesh.cell_volume[c];
        i_sb += a.S[c] * b[c] * vol;
        i_gg += gphi.col(c).dot(gb.col(c)) * vol;
        i_hgb += (a.H1.col(c) + a.H2.col(c)).dot(gb.col(c)) * vol;
        i_pb += a.Phi[c] * b[c] * vol;
        i_g1 += a.G1[c] * b[c] * vol;
        i_g3 += a.G3[c] * b[c] * vol;
        i_g4 += a.G4.col(c).dot(gw.col(c)) * vol;
        if (hw.valid[c]) {
          const double hxx = hw.h(c, 0), hxy = hw.h(c, 1), hyy = hw.h(c, 2);
          const auto s21 = a.G21.col(c);
          const auto s22 = a.G22.col(c);
          i_g2 += ((s21[0] + s22[0]) * hxx + 2.0 * (s21[1] + s22[1]) * hxy +
                   (s21[2] + s22[2]) * hyy) *
                  vol;
        }
      }
      s_b[k] = i_sb;
      gphi_gb[k] = i_gg;
      h_gb[k] = i_hgb;
      phi_b[k] = i_pb;
      g1_b[k] = i_g1;
      g3_b[k] = i_g3;
      g4_gw[k] = i_g4;
      g2_hw[k] = i_g2;
    }

    auto time_integral = [&](const Eigen::ArrayXd& vals, auto weight) {
      double acc = 0.0;
      for (size_t k = 0; k + 1 < nt; ++k) {
        const double dt = times[k + 1] - times[k];
        acc += 0.5 * dt * (vals[k] * weight(times[k]) + vals[k + 1] * weight(times[k + 1]));
      }
      return acc;
    };

    // first identity: eps int <S, dtau b> + omega int tau grad Phi . grad b
    //                = eps S(0) tau(0) b + eps int tau (H1+H2) . grad b
    const double lhs1 = eps * time_integral(s_b, [&](double t) { return test.dtau(t); }) +
                        omega * time_integral(gphi_gb, [&](double t) { return test.tau(t); });
    const double rhs1 = eps * s_b[0] * test.tau(times[0]) +
                        eps * time_integral(h_gb, [&](double t) { return test.tau(t); });
    const double scale1 =
        std::abs(lhs1) + std::abs(rhs1) +
        omega * std::abs(time_integral(gphi_gb, [&](double t) { return test.tau(t); })) + 1e-300;
    rep.residual_s.push_back(std::abs(lhs1 - rhs1) / scale1);

    // second identity, tested with phi -> tau b and the inverse Laplacian:
    // eps int Phi dtau b - int tau <S, b>
    //   = -eps Phi(0) tau(0) b
    //     - eps int tau { <G1,b> + (G21+G22):hess w + <G3,b> + G4 . grad w }
    const double lhs2 = eps * time_integral(phi_b, [&](double t) { return test.dtau(t); }) -
                        time_integral(s_b, [&](double t) { return test.tau(t); });
    const double rhs2 =
        -eps * phi_b[0] * test.tau(times[0]) -
        eps * (time_integral(g1_b, [&](double t) { return test.tau(t); }) +
               time_integral(g2_hw, [&](double t) { return test.tau(t); }) +
               time_integral(g3_b, [&](double t) { return test.tau(t); }) +
               time_integral(g4_gw, [&](double t) { return test.tau(t); }));
    const double scale2 = std::abs(lhs2) + std::abs(rhs2) +
                          std::abs(time_integral(s_b, [&](double t) { return test.tau(t); })) +
                          1e-300;
    rep.residual_phi.push_back(std::abs(lhs2 - rhs2) / scale2);
  }
  for (double v : rep.residual_s) rep.max_s = std::max(rep.max_s, v);
  for (double v : rep.residual_phi) rep.max_phi = std::max(rep.max_phi, v);
  (void)op;
  return rep;
}

// --- Duhamel ------------------------------------------------------------------

namespace {

// composite Simpson weights on a uniform grid (trapezoid fallbacks where the
// interval count is awkward)
Eigen::ArrayXd quadrature_weights(int n_samples, double dt) {
  Eigen::ArrayXd w = Eigen::ArrayXd::Zero(n_samples);
  if (n_samples == 1) return w;
  if (n_samples == 2) {
    w << 0.5 * dt, 0.5 * dt;
    return w;
  }
  const int intervals = n_samples - 1;
  int start = 0;
  if (intervals % 2 == 1) {  // trapezoid on the first interval
    w[0] += 0.5 * dt;
    w[1] += 0.5 * dt;
    start = 1;
  }
  for (int k = start; k + 2 <= n_samples - 1; k += 2) {
    w[k] += dt / 3.0;
    w[k + 1] += 4.0 * dt / 3.0;
    w[k + 2] += dt / 3.0;
  }
  return w;
}

constexpr double kKernelTol = 1e-10;

void require_mean_zero(const SpectralDecomp& d, const Eigen::ArrayXd& f, const char* who) {
  const double total = (f * d.weights).sum();
  const double scale = (d.norm(f) + 1e-300) * std::sqrt(d.weights.sum());
  if (std::abs(total) / scale > 1e-8)
    throw CalculusError(std::string(who) + ": input must be mean-zero (kernel-deflated)");
}

}  // namespace

WaveState duhamel_evolve(const Eigen::ArrayXd& phi0, const Eigen::ArrayXd& s0,
                         const DuhamelForcing& forcing, double t, double eps, double omega,
                         const SpectralDecomp& decomp) {
  require_mean_zero(decomp, phi0, "duhamel_evolve(phi0)");
  require_mean_zero(decomp, s0, "duhamel_evolve(s0)");
  if (!forcing.f1.empty() && forcing.f1.size() != forcing.f2.size())
    throw std::invalid_argument("duhamel_evolve: forcing sample mismatch");

  const int m = decomp.count();
  const Eigen::VectorXd cphi = decomp.coefficients(phi0);
  const Eigen::VectorXd cs = decomp.coefficients(s0);

  const int nt = static_cast<int>(forcing.f1.size());
  Eigen::MatrixXd f1c, f2c;
  Eigen::ArrayXd qw;
  if (nt > 1) {
    f1c.resize(m, nt);
    f2c.resize(m, nt);
    for (int k = 0; k < nt; ++k) {
      f1c.col(k) = decomp.coefficients(forcing.f1[k]);
      f2c.col(k) = decomp.coefficients(forcing.f2[k]);
    }
    qw = quadrature_weights(nt, t / (nt - 1));
  }

  Eigen::VectorXd phi_out = Eigen::VectorXd::Zero(m);
  Eigen::VectorXd s_out = Eigen::VectorXd::Zero(m);
  for (int j = 0; j < m; ++j) {
    const double lam = decomp.eigenvalues[j];
    if (lam < kKernelTol) continue;
    const double root = std::sqrt(omega * lam);
    const double nu = root / eps;
    const double c = std::cos(nu * t), s = std::sin(nu * t);
    phi_out[j] = c * cphi[j] - s / root * cs[j];
    s_out[j] = root * s * cphi[j] + c * cs[j];
    if (nt > 1) {
      double acc_phi = 0.0, acc_s = 0.0;
      for (int k = 0; k < nt; ++k) {
        const double tau = t * k / (nt - 1);
        const double ck = std::cos(nu * (t - tau)), sk = std::sin(nu * (t - tau));
        acc_phi += qw[k] * (ck * f2c(j, k) - sk / root * f1c(j, k));
        acc_s += qw[k] * (root * sk * f2c(j, k) + ck * f1c(j, k));
      }
      phi_out[j] += forcing.prefactor * acc_phi;
      s_out[j] += forcing.prefactor * acc_s;
    }
  }

  WaveState out;
  out.phi = (decomp.eigenvectors * phi_out).array();
  out.s = (decomp.eigenvectors * s_out).array();
  return out;
}

double wave_energy(const WaveState& w, double omega, const SpectralDecomp& decomp) {
  const Eigen::VectorXd cphi = decomp.coefficients(w.phi);
  const Eigen::VectorXd cs = decomp.coefficients(w.s);
  double e = 0.0;
  for (int j = 0; j < decomp.count(); ++j) {
    const double lam = decomp.eigenvalues[j];
    if (lam < kKernelTol) continue;
    e += cphi[j] * cphi[j] + cs[j] * cs[j] / (omega * lam);
  }
  return e;
}

// --- decay --------------------------------------------------------------------

DecayResult decay_experiment(const Eigen::ArrayXd& psi, const Eigen::ArrayXd& phi,
                             const std::function<double(double)>& g, double eps, double t_horizon,
                             const SpectralDecomp& decomp, double domain_diameter, double omega) {
  const Eigen::VectorXd cpsi = decomp.coefficients(psi);
  const Eigen::VectorXd cphi = decomp.coefficients(phi);

  std::vector<double> amp, freq;
  double nu_max = 0.0;
  for (int j = 0; j < decomp.count(); ++j) {
    const double lam = decomp.eigenvalues[j];
    if (lam < kKernelTol) continue;
    const double b = cpsi[j] * g(lam) * cphi[j];
    if (b == 0.0) continue;
    amp.push_back(b);
    const double nu = std::sqrt(omega * lam) / eps;
    freq.push_back(nu);
    nu_max = std::max(nu_max, nu);
  }

  DecayResult res;
  res.eps = eps;
  res.t_horizon = t_horizon;
  res.t_cross = eps * domain_diameter / std::sqrt(omega);
  res.contaminated = t_horizon > res.t_cross;

  if (amp.empty()) {
    res.value = 0.0;
    return res;
  }
  // high-order quadrature resolving the fastest phase
  const int per_cycle = 24;
  const double cycles = t_horizon * nu_max / (2.0 * 3.14159265358979324);
  int n = std::max(257, 2 * static_cast<int>(per_cycle * cycles / 2) + 1);
  n = std::min(n, 200001);
  const double dt = t_horizon / (n - 1);
  const Eigen::ArrayXd w = [&] {
    Eigen::ArrayXd ww = Eigen::ArrayXd::Zero(n);
    for (int k = 0; k + 2 <= n - 1; k += 2) {
      ww[k] += dt / 3.0;
      ww[k + 1] += 4.0 * dt / 3.0;
      ww[k + 2] += dt / 3.0;
    }
    return ww;
  }();

  double integral = 0.0;
  for (int k = 0; k < n; ++k) {
    const double t = k * dt;
    double re = 0.0, im = 0.0;
    for (size_t j = 0; j < amp.size(); ++j) {
      re += amp[j] * std::cos(freq[j] * t);
      im += amp[j] * std::sin(freq[j] * t);
    }
    integral += w[k] * (re * re + im * im);
  }
  res.value = integral;
  return res;
}

DecayFit loglog_fit(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 3)
    throw std::invalid_argument("loglog_fit: need at least three points");
  const int n = static_cast<int>(x.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (int i = 0; i < n; ++i) {
    const double lx = std::log(x[i]), ly = std::log(y[i]);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
  }
  const double slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
  const double intercept = (sy - slope * sx) / n;
  double rss = 0.0;
  for (int i = 0; i < n; ++i) {
    const double r = std::log(y[i]) - slope * std::log(x[i]) - intercept;
    rss += r * r;
  }
  return {slope, std::sqrt(rss / n)};
}

DecayFit decay_rate_sweep(const std::vector<DecayResult>& results) {
  std::vector<double> e, v;
  for (const auto& r : results) {
    e.push_back(r.eps);
    v.push_back(r.value);
  }
  return loglog_fit(e, v);
}

Snapshot wave_snapshot(const Mesh& mesh, const WaveState& w, double t) {
  Snapshot snap;
  snap.rho = w.s;
  snap.u = green_gauss_gradient(mesh, w.phi);
  snap.theta = w.phi;
  snap.t = t;
  return snap;
}

Eigen::ArrayXd broadband_field(const SpectralDecomp& decomp, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss;
  Eigen::VectorXd coeff = Eigen::VectorXd::Zero(decomp.count());
  for (int j = 0; j < decomp.count(); ++j) {
    if (decomp.eigenvalues[j] < kKernelTol) continue;
    coeff[j] = gauss(rng);
  }
  Eigen::ArrayXd f = (decomp.eigenvectors * coeff).array();
  const double nrm = decomp.norm(f);
  if (nrm > 0.0) f /= nrm;
  return f;
}

}  // namespace limitlab
