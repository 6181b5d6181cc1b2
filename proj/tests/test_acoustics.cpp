#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <filesystem>

#include "acoustic_oracles.hpp"
#include "limitlab/acoustics.hpp"
#include "limitlab/errors.hpp"
#include "limitlab/geometry.hpp"

using namespace limitlab;

namespace {

DomainSpec annulus(double eps, int nr = 20, int nphi = 40) {
  DomainSpec s;
  s.eps = eps;
  s.delta = 1.5;
  s.beta = 0.2;
  s.amp = 0.1;
  s.freq = 4.0;
  s.cap_radius = 4.0;
  s.nr = nr;
  s.nphi = nphi;
  return s;
}

}  // namespace

TEST_CASE("acoustic data assembly: static, uniform, and linearized states") {
  const double eps = 0.25;
  const Mesh m = build_domain(annulus(eps));
  const NeumannOperator op = assemble(m);
  const NeumannSolver solver(op);
  FluidModel model;
  const LinearizedCoeffs coeffs = linearized_coeffs(model.thermo);
  PotentialField f;
  f.kind = PotentialField::Kind::Gaussian;
  f.amplitude = 0.4;
  f.width = 1.5;

  // static state: u factors vanish and S is O(eps) by the A, B relations
  const StaticState st = static_state(f, eps, model.thermo, m);
  NSFState s;
  s.rho = st.rho_tilde;
  s.theta = Eigen::ArrayXd::Constant(m.n_cells(), 1.0);
  s.u = VecField::Zero(2, m.n_cells());
  const Eigen::ArrayXd sigma0 = Eigen::ArrayXd::Zero(m.n_cells());
  const AcousticData stat = assemble_acoustic_data(s, sigma0, eps, f, coeffs, model, m, solver);
  CHECK(stat.V.cwiseAbs().maxCoeff() == 0.0);
  CHECK(stat.H1.cwiseAbs().maxCoeff() == 0.0);
  CHECK(stat.G22.cwiseAbs().maxCoeff() == 0.0);
  CHECK(stat.S.abs().maxCoeff() < 0.2 * eps);

  const AcousticData stat_half = [&] {
    const double e2 = 0.5 * eps;
    const StaticState st2 = static_state(f, e2, model.thermo, m);
    NSFState s2;
    s2.rho = st2.rho_tilde;
    s2.theta = Eigen::ArrayXd::Constant(m.n_cells(), 1.0);
    s2.u = VecField::Zero(2, m.n_cells());
    return assemble_acoustic_data(s2, sigma0, e2, f, coeffs, model, m, solver);
  }();
  CHECK(stat_half.S.abs().maxCoeff() < 0.6 * stat.S.abs().maxCoeff());

  // uniform density and temperature: only the -rho_bar F term survives
  NSFState uni = s;
  uni.rho.setConstant(1.0);
  for (int c = 0; c < m.n_cells(); ++c) uni.u.col(c) = Eigen::Vector2d(0.1, -0.05);
  const AcousticData u =
      assemble_acoustic_data(uni, sigma0, eps, f, coeffs, model, m, solver);
  for (int c = 0; c < m.n_cells(); ++c) {
    CHECK(u.S[c] == doctest::Approx(-1.0 * f.value(m.cell_center.col(c))).epsilon(1e-12));
    CHECK((u.V.col(c) - Eigen::Vector2d(0.1, -0.05)).norm() < 1e-14);
  }

  // linearization: S + rho_bar F -> dp_drho r + dp_dtheta Theta at rate O(eps)
  Eigen::ArrayXd r_field(m.n_cells()), th_field(m.n_cells());
  for (int c = 0; c < m.n_cells(); ++c) {
    const Eigen::Vector2d x = m.cell_center.col(c);
    r_field[c] = 0.3 * std::sin(x.x());
    th_field[c] = 0.2 * std::cos(0.8 * x.y());
  }
  const double pr = pressure_rho(1.0, 1.0, model.thermo);
  const double pt = pressure_theta(1.0, 1.0, model.thermo);
  auto linearization_error = [&](double e) {
    NSFState ls;
    ls.rho = 1.0 + e * r_field;
    ls.theta = 1.0 + e * th_field;
    ls.u = VecField::Zero(2, m.n_cells());
    const AcousticData a = assemble_acoustic_data(ls, sigma0, e, f, coeffs, model, m, solver);
    double worst = 0.0;
    for (int c = 0; c < m.n_cells(); ++c) {
      const double expect = pr * r_field[c] + pt * th_field[c];
      const double got = a.S[c] + 1.0 * f.value(m.cell_center.col(c));
      worst = std::max(worst, std::abs(got - expect));
    }
    return worst;
  };
  const double e1 = linearization_error(0.05);
  const double e2 = linearization_error(0.025);
  CHECK(e1 / e2 == doctest::Approx(2.0).epsilon(0.2));

  // Helmholtz consistency of the momentum decomposition
  const FaceField recomposed = u.V_solenoidal + u.V_gradient;
  CHECK((recomposed - u.V_face).abs().maxCoeff() < 1e-12);
  CHECK(face_divergence(m, u.V_solenoidal).abs().maxCoeff() < 1e-10);

  Eigen::ArrayXd bad_sigma(3);
  CHECK_THROWS_AS(assemble_acoustic_data(uni, bad_sigma, eps, f, coeffs, model, m, solver),
                  std::invalid_argument);
}

TEST_CASE("Duhamel propagator: phases, unitarity, group property") {
  const Mesh m = build_domain(annulus(0.25, 16, 32));
  const NeumannOperator op = assemble(m);
  const SpectralDecomp d = eigendecompose(op, 40);
  const double eps = 0.25, omega = 4.489898989898990;
  const DuhamelForcing none;

  // single eigenmode rotates with the exact phase
  const int k = 7;
  const Eigen::ArrayXd psi = d.mode(k);
  const Eigen::ArrayXd zero = Eigen::ArrayXd::Zero(m.n_cells());
  const double t = 0.37;
  const WaveState w = duhamel_evolve(psi, zero, none, t, eps, omega, d);
  const double phase = std::sqrt(omega * d.eigenvalues[k]) * t / eps;
  CHECK(d.norm(w.phi - std::cos(phase) * psi) < 1e-10);

  // unitarity over a long phase: t/eps = 100
  Eigen::ArrayXd phi0 = broadband_field(d, 99);
  Eigen::ArrayXd s0 = broadband_field(d, 100);
  const double e_before = wave_energy({phi0, s0}, omega, d);
  const WaveState wl = duhamel_evolve(phi0, s0, none, 100.0 * eps, eps, omega, d);
  const double e_after = wave_energy(wl, omega, d);
  CHECK(std::abs(e_after - e_before) / e_before < 1e-10);

  // group property
  const WaveState a = duhamel_evolve(phi0, s0, none, 0.13, eps, omega, d);
  const WaveState b = duhamel_evolve(a.phi, a.s, none, 0.29, eps, omega, d);
  const WaveState c = duhamel_evolve(phi0, s0, none, 0.42, eps, omega, d);
  CHECK(d.norm(b.phi - c.phi) < 1e-9 * std::sqrt(e_before));
  CHECK(d.norm(b.s - c.s) < 1e-9 * std::sqrt(e_before));

  // non-mean-zero input is rejected
  CHECK_THROWS_AS(
      duhamel_evolve(phi0 + 1.0, s0, none, 0.1, eps, omega, d), CalculusError);
}

TEST_CASE("Duhamel with forcing agrees with direct RK2 stepping at O(dt^2)") {
  const Mesh m = build_domain(annulus(0.25, 14, 28));
  const NeumannOperator op = assemble(m);
  const int n = m.n_cells();
  const SpectralDecomp d = eigendecompose(op, n);  // full basis
  const double eps = 0.25, omega = 2.0, pref = 1.7;

  const Eigen::ArrayXd phi0 = broadband_field(d, 5);
  const Eigen::ArrayXd s0 = broadband_field(d, 6);
  const Eigen::ArrayXd fa = broadband_field(d, 7);
  const Eigen::ArrayXd fb = broadband_field(d, 8);
  auto f1 = [&](double t) -> Eigen::ArrayXd { return std::sin(3.0 * t) * fa; };
  auto f2 = [&](double t) -> Eigen::ArrayXd { return std::cos(2.0 * t) * fb; };

  const double t_end = 0.2;
  DuhamelForcing forcing;
  forcing.prefactor = pref;
  const int nt = 161;
  for (int k = 0; k < nt; ++k) {
    const double t = t_end * k / (nt - 1);
    forcing.f1.push_back(f1(t));
    forcing.f2.push_back(f2(t));
  }
  const WaveState exact = duhamel_evolve(phi0, s0, forcing, t_end, eps, omega, d);

  auto rk2_diff = [&](double dt) {
    const auto w = oracles::acoustic_rk2(phi0, s0, t_end, dt, eps, omega, op, f1, f2, pref);
    return std::sqrt(std::pow(d.norm(w.phi - exact.phi), 2) +
                     std::pow(d.norm(w.s - exact.s), 2));
  };
  const double err1 = rk2_diff(1e-3);
  const double err2 = rk2_diff(5e-4);
  CHECK(err1 / err2 >= 3.5);
  CHECK(err1 / err2 <= 4.5);
}

TEST_CASE("decay experiment: spectral support, point mass, synthetic fits") {
  const Mesh m = build_domain(annulus(0.25, 16, 32));
  const NeumannOperator op = assemble(m);
  const SpectralDecomp d = eigendecompose(op, 30);
  const double diam = m.diameter();

  Eigen::ArrayXd phi(m.n_cells());
  for (int c = 0; c < m.n_cells(); ++c)
    phi[c] = std::exp(-(m.cell_center.col(c) - Eigen::Vector2d(2.0, 0.0)).squaredNorm());

  // G vanishing on the support of Psi: I = 0
  const Eigen::ArrayXd psi = d.mode(3);
  const double l3 = d.eigenvalues[3];
  auto g_disjoint = [l3](double l) { return std::abs(l - l3) < 1e-6 ? 0.0 : 1.0; };
  const DecayResult zero =
      decay_experiment(psi, phi, g_disjoint, 0.25, 0.1, d, diam);
  CHECK(zero.value < 1e-30);  // other modes couple only through roundoff

  // single point mass: no decay, I = T |G(l) <psi, phi>|^2
  auto g_one = [](double) { return 1.0; };
  const double t_horizon = 0.08;
  const DecayResult point = decay_experiment(psi, phi, g_one, 0.25, t_horizon, d, diam);
  const double b = d.dot(psi, phi);
  CHECK(point.value == doctest::Approx(t_horizon * b * b).epsilon(1e-6));
  CHECK(point.t_cross == doctest::Approx(0.25 * diam));
  CHECK(!point.contaminated);
  const DecayResult late = decay_experiment(psi, phi, g_one, 0.25, 10.0, d, diam);
  CHECK(late.contaminated);

  // synthetic slope fits
  std::vector<double> eps_list = {0.25, 0.125, 0.0625, 0.03125};
  std::vector<double> linear, flat;
  for (double e : eps_list) {
    linear.push_back(3.0 * e);
    flat.push_back(0.7);
  }
  CHECK(loglog_fit(eps_list, linear).slope == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(loglog_fit(eps_list, flat).slope == doctest::Approx(0.0).epsilon(1e-10));
  CHECK_THROWS_AS(loglog_fit({1.0, 0.5}, {1.0, 0.5}), std::invalid_argument);
}

TEST_CASE("wave states export through the shared snapshot format") {
  const Mesh m = build_domain(annulus(0.25, 10, 20));
  const NeumannOperator op = assemble(m);
  const SpectralDecomp d = eigendecompose(op, 6);
  WaveState w{d.mode(2), 0.3 * d.mode(3)};
  const Snapshot snap = wave_snapshot(m, w, 1.25);
  CHECK(snap.t == 1.25);
  CHECK((snap.theta - w.phi).abs().maxCoeff() == 0.0);
  CHECK((snap.rho - w.s).abs().maxCoeff() == 0.0);
  const std::string path =
      (std::filesystem::temp_directory_path() / "limitlab_wave_snap.csv").string();
  write_snapshot(path, snap);
  const Snapshot back = read_snapshot(path);
  CHECK((back.theta - snap.theta).abs().maxCoeff() == 0.0);
  CHECK((back.u - snap.u).cwiseAbs().maxCoeff() == 0.0);
  std::filesystem::remove(path);
}

TEST_CASE("weak residuals vanish for zero fields and shrink under h, dt refinement") {
  const double eps = 0.25;
  const double omega = 4.489898989898990;
  const auto battery = make_test_battery(1.8, 3.2, 0.3, 4);

  auto zero_tensors = [](AcousticData& a, int n) {
    a.H1 = VecField::Zero(2, n);
    a.H2 = VecField::Zero(2, n);
    a.G1 = Eigen::ArrayXd::Zero(n);
    a.G3 = Eigen::ArrayXd::Zero(n);
    a.G21 = Eigen::Matrix3Xd::Zero(3, n);
    a.G22 = Eigen::Matrix3Xd::Zero(3, n);
    a.G4 = VecField::Zero(2, n);
  };

  // manufactured solution: a single eigenmode under the free propagator
  auto standing_wave_residual = [&](int nr, int nphi, int n_frames) {
    const Mesh m = build_domain(annulus(eps, nr, nphi));
    const NeumannOperator op = assemble(m);
    const NeumannSolver solver(op);
    const SpectralDecomp d = eigendecompose(op, 8);
    const int k = 5;
    const Eigen::ArrayXd psi = d.mode(k);
    const double root = std::sqrt(omega * d.eigenvalues[k]);
    std::vector<AcousticData> frames;
    std::vector<double> times;
    for (int j = 0; j <= n_frames; ++j) {
      const double t = 0.3 * j / n_frames;
      const double nu = root / eps;
      AcousticData a;
      a.S = root * std::sin(nu * t) * psi;
      a.Phi = std::cos(nu * t) * psi;
      zero_tensors(a, m.n_cells());
      frames.push_back(std::move(a));
      times.push_back(t);
    }
    return acoustic_weak_residual(frames, times, eps, omega, battery, m, op, solver).max_s;
  };

  const double coarse = standing_wave_residual(14, 28, 24);
  const double fine = standing_wave_residual(28, 56, 48);
  CHECK(coarse < 0.2);
  CHECK(coarse / fine > 2.0);  // O(h^2 + dt^2) under joint halving

  // zero fields: identically zero residuals
  const Mesh m = build_domain(annulus(eps, 12, 24));
  const NeumannOperator op = assemble(m);
  const NeumannSolver solver(op);
  std::vector<AcousticData> zero_frames(2);
  for (auto& a : zero_frames) {
    a.S = Eigen::ArrayXd::Zero(m.n_cells());
    a.Phi = Eigen::ArrayXd::Zero(m.n_cells());
    zero_tensors(a, m.n_cells());
  }
  const WeakResidualReport zero =
      acoustic_weak_residual(zero_frames, {0.0, 0.3}, eps, omega, battery, m, op, solver);
  CHECK(zero.max_s == 0.0);
  CHECK(zero.max_phi == 0.0);

  CHECK_THROWS_AS(
      acoustic_weak_residual(zero_frames, {0.0}, eps, omega, battery, m, op, solver),
      std::invalid_argument);
}
