#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "limitlab/errors.hpp"
#include "limitlab/report_io.hpp"
#include "limitlab/snapshot_io.hpp"
#include "limitlab/sweep.hpp"

using namespace limitlab;

namespace {

std::filesystem::path temp_dir(const std::string& tag) {
  auto p = std::filesystem::temp_directory_path() / ("limitlab_" + tag);
  std::filesystem::remove_all(p);
  std::filesystem::create_directories(p);
  return p;
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

SweepConfig smoke_config(const std::string& outdir) {
  SweepConfig cfg;
  cfg.output_dir = outdir;
  cfg.eps_list = {0.5, 0.25};
  cfg.domain.delta = 1.5;
  cfg.domain.beta = 0.2;
  cfg.domain.amp = 0.1;
  cfg.domain.freq = 3.0;
  cfg.domain.cap_radius = 4.0;
  cfg.domain.nr = 14;
  cfg.domain.nphi = 28;
  cfg.transp.mu0 = cfg.transp.eta0 = cfg.transp.kappa0 = 0.05;
  cfg.force.kind = PotentialField::Kind::Gaussian;
  cfg.force.amplitude = 0.2;
  cfg.force.width = 1.5;
  cfg.rho1_profile.kind = ScalarProfile::Kind::AngularSine;
  cfg.rho1_profile.amplitude = 0.04;
  cfg.rho1_profile.r_center = 2.2;
  cfg.rho1_profile.width = 0.7;
  cfg.theta1_profile = cfg.rho1_profile;
  cfg.theta1_profile.wavenumber = 2;
  cfg.u0_profile.kind = VelocityProfile::Kind::RandomBumps;
  cfg.u0_profile.amplitude = 0.05;
  cfg.u0_profile.r_center = 2.2;
  cfg.u0_profile.width = 0.4;
  cfg.u0_profile.spread = 0.5;
  cfg.t_end = 0.1;
  cfg.frames = 4;
  cfg.k_region = {1.7, 2.5, 6, 24};
  cfg.decay_eps = {};  // no decay stage in the smoke run
  cfg.write_snapshots = false;
  return cfg;
}

}  // namespace

TEST_CASE("config validation mirrors the domain hypotheses") {
  SweepConfig cfg = smoke_config("unused");
  CHECK_NOTHROW(cfg.validate());

  SweepConfig bad = cfg;
  bad.domain.beta = 0.3;
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
  bad = cfg;
  bad.domain.delta = 0.8;
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
  bad = cfg;
  bad.eps_list = {0.25, 0.5};
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
  bad = cfg;
  bad.k_region.r1 = 50.0;  // leaves the eps = 1/2 domain
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
}

TEST_CASE("config file loading, canonical hash") {
  const auto dir = temp_dir("cfg");
  const auto path = dir / "config.json";
  {
    std::ofstream out(path);
    out << R"json({
      "schema": 1,
      "output_dir": ")json" << (dir / "out").string() << R"json(",
      "seed": 42,
      "eps_list": [0.5, 0.25],
      "domain": {"delta": 1.5, "beta": 0.2, "amp": 0.1, "freq": 3.0,
                 "cap_radius": 4.0, "nr": 14, "nphi": 28, "grading": "log"},
      "transport": {"mu0": 0.05, "eta0": 0.05, "kappa0": 0.05},
      "force": {"kind": "gaussian", "amplitude": 0.2, "width": 1.5},
      "time": {"t_end": 0.1, "frames": 4},
      "k_region": {"r0": 1.7, "r1": 2.5, "nr": 6, "nphi": 24},
      "decay": {"eps_list": []}
    })json";
  }
  const SweepConfig cfg = load_config(path.string());
  CHECK(cfg.seed == 42);
  CHECK(cfg.eps_list.size() == 2);
  CHECK(cfg.domain.nr == 14);
  CHECK(cfg.transp.mu0 == 0.05);

  const std::uint64_t h1 = config_hash(cfg);
  SweepConfig cfg2 = cfg;
  CHECK(config_hash(cfg2) == h1);
  cfg2.seed = 43;
  CHECK(config_hash(cfg2) != h1);

  // schema mismatch is rejected
  {
    std::ofstream out(path);
    out << R"json({"schema": 99})json";
  }
  CHECK_THROWS_AS(load_config(path.string()), std::invalid_argument);
  std::filesystem::remove_all(dir);
}

TEST_CASE("K grid remap reproduces smooth fields") {
  DomainSpec spec;
  spec.eps = 0.25;
  spec.delta = 1.5;
  spec.beta = 0.2;
  spec.amp = 0.05;
  spec.cap_radius = 6.0;
  spec.nr = 40;
  spec.nphi = 80;
  const Mesh m = build_domain(spec);

  const KRegion region{2.0, 4.0, 10, 40};
  const KGrid grid = make_kgrid(region);
  // K grid covers the annulus area exactly
  CHECK(grid.volume.sum() ==
        doctest::Approx(3.14159265358979324 * (16.0 - 4.0)).epsilon(1e-12));

  Eigen::ArrayXd f(m.n_cells());
  for (int c = 0; c < m.n_cells(); ++c) f[c] = m.cell_center(0, c) + 2.0 * m.cell_center(1, c);
  const Eigen::ArrayXd fk = remap_scalar(spec, f, grid);
  double worst = 0.0;
  for (int c = 0; c < grid.n(); ++c) {
    const double expect = grid.center(0, c) + 2.0 * grid.center(1, c);
    worst = std::max(worst, std::abs(fk[c] - expect));
  }
  CHECK(worst < 0.25);  // piecewise-constant sampling error at this resolution

  for (int c = 0; c < grid.n(); ++c) {
    const int cell = locate_cell(spec, grid.center.col(c));
    REQUIRE(cell >= 0);
    CHECK((m.cell_center.col(cell) - grid.center.col(c)).norm() < 0.5);
  }
  CHECK(locate_cell(spec, Eigen::Vector2d(0.1, 0.0)) == -1);
  CHECK(locate_cell(spec, Eigen::Vector2d(100.0, 0.0)) == -1);
}

TEST_CASE("metric self-comparison vanishes and the static state gives only M1") {
  // OB reference on the smooth annulus
  DomainSpec spec;
  spec.eps = 0.25;
  spec.delta = 1.5;
  spec.beta = 0.2;
  spec.amp = 0.0;
  spec.cap_radius = 4.0;
  spec.nr = 16;
  spec.nphi = 32;
  const Mesh m = build_domain(spec);
  const NeumannOperator op = assemble(m);
  const NeumannSolver solver(op);
  const ThermoParams par;
  const LinearizedCoeffs coeffs = linearized_coeffs(par);
  FluidModel model;
  model.transp.mu0 = model.transp.eta0 = model.transp.kappa0 = 0.05;

  VecField u0(2, m.n_cells());
  Eigen::ArrayXd theta0(m.n_cells());
  for (int c = 0; c < m.n_cells(); ++c) {
    const Eigen::Vector2d x = m.cell_center.col(c);
    const double r = x.norm();
    u0.col(c) = 0.05 * Eigen::Vector2d(-x.y() / r, x.x() / r) *
                std::exp(-2.0 * (r - 2.3) * (r - 2.3));
    theta0[c] = 0.05 * std::sin(x.x());
  }
  PotentialField f;
  OBConfig obcfg;
  const OBState ob0 = ob_init(u0, theta0, m, solver, coeffs, par);
  const double eps = 0.25;
  const OBTrajectory ob_traj = run_ob(ob0, 0.05, 3, f, coeffs, model, m, solver, obcfg);

  // lift the OB trajectory to an NSF trajectory on the same mesh
  NSFTrajectory lift;
  lift.eps = eps;
  for (const auto& fr : ob_traj.frames) {
    NSFState s;
    s.rho = Eigen::ArrayXd::Constant(m.n_cells(), par.rho_bar);
    s.u = fr.U;
    s.theta = par.theta_bar + eps * fr.theta;
    s.t = fr.t;
    lift.frames.push_back(s);
  }

  const KRegion region{1.8, 2.9, 6, 24};
  const MetricRecord rec =
      convergence_metrics(lift, spec, m, ob_traj, spec, m, eps, region, par, coeffs);
  CHECK(rec.m1 == 0.0);
  CHECK(rec.m2 == 0.0);
  CHECK(rec.m3 < 1e-14);
  CHECK(rec.m6 < 1e-14);
  // M4 reflects the cell-velocity divergence of the projected OB field itself
  double ob_div = 0.0;
  for (const auto& fr : ob_traj.frames) {
    const Eigen::ArrayXd d = face_divergence(m, face_normal_flux(m, fr.U));
    ob_div = std::max(ob_div, d.abs().maxCoeff());
  }
  const double k_area = 3.14159265358979324 * (2.9 * 2.9 - 1.8 * 1.8);
  CHECK(rec.m4 <= ob_div * std::sqrt(0.05 * k_area));

  // static-state trajectory vs OB at rest: only M1 is nonzero at O(eps)
  PotentialField grav;
  grav.kind = PotentialField::Kind::Gaussian;
  grav.amplitude = 0.4;
  grav.width = 1.5;
  const StaticState st = static_state(grav, eps, par, m);
  NSFTrajectory stat;
  stat.eps = eps;
  OBTrajectory rest;
  for (int k = 0; k <= 3; ++k) {
    NSFState s;
    s.rho = st.rho_tilde;
    s.u = VecField::Zero(2, m.n_cells());
    s.theta = Eigen::ArrayXd::Constant(m.n_cells(), par.theta_bar);
    s.t = 0.05 * k / 3.0;
    stat.frames.push_back(s);
    OBState o;
    o.U = VecField::Zero(2, m.n_cells());
    o.u_face = FaceField::Zero(m.n_faces());
    o.theta = Eigen::ArrayXd::Zero(m.n_cells());
    o.r = Eigen::ArrayXd::Zero(m.n_cells());
    o.t = s.t;
    rest.frames.push_back(o);
  }
  // shift the density so M5 measures the deviation from the static state
  NSFTrajectory shifted = stat;
  for (auto& fr : shifted.frames) fr.rho = fr.rho - st.rho_tilde + par.rho_bar;
  MetricRecord ms =
      convergence_metrics(shifted, spec, m, rest, spec, m, eps, region, par, coeffs);
  // M1 on the unshifted density
  MetricRecord m1_rec =
      convergence_metrics(stat, spec, m, rest, spec, m, eps, region, par, coeffs);
  CHECK(ms.m2 == 0.0);
  CHECK(ms.m3 == 0.0);
  CHECK(ms.m4 == 0.0);
  CHECK(ms.m5 == 0.0);
  CHECK(ms.m6 == 0.0);
  CHECK(m1_rec.m1 > 0.0);
  CHECK(m1_rec.m1 < 0.2 * eps);  // O(eps) static deviation on K
}

TEST_CASE("deterministic sweep: identical config gives identical CSV bytes") {
  const auto dir1 = temp_dir("det1");
  const auto dir2 = temp_dir("det2");
  SweepConfig cfg = smoke_config((dir1 / "out").string());

  const SweepReport r1 = run_sweep(cfg);
  emit_report(r1, cfg, cfg.output_dir, false);
  cfg.output_dir = (dir2 / "out").string();
  const SweepReport r2 = run_sweep(cfg);
  emit_report(r2, cfg, cfg.output_dir, false);

  CHECK(slurp(dir1 / "out" / "metrics.csv") == slurp(dir2 / "out" / "metrics.csv"));
  CHECK(slurp(dir1 / "out" / "monitors.csv") == slurp(dir2 / "out" / "monitors.csv"));
  CHECK(slurp(dir1 / "out" / "decay.csv") == slurp(dir2 / "out" / "decay.csv"));
  CHECK(!r1.per_eps.empty());
  CHECK_FALSE(r1.partial);
  std::filesystem::remove_all(dir1);
  std::filesystem::remove_all(dir2);
}

TEST_CASE("empty sweep emits headers only and exit code 2") {
  const auto dir = temp_dir("empty");
  SweepConfig cfg = smoke_config((dir / "out").string());
  cfg.eps_list = {};
  const SweepReport rep = run_sweep(cfg);
  const int code = emit_report(rep, cfg, cfg.output_dir, false);
  CHECK(code == 2);
  const std::string metrics = slurp(dir / "out" / "metrics.csv");
  CHECK(metrics.rfind("eps,M1", 0) == 0);
  CHECK(metrics.find('\n') == metrics.size() - 1);  // header only
  std::filesystem::remove_all(dir);
}

TEST_CASE("threshold evaluation: monotone metrics and exit codes") {
  SweepReport rep;
  AcceptanceThresholds thr;
  thr.monotone_metrics = {"M2"};
  thr.min_total_factor = 1.5;

  auto eps_result = [](double eps, double m2) {
    EpsResult r;
    r.eps = eps;
    r.metrics.m2 = m2;
    return r;
  };
  rep.per_eps = {eps_result(0.5, 1.0), eps_result(0.25, 0.5), eps_result(0.125, 0.3)};
  evaluate_checks(rep, thr);
  REQUIRE(rep.checks.size() == 1);
  CHECK(rep.checks[0].passed);

  rep.per_eps[2].metrics.m2 = 0.9;  // still decreasing but factor < 1.5
  rep.per_eps[1].metrics.m2 = 0.95;
  evaluate_checks(rep, thr);
  CHECK(!rep.checks[0].passed);

  rep.per_eps[1].metrics.m2 = 1.2;  // not monotone
  evaluate_checks(rep, thr);
  CHECK(!rep.checks[0].passed);

  const auto dir = temp_dir("codes");
  SweepConfig cfg = smoke_config((dir / "out").string());
  const int code = emit_report(rep, cfg, cfg.output_dir, false);
  CHECK(code == 1);
  CHECK(evaluate_report_dir(cfg.output_dir) == 1);
  std::filesystem::remove_all(dir);
}

TEST_CASE("snapshot round trip") {
  const auto dir = temp_dir("snap");
  Snapshot s;
  s.rho = Eigen::ArrayXd::LinSpaced(5, 1.0, 2.0);
  s.theta = Eigen::ArrayXd::LinSpaced(5, 0.5, 1.5);
  s.u.resize(2, 5);
  for (int c = 0; c < 5; ++c) s.u.col(c) = Eigen::Vector2d(0.1 * c, -0.2 * c);
  s.t = 0.75;
  const std::string path = (dir / "snap.csv").string();
  write_snapshot(path, s);
  const Snapshot back = read_snapshot(path);
  CHECK(back.t == s.t);
  CHECK((back.rho - s.rho).abs().maxCoeff() == 0.0);
  CHECK((back.u - s.u).cwiseAbs().maxCoeff() == 0.0);
  CHECK((back.theta - s.theta).abs().maxCoeff() == 0.0);
  std::filesystem::remove_all(dir);
}

TEST_CASE("thermo tabulation export") {
  const auto dir = temp_dir("tab");
  const std::string path = (dir / "table.csv").string();
  write_thermo_table(path, ThermoParams{}, TransportLaw{}, 0.1, 10.0, 5);
  std::ifstream in(path);
  std::string header;
  std::getline(in, header);
  CHECK(header == "rho,theta,p,e,s,mu,eta,kappa");
  int rows = 0;
  std::string line;
  while (std::getline(in, line))
    if (!line.empty()) ++rows;
  CHECK(rows == 25);
  std::filesystem::remove_all(dir);
}
