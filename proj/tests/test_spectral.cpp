#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <random>

#include "limitlab/errors.hpp"
#include "limitlab/geometry.hpp"
#include "limitlab/spectral.hpp"
#include "spectral_oracles.hpp"

using namespace limitlab;

namespace {

DomainSpec annulus12(int nr, int nphi) {
  // uniform-grading annulus 1 < r < 2 (outer radius capped at 2)
  DomainSpec s;
  s.eps = 0.5;
  s.delta = 1.5;
  s.beta = 0.2;
  s.r_obs = 1.0;
  s.amp = 0.0;
  s.cap_radius = 2.0;
  s.nr = nr;
  s.nphi = nphi;
  s.grading = RadialGrading::Uniform;
  return s;
}

Eigen::ArrayXd random_field(int n, unsigned seed) {
  std::mt19937 rng(seed);
  std::normal_distribution<double> g;
  Eigen::ArrayXd f(n);
  for (int i = 0; i < n; ++i) f[i] = g(rng);
  return f;
}

}  // namespace

TEST_CASE("hand-assembled 3-cell Neumann stencil") {
  const Mesh m = interval_mesh(3, 3.0);  // h = 1
  const NeumannOperator op = assemble(m);
  Eigen::MatrixXd k = Eigen::MatrixXd(op.stiffness);
  Eigen::MatrixXd expect(3, 3);
  expect << 1, -1, 0, -1, 2, -1, 0, -1, 1;
  CHECK((k - expect).cwiseAbs().maxCoeff() < 1e-14);

  // kernel, symmetry, row sums
  const Eigen::ArrayXd ones = Eigen::ArrayXd::Ones(3);
  CHECK(op.apply(ones).abs().maxCoeff() < 1e-14);
  CHECK((k - k.transpose()).cwiseAbs().maxCoeff() == 0.0);
  CHECK(k.rowwise().sum().cwiseAbs().maxCoeff() < 1e-14);
}

TEST_CASE("interval spectrum approximates j^2 on [0, pi]") {
  const Mesh m = interval_mesh(200, 3.14159265358979324);
  const NeumannOperator op = assemble(m);
  const SpectralDecomp d = eigendecompose(op, 6);
  CHECK(std::abs(d.eigenvalues[0]) < 1e-10);
  for (int j = 1; j <= 5; ++j)
    CHECK(d.eigenvalues[j] == doctest::Approx(j * j).epsilon(5e-4 * j * j));
  // lowest eigenvector is the constant
  const Eigen::ArrayXd psi0 = d.mode(0);
  CHECK((psi0 - psi0[0]).abs().maxCoeff() < 1e-8 * std::abs(psi0[0]));
}

TEST_CASE("annulus eigenvalues match the radial shooting oracle at order >= 1.8") {
  const auto exact = oracles::annulus_neumann_eigenvalues(1.0, 2.0, 42.0);
  REQUIRE(exact.size() >= 11);

  auto worst_err = [&](int nr, int nphi) {
    const Mesh m = build_domain(annulus12(nr, nphi));
    const NeumannOperator op = assemble(m);
    const SpectralDecomp d = eigendecompose(op, 11);
    double worst = 0.0;
    for (int j = 1; j <= 10; ++j)
      worst = std::max(worst, std::abs(d.eigenvalues[j] - exact[j]) / exact[j]);
    return worst;
  };
  const double e1 = worst_err(12, 24);
  const double e2 = worst_err(24, 48);
  const double order = std::log2(e1 / e2);
  CHECK(order >= 1.8);
  CHECK(e2 < 0.05);
}

TEST_CASE("eigendecompose invariants: residuals and orthonormality") {
  const Mesh m = build_domain(annulus12(16, 32));
  const NeumannOperator op = assemble(m);
  const SpectralDecomp d = eigendecompose(op, 20);
  CHECK(d.eigenvalues[0] < 1e-10);
  const double lam_max = d.eigenvalues.maxCoeff();
  for (int j = 0; j < d.count(); ++j) {
    const Eigen::ArrayXd r = op.apply(d.mode(j)) - d.eigenvalues[j] * d.mode(j);
    CHECK(op.norm(r) < 1e-8 * std::max(1.0, lam_max));
  }
  for (int i = 0; i < d.count(); ++i)
    for (int j = 0; j <= i; ++j) {
      const double dot = d.dot(d.mode(i), d.mode(j));
      CHECK(std::abs(dot - (i == j ? 1.0 : 0.0)) < 1e-10);
    }
}

TEST_CASE("Lanczos path agrees with the dense path") {
  const Mesh m = build_domain(annulus12(16, 32));  // 512 cells
  const NeumannOperator op = assemble(m);
  const SpectralDecomp dense = eigendecompose(op, 15);
  EigOptions opt;
  opt.dense_threshold = 1;  // force the iterative path
  const SpectralDecomp lz = eigendecompose(op, 15, opt);
  for (int j = 0; j < 15; ++j)
    CHECK(lz.eigenvalues[j] == doctest::Approx(dense.eigenvalues[j]).epsilon(1e-9).scale(1.0));
}

TEST_CASE("spectral calculus: identity, semigroup, homomorphism, kernel policy") {
  const Mesh m = build_domain(annulus12(16, 32));
  const NeumannOperator op = assemble(m);
  const int n = op.n();
  const SpectralDecomp d = eigendecompose(op, n);  // full basis

  Eigen::ArrayXd f = random_field(n, 42);
  Eigen::ArrayXd f0 = f - (f * d.weights).sum() / d.weights.sum();  // mean-zero

  // G == 1 reproduces the mean-zero part
  const Eigen::ArrayXd ident = apply_function(d, [](double) { return 1.0; }, f);
  CHECK(d.norm(ident - f0) < 1e-9 * d.norm(f0));

  // half power applied twice equals the full operator
  const Eigen::ArrayXd half_twice = apply_power(d, 0.5, apply_power(d, 0.5, f0));
  const Eigen::ArrayXd full = apply_power(d, 1.0, f0);
  CHECK(d.norm(half_twice - full) < 1e-9 * d.norm(full));

  // inverse then forward restores the field
  const Eigen::ArrayXd inv = apply_power(d, 1.0, apply_power(d, -1.0, f0));
  CHECK(d.norm(inv - f0) < 1e-8 * d.norm(f0));

  // homomorphism G1*G2
  auto g1 = [](double l) { return std::exp(-0.3 * l); };
  auto g2 = [](double l) { return 1.0 / (1.0 + l); };
  const Eigen::ArrayXd prod =
      apply_function(d, [&](double l) { return g1(l) * g2(l); }, f0);
  const Eigen::ArrayXd comp = apply_function(d, g1, apply_function(d, g2, f0));
  CHECK(d.norm(prod - comp) < 1e-9 * d.norm(f0));

  // G supported below lambda_1 annihilates the mean-zero complement
  const double l1 = d.eigenvalues[1];
  const Eigen::ArrayXd low = apply_function(
      d, [l1](double l) { return l < 0.5 * l1 ? 1.0 : 0.0; }, f0);
  CHECK(d.norm(low) < 1e-12);

  // negative powers demand mean-zero input
  CHECK_THROWS_AS(apply_power(d, -0.5, f), CalculusError);
}

TEST_CASE("Helmholtz projector algebra on face fields") {
  const Mesh m = build_domain(annulus12(24, 48));
  const NeumannOperator op = assemble(m);
  const NeumannSolver solver(op);

  auto face_dot = [&](const FaceField& a, const FaceField& b) {
    double s = 0.0;
    for (int f = 0; f < m.n_faces(); ++f) s += a[f] * b[f] * m.face_area[f] * m.face_delta[f];
    return s;
  };

  // pure gradient with zero normal trace is annihilated
  Eigen::ArrayXd phi(m.n_cells());
  for (int c = 0; c < m.n_cells(); ++c) {
    const Eigen::Vector2d x = m.cell_center.col(c);
    phi[c] = std::sin(x.x()) * std::cos(0.7 * x.y());
  }
  const FaceField grad_phi = face_gradient(m, phi);
  const HelmholtzParts pg = helmholtz_project(m, solver, grad_phi);
  CHECK(std::sqrt(face_dot(pg.solenoidal, pg.solenoidal)) <
        1e-9 * std::sqrt(face_dot(grad_phi, grad_phi)));

  // random flux field: idempotence, orthogonality, Pythagoras, exact div
  std::mt19937 rng(7);
  std::normal_distribution<double> g;
  FaceField v(m.n_faces());
  for (int f = 0; f < m.n_faces(); ++f) v[f] = m.is_boundary(f) ? 0.0 : g(rng);

  const HelmholtzParts p1 = helmholtz_project(m, solver, v);
  CHECK(face_divergence(m, p1.solenoidal).abs().maxCoeff() < 1e-10);
  for (int f = 0; f < m.n_faces(); ++f)
    if (m.is_boundary(f)) CHECK(p1.solenoidal[f] == 0.0);

  const HelmholtzParts p2 = helmholtz_project(m, solver, p1.solenoidal);
  double diff = 0.0;
  for (int f = 0; f < m.n_faces(); ++f)
    diff = std::max(diff, std::abs(p2.solenoidal[f] - p1.solenoidal[f]));
  CHECK(diff < 1e-9);

  CHECK(std::abs(face_dot(p1.solenoidal, p1.gradient)) <
        1e-9 * face_dot(v, v));
  CHECK(face_dot(p1.solenoidal, p1.solenoidal) + face_dot(p1.gradient, p1.gradient) ==
        doctest::Approx(face_dot(v, v)).epsilon(1e-9));

  // potential is mean-zero
  CHECK(std::abs((p1.potential * m.cell_volume).sum()) < 1e-9 * m.total_volume());
}

TEST_CASE("Neumann solver rejects incompatible sources") {
  const Mesh m = build_domain(annulus12(8, 16));
  const NeumannOperator op = assemble(m);
  const NeumannSolver solver(op);
  Eigen::ArrayXd rhs = Eigen::ArrayXd::Ones(m.n_cells());
  CHECK_THROWS_AS(solver.solve(rhs), LinearSolveError);

  rhs = random_field(m.n_cells(), 3);
  rhs -= rhs.mean();
  const Eigen::ArrayXd x = solver.solve(rhs);
  const Eigen::VectorXd back = op.stiffness * x.matrix();
  CHECK((back.array() - rhs).abs().maxCoeff() < 1e-9 * rhs.abs().maxCoeff());
}

TEST_CASE("single eigenfunction satisfies the Laplacian consistency of the probe") {
  const Mesh m = build_domain(annulus12(20, 40));
  const NeumannOperator op = assemble(m);
  const SpectralDecomp d = eigendecompose(op, 5);
  const Eigen::ArrayXd psi = d.mode(3);
  const Eigen::ArrayXd lap = op.apply(psi);
  CHECK(op.norm(lap) == doctest::Approx(d.eigenvalues[3] * op.norm(psi)).epsilon(1e-8));
}

TEST_CASE("elliptic constant probe: smooth family stable, rugose family scales") {
  std::vector<Mesh> smooth_meshes, rugose_meshes;
  std::vector<double> eps_list = {0.25, 0.125, 0.0625};
  const double beta = 0.2;
  for (double e : eps_list) {
    DomainSpec s;
    s.eps = e;
    s.delta = 1.5;
    s.beta = beta;
    s.cap_radius = 4.0;
    s.nr = 28;
    s.nphi = 56;
    s.amp = 0.0;
    smooth_meshes.push_back(build_domain(s));
    s.amp = 0.25;
    s.freq = 3.0;
    rugose_meshes.push_back(build_domain(s));
  }
  const EllipticProbeReport smooth = elliptic_constant_probe(smooth_meshes, eps_list, beta);
  const EllipticProbeReport rough = elliptic_constant_probe(rugose_meshes, eps_list, beta);

  // smooth family: the raw constant stays within a modest band
  double c2_lo = 1e300, c2_hi = 0.0;
  for (const auto& p : smooth.points) {
    c2_lo = std::min(c2_lo, std::max(p.c2, 1e-6));
    c2_hi = std::max(c2_hi, p.c2);
  }
  CHECK(c2_hi / c2_lo < 3.0);

  // rugose family: the scaled constant c2 eps^{2 beta} stays within a factor 3
  double s_lo = 1e300, s_hi = 0.0;
  for (const auto& p : rough.points) {
    s_lo = std::min(s_lo, p.c2_scaled);
    s_hi = std::max(s_hi, p.c2_scaled);
  }
  CHECK(s_hi / std::max(s_lo, 1e-12) < 3.0);
}

TEST_CASE("eigenpair cache round-trips and rejects stale headers") {
  const Mesh m = build_domain(annulus12(10, 20));
  const NeumannOperator op = assemble(m);
  const SpectralDecomp d = eigendecompose(op, 8);
  const std::string path =
      (std::filesystem::temp_directory_path() / "limitlab_eig_cache.bin").string();
  save_decomp(path, d, mesh_hash(m), 8, 1e-8);
  auto loaded = try_load_decomp(path, mesh_hash(m), 8, 1e-8);
  REQUIRE(loaded.has_value());
  CHECK((loaded->eigenvalues - d.eigenvalues).abs().maxCoeff() == 0.0);
  CHECK((loaded->eigenvectors - d.eigenvectors).cwiseAbs().maxCoeff() == 0.0);
  CHECK(!try_load_decomp(path, mesh_hash(m) + 1, 8, 1e-8).has_value());
  CHECK(!try_load_decomp(path, mesh_hash(m), 9, 1e-8).has_value());
  std::filesystem::remove(path);
}
