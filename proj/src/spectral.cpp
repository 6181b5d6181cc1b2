#include "limitlab/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <random>

#include <Eigen/Dense>
#include <Eigen/SparseCholesky>
#include <Eigen/SparseLU>

#include "limitlab/errors.hpp"

namespace limitlab {

Eigen::ArrayXd NeumannOperator::apply(const Eigen::ArrayXd& x) const {
  Eigen::VectorXd y = stiffness * x.matrix();
  return y.array() / weights;
}

NeumannOperator assemble(const Mesh& mesh) {
  NeumannOperator op;
  op.weights = mesh.cell_volume;
  if ((mesh.cell_volume <= 0.0).any()) throw SpectralError("assemble: degenerate cells");

  std::vector<Eigen::Triplet<double>> trip;
  trip.reserve(4 * mesh.n_faces());
  for (int f = 0; f < mesh.n_faces(); ++f) {
    if (mesh.is_boundary(f)) continue;  // zero-flux Neumann faces
    const int l = mesh.face_cell_l[f], r = mesh.face_cell_r[f];
    const double t = mesh.face_area[f] / mesh.face_delta[f];
    trip.emplace_back(l, l, t);
    trip.emplace_back(r, r, t);
    trip.emplace_back(l, r, -t);
    trip.emplace_back(r, l, -t);
  }
  op.stiffness.resize(mesh.n_cells(), mesh.n_cells());
  op.stiffness.setFromTriplets(trip.begin(), trip.end());
  op.stiffness.makeCompressed();
  return op;
}

Eigen::VectorXd SpectralDecomp::coefficients(const Eigen::ArrayXd& x) const {
  return eigenvectors.transpose() * (x * weights).matrix();
}

namespace {

SpectralDecomp dense_eig(const NeumannOperator& op, int k) {
  const int n = op.n();
  const Eigen::ArrayXd sqw = op.weights.sqrt();
  Eigen::MatrixXd a = Eigen::MatrixXd(op.stiffness);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) a(i, j) /= sqw[i] * sqw[j];
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(a);
  if (es.info() != Eigen::Success) throw SpectralError("dense eigendecomposition failed");

  SpectralDecomp d;
  d.weights = op.weights;
  d.eigenvalues = es.eigenvalues().head(k).array();
  d.eigenvectors.resize(n, k);
  for (int j = 0; j < k; ++j)
    d.eigenvectors.col(j) = es.eigenvectors().col(j).array() / sqw;
  return d;
}

// Shift-invert Lanczos with full reorthogonalization in the weighted inner
// product; targets the k smallest eigenvalues.
SpectralDecomp lanczos_eig(const NeumannOperator& op, int k, const EigOptions& opt) {
  const int n = op.n();
  const Eigen::VectorXd w = op.weights.matrix();

  const double mean_lambda = [&] {
    double tr = 0.0;
    for (int i = 0; i < n; ++i) tr += op.stiffness.coeff(i, i) / w[i];
    return tr / n;
  }();
  const double sigma = -1e-6 * mean_lambda;

  Eigen::SparseMatrix<double> shifted = op.stiffness;
  for (int i = 0; i < n; ++i) shifted.coeffRef(i, i) -= sigma * w[i];
  Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> ldlt(shifted);
  if (ldlt.info() != Eigen::Success)
    throw SpectralError("lanczos: factorization of the shifted operator failed");

  const int m = std::min(n, k + opt.lanczos_extra);
  Eigen::MatrixXd v(n, m);
  Eigen::VectorXd alpha(m), beta(m);

  std::mt19937_64 rng(0x5eedcafe1234ull);
  std::normal_distribution<double> gauss;
  Eigen::VectorXd q(n);
  for (int i = 0; i < n; ++i) q[i] = gauss(rng);
  q /= std::sqrt(q.dot(w.asDiagonal() * q));

  Eigen::VectorXd prev = Eigen::VectorXd::Zero(n);
  double beta_prev = 0.0;
  int steps = m;
  for (int it = 0; it < m; ++it) {
    v.col(it) = q;
    Eigen::VectorXd y = ldlt.solve(w.asDiagonal() * q);
    alpha[it] = y.dot(w.asDiagonal() * q);
    y -= alpha[it] * q + beta_prev * prev;
    // full reorthogonalization, twice for safety
    for (int pass = 0; pass < 2; ++pass) {
      const Eigen::VectorXd proj = v.leftCols(it + 1).transpose() * (w.asDiagonal() * y);
      y -= v.leftCols(it + 1) * proj;
    }
    const double b = std::sqrt(std::max(0.0, y.dot(w.asDiagonal() * y)));
    beta[it] = b;
    if (b < 1e-14) {
      steps = it + 1;
      break;
    }
    prev = q;
    q = y / b;
    beta_prev = b;
  }

  Eigen::MatrixXd t = Eigen::MatrixXd::Zero(steps, steps);
  for (int i = 0; i < steps; ++i) {
    t(i, i) = alpha[i];
    if (i + 1 < steps) t(i, i + 1) = t(i + 1, i) = beta[i];
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(t);
  // largest theta of the inverted operator <-> smallest lambda
  if (steps < k) throw SpectralError("lanczos: Krylov space too small");

  SpectralDecomp d;
  d.weights = op.weights;
  d.eigenvalues.resize(k);
  d.eigenvectors.resize(n, k);
  for (int j = 0; j < k; ++j) {
    const int idx = steps - 1 - j;  // descending theta
    const double theta = es.eigenvalues()[idx];
    d.eigenvalues[j] = sigma + 1.0 / theta;
    Eigen::VectorXd x = v.leftCols(steps) * es.eigenvectors().col(idx);
    x /= std::sqrt(x.dot(w.asDiagonal() * x));
    d.eigenvectors.col(j) = x;
  }
  return d;
}

void check_residuals(const NeumannOperator& op, SpectralDecomp& d, double tol) {
  const double scale = std::max(d.eigenvalues.maxCoeff(), 1.0);
  double worst = 0.0;
  for (int j = 0; j < d.count(); ++j) {
    const Eigen::ArrayXd psi = d.mode(j);
    const Eigen::ArrayXd r = op.apply(psi) - d.eigenvalues[j] * psi;
    worst = std::max(worst, op.norm(r));
  }
  if (worst > tol * scale)
    throw SpectralError("eigendecompose: residual " + std::to_string(worst) +
                        " exceeds tolerance " + std::to_string(tol * scale));
}

}  // namespace

SpectralDecomp eigendecompose(const NeumannOperator& op, int k, const EigOptions& opt) {
  if (k < 1 || k > op.n())
    throw SpectralError("eigendecompose: k must be between 1 and the cell count");
  if (op.n() <= opt.dense_threshold || k >= op.n() - 1) {
    SpectralDecomp d = dense_eig(op, k);
    check_residuals(op, d, opt.residual_tol);
    return d;
  }
  try {
    SpectralDecomp d = lanczos_eig(op, k, opt);
    check_residuals(op, d, opt.residual_tol);
    return d;
  } catch (const SpectralError&) {
    EigOptions wider = opt;
    wider.lanczos_extra = 3 * opt.lanczos_extra + 60;
    SpectralDecomp d = lanczos_eig(op, k, wider);
    check_residuals(op, d, opt.residual_tol);
    return d;
  }
}

namespace {
constexpr double kKernelTol = 1e-10;
}

Eigen::ArrayXd apply_function(const SpectralDecomp& d, const std::function<double(double)>& G,
                              const Eigen::ArrayXd& f) {
  if (f.size() != d.eigenvectors.rows())
    throw CalculusError("apply_function: field does not live on the operator's mesh");
  const Eigen::VectorXd c = d.coefficients(f);
  Eigen::VectorXd out = Eigen::VectorXd::Zero(f.size());
  for (int j = 0; j < d.count(); ++j) {
    if (d.eigenvalues[j] < kKernelTol) continue;  // kernel deflated
    out += G(d.eigenvalues[j]) * c[j] * d.eigenvectors.col(j);
  }
  return out.array();
}

Eigen::ArrayXd apply_power(const SpectralDecomp& d, double power, const Eigen::ArrayXd& f) {
  if (power < 0.0) {
    const double total = (f * d.weights).sum();
    const double scale = d.norm(f) + 1e-300;
    if (std::abs(total) / (std::sqrt(d.weights.sum()) * scale) > 1e-8)
      throw CalculusError("apply_power: negative power requires a mean-zero field");
  }
  return apply_function(d, [power](double l) { return std::pow(l, power); }, f);
}

// --- Neumann solve with mean constraint ------------------------------------

struct NeumannSolver::Impl {
  Eigen::SparseLU<Eigen::SparseMatrix<double>> lu;
  Eigen::ArrayXd weights;
  int n = 0;
};

NeumannSolver::NeumannSolver(const NeumannOperator& op) : impl_(new Impl) {
  const int n = op.n();
  impl_->n = n;
  impl_->weights = op.weights;
  std::vector<Eigen::Triplet<double>> trip;
  trip.reserve(op.stiffness.nonZeros() + 2 * n);
  for (int outer = 0; outer < op.stiffness.outerSize(); ++outer)
    for (Eigen::SparseMatrix<double>::InnerIterator it(op.stiffness, outer); it; ++it)
      trip.emplace_back(static_cast<int>(it.row()), static_cast<int>(it.col()), it.value());
  for (int i = 0; i < n; ++i) {
    trip.emplace_back(i, n, op.weights[i]);
    trip.emplace_back(n, i, op.weights[i]);
  }
  Eigen::SparseMatrix<double> aug(n + 1, n + 1);
  aug.setFromTriplets(trip.begin(), trip.end());
  aug.makeCompressed();
  impl_->lu.compute(aug);
  if (impl_->lu.info() != Eigen::Success)
    throw LinearSolveError("NeumannSolver: factorization failed");
}

NeumannSolver::~NeumannSolver() = default;
NeumannSolver::NeumannSolver(NeumannSolver&&) noexcept = default;

Eigen::ArrayXd NeumannSolver::solve(const Eigen::ArrayXd& rhs) const {
  const int n = impl_->n;
  if (rhs.size() != n) throw LinearSolveError("NeumannSolver: rhs size mismatch");
  // compatibility: net source must vanish up to roundoff of the rhs scale
  const double imbalance = rhs.sum();
  const double l1 = rhs.abs().sum();
  if (std::abs(imbalance) > 1e-6 * l1 + 1e-13 * n)
    throw LinearSolveError("NeumannSolver: incompatible right-hand side (net source " +
                           std::to_string(imbalance) + ")");
  Eigen::VectorXd b(n + 1);
  b.head(n) = rhs.matrix();
  b[n] = 0.0;
  const Eigen::VectorXd x = impl_->lu.solve(b);
  if (impl_->lu.info() != Eigen::Success) throw LinearSolveError("NeumannSolver: solve failed");
  return x.head(n).array();
}

// --- Helmholtz decomposition ------------------------------------------------

HelmholtzParts helmholtz_project(const Mesh& mesh, const NeumannSolver& solver,
                                 const FaceField& v) {
  if (v.size() != mesh.n_faces())
    throw std::invalid_argument("helmholtz_project: face field size mismatch");
  // net interior outflux per cell; K phi = -rhs gives the Neumann potential
  Eigen::ArrayXd rhs = Eigen::ArrayXd::Zero(mesh.n_cells());
  for (int f = 0; f < mesh.n_faces(); ++f) {
    if (mesh.is_boundary(f)) continue;
    const double flux = v[f] * mesh.face_area[f];
    rhs[mesh.face_cell_l[f]] += flux;
    rhs[mesh.face_cell_r[f]] -= flux;
  }
  HelmholtzParts parts;
  parts.potential = solver.solve(-rhs);
  parts.gradient = face_gradient(mesh, parts.potential);
  for (int f = 0; f < mesh.n_faces(); ++f)
    if (mesh.is_boundary(f)) parts.gradient[f] = v[f];
  parts.solenoidal = v - parts.gradient;
  return parts;
}

HelmholtzParts helmholtz_project(const Mesh& mesh, const FaceField& v) {
  const NeumannOperator op = assemble(mesh);
  const NeumannSolver solver(op);
  return helmholtz_project(mesh, solver, v);
}

// --- logical-grid Hessian ---------------------------------------------------

HessianField hessian_logical(const Mesh& mesh, const Eigen::ArrayXd& f) {
  const int ni = mesh.ni, nj = mesh.nj;
  if (ni * nj != mesh.n_cells())
    throw std::invalid_argument("hessian_logical: mesh lacks logical structure");
  HessianField out;
  out.h = Eigen::MatrixX3d::Zero(mesh.n_cells(), 3);
  out.valid.assign(mesh.n_cells(), false);

  auto wrap = [](int a, int n) { return (a % n + n) % n; };
  auto at = [&](int i, int j, const Eigen::ArrayXd& g) {
    return g[mesh.cell_index(wrap(i, ni), wrap(j, nj))];
  };
  auto pos = [&](int i, int j) -> Eigen::Vector2d {
    Eigen::Vector2d p = mesh.cell_center.col(mesh.cell_index(wrap(i, ni), wrap(j, nj)));
    if (mesh.periodic_i) {
      if (i < 0) p -= mesh.translation_i;
      if (i >= ni) p += mesh.translation_i;
    }
    if (mesh.periodic_j) {
      if (j < 0) p -= mesh.translation_j;
      if (j >= nj) p += mesh.translation_j;
    }
    return p;
  };

  for (int i = 0; i < ni; ++i) {
    for (int j = 0; j < nj; ++j) {
      const bool has_i = mesh.periodic_i || (i > 0 && i < ni - 1);
      const bool has_j = mesh.periodic_j || (j > 0 && j < nj - 1);
      if (!has_i || !has_j) continue;

      // logical first derivatives (unit spacing)
      auto d1 = [&](auto value) {
        Eigen::Vector2d g;
        g[0] = 0.5 * (value(i + 1, j) - value(i - 1, j));
        g[1] = 0.5 * (value(i, j + 1) - value(i, j - 1));
        return g;
      };
      auto d2 = [&](auto value) {
        Eigen::Matrix2d h;
        h(0, 0) = value(i + 1, j) - 2.0 * value(i, j) + value(i - 1, j);
        h(1, 1) = value(i, j + 1) - 2.0 * value(i, j) + value(i, j - 1);
        h(0, 1) = h(1, 0) = 0.25 * (value(i + 1, j + 1) - value(i + 1, j - 1) -
                                    value(i - 1, j + 1) + value(i - 1, j - 1));
        return h;
      };

      auto fx = [&](int a, int b) { return pos(a, b).x(); };
      auto fy = [&](int a, int b) { return pos(a, b).y(); };
      auto fv = [&](int a, int b) { return at(a, b, f); };

      const Eigen::Vector2d gx = d1(fx), gy = d1(fy);
      Eigen::Matrix2d jac;  // [x_xi x_eta; y_xi y_eta]
      jac << gx[0], gx[1], gy[0], gy[1];
      const double det = jac.determinant();
      if (std::abs(det) < 1e-14) continue;

      const Eigen::Vector2d f_logical = d1(fv);
      const Eigen::Vector2d f_phys = jac.transpose().inverse() * f_logical;

      const Eigen::Matrix2d hx = d2(fx), hy = d2(fy), hf = d2(fv);
      const Eigen::Matrix2d corrected = hf - f_phys.x() * hx - f_phys.y() * hy;
      const Eigen::Matrix2d jinv = jac.inverse();
      Eigen::Matrix2d hess = jinv.transpose() * corrected * jinv;
      hess = 0.5 * (hess + hess.transpose());

      const int c = mesh.cell_index(i, j);
      out.h(c, 0) = hess(0, 0);
      out.h(c, 1) = hess(0, 1);
      out.h(c, 2) = hess(1, 1);
      out.valid[c] = true;
    }
  }
  return out;
}

// --- elliptic constant probe --------------------------------------------------

namespace {

// nonnegative least squares for h ~ c1 a + c2 b
std::pair<double, double> nnls2(const Eigen::VectorXd& a, const Eigen::VectorXd& b,
                                const Eigen::VectorXd& h) {
  const double aa = a.dot(a), ab = a.dot(b), bb = b.dot(b);
  const double ah = a.dot(h), bh = b.dot(h);
  auto residual = [&](double c1, double c2) {
    return (c1 * a + c2 * b - h).squaredNorm();
  };
  const double det = aa * bb - ab * ab;
  double best1 = 0.0, best2 = 0.0, best = residual(0.0, 0.0);
  if (std::abs(det) > 1e-300) {
    const double c1 = (bb * ah - ab * bh) / det;
    const double c2 = (aa * bh - ab * ah) / det;
    if (c1 >= 0.0 && c2 >= 0.0 && residual(c1, c2) < best) {
      best1 = c1;
      best2 = c2;
      best = residual(c1, c2);
    }
  }
  if (aa > 0.0) {
    const double c1 = std::max(0.0, ah / aa);
    if (residual(c1, 0.0) < best) {
      best1 = c1;
      best2 = 0.0;
      best = residual(c1, 0.0);
    }
  }
  if (bb > 0.0) {
    const double c2 = std::max(0.0, bh / bb);
    if (residual(0.0, c2) < best) {
      best1 = 0.0;
      best2 = c2;
      best = residual(0.0, c2);
    }
  }
  return {best1, best2};
}

}  // namespace

EllipticProbeReport elliptic_constant_probe(const std::vector<Mesh>& meshes,
                                            const std::vector<double>& eps, double beta,
                                            int n_modes) {
  if (meshes.size() != eps.size() || meshes.empty())
    throw std::invalid_argument("elliptic_constant_probe: mesh/eps mismatch");
  EllipticProbeReport rep;
  for (size_t k = 0; k < meshes.size(); ++k) {
    const Mesh& mesh = meshes[k];
    const NeumannOperator op = assemble(mesh);
    const SpectralDecomp d = eigendecompose(op, n_modes + 1);

    std::vector<Eigen::ArrayXd> tests;
    for (int j = 1; j <= n_modes; ++j) tests.push_back(d.mode(j));
    // interior bumps on the mid annulus
    double r_lo = 1e300, r_hi = 0.0;
    for (int c = 0; c < mesh.n_cells(); ++c) {
      const double r = mesh.cell_center.col(c).norm();
      r_lo = std::min(r_lo, r);
      r_hi = std::max(r_hi, r);
    }
    const double rc = 0.5 * (r_lo + r_hi), w = 0.18 * (r_hi - r_lo);
    for (int bidx = 0; bidx < 4; ++bidx) {
      const double ang = 1.57079632679489662 * bidx + 0.3;
      const Eigen::Vector2d x0(rc * std::cos(ang), rc * std::sin(ang));
      Eigen::ArrayXd bump(mesh.n_cells());
      for (int c = 0; c < mesh.n_cells(); ++c) {
        const double r2 = (mesh.cell_center.col(c) - x0).squaredNorm() / (w * w);
        bump[c] = r2 < 1.0 ? std::exp(-1.0 / (1.0 - r2)) : 0.0;
      }
      tests.push_back(bump);
    }

    Eigen::VectorXd av(tests.size()), bv(tests.size()), hv(tests.size());
    for (size_t t = 0; t < tests.size(); ++t) {
      const Eigen::ArrayXd& phi = tests[t];
      const HessianField hess = hessian_logical(mesh, phi);
      const Eigen::ArrayXd lap = op.apply(phi);
      double h2 = 0.0, a2 = 0.0, b2 = 0.0;
      for (int c = 0; c < mesh.n_cells(); ++c) {
        if (!hess.valid[c]) continue;
        const double vol = mesh.cell_volume[c];
        h2 += (hess.h(c, 0) * hess.h(c, 0) + 2.0 * hess.h(c, 1) * hess.h(c, 1) +
               hess.h(c, 2) * hess.h(c, 2)) *
              vol;
        a2 += lap[c] * lap[c] * vol;
        b2 += phi[c] * phi[c] * vol;
      }
      hv[t] = std::sqrt(h2);
      av[t] = std::sqrt(a2);
      bv[t] = std::sqrt(b2);
    }
    const auto [c1, c2] = nnls2(av, bv, hv);
    rep.points.push_back({eps[k], c1, c2, c2 * std::pow(eps[k], 2.0 * beta)});
  }
  return rep;
}

// --- eigenpair cache ----------------------------------------------------------

namespace {
constexpr std::uint64_t kCacheMagic = 0x4c4c535045434331ull;  // "LLSPECC1"
}

void save_decomp(const std::string& path, const SpectralDecomp& d, std::uint64_t mesh_hash,
                 int k, double tol) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("save_decomp: cannot open " + path);
  auto put = [&](const void* p, size_t n) { out.write(static_cast<const char*>(p), n); };
  const std::int32_t n = static_cast<std::int32_t>(d.eigenvectors.rows());
  const std::int32_t kk = static_cast<std::int32_t>(k);
  put(&kCacheMagic, 8);
  put(&mesh_hash, 8);
  put(&kk, 4);
  put(&n, 4);
  put(&tol, 8);
  put(d.eigenvalues.data(), sizeof(double) * k);
  put(d.eigenvectors.data(), sizeof(double) * n * k);
  put(d.weights.data(), sizeof(double) * n);
}

std::optional<SpectralDecomp> try_load_decomp(const std::string& path, std::uint64_t mesh_hash,
                                              int k, double tol) {
  std::ifstream in(path, std::ios::binary);
  if (!in) return std::nullopt;
  auto get = [&](void* p, size_t n) { in.read(static_cast<char*>(p), n); };
  std::uint64_t magic = 0, hash = 0;
  std::int32_t kk = 0, n = 0;
  double t = 0.0;
  get(&magic, 8);
  get(&hash, 8);
  get(&kk, 4);
  get(&n, 4);
  get(&t, 8);
  if (!in || magic != kCacheMagic || hash != mesh_hash || kk != k || t != tol)
    return std::nullopt;
  SpectralDecomp d;
  d.eigenvalues.resize(kk);
  d.eigenvectors.resize(n, kk);
  d.weights.resize(n);
  get(d.eigenvalues.data(), sizeof(double) * kk);
  get(d.eigenvectors.data(), sizeof(double) * n * kk);
  get(d.weights.data(), sizeof(double) * n);
  if (!in) return std::nullopt;
  return d;
}

}  // namespace limitlab
