#pragma once

// Discrete Neumann Laplacian on a Mesh: two-point flux assembly,
// eigendecomposition (dense or shift-invert Lanczos), functional calculus,
// Helmholtz decomposition of face flux fields, and the elliptic-constant
// probe on a mesh family.

#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Core>
#include <Eigen/SparseCore>

#include "limitlab/fields.hpp"
#include "limitlab/mesh.hpp"

namespace limitlab {

struct NeumannOperator {
  // Stiffness K: symmetric positive semidefinite, zero row sums, constants
  // in the kernel. The operator -Laplacian is diag(w)^{-1} K with w the cell
  // volumes (lumped mass).
  Eigen::SparseMatrix<double> stiffness;
  Eigen::ArrayXd weights;

  int n() const { return static_cast<int>(weights.size()); }
  double dot(const Eigen::ArrayXd& x, const Eigen::ArrayXd& y) const {
    return (x * y * weights).sum();
  }
  double norm(const Eigen::ArrayXd& x) const { return std::sqrt(dot(x, x)); }
  // y = M^{-1} K x, the discrete -Laplacian
  Eigen::ArrayXd apply(const Eigen::ArrayXd& x) const;
};

NeumannOperator assemble(const Mesh& mesh);

struct SpectralDecomp {
  Eigen::ArrayXd eigenvalues;   // ascending, eigenvalues[0] ~ 0
  Eigen::MatrixXd eigenvectors; // columns, orthonormal in the weighted product
  Eigen::ArrayXd weights;

  int count() const { return static_cast<int>(eigenvalues.size()); }
  double dot(const Eigen::ArrayXd& x, const Eigen::ArrayXd& y) const {
    return (x * y * weights).sum();
  }
  double norm(const Eigen::ArrayXd& x) const { return std::sqrt(dot(x, x)); }
  // expansion coefficients <psi_j, x>
  Eigen::VectorXd coefficients(const Eigen::ArrayXd& x) const;
  Eigen::ArrayXd mode(int j) const { return eigenvectors.col(j).array(); }
};

struct EigOptions {
  int dense_threshold = 5000;  // full dense solve up to this many cells
  double residual_tol = 1e-8;  // relative to the largest computed eigenvalue
  int lanczos_extra = 80;      // extra Krylov directions beyond k
};

SpectralDecomp eigendecompose(const NeumannOperator& op, int k, const EigOptions& opt = {});

// Spectral calculus sum_j G(lambda_j) <psi_j, f> psi_j. The kernel mode is
// always excluded; pair with an explicit mean where needed.
Eigen::ArrayXd apply_function(const SpectralDecomp& d, const std::function<double(double)>& G,
                              const Eigen::ArrayXd& f);

// (-Laplacian)^power. Negative powers require a mean-zero input
// (CalculusError otherwise); nonnegative powers act on the mean-zero part.
Eigen::ArrayXd apply_power(const SpectralDecomp& d, double power, const Eigen::ArrayXd& f);

// Factorized Neumann solve K phi = rhs with the compatibility constraint;
// returns the weighted-mean-zero solution.
class NeumannSolver {
 public:
  explicit NeumannSolver(const NeumannOperator& op);
  ~NeumannSolver();
  NeumannSolver(NeumannSolver&&) noexcept;
  Eigen::ArrayXd solve(const Eigen::ArrayXd& rhs) const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

struct HelmholtzParts {
  FaceField solenoidal;      // divergence-free, zero boundary flux
  FaceField gradient;        // two-point gradient of the potential
  Eigen::ArrayXd potential;  // cellwise, weighted-mean-zero
};

// v = solenoidal + gradient with div(solenoidal) = 0 exactly and the
// boundary flux of v carried entirely by the gradient part.
HelmholtzParts helmholtz_project(const Mesh& mesh, const NeumannSolver& solver,
                                 const FaceField& v);
// convenience overload that assembles and factorizes internally
HelmholtzParts helmholtz_project(const Mesh& mesh, const FaceField& v);

// Logical-grid compact-stencil Hessian; rows are cells, columns (xx, xy, yy).
// Cells without a full logical neighborhood are flagged false in `valid`.
struct HessianField {
  Eigen::MatrixX3d h;
  std::vector<bool> valid;
};
HessianField hessian_logical(const Mesh& mesh, const Eigen::ArrayXd& f);

struct EllipticProbePoint {
  double eps;
  double c1;         // coefficient of ||Lap phi||
  double c2;         // coefficient of ||phi||
  double c2_scaled;  // c2 * eps^{2 beta}
};
struct EllipticProbeReport {
  std::vector<EllipticProbePoint> points;
};

// Fits ||Hess phi|| <= c1 ||Lap phi|| + c2 ||phi|| over a built-in test set
// (low eigenfunctions + interior bumps) on each mesh of the family.
EllipticProbeReport elliptic_constant_probe(const std::vector<Mesh>& meshes,
                                            const std::vector<double>& eps,
                                            double beta, int n_modes = 12);

// Eigenpair cache (binary, versioned header with mesh hash, k, tolerance).
void save_decomp(const std::string& path, const SpectralDecomp& d, std::uint64_t mesh_hash,
                 int k, double tol);
std::optional<SpectralDecomp> try_load_decomp(const std::string& path, std::uint64_t mesh_hash,
                                              int k, double tol);

}  // namespace limitlab
