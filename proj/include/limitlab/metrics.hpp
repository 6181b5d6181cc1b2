#pragma once

// Convergence metrics comparing an NSF trajectory at finite eps with the
// Oberbeck-Boussinesq reference on a compact annular region K, using a
// piecewise-constant conservative remap onto a shared polar grid.

#include <vector>

#include <Eigen/Core>

#include "limitlab/constitutive.hpp"
#include "limitlab/geometry.hpp"
#include "limitlab/nsf.hpp"
#include "limitlab/oberbeck.hpp"

namespace limitlab {

struct KRegion {
  double r0 = 2.0;
  double r1 = 5.0;
  int nr = 12;
  int nphi = 48;
};

struct KGrid {
  KRegion region;
  Eigen::Matrix2Xd center;
  Eigen::ArrayXd volume;
  int n() const { return static_cast<int>(volume.size()); }
};

KGrid make_kgrid(const KRegion& region);

// cell index of x in an annulus mesh built by build_domain(spec); -1 outside
int locate_cell(const DomainSpec& spec, const Eigen::Vector2d& x);

// 3x3 subsample average of the piecewise-constant field over each K cell
Eigen::ArrayXd remap_scalar(const DomainSpec& spec, const Eigen::ArrayXd& f, const KGrid& grid);
VecField remap_vector(const DomainSpec& spec, const VecField& v, const KGrid& grid);

struct MetricRecord {
  double eps = 0.0;
  double m1 = 0.0;  // sup_t || rho - rho_bar ||_{L^{5/3}(K)}
  double m2 = 0.0;  // || u - U ||_{L^2((0,T) x K)}
  double m3 = 0.0;  // || (theta - theta_bar)/eps - Theta ||_{L^2((0,T) x K)}
  double m4 = 0.0;  // || div u ||_{L^2((0,T) x K)}
  double m5 = 0.0;  // || (rho - rho_bar)/eps + rho_bar alpha Theta_eps ||_{L^2((0,T) x K)}
  double m6 = 0.0;  // rms L^2(0,T) distance of the momentum test functionals
};

// battery of smooth vector bumps supported in K for the weak-convergence
// functionals (fixed, deterministic)
std::vector<std::pair<Eigen::Vector2d, Eigen::Vector2d>> momentum_test_centers(
    const KRegion& region, int count = 8);

MetricRecord convergence_metrics(const NSFTrajectory& nsf_traj, const DomainSpec& nsf_spec,
                                 const Mesh& nsf_mesh, const OBTrajectory& ob_traj,
                                 const DomainSpec& ob_spec, const Mesh& ob_mesh, double eps,
                                 const KRegion& region, const ThermoParams& par,
                                 const LinearizedCoeffs& coeffs);

}  // namespace limitlab
