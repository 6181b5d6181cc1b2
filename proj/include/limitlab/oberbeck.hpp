#pragma once

// Incompressible Oberbeck-Boussinesq solver: projection method on face
// fluxes reusing the Neumann solve, upwind advection, constant transport
// coefficients frozen at the reference temperature, and the exact
// Boussinesq closure r = -rho_bar alpha Theta.

#include <vector>

#include <Eigen/Core>

#include "limitlab/constitutive.hpp"
#include "limitlab/equilibrium.hpp"
#include "limitlab/fields.hpp"
#include "limitlab/mesh.hpp"
#include "limitlab/spectral.hpp"

namespace limitlab {

enum class ObstacleBC { NoSlip, Slip };

struct OBConfig {
  ObstacleBC bc = ObstacleBC::NoSlip;
  double cfl = 0.4;
};

struct OBState {
  VecField U;                // cell velocity
  FaceField u_face;          // divergence-free face fluxes
  Eigen::ArrayXd theta;      // temperature deviation
  Eigen::ArrayXd r;          // buoyancy density deviation, -rho_bar alpha theta
  double t = 0.0;
};

OBState ob_init(const VecField& u0_raw, const Eigen::ArrayXd& theta0, const Mesh& mesh,
                const NeumannSolver& solver, const LinearizedCoeffs& coeffs,
                const ThermoParams& par);

double ob_cfl_dt(const OBState& state, const FluidModel& model,
                 const LinearizedCoeffs& coeffs, const Mesh& mesh, const OBConfig& cfg);

OBState ob_step(const OBState& state, double dt, const PotentialField& f,
                const LinearizedCoeffs& coeffs, const FluidModel& model, const Mesh& mesh,
                const NeumannSolver& solver, const OBConfig& cfg);

struct OBTrajectory {
  std::vector<OBState> frames;
  long n_steps = 0;
};

OBTrajectory run_ob(const OBState& initial, double t_end, int n_frames,
                    const PotentialField& f, const LinearizedCoeffs& coeffs,
                    const FluidModel& model, const Mesh& mesh, const NeumannSolver& solver,
                    const OBConfig& cfg);

struct OBEnergyReport {
  std::vector<double> t, kinetic, grad_u_sq, theta_l2, grad_theta_l2;
  // max over steps of d/dt(KE) + mu ||grad U||^2 - force work (should be <= 0
  // up to quadrature error)
  double max_inequality_violation = 0.0;
};

OBEnergyReport ob_energy_report(const OBTrajectory& traj, const PotentialField& f,
                                const FluidModel& model, const Mesh& mesh);

// max |div u_face| over cells (projection quality)
double max_divergence(const Mesh& mesh, const FaceField& u_face);

}  // namespace limitlab
