#pragma once

// Explicit finite-volume solver for the scaled compressible
// Navier-Stokes-Fourier system with slip walls and thermal insulation.
//
// The momentum equation carries the 1/eps^2 pressure gradient in flux form
// and a force term built from the Green-Gauss gradient of the discrete
// static pressure, so the static state of the equilibrium module is an
// exact fixed point of the scheme. Upwind dissipation acts on deviations
// from the static density. Temperature is evolved in internal-energy form;
// the entropy balance and the total energy are tracked as monitors.

#include <string>
#include <vector>

#include <Eigen/Core>

#include "limitlab/constitutive.hpp"
#include "limitlab/equilibrium.hpp"
#include "limitlab/fields.hpp"
#include "limitlab/mesh.hpp"

namespace limitlab {

struct NSFState {
  Eigen::ArrayXd rho;
  VecField u;
  Eigen::ArrayXd theta;
  double t = 0.0;
};

struct FluxConfig {
  double cfl_acoustic = 0.45;  // in (0, 1]
  int max_dt_halvings = 10;

  void validate() const {
    if (!(cfl_acoustic > 0.0 && cfl_acoustic <= 1.0))
      throw std::invalid_argument("FluxConfig: cfl_acoustic must be in (0,1]");
  }
};

// Discrete hydrostatic data; g_tilde = GG(p_tilde)/(eps rho_tilde) is the
// force the scheme uses in place of grad F.
struct WellBalancedForce {
  Eigen::ArrayXd rho_tilde;
  Eigen::ArrayXd p_tilde;
  VecField g_tilde;
};

WellBalancedForce make_well_balanced_force(const StaticState& st, double eps,
                                           const ThermoParams& par, const Mesh& mesh);

double cfl_dt(const NSFState& state, double eps, const FluidModel& model, const Mesh& mesh,
              const FluxConfig& cfg);

NSFState step(const NSFState& state, double dt, double eps, const WellBalancedForce& wb,
              const FluidModel& model, const Mesh& mesh, const FluxConfig& cfg);

struct EntropyProduction {
  Eigen::ArrayXd sigma;             // dissipation lower bound, cellwise >= 0
  Eigen::ArrayXd balance_residual;  // discrete entropy-balance residual
  double total_sigma = 0.0;
  double total_residual_l1 = 0.0;
};

EntropyProduction entropy_production(const NSFState& before, const NSFState& after, double dt,
                                     double eps, const FluidModel& model, const Mesh& mesh);

double total_energy(const NSFState& state, double eps, const PotentialField& f,
                    const ThermoParams& par, const Mesh& mesh);

struct NSFTrajectory {
  double eps = 1.0;
  std::vector<NSFState> frames;
  std::vector<Eigen::ArrayXd> sigma_lift;  // cumulative time integral of sigma
  std::vector<double> sigma_total;
  std::vector<double> energy_total;
  long n_steps = 0;
};

NSFTrajectory run_nsf(const NSFState& initial, double t_end, int n_frames, double eps,
                      const WellBalancedForce& wb, const PotentialField& f,
                      const FluidModel& model, const Mesh& mesh, const FluxConfig& cfg);

struct BalanceSeries {
  std::vector<double> t;
  std::vector<double> lhs;
  double rhs = 0.0;
  double max_rel_drift = 0.0;
};

BalanceSeries dissipation_balance(const NSFTrajectory& traj, double eps,
                                  const ThermoParams& par, const StaticState& st,
                                  const Mesh& mesh);

struct MonitorEntry {
  std::string name;
  std::string norm;   // norm and region the value was computed in
  double value;
  double eps_power;   // expected scaling; normalized = value / eps^power
  double normalized;
};

std::vector<MonitorEntry> uniform_bound_monitor(const NSFTrajectory& traj, double eps,
                                                const StaticState& st,
                                                const EssResWindow& window,
                                                const FluidModel& model, const Mesh& mesh);

// max |u.n| over boundary faces as used by the flux loop (slip check)
double boundary_normal_speed(const NSFState& state, const Mesh& mesh);

}  // namespace limitlab
