#pragma once

// Static states of the scaled system: cellwise Newton solve of the first
// integral Pi(rho_tilde) = eps F + Pi(rho_bar), expansion verification, and
// ill-prepared initial data built from perturbation profiles.

#include <cstdint>
#include <vector>

#include <Eigen/Core>

#include "limitlab/constitutive.hpp"
#include "limitlab/fields.hpp"
#include "limitlab/mesh.hpp"

namespace limitlab {

struct PotentialField {
  enum class Kind { Constant, LinearX, Gaussian };
  Kind kind = Kind::Constant;
  double amplitude = 0.0;
  double width = 1.0;                              // Gaussian only
  Eigen::Vector2d center = Eigen::Vector2d::Zero();  // Gaussian only

  double value(const Eigen::Vector2d& x) const;
  Eigen::Vector2d gradient(const Eigen::Vector2d& x) const;
  // far-field value anchoring the static-state first integral; a constant
  // potential therefore yields the constant reference density
  double reference_value() const;

  Eigen::ArrayXd values(const Mesh& mesh) const;
  VecField gradients(const Mesh& mesh) const;
  // sup of |F| and |grad F| over cell centers (W^{1,inf} bound on the region)
  std::pair<double, double> sup_bounds(const Mesh& mesh) const;
};

struct StaticState {
  Eigen::ArrayXd rho_tilde;
  double theta_bar = 1.0;
  double h_eps_norm = 0.0;  // filled by verify_expansion
};

// Cellwise Newton iteration on the first integral; residual < 1e-12.
StaticState static_state(const PotentialField& f, double eps, const ThermoParams& par,
                         const Mesh& mesh);

struct ExpansionReport {
  double h_eps_norm;       // sup |(rho_tilde - rho_bar - eps F / Pi'(rho_bar)) / (eps^2 F)|
  double grad_ratio_sup;   // sup |grad rho_tilde| / (eps |grad F|)
  int skipped_cells;       // cells with |F| below threshold
  double linear_coeff;     // sup |rho_tilde - rho_bar| / eps
};

ExpansionReport verify_expansion(const StaticState& state, const PotentialField& f, double eps,
                                 const ThermoParams& par, const Mesh& mesh);

// --- perturbation library ---------------------------------------------------

struct ScalarProfile {
  enum class Kind { None, AngularSine, GaussianBump, RandomBumps };
  Kind kind = Kind::None;
  double amplitude = 0.0;
  int wavenumber = 3;            // AngularSine
  double r_center = 0.0;         // radial localization (0 = domain middle)
  double width = 1.0;
  Eigen::Vector2d center = Eigen::Vector2d::Zero();  // GaussianBump
  std::uint64_t seed = 1;        // RandomBumps
  int n_bumps = 6;
  double spread = 0.8;           // radial placement band for RandomBumps

  Eigen::ArrayXd evaluate(const Mesh& mesh) const;
};

struct VelocityProfile {
  enum class Kind { Zero, Swirl, RadialPulse, DirectionalBump, RandomBumps };
  Kind kind = Kind::Zero;
  double amplitude = 0.0;
  double r_center = 0.0;
  double width = 1.0;
  Eigen::Vector2d center = Eigen::Vector2d::Zero();
  Eigen::Vector2d direction = Eigen::Vector2d::UnitX();
  std::uint64_t seed = 2;
  int n_bumps = 4;
  double spread = 0.8;

  VecField evaluate(const Mesh& mesh) const;
};

struct InitialData {
  Eigen::ArrayXd rho0, theta0;
  VecField u0;
  Eigen::ArrayXd rho1, theta1;  // the O(1) perturbations, discrete mean zero
};

// rho0 = rho_tilde + eps rho1, theta0 = theta_bar + eps theta1; u0 is not
// projected (ill-prepared data).
InitialData make_initial_data(const StaticState& state, double eps,
                              const ScalarProfile& rho1_profile,
                              const ScalarProfile& theta1_profile,
                              const VelocityProfile& u0_profile, const Mesh& mesh);

}  // namespace limitlab
