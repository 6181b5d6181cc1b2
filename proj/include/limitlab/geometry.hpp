#pragma once

// Parametric family of 2D annular domains with an oscillating obstacle
// boundary and a large (capped) outer circle, plus computable checks of the
// admissibility hypotheses: uniform cone condition, interior/exterior
// tangent balls, and boundary-graph convergence.

#include <string>
#include <vector>

#include <Eigen/Core>

#include "limitlab/mesh.hpp"

namespace limitlab {

enum class RadialGrading { Uniform, Log };

struct DomainSpec {
  double eps = 0.5;
  double delta = 1.5;        // outer radius exponent; outer radius eps^{-delta}
  double beta = 0.2;         // rugosity exponent, in (0, 1/4)
  double r_obs = 1.0;        // obstacle base radius
  double amp = 0.0;          // oscillation amplitude factor
  double freq = 6.0;         // oscillations per unit of 1/eps^{2beta}
  double cap_radius = 16.0;  // truncation of eps^{-delta}; <= 0 disables the cap
  int nr = 32;
  int nphi = 64;
  RadialGrading grading = RadialGrading::Log;

  void validate() const;

  // integer angular wavenumber closest to freq/eps^{2beta} (>= 1)
  int oscillation_wavenumber() const;
  // obstacle curve r(phi) = r_obs (1 + eps^{2beta} amp sin(m phi))
  double inner_radius(double phi) const;
  double inner_radius_deriv(double phi) const;
  double outer_radius() const;
  // sup_phi |r(phi) - r_obs|
  double profile_sup_deviation() const { return r_obs * amp * rugosity_scale(); }
  double rugosity_scale() const;  // eps^{2beta}

  bool contains(const Eigen::Vector2d& x) const;
  // signed distance estimate to the obstacle curve (positive outside)
  double obstacle_distance(const Eigen::Vector2d& x) const;
};

// Boundary-fitted polar-logical mesh of the annular region.
Mesh build_domain(const DomainSpec& spec);

// --- admissibility reports ------------------------------------------------

struct ConeReport {
  double alpha_requested;
  double aperture;        // half-angle gamma
  double worst_alpha;     // largest admissible height over the sample
  Eigen::Vector2d worst_point;
  bool passed;
};

// Discrete uniform cone condition on the obstacle boundary: for sampled
// boundary points, search orientations for a cone of height alpha staying in
// the fluid for all nearby fluid points.
ConeReport check_cone_condition(const DomainSpec& spec, double alpha_cone,
                                double gamma_aperture);

struct BallReport {
  double c_b;
  double required_radius;       // c_b * eps^beta
  double min_interior_radius;   // tangent ball inside the fluid
  double min_exterior_radius;   // tangent ball inside the obstacle
  bool passed;
};

BallReport check_ball_condition(const DomainSpec& spec, double c_b);

struct BoundaryGraphReport {
  std::vector<double> eps;
  std::vector<double> sup_distance;     // ||gamma_eps - gamma||_inf
  std::vector<double> lipschitz_bound;  // max slope wrt base arc length
  std::vector<double> slope_min, slope_max;
  int distinct_slope_values;            // over the finest-eps sample
  // 2D graphs have scalar gradients; the two-independent-vectors support
  // condition has no literal analog here and is only reported.
  bool young_condition_degenerate;
};

BoundaryGraphReport boundary_graph_report(const std::vector<DomainSpec>& specs);

// area of the meshed domain inside radius R (cells kept by center)
double domain_area_within(const Mesh& mesh, double radius);
// exact area of the parametric domain inside radius R (profile quadrature)
double domain_area_within_exact(const DomainSpec& spec, double radius);

}  // namespace limitlab
