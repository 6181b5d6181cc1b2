#pragma once

// Lighthill acoustic variables built from NSF states, the spectral Duhamel
// propagator for the acoustic potential, weak-form residual checks, and the
// local decay experiment.

#include <functional>
#include <vector>

#include <Eigen/Core>

#include "limitlab/constitutive.hpp"
#include "limitlab/equilibrium.hpp"
#include "limitlab/fields.hpp"
#include "limitlab/mesh.hpp"
#include "limitlab/nsf.hpp"
#include "limitlab/snapshot_io.hpp"
#include "limitlab/spectral.hpp"

namespace limitlab {

struct AcousticData {
  Eigen::ArrayXd S;          // acoustic scalar
  VecField V;                // momentum rho u
  Eigen::ArrayXd Phi;        // potential of the gradient part, mean-zero
  FaceField V_face;          // face fluxes of V
  FaceField V_solenoidal;    // Helmholtz parts of V_face
  FaceField V_gradient;
  // forcing constituents: f1 = div(H1 + H2),
  // f2 = grad G3 - div(G21 + G22) + G4 + grad G1
  VecField H1, H2;
  Eigen::ArrayXd G1, G3;
  Eigen::Matrix3Xd G21, G22;  // symmetric tensors as rows (xx, xy, yy)
  VecField G4;
};

AcousticData assemble_acoustic_data(const NSFState& state, const Eigen::ArrayXd& sigma_lift,
                                    double eps, const PotentialField& f,
                                    const LinearizedCoeffs& coeffs, const FluidModel& model,
                                    const Mesh& mesh, const NeumannSolver& solver);

// --- weak residuals ---------------------------------------------------------

// Space-time test function tau(t) * b(x) with closed-form derivatives.
struct SpaceTimeTest {
  std::function<double(double)> tau;
  std::function<double(double)> dtau;
  std::function<double(const Eigen::Vector2d&)> b;
  std::function<Eigen::Vector2d(const Eigen::Vector2d&)> grad_b;
};

// deterministic battery of smooth bumps in the annulus [r0, r1], mean-zero
// in space, vanishing at t = t_end
std::vector<SpaceTimeTest> make_test_battery(double r0, double r1, double t_end, int count);

struct WeakResidualReport {
  std::vector<double> residual_s;    // per test function, first acoustic identity
  std::vector<double> residual_phi;  // second identity
  double max_s = 0.0;
  double max_phi = 0.0;
};

WeakResidualReport acoustic_weak_residual(const std::vector<AcousticData>& frames,
                                          const std::vector<double>& times, double eps,
                                          double omega, const std::vector<SpaceTimeTest>& tests,
                                          const Mesh& mesh, const NeumannOperator& op,
                                          const NeumannSolver& solver);

// --- Duhamel propagator ------------------------------------------------------

struct DuhamelForcing {
  // uniform time samples on [0, t] of the two forcings (cellwise)
  std::vector<Eigen::ArrayXd> f1, f2;
  double prefactor = 1.0;  // e.g. eps^{-2 beta}
};

struct WaveState {
  Eigen::ArrayXd phi;
  Eigen::ArrayXd s;
};

// Two-branch Duhamel formula via spectral phases; forcing convolution by
// composite Simpson on the samples. phi0 and s0 must be mean-zero.
WaveState duhamel_evolve(const Eigen::ArrayXd& phi0, const Eigen::ArrayXd& s0,
                         const DuhamelForcing& forcing, double t, double eps, double omega,
                         const SpectralDecomp& decomp);

// conserved quadratic form of the free propagator
double wave_energy(const WaveState& w, double omega, const SpectralDecomp& decomp);

// --- local decay experiment ---------------------------------------------------

struct DecayResult {
  double eps;
  double t_horizon;
  double value;        // I(eps)
  double t_cross;      // domain-crossing time eps * diameter / sqrt(omega)
  bool contaminated;   // t_horizon > t_cross
};

DecayResult decay_experiment(const Eigen::ArrayXd& psi, const Eigen::ArrayXd& phi,
                             const std::function<double(double)>& g, double eps, double t_horizon,
                             const SpectralDecomp& decomp, double domain_diameter,
                             double omega = 1.0);

struct DecayFit {
  double slope;
  double residual;  // rms residual of the log-log fit
};

DecayFit decay_rate_sweep(const std::vector<DecayResult>& results);
DecayFit loglog_fit(const std::vector<double>& x, const std::vector<double>& y);

// broadband mean-zero field spanned by the computed modes, fixed seed
Eigen::ArrayXd broadband_field(const SpectralDecomp& decomp, std::uint64_t seed);

// Wave-state export in the shared field-snapshot layout: the acoustic scalar
// rides in the rho column, the potential gradient in (ux, uy), and the
// potential itself in the theta column.
Snapshot wave_snapshot(const Mesh& mesh, const WaveState& w, double t);

}  // namespace limitlab
