#pragma once

// Sweep orchestration: config file schema, the per-eps pipeline
// (geometry -> equilibrium -> NSF -> metrics), the OB reference run, the
// acoustic decay sweep, and threshold evaluation.

#include <cstdint>
#include <string>
#include <vector>

#include "limitlab/acoustics.hpp"
#include "limitlab/constitutive.hpp"
#include "limitlab/equilibrium.hpp"
#include "limitlab/geometry.hpp"
#include "limitlab/metrics.hpp"
#include "limitlab/nsf.hpp"
#include "limitlab/oberbeck.hpp"

namespace limitlab {

inline constexpr int kConfigSchema = 1;
inline constexpr const char* kVersion = "limitlab 0.1.0";

struct AcceptanceThresholds {
  std::vector<std::string> monotone_metrics{"M2", "M4", "M5", "M6"};
  double min_total_factor = 1.5;
  double monitor_spread_max = 10.0;
  double decay_slope_lo = 0.8;
  double decay_slope_hi = 1.2;
};

struct GeometryCheckParams {
  double alpha_cone = 0.2;
  double aperture = 0.5;
  double c_b = 0.25;
};

struct SweepConfig {
  int schema = kConfigSchema;
  std::string output_dir = "out";
  std::uint64_t seed = 12345;
  std::vector<double> eps_list{0.5, 0.25, 0.125, 0.0625};

  DomainSpec domain;  // eps field is overridden per sweep point
  ThermoParams thermo;
  TransportLaw transp;
  double window_factor = 2.0;

  PotentialField force;
  ScalarProfile rho1_profile;
  ScalarProfile theta1_profile;
  VelocityProfile u0_profile;

  double t_end = 0.4;
  int frames = 32;
  FluxConfig flux;

  KRegion k_region;
  OBConfig ob;
  GeometryCheckParams geometry_check;

  // decay sweep
  std::vector<double> decay_eps{0.25, 0.125, 0.0625, 0.03125};
  int decay_modes = 160;
  int decay_nr = 28;
  int decay_nphi = 56;
  double decay_g_lo = 0.5;
  double decay_g_hi = 2.0;
  double decay_t_frac = 0.7;
  std::uint64_t decay_seed = 777;
  int decay_n_seeds = 12;  // I(eps) is averaged over this many broadband fields

  AcceptanceThresholds acceptance;
  std::string cache_dir;  // eigenpair cache directory; empty disables
  bool write_snapshots = true;

  void validate() const;
};

SweepConfig load_config(const std::string& path);
std::string canonical_config_json(const SweepConfig& cfg);
std::uint64_t config_hash(const SweepConfig& cfg);

struct EpsResult {
  double eps = 0.0;
  bool failed = false;
  std::string error;

  MetricRecord metrics;
  std::vector<MonitorEntry> monitors;
  ConeReport cone{};
  BallReport ball{};
  ExpansionReport expansion{};

  double mass_drift = 0.0;            // relative
  double energy_drift_per_time = 0.0; // relative to initial, per unit time
  double balance_drift = 0.0;         // dissipation-balance relative drift
  double min_dissipation = 0.0;       // min cellwise sigma over frames
  long n_steps = 0;
};

struct SweepCheck {
  std::string name;
  bool passed = false;
  std::string detail;
};

struct SweepReport {
  std::vector<EpsResult> per_eps;
  BoundaryGraphReport graph{};
  bool has_graph = false;

  std::vector<DecayResult> decay;
  DecayFit decay_fit{0.0, 0.0};
  bool has_decay = false;

  std::vector<SweepCheck> checks;
  bool partial = false;

  std::uint64_t config_hash = 0;
  std::uint64_t seed = 0;
  std::string version = kVersion;
};

// full pipeline (geometry, equilibrium, NSF per eps, OB once, metrics, decay)
SweepReport run_sweep(const SweepConfig& cfg);
// geometry checks only
SweepReport run_geometry_checks(const SweepConfig& cfg);
// decay sweep only
SweepReport run_decay_sweep(const SweepConfig& cfg);

// threshold evaluation over the assembled report (fills report.checks)
void evaluate_checks(SweepReport& report, const AcceptanceThresholds& thresholds);

}  // namespace limitlab
