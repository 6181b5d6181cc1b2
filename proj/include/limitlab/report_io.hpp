#pragma once

// Report emission: CSV tables, geometry JSON, provenance, optional SVG
// plots, and re-evaluation of a written report directory.

#include <string>

#include "limitlab/sweep.hpp"

namespace limitlab {

// Writes metrics.csv, monitors.csv, decay.csv, geometry.json,
// provenance.json and optionally metrics_vs_eps.svg into out_dir.
// Returns the process exit code: 0 all checks passed, 1 a check failed,
// 2 no data.
int emit_report(const SweepReport& report, const SweepConfig& cfg, const std::string& out_dir,
                bool write_svg, bool verbose = true);

// Re-evaluates a previously written report directory (reads the CSV files
// and provenance.json) and prints a summary; returns the same exit codes.
int evaluate_report_dir(const std::string& dir);

// Constitutive tabulation: columns rho,theta,p,e,s,mu,eta,kappa on a
// log-spaced grid.
void write_thermo_table(const std::string& path, const ThermoParams& par,
                        const TransportLaw& law, double lo, double hi, int n);

}  // namespace limitlab
