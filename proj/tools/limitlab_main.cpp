// limitlab command-line driver: run sweeps, geometry checks, acoustic decay
// experiments, and re-evaluate written reports.

#include <exception>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "limitlab/report_io.hpp"
#include "limitlab/sweep.hpp"

int main(int argc, char** argv) {
  CLI::App app{"numerical laboratory for the low Mach number limit on rough-obstacle domains"};
  app.require_subcommand(1);

  std::string config_path, report_dir, table_path;
  bool no_svg = false;
  double table_lo = 0.1, table_hi = 10.0;
  int table_n = 20;

  auto* run = app.add_subcommand("run", "full sweep: geometry, NSF per eps, OB reference, "
                                        "metrics, decay, report files");
  run->add_option("config", config_path, "JSON config file")->required();
  run->add_flag("--no-svg", no_svg, "skip the SVG plot");

  auto* geom = app.add_subcommand("check-geometry", "admissibility checks for the domain family");
  geom->add_option("config", config_path, "JSON config file")->required();

  auto* decay = app.add_subcommand("decay", "acoustic local-decay sweep only");
  decay->add_option("config", config_path, "JSON config file")->required();

  auto* report = app.add_subcommand("report", "re-evaluate a written report directory");
  report->add_option("dir", report_dir, "report directory")->required();

  auto* tab = app.add_subcommand("tabulate", "export the constitutive table as CSV");
  tab->add_option("config", config_path, "JSON config file")->required();
  tab->add_option("--out", table_path, "output CSV path")->required();
  tab->add_option("--lo", table_lo, "lower bound of the log grid");
  tab->add_option("--hi", table_hi, "upper bound of the log grid");
  tab->add_option("--n", table_n, "points per axis");

  CLI11_PARSE(app, argc, argv);

  try {
    if (run->parsed()) {
      const limitlab::SweepConfig cfg = limitlab::load_config(config_path);
      const limitlab::SweepReport rep = limitlab::run_sweep(cfg);
      return limitlab::emit_report(rep, cfg, cfg.output_dir, !no_svg);
    }
    if (geom->parsed()) {
      const limitlab::SweepConfig cfg = limitlab::load_config(config_path);
      const limitlab::SweepReport rep = limitlab::run_geometry_checks(cfg);
      return limitlab::emit_report(rep, cfg, cfg.output_dir, false);
    }
    if (decay->parsed()) {
      limitlab::SweepConfig cfg = limitlab::load_config(config_path);
      limitlab::SweepReport rep = limitlab::run_decay_sweep(cfg);
      limitlab::evaluate_checks(rep, cfg.acceptance);
      return limitlab::emit_report(rep, cfg, cfg.output_dir, false);
    }
    if (report->parsed()) {
      return limitlab::evaluate_report_dir(report_dir);
    }
    if (tab->parsed()) {
      const limitlab::SweepConfig cfg = limitlab::load_config(config_path);
      limitlab::write_thermo_table(table_path, cfg.thermo, cfg.transp, table_lo, table_hi,
                                   table_n);
      return 0;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
  return 0;
}
