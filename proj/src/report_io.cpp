#include "limitlab/report_io.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>

#include <json.hpp>

#include "limitlab/errors.hpp"

namespace limitlab {

using nlohmann::json;

namespace {

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void write_metrics_csv(const std::string& path, const SweepReport& report) {
  std::ofstream out(path);
  if (!out) throw IoError("emit_report: cannot open " + path);
  out << "eps,M1,M2,M3,M4,M5,M6,mass_drift,energy_drift_per_time,balance_drift,"
         "min_dissipation,h_eps_norm,n_steps,failed\n";
  for (const auto& r : report.per_eps) {
    out << fmt(r.eps) << "," << fmt(r.metrics.m1) << "," << fmt(r.metrics.m2) << ","
        << fmt(r.metrics.m3) << "," << fmt(r.metrics.m4) << "," << fmt(r.metrics.m5) << ","
        << fmt(r.metrics.m6) << "," << fmt(r.mass_drift) << "," << fmt(r.energy_drift_per_time)
        << "," << fmt(r.balance_drift) << "," << fmt(r.min_dissipation) << ","
        << fmt(r.expansion.h_eps_norm) << "," << r.n_steps << "," << (r.failed ? 1 : 0) << "\n";
  }
}

void write_monitors_csv(const std::string& path, const SweepReport& report) {
  std::ofstream out(path);
  if (!out) throw IoError("emit_report: cannot open " + path);
  out << "eps,name,norm,value,eps_power,normalized\n";
  for (const auto& r : report.per_eps)
    for (const auto& m : r.monitors)
      out << fmt(r.eps) << "," << m.name << ",\"" << m.norm << "\"," << fmt(m.value) << ","
          << fmt(m.eps_power) << "," << fmt(m.normalized) << "\n";
}

void write_decay_csv(const std::string& path, const SweepReport& report) {
  std::ofstream out(path);
  if (!out) throw IoError("emit_report: cannot open " + path);
  out << "eps,T,I,T_cross,contaminated\n";
  for (const auto& d : report.decay)
    out << fmt(d.eps) << "," << fmt(d.t_horizon) << "," << fmt(d.value) << "," << fmt(d.t_cross)
        << "," << (d.contaminated ? 1 : 0) << "\n";
}

void write_geometry_json(const std::string& path, const SweepReport& report) {
  json j;
  j["per_eps"] = json::array();
  for (const auto& r : report.per_eps) {
    json e;
    e["eps"] = r.eps;
    e["failed"] = r.failed;
    if (r.failed) e["error"] = r.error;
    e["cone"] = {{"alpha_requested", r.cone.alpha_requested},
                 {"aperture", r.cone.aperture},
                 {"worst_alpha", r.cone.worst_alpha},
                 {"passed", r.cone.passed}};
    e["ball"] = {{"c_b", r.ball.c_b},
                 {"required_radius", r.ball.required_radius},
                 {"min_interior_radius", r.ball.min_interior_radius},
                 {"min_exterior_radius", r.ball.min_exterior_radius},
                 {"passed", r.ball.passed}};
    e["expansion"] = {{"h_eps_norm", r.expansion.h_eps_norm},
                      {"grad_ratio_sup", r.expansion.grad_ratio_sup},
                      {"skipped_cells", r.expansion.skipped_cells},
                      {"linear_coeff", r.expansion.linear_coeff}};
    j["per_eps"].push_back(e);
  }
  if (report.has_graph) {
    j["boundary_graph"] = {{"eps", report.graph.eps},
                           {"sup_distance", report.graph.sup_distance},
                           {"lipschitz_bound", report.graph.lipschitz_bound},
                           {"slope_min", report.graph.slope_min},
                           {"slope_max", report.graph.slope_max},
                           {"distinct_slope_values", report.graph.distinct_slope_values},
                           {"young_condition_degenerate", report.graph.young_condition_degenerate}};
  }
  std::ofstream out(path);
  if (!out) throw IoError("emit_report: cannot open " + path);
  out << j.dump(2) << "\n";
}

void write_provenance_json(const std::string& path, const SweepReport& report,
                           const SweepConfig& cfg) {
  json j;
  char hash[32];
  std::snprintf(hash, sizeof hash, "%016llx", static_cast<unsigned long long>(report.config_hash));
  j["config_hash"] = hash;
  j["seed"] = report.seed;
  j["version"] = report.version;
  j["partial"] = report.partial;
  j["thresholds"] = {{"monotone_metrics", cfg.acceptance.monotone_metrics},
                     {"min_total_factor", cfg.acceptance.min_total_factor},
                     {"monitor_spread_max", cfg.acceptance.monitor_spread_max},
                     {"decay_slope_lo", cfg.acceptance.decay_slope_lo},
                     {"decay_slope_hi", cfg.acceptance.decay_slope_hi}};
  j["checks"] = json::array();
  for (const auto& c : report.checks)
    j["checks"].push_back({{"name", c.name}, {"passed", c.passed}, {"detail", c.detail}});
  std::ofstream out(path);
  if (!out) throw IoError("emit_report: cannot open " + path);
  out << j.dump(2) << "\n";
}

// minimal log-log polyline plot
void write_metrics_svg(const std::string& path, const SweepReport& report) {
  std::ofstream out(path);
  if (!out) throw IoError("emit_report: cannot open " + path);
  const int w = 640, h = 480, margin = 60;
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << w << "\" height=\"" << h
      << "\">\n<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  if (report.per_eps.size() >= 2) {
    struct Series {
      const char* name;
      const char* color;
      std::vector<double> v;
    };
    std::vector<Series> series = {{"M2", "#1f77b4", {}},
                                  {"M4", "#ff7f0e", {}},
                                  {"M5", "#2ca02c", {}},
                                  {"M6", "#d62728", {}}};
    std::vector<double> eps;
    for (const auto& r : report.per_eps) {
      eps.push_back(r.eps);
      series[0].v.push_back(r.metrics.m2);
      series[1].v.push_back(r.metrics.m4);
      series[2].v.push_back(r.metrics.m5);
      series[3].v.push_back(r.metrics.m6);
    }
    double lx0 = 1e300, lx1 = -1e300, ly0 = 1e300, ly1 = -1e300;
    for (double e : eps) {
      lx0 = std::min(lx0, std::log10(e));
      lx1 = std::max(lx1, std::log10(e));
    }
    for (const auto& s : series)
      for (double v : s.v)
        if (v > 0.0) {
          ly0 = std::min(ly0, std::log10(v));
          ly1 = std::max(ly1, std::log10(v));
        }
    if (!(ly1 > ly0)) {
      ly0 -= 1.0;
      ly1 += 1.0;
    }
    auto px = [&](double e) {
      return margin + (std::log10(e) - lx0) / (lx1 - lx0) * (w - 2 * margin);
    };
    auto py = [&](double v) {
      return h - margin - (std::log10(v) - ly0) / (ly1 - ly0) * (h - 2 * margin);
    };
    out << "<line x1=\"" << margin << "\" y1=\"" << h - margin << "\" x2=\"" << w - margin
        << "\" y2=\"" << h - margin << "\" stroke=\"black\"/>\n";
    out << "<line x1=\"" << margin << "\" y1=\"" << margin << "\" x2=\"" << margin << "\" y2=\""
        << h - margin << "\" stroke=\"black\"/>\n";
    out << "<text x=\"" << w / 2 << "\" y=\"" << h - 18
        << "\" text-anchor=\"middle\">log10 eps</text>\n";
    out << "<text x=\"18\" y=\"" << h / 2 << "\" transform=\"rotate(-90 18 " << h / 2
        << ")\" text-anchor=\"middle\">log10 metric</text>\n";
    int legend_y = margin;
    for (const auto& s : series) {
      out << "<polyline fill=\"none\" stroke=\"" << s.color << "\" stroke-width=\"2\" points=\"";
      for (size_t i = 0; i < eps.size(); ++i)
        if (s.v[i] > 0.0) out << px(eps[i]) << "," << py(s.v[i]) << " ";
      out << "\"/>\n";
      for (size_t i = 0; i < eps.size(); ++i)
        if (s.v[i] > 0.0)
          out << "<circle cx=\"" << px(eps[i]) << "\" cy=\"" << py(s.v[i])
              << "\" r=\"3\" fill=\"" << s.color << "\"/>\n";
      out << "<text x=\"" << w - margin + 6 << "\" y=\"" << legend_y << "\" fill=\"" << s.color
          << "\">" << s.name << "</text>\n";
      legend_y += 18;
    }
  }
  out << "</svg>\n";
}

}  // namespace

int emit_report(const SweepReport& report, const SweepConfig& cfg, const std::string& out_dir,
                bool write_svg, bool verbose) {
  std::filesystem::create_directories(out_dir);
  write_metrics_csv(out_dir + "/metrics.csv", report);
  write_monitors_csv(out_dir + "/monitors.csv", report);
  write_decay_csv(out_dir + "/decay.csv", report);
  write_geometry_json(out_dir + "/geometry.json", report);
  write_provenance_json(out_dir + "/provenance.json", report, cfg);
  if (write_svg) write_metrics_svg(out_dir + "/metrics_vs_eps.svg", report);

  if (report.per_eps.empty() && report.decay.empty()) {
    if (verbose) std::cout << "no data\n";
    return 2;
  }
  bool all_passed = true;
  for (const auto& c : report.checks) {
    if (verbose)
      std::cout << (c.passed ? "pass" : "FAIL") << "  " << c.name << "  (" << c.detail << ")\n";
    all_passed &= c.passed;
  }
  if (report.partial) {
    if (verbose) std::cout << "FAIL  sweep_complete  (one or more eps stages failed)\n";
    all_passed = false;
  }
  return all_passed ? 0 : 1;
}

int evaluate_report_dir(const std::string& dir) {
  std::ifstream prov(dir + "/provenance.json");
  if (!prov) {
    std::cerr << "no provenance.json in " << dir << "\n";
    return 2;
  }
  json j;
  prov >> j;
  bool all_passed = true;
  size_t n = 0;
  if (j.contains("checks")) {
    for (const auto& c : j.at("checks")) {
      ++n;
      const bool passed = c.at("passed").get<bool>();
      std::cout << (passed ? "pass" : "FAIL") << "  " << c.at("name").get<std::string>() << "  ("
                << c.at("detail").get<std::string>() << ")\n";
      all_passed &= passed;
    }
  }
  if (j.value("partial", false)) {
    std::cout << "FAIL  sweep_complete  (report marked partial)\n";
    all_passed = false;
  }
  if (n == 0) {
    std::ifstream metrics(dir + "/metrics.csv");
    std::string line;
    int rows = 0;
    if (metrics) {
      std::getline(metrics, line);
      while (std::getline(metrics, line))
        if (!line.empty()) ++rows;
    }
    if (rows == 0) {
      std::cout << "no data\n";
      return 2;
    }
  }
  return all_passed ? 0 : 1;
}

void write_thermo_table(const std::string& path, const ThermoParams& par,
                        const TransportLaw& law, double lo, double hi, int n) {
  std::ofstream out(path);
  if (!out) throw IoError("write_thermo_table: cannot open " + path);
  out << "rho,theta,p,e,s,mu,eta,kappa\n";
  for (int i = 0; i < n; ++i) {
    const double rho = lo * std::pow(hi / lo, i / double(n - 1));
    for (int j = 0; j < n; ++j) {
      const double th = lo * std::pow(hi / lo, j / double(n - 1));
      const auto tc = transport(th, law);
      out << fmt(rho) << "," << fmt(th) << "," << fmt(pressure(rho, th, par)) << ","
          << fmt(internal_energy(rho, th, par)) << "," << fmt(entropy(rho, th, par)) << ","
          << fmt(tc.mu) << "," << fmt(tc.eta) << "," << fmt(tc.kappa) << "\n";
    }
  }
}

}  // namespace limitlab
