#include "limitlab/snapshot_io.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>
#include <vector>

#include "limitlab/errors.hpp"

namespace limitlab {

void write_snapshot(const std::string& path, const Snapshot& snap) {
  std::ofstream out(path);
  if (!out) throw IoError("write_snapshot: cannot open " + path);
  char buf[160];
  std::snprintf(buf, sizeof buf, "# fieldsnap v1 t=%.17g\n", snap.t);
  out << buf << "cell,rho,ux,uy,theta\n";
  for (Eigen::Index c = 0; c < snap.rho.size(); ++c) {
    std::snprintf(buf, sizeof buf, "%ld,%.17g,%.17g,%.17g,%.17g\n", static_cast<long>(c),
                  snap.rho[c], snap.u(0, c), snap.u(1, c), snap.theta[c]);
    out << buf;
  }
}

Snapshot read_snapshot(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("read_snapshot: cannot open " + path);
  std::string line;
  if (!std::getline(in, line) || line.rfind("# fieldsnap v1", 0) != 0)
    throw IoError("read_snapshot: bad header in " + path);
  Snapshot snap;
  const auto tpos = line.find("t=");
  snap.t = tpos == std::string::npos ? 0.0 : std::stod(line.substr(tpos + 2));
  std::getline(in, line);  // column header

  std::vector<double> rho, ux, uy, theta;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream ss(line);
    std::string tok;
    double vals[5];
    for (int k = 0; k < 5; ++k) {
      if (!std::getline(ss, tok, ',')) throw IoError("read_snapshot: short row in " + path);
      vals[k] = std::stod(tok);
    }
    rho.push_back(vals[1]);
    ux.push_back(vals[2]);
    uy.push_back(vals[3]);
    theta.push_back(vals[4]);
  }
  const int n = static_cast<int>(rho.size());
  snap.rho.resize(n);
  snap.theta.resize(n);
  snap.u.resize(2, n);
  for (int c = 0; c < n; ++c) {
    snap.rho[c] = rho[c];
    snap.u(0, c) = ux[c];
    snap.u(1, c) = uy[c];
    snap.theta[c] = theta[c];
  }
  return snap;
}

}  // namespace limitlab
