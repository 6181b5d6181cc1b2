#pragma once

// Field-snapshot exchange format shared by the solvers: versioned CSV with
// one row per cell (cell id, rho, ux, uy, theta).

#include <string>

#include <Eigen/Core>

#include "limitlab/fields.hpp"

namespace limitlab {

struct Snapshot {
  Eigen::ArrayXd rho;
  VecField u;
  Eigen::ArrayXd theta;
  double t = 0.0;
};

void write_snapshot(const std::string& path, const Snapshot& snap);
Snapshot read_snapshot(const std::string& path);

}  // namespace limitlab
