#pragma once

// Cell- and face-based discrete operators shared by the solvers.
//
// Scalar fields live on cells (ArrayXd), vector fields on cells (Matrix2Xd),
// and flux fields on faces as normal components (ArrayXd over faces). The
// face divergence and the two-point face gradient are exact negative
// adjoints under the (volume, area*delta) inner products, which is what the
// Helmholtz projector algebra relies on.

#include <cmath>

#include <Eigen/Core>

#include "limitlab/mesh.hpp"

namespace limitlab {

using FaceField = Eigen::ArrayXd;   // normal component per face
using VecField = Eigen::Matrix2Xd;  // 2 x n_cells

// v_f = 0.5 (V_L + V_R) . n; boundary faces get 0 (impermeable walls).
inline FaceField face_normal_flux(const Mesh& mesh, const VecField& v) {
  FaceField out = FaceField::Zero(mesh.n_faces());
  for (int f = 0; f < mesh.n_faces(); ++f) {
    if (mesh.is_boundary(f)) continue;
    const Eigen::Vector2d avg =
        0.5 * (v.col(mesh.face_cell_l[f]) + v.col(mesh.face_cell_r[f]));
    out[f] = avg.dot(mesh.face_normal.col(f));
  }
  return out;
}

// (div v)_c = (1/vol_c) sum_f s_cf v_f A_f
inline Eigen::ArrayXd face_divergence(const Mesh& mesh, const FaceField& v) {
  Eigen::ArrayXd div = Eigen::ArrayXd::Zero(mesh.n_cells());
  for (int f = 0; f < mesh.n_faces(); ++f) {
    const double flux = v[f] * mesh.face_area[f];
    div[mesh.face_cell_l[f]] += flux;
    if (!mesh.is_boundary(f)) div[mesh.face_cell_r[f]] -= flux;
  }
  return div / mesh.cell_volume;
}

// two-point gradient (phi_R - phi_L)/delta on interior faces, 0 on boundary
inline FaceField face_gradient(const Mesh& mesh, const Eigen::ArrayXd& phi) {
  FaceField g = FaceField::Zero(mesh.n_faces());
  for (int f = 0; f < mesh.n_faces(); ++f) {
    if (mesh.is_boundary(f)) continue;
    g[f] = (phi[mesh.face_cell_r[f]] - phi[mesh.face_cell_l[f]]) / mesh.face_delta[f];
  }
  return g;
}

// Green-Gauss cell gradient with zero-order boundary extrapolation
inline VecField green_gauss_gradient(const Mesh& mesh, const Eigen::ArrayXd& phi) {
  VecField g = VecField::Zero(2, mesh.n_cells());
  for (int f = 0; f < mesh.n_faces(); ++f) {
    const int l = mesh.face_cell_l[f];
    const int r = mesh.face_cell_r[f];
    const double phi_f = r >= 0 ? 0.5 * (phi[l] + phi[r]) : phi[l];
    const Eigen::Vector2d na = phi_f * mesh.face_area[f] * mesh.face_normal.col(f);
    g.col(l) += na;
    if (r >= 0) g.col(r) -= na;
  }
  for (int c = 0; c < mesh.n_cells(); ++c) g.col(c) /= mesh.cell_volume[c];
  return g;
}

inline double integrate(const Mesh& mesh, const Eigen::ArrayXd& f) {
  return (f * mesh.cell_volume).sum();
}

inline double l2_norm(const Mesh& mesh, const Eigen::ArrayXd& f) {
  return std::sqrt((f.square() * mesh.cell_volume).sum());
}

inline double l2_norm(const Mesh& mesh, const VecField& v) {
  double s = 0.0;
  for (int c = 0; c < mesh.n_cells(); ++c) s += v.col(c).squaredNorm() * mesh.cell_volume[c];
  return std::sqrt(s);
}

inline double lp_norm(const Mesh& mesh, const Eigen::ArrayXd& f, double p) {
  return std::pow((f.abs().pow(p) * mesh.cell_volume).sum(), 1.0 / p);
}

inline double mean(const Mesh& mesh, const Eigen::ArrayXd& f) {
  return integrate(mesh, f) / mesh.total_volume();
}

}  // namespace limitlab
