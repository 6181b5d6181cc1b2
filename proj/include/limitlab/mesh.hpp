#pragma once

// Logically structured quadrilateral finite-volume meshes.
//
// Cells are indexed (i,j) -> i*nj + j. Faces are stored flat with an
// owner/neighbor pair; boundary faces have neighbor -1 and carry a tag.
// Face normals are exact rotations of the edge vectors, so the discrete
// Gauss identity sum_f s_cf n_f A_f = 0 holds to machine precision cellwise.

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Core>

namespace limitlab {

enum class BoundaryTag : std::int8_t { None = -1, Obstacle = 0, Outer = 1 };

struct Mesh {
  // cells
  Eigen::Matrix2Xd cell_center;  // centroids
  Eigen::ArrayXd cell_volume;

  // faces; normal is unit, oriented from cell_l to cell_r (outward on boundary)
  Eigen::ArrayXi face_cell_l;
  Eigen::ArrayXi face_cell_r;   // -1 on boundary
  Eigen::Matrix2Xd face_normal;
  Eigen::ArrayXd face_area;
  Eigen::Matrix2Xd face_center;
  Eigen::ArrayXd face_delta;    // center-to-center distance along the normal;
                                // boundary: owner center to face center
  std::vector<BoundaryTag> face_tag;

  // vertices (for export and diagnostics)
  Eigen::Matrix2Xd vertex;
  Eigen::Matrix<int, 4, Eigen::Dynamic> cell_vertex;

  // logical structure
  int ni = 0, nj = 0;
  bool periodic_i = false, periodic_j = false;
  // period translations for translation-periodic dimensions (zero for the
  // rotation-periodic annulus seam)
  Eigen::Vector2d translation_i = Eigen::Vector2d::Zero();
  Eigen::Vector2d translation_j = Eigen::Vector2d::Zero();

  int n_cells() const { return static_cast<int>(cell_volume.size()); }
  int n_faces() const { return static_cast<int>(face_area.size()); }
  int cell_index(int i, int j) const { return i * nj + j; }

  bool is_boundary(int f) const { return face_cell_r[f] < 0; }

  double total_volume() const { return cell_volume.sum(); }
  // diagonal of the vertex bounding box
  double diameter() const;
};

// Generic structured builders (used by tests and by the domain mesher).
Mesh interval_mesh(int n, double length);
Mesh channel_mesh(int nx, int ny, double lx, double ly, bool periodic_x = true);
Mesh periodic_box_mesh(int nx, int ny, double lx, double ly);

// Low-level builder from logical vertex coordinates. `pos(i,j)` must be
// defined for i in [0,ni], j in [0,nj]; for a translation-periodic dimension
// the wrapped row must be an exact translate by (lx,0) or (0,ly); for a
// rotation-periodic dimension (annulus seam) the wrapped row must coincide.
struct StructuredBuild {
  int ni, nj;
  bool periodic_i = false, periodic_j = false;
  Eigen::Vector2d translation_i = Eigen::Vector2d::Zero();
  Eigen::Vector2d translation_j = Eigen::Vector2d::Zero();
  BoundaryTag tag_i_lo = BoundaryTag::Outer, tag_i_hi = BoundaryTag::Outer;
  BoundaryTag tag_j_lo = BoundaryTag::Outer, tag_j_hi = BoundaryTag::Outer;
};

Mesh build_structured(const StructuredBuild& b,
                      const std::function<Eigen::Vector2d(int, int)>& pos);

// Text export/import: sections for vertices, cells, and boundary face tags.
void save_mesh(const Mesh& mesh, const std::string& path);
Mesh load_mesh(const std::string& path);

// FNV-1a hash of the defining geometry, used by the eigenpair cache.
std::uint64_t mesh_hash(const Mesh& mesh);

}  // namespace limitlab
