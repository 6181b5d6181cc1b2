#include "limitlab/mesh.hpp"

#include <algorithm>
#include <array>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>

#include "limitlab/errors.hpp"

namespace limitlab {

namespace {

struct Quad {
  Eigen::Vector2d p[4];  // counter-clockwise
};

double quad_area(const Quad& q) {
  double a = 0.0;
  for (int k = 0; k < 4; ++k) {
    const auto& u = q.p[k];
    const auto& v = q.p[(k + 1) % 4];
    a += u.x() * v.y() - v.x() * u.y();
  }
  return 0.5 * a;
}

Eigen::Vector2d quad_centroid(const Quad& q, double area) {
  Eigen::Vector2d c = Eigen::Vector2d::Zero();
  for (int k = 0; k < 4; ++k) {
    const auto& u = q.p[k];
    const auto& v = q.p[(k + 1) % 4];
    const double w = u.x() * v.y() - v.x() * u.y();
    c += w * (u + v);
  }
  return c / (6.0 * area);
}

}  // namespace

double Mesh::diameter() const {
  const Eigen::Vector2d lo = vertex.rowwise().minCoeff();
  const Eigen::Vector2d hi = vertex.rowwise().maxCoeff();
  return (hi - lo).norm();
}

Mesh build_structured(const StructuredBuild& b,
                      const std::function<Eigen::Vector2d(int, int)>& pos) {
  const int ni = b.ni, nj = b.nj;
  if (ni < 1 || nj < 1) throw GeometryError("build_structured: empty logical grid");

  const int nvi = b.periodic_i ? ni : ni + 1;
  const int nvj = b.periodic_j ? nj : nj + 1;

  Mesh m;
  m.ni = ni;
  m.nj = nj;
  m.periodic_i = b.periodic_i;
  m.periodic_j = b.periodic_j;
  m.translation_i = b.translation_i;
  m.translation_j = b.translation_j;

  // unique vertices
  m.vertex.resize(2, nvi * nvj);
  for (int i = 0; i < nvi; ++i)
    for (int j = 0; j < nvj; ++j) m.vertex.col(i * nvj + j) = pos(i, j);

  // corner lookup with exact periodic closure
  auto corner = [&](int i, int j) -> Eigen::Vector2d {
    Eigen::Vector2d shift = Eigen::Vector2d::Zero();
    int ii = i, jj = j;
    if (b.periodic_i && i == ni) {
      ii = 0;
      shift += b.translation_i;
    }
    if (b.periodic_j && j == nj) {
      jj = 0;
      shift += b.translation_j;
    }
    return m.vertex.col(ii * nvj + jj) + shift;
  };
  auto corner_id = [&](int i, int j) -> int {
    const int ii = (b.periodic_i && i == ni) ? 0 : i;
    const int jj = (b.periodic_j && j == nj) ? 0 : j;
    return ii * nvj + jj;
  };

  const int nc = ni * nj;
  m.cell_center.resize(2, nc);
  m.cell_volume.resize(nc);
  m.cell_vertex.resize(4, nc);
  for (int i = 0; i < ni; ++i) {
    for (int j = 0; j < nj; ++j) {
      const Quad q{{corner(i, j), corner(i + 1, j), corner(i + 1, j + 1), corner(i, j + 1)}};
      const double a = quad_area(q);
      if (!(a > 0.0))
        throw GeometryError("build_structured: degenerate or inverted cell (" +
                            std::to_string(i) + "," + std::to_string(j) + ")");
      const int c = m.cell_index(i, j);
      m.cell_volume[c] = a;
      m.cell_center.col(c) = quad_centroid(q, a);
      m.cell_vertex.col(c) << corner_id(i, j), corner_id(i + 1, j), corner_id(i + 1, j + 1),
          corner_id(i, j + 1);
    }
  }

  // faces
  std::vector<int> fl, fr;
  std::vector<Eigen::Vector2d> fn, fc;
  std::vector<double> fa, fd;
  std::vector<BoundaryTag> ft;

  auto push_face = [&](const Eigen::Vector2d& a, const Eigen::Vector2d& bpt, int cl, int cr,
                       BoundaryTag tag, const Eigen::Vector2d& wrap_shift) {
    const Eigen::Vector2d e = bpt - a;
    const double len = e.norm();
    if (!(len > 0.0)) throw GeometryError("build_structured: zero-length face");
    Eigen::Vector2d n(e.y() / len, -e.x() / len);
    const Eigen::Vector2d mid = 0.5 * (a + bpt);
    double delta;
    if (cr >= 0) {
      const Eigen::Vector2d d =
          (m.cell_center.col(cr) + wrap_shift) - m.cell_center.col(cl);
      if (n.dot(d) < 0.0) n = -n;
      delta = n.dot(d);
    } else {
      const Eigen::Vector2d d = mid - m.cell_center.col(cl);
      if (n.dot(d) < 0.0) n = -n;
      delta = n.dot(d);
    }
    if (!(delta > 0.0)) throw GeometryError("build_structured: nonpositive face distance");
    fl.push_back(cl);
    fr.push_back(cr);
    fn.push_back(n);
    fc.push_back(mid);
    fa.push_back(len);
    fd.push_back(delta);
    ft.push_back(tag);
  };

  if (b.periodic_i && ni < 2) throw GeometryError("build_structured: periodic i needs >= 2 cells");
  if (b.periodic_j && nj < 2) throw GeometryError("build_structured: periodic j needs >= 2 cells");

  // i-faces: between cell (i-1,j) and (i,j); boundaries at i = 0 and i = ni.
  // At a periodic seam (i = 0 wrap) the left cell is (ni-1,j), one period
  // below after shifting the right cell by +translation_i.
  for (int i = 0; i <= ni; ++i) {
    if (b.periodic_i && i == ni) break;
    for (int j = 0; j < nj; ++j) {
      const Eigen::Vector2d a = corner(i, j), c = corner(i, j + 1);
      if (i == 0 && !b.periodic_i) {
        push_face(a, c, m.cell_index(0, j), -1, b.tag_i_lo, Eigen::Vector2d::Zero());
      } else if (i == ni && !b.periodic_i) {
        push_face(a, c, m.cell_index(ni - 1, j), -1, b.tag_i_hi, Eigen::Vector2d::Zero());
      } else if (i == 0) {
        push_face(a, c, m.cell_index(ni - 1, j), m.cell_index(0, j), BoundaryTag::None,
                  b.translation_i);
      } else {
        push_face(a, c, m.cell_index(i - 1, j), m.cell_index(i, j), BoundaryTag::None,
                  Eigen::Vector2d::Zero());
      }
    }
  }

  // j-faces: between cell (i,j-1) and (i,j); boundaries at j = 0 and j = nj
  for (int j = 0; j <= nj; ++j) {
    if (b.periodic_j && j == nj) break;
    for (int i = 0; i < ni; ++i) {
      const Eigen::Vector2d a = corner(i, j), c = corner(i + 1, j);
      if (j == 0 && !b.periodic_j) {
        push_face(a, c, m.cell_index(i, 0), -1, b.tag_j_lo, Eigen::Vector2d::Zero());
      } else if (j == nj && !b.periodic_j) {
        push_face(a, c, m.cell_index(i, nj - 1), -1, b.tag_j_hi, Eigen::Vector2d::Zero());
      } else if (j == 0) {
        push_face(a, c, m.cell_index(i, nj - 1), m.cell_index(i, 0), BoundaryTag::None,
                  b.translation_j);
      } else {
        push_face(a, c, m.cell_index(i, j - 1), m.cell_index(i, j), BoundaryTag::None,
                  Eigen::Vector2d::Zero());
      }
    }
  }

  const int nf = static_cast<int>(fl.size());
  m.face_cell_l.resize(nf);
  m.face_cell_r.resize(nf);
  m.face_normal.resize(2, nf);
  m.face_center.resize(2, nf);
  m.face_area.resize(nf);
  m.face_delta.resize(nf);
  m.face_tag.resize(nf);
  for (int f = 0; f < nf; ++f) {
    m.face_cell_l[f] = fl[f];
    m.face_cell_r[f] = fr[f];
    m.face_normal.col(f) = fn[f];
    m.face_center.col(f) = fc[f];
    m.face_area[f] = fa[f];
    m.face_delta[f] = fd[f];
    m.face_tag[f] = ft[f];
  }
  return m;
}

Mesh interval_mesh(int n, double length) {
  StructuredBuild b;
  b.ni = n;
  b.nj = 1;
  const double h = length / n;
  return build_structured(
      b, [&](int i, int j) { return Eigen::Vector2d(i * h, static_cast<double>(j)); });
}

Mesh channel_mesh(int nx, int ny, double lx, double ly, bool periodic_x) {
  StructuredBuild b;
  b.ni = nx;
  b.nj = ny;
  b.periodic_i = periodic_x;
  b.translation_i = Eigen::Vector2d(lx, 0.0);
  const double hx = lx / nx, hy = ly / ny;
  return build_structured(b, [&](int i, int j) { return Eigen::Vector2d(i * hx, j * hy); });
}

Mesh periodic_box_mesh(int nx, int ny, double lx, double ly) {
  StructuredBuild b;
  b.ni = nx;
  b.nj = ny;
  b.periodic_i = b.periodic_j = true;
  b.translation_i = Eigen::Vector2d(lx, 0.0);
  b.translation_j = Eigen::Vector2d(0.0, ly);
  const double hx = lx / nx, hy = ly / ny;
  return build_structured(b, [&](int i, int j) { return Eigen::Vector2d(i * hx, j * hy); });
}

void save_mesh(const Mesh& mesh, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw IoError("save_mesh: cannot open " + path);
  char buf[96];
  out << "# limitlab mesh v1\n";
  out << "# logical " << mesh.ni << " " << mesh.nj << " " << (mesh.periodic_i ? 1 : 0) << " "
      << (mesh.periodic_j ? 1 : 0) << "\n";
  out << "vertices " << mesh.vertex.cols() << "\n";
  for (Eigen::Index v = 0; v < mesh.vertex.cols(); ++v) {
    std::snprintf(buf, sizeof buf, "%.17g %.17g\n", mesh.vertex(0, v), mesh.vertex(1, v));
    out << buf;
  }
  out << "cells " << mesh.cell_vertex.cols() << "\n";
  for (Eigen::Index c = 0; c < mesh.cell_vertex.cols(); ++c)
    out << mesh.cell_vertex(0, c) << " " << mesh.cell_vertex(1, c) << " " << mesh.cell_vertex(2, c)
        << " " << mesh.cell_vertex(3, c) << "\n";
  int nb = 0;
  for (int f = 0; f < mesh.n_faces(); ++f)
    if (mesh.is_boundary(f)) ++nb;
  out << "facetags " << nb << "\n";
  for (int f = 0; f < mesh.n_faces(); ++f) {
    if (!mesh.is_boundary(f)) continue;
    // identify the boundary edge by its two vertex ids on the owner cell
    const int c = mesh.face_cell_l[f];
    int va = -1, vb = -1;
    double best = 1e300;
    for (int k = 0; k < 4; ++k) {
      const int a = mesh.cell_vertex(k, c), d = mesh.cell_vertex((k + 1) % 4, c);
      const Eigen::Vector2d midpt = 0.5 * (mesh.vertex.col(a) + mesh.vertex.col(d));
      const double dist = (midpt - mesh.face_center.col(f)).squaredNorm();
      if (dist < best) {
        best = dist;
        va = a;
        vb = d;
      }
    }
    out << va << " " << vb << " " << static_cast<int>(mesh.face_tag[f]) << "\n";
  }
}

Mesh load_mesh(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("load_mesh: cannot open " + path);
  std::string line;
  int ni = 0, nj = 0, pi = 0, pj = 0;
  long nv = -1;
  Eigen::Matrix2Xd verts;
  std::vector<std::array<int, 4>> quads;
  std::map<std::pair<int, int>, BoundaryTag> tags;

  std::string word;
  while (in >> word) {
    if (word == "#") {
      in >> word;
      if (word == "logical") {
        in >> ni >> nj >> pi >> pj;
      } else {
        std::getline(in, line);
      }
    } else if (word == "vertices") {
      in >> nv;
      verts.resize(2, nv);
      for (long v = 0; v < nv; ++v) in >> verts(0, v) >> verts(1, v);
    } else if (word == "cells") {
      long nc;
      in >> nc;
      quads.resize(nc);
      for (long c = 0; c < nc; ++c)
        in >> quads[c][0] >> quads[c][1] >> quads[c][2] >> quads[c][3];
    } else if (word == "facetags") {
      long nb;
      in >> nb;
      for (long k = 0; k < nb; ++k) {
        int a, b, t;
        in >> a >> b >> t;
        tags[{std::min(a, b), std::max(a, b)}] = static_cast<BoundaryTag>(t);
      }
    } else {
      std::getline(in, line);  // skip unknown section remainder
    }
  }
  if (nv < 0 || quads.empty()) throw IoError("load_mesh: malformed file " + path);
  if (ni * nj != static_cast<int>(quads.size()))
    throw IoError("load_mesh: logical header inconsistent with cell count");

  StructuredBuild b;
  b.ni = ni;
  b.nj = nj;
  b.periodic_i = pi != 0;
  b.periodic_j = pj != 0;
  // Only rotation-periodic meshes round-trip (the mesher never exports
  // translation-periodic test grids).
  if (b.periodic_i) throw IoError("load_mesh: periodic-i meshes are not supported in files");
  const int nvj = b.periodic_j ? nj : nj + 1;
  Mesh m = build_structured(b, [&](int i, int j) -> Eigen::Vector2d {
    return verts.col(i * nvj + j);
  });
  // restore tags
  for (int f = 0; f < m.n_faces(); ++f) {
    if (!m.is_boundary(f)) continue;
    const int c = m.face_cell_l[f];
    for (int k = 0; k < 4; ++k) {
      const int a = m.cell_vertex(k, c), d = m.cell_vertex((k + 1) % 4, c);
      auto it = tags.find({std::min(a, d), std::max(a, d)});
      if (it == tags.end()) continue;
      const Eigen::Vector2d midpt = 0.5 * (m.vertex.col(a) + m.vertex.col(d));
      if ((midpt - m.face_center.col(f)).squaredNorm() < 1e-24 * (1.0 + midpt.squaredNorm()))
        m.face_tag[f] = it->second;
    }
  }
  return m;
}

std::uint64_t mesh_hash(const Mesh& mesh) {
  std::uint64_t h = 1469598103934665603ull;
  auto mix = [&](const void* data, size_t n) {
    const auto* p = static_cast<const unsigned char*>(data);
    for (size_t k = 0; k < n; ++k) {
      h ^= p[k];
      h *= 1099511628211ull;
    }
  };
  const int ints[4] = {mesh.ni, mesh.nj, mesh.periodic_i ? 1 : 0, mesh.periodic_j ? 1 : 0};
  mix(ints, sizeof ints);
  mix(mesh.vertex.data(), sizeof(double) * 2 * mesh.vertex.cols());
  return h;
}

}  // namespace limitlab
