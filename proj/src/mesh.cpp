#include "hviheat/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <stdexcept>

namespace hviheat::fem {

namespace {

double dist(const std::array<double, 2>& a, const std::array<double, 2>& b) {
  return std::hypot(a[0] - b[0], a[1] - b[1]);
}

double triangle_area(const std::array<double, 2>& a, const std::array<double, 2>& b,
                     const std::array<double, 2>& c) {
  return 0.5 * ((b[0] - a[0]) * (c[1] - a[1]) - (c[0] - a[0]) * (b[1] - a[1]));
}

void finish_boundary(Mesh& m) {
  m.on_boundary.assign(size_t(m.n_vertices()), 0);
  m.boundary_vertices.clear();
  for (const Facet& f : m.boundary_facets) {
    m.on_boundary[size_t(f.v[0])] = 1;
    if (f.v[1] >= 0) m.on_boundary[size_t(f.v[1])] = 1;
  }
  for (int v = 0; v < m.n_vertices(); ++v)
    if (m.on_boundary[size_t(v)]) m.boundary_vertices.push_back(v);
}

// Boundary edges of a 2D mesh: edges owned by exactly one cell, oriented as
// in their counterclockwise owner.
void rebuild_boundary_2d(Mesh& m) {
  std::map<std::pair<int, int>, std::pair<int, int>> count;  // sorted edge -> (count, cell)
  auto touch = [&](int a, int b, int cell) {
    auto key = std::minmax(a, b);
    auto& e = count[{key.first, key.second}];
    ++e.first;
    e.second = cell;
  };
  for (size_t c = 0; c < m.cells.size(); ++c) {
    const auto& t = m.cells[c];
    touch(t[0], t[1], int(c));
    touch(t[1], t[2], int(c));
    touch(t[2], t[0], int(c));
  }
  m.boundary_facets.clear();
  for (size_t c = 0; c < m.cells.size(); ++c) {
    const auto& t = m.cells[c];
    const int e[3][2] = {{t[0], t[1]}, {t[1], t[2]}, {t[2], t[0]}};
    for (auto& ed : e) {
      auto key = std::minmax(ed[0], ed[1]);
      if (count[{key.first, key.second}].first == 1) {
        Facet f;
        f.v = {ed[0], ed[1]};
        f.cell = int(c);
        f.measure = dist(m.vertices[size_t(ed[0])], m.vertices[size_t(ed[1])]);
        m.boundary_facets.push_back(f);
      }
    }
  }
  finish_boundary(m);
}

}  // namespace

double Mesh::cell_measure(int c) const {
  const auto& cell = cells[size_t(c)];
  if (dim == 1) return std::fabs(vertices[size_t(cell[1])][0] - vertices[size_t(cell[0])][0]);
  return triangle_area(vertices[size_t(cell[0])], vertices[size_t(cell[1])],
                       vertices[size_t(cell[2])]);
}

double Mesh::domain_measure() const {
  double acc = 0.0;
  for (int c = 0; c < int(cells.size()); ++c) acc += cell_measure(c);
  return acc;
}

double Mesh::boundary_measure() const {
  double acc = 0.0;
  for (const Facet& f : boundary_facets) acc += f.measure;
  return acc;
}

double Mesh::max_edge() const {
  double h = 0.0;
  for (const auto& cell : cells) {
    if (dim == 1) {
      h = std::max(h, dist(vertices[size_t(cell[0])], vertices[size_t(cell[1])]));
    } else {
      h = std::max({h, dist(vertices[size_t(cell[0])], vertices[size_t(cell[1])]),
                    dist(vertices[size_t(cell[1])], vertices[size_t(cell[2])]),
                    dist(vertices[size_t(cell[2])], vertices[size_t(cell[0])])});
    }
  }
  return h;
}

Mesh build_interval(double x0, double x1, int n_cells) {
  if (!(x1 > x0)) throw std::invalid_argument("build_interval: need x1 > x0");
  if (n_cells < 1) throw std::invalid_argument("build_interval: need at least one cell");
  Mesh m;
  m.dim = 1;
  for (int i = 0; i <= n_cells; ++i) {
    double t = double(i) / double(n_cells);
    m.vertices.push_back({x0 + t * (x1 - x0), 0.0});
  }
  for (int i = 0; i < n_cells; ++i) m.cells.push_back({i, i + 1, -1});
  Facet left, right;
  left.v = {0, -1};
  left.cell = 0;
  left.measure = 1.0;
  right.v = {n_cells, -1};
  right.cell = n_cells - 1;
  right.measure = 1.0;
  m.boundary_facets = {left, right};
  finish_boundary(m);
  validate(m);
  return m;
}

Mesh build_polygon(std::span<const std::array<double, 2>> loop, double target_h) {
  if (loop.size() < 3) throw std::invalid_argument("build_polygon: need at least 3 vertices");
  if (!(target_h > 0.0)) throw std::invalid_argument("build_polygon: target h must be positive");

  std::array<double, 2> centroid{0.0, 0.0};
  for (const auto& p : loop) {
    centroid[0] += p[0];
    centroid[1] += p[1];
  }
  centroid[0] /= double(loop.size());
  centroid[1] /= double(loop.size());

  Mesh m;
  m.dim = 2;
  m.vertices.assign(loop.begin(), loop.end());
  m.vertices.push_back(centroid);
  const int c = int(loop.size());
  for (int i = 0; i < c; ++i) {
    int j = (i + 1) % c;
    if (triangle_area(centroid, loop[size_t(i)], loop[size_t(j)]) <= 0.0)
      throw std::invalid_argument(
          "build_polygon: loop must be counterclockwise and star-shaped about its centroid");
    m.cells.push_back({c, i, j});
  }
  rebuild_boundary_2d(m);

  int guard = 0;
  while (m.max_edge() > target_h) {
    m = refine(m);
    if (++guard > 24) throw std::invalid_argument("build_polygon: target h is too small");
  }
  validate(m);
  return m;
}

std::vector<double> Prolongation::apply(std::span<const double> coarse) const {
  std::vector<double> fine(parents.size());
  for (size_t i = 0; i < parents.size(); ++i) {
    auto [a, b] = parents[i];
    fine[i] = a == b ? coarse[size_t(a)] : 0.5 * (coarse[size_t(a)] + coarse[size_t(b)]);
  }
  return fine;
}

Mesh refine(const Mesh& mesh, Prolongation* prolongation) {
  Mesh out;
  out.dim = mesh.dim;
  out.vertices = mesh.vertices;

  Prolongation prol;
  for (int v = 0; v < mesh.n_vertices(); ++v) prol.parents.push_back({v, v});

  std::map<std::pair<int, int>, int> midpoint;
  auto mid = [&](int a, int b) {
    auto key = std::minmax(a, b);
    auto it = midpoint.find({key.first, key.second});
    if (it != midpoint.end()) return it->second;
    const auto& pa = mesh.vertices[size_t(a)];
    const auto& pb = mesh.vertices[size_t(b)];
    int idx = int(out.vertices.size());
    out.vertices.push_back({0.5 * (pa[0] + pb[0]), 0.5 * (pa[1] + pb[1])});
    prol.parents.push_back({key.first, key.second});
    midpoint[{key.first, key.second}] = idx;
    return idx;
  };

  if (mesh.dim == 1) {
    for (const auto& cell : mesh.cells) {
      int m01 = mid(cell[0], cell[1]);
      out.cells.push_back({cell[0], m01, -1});
      out.cells.push_back({m01, cell[1], -1});
    }
    // Endpoint facets carry over; cells owning them changed index.
    for (const Facet& f : mesh.boundary_facets) {
      Facet nf = f;
      nf.cell = -1;
      for (size_t c = 0; c < out.cells.size(); ++c)
        if (out.cells[c][0] == f.v[0] || out.cells[c][1] == f.v[0]) {
          nf.cell = int(c);
          break;
        }
      out.boundary_facets.push_back(nf);
    }
    finish_boundary(out);
  } else {
    for (const auto& cell : mesh.cells) {
      int m01 = mid(cell[0], cell[1]);
      int m12 = mid(cell[1], cell[2]);
      int m20 = mid(cell[2], cell[0]);
      out.cells.push_back({cell[0], m01, m20});
      out.cells.push_back({m01, cell[1], m12});
      out.cells.push_back({m20, m12, cell[2]});
      out.cells.push_back({m01, m12, m20});
    }
    rebuild_boundary_2d(out);
  }

  if (prolongation) *prolongation = std::move(prol);
  validate(out);
  return out;
}

void validate(const Mesh& mesh) {
  if (mesh.dim != 1 && mesh.dim != 2) throw std::invalid_argument("mesh: dimension must be 1 or 2");
  for (size_t c = 0; c < mesh.cells.size(); ++c)
    if (!(mesh.cell_measure(int(c)) > 0.0))
      throw std::invalid_argument("mesh: nonpositive cell measure");
  for (const Facet& f : mesh.boundary_facets) {
    if (f.cell < 0 || f.cell >= int(mesh.cells.size()))
      throw std::invalid_argument("mesh: boundary facet with no owner cell");
    if (!(f.measure > 0.0)) throw std::invalid_argument("mesh: nonpositive facet measure");
  }
  if (mesh.boundary_facets.empty()) throw std::invalid_argument("mesh: empty boundary");
}

}  // namespace hviheat::fem
