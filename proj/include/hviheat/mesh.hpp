#pragma once

#include <array>
#include <span>
#include <vector>

namespace hviheat::fem {

// Boundary facet: a vertex in 1D (v[1] = -1), an oriented edge in 2D. The
// edge order (v[0], v[1]) follows the counterclockwise owner cell, so the
// outward normal is the right-hand rotation of v[1] - v[0].
struct Facet {
  std::array<int, 2> v{-1, -1};
  int cell = -1;
  double measure = 0.0;  // 1 in 1D (counting measure), length in 2D
};

// Conforming simplicial mesh of an interval or a star-shaped polygon.
struct Mesh {
  int dim = 1;
  std::vector<std::array<double, 2>> vertices;  // y = 0 in 1D
  std::vector<std::array<int, 3>> cells;        // 1D cells use [a, b, -1]
  std::vector<Facet> boundary_facets;
  std::vector<int> boundary_vertices;  // ascending
  std::vector<char> on_boundary;       // per vertex

  int n_vertices() const { return int(vertices.size()); }
  double cell_measure(int c) const;     // length / area
  double domain_measure() const;        // lambda_N(Omega)
  double boundary_measure() const;      // sigma(Gamma); 2 in 1D
  double max_edge() const;              // mesh size h
};

// Uniform interval mesh; boundary = the two endpoint vertices carrying the
// counting measure.
Mesh build_interval(double x0, double x1, int n_cells);

// Fan triangulation of a polygon (counterclockwise loop, star-shaped with
// respect to its centroid), uniformly refined until max_edge <= target_h.
Mesh build_polygon(std::span<const std::array<double, 2>> loop, double target_h);

// Parent pair per fine vertex; a copied coarse vertex has both parents equal.
struct Prolongation {
  std::vector<std::array<int, 2>> parents;

  std::vector<double> apply(std::span<const double> coarse) const;
};

// Midpoint (red) refinement; every cell splits into 2 (1D) or 4 (2D) children.
// The coarse P1 space is exactly contained in the fine one.
Mesh refine(const Mesh& mesh, Prolongation* prolongation = nullptr);

void validate(const Mesh& mesh);  // throws std::invalid_argument on defects

}  // namespace hviheat::fem
