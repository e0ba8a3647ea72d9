#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "varinf/errors.hpp"

namespace varinf {

enum class Region : std::uint8_t {
  OuterBulk = 0,      // interior node outside the closed subdomain D
  Inner = 1,          // node in the open subdomain D
  Interface = 2,      // node on the subdomain boundary
  OuterBoundary = 3,  // node on the outer boundary of the box
};

const char* region_name(Region r);
Region region_from_name(const std::string& name);

struct Vec2 {
  double x = 0.0;
  double y = 0.0;
};

struct Rect {
  double ax = 0.0, bx = 0.0;  // x extent [ax, bx]
  double ay = 0.0, by = 0.0;  // y extent [ay, by]

  double width() const { return bx - ax; }
  double height() const { return by - ay; }
  double area() const { return width() * height(); }
};

// Geometry request: outer box, optional interior rectangle D, and node
// counts per axis. D corners must land on grid nodes and D must stay at
// least one cell away from the outer boundary.
struct DomainSpec {
  Rect omega;
  std::optional<Rect> d;
  int nx = 0;
  int ny = 0;
};

// Outward unit normals attached to a boundary node. Face nodes carry one;
// corner nodes of the box or of D carry both face normals, and checks that
// consume normals must range over the whole set.
struct NormalSet {
  int count = 0;
  std::array<Vec2, 2> normals{};
};

struct NormalDerivative {
  double value = 0.0;
  // Set when only a two-node inward stencil fits (degenerate strip); the
  // value is then first-order accurate instead of second.
  bool first_order = false;
};

class Grid {
public:
  Rect omega;
  std::optional<Rect> d;
  int nx = 0, ny = 0;
  double hx = 0.0, hy = 0.0;

  // D corner node indices, valid when d is set: i in [di0, di1], j in [dj0, dj1].
  int di0 = -1, di1 = -1, dj0 = -1, dj1 = -1;

  std::vector<Region> labels;               // per node
  std::vector<double> boundary_weight;      // per node; 0 off the outer boundary
  std::vector<double> volume_weight;        // per node; lumped cell weights
  std::vector<std::uint8_t> cell_dbar;      // per cell: all four nodes in closed D
  std::vector<int> boundary_nodes;          // outer boundary, ascending node id
  std::vector<int> interface_nodes;         // ascending node id

  int num_nodes() const { return nx * ny; }
  int ncx() const { return nx - 1; }
  int ncy() const { return ny - 1; }
  int num_cells() const { return ncx() * ncy(); }

  int node_id(int i, int j) const { return j * nx + i; }
  int node_i(int n) const { return n % nx; }
  int node_j(int n) const { return n / nx; }
  bool in_grid(int i, int j) const { return i >= 0 && i < nx && j >= 0 && j < ny; }

  double node_x(int i) const { return omega.ax + i * hx; }
  double node_y(int j) const { return omega.ay + j * hy; }

  int cell_id(int cx, int cy) const { return cy * ncx() + cx; }
  int cell_cx(int c) const { return c % ncx(); }
  int cell_cy(int c) const { return c / ncx(); }
  double cell_weight() const { return hx * hy; }
  double cell_center_x(int c) const { return omega.ax + (cell_cx(c) + 0.5) * hx; }
  double cell_center_y(int c) const { return omega.ay + (cell_cy(c) + 0.5) * hy; }

  // Nodes of a cell in the fixed order (00, 10, 01, 11).
  std::array<int, 4> cell_nodes(int c) const {
    const int cx = cell_cx(c), cy = cell_cy(c);
    return {node_id(cx, cy), node_id(cx + 1, cy), node_id(cx, cy + 1),
            node_id(cx + 1, cy + 1)};
  }

  bool has_d() const { return d.has_value(); }
  bool node_in_dbar(int i, int j) const {
    return has_d() && i >= di0 && i <= di1 && j >= dj0 && j <= dj1;
  }

  double area() const { return omega.area(); }
  double perimeter() const { return 2.0 * (omega.width() + omega.height()); }
  double d_area() const { return has_d() ? d->area() : 0.0; }
};

// Builds the grid and classifies every node. Throws ValidationError with
// invariant DRectOffGrid / DRectTouchesBoundary / BadResolution / BadExtent.
Grid build_grid(const DomainSpec& spec);

// Region labels recomputed from scratch; build_grid stores the same vector.
std::vector<Region> classify_nodes(const Grid& g);

// Outward normals of a boundary node (outer boundary or interface).
// Throws Error("NotBoundaryNode") elsewhere.
NormalSet normal_set(const Grid& g, int node);

// Mean gradient of the bilinear interpolant over one cell.
Vec2 cell_gradient(const Grid& g, const std::vector<double>& u, int cell);

// One-sided derivative along outward normal `nu` at a boundary node, using
// the second-order three-node inward stencil. `nu` must belong to
// normal_set(g, node). Throws Error("StencilOutOfDomain") when not even a
// two-node stencil fits.
NormalDerivative normal_derivative(const Grid& g, const std::vector<double>& u,
                                   int node, const Vec2& nu);

}  // namespace varinf
