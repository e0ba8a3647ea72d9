#include "varinf/geometry.hpp"

#include <cmath>
#include <cstdlib>

namespace varinf {

const char* region_name(Region r) {
  switch (r) {
    case Region::OuterBulk: return "OUTER_BULK";
    case Region::Inner: return "INNER";
    case Region::Interface: return "INTERFACE";
    case Region::OuterBoundary: return "OUTER_BOUNDARY";
  }
  return "?";
}

Region region_from_name(const std::string& name) {
  if (name == "OUTER_BULK") return Region::OuterBulk;
  if (name == "INNER") return Region::Inner;
  if (name == "INTERFACE") return Region::Interface;
  if (name == "OUTER_BOUNDARY") return Region::OuterBoundary;
  throw Error("BadRegionName", "unknown region label '" + name + "'");
}

namespace {

// Snap a physical coordinate to a node index; the subdomain corners must sit
// on nodes up to a relative slack of 1e-9.
int snap_index(double coord, double origin, double h, const char* what) {
  const double f = (coord - origin) / h;
  const double r = std::round(f);
  if (std::abs(f - r) > 1e-9 * (1.0 + std::abs(f))) {
    throw ValidationError("DRectOffGrid",
                          std::string(what) + " = " + std::to_string(coord) +
                              " does not land on a grid node");
  }
  return static_cast<int>(r);
}

}  // namespace

Grid build_grid(const DomainSpec& spec) {
  if (spec.nx < 2 || spec.ny < 2) {
    throw ValidationError("BadResolution", "need at least 2 nodes per axis, got " +
                                               std::to_string(spec.nx) + "x" +
                                               std::to_string(spec.ny));
  }
  if (!(spec.omega.width() > 0.0) || !(spec.omega.height() > 0.0)) {
    throw ValidationError("BadExtent", "outer box must have positive extent");
  }

  Grid g;
  g.omega = spec.omega;
  g.d = spec.d;
  g.nx = spec.nx;
  g.ny = spec.ny;
  g.hx = spec.omega.width() / (spec.nx - 1);
  g.hy = spec.omega.height() / (spec.ny - 1);

  if (g.d) {
    if (!(g.d->width() > 0.0) || !(g.d->height() > 0.0)) {
      throw ValidationError("BadExtent", "subdomain must have positive extent");
    }
    g.di0 = snap_index(g.d->ax, g.omega.ax, g.hx, "d.ax");
    g.di1 = snap_index(g.d->bx, g.omega.ax, g.hx, "d.bx");
    g.dj0 = snap_index(g.d->ay, g.omega.ay, g.hy, "d.ay");
    g.dj1 = snap_index(g.d->by, g.omega.ay, g.hy, "d.by");
    if (g.di0 < 1 || g.di1 > g.nx - 2 || g.dj0 < 1 || g.dj1 > g.ny - 2) {
      throw ValidationError("DRectTouchesBoundary",
                            "subdomain must stay at least one cell inside the box");
    }
    if (g.di1 <= g.di0 || g.dj1 <= g.dj0) {
      throw ValidationError("BadExtent", "subdomain needs at least one cell per axis");
    }
  }

  g.labels = classify_nodes(g);

  g.boundary_weight.assign(g.num_nodes(), 0.0);
  for (int i = 0; i < g.nx; ++i) {
    const double w = (i == 0 || i == g.nx - 1) ? 0.5 * g.hx : g.hx;
    g.boundary_weight[g.node_id(i, 0)] += w;
    g.boundary_weight[g.node_id(i, g.ny - 1)] += w;
  }
  for (int j = 0; j < g.ny; ++j) {
    const double w = (j == 0 || j == g.ny - 1) ? 0.5 * g.hy : g.hy;
    g.boundary_weight[g.node_id(0, j)] += w;
    g.boundary_weight[g.node_id(g.nx - 1, j)] += w;
  }

  g.volume_weight.assign(g.num_nodes(), 0.0);
  const double wq = 0.25 * g.cell_weight();
  for (int c = 0; c < g.num_cells(); ++c) {
    for (int n : g.cell_nodes(c)) g.volume_weight[n] += wq;
  }

  g.cell_dbar.assign(g.num_cells(), 0);
  if (g.d) {
    for (int c = 0; c < g.num_cells(); ++c) {
      const int cx = g.cell_cx(c), cy = g.cell_cy(c);
      const bool inside = cx >= g.di0 && cx + 1 <= g.di1 && cy >= g.dj0 && cy + 1 <= g.dj1;
      g.cell_dbar[c] = inside ? 1 : 0;
    }
  }

  for (int n = 0; n < g.num_nodes(); ++n) {
    if (g.labels[n] == Region::OuterBoundary) g.boundary_nodes.push_back(n);
    if (g.labels[n] == Region::Interface) g.interface_nodes.push_back(n);
  }
  return g;
}

std::vector<Region> classify_nodes(const Grid& g) {
  std::vector<Region> labels(g.num_nodes(), Region::OuterBulk);
  for (int j = 0; j < g.ny; ++j) {
    for (int i = 0; i < g.nx; ++i) {
      Region r = Region::OuterBulk;
      if (i == 0 || i == g.nx - 1 || j == 0 || j == g.ny - 1) {
        r = Region::OuterBoundary;
      } else if (g.node_in_dbar(i, j)) {
        const bool edge = (i == g.di0 || i == g.di1 || j == g.dj0 || j == g.dj1);
        r = edge ? Region::Interface : Region::Inner;
      }
      labels[g.node_id(i, j)] = r;
    }
  }
  return labels;
}

NormalSet normal_set(const Grid& g, int node) {
  const Region r = g.labels.at(node);
  const int i = g.node_i(node), j = g.node_j(node);
  NormalSet s;
  auto add = [&s](double x, double y) {
    s.normals[s.count].x = x;
    s.normals[s.count].y = y;
    ++s.count;
  };
  if (r == Region::OuterBoundary) {
    if (i == 0) add(-1.0, 0.0);
    if (i == g.nx - 1) add(1.0, 0.0);
    if (j == 0) add(0.0, -1.0);
    if (j == g.ny - 1) add(0.0, 1.0);
  } else if (r == Region::Interface) {
    // Exterior normals of the subdomain rectangle.
    if (i == g.di0) add(-1.0, 0.0);
    if (i == g.di1) add(1.0, 0.0);
    if (j == g.dj0) add(0.0, -1.0);
    if (j == g.dj1) add(0.0, 1.0);
  } else {
    throw Error("NotBoundaryNode",
                "node " + std::to_string(node) + " has region " + region_name(r));
  }
  return s;
}

Vec2 cell_gradient(const Grid& g, const std::vector<double>& u, int cell) {
  const auto n = g.cell_nodes(cell);
  Vec2 grad;
  grad.x = (u[n[1]] - u[n[0]] + u[n[3]] - u[n[2]]) / (2.0 * g.hx);
  grad.y = (u[n[2]] - u[n[0]] + u[n[3]] - u[n[1]]) / (2.0 * g.hy);
  return grad;
}

NormalDerivative normal_derivative(const Grid& g, const std::vector<double>& u,
                                   int node, const Vec2& nu) {
  const Region r = g.labels.at(node);
  if (r != Region::OuterBoundary && r != Region::Interface) {
    throw Error("NotBoundaryNode",
                "node " + std::to_string(node) + " has region " + region_name(r));
  }
  int di = 0, dj = 0;
  double h = 0.0;
  if (std::abs(nu.x) == 1.0 && nu.y == 0.0) {
    di = nu.x > 0 ? -1 : 1;  // inward step opposes the normal
    h = g.hx;
  } else if (std::abs(nu.y) == 1.0 && nu.x == 0.0) {
    dj = nu.y > 0 ? -1 : 1;
    h = g.hy;
  } else {
    throw Error("BadNormal", "normal must be an axis unit vector");
  }

  const int i = g.node_i(node), j = g.node_j(node);
  if (!g.in_grid(i + di, j + dj)) {
    throw Error("StencilOutOfDomain",
                "no inward neighbour at node " + std::to_string(node));
  }
  NormalDerivative out;
  const double u0 = u[node];
  const double u1 = u[g.node_id(i + di, j + dj)];
  if (g.in_grid(i + 2 * di, j + 2 * dj)) {
    const double u2 = u[g.node_id(i + 2 * di, j + 2 * dj)];
    out.value = (3.0 * u0 - 4.0 * u1 + u2) / (2.0 * h);
  } else {
    out.value = (u0 - u1) / h;
    out.first_order = true;
  }
  return out;
}

}  // namespace varinf
