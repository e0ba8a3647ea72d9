#include "varinf/reference.hpp"

#include <cmath>

namespace varinf::reference {

double energy_total(const Grid& g, const ScalarField& u,
                    const TruncatedExponent& pk, const ScalarField& gbc) {
  double bulk = 0.0;
  const double w = g.cell_weight();
  for (int c = 0; c < g.num_cells(); ++c) {
    const Vec2 gr = cell_gradient(g, u.v, c);
    const double m = std::hypot(gr.x, gr.y);
    const double p = cell_exponent(pk, c);
    bulk += w * std::pow(m, p) / p;
  }
  double bnd = 0.0;
  for (int n : g.boundary_nodes) bnd += g.boundary_weight[n] * gbc[n] * u[n];
  return bulk - bnd;
}

ScalarField energy_gradient(const Grid& g, const ScalarField& u,
                            const TruncatedExponent& pk, const ScalarField& gbc) {
  ScalarField grad(g);
  const double w = g.cell_weight();
  const double cx2 = 1.0 / (2.0 * g.hx);
  const double cy2 = 1.0 / (2.0 * g.hy);
  // scatter form: each cell pushes into its four corners
  for (int c = 0; c < g.num_cells(); ++c) {
    const Vec2 gr = cell_gradient(g, u.v, c);
    const double m = std::hypot(gr.x, gr.y);
    const double p = cell_exponent(pk, c);
    const double fac = w * (m == 0.0 ? 0.0 : std::pow(m, p - 2.0));
    const auto n = g.cell_nodes(c);
    const double tx = fac * gr.x * cx2;
    const double ty = fac * gr.y * cy2;
    grad[n[0]] += -tx - ty;
    grad[n[1]] += tx - ty;
    grad[n[2]] += -tx + ty;
    grad[n[3]] += tx + ty;
  }
  for (int n : g.boundary_nodes) grad[n] -= g.boundary_weight[n] * gbc[n];
  return grad;
}

double modular_bulk_gradient(const Grid& g, const ScalarField& u,
                             const TruncatedExponent& pk) {
  double s = 0.0;
  const double w = g.cell_weight();
  for (int c = 0; c < g.num_cells(); ++c) {
    const Vec2 gr = cell_gradient(g, u.v, c);
    s += w * std::pow(std::hypot(gr.x, gr.y), cell_exponent(pk, c));
  }
  return s;
}

}  // namespace varinf::reference
