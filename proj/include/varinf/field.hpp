#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <vector>

#include "varinf/geometry.hpp"

namespace varinf {

// Nodal scalar field bound to a grid. The grid must outlive the field.
struct ScalarField {
  const Grid* grid = nullptr;
  std::vector<double> v;

  ScalarField() = default;
  explicit ScalarField(const Grid& g, double init = 0.0)
      : grid(&g), v(static_cast<std::size_t>(g.num_nodes()), init) {}

  double& operator[](int n) { return v[static_cast<std::size_t>(n)]; }
  double operator[](int n) const { return v[static_cast<std::size_t>(n)]; }
  int size() const { return static_cast<int>(v.size()); }
};

inline ScalarField make_field(const Grid& g,
                              const std::function<double(double, double)>& f) {
  ScalarField u(g);
  for (int j = 0; j < g.ny; ++j)
    for (int i = 0; i < g.nx; ++i)
      u[g.node_id(i, j)] = f(g.node_x(i), g.node_y(j));
  return u;
}

inline double sup_norm(const ScalarField& u) {
  double m = 0.0;
  for (double x : u.v) m = std::max(m, std::abs(x));
  return m;
}

inline double sup_diff(const ScalarField& a, const ScalarField& b) {
  if (a.size() != b.size())
    throw Error("ShapeMismatch", "fields live on different grids");
  double m = 0.0;
  for (int n = 0; n < a.size(); ++n) m = std::max(m, std::abs(a[n] - b[n]));
  return m;
}

// max(u) - min(u); the natural scale for relative field tolerances.
inline double field_range(const ScalarField& u) {
  const auto [lo, hi] = std::minmax_element(u.v.begin(), u.v.end());
  return *hi - *lo;
}

inline void check_finite(const ScalarField& u, const char* what) {
  for (int n = 0; n < u.size(); ++n) {
    if (!std::isfinite(u[n]))
      throw Error("NonFiniteField",
                  std::string(what) + " has a non-finite value at node " +
                      std::to_string(n));
  }
}

}  // namespace varinf
