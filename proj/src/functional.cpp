#include "varinf/functional.hpp"

#include <cassert>
#include <cmath>
#include <limits>

#include "varinf/kernels.hpp"

namespace varinf {

namespace {

constexpr double kExpCap = 700.0;
constexpr double kInf = std::numeric_limits<double>::infinity();

// f^p for f >= 0 via exp(p ln f); +inf once the argument passes the cap.
inline double pow_capped(double f, double p) {
  if (f == 0.0) return 0.0;
  const double e = p * std::log(f);
  if (e > kExpCap) return kInf;
  return std::exp(e);
}

// Locates the first bad sample serially and throws. Called only after a
// reduction came back non-finite, so the scan cost does not matter.
[[noreturn]] void throw_overflow(const SampleSet& s) {
  for (std::size_t i = 0; i < s.f.size(); ++i) {
    const double t = s.w[i] * pow_capped(s.f[i], s.p[i]);
    if (!std::isfinite(t)) {
      double x = static_cast<double>(i), y = 0.0;
      if (s.grid && static_cast<int>(s.f.size()) == s.grid->num_cells()) {
        x = s.grid->cell_center_x(static_cast<int>(i));
        y = s.grid->cell_center_y(static_cast<int>(i));
      }
      if (std::isfinite(s.f[i]) && std::isfinite(s.w[i]))
        throw ModularOverflow(x, y, s.p[i], s.f[i]);
      throw Error("NonFiniteSample", "non-finite quadrature sample");
    }
  }
  throw Error("NonFiniteSample", "reduction non-finite but every term finite");
}

struct GradScratch {
  std::vector<double> fx, fy;  // per cell: w |grad|^{p-2} * component
};

}  // namespace

SampleSet value_samples(const Grid& g, const ScalarField& u, const TruncatedExponent& pk) {
  SampleSet s;
  s.grid = &g;
  const int nc = g.num_cells();
  s.w.assign(static_cast<std::size_t>(nc), g.cell_weight());
  s.f.resize(static_cast<std::size_t>(nc));
  s.p = cell_exponents(pk);
  for (int c = 0; c < nc; ++c) {
    const auto n = g.cell_nodes(c);
    s.f[static_cast<std::size_t>(c)] =
        std::abs(0.25 * (u[n[0]] + u[n[1]] + u[n[2]] + u[n[3]]));
  }
  return s;
}

SampleSet gradient_samples(const Grid& g, const ScalarField& u, const TruncatedExponent& pk) {
  SampleSet s;
  s.grid = &g;
  const int nc = g.num_cells();
  s.w.assign(static_cast<std::size_t>(nc), g.cell_weight());
  s.f.resize(static_cast<std::size_t>(nc));
  s.p = cell_exponents(pk);
  for (int c = 0; c < nc; ++c) {
    const Vec2 gr = cell_gradient(g, u.v, c);
    s.f[static_cast<std::size_t>(c)] = std::hypot(gr.x, gr.y);
  }
  return s;
}

double modular_guarded(const SampleSet& s) {
  const int n = static_cast<int>(s.f.size());
  return kernels::map_reduce(n, [&s](int i) {
    const auto k = static_cast<std::size_t>(i);
    return s.w[k] * pow_capped(s.f[k], s.p[k]);
  });
}

double modular(const SampleSet& s) {
  const double r = modular_guarded(s);
  if (!std::isfinite(r)) throw_overflow(s);
  return r;
}

double luxemburg_norm(const SampleSet& s) {
  double fmax = 0.0;
  for (double f : s.f) fmax = std::max(fmax, f);
  if (fmax == 0.0) return 0.0;

  SampleSet scaled = s;
  auto rho = [&](double lam) {
    for (std::size_t i = 0; i < s.f.size(); ++i) scaled.f[i] = s.f[i] / lam;
    return modular_guarded(scaled);
  };

  double hi = fmax, lo = fmax;
  int tries = 0;
  while (rho(hi) > 1.0) {
    hi *= 2.0;
    if (++tries > 200) throw Error("BracketFailure", "no upper bracket after 200 doublings");
  }
  tries = 0;
  while (rho(lo) <= 1.0) {
    lo *= 0.5;
    if (++tries > 200) throw Error("BracketFailure", "no lower bracket after 200 halvings");
  }
  while (hi - lo > 1e-10 * hi) {
    const double mid = 0.5 * (lo + hi);
    if (rho(mid) > 1.0)
      lo = mid;
    else
      hi = mid;
  }
  return hi;  // feasible side of the infimum
}

namespace {

// Shared bulk loop: buffer of per-cell energy terms w |grad|^{p_c}/p_c.
std::vector<double> bulk_terms(const Grid& g, const ScalarField& u,
                               const std::vector<double>& pc) {
  const int nc = g.num_cells();
  std::vector<double> buf(static_cast<std::size_t>(nc));
  const double w = g.cell_weight();
  kernels::parallel_for(nc, [&](int c) {
    const Vec2 gr = cell_gradient(g, u.v, c);
    const double m = std::hypot(gr.x, gr.y);
    const double p = pc[static_cast<std::size_t>(c)];
    buf[static_cast<std::size_t>(c)] = w * pow_capped(m, p) / p;
  });
  return buf;
}

[[noreturn]] void throw_bulk_overflow(const Grid& g, const ScalarField& u,
                                      const std::vector<double>& pc) {
  for (int c = 0; c < g.num_cells(); ++c) {
    const Vec2 gr = cell_gradient(g, u.v, c);
    const double m = std::hypot(gr.x, gr.y);
    const double p = pc[static_cast<std::size_t>(c)];
    if (!std::isfinite(pow_capped(m, p)) || !std::isfinite(m))
      throw ModularOverflow(g.cell_center_x(c), g.cell_center_y(c), p, m);
  }
  throw Error("NonFiniteSample", "bulk energy non-finite but every term finite");
}

}  // namespace

double boundary_term(const Grid& g, const ScalarField& u, const ScalarField& gbc) {
  const int nb = static_cast<int>(g.boundary_nodes.size());
  return kernels::map_reduce(nb, [&](int i) {
    const int n = g.boundary_nodes[static_cast<std::size_t>(i)];
    return g.boundary_weight[n] * gbc[n] * u[n];
  });
}

double compatibility_defect(const Grid& g, const ScalarField& gbc) {
  const int nb = static_cast<int>(g.boundary_nodes.size());
  return kernels::map_reduce(nb, [&](int i) {
    const int n = g.boundary_nodes[static_cast<std::size_t>(i)];
    return g.boundary_weight[n] * gbc[n];
  });
}

EnergyParts energy_truncated(const Grid& g, const ScalarField& u,
                             const TruncatedExponent& pk, const ScalarField& gbc) {
  const auto pc = cell_exponents(pk);
  auto buf = bulk_terms(g, u, pc);
  std::vector<double> dbuf(buf.size(), 0.0);
  for (std::size_t c = 0; c < buf.size(); ++c)
    if (g.cell_dbar[c]) dbuf[c] = buf[c];

  EnergyParts e;
  e.bulk = kernels::pairwise_sum(buf);
  e.dterm = kernels::pairwise_sum(dbuf);
  if (!std::isfinite(e.bulk)) throw_bulk_overflow(g, u, pc);
  e.boundary = boundary_term(g, u, gbc);
  e.total = e.bulk - e.boundary;
  return e;
}

EnergyParts energy_limit(const Grid& g, const ScalarField& u,
                         const TruncatedExponent& pk, const ScalarField& gbc) {
  const auto pc = cell_exponents(pk);
  auto buf = bulk_terms(g, u, pc);
  for (std::size_t c = 0; c < buf.size(); ++c)
    if (g.cell_dbar[c]) buf[c] = 0.0;

  EnergyParts e;
  e.bulk = kernels::pairwise_sum(buf);
  if (!std::isfinite(e.bulk)) throw_bulk_overflow(g, u, pc);
  e.boundary = boundary_term(g, u, gbc);
  e.total = e.bulk - e.boundary;
  return e;
}

double energy_total_guarded(const Grid& g, const ScalarField& u,
                            const TruncatedExponent& pk, const ScalarField& gbc) {
  const auto pc = cell_exponents(pk);
  auto buf = bulk_terms(g, u, pc);
  const double bulk = kernels::pairwise_sum(buf);
  if (!std::isfinite(bulk)) return kInf;
  return bulk - boundary_term(g, u, gbc);
}

ScalarField energy_gradient(const Grid& g, const ScalarField& u,
                            const TruncatedExponent& pk, const ScalarField& gbc) {
  const auto pc = cell_exponents(pk);
  const int nc = g.num_cells();
  GradScratch sc;
  sc.fx.resize(static_cast<std::size_t>(nc));
  sc.fy.resize(static_cast<std::size_t>(nc));
  const double w = g.cell_weight();

  kernels::parallel_for(nc, [&](int c) {
    const auto ci = static_cast<std::size_t>(c);
    const Vec2 gr = cell_gradient(g, u.v, c);
    const double m = std::hypot(gr.x, gr.y);
    // |grad|^{p-2} stays representable whenever |grad|^p does
    const double fac = w * pow_capped(m, pc[ci] - 2.0);
    sc.fx[ci] = fac * gr.x;
    sc.fy[ci] = fac * gr.y;
  });

  ScalarField grad(g);
  const double cx2 = 1.0 / (2.0 * g.hx);
  const double cy2 = 1.0 / (2.0 * g.hy);
  kernels::parallel_for(g.num_nodes(), [&](int n) {
    const int i = g.node_i(n), j = g.node_j(n);
    double acc = 0.0;
    for (int cy = j - 1; cy <= j; ++cy) {
      if (cy < 0 || cy >= g.ncy()) continue;
      for (int cx = i - 1; cx <= i; ++cx) {
        if (cx < 0 || cx >= g.ncx()) continue;
        const auto c = static_cast<std::size_t>(g.cell_id(cx, cy));
        const double sx = (cx == i - 1) ? 1.0 : -1.0;
        const double sy = (cy == j - 1) ? 1.0 : -1.0;
        acc += sc.fx[c] * sx * cx2 + sc.fy[c] * sy * cy2;
      }
    }
    acc -= g.boundary_weight[n] * gbc[n];
    grad[n] = acc;
  });

  for (int n = 0; n < grad.size(); ++n) {
    if (!std::isfinite(grad[n]))
      throw_bulk_overflow(g, u, pc);
  }
  return grad;
}

ScalarField energy_hessian_apply(const Grid& g, const ScalarField& u,
                                 const TruncatedExponent& pk, const ScalarField& v) {
  const auto pc = cell_exponents(pk);
  const int nc = g.num_cells();
  GradScratch sc;
  sc.fx.resize(static_cast<std::size_t>(nc));
  sc.fy.resize(static_cast<std::size_t>(nc));
  const double w = g.cell_weight();

  kernels::parallel_for(nc, [&](int c) {
    const auto ci = static_cast<std::size_t>(c);
    const Vec2 gr = cell_gradient(g, u.v, c);
    const Vec2 vg = cell_gradient(g, v.v, c);
    const double m = std::hypot(gr.x, gr.y);
    const double p = pc[ci];
    const double mpm2 = (p == 2.0) ? 1.0 : pow_capped(m, p - 2.0);
    double ax = mpm2 * vg.x, ay = mpm2 * vg.y;
    if (m > 0.0 && p != 2.0) {
      // unit-direction form keeps |grad|^{p-4} away from under/overflow
      const double hx = gr.x / m, hy = gr.y / m;
      const double dv = hx * vg.x + hy * vg.y;
      ax += (p - 2.0) * mpm2 * dv * hx;
      ay += (p - 2.0) * mpm2 * dv * hy;
    }
    sc.fx[ci] = w * ax;
    sc.fy[ci] = w * ay;
  });

  ScalarField out(g);
  const double cx2 = 1.0 / (2.0 * g.hx);
  const double cy2 = 1.0 / (2.0 * g.hy);
  kernels::parallel_for(g.num_nodes(), [&](int n) {
    const int i = g.node_i(n), j = g.node_j(n);
    double acc = 0.0;
    for (int cy = j - 1; cy <= j; ++cy) {
      if (cy < 0 || cy >= g.ncy()) continue;
      for (int cx = i - 1; cx <= i; ++cx) {
        if (cx < 0 || cx >= g.ncx()) continue;
        const auto c = static_cast<std::size_t>(g.cell_id(cx, cy));
        const double sx = (cx == i - 1) ? 1.0 : -1.0;
        const double sy = (cy == j - 1) ? 1.0 : -1.0;
        acc += sc.fx[c] * sx * cx2 + sc.fy[c] * sy * cy2;
      }
    }
    out[n] = acc;
  });
  return out;
}

double weak_residual(const Grid& g, const ScalarField& u,
                     const TruncatedExponent& pk, const ScalarField& gbc,
                     const ScalarField& v) {
  const ScalarField grad = energy_gradient(g, u, pk, gbc);
  const int n = g.num_nodes();
  const double r = kernels::map_reduce(
      n, [&](int i) { return grad[i] * v[i]; });
  return r;
}

double modular_bulk_gradient(const Grid& g, const ScalarField& u,
                             const TruncatedExponent& pk) {
  const auto pc = cell_exponents(pk);
  const double w = g.cell_weight();
  const double r = kernels::map_reduce(g.num_cells(), [&](int c) {
    const Vec2 gr = cell_gradient(g, u.v, c);
    return w * pow_capped(std::hypot(gr.x, gr.y), pc[static_cast<std::size_t>(c)]);
  });
  if (!std::isfinite(r)) throw_bulk_overflow(g, u, pc);
  return r;
}

double quadrature_mean(const Grid& g, const ScalarField& u) {
  const double w = g.cell_weight();
  const double s = kernels::map_reduce(g.num_cells(), [&](int c) {
    const auto n = g.cell_nodes(c);
    return w * 0.25 * (u[n[0]] + u[n[1]] + u[n[2]] + u[n[3]]);
  });
  return s / g.area();
}

double max_cell_gradient(const Grid& g, const ScalarField& u, CellFilter filter) {
  double m = 0.0;
  for (int c = 0; c < g.num_cells(); ++c) {
    if (filter == CellFilter::DbarOnly && !g.cell_dbar[c]) continue;
    if (filter == CellFilter::OuterOnly && g.cell_dbar[c]) continue;
    const Vec2 gr = cell_gradient(g, u.v, c);
    m = std::max(m, std::hypot(gr.x, gr.y));
  }
  return m;
}

}  // namespace varinf
