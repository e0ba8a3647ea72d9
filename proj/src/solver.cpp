#include "varinf/solver.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "varinf/kernels.hpp"

namespace varinf {

namespace {

double dot_nodes(const ScalarField& a, const ScalarField& b) {
  return kernels::map_reduce(a.size(), [&](int i) { return a[i] * b[i]; });
}

}  // namespace

ScalarField project_mean_zero(const ScalarField& u) {
  const double m = quadrature_mean(*u.grid, u);
  ScalarField out = u;
  for (int n = 0; n < out.size(); ++n) out[n] -= m;
  return out;
}

ContinuationSchedule default_schedule(double p_plus) {
  ContinuationSchedule s;
  for (int j = 1; j <= 12; ++j) s.k_values.push_back(p_plus * std::ldexp(1.0, j));
  s.stop_early = true;
  return s;
}

SolveResult minimize_truncated(const Grid& g, const TruncatedExponent& pk,
                               const ScalarField& gbc, const ScalarField& warm,
                               const SolverConfig& cfg) {
  const double kInf = std::numeric_limits<double>::infinity();
  ScalarField u = project_mean_zero(warm);

  double E = energy_total_guarded(g, u, pk, gbc);
  for (int tries = 0; !std::isfinite(E); ++tries) {
    // a warm start handed over from a lower truncation level can overflow at
    // the new exponent; shrink it toward the admissible zero field
    if (tries >= 60) throw Error("BadWarmStart", "cannot reach a finite energy");
    for (auto& x : u.v) x *= 0.5;
    E = energy_total_guarded(g, u, pk, gbc);
  }

  // constraint normal: lumped volume weights
  ScalarField c(g);
  c.v = g.volume_weight;
  const double cc = dot_nodes(c, c);
  auto project_gradient = [&](const ScalarField& grad) {
    const double s = dot_nodes(c, grad) / cc;
    ScalarField gp = grad;
    for (int n = 0; n < gp.size(); ++n) gp[n] -= s * c[n];
    return gp;
  };

  SolveResult res;
  res.k = pk.k;
  res.energy_trace.push_back(E);

  ScalarField gp = project_gradient(energy_gradient(g, u, pk, gbc));
  ScalarField u_prev = u, gp_prev = gp;
  double alpha = 0.0;
  bool have_prev = false;

  auto snapshot = [&](int iters, double gnorm) -> SolveResult& {
    res.u = project_mean_zero(u);
    res.iterations = iters;
    res.grad_norm_final = gnorm;
    res.energy = E;
    return res;
  };

  ScalarField trial(g);
  enum class Stop { Converged, MaxIters, Stall };
  Stop state = Stop::Stall;
  int it = 0;
  double gnorm = 0.0;
  for (;; ++it) {
    gnorm = sup_norm(gp);
    if (gnorm <= cfg.grad_tol * (1.0 + std::abs(E))) {
      state = Stop::Converged;
      break;
    }
    if (it >= cfg.max_iters) {
      state = Stop::MaxIters;
      break;
    }

    // Barzilai-Borwein step from the last accepted pair, clamped hard.
    if (have_prev) {
      double ss = 0.0, sy = 0.0;
      {
        ScalarField s(g), y(g);
        for (int n = 0; n < u.size(); ++n) {
          s[n] = u[n] - u_prev[n];
          y[n] = gp[n] - gp_prev[n];
        }
        ss = dot_nodes(s, s);
        sy = dot_nodes(s, y);
      }
      if (sy > 0.0) alpha = ss / sy;
    }
    if (!(alpha > 0.0)) alpha = 1.0 / (1.0 + gnorm);
    alpha = std::clamp(alpha, 1e-12, 1e3);

    const double slope = -dot_nodes(gp, gp);
    u_prev = u;
    gp_prev = gp;

    double a = alpha;
    bool accepted = false;
    double E_trial = kInf;
    for (int bt = 0; bt < cfg.max_backtracks; ++bt) {
      for (int n = 0; n < u.size(); ++n) trial[n] = u[n] - a * gp[n];
      trial = project_mean_zero(trial);
      E_trial = energy_total_guarded(g, trial, pk, gbc);
      if (E_trial <= E + cfg.ls_c1 * a * slope) {
        accepted = true;
        break;
      }
      a *= cfg.ls_shrink;
    }
    if (!accepted) {
      state = Stop::Stall;
      break;
    }

    u = trial;
    E = E_trial;
    res.energy_trace.push_back(E);
    gp = project_gradient(energy_gradient(g, u, pk, gbc));
    alpha = a;
    have_prev = true;
  }

  if (state != Stop::Converged && cfg.polish) {
    // Deflated Newton polish. Near the energy's floating-point resolution the
    // Armijo test is dominated by summation noise, so steps are certified on
    // projected-gradient decrease instead. The averaged-edge cell gradient
    // annihilates the (-1)^{i+j} checkerboard, leaving the Hessian singular
    // along it; CG runs in the subspace orthogonal to both that mode and the
    // constraint normal.
    ScalarField chi(g);
    for (int n = 0; n < chi.size(); ++n)
      chi[n] = ((g.node_i(n) + g.node_j(n)) % 2 == 0) ? 1.0 : -1.0;
    {
      const double t = dot_nodes(c, chi) / cc;
      for (int n = 0; n < chi.size(); ++n) chi[n] -= t * c[n];
    }
    const double xx = dot_nodes(chi, chi);
    auto deflate = [&](ScalarField& x) {
      const double a1 = dot_nodes(c, x) / cc;
      for (int n = 0; n < x.size(); ++n) x[n] -= a1 * c[n];
      const double a2 = dot_nodes(chi, x) / xx;
      for (int n = 0; n < x.size(); ++n) x[n] -= a2 * chi[n];
    };

    for (int nit = 0; state != Stop::Converged && nit < 50; ++nit) {
      ScalarField b = gp;
      deflate(b);
      ScalarField d(g), r = b, pdir = r;
      double rs = dot_nodes(r, r);
      const double rs0 = rs;
      if (rs0 == 0.0) break;
      const int cg_cap = 40 * (g.nx + g.ny);
      for (int ci = 0; ci < cg_cap && rs > 1e-12 * rs0; ++ci) {
        ScalarField hp = energy_hessian_apply(g, u, pk, pdir);
        deflate(hp);
        const double pAp = dot_nodes(pdir, hp);
        if (!(pAp > 0.0)) break;  // flat or non-convex direction: stop with d so far
        const double a = rs / pAp;
        for (int n = 0; n < d.size(); ++n) d[n] += a * pdir[n];
        for (int n = 0; n < r.size(); ++n) r[n] -= a * hp[n];
        const double rs_new = dot_nodes(r, r);
        const double beta = rs_new / rs;
        rs = rs_new;
        for (int n = 0; n < pdir.size(); ++n) pdir[n] = r[n] + beta * pdir[n];
      }

      double s = 1.0;
      bool moved = false;
      for (int bt = 0; bt < 30; ++bt) {
        for (int n = 0; n < trial.size(); ++n) trial[n] = u[n] - s * d[n];
        trial = project_mean_zero(trial);
        ScalarField gpt = project_gradient(energy_gradient(g, trial, pk, gbc));
        const double gn_t = sup_norm(gpt);
        if (gn_t < gnorm) {
          u = trial;
          gp = std::move(gpt);
          gnorm = gn_t;
          // differences here sit below the summation resolution; clamp so the
          // recorded trace stays non-increasing
          E = std::min(E, energy_total_guarded(g, u, pk, gbc));
          res.energy_trace.push_back(E);
          ++it;
          moved = true;
          break;
        }
        s *= 0.5;
      }
      if (!moved) break;
      if (gnorm <= cfg.grad_tol * (1.0 + std::abs(E))) state = Stop::Converged;
    }
  }

  if (state == Stop::Converged) {
    snapshot(it, gnorm);
    res.modular_bulk = modular_bulk_gradient(g, res.u, pk);
    return res;
  }
  if (state == Stop::MaxIters) {
    throw NoConvergence("projected gradient " + std::to_string(gnorm) +
                            " above tolerance after " + std::to_string(it) +
                            " iterations at k = " + std::to_string(pk.k),
                        snapshot(it, gnorm));
  }
  throw LineSearchStall("no admissible step at k = " + std::to_string(pk.k) +
                            ", iteration " + std::to_string(it),
                        snapshot(it, gnorm));
}

double resolved_stop_tol(const ContinuationSchedule& sched, const SolveResult& first) {
  if (sched.stop_tol >= 0.0) return sched.stop_tol;
  const double rel = sched.stop_tol_rel >= 0.0 ? sched.stop_tol_rel : 1e-5;
  return rel * field_range(first.u);
}

std::vector<SolveResult> run_continuation(const Grid& g, const ExponentField& p,
                                          const ScalarField& gbc,
                                          const ContinuationSchedule& sched,
                                          const SolverConfig& cfg) {
  if (sched.k_values.empty())
    throw Error("EmptySchedule", "continuation needs at least one level");
  std::vector<SolveResult> out;
  ScalarField warm(g, 0.0);
  for (double k : sched.k_values) {
    const TruncatedExponent pk = truncate(p, k);
    SolveResult res = minimize_truncated(g, pk, gbc, warm, cfg);
    warm = res.u;
    double delta = -1.0;
    if (!out.empty()) delta = sup_diff(res.u, out.back().u);
    out.push_back(std::move(res));
    if (sched.stop_early && out.size() >= 4 && delta >= 0.0 &&
        delta <= resolved_stop_tol(sched, out.front()))
      break;
  }
  return out;
}

LimitResult extract_limit(const std::vector<SolveResult>& results,
                          const ContinuationSchedule& sched) {
  if (results.size() < 2)
    throw Error("InsufficientResults", "limit extraction needs at least two levels");
  LimitResult lim;
  for (std::size_t i = 1; i < results.size(); ++i)
    lim.deltas.push_back(sup_diff(results[i].u, results[i - 1].u));
  lim.stop_tol = resolved_stop_tol(sched, results.front());
  lim.cauchy_ok = lim.deltas.back() <= lim.stop_tol;

  // Extrapolate in x = 1/k toward x = 0 with the Lagrange weights of the
  // interpolating polynomial through the tail levels. Only a contracting
  // tail earns extrapolation; anything else returns the final iterate.
  const std::size_t n = results.size();
  const auto& d = lim.deltas;
  const std::size_t nd = d.size();
  const bool tail1 = nd >= 2 && d[nd - 1] < d[nd - 2];
  const bool tail2 = nd >= 3 && d[nd - 2] < d[nd - 3];
  int use = 1;
  if (n >= 3 && tail1 && (nd == 2 || tail2))
    use = 3;
  else if (tail1)
    use = 2;
  if (use == 3) {
    const double x0 = 1.0 / results[n - 1].k;
    const double x1 = 1.0 / results[n - 2].k;
    const double x2 = 1.0 / results[n - 3].k;
    const double w0 = x1 * x2 / ((x1 - x0) * (x2 - x0));
    const double w1 = x0 * x2 / ((x0 - x1) * (x2 - x1));
    const double w2 = x0 * x1 / ((x0 - x2) * (x1 - x2));
    lim.u_inf = results[n - 1].u;
    for (int m = 0; m < lim.u_inf.size(); ++m)
      lim.u_inf[m] = w0 * results[n - 1].u[m] + w1 * results[n - 2].u[m] +
                     w2 * results[n - 3].u[m];
    lim.method = "quadratic";
  } else if (use == 2) {
    const double x0 = 1.0 / results[n - 1].k;
    const double x1 = 1.0 / results[n - 2].k;
    const double w0 = x1 / (x1 - x0);
    const double w1 = -x0 / (x1 - x0);
    lim.u_inf = results[n - 1].u;
    for (int m = 0; m < lim.u_inf.size(); ++m)
      lim.u_inf[m] = w0 * results[n - 1].u[m] + w1 * results[n - 2].u[m];
    lim.method = "linear";
  } else {
    lim.u_inf = results.back().u;
    lim.method = "last";
  }
  return lim;
}

}  // namespace varinf
