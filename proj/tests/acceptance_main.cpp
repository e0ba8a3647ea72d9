// Acceptance harness: runs the full criteria list end to end and prints one
// PASS/FAIL line per criterion. Exits nonzero if any line fails. Tolerances
// are pinned here, next to the checks that use them.

#include <chrono>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "oracles.hpp"
#include "varinf/config.hpp"
#include "varinf/csv.hpp"
#include "varinf/errors.hpp"
#include "varinf/exponent.hpp"
#include "varinf/field.hpp"
#include "varinf/functional.hpp"
#include "varinf/geometry.hpp"
#include "varinf/run.hpp"
#include "varinf/solver.hpp"
#include "varinf/verify.hpp"

using namespace varinf;
namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

namespace {

struct Harness {
  int failed = 0;
  int total = 0;

  void line(int idx, const char* label, bool ok, const std::string& detail) {
    ++total;
    if (!ok) ++failed;
    std::printf("[%2d] %s  %-34s %s\n", idx, ok ? "PASS" : "FAIL", label,
                detail.c_str());
    std::fflush(stdout);
  }
};

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string fmt(const char* f, ...) {
  char buf[512];
  va_list ap;
  va_start(ap, f);
  std::vsnprintf(buf, sizeof buf, f, ap);
  va_end(ap);
  return buf;
}

ScalarField edge_data(const Grid& g) {
  return make_field(g, [](double x, double) { return x - 0.5; });
}

Grid plain_grid(int n) {
  DomainSpec s;
  s.omega = {0.0, 1.0, 0.0, 1.0};
  s.nx = n;
  s.ny = n;
  return build_grid(s);
}

Grid box_grid(int n) {
  DomainSpec s;
  s.omega = {0.0, 1.0, 0.0, 1.0};
  s.d = Rect{0.25, 0.75, 0.25, 0.75};
  s.nx = n;
  s.ny = n;
  return build_grid(s);
}

std::string reference_config(const std::string& out_dir, int resolution) {
  std::ostringstream ss;
  ss << "[domain]\n"
        "omega = 0 1 0 1\n"
        "d = 0.25 0.75 0.25 0.75\n"
        "resolution = " << resolution << ' ' << resolution << "\n"
        "[exponent]\n"
        "p = const 4\n"
        "[boundary]\n"
        "g = affine -0.5 1 0\n"
        "[schedule]\n"
        "k_values = 8 16 32 64 128 256 512 1024\n"
        "stop_tol_rel = 1e-4\n"
        "[solver]\n"
        "grad_tol = 1e-9\n"
        "max_iters = 4000\n"
        "polish = true\n"
        "[verify]\n"
        "trials = 100\n"
        "seed = 12345\n"
        "[output]\n"
        "dir = " << out_dir << "\n";
  return ss.str();
}

fs::path fresh_dir(const char* name) {
  const fs::path p = fs::path("acceptance_scratch") / name;
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

std::string file_bytes(const fs::path& p) {
  std::ifstream f(p, std::ios::binary);
  std::ostringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

}  // namespace

int main() {
  Harness h;
  std::printf("acceptance run\n==============\n");

  // ---- 1: linear oracle equivalence -------------------------------------
  // unit square, no box, p == 2, g = x - 1/2, 33x33; solver vs dense KKT
  // solve on the mean-zero subspace. sup diff <= 1e-8 * oracle range,
  // wall time < 10 s.
  try {
    const auto t0 = Clock::now();
    const Grid g = plain_grid(33);
    const TruncatedExponent pk = uniform_exponent(g, 2.0);
    const ScalarField gbc = edge_data(g);
    const ScalarField exact = oracle::linear_neumann_oracle(g, gbc);
    SolverConfig cfg;
    cfg.grad_tol = 1e-12;
    cfg.max_iters = 2000;
    cfg.polish = true;
    const SolveResult r = minimize_truncated(g, pk, gbc, ScalarField(g), cfg);
    const double range = field_range(exact);
    const double err = sup_diff(r.u, exact);
    const double dt = seconds_since(t0);
    h.line(1, "linear oracle equivalence",
           err <= 1e-8 * range && dt < 10.0,
           fmt("sup=%.3e allowed=%.3e iters=%d t=%.1fs", err, 1e-8 * range,
               r.iterations, dt));
  } catch (const std::exception& e) {
    h.line(1, "linear oracle equivalence", false, e.what());
  }

  // ---- 2: nonlinear oracle equivalence ----------------------------------
  // 9x9, p == 4, same g; solver vs damped Newton on the discrete system.
  // sup diff <= 1e-6, wall time < 30 s.
  try {
    const auto t0 = Clock::now();
    const Grid g = plain_grid(9);
    const TruncatedExponent pk = uniform_exponent(g, 4.0);
    const ScalarField gbc = edge_data(g);
    const ScalarField exact = oracle::pconst_newton_oracle(g, gbc, 4.0);
    SolverConfig cfg;
    cfg.grad_tol = 1e-13;
    cfg.max_iters = 2000;
    cfg.polish = true;
    const SolveResult r = minimize_truncated(g, pk, gbc, ScalarField(g), cfg);
    const double err = sup_diff(r.u, exact);
    const double dt = seconds_since(t0);
    h.line(2, "nonlinear oracle equivalence", err <= 1e-6 && dt < 30.0,
           fmt("sup=%.3e allowed=1e-6 iters=%d t=%.1fs", err, r.iterations, dt));
  } catch (const std::exception& e) {
    h.line(2, "nonlinear oracle equivalence", false, e.what());
  }

  // ---- 3: gradient consistency + convexity ------------------------------
  // 200 random fields: |FD - analytic| / (1 + |analytic|) < 1e-6 per node.
  // 200 random triples (u, v, lambda): convexity to 1e-12 * scale.
  try {
    const auto t0 = Clock::now();
    const Grid g = box_grid(9);
    const ExponentField p = build_exponent(g, FuncSpec{FuncSpec::Kind::Affine,
                                                       {3.0, 1.0, 0.5}, ""});
    const TruncatedExponent pk = truncate(p, 12.0);
    const ScalarField gbc = edge_data(g);
    double worst_fd = 0.0;
    for (std::uint64_t s = 0; s < 200; ++s) {
      ScalarField u = oracle::random_smooth_field(g, 1000 + s);
      const ScalarField an = energy_gradient(g, u, pk, gbc);
      for (int n = 0; n < u.size(); ++n) {
        const double eps = 1e-6 * (1.0 + std::abs(u[n]));
        const double keep = u[n];
        u[n] = keep + eps;
        const double ep = energy_truncated(g, u, pk, gbc).total;
        u[n] = keep - eps;
        const double em = energy_truncated(g, u, pk, gbc).total;
        u[n] = keep;
        const double fd = (ep - em) / (2.0 * eps);
        worst_fd = std::max(worst_fd,
                            std::abs(fd - an[n]) / (1.0 + std::abs(an[n])));
      }
    }
    double worst_cx = -1e300;
    oracle::TestRng rng(424242);
    for (int t = 0; t < 200; ++t) {
      const ScalarField a = oracle::random_smooth_field(g, 40000 + 2 * t);
      const ScalarField b = oracle::random_smooth_field(g, 40001 + 2 * t);
      const double lam = rng.uniform();
      ScalarField mix(g);
      for (int n = 0; n < mix.size(); ++n)
        mix[n] = lam * a[n] + (1.0 - lam) * b[n];
      const double ea = energy_truncated(g, a, pk, gbc).total;
      const double eb = energy_truncated(g, b, pk, gbc).total;
      const double em = energy_truncated(g, mix, pk, gbc).total;
      const double scale = 1.0 + std::abs(ea) + std::abs(eb);
      worst_cx = std::max(worst_cx,
                          (em - (lam * ea + (1.0 - lam) * eb)) / scale);
    }
    const double dt = seconds_since(t0);
    h.line(3, "gradient consistency + convexity",
           worst_fd < 1e-6 && worst_cx <= 1e-12,
           fmt("fd=%.3e (<1e-6) convexity=%.3e (<=1e-12) t=%.1fs", worst_fd,
               worst_cx, dt));
  } catch (const std::exception& e) {
    h.line(3, "gradient consistency + convexity", false, e.what());
  }

  // ---- 4: norm machinery -------------------------------------------------
  // 500 random fields each: modular/norm sandwich, conjugate Hoelder with
  // factor 2, and constant-p Luxemburg vs classical norm to 1e-9 relative.
  try {
    const auto t0 = Clock::now();
    const Grid g = plain_grid(9);
    const ExponentField pv = build_exponent(g, FuncSpec{FuncSpec::Kind::Affine,
                                                        {3.0, 1.0, 0.5}, ""});
    const TruncatedExponent pk = truncate(pv, 8.0);
    const auto pc = cell_exponents(pk);
    double pmin = 1e300, pmax = 0.0;
    for (double q : pc) {
      pmin = std::min(pmin, q);
      pmax = std::max(pmax, q);
    }
    bool sandwich_ok = true;
    for (std::uint64_t s = 0; s < 500 && sandwich_ok; ++s) {
      ScalarField u = oracle::random_smooth_field(g, 60000 + s);
      const double scale = (s % 2 == 0) ? 6.0 : 0.1;
      for (int n = 0; n < u.size(); ++n) u[n] *= scale;
      const SampleSet smp = value_samples(g, u, pk);
      const double rho = modular(smp);
      const double nrm = luxemburg_norm(smp);
      if (rho >= 1.0)
        sandwich_ok = std::pow(nrm, pmin) <= rho * (1.0 + 1e-9) &&
                      rho <= std::pow(nrm, pmax) * (1.0 + 1e-9);
      else
        sandwich_ok = std::pow(nrm, pmax) <= rho * (1.0 + 1e-9) + 1e-300 &&
                      rho <= std::pow(nrm, pmin) * (1.0 + 1e-9);
    }
    bool holder_ok = true;
    for (std::uint64_t s = 0; s < 500 && holder_ok; ++s) {
      const ScalarField a = oracle::random_smooth_field(g, 70000 + s, 0.8);
      const ScalarField b = oracle::random_smooth_field(g, 80000 + s, 0.8);
      SampleSet sf = value_samples(g, a, pk);
      SampleSet sg = value_samples(g, b, pk);
      double prod = 0.0;
      for (std::size_t i = 0; i < sf.f.size(); ++i)
        prod += sf.w[i] * sf.f[i] * sg.f[i];
      for (std::size_t i = 0; i < sg.p.size(); ++i)
        sg.p[i] = conjugate_exponent(sf.p[i]);
      holder_ok =
          prod <= 2.0 * luxemburg_norm(sf) * luxemburg_norm(sg) * (1.0 + 1e-9) +
                      1e-300;
    }
    double worst_cls = 0.0;
    const double pconsts[3] = {2.5, 3.5, 7.0};
    for (std::uint64_t s = 0; s < 500; ++s) {
      const double q = pconsts[s % 3];
      const TruncatedExponent pu = uniform_exponent(g, q);
      const ScalarField u = oracle::random_smooth_field(g, 90000 + s);
      const SampleSet smp = value_samples(g, u, pu);
      const double cls = oracle::classical_lp_norm(smp, q);
      if (cls > 0.0)
        worst_cls = std::max(worst_cls,
                             std::abs(luxemburg_norm(smp) - cls) / cls);
    }
    const double dt = seconds_since(t0);
    h.line(4, "norm machinery",
           sandwich_ok && holder_ok && worst_cls <= 1e-9,
           fmt("sandwich=%s holder=%s classical_rel=%.3e t=%.1fs",
               sandwich_ok ? "ok" : "BAD", holder_ok ? "ok" : "BAD", worst_cls,
               dt));
  } catch (const std::exception& e) {
    h.line(4, "norm machinery", false, e.what());
  }

  // ---- reference run (used by 5..10 and 12) -----------------------------
  const fs::path ref_dir = fresh_dir("ref_a");
  RunOutcome ref;
  bool have_ref = false;
  double ref_seconds = 0.0;
  try {
    const auto t0 = Clock::now();
    const RunConfig cfg = parse_config_text(reference_config(ref_dir.string(), 65));
    ref = cmd_solve(cfg);
    ref_seconds = seconds_since(t0);
    have_ref = ref.exit_code != 1 && ref.have_limit && ref.have_battery;
    std::printf("     reference run: exit=%d levels=%zu t=%.1fs\n",
                ref.exit_code, ref.results.size(), ref_seconds);
  } catch (const std::exception& e) {
    std::printf("     reference run failed: %s\n", e.what());
  }

  // ---- 5: subdomain gradient bound --------------------------------------
  // final-k max cell |grad| over the box <= 1 + 5h; the excess over 1 is
  // non-increasing across the last three schedule entries. Whole reference
  // run under 5 minutes.
  try {
    if (!have_ref) throw Error("NoRun", "reference run unavailable");
    const Grid g = box_grid(65);
    const double hh = std::max(g.hx, g.hy);
    std::vector<double> excess;
    for (const SolveResult& r : ref.results)
      excess.push_back(std::max(0.0, max_cell_gradient(g, r.u, CellFilter::DbarOnly) - 1.0));
    const std::size_t m = excess.size();
    if (m < 3) throw Error("NoRun", "continuation too short");
    const double last = excess.back();
    const bool mono = excess[m - 3] >= excess[m - 2] - 1e-12 &&
                      excess[m - 2] >= excess[m - 1] - 1e-12;
    h.line(5, "subdomain gradient bound",
           last <= 5.0 * hh && mono && ref_seconds < 300.0,
           fmt("excess=%.3e allowed=%.3e tail=[%.2e %.2e %.2e] t=%.0fs", last,
               5.0 * hh, excess[m - 3], excess[m - 2], excess[m - 1],
               ref_seconds));
  } catch (const std::exception& e) {
    h.line(5, "subdomain gradient bound", false, e.what());
  }

  // ---- 6: uniform convergence of the continuation -----------------------
  // deltas non-increasing from the second one on; final delta under
  // 1e-4 * field range.
  try {
    if (!have_ref) throw Error("NoRun", "reference run unavailable");
    const std::vector<double>& d = ref.limit.deltas;
    bool mono = d.size() >= 2;
    for (std::size_t j = 2; j < d.size(); ++j)
      if (d[j] > d[j - 1] * (1.0 + 1e-12)) mono = false;
    const double range = field_range(ref.limit.u_inf);
    const bool small = d.back() <= 1e-4 * range;
    h.line(6, "uniform convergence", mono && small,
           fmt("final_delta=%.3e allowed=%.3e deltas=%zu mono=%s", d.back(),
               1e-4 * range, d.size(), mono ? "ok" : "BAD"));
  } catch (const std::exception& e) {
    h.line(6, "uniform convergence", false, e.what());
  }

  // ---- 7: uniform estimates ---------------------------------------------
  // bulk modular stable to 10% over the upper half of the schedule; gradient
  // L^m bound (m = 2 p_minus) at the last three levels; Hoelder seminorm
  // monitor plateaus.
  try {
    if (!have_ref) throw Error("NoRun", "reference run unavailable");
    const UniformBoundsReport& b = ref.battery.bounds;
    h.line(7, "uniform estimates",
           ref.battery.have_bounds && b.modular_ok && b.lm_ok && b.holder_plateau,
           fmt("modular_var=%.3f (<0.10) lm=%s holder=%s m=%.0f",
               b.modular_variation, b.lm_ok ? "ok" : "BAD",
               b.holder_plateau ? "ok" : "BAD", b.m));
  } catch (const std::exception& e) {
    h.line(7, "uniform estimates", false, e.what());
  }

  // ---- refinement sweep (used by 8 and 9) -------------------------------
  // base 33: the coarsest grid puts only three cells between the box and the
  // outer boundary, which is outside the asymptotic range of the residual
  // order fits
  const fs::path sweep_dir = fresh_dir("sweep");
  RunOutcome sweep;
  bool have_sweep = false;
  try {
    const auto t0 = Clock::now();
    std::string text = reference_config(sweep_dir.string(), 33);
    text += "[sweep]\nlevels = 3\n";
    RunConfig cfg = parse_config_text(text);
    cfg.verify.trials = 20;  // residual maxima only; keep the audit cheap
    sweep = cmd_sweep(cfg);
    have_sweep = sweep.exit_code == 0 && sweep.have_sweep &&
                 sweep.sweep.levels.size() == 3;
    std::printf("     refinement sweep: exit=%d solved=%s t=%.1fs\n",
                sweep.exit_code, sweep.sweep.solved ? "yes" : "no",
                seconds_since(t0));
  } catch (const std::exception& e) {
    std::printf("     refinement sweep failed: %s\n", e.what());
  }

  // ---- 8: infinity-harmonicity in the box -------------------------------
  // midrange residual <= 10h on the reference run; decay order >= 0.8
  // across the 33/65/129 sweep.
  try {
    if (!have_ref || !have_sweep) throw Error("NoRun", "prerequisite run unavailable");
    const InfinityReport& ir = ref.battery.infinity;
    h.line(8, "infinity-harmonic residual",
           ir.pass && sweep.sweep.order_midrange >= 0.8,
           fmt("midrange=%.3e tol=%.3e order=%.2f (>=0.8)", ir.max_midrange,
               ir.tol, sweep.sweep.order_midrange));
  } catch (const std::exception& e) {
    h.line(8, "infinity-harmonic residual", false, e.what());
  }

  // ---- 9: limit system outside the box ----------------------------------
  // bulk expanded-residual and boundary flux residual decay (order >= 0.8);
  // the interface condition holds at 5h on >= 95% of box-boundary nodes at
  // the finest level.
  try {
    if (!have_sweep) throw Error("NoRun", "sweep unavailable");
    const SweepLevel& fine = sweep.sweep.levels.back();
    h.line(9, "limit system residuals",
           sweep.sweep.order_pxlap >= 0.8 && sweep.sweep.order_flux >= 0.8 &&
               fine.iface.pass_fraction >= 0.95,
           fmt("pxlap_order=%.2f flux_order=%.2f (>=0.8) iface=%.3f (>=0.95)",
               sweep.sweep.order_pxlap, sweep.sweep.order_flux,
               fine.iface.pass_fraction));
  } catch (const std::exception& e) {
    h.line(9, "limit system residuals", false, e.what());
  }

  // ---- 10: minimality audit ---------------------------------------------
  // 100 randomized competitors; none may beat the limit energy by more than
  // 1e-8 * (1 + |I_inf|).
  try {
    if (!have_ref) throw Error("NoRun", "reference run unavailable");
    const MinimalityReport& m = ref.battery.minimality;
    h.line(10, "minimality audit",
           ref.battery.violation.empty() && m.pass && m.trials == 100,
           fmt("trials=%d max_gain=%.3e tol=%.3e clamped=%d", m.trials,
               m.max_gain, m.tol, m.clamped_zero));
  } catch (const std::exception& e) {
    h.line(10, "minimality audit", false, e.what());
  }

  // ---- 11: compatibility is enforced before solving ---------------------
  try {
    bool rejected = false;
    std::string inv;
    try {
      parse_config_text(
          "[domain]\nomega = 0 1 0 1\nresolution = 9 9\n"
          "[exponent]\np = const 4\n[boundary]\ng = const 1\n");
    } catch (const ValidationError& e) {
      rejected = true;
      inv = e.invariant;
    }
    h.line(11, "compatibility rejection", rejected && inv == "compatibility",
           fmt("invariant=%s", inv.empty() ? "(none)" : inv.c_str()));
  } catch (const std::exception& e) {
    h.line(11, "compatibility rejection", false, e.what());
  }

  // ---- 12: determinism ---------------------------------------------------
  // a second identical reference run writes bit-identical field files.
  try {
    if (!have_ref) throw Error("NoRun", "reference run unavailable");
    const fs::path dir2 = fresh_dir("ref_b");
    const RunConfig cfg = parse_config_text(reference_config(dir2.string(), 65));
    const RunOutcome again = cmd_solve(cfg);
    bool same = again.exit_code == ref.exit_code;
    int compared = 0;
    for (const auto& entry : fs::directory_iterator(ref_dir)) {
      const fs::path name = entry.path().filename();
      if (name.extension() != ".csv") continue;
      ++compared;
      if (file_bytes(entry.path()) != file_bytes(dir2 / name)) same = false;
    }
    h.line(12, "bit-identical reruns", same && compared >= 9,
           fmt("csv_files=%d identical=%s", compared, same ? "yes" : "no"));
  } catch (const std::exception& e) {
    h.line(12, "bit-identical reruns", false, e.what());
  }

  std::printf("==============\nacceptance: %d/%d passed\n", h.total - h.failed,
              h.total);
  return h.failed == 0 ? 0 : 1;
}
