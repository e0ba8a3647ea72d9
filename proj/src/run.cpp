#include "varinf/run.hpp"

#include <chrono>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "varinf/csv.hpp"
#include "varinf/functional.hpp"

namespace varinf {

const char* kVersion = "0.1.0";

namespace {

namespace fs = std::filesystem;

struct Timer {
  std::chrono::steady_clock::time_point t0 = std::chrono::steady_clock::now();
  double sec() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  }
};

std::string k_file_name(double k) { return "u_k_" + format_double(k) + ".csv"; }

void flush_outputs(const std::string& dir,
                   const std::vector<std::pair<std::string, std::string>>& files) {
  fs::create_directories(dir);
  for (const auto& [name, content] : files) {
    const std::string path = dir + "/" + name;
    std::ofstream f(path, std::ios::binary);
    if (!f) throw Error("IoError", "cannot open '" + path + "' for writing");
    f << content;
    if (!f) throw Error("IoError", "write to '" + path + "' failed");
  }
}

void write_failure(const std::string& dir, const std::string& text) {
  try {
    fs::create_directories(dir);
    std::ofstream f(dir + "/failure.txt", std::ios::binary);
    f << text;
  } catch (...) {
    // the failure still reaches the caller through the outcome
  }
}

std::string yn(bool b) { return b ? "pass" : "FAIL"; }

std::string battery_text(const VerifyBattery& b) {
  std::ostringstream o;
  const auto& ms = b.membership;
  o << "membership: " << yn(ms.pass) << " (|mean| " << format_double(ms.mean_abs)
    << " <= " << format_double(ms.mean_tol) << "; grad_sup_D "
    << format_double(ms.grad_sup_dbar) << " <= " << format_double(ms.grad_allowance)
    << ")\n";
  const auto& in = b.infinity;
  o << "infinity: " << yn(in.pass) << " (midrange " << format_double(in.max_midrange)
    << " <= " << format_double(in.tol) << "; direct " << format_double(in.max_direct)
    << "; nodes " << in.nodes << ")\n";
  const auto& px = b.pxlap;
  o << "pxlap: " << (px.tol > 0.0 ? yn(px.pass) : std::string("report")) << " (max "
    << format_double(px.max_residual) << " over " << px.checked << " nodes, "
    << px.skipped << " skipped, delta_sing " << format_double(px.delta_sing) << ")\n";
  const auto& fl = b.flux;
  o << "flux: " << (fl.tol > 0.0 ? yn(fl.pass) : std::string("report")) << " (face "
    << format_double(fl.max_face) << ", corner " << format_double(fl.max_corner)
    << ", first_order " << fl.first_order_count << ")\n";
  const auto& ic = b.iface;
  o << "interface: " << yn(ic.pass) << " (fraction " << format_double(ic.pass_fraction)
    << " >= " << format_double(ic.required_fraction) << " at tol "
    << format_double(ic.tol) << "; max_r " << format_double(ic.max_r) << "; nodes "
    << ic.total << ")\n";
  if (b.have_bounds) {
    const auto& bd = b.bounds;
    o << "bounds: " << yn(bd.pass) << " (m " << format_double(bd.m) << "; lm";
    for (double v : bd.lm_norms) o << " " << format_double(v);
    o << " vs bound " << format_double(bd.lm_bound) << ", ok " << (bd.lm_ok ? "yes" : "no")
      << "; holder";
    for (double v : bd.holder_semi) o << " " << format_double(v);
    o << ", plateau " << (bd.holder_plateau ? "yes" : "no") << "; modular";
    for (double v : bd.modular_bulk) o << " " << format_double(v);
    o << ", variation " << format_double(bd.modular_variation) << ", ok "
      << (bd.modular_ok ? "yes" : "no") << ")\n";
  }
  const auto& mi = b.minimality;
  o << "minimality: " << yn(mi.pass) << " (" << mi.trials << " trials, "
    << mi.clamped_zero << " clamped, max_gain " << format_double(mi.max_gain)
    << " <= " << format_double(mi.tol) << ")\n";
  if (!b.violation.empty()) o << "violation: " << b.violation << "\n";
  return o.str();
}

}  // namespace

RunOutcome cmd_solve(const RunConfig& cfg) {
  RunOutcome out;
  try {
    Timer total;
    const Grid grid = build_grid(cfg.domain);
    const ExponentField p = build_exponent(grid, cfg.p_spec);
    const ScalarField gbc = build_boundary(grid, cfg.g_spec);

    ContinuationSchedule sched = cfg.schedule;
    if (sched.k_values.empty()) {
      sched.k_values = default_schedule(p.p_plus).k_values;
      sched.stop_early = true;
    }

    Timer solve_t;
    out.results = run_continuation(grid, p, gbc, sched, cfg.solver);
    const double solve_s = solve_t.sec();

    out.limit = extract_limit(out.results, sched);
    out.have_limit = true;

    Timer verify_t;
    out.battery = run_battery(grid, out.results, out.limit.u_inf, p, gbc, cfg.verify);
    out.have_battery = true;
    const double verify_s = verify_t.sec();

    const bool ok = out.battery.pass && out.limit.cauchy_ok;
    out.exit_code = ok ? 0 : 2;

    std::ostringstream rep;
    rep << "varinf " << kVersion << " solve report\n";
    rep << "============================\n\n[config]\n" << cfg.echo << "\n[run]\n";
    rep << "levels = " << out.results.size() << "\n";
    for (const auto& r : out.results) {
      rep << "k = " << format_double(r.k) << ": iterations = " << r.iterations
          << ", energy = " << format_double(r.energy) << ", grad_norm = "
          << format_double(r.grad_norm_final) << ", modular_bulk = "
          << format_double(r.modular_bulk) << "\n";
    }
    rep << "stop_tol = " << format_double(out.limit.stop_tol) << "\ndeltas =";
    for (double d : out.limit.deltas) rep << " " << format_double(d);
    rep << "\ncauchy_ok = " << (out.limit.cauchy_ok ? "true" : "false") << "\n";
    rep << "limit_extrapolation = " << out.limit.method << "\n";
    rep << "\n[verify]\n" << battery_text(out.battery);
    rep << "\n[battery]\npass = " << (out.battery.pass ? "true" : "false") << "\n";
    rep << "exit = " << out.exit_code << "\n";
    rep << "\n[timings]\nsolve = " << format_double(solve_s) << " s\nverify = "
        << format_double(verify_s) << " s\ntotal = " << format_double(total.sec())
        << " s\n";
    out.report = rep.str();

    std::vector<std::pair<std::string, std::string>> files;
    if (cfg.write_per_k)
      for (const auto& r : out.results)
        files.emplace_back(k_file_name(r.k), field_to_csv(grid, r.u));
    files.emplace_back("u_inf.csv", field_to_csv(grid, out.limit.u_inf));
    files.emplace_back("report.txt", out.report);
    flush_outputs(cfg.out_dir, files);
    std::error_code ec;
    fs::remove(cfg.out_dir + "/failure.txt", ec);  // stale marker from old runs
  } catch (const Error& e) {
    out.exit_code = 1;
    out.failure = std::string("solve failed\ncode = ") + e.code() + "\nwhat = " +
                  e.what() + "\n";
    write_failure(cfg.out_dir, out.failure);
  }
  return out;
}

RunOutcome cmd_verify(const RunConfig& cfg, const std::string& field_path) {
  RunOutcome out;
  try {
    const Grid grid = build_grid(cfg.domain);
    const ExponentField p = build_exponent(grid, cfg.p_spec);
    const ScalarField gbc = build_boundary(grid, cfg.g_spec);
    const ScalarField u = read_field_csv(field_path, grid);

    Timer verify_t;
    out.battery = field_battery(grid, u, p, gbc, cfg.verify);
    out.have_battery = true;
    out.exit_code = out.battery.pass ? 0 : 2;

    std::ostringstream rep;
    rep << "varinf " << kVersion << " verify report\n";
    rep << "=============================\n\n[config]\n" << cfg.echo;
    rep << "\n[field]\nsource = " << field_path << "\n";
    rep << "\n[verify]\n" << battery_text(out.battery);
    rep << "\n[battery]\npass = " << (out.battery.pass ? "true" : "false") << "\n";
    rep << "exit = " << out.exit_code << "\n";
    rep << "\n[timings]\nverify = " << format_double(verify_t.sec()) << " s\n";
    out.report = rep.str();

    flush_outputs(cfg.out_dir, {{"report.txt", out.report}});
    std::error_code ec;
    fs::remove(cfg.out_dir + "/failure.txt", ec);
  } catch (const Error& e) {
    out.exit_code = 1;
    out.failure = std::string("verify failed\ncode = ") + e.code() + "\nwhat = " +
                  e.what() + "\n";
    write_failure(cfg.out_dir, out.failure);
  }
  return out;
}

RunOutcome cmd_sweep(const RunConfig& cfg) {
  RunOutcome out;
  try {
    Timer total;
    const bool analytic = cfg.field_spec.kind != FuncSpec::Kind::None;
    out.sweep.solved = !analytic;

    std::vector<double> hs, mids, pxs, fls;
    for (int lvl = 0; lvl < cfg.sweep_levels; ++lvl) {
      DomainSpec ds = cfg.domain;
      ds.nx = ((cfg.domain.nx - 1) << lvl) + 1;
      ds.ny = ((cfg.domain.ny - 1) << lvl) + 1;
      const Grid grid = build_grid(ds);
      const ExponentField p = build_exponent(grid, cfg.p_spec);
      const ScalarField gbc = build_boundary(grid, cfg.g_spec);

      ScalarField u;
      if (analytic) {
        u = build_analytic_field(grid, cfg.field_spec);
      } else {
        ContinuationSchedule sched = cfg.schedule;
        if (sched.k_values.empty()) {
          sched.k_values = default_schedule(p.p_plus).k_values;
          sched.stop_early = true;
        }
        auto results = run_continuation(grid, p, gbc, sched, cfg.solver);
        u = extract_limit(results, sched).u_inf;
      }

      SweepLevel sl;
      sl.nx = ds.nx;
      sl.ny = ds.ny;
      sl.h = std::max(grid.hx, grid.hy);
      const InfinityReport ir = infinity_residual(grid, u, cfg.verify);
      sl.midrange_max = ir.max_midrange;
      sl.direct_max = ir.max_direct;
      sl.pxlap_max = pxlap_residual(grid, u, p, cfg.verify).max_residual;
      sl.flux_max = flux_residual(grid, u, p, gbc, cfg.verify).max_face;
      sl.iface = interface_condition(grid, u, cfg.verify);
      out.sweep.levels.push_back(sl);

      hs.push_back(sl.h);
      mids.push_back(sl.midrange_max);
      pxs.push_back(sl.pxlap_max);
      fls.push_back(sl.flux_max);
    }
    if (out.sweep.levels.size() >= 2) {
      out.sweep.order_midrange = decay_order(hs, mids);
      out.sweep.order_pxlap = decay_order(hs, pxs);
      out.sweep.order_flux = decay_order(hs, fls);
    }
    out.have_sweep = true;
    out.exit_code = 0;

    std::ostringstream rep;
    rep << "varinf " << kVersion << " sweep report\n";
    rep << "============================\n\n[config]\n" << cfg.echo;
    rep << "\n[sweep]\nmode = " << (analytic ? "analytic" : "solve") << "\n";
    for (const auto& sl : out.sweep.levels) {
      rep << "level " << sl.nx << "x" << sl.ny << ": h = " << format_double(sl.h)
          << ", midrange = " << format_double(sl.midrange_max) << ", direct = "
          << format_double(sl.direct_max) << ", pxlap = " << format_double(sl.pxlap_max)
          << ", flux = " << format_double(sl.flux_max) << ", iface_fraction = "
          << format_double(sl.iface.pass_fraction) << "\n";
    }
    if (out.sweep.levels.size() >= 2) {
      rep << "order_midrange = " << format_double(out.sweep.order_midrange) << "\n";
      rep << "order_pxlap = " << format_double(out.sweep.order_pxlap) << "\n";
      rep << "order_flux = " << format_double(out.sweep.order_flux) << "\n";
    }
    rep << "\n[timings]\ntotal = " << format_double(total.sec()) << " s\n";
    out.report = rep.str();

    flush_outputs(cfg.out_dir, {{"report.txt", out.report}});
  } catch (const Error& e) {
    out.exit_code = 1;
    out.failure = std::string("sweep failed\ncode = ") + e.code() + "\nwhat = " +
                  e.what() + "\n";
    write_failure(cfg.out_dir, out.failure);
  }
  return out;
}

RunOutcome cmd_report(const RunConfig& cfg) {
  RunOutcome out;
  const std::string path = cfg.out_dir + "/report.txt";
  std::ifstream f(path);
  if (!f) {
    out.exit_code = 1;
    out.failure = "no stored report at '" + path + "'\n";
    return out;
  }
  std::ostringstream ss;
  ss << f.rdbuf();
  out.report = ss.str();
  out.exit_code = 0;
  return out;
}

}  // namespace varinf
