#pragma once

#include <string>
#include <vector>

#include "varinf/config.hpp"
#include "varinf/solver.hpp"
#include "varinf/verify.hpp"

namespace varinf {

struct SweepLevel {
  int nx = 0, ny = 0;
  double h = 0.0;
  double midrange_max = 0.0;
  double direct_max = 0.0;
  double pxlap_max = 0.0;
  double flux_max = 0.0;
  InterfaceReport iface;
};

struct SweepOutcome {
  std::vector<SweepLevel> levels;
  double order_midrange = 0.0;
  double order_pxlap = 0.0;
  double order_flux = 0.0;
  bool solved = false;  // false: analytic-field sweep, nothing was minimized
};

// Everything a verb produced, both for the CLI and for in-process callers.
// Output files land on disk only when the verb ran to completion (or, on a
// hard error, just the failure report).
struct RunOutcome {
  int exit_code = 1;
  std::string report;
  std::string failure;
  std::vector<SolveResult> results;
  LimitResult limit;
  bool have_limit = false;
  VerifyBattery battery;
  bool have_battery = false;
  SweepOutcome sweep;
  bool have_sweep = false;
};

// Minimize along the schedule, extract the limit, run the full battery,
// write per-level fields, the limit field, and the report. Exit 0 when the
// battery and the Cauchy check pass, 2 when they do not, 1 on hard errors.
RunOutcome cmd_solve(const RunConfig& cfg);

// Battery over a stored field (no per-level bounds). Same exit contract.
RunOutcome cmd_verify(const RunConfig& cfg, const std::string& field_path);

// Refinement study: doubled resolutions, residual maxima per level, decay
// orders. Solves each level unless the config carries an analytic field.
// Exit 0 on completion, 1 on error.
RunOutcome cmd_sweep(const RunConfig& cfg);

// Prints the stored report of a previous run from the output directory.
RunOutcome cmd_report(const RunConfig& cfg);

extern const char* kVersion;

}  // namespace varinf
