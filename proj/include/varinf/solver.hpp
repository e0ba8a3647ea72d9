#pragma once

#include <string>
#include <vector>

#include "varinf/exponent.hpp"
#include "varinf/field.hpp"
#include "varinf/functional.hpp"

namespace varinf {

struct SolverConfig {
  double grad_tol = 1e-9;   // on the projected gradient, relative to 1 + |energy|
  int max_iters = 200000;
  double ls_shrink = 0.5;   // Armijo backtracking factor
  double ls_c1 = 1e-4;      // Armijo sufficient-decrease constant
  int max_backtracks = 60;
  // Newton/CG refinement once descent can no longer certify decrease against
  // the energy's floating-point resolution. Off by default; meant for small
  // truncation levels and tight tolerances.
  bool polish = false;
};

struct SolveResult {
  double k = 0.0;
  ScalarField u;
  int iterations = 0;
  std::vector<double> energy_trace;  // accepted energies, first entry is the start
  double grad_norm_final = 0.0;      // sup norm of the projected gradient
  double energy = 0.0;
  double modular_bulk = 0.0;         // gradient modular at the minimizer
};

// Truncation levels to sweep, lowest first. stop_tol < 0 means derive it
// from stop_tol_rel and the range of the first minimizer; stop_tol_rel < 0
// falls back to 1e-5. stop_early truncates the sweep once consecutive
// minimizers are closer than the resolved tolerance.
struct ContinuationSchedule {
  std::vector<double> k_values;
  double stop_tol = -1.0;
  double stop_tol_rel = -1.0;
  bool stop_early = false;
};

// Doubling levels p_plus * 2^j, j = 1..12, with early stopping.
ContinuationSchedule default_schedule(double p_plus);

class NoConvergence : public Error {
public:
  NoConvergence(const std::string& msg, SolveResult best_so_far)
      : Error("NoConvergence", msg), best(std::move(best_so_far)) {}
  SolveResult best;
};

class LineSearchStall : public Error {
public:
  LineSearchStall(const std::string& msg, SolveResult best_so_far)
      : Error("LineSearchStall", msg), best(std::move(best_so_far)) {}
  SolveResult best;
};

// Subtracts the quadrature mean, landing exactly on the zero-mean plane.
ScalarField project_mean_zero(const ScalarField& u);

// Minimizes the truncated energy over the zero-mean plane from `warm`.
// Projected-gradient descent with Barzilai-Borwein steps (clamped to
// [1e-12, 1e3]) and Armijo backtracking. The energy trace is
// non-increasing. Throws NoConvergence / LineSearchStall carrying the best
// iterate reached. With cfg.polish the stalled iterate is handed to a damped
// Newton loop (matrix-free CG on the deflated Hessian, steps accepted on
// projected-gradient decrease) before either error is raised.
SolveResult minimize_truncated(const Grid& g, const TruncatedExponent& pk,
                               const ScalarField& gbc, const ScalarField& warm,
                               const SolverConfig& cfg);

// Sweeps the schedule with warm starts. Results come back in schedule order.
std::vector<SolveResult> run_continuation(const Grid& g, const ExponentField& p,
                                          const ScalarField& gbc,
                                          const ContinuationSchedule& sched,
                                          const SolverConfig& cfg);

// The absolute stop tolerance the schedule resolves to, given the first
// minimizer of the sweep.
double resolved_stop_tol(const ContinuationSchedule& sched, const SolveResult& first);

struct LimitResult {
  ScalarField u_inf;           // extrapolated limit (see extract_limit)
  std::vector<double> deltas;  // sup differences between consecutive minimizers
  double stop_tol = 0.0;
  bool cauchy_ok = false;      // final delta within stop_tol
  std::string method;          // "quadratic", "linear", or "last"
};

// Requires at least two results. The iterates approach the limit like
// a/k + b/k^2 once the subdomain gradient cap saturates, so u_inf is the
// polynomial extrapolation of the tail to 1/k -> 0: quadratic through the
// last three levels while the deltas still contract, linear through the last
// two when only those agree, the raw final iterate otherwise.
LimitResult extract_limit(const std::vector<SolveResult>& results,
                          const ContinuationSchedule& sched);

}  // namespace varinf
