#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "varinf/exponent.hpp"
#include "varinf/field.hpp"
#include "varinf/solver.hpp"

namespace varinf {

// Tolerances and knobs for the verification battery. Negative entries are
// resolved from the grid spacing h = max(hx, hy) at call time; pxlap_tol and
// flux_tol <= 0 leave those residuals report-only (their pass flag stays
// true), since a single-mesh absolute threshold would presume a smoothness
// scale the field does not declare. Refinement sweeps own the decay checks.
struct VerifyConfig {
  double tol_mean_rel = 1e-9;    // mean-zero slack, times (1 + max|u|)
  double tol_s = -1.0;           // gradient allowance over D: |grad| <= 1 + tol_s; auto 5h
  double midrange_tol = -1.0;    // auto 10h
  double iface_tol = -1.0;       // auto 5h
  double iface_fraction = 0.95;  // required passing share of subdomain boundary nodes
  double delta_sing_rel = 1e-8;  // singular-gradient skip, times (1 + max cell |grad|)
  double pxlap_tol = 0.0;
  double flux_tol = 0.0;
  double m = 0.0;                // integrability order for the subdomain bound; auto 2 p_minus
  long pair_cap = 100000;        // Hoelder seminorm pair budget
  int margin_cells = 1;          // bulk residual distance from boundaries
  int trials = 100;              // minimality audit trials
  std::uint64_t seed = 0;
};

struct MembershipReport {
  double mean_abs = 0.0;
  double mean_tol = 0.0;
  double grad_sup_dbar = 0.0;  // max cell gradient over the closed subdomain
  double grad_allowance = 0.0; // 1 + tol_s
  bool pass = true;
};

struct InfinityReport {
  double max_direct = 0.0;    // second-difference infinity-Laplacian residual
  double max_midrange = 0.0;  // u - midrange of the 8-neighbour ring
  int nodes = 0;
  double tol = 0.0;  // on the midrange variant
  bool pass = true;
};

struct PxlapReport {
  double max_residual = 0.0;
  int checked = 0;
  int skipped = 0;  // gradient under the singular threshold
  double delta_sing = 0.0;
  double tol = 0.0;
  bool pass = true;
};

struct FluxReport {
  double max_face = 0.0;    // non-corner boundary nodes
  double max_corner = 0.0;  // corners, worst of the two normals
  int first_order_count = 0;
  double tol = 0.0;
  bool pass = true;
};

struct InterfaceReport {
  double max_r = 0.0;
  double tol = 0.0;
  int pass_count = 0;
  int total = 0;
  double pass_fraction = 1.0;
  double required_fraction = 0.95;
  bool pass = true;
};

struct UniformBoundsReport {
  double m = 0.0;
  std::vector<double> lm_norms;  // gradient L^m norm over the subdomain, per level
  double lm_bound = 0.0;         // 2 |D|^{1/m}
  bool lm_ok = true;             // final three levels under the bound
  std::vector<double> holder_semi;
  bool holder_plateau = true;
  std::vector<double> modular_bulk;
  double modular_variation = 0.0;  // relative, over the upper half of the schedule
  bool modular_ok = true;
  bool pass = true;
};

struct MinimalityReport {
  int trials = 0;
  int clamped_zero = 0;  // perturbations that degenerated to the field itself
  double max_gain = 0.0; // best energy improvement any competitor achieved
  double tol = 0.0;
  bool pass = true;
};

class MinimalityViolated : public Error {
public:
  MinimalityViolated(const std::string& msg, int trial, double gain)
      : Error("MinimalityViolated", msg), trial(trial), gain(gain) {}
  int trial;
  double gain;
};

// --- individual checks ---

MembershipReport check_membership(const Grid& g, const ScalarField& u,
                                  const VerifyConfig& vc);

InfinityReport infinity_residual(const Grid& g, const ScalarField& u,
                                 const VerifyConfig& vc);

PxlapReport pxlap_residual(const Grid& g, const ScalarField& u,
                           const ExponentField& p, const VerifyConfig& vc);

FluxReport flux_residual(const Grid& g, const ScalarField& u,
                         const ExponentField& p, const ScalarField& gbc,
                         const VerifyConfig& vc);

InterfaceReport interface_condition(const Grid& g, const ScalarField& u,
                                    const VerifyConfig& vc);

UniformBoundsReport uniform_bounds(const Grid& g,
                                   const std::vector<SolveResult>& results,
                                   const ExponentField& p, const VerifyConfig& vc);

// Random-competitor audit of I_inf minimality over the admissible set.
// Even trials perturb away from the subdomain, odd trials use global bumps
// scaled back until the subdomain gradient cap holds again. Throws
// MinimalityViolated if any competitor beats the field beyond tolerance.
MinimalityReport audit_minimality(const Grid& g, const ScalarField& u,
                                  const ExponentField& p, const ScalarField& gbc,
                                  const VerifyConfig& vc);

// gradient L^m norm over cells inside the closed subdomain
double lm_norm_subdomain(const Grid& g, const ScalarField& u, double m);

// max |u(x)-u(y)| / |x-y|^{1-2/p_minus} over a deterministic pair sample
double holder_seminorm(const Grid& g, const ScalarField& u, double p_minus,
                       long pair_cap);

// --- battery ---

struct VerifyBattery {
  MembershipReport membership;
  InfinityReport infinity;
  PxlapReport pxlap;
  FluxReport flux;
  InterfaceReport iface;
  UniformBoundsReport bounds;
  bool have_bounds = false;
  MinimalityReport minimality;
  std::string violation;  // set when the audit threw
  bool pass = false;
};

// Battery over a finished continuation run (bounds included).
VerifyBattery run_battery(const Grid& g, const std::vector<SolveResult>& results,
                          const ScalarField& u_inf, const ExponentField& p,
                          const ScalarField& gbc, const VerifyConfig& vc);

// Battery over a bare field (no per-level bounds).
VerifyBattery field_battery(const Grid& g, const ScalarField& u,
                            const ExponentField& p, const ScalarField& gbc,
                            const VerifyConfig& vc);

// Least-squares slope of ln(value) against ln(h); the measured decay order
// of a residual under refinement.
double decay_order(const std::vector<double>& h, const std::vector<double>& v);

}  // namespace varinf
