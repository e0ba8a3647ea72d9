#pragma once

#include <array>
#include <string>

#include "varinf/exponent.hpp"
#include "varinf/field.hpp"
#include "varinf/geometry.hpp"
#include "varinf/solver.hpp"
#include "varinf/verify.hpp"

namespace varinf {

// Closed-form or tabulated scalar function of position.
//   const <v>
//   affine <a> <b> <c>                a + b x + c y
//   quadratic <a> <b> <c> <d> <e> <f> a + b x + c y + d x^2 + e x y + f y^2
//   table <path>                      field file on the run's grid
//   none
struct FuncSpec {
  enum class Kind { None, Const, Affine, Quadratic, Table } kind = Kind::None;
  std::array<double, 6> coef{};
  std::string path;

  double eval(double x, double y) const;
  std::string describe() const;
};

struct RunConfig {
  DomainSpec domain;
  FuncSpec p_spec;
  FuncSpec g_spec;
  FuncSpec field_spec;  // optional analytic field for solve-free sweeps
  ContinuationSchedule schedule;  // empty k_values: doubling default
  SolverConfig solver;
  VerifyConfig verify;
  double compat_tol = -1.0;  // <0: 1e-10 * perimeter * (1 + max|g|)
  std::string out_dir = "out";
  bool write_per_k = true;
  int sweep_levels = 3;
  long sweep_max_nodes = 4000000;
  std::string echo;  // normalized config, embedded in reports
};

// Parses and fully validates (grid geometry, exponent bounds, boundary-data
// compatibility). Throws ParseError on grammar problems and ValidationError
// on semantic ones; nothing is solved yet when these fire.
RunConfig parse_config(const std::string& path);

// Same grammar from an in-memory string (tests use this).
RunConfig parse_config_text(const std::string& text, const std::string& table_root = ".");

// Build stages used by the pipelines; validation errors surface here too.
ExponentField build_exponent(const Grid& g, const FuncSpec& spec);
ScalarField build_boundary(const Grid& g, const FuncSpec& spec);
ScalarField build_analytic_field(const Grid& g, const FuncSpec& spec);

// Re-runs the semantic checks on an already-parsed config.
void validate_run(const RunConfig& cfg);

double resolved_compat_tol(const RunConfig& cfg, const Grid& g, const ScalarField& gbc);

}  // namespace varinf
