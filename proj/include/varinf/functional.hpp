#pragma once

#include <vector>

#include "varinf/exponent.hpp"
#include "varinf/field.hpp"
#include "varinf/geometry.hpp"

namespace varinf {

// Quadrature samples as parallel arrays: weight, magnitude, exponent.
// When `grid` is set the sample index is a cell id, which lets overflow
// reports name the offending point.
struct SampleSet {
  const Grid* grid = nullptr;
  std::vector<double> w;
  std::vector<double> f;  // magnitudes, >= 0
  std::vector<double> p;
};

// Cell-centre samples |mean of the four corner values| with the cell exponent.
SampleSet value_samples(const Grid& g, const ScalarField& u, const TruncatedExponent& pk);

// |cell gradient| samples with the cell exponent.
SampleSet gradient_samples(const Grid& g, const ScalarField& u, const TruncatedExponent& pk);

// rho(f) = sum_i w_i f_i^{p_i}. Terms with p*ln(f) > 700 raise
// ModularOverflow carrying the offending point.
double modular(const SampleSet& s);

// Same sum but returns +inf instead of throwing; line searches use this to
// reject a trial step.
double modular_guarded(const SampleSet& s);

// Luxemburg norm inf{ lam > 0 : rho(f/lam) <= 1 } by bisection to relative
// width 1e-10. Throws Error("BracketFailure") if 200 doublings cannot
// bracket the unit-modular level.
double luxemburg_norm(const SampleSet& s);

struct EnergyParts {
  double total = 0.0;     // bulk - boundary
  double bulk = 0.0;      // gradient modular weighted by 1/p_c
  double dterm = 0.0;     // bulk restricted to cells inside the closed subdomain
  double boundary = 0.0;  // boundary quadrature of g*u
};

// Truncated energy: sum_c w |grad u|^{p_c}/p_c - sum_bnd w g u over all cells.
EnergyParts energy_truncated(const Grid& g, const ScalarField& u,
                             const TruncatedExponent& pk, const ScalarField& gbc);

// Limit energy: same form with the bulk restricted to cells outside the
// closed subdomain. Independent of the truncation level by construction.
EnergyParts energy_limit(const Grid& g, const ScalarField& u,
                         const TruncatedExponent& pk, const ScalarField& gbc);

// total of energy_truncated with overflow mapped to +inf.
double energy_total_guarded(const Grid& g, const ScalarField& u,
                            const TruncatedExponent& pk, const ScalarField& gbc);

// Nodal gradient of energy_truncated. Exact derivative of the discrete
// functional: weak_residual(u, v) == dot(energy_gradient(u), v).
ScalarField energy_gradient(const Grid& g, const ScalarField& u,
                            const TruncatedExponent& pk, const ScalarField& gbc);

// Action of the bulk-term Hessian at u on v (the boundary term is linear and
// drops out). Cells with zero gradient contribute only the |grad|^{p-2}
// block, which vanishes there for p > 2.
ScalarField energy_hessian_apply(const Grid& g, const ScalarField& u,
                                 const TruncatedExponent& pk, const ScalarField& v);

double weak_residual(const Grid& g, const ScalarField& u,
                     const TruncatedExponent& pk, const ScalarField& gbc,
                     const ScalarField& v);

// sum_c w |grad u|^{p_c} over every cell (no 1/p weight, no boundary term).
double modular_bulk_gradient(const Grid& g, const ScalarField& u,
                             const TruncatedExponent& pk);

// Boundary quadrature of g (zero is the Neumann compatibility condition).
double compatibility_defect(const Grid& g, const ScalarField& gbc);

double boundary_term(const Grid& g, const ScalarField& u, const ScalarField& gbc);

// Mean via the same cell quadrature the energies use.
double quadrature_mean(const Grid& g, const ScalarField& u);

enum class CellFilter { All, DbarOnly, OuterOnly };

// max |cell gradient| over the selected cells (0 if none selected).
double max_cell_gradient(const Grid& g, const ScalarField& u, CellFilter filter);

}  // namespace varinf
