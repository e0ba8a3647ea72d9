#pragma once

#include <limits>
#include <vector>

#include "varinf/geometry.hpp"

namespace varinf {

// Variable exponent sampled at nodes. Finite on every node outside the open
// subdomain; +inf exactly on INNER nodes. p_minus/p_plus are taken over the
// finite values and must satisfy p_minus > 2 (spatial dimension).
struct ExponentField {
  const Grid* grid = nullptr;
  std::vector<double> values;
  double p_minus = 0.0;
  double p_plus = 0.0;
};

// The truncation min(p, k): INNER nodes carry k, all finite nodes keep
// their value (k is validated above p_plus, so min is the identity there).
struct TruncatedExponent {
  const Grid* grid = nullptr;
  std::vector<double> values;
  double k = 0.0;
  double p_minus = 0.0;
  double p_plus = 0.0;  // of the untruncated field; k itself may exceed it
};

// Validates finite-node values and computes the bounds. `raw` must hold one
// value per node; entries at INNER nodes are ignored and replaced by +inf.
// Throws ValidationError with invariant PNotFinite / PMinusTooSmall.
ExponentField validate_exponent(const Grid& g, std::vector<double> raw);

// Throws ValidationError("KTooSmall") unless k > p_plus.
TruncatedExponent truncate(const ExponentField& p, double k);

// Constant exponent everywhere with no truncation gap; the oracle-facing
// constructor for grids without a subdomain.
TruncatedExponent uniform_exponent(const Grid& g, double p);

// p/(p-1); throws Error("BadExponent") unless p > 1.
double conjugate_exponent(double p);

// Exponent attached to a cell: k on cells inside the closed subdomain,
// otherwise the average of the (finite) values at the four corners.
double cell_exponent(const TruncatedExponent& pk, int cell);

// All cells at once; the hot loops index this instead of recomputing.
std::vector<double> cell_exponents(const TruncatedExponent& pk);

inline constexpr double kInfExponent = std::numeric_limits<double>::infinity();

}  // namespace varinf
