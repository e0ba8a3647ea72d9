#pragma once

#include "varinf/exponent.hpp"
#include "varinf/field.hpp"
#include "varinf/functional.hpp"

// Plain serial implementations of the hot kernels, kept as the ground truth
// the parallel versions are tested and benchmarked against. Straight
// left-to-right loops, no buffers, no reduction tricks.
namespace varinf::reference {

double energy_total(const Grid& g, const ScalarField& u,
                    const TruncatedExponent& pk, const ScalarField& gbc);

ScalarField energy_gradient(const Grid& g, const ScalarField& u,
                            const TruncatedExponent& pk, const ScalarField& gbc);

double modular_bulk_gradient(const Grid& g, const ScalarField& u,
                             const TruncatedExponent& pk);

}  // namespace varinf::reference
