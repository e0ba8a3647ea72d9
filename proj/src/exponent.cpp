#include "varinf/exponent.hpp"

#include <cmath>
#include <string>

namespace varinf {

ExponentField validate_exponent(const Grid& g, std::vector<double> raw) {
  if (static_cast<int>(raw.size()) != g.num_nodes())
    throw Error("ShapeMismatch", "exponent values do not match the grid");

  double pmin = kInfExponent, pmax = 0.0;
  for (int n = 0; n < g.num_nodes(); ++n) {
    if (g.labels[n] == Region::Inner) {
      raw[n] = kInfExponent;
      continue;
    }
    if (!std::isfinite(raw[n]))
      throw ValidationError("PNotFinite",
                            "exponent is not finite at node " + std::to_string(n) +
                                " outside the subdomain");
    pmin = std::min(pmin, raw[n]);
    pmax = std::max(pmax, raw[n]);
  }
  if (!(pmin > 2.0))
    throw ValidationError("PMinusTooSmall",
                          "need p_minus > 2, got " + std::to_string(pmin));

  ExponentField p;
  p.grid = &g;
  p.values = std::move(raw);
  p.p_minus = pmin;
  p.p_plus = pmax;
  return p;
}

TruncatedExponent truncate(const ExponentField& p, double k) {
  if (!(k > p.p_plus))
    throw ValidationError("KTooSmall", "need k > p_plus = " + std::to_string(p.p_plus) +
                                           ", got k = " + std::to_string(k));
  TruncatedExponent pk;
  pk.grid = p.grid;
  pk.k = k;
  pk.p_minus = p.p_minus;
  pk.p_plus = p.p_plus;
  pk.values.resize(p.values.size());
  for (std::size_t n = 0; n < p.values.size(); ++n)
    pk.values[n] = std::min(p.values[n], k);
  return pk;
}

TruncatedExponent uniform_exponent(const Grid& g, double p) {
  TruncatedExponent pk;
  pk.grid = &g;
  pk.k = p;
  pk.p_minus = p;
  pk.p_plus = p;
  pk.values.assign(static_cast<std::size_t>(g.num_nodes()), p);
  return pk;
}

double conjugate_exponent(double p) {
  if (!(p > 1.0)) throw Error("BadExponent", "conjugate needs p > 1");
  return p / (p - 1.0);
}

double cell_exponent(const TruncatedExponent& pk, int cell) {
  const Grid& g = *pk.grid;
  if (g.cell_dbar[cell]) return pk.k;
  const auto n = g.cell_nodes(cell);
  return 0.25 * (pk.values[n[0]] + pk.values[n[1]] + pk.values[n[2]] + pk.values[n[3]]);
}

std::vector<double> cell_exponents(const TruncatedExponent& pk) {
  const Grid& g = *pk.grid;
  std::vector<double> out(static_cast<std::size_t>(g.num_cells()));
  for (int c = 0; c < g.num_cells(); ++c) out[c] = cell_exponent(pk, c);
  return out;
}

}  // namespace varinf
