#pragma once

#include <string>

#include "varinf/field.hpp"
#include "varinf/geometry.hpp"

namespace varinf {

// Field files: header "x,y,region,u", one row per node in node-id order,
// numbers at 17 significant digits so a write/read round trip is exact.
std::string field_to_csv(const Grid& g, const ScalarField& u);
void write_field_csv(const std::string& path, const Grid& g, const ScalarField& u);

// Reads a field file back onto `g`. Throws ShapeMismatch when the row count
// does not match the grid, ParseError on malformed rows, NonFiniteField on
// non-finite values.
ScalarField read_field_csv(const std::string& path, const Grid& g);

std::string format_double(double v);  // %.17g

}  // namespace varinf
