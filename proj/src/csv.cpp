#include "varinf/csv.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace varinf {

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::string field_to_csv(const Grid& g, const ScalarField& u) {
  std::string out = "x,y,region,u\n";
  for (int j = 0; j < g.ny; ++j) {
    for (int i = 0; i < g.nx; ++i) {
      const int n = g.node_id(i, j);
      out += format_double(g.node_x(i));
      out += ',';
      out += format_double(g.node_y(j));
      out += ',';
      out += region_name(g.labels[n]);
      out += ',';
      out += format_double(u[n]);
      out += '\n';
    }
  }
  return out;
}

void write_field_csv(const std::string& path, const Grid& g, const ScalarField& u) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw Error("IoError", "cannot open '" + path + "' for writing");
  f << field_to_csv(g, u);
  if (!f) throw Error("IoError", "write to '" + path + "' failed");
}

ScalarField read_field_csv(const std::string& path, const Grid& g) {
  std::ifstream f(path);
  if (!f) throw Error("IoError", "cannot open '" + path + "'");
  std::string line;
  if (!std::getline(f, line)) throw ParseError(1, 1, "empty field file");
  // tolerate a trailing \r from foreign editors
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != "x,y,region,u")
    throw ParseError(1, 1, "expected header 'x,y,region,u', got '" + line + "'");

  ScalarField u(g);
  int rows = 0, lineno = 1;
  while (std::getline(f, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (rows >= g.num_nodes())
      throw Error("ShapeMismatch", "more rows than grid nodes (" +
                                       std::to_string(g.num_nodes()) + ")");
    std::istringstream ss(line);
    std::string xs, ys, region, us;
    if (!std::getline(ss, xs, ',') || !std::getline(ss, ys, ',') ||
        !std::getline(ss, region, ',') || !std::getline(ss, us))
      throw ParseError(lineno, 1, "expected 4 comma-separated columns");
    double val;
    try {
      val = std::stod(us);
    } catch (...) {
      throw ParseError(lineno, 1, "bad value '" + us + "'");
    }
    if (!std::isfinite(val))
      throw Error("NonFiniteField", "non-finite value at line " + std::to_string(lineno));
    region_from_name(region);  // validates the label column
    u[rows] = val;
    ++rows;
  }
  if (rows != g.num_nodes())
    throw Error("ShapeMismatch", "field file has " + std::to_string(rows) +
                                     " rows, grid has " +
                                     std::to_string(g.num_nodes()) + " nodes");
  return u;
}

}  // namespace varinf
