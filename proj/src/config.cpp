#include "varinf/config.hpp"

#include <cctype>
#include <cmath>
#include <fstream>
#include <sstream>
#include <vector>

#include "varinf/csv.hpp"
#include "varinf/functional.hpp"

namespace varinf {

double FuncSpec::eval(double x, double y) const {
  switch (kind) {
    case Kind::Const:
      return coef[0];
    case Kind::Affine:
      return coef[0] + coef[1] * x + coef[2] * y;
    case Kind::Quadratic:
      return coef[0] + coef[1] * x + coef[2] * y + coef[3] * x * x +
             coef[4] * x * y + coef[5] * y * y;
    default:
      throw Error("BadSpec", "function spec is not pointwise evaluable");
  }
}

std::string FuncSpec::describe() const {
  switch (kind) {
    case Kind::None:
      return "none";
    case Kind::Const:
      return "const " + format_double(coef[0]);
    case Kind::Affine:
      return "affine " + format_double(coef[0]) + " " + format_double(coef[1]) +
             " " + format_double(coef[2]);
    case Kind::Quadratic: {
      std::string s = "quadratic";
      for (int i = 0; i < 6; ++i) s += " " + format_double(coef[i]);
      return s;
    }
    case Kind::Table:
      return "table " + path;
  }
  return "none";
}

namespace {

struct Token {
  std::string text;
  int col;  // 1-based column in the line
};

struct Item {
  std::string section;
  std::string key;
  std::vector<Token> value;
  int line;
  int key_col;
  bool used = false;
};

std::vector<Token> tokenize(const std::string& s, int base_col) {
  std::vector<Token> out;
  std::size_t i = 0;
  while (i < s.size()) {
    while (i < s.size() && std::isspace(static_cast<unsigned char>(s[i]))) ++i;
    if (i >= s.size()) break;
    const std::size_t start = i;
    while (i < s.size() && !std::isspace(static_cast<unsigned char>(s[i]))) ++i;
    out.push_back({s.substr(start, i - start), base_col + static_cast<int>(start)});
  }
  return out;
}

double parse_number(const Token& t, int line) {
  try {
    std::size_t pos = 0;
    const double v = std::stod(t.text, &pos);
    if (pos != t.text.size()) throw std::invalid_argument("trailing");
    return v;
  } catch (...) {
    throw ParseError(line, t.col, "expected a number, got '" + t.text + "'");
  }
}

long parse_integer(const Token& t, int line) {
  try {
    std::size_t pos = 0;
    const long v = std::stol(t.text, &pos);
    if (pos != t.text.size()) throw std::invalid_argument("trailing");
    return v;
  } catch (...) {
    throw ParseError(line, t.col, "expected an integer, got '" + t.text + "'");
  }
}

bool parse_bool(const Token& t, int line) {
  if (t.text == "true") return true;
  if (t.text == "false") return false;
  throw ParseError(line, t.col, "expected true or false, got '" + t.text + "'");
}

// number or the literal `auto` (mapped to -1, the resolve-later sentinel)
double parse_number_or_auto(const Token& t, int line) {
  if (t.text == "auto") return -1.0;
  return parse_number(t, line);
}

void need_arity(const Item& it, std::size_t n) {
  if (it.value.size() != n)
    throw ParseError(it.line, it.key_col,
                     "key '" + it.key + "' expects " + std::to_string(n) +
                         " value token(s), got " + std::to_string(it.value.size()));
}

FuncSpec parse_funcspec(const Item& it, bool allow_table, bool allow_quadratic,
                        const std::string& table_root) {
  if (it.value.empty())
    throw ParseError(it.line, it.key_col, "empty function spec");
  const Token& head = it.value[0];
  FuncSpec f;
  if (head.text == "none") {
    need_arity(it, 1);
    f.kind = FuncSpec::Kind::None;
  } else if (head.text == "const") {
    need_arity(it, 2);
    f.kind = FuncSpec::Kind::Const;
    f.coef[0] = parse_number(it.value[1], it.line);
  } else if (head.text == "affine") {
    need_arity(it, 4);
    f.kind = FuncSpec::Kind::Affine;
    for (int i = 0; i < 3; ++i) f.coef[i] = parse_number(it.value[1 + i], it.line);
  } else if (head.text == "quadratic" && allow_quadratic) {
    need_arity(it, 7);
    f.kind = FuncSpec::Kind::Quadratic;
    for (int i = 0; i < 6; ++i) f.coef[i] = parse_number(it.value[1 + i], it.line);
  } else if (head.text == "table" && allow_table) {
    need_arity(it, 2);
    f.kind = FuncSpec::Kind::Table;
    f.path = it.value[1].text;
    if (!f.path.empty() && f.path[0] != '/') f.path = table_root + "/" + f.path;
  } else {
    throw ParseError(it.line, head.col, "unknown function kind '" + head.text + "'");
  }
  return f;
}

const char* kSections[] = {"domain", "exponent", "boundary", "field",
                           "schedule", "solver", "verify", "sweep", "output"};

bool known_section(const std::string& s) {
  for (const char* k : kSections)
    if (s == k) return true;
  return false;
}

std::string build_echo(const RunConfig& c) {
  std::ostringstream o;
  o << "[domain]\n";
  o << "omega = " << format_double(c.domain.omega.ax) << " "
    << format_double(c.domain.omega.bx) << " " << format_double(c.domain.omega.ay)
    << " " << format_double(c.domain.omega.by) << "\n";
  if (c.domain.d)
    o << "d = " << format_double(c.domain.d->ax) << " " << format_double(c.domain.d->bx)
      << " " << format_double(c.domain.d->ay) << " " << format_double(c.domain.d->by)
      << "\n";
  else
    o << "d = none\n";
  o << "resolution = " << c.domain.nx << " " << c.domain.ny << "\n";
  o << "[exponent]\np = " << c.p_spec.describe() << "\n";
  o << "[boundary]\ng = " << c.g_spec.describe() << "\n";
  if (c.field_spec.kind != FuncSpec::Kind::None)
    o << "[field]\nu = " << c.field_spec.describe() << "\n";
  o << "[schedule]\nk_values =";
  if (c.schedule.k_values.empty())
    o << " auto";
  else
    for (double k : c.schedule.k_values) o << " " << format_double(k);
  o << "\n";
  o << "stop_tol = "
    << (c.schedule.stop_tol < 0.0 ? std::string("auto") : format_double(c.schedule.stop_tol))
    << "\n";
  o << "stop_tol_rel = "
    << (c.schedule.stop_tol_rel < 0.0 ? std::string("auto")
                                      : format_double(c.schedule.stop_tol_rel))
    << "\n";
  o << "stop_early = " << (c.schedule.stop_early ? "true" : "false") << "\n";
  o << "[solver]\n";
  o << "grad_tol = " << format_double(c.solver.grad_tol) << "\n";
  o << "max_iters = " << c.solver.max_iters << "\n";
  o << "ls_shrink = " << format_double(c.solver.ls_shrink) << "\n";
  o << "ls_c1 = " << format_double(c.solver.ls_c1) << "\n";
  o << "max_backtracks = " << c.solver.max_backtracks << "\n";
  o << "polish = " << (c.solver.polish ? "true" : "false") << "\n";
  o << "[verify]\n";
  o << "trials = " << c.verify.trials << "\n";
  o << "seed = " << c.verify.seed << "\n";
  auto opt = [](double v) {
    return v < 0.0 ? std::string("auto") : format_double(v);
  };
  o << "m = " << (c.verify.m <= 0.0 ? std::string("auto") : format_double(c.verify.m))
    << "\n";
  o << "pair_cap = " << c.verify.pair_cap << "\n";
  o << "tol_s = " << opt(c.verify.tol_s) << "\n";
  o << "midrange_tol = " << opt(c.verify.midrange_tol) << "\n";
  o << "iface_tol = " << opt(c.verify.iface_tol) << "\n";
  o << "iface_fraction = " << format_double(c.verify.iface_fraction) << "\n";
  o << "delta_sing_rel = " << format_double(c.verify.delta_sing_rel) << "\n";
  o << "pxlap_tol = " << format_double(c.verify.pxlap_tol) << "\n";
  o << "flux_tol = " << format_double(c.verify.flux_tol) << "\n";
  o << "margin_cells = " << c.verify.margin_cells << "\n";
  o << "tol_mean_rel = " << format_double(c.verify.tol_mean_rel) << "\n";
  o << "compat_tol = " << opt(c.compat_tol) << "\n";
  o << "[sweep]\n";
  o << "levels = " << c.sweep_levels << "\n";
  o << "max_nodes = " << c.sweep_max_nodes << "\n";
  o << "[output]\n";
  o << "dir = " << c.out_dir << "\n";
  o << "write_per_k = " << (c.write_per_k ? "true" : "false") << "\n";
  return o.str();
}

}  // namespace

RunConfig parse_config_text(const std::string& text, const std::string& table_root) {
  std::vector<Item> items;
  {
    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    std::string section;
    while (std::getline(in, line)) {
      ++lineno;
      if (!line.empty() && line.back() == '\r') line.pop_back();
      const std::size_t hash = line.find('#');
      if (hash != std::string::npos) line = line.substr(0, hash);
      std::size_t a = line.find_first_not_of(" \t");
      if (a == std::string::npos) continue;
      std::size_t b = line.find_last_not_of(" \t");
      const std::string body = line.substr(a, b - a + 1);
      if (body.front() == '[') {
        if (body.back() != ']')
          throw ParseError(lineno, static_cast<int>(a) + 1, "unterminated section header");
        const std::string name = body.substr(1, body.size() - 2);
        if (!known_section(name))
          throw ParseError(lineno, static_cast<int>(a) + 2,
                           "unknown section '" + name + "'");
        section = name;
        continue;
      }
      const std::size_t eq = body.find('=');
      if (eq == std::string::npos)
        throw ParseError(lineno, static_cast<int>(a) + 1, "expected 'key = value'");
      if (section.empty())
        throw ParseError(lineno, static_cast<int>(a) + 1, "key before any section");
      std::string key = body.substr(0, eq);
      const std::size_t ke = key.find_last_not_of(" \t");
      if (ke == std::string::npos)
        throw ParseError(lineno, static_cast<int>(a) + 1, "empty key");
      key = key.substr(0, ke + 1);
      Item it;
      it.section = section;
      it.key = key;
      it.line = lineno;
      it.key_col = static_cast<int>(a) + 1;
      it.value = tokenize(body.substr(eq + 1),
                          static_cast<int>(a) + static_cast<int>(eq) + 2);
      items.push_back(std::move(it));
    }
  }

  RunConfig c;
  bool have_omega = false, have_res = false, have_p = false, have_g = false;

  for (Item& it : items) {
    auto is = [&](const char* s, const char* k) {
      return it.section == s && it.key == k;
    };
    it.used = true;
    if (is("domain", "omega")) {
      need_arity(it, 4);
      c.domain.omega.ax = parse_number(it.value[0], it.line);
      c.domain.omega.bx = parse_number(it.value[1], it.line);
      c.domain.omega.ay = parse_number(it.value[2], it.line);
      c.domain.omega.by = parse_number(it.value[3], it.line);
      have_omega = true;
    } else if (is("domain", "d")) {
      if (it.value.size() == 1 && it.value[0].text == "none") {
        c.domain.d.reset();
      } else {
        need_arity(it, 4);
        Rect r;
        r.ax = parse_number(it.value[0], it.line);
        r.bx = parse_number(it.value[1], it.line);
        r.ay = parse_number(it.value[2], it.line);
        r.by = parse_number(it.value[3], it.line);
        c.domain.d = r;
      }
    } else if (is("domain", "resolution")) {
      need_arity(it, 2);
      c.domain.nx = static_cast<int>(parse_integer(it.value[0], it.line));
      c.domain.ny = static_cast<int>(parse_integer(it.value[1], it.line));
      have_res = true;
    } else if (is("exponent", "p")) {
      c.p_spec = parse_funcspec(it, true, false, table_root);
      have_p = true;
    } else if (is("boundary", "g")) {
      c.g_spec = parse_funcspec(it, true, false, table_root);
      have_g = true;
    } else if (is("field", "u")) {
      c.field_spec = parse_funcspec(it, false, true, table_root);
    } else if (is("schedule", "k_values")) {
      if (it.value.size() == 1 && it.value[0].text == "auto") {
        c.schedule.k_values.clear();
      } else {
        if (it.value.empty())
          throw ParseError(it.line, it.key_col, "empty k_values");
        c.schedule.k_values.clear();
        for (const Token& t : it.value)
          c.schedule.k_values.push_back(parse_number(t, it.line));
      }
    } else if (is("schedule", "stop_tol")) {
      need_arity(it, 1);
      c.schedule.stop_tol = parse_number_or_auto(it.value[0], it.line);
    } else if (is("schedule", "stop_tol_rel")) {
      need_arity(it, 1);
      c.schedule.stop_tol_rel = parse_number_or_auto(it.value[0], it.line);
    } else if (is("schedule", "stop_early")) {
      need_arity(it, 1);
      c.schedule.stop_early = parse_bool(it.value[0], it.line);
    } else if (is("solver", "grad_tol")) {
      need_arity(it, 1);
      c.solver.grad_tol = parse_number(it.value[0], it.line);
    } else if (is("solver", "max_iters")) {
      need_arity(it, 1);
      c.solver.max_iters = static_cast<int>(parse_integer(it.value[0], it.line));
    } else if (is("solver", "ls_shrink")) {
      need_arity(it, 1);
      c.solver.ls_shrink = parse_number(it.value[0], it.line);
    } else if (is("solver", "ls_c1")) {
      need_arity(it, 1);
      c.solver.ls_c1 = parse_number(it.value[0], it.line);
    } else if (is("solver", "max_backtracks")) {
      need_arity(it, 1);
      c.solver.max_backtracks = static_cast<int>(parse_integer(it.value[0], it.line));
    } else if (is("solver", "polish")) {
      need_arity(it, 1);
      c.solver.polish = parse_bool(it.value[0], it.line);
    } else if (is("verify", "trials")) {
      need_arity(it, 1);
      c.verify.trials = static_cast<int>(parse_integer(it.value[0], it.line));
    } else if (is("verify", "seed")) {
      need_arity(it, 1);
      c.verify.seed = static_cast<std::uint64_t>(parse_integer(it.value[0], it.line));
    } else if (is("verify", "m")) {
      need_arity(it, 1);
      const double v = parse_number_or_auto(it.value[0], it.line);
      c.verify.m = v < 0.0 ? 0.0 : v;
    } else if (is("verify", "pair_cap")) {
      need_arity(it, 1);
      c.verify.pair_cap = parse_integer(it.value[0], it.line);
    } else if (is("verify", "tol_s")) {
      need_arity(it, 1);
      c.verify.tol_s = parse_number_or_auto(it.value[0], it.line);
    } else if (is("verify", "midrange_tol")) {
      need_arity(it, 1);
      c.verify.midrange_tol = parse_number_or_auto(it.value[0], it.line);
    } else if (is("verify", "iface_tol")) {
      need_arity(it, 1);
      c.verify.iface_tol = parse_number_or_auto(it.value[0], it.line);
    } else if (is("verify", "iface_fraction")) {
      need_arity(it, 1);
      c.verify.iface_fraction = parse_number(it.value[0], it.line);
    } else if (is("verify", "delta_sing_rel")) {
      need_arity(it, 1);
      c.verify.delta_sing_rel = parse_number(it.value[0], it.line);
    } else if (is("verify", "pxlap_tol")) {
      need_arity(it, 1);
      c.verify.pxlap_tol = parse_number(it.value[0], it.line);
    } else if (is("verify", "flux_tol")) {
      need_arity(it, 1);
      c.verify.flux_tol = parse_number(it.value[0], it.line);
    } else if (is("verify", "margin_cells")) {
      need_arity(it, 1);
      c.verify.margin_cells = static_cast<int>(parse_integer(it.value[0], it.line));
    } else if (is("verify", "tol_mean_rel")) {
      need_arity(it, 1);
      c.verify.tol_mean_rel = parse_number(it.value[0], it.line);
    } else if (is("verify", "compat_tol")) {
      need_arity(it, 1);
      c.compat_tol = parse_number_or_auto(it.value[0], it.line);
    } else if (is("sweep", "levels")) {
      need_arity(it, 1);
      c.sweep_levels = static_cast<int>(parse_integer(it.value[0], it.line));
    } else if (is("sweep", "max_nodes")) {
      need_arity(it, 1);
      c.sweep_max_nodes = parse_integer(it.value[0], it.line);
    } else if (is("output", "dir")) {
      need_arity(it, 1);
      c.out_dir = it.value[0].text;
    } else if (is("output", "write_per_k")) {
      need_arity(it, 1);
      c.write_per_k = parse_bool(it.value[0], it.line);
    } else {
      throw ParseError(it.line, it.key_col,
                       "unknown key '" + it.key + "' in section [" + it.section + "]");
    }
  }

  if (!have_omega) throw ValidationError("MissingKey", "[domain] omega is required");
  if (!have_res)
    throw ValidationError("MissingKey", "[domain] resolution is required");
  if (!have_p) throw ValidationError("MissingKey", "[exponent] p is required");
  if (!have_g) throw ValidationError("MissingKey", "[boundary] g is required");

  validate_run(c);
  c.echo = build_echo(c);
  return c;
}

RunConfig parse_config(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw Error("IoError", "cannot open config '" + path + "'");
  std::ostringstream ss;
  ss << f.rdbuf();
  std::string root = ".";
  const std::size_t slash = path.find_last_of('/');
  if (slash != std::string::npos) root = path.substr(0, slash);
  return parse_config_text(ss.str(), root);
}

ExponentField build_exponent(const Grid& g, const FuncSpec& spec) {
  std::vector<double> vals;
  if (spec.kind == FuncSpec::Kind::Table) {
    vals = read_field_csv(spec.path, g).v;
  } else if (spec.kind == FuncSpec::Kind::None) {
    throw ValidationError("MissingKey", "exponent spec is empty");
  } else {
    vals.resize(static_cast<std::size_t>(g.num_nodes()));
    for (int j = 0; j < g.ny; ++j)
      for (int i = 0; i < g.nx; ++i)
        vals[static_cast<std::size_t>(g.node_id(i, j))] =
            spec.eval(g.node_x(i), g.node_y(j));
  }
  return validate_exponent(g, std::move(vals));
}

ScalarField build_boundary(const Grid& g, const FuncSpec& spec) {
  if (spec.kind == FuncSpec::Kind::Table) {
    ScalarField u = read_field_csv(spec.path, g);
    return u;
  }
  if (spec.kind == FuncSpec::Kind::None)
    throw ValidationError("MissingKey", "boundary spec is empty");
  ScalarField u = make_field(g, [&](double x, double y) { return spec.eval(x, y); });
  check_finite(u, "boundary data");
  return u;
}

ScalarField build_analytic_field(const Grid& g, const FuncSpec& spec) {
  if (spec.kind != FuncSpec::Kind::Affine && spec.kind != FuncSpec::Kind::Quadratic)
    throw ValidationError("BadSpec", "analytic field must be affine or quadratic");
  return make_field(g, [&](double x, double y) { return spec.eval(x, y); });
}

double resolved_compat_tol(const RunConfig& cfg, const Grid& g, const ScalarField& gbc) {
  if (cfg.compat_tol >= 0.0) return cfg.compat_tol;
  double gmax = 0.0;
  for (int n : g.boundary_nodes) gmax = std::max(gmax, std::abs(gbc[n]));
  return 1e-10 * g.perimeter() * (1.0 + gmax);
}

void validate_run(const RunConfig& cfg) {
  const Grid g = build_grid(cfg.domain);
  const ExponentField p = build_exponent(g, cfg.p_spec);
  const ScalarField gbc = build_boundary(g, cfg.g_spec);

  const double defect = std::abs(compatibility_defect(g, gbc));
  const double tol = resolved_compat_tol(cfg, g, gbc);
  if (defect > tol)
    throw ValidationError("compatibility",
                          "boundary data integrates to " + format_double(defect) +
                              " over the boundary, above tolerance " +
                              format_double(tol) +
                              "; zero-mean Neumann data is required");

  if (!cfg.schedule.k_values.empty()) {
    if (cfg.schedule.k_values.size() < 2)
      throw ValidationError("BadSchedule", "need at least two truncation levels");
    double prev = 0.0;
    for (double k : cfg.schedule.k_values) {
      if (!(k > p.p_plus))
        throw ValidationError("KTooSmall",
                              "truncation level " + format_double(k) +
                                  " must exceed p_plus = " + format_double(p.p_plus));
      if (!(k > prev))
        throw ValidationError("BadSchedule", "truncation levels must increase");
      prev = k;
    }
  }

  if (!(cfg.solver.grad_tol > 0.0))
    throw ValidationError("BadSolverConfig", "grad_tol must be positive");
  if (cfg.solver.max_iters < 1)
    throw ValidationError("BadSolverConfig", "max_iters must be at least 1");
  if (!(cfg.solver.ls_shrink > 0.0 && cfg.solver.ls_shrink < 1.0))
    throw ValidationError("BadSolverConfig", "ls_shrink must lie in (0, 1)");
  if (!(cfg.solver.ls_c1 > 0.0 && cfg.solver.ls_c1 < 1.0))
    throw ValidationError("BadSolverConfig", "ls_c1 must lie in (0, 1)");
  if (cfg.verify.trials < 0)
    throw ValidationError("BadVerifyConfig", "trials must be non-negative");
  if (!(cfg.verify.iface_fraction >= 0.0 && cfg.verify.iface_fraction <= 1.0))
    throw ValidationError("BadVerifyConfig", "iface_fraction must lie in [0, 1]");
  if (cfg.verify.m > 0.0 && cfg.verify.m <= p.p_minus)
    throw ValidationError("MTooSmall", "integrability order m must exceed p_minus");
  if (cfg.sweep_levels < 1)
    throw ValidationError("BadSweep", "levels must be at least 1");
  const long fine_nodes =
      (static_cast<long>(cfg.domain.nx - 1) << (cfg.sweep_levels - 1)) + 1;
  const long fine_ny =
      (static_cast<long>(cfg.domain.ny - 1) << (cfg.sweep_levels - 1)) + 1;
  if (fine_nodes * fine_ny > cfg.sweep_max_nodes)
    throw ValidationError("BadSweep", "finest sweep level exceeds max_nodes");
}

}  // namespace varinf
