#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>

#include "doctest.h"
#include "oracles.hpp"
#include "varinf/config.hpp"
#include "varinf/csv.hpp"
#include "varinf/errors.hpp"
#include "varinf/run.hpp"

using namespace varinf;
namespace fs = std::filesystem;

namespace {

std::string small_config(const std::string& out_dir) {
  return
      "# compact run used by the pipeline tests\n"
      "[domain]\n"
      "omega = 0 1 0 1\n"
      "d = 0.25 0.75 0.25 0.75\n"
      "resolution = 9 9\n"
      "[exponent]\n"
      "p = const 4\n"
      "[boundary]\n"
      "g = affine -0.5 1 0\n"
      "[schedule]\n"
      "k_values = 8 16 32 64\n"
      "stop_tol = 1e-2\n"
      "[solver]\n"
      "grad_tol = 1e-9\n"
      "[verify]\n"
      "trials = 30\n"
      "[output]\n"
      "dir = " + out_dir + "\n";
}

fs::path fresh_dir(const std::string& name) {
  const fs::path p = fs::path("cli_scratch") / name;
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream f(p);
  REQUIRE(f.good());
  std::ostringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

}  // namespace

TEST_CASE("config text parses into the expected values") {
  const RunConfig c = parse_config_text(small_config("outx"));
  CHECK(c.domain.nx == 9);
  CHECK(c.domain.d.has_value());
  CHECK(c.domain.d->ax == doctest::Approx(0.25));
  CHECK(c.p_spec.kind == FuncSpec::Kind::Const);
  CHECK(c.p_spec.coef[0] == doctest::Approx(4.0));
  CHECK(c.g_spec.kind == FuncSpec::Kind::Affine);
  CHECK(c.schedule.k_values.size() == 4);
  CHECK(c.schedule.stop_tol == doctest::Approx(1e-2));
  CHECK(c.verify.trials == 30);
  CHECK(c.out_dir == "outx");
  CHECK(!c.echo.empty());
}

TEST_CASE("the echoed config is a fixed point of the parser") {
  const RunConfig c = parse_config_text(small_config("outx"));
  const RunConfig c2 = parse_config_text(c.echo);
  CHECK(c2.echo == c.echo);
  CHECK(c2.domain.nx == c.domain.nx);
  CHECK(c2.schedule.k_values == c.schedule.k_values);
}

TEST_CASE("grammar errors carry line and column") {
  try {
    parse_config_text("[domain]\nomega = 0 1 0 1\nwhat = 3\n");
    CHECK(false);
  } catch (const ParseError& e) {
    CHECK(e.line == 3);
    CHECK(e.column == 1);
  }
  CHECK_THROWS_AS(parse_config_text("[nope]\nx = 1\n"), ParseError);
  CHECK_THROWS_AS(
      parse_config_text("[domain]\nomega = 0 1 0\n"),  // arity
      ParseError);
  CHECK_THROWS_AS(
      parse_config_text("[domain]\nomega = 0 1 0 zz\n"),  // number
      ParseError);
  // p disallows quadratic
  const std::string bad_p =
      "[domain]\nomega = 0 1 0 1\nresolution = 5 5\n"
      "[exponent]\np = quadratic 3 0 0 1 0 0\n[boundary]\ng = const 0\n";
  CHECK_THROWS_AS(parse_config_text(bad_p), ParseError);
}

TEST_CASE("semantic validation names the broken invariant") {
  // missing required key
  try {
    parse_config_text("[domain]\nomega = 0 1 0 1\nresolution = 5 5\n"
                      "[exponent]\np = const 4\n");
    CHECK(false);
  } catch (const ValidationError& e) {
    CHECK(e.invariant == "MissingKey");
  }
  // exponent floor
  const std::string p2 =
      "[domain]\nomega = 0 1 0 1\nresolution = 5 5\n"
      "[exponent]\np = const 2\n[boundary]\ng = affine -0.5 1 0\n";
  try {
    parse_config_text(p2);
    CHECK(false);
  } catch (const ValidationError& e) {
    CHECK(e.invariant == "PMinusTooSmall");
  }
  // incompatible boundary data: nonzero mean on the boundary
  const std::string badg =
      "[domain]\nomega = 0 1 0 1\nresolution = 5 5\n"
      "[exponent]\np = const 4\n[boundary]\ng = const 1\n";
  try {
    parse_config_text(badg);
    CHECK(false);
  } catch (const ValidationError& e) {
    CHECK(e.invariant == "compatibility");
  }
  // truncation levels must clear p_plus
  const std::string badk =
      "[domain]\nomega = 0 1 0 1\nresolution = 5 5\n"
      "[exponent]\np = const 4\n[boundary]\ng = affine -0.5 1 0\n"
      "[schedule]\nk_values = 3 6\n";
  try {
    parse_config_text(badk);
    CHECK(false);
  } catch (const ValidationError& e) {
    CHECK(e.invariant == "KTooSmall");
  }
  // a single level cannot support the limit extraction
  const std::string onek =
      "[domain]\nomega = 0 1 0 1\nresolution = 5 5\n"
      "[exponent]\np = const 4\n[boundary]\ng = affine -0.5 1 0\n"
      "[schedule]\nk_values = 8\n";
  CHECK_THROWS_AS(parse_config_text(onek), ValidationError);
}

TEST_CASE("field files round-trip bit for bit") {
  DomainSpec s;
  s.omega = {0.0, 1.0, 0.0, 1.0};
  s.d = Rect{0.25, 0.75, 0.25, 0.75};
  s.nx = 9;
  s.ny = 9;
  const Grid g = build_grid(s);
  const ScalarField u = oracle::random_smooth_field(g, 321);
  const fs::path dir = fresh_dir("roundtrip");
  const std::string path = (dir / "u.csv").string();
  write_field_csv(path, g, u);
  const ScalarField back = read_field_csv(path, g);
  for (int n = 0; n < u.size(); ++n) CHECK(back[n] == u[n]);

  // header line and region labels present
  const std::string text = slurp(dir / "u.csv");
  CHECK(text.rfind("x,y,region,u\n", 0) == 0);
  CHECK(text.find("INNER") != std::string::npos);
  CHECK(text.find("INTERFACE") != std::string::npos);

  // wrong grid -> shape mismatch
  DomainSpec s2 = s;
  s2.nx = 5;
  s2.ny = 5;
  s2.d.reset();
  const Grid g2 = build_grid(s2);
  CHECK_THROWS_AS(read_field_csv(path, g2), Error);

  // corrupted number -> parse error
  {
    std::ofstream f(dir / "bad.csv");
    f << "x,y,region,u\n0,0,OUTER_BOUNDARY,zap\n";
  }
  CHECK_THROWS_AS(read_field_csv((dir / "bad.csv").string(), g2), Error);
}

TEST_CASE("solve pipeline: exit 0, artifacts on disk, deterministic bytes") {
  const fs::path dir = fresh_dir("solve_a");
  const RunConfig cfg = parse_config_text(small_config(dir.string()));
  const RunOutcome out = cmd_solve(cfg);
  CHECK(out.exit_code == 0);
  CHECK(out.have_limit);
  CHECK(out.have_battery);
  CHECK(out.battery.pass);
  CHECK(out.limit.cauchy_ok);
  CHECK(fs::exists(dir / "u_inf.csv"));
  CHECK(fs::exists(dir / "report.txt"));
  CHECK(fs::exists(dir / "u_k_8.csv"));
  CHECK(fs::exists(dir / "u_k_64.csv"));
  CHECK(!fs::exists(dir / "failure.txt"));
  CHECK(out.report.find("[config]") != std::string::npos);
  CHECK(out.report.find("[verify]") != std::string::npos);

  // a second identical run produces identical field bytes
  const fs::path dir2 = fresh_dir("solve_b");
  const RunConfig cfg2 = parse_config_text(small_config(dir2.string()));
  const RunOutcome out2 = cmd_solve(cfg2);
  CHECK(out2.exit_code == 0);
  CHECK(slurp(dir / "u_inf.csv") == slurp(dir2 / "u_inf.csv"));
}

TEST_CASE("solve pipeline: hard failure writes only the failure report") {
  const fs::path dir = fresh_dir("solve_fail");
  std::string text = small_config(dir.string());
  text += "[solver]\nmax_iters = 1\n";
  const RunConfig cfg = parse_config_text(text);
  const RunOutcome out = cmd_solve(cfg);
  CHECK(out.exit_code == 1);
  CHECK(!out.failure.empty());
  CHECK(fs::exists(dir / "failure.txt"));
  CHECK(!fs::exists(dir / "u_inf.csv"));
  CHECK(out.failure.find("NoConvergence") != std::string::npos);
}

TEST_CASE("verify pipeline accepts the solved field and rejects junk") {
  const fs::path dir = fresh_dir("verify_a");
  const RunConfig cfg = parse_config_text(small_config(dir.string()));
  REQUIRE(cmd_solve(cfg).exit_code == 0);

  const RunOutcome ok = cmd_verify(cfg, (dir / "u_inf.csv").string());
  CHECK(ok.exit_code == 0);
  CHECK(ok.have_battery);

  // an arbitrary admissible-looking field is not a minimizer: exit 2
  const Grid g = build_grid(cfg.domain);
  ScalarField junk = oracle::random_smooth_field(g, 555, 0.2);
  junk = project_mean_zero(junk);
  const std::string jpath = (dir / "junk.csv").string();
  write_field_csv(jpath, g, junk);
  const RunOutcome bad = cmd_verify(cfg, jpath);
  CHECK(bad.exit_code == 2);

  // unreadable field: exit 1
  const RunOutcome gone = cmd_verify(cfg, (dir / "missing.csv").string());
  CHECK(gone.exit_code == 1);
}

TEST_CASE("report verb prints the stored report") {
  const fs::path dir = fresh_dir("report_a");
  const RunConfig cfg = parse_config_text(small_config(dir.string()));
  REQUIRE(cmd_solve(cfg).exit_code == 0);
  const RunOutcome rep = cmd_report(cfg);
  CHECK(rep.exit_code == 0);
  CHECK(rep.report == slurp(dir / "report.txt"));

  const fs::path empty = fresh_dir("report_b");
  RunConfig cfg2 = parse_config_text(small_config(empty.string()));
  CHECK(cmd_report(cfg2).exit_code == 1);
}

TEST_CASE("sweep over an analytic affine field is residual-free") {
  const fs::path dir = fresh_dir("sweep_a");
  std::string text =
      "[domain]\nomega = 0 1 0 1\nd = 0.25 0.75 0.25 0.75\nresolution = 9 9\n"
      "[exponent]\np = const 4\n"
      "[boundary]\ng = affine -0.5 1 0\n"
      "[field]\nu = affine 0 1 0\n"
      "[sweep]\nlevels = 3\n"
      "[output]\ndir = " + dir.string() + "\n";
  const RunConfig cfg = parse_config_text(text);
  const RunOutcome out = cmd_sweep(cfg);
  CHECK(out.exit_code == 0);
  CHECK(out.have_sweep);
  CHECK(!out.sweep.solved);
  REQUIRE(out.sweep.levels.size() == 3);
  CHECK(out.sweep.levels[0].nx == 9);
  CHECK(out.sweep.levels[1].nx == 17);
  CHECK(out.sweep.levels[2].nx == 33);
  for (const SweepLevel& lv : out.sweep.levels) {
    CHECK(lv.midrange_max <= 1e-12);
    CHECK(lv.direct_max <= 1e-12);
  }
  CHECK(fs::exists(dir / "report.txt"));
}

TEST_CASE("sweep respects the node budget") {
  std::string text =
      "[domain]\nomega = 0 1 0 1\nresolution = 9 9\n"
      "[exponent]\np = const 4\n"
      "[boundary]\ng = affine -0.5 1 0\n"
      "[field]\nu = affine 0 1 0\n"
      "[sweep]\nlevels = 12\nmax_nodes = 100000\n";
  CHECK_THROWS_AS(parse_config_text(text), ValidationError);
}
