#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "varinf/run.hpp"

namespace {

void write_startup_failure(const std::string& dir, const std::string& text) {
  try {
    std::filesystem::create_directories(dir);
    std::ofstream f(dir + "/failure.txt", std::ios::binary);
    f << text;
  } catch (...) {
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"variable-exponent limit solver and verification harness"};
  app.require_subcommand(1);

  std::string config_path, out_override, field_path;
  std::uint64_t seed = 0;
  int levels = -1;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", config_path, "run configuration file")->required();
    sub->add_option("--out", out_override, "output directory override");
  };

  CLI::App* solve = app.add_subcommand(
      "solve", "minimize along the truncation schedule, verify, write fields");
  add_common(solve);
  CLI::Option* solve_seed = solve->add_option("--seed", seed, "audit seed override");

  CLI::App* verify = app.add_subcommand("verify", "run the battery on a stored field");
  add_common(verify);
  verify->add_option("--field", field_path, "field file to verify")->required();
  CLI::Option* verify_seed = verify->add_option("--seed", seed, "audit seed override");

  CLI::App* sweep = app.add_subcommand("sweep", "refinement study with decay orders");
  add_common(sweep);
  sweep->add_option("--levels", levels, "number of doubled-resolution levels");

  CLI::App* report = app.add_subcommand("report", "print the stored run report");
  add_common(report);

  CLI11_PARSE(app, argc, argv);

  try {
    varinf::RunConfig cfg = varinf::parse_config(config_path);
    if (!out_override.empty()) cfg.out_dir = out_override;
    if (solve_seed->count() > 0 || verify_seed->count() > 0) cfg.verify.seed = seed;
    if (levels > 0) {
      cfg.sweep_levels = levels;
      varinf::validate_run(cfg);  // the override must respect the node budget
    }

    varinf::RunOutcome out;
    if (solve->parsed())
      out = varinf::cmd_solve(cfg);
    else if (verify->parsed())
      out = varinf::cmd_verify(cfg, field_path);
    else if (sweep->parsed())
      out = varinf::cmd_sweep(cfg);
    else
      out = varinf::cmd_report(cfg);

    if (!out.report.empty()) std::cout << out.report;
    if (!out.failure.empty()) std::cerr << out.failure;
    return out.exit_code;
  } catch (const varinf::Error& e) {
    const std::string text = std::string("startup failed\ncode = ") + e.code() +
                             "\nwhat = " + e.what() + "\n";
    std::cerr << text;
    write_startup_failure(out_override.empty() ? "out" : out_override, text);
    return 1;
  }
}
