// slowman: command-line front end for the slow-manifold pipeline.
#include <iostream>

#include <CLI11.hpp>

#include "config.hpp"
#include "slowman/errors.hpp"
#include "stages.hpp"

int main(int argc, char** argv) {
  using namespace slowman::cli;
  CLI::App app{"Slow manifolds of periodic orbits: averaged flow and first-order corrections"};
  app.require_subcommand(1, 1);
  std::string config_path, out = "out", eps_list, family_in, family_out;
  bool stage_cache = false;
  app.add_option("--config", config_path, "config file (key = value lines)")->required();
  app.add_option("--out", out, "output directory")->capture_default_str();
  app.add_option("--eps", eps_list, "comma-separated eps values, overrides the config");
  app.add_flag("--stage-cache", stage_cache, "reuse upstream artifacts from the output directory");
  app.add_option("--family-in", family_in, "load the orbit family from this file");
  app.add_option("--family-out", family_out, "also write the orbit family to this file");
  for (const char* name : {"family", "floquet", "project", "homological", "reduce", "verify"})
    app.add_subcommand(name)->fallthrough();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? exit_pass : exit_usage;
  }

  RunConfig config;
  try {
    config = load_config(config_path);
    if (!eps_list.empty()) {
      config.eps = parse_list(eps_list);
      config.validate();
    }
  } catch (const slowman::ConfigError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return exit_usage;
  }

  RunOptions options;
  options.out = out;
  options.stage_cache = stage_cache;
  if (!family_in.empty()) options.family_in = family_in;
  if (!family_out.empty()) options.family_out = family_out;

  const Stage stage = parse_stage(app.get_subcommands().front()->get_name());
  const auto result = run_stage(stage, config, options, std::cerr);
  for (const auto& c : result.report.value("checks", nlohmann::json::array())) {
    std::cout << (c["pass"].get<bool>() ? "ok    " : "FAIL  ") << c["stage"].get<std::string>() << "."
              << c["name"].get<std::string>();
    if (c.contains("value")) std::cout << " = " << c["value"].get<double>();
    std::cout << "\n";
  }
  std::cout << to_string(stage) << ": " << result.report["status"].get<std::string>() << "\n";
  return result.exit_code;
}
