#include <cstdio>
#include <fstream>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "curvlab/cli.hpp"

int main(int argc, char** argv) {
  CLI::App app{"curvlab - curvature, Li-Yau and Harnack analysis for nonlocal Markov generators"};
  app.require_subcommand(1);

  std::string config_path, out_path, format;
  long long seed = -1;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", config_path, "JSON config file")->required();
    sub->add_option("--out", out_path, "report output path (default: stdout)");
    sub->add_option("--format", format, "json or csv (overrides the config)");
    sub->add_option("--seed", seed, "seed override for stochastic commands");
  };

  const char* commands[] = {"curvature",      "mlsi",        "evolve",      "relaxation",
                            "lattice-liyau",  "lattice-harnack", "frac-kernel", "frac-cly",
                            "frac-harnack",   "cd-counterexample"};
  for (const char* c : commands) add_common(app.add_subcommand(c));
  CLI::App* validate_cmd = app.add_subcommand("validate", "schema-check a config without running");
  validate_cmd->add_option("--config", config_path, "JSON config file")->required();

  CLI11_PARSE(app, argc, argv);
  const std::string sub = app.get_subcommands().front()->get_name();

  try {
    nlohmann::json config = curvlab::cli::load_config(config_path);
    if (sub == "validate") {
      const std::vector<std::string> problems = curvlab::cli::validate(config);
      if (problems.empty()) {
        std::cout << "ok\n";
        return 0;
      }
      for (const std::string& p : problems) std::cout << "problem: " << p << "\n";
      return 1;
    }
    if (config.value("command", sub) != sub) {
      std::cerr << "error: config command '" << config.value("command", "")
                << "' does not match subcommand '" << sub << "'\n";
      return 1;
    }
    config["command"] = sub;
    if (seed >= 0) config["seed"] = static_cast<std::uint64_t>(seed);
    if (!format.empty()) config["format"] = format;

    const curvlab::cli::RunResult result = curvlab::cli::run(config);
    if (out_path.empty()) {
      std::cout << result.report;
    } else {
      std::ofstream out(out_path);
      if (!out) {
        std::cerr << "error: cannot write " << out_path << "\n";
        return 1;
      }
      out << result.report;
    }
    return result.exit_code;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
