#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "spgs/cli.hpp"

int main(int argc, char** argv) {
  using namespace spgs::cli;
  CLI::App app{"Ground states of the Schroedinger-Poisson system"};
  app.require_subcommand(1);
  app.fallthrough();
  std::string config_path, out_dir = ".";
  std::optional<std::uint64_t> seed;
  unsigned threads = 1;
  app.add_option("--config", config_path, "JSON configuration file");
  app.add_option("--out", out_dir, "output directory");
  app.add_option("--seed", seed, "seed for random probes and checks");
  app.add_option("--threads", threads, "worker threads for independent sub-runs")->check(CLI::PositiveNumber);
  for (const auto& [name, exp] : experiment_names()) app.add_subcommand(name, "run the " + name + " experiment");
  CLI11_PARSE(app, argc, argv);

  RunConfig config;
  try {
    std::string text = "{}";
    if (!config_path.empty()) {
      std::ifstream in(config_path);
      if (!in) {
        std::cerr << "cannot read " << config_path << '\n';
        return kInvalid;
      }
      std::ostringstream ss;
      ss << in.rdbuf();
      text = ss.str();
    }
    config = parse_config(text);
  } catch (const ParseError& e) {
    std::cerr << e.what() << " (byte " << e.position() << ")\n";
    return kInvalid;
  } catch (const ConfigError& e) {
    std::cerr << e.what() << '\n';
    return kInvalid;
  }
  config.experiment = experiment_names().at(app.get_subcommands().front()->get_name());
  if (seed) config.solver.seed = *seed;

  std::vector<std::pair<std::string, std::string>> csv;
  const auto [code, report] = run(config, threads, &csv);
  write_outputs(out_dir, report, csv);
  if (report.contains("error")) std::cerr << report["error"].dump(2) << '\n';
  std::cout << "exit " << code << ", report in " << (std::filesystem::path(out_dir) / "report.json").string() << '\n';
  return code;
}
