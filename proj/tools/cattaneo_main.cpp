// Command-line front end: spectrum | symmetrizer | coupling | wave | all.
//
// Exit codes: 0 all checks passed (or checks failed without --strict),
// 1 a check failed under --strict, 2 usage or configuration error,
// 3 numerical error.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "cattaneo/cli/commands.hpp"

namespace {

enum Exit { kOk = 0, kCheckFailed = 1, kUsage = 2, kNumerical = 3 };

int run(int argc, char** argv) {
  CLI::App app{"Numerical checks for the (1,-1) Cattaneo fluid system"};
  app.require_subcommand(1, 1);

  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out_dir;
  bool strict = false;
  app.add_option("--config", config_path, "JSON configuration file")->check(CLI::ExistingFile);
  app.add_option("--seed", seed, "RNG seed (overrides the config)");
  app.add_option("--out", out_dir, "output directory (overrides the config)");
  app.add_flag("--strict", strict, "exit with status 1 when any check fails");

  for (const char* name : {"spectrum", "symmetrizer", "coupling", "wave", "all"}) {
    app.add_subcommand(name, std::string("run the ") + name + " analysis")->fallthrough();
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kUsage;
  }
  const std::string command = app.get_subcommands().front()->get_name();

  cattaneo::cli::ExperimentConfig cfg =
      config_path.empty() ? cattaneo::cli::default_config() : cattaneo::cli::load_config(config_path);
  if (seed) cfg.seed = *seed;
  if (out_dir) cfg.out_dir = *out_dir;
  cattaneo::cli::validate(cfg);

  const cattaneo::cli::RunContext ctx(cfg);
  const auto result = cattaneo::cli::run_command(command, ctx);

  std::filesystem::create_directories(ctx.out_dir);
  const auto report_path = ctx.out_dir / "report.json";
  std::ofstream os(report_path);
  if (!os) throw cattaneo::ConfigError("cannot write " + report_path.string());
  os << result.report.dump(2) << "\n";

  const auto& summary = result.report["summary"];
  std::cout << command << ": " << summary["checks"].get<int>() - summary["failed"].get<int>() << "/"
            << summary["checks"].get<int>() << " checks passed; report at " << report_path.string()
            << "\n";
  for (const auto& name : summary["failed_checks"]) std::cout << "  FAILED " << name.get<std::string>() << "\n";
  if (!result.pass && strict) return kCheckFailed;
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run(argc, argv);
  } catch (const cattaneo::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kUsage;
  } catch (const cattaneo::DomainError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kUsage;
  } catch (const cattaneo::AssumptionViolation& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kUsage;
  } catch (const cattaneo::Error& e) {
    std::cerr << "numerical error: " << e.what() << "\n";
    return kNumerical;
  } catch (const std::filesystem::filesystem_error& e) {
    std::cerr << "i/o error: " << e.what() << "\n";
    return kUsage;
  }
}
