// erqt: batch driver for scenario files.
//
//   erqt run <config> [--output <path>] [--threads N] [--dump-normalized-config]
//   erqt validate <config>
//
// Exit status: 0 success, 1 at least one row errored, 2 configuration or I/O error.

#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "erqt/error.hpp"
#include "erqt/scenario.hpp"

namespace {

constexpr int kRowErrors = 1;
constexpr int kConfigError = 2;

erqt::ScenarioConfig load(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw erqt::Error(erqt::ErrorCode::Io, "cannot read '" + path + "'");
  std::ostringstream text;
  text << in.rdbuf();
  return erqt::parse_config(text.str());
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Steady-state currents through junctions with finite extended reservoirs"};
  app.require_subcommand(1);

  std::string config_path, output_path;
  unsigned threads = 1;
  bool dump = false;

  auto* run = app.add_subcommand("run", "evaluate a scenario and write CSV results");
  run->add_option("config", config_path, "scenario file")->required();
  run->add_option("--output,-o", output_path, "CSV destination (overrides output.path; '-' for stdout)");
  run->add_option("--threads,-j", threads, "worker threads for sweep points")
      ->check(CLI::Range(1u, 1024u));
  run->add_flag("--dump-normalized-config", dump, "print the normalized scenario before running");

  auto* validate = app.add_subcommand("validate", "check a scenario and print its normalized form");
  validate->add_option("config", config_path, "scenario file")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : kConfigError;
  }

  erqt::ScenarioConfig config;
  try {
    config = load(config_path);
  } catch (const erqt::Error& e) {
    std::cerr << "erqt: " << config_path << ": " << e.what() << '\n';
    return kConfigError;
  }

  if (*validate) {
    std::cout << erqt::dump_config(config);
    return 0;
  }

  if (output_path.empty()) output_path = config.output_path;
  const bool to_stdout = output_path.empty() || output_path == "-";
  if (dump) (to_stdout ? std::cerr : std::cout) << erqt::dump_config(config);

  const auto rows = erqt::run_scenario(config, threads);
  try {
    if (to_stdout) {
      erqt::write_csv(rows, std::cout);
      std::cout.flush();
    } else {
      erqt::emit_csv(rows, output_path);
    }
  } catch (const erqt::Error& e) {
    std::cerr << "erqt: " << e.what() << '\n';
    return kConfigError;
  }

  int failed = 0;
  for (const auto& r : rows) {
    if (!r.error) continue;
    ++failed;
    std::cerr << "erqt: " << to_string(r.method);
    if (r.param_value) std::cerr << " at " << r.param_name << '=' << erqt::format_double(*r.param_value);
    std::cerr << ": " << r.message << '\n';
  }
  return failed ? kRowErrors : 0;
}
