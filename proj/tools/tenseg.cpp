#include <iostream>

#include <CLI11.hpp>

#include "tenseg/scenario.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Tensegrity module laboratory: runs one scenario and writes CSV and JSON results."};
  std::string config;
  std::string out;
  bool verbose = false;
  app.add_option("config", config, "Scenario JSON file")->required();
  app.add_option("--out", out, "Output directory (overrides output.dir and $TENSEG_OUT)");
  app.add_flag("-v,--verbose", verbose, "Progress messages on stderr");
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 1;
  }

  tenseg::Scenario s;
  try {
    s = tenseg::parse_config(config);
  } catch (const tenseg::IoError& e) {
    std::cerr << "tenseg: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "tenseg: " << e.what() << "\n";
    return 1;
  }

  const tenseg::RunResult r = tenseg::run_scenario(s, {out, verbose});
  if (r.exit_code != 0) std::cerr << "tenseg: " << r.diagnostic << "\n";
  if (verbose) std::cerr << "[tenseg] exit " << r.exit_code << ", outputs in " << r.out_dir.string() << "\n";
  return r.exit_code;
}
