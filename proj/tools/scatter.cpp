#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "scatter/commands.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Sparse-potential scattering laboratory"};
  scatter::cli::CommandArgs args;
  app.add_option("command", args.command, "lap-scan | spectrum | waveop | kernel-check")->required();
  app.add_option("--config", args.config, "run config (key = value)")->required();
  app.add_option("--out", args.out, "output directory")->capture_default_str();
  app.add_flag("--resume", args.resume, "reuse matrix dumps from a previous lap-scan");
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : scatter::cli::kConfig;
  }
  return scatter::cli::run(args, std::cout, std::cerr);
}
