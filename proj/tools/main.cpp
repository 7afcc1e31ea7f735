#include "ranklab/scenario.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <filesystem>
#include <iostream>

namespace fs = std::filesystem;

namespace {

int report(const std::string& label, const ranklab::RunOutcome& o) {
  if (o.exit_code == 0)
    std::cout << label << ": pass (" << o.output_dir << ")\n";
  else if (o.exit_code == 2)
    std::cout << label << ": FAIL at " << o.first_failure << " (" << o.output_dir << ")\n";
  else
    std::cerr << label << ": error: " << o.error << '\n';
  return o.exit_code;
}

// Worst outcome wins: input errors over failures over passes.
int combine(int a, int b) {
  auto rank = [](int c) { return c == 3 ? 2 : c == 2 ? 1 : 0; };
  return rank(a) >= rank(b) ? a : b;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"ranklab: constant rank checks for convex solutions of fully nonlinear equations"};
  app.require_subcommand(1);

  std::string config;
  std::string out;
  auto* run = app.add_subcommand("run", "Run one scenario config");
  run->add_option("config", config, "Scenario TOML file")->required();
  run->add_option("-o,--out", out, "Output directory (overrides [output] dir)");

  std::string dir;
  std::string out_root;
  auto* suite = app.add_subcommand("suite", "Run every *.toml scenario in a directory");
  suite->add_option("dir", dir, "Directory of scenario configs")->required();
  suite->add_option("-o,--out-root", out_root, "Write each scenario to <out-root>/<config stem>");

  app.add_subcommand("formats", "Describe the config, field and report file formats");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 3;
  }

  if (run->parsed()) {
    ranklab::RunOptions opt;
    if (!out.empty()) opt.output_dir = out;
    return report(config, ranklab::run_scenario(config, opt));
  }

  if (suite->parsed()) {
    std::error_code ec;
    std::vector<fs::path> files;
    for (const auto& e : fs::directory_iterator(dir, ec))
      if (e.is_regular_file() && e.path().extension() == ".toml") files.push_back(e.path());
    if (ec) {
      std::cerr << "suite: cannot read " << dir << ": " << ec.message() << '\n';
      return 3;
    }
    if (files.empty()) {
      std::cerr << "suite: no .toml files in " << dir << '\n';
      return 3;
    }
    std::sort(files.begin(), files.end());
    int worst = 0;
    for (const auto& f : files) {
      ranklab::RunOptions opt;
      if (!out_root.empty()) opt.output_dir = (fs::path(out_root) / f.stem()).string();
      worst = combine(worst, report(f.filename().string(), ranklab::run_scenario(f.string(), opt)));
    }
    return worst;
  }

  std::cout << ranklab::formats_help();
  return 0;
}
