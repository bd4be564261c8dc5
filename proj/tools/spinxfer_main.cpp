#include <chrono>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <omp.h>

#include "spinxfer/commands.hpp"

namespace {

struct CommonArgs {
  std::string config;
  std::vector<std::string> sets;
  int threads = 0;
  std::string out;
  long long seed = -1;
};

void add_common(CLI::App* cmd, CommonArgs& a) {
  cmd->add_option("--config", a.config, "INI config file");
  cmd->add_option("--set", a.sets, "override, section.key=value (repeatable)");
  cmd->add_option("--threads", a.threads, "worker threads (default: all available)")->check(CLI::NonNegativeNumber);
  cmd->add_option("--out", a.out, "output directory (overrides output.dir)");
  cmd->add_option("--seed", a.seed, "random seed (overrides solver.seed)")->check(CLI::NonNegativeNumber);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Spin-chain state transfer: restoring controls, coherence-matrix transfer, analytic chains"};
  app.require_subcommand(1);
  CommonArgs args;
  const std::vector<std::pair<std::string, std::string>> commands = {
      {"restore", "multi-start control optimization and S-metrics"},
      {"ptz", "zero-order coherence transfer (full or cut protocol)"},
      {"rect", "multichannel receiver distance scan"},
      {"analytic", "nearest-neighbour S(N) and tau0(N)"},
      {"evolve", "free evolution lambda factors"},
  };
  for (const auto& [name, help] : commands) add_common(app.add_subcommand(name, help), args);
  CLI11_PARSE(app, argc, argv);

  const std::string command = app.get_subcommands().front()->get_name();
  try {
    std::vector<std::string> sets = args.sets;
    if (!args.out.empty()) sets.push_back("output.dir=" + args.out);
    if (args.seed >= 0) sets.push_back("solver.seed=" + std::to_string(args.seed));
    const auto cfg = spinxfer::load_config(args.config, sets);
    if (args.threads > 0) omp_set_num_threads(args.threads);
    const int threads = args.threads > 0 ? args.threads : omp_get_max_threads();

    const auto start = std::chrono::steady_clock::now();
    std::vector<std::string> outputs;
    if (command == "restore") outputs = spinxfer::run_restore(cfg);
    else if (command == "ptz") outputs = spinxfer::run_ptz(cfg);
    else if (command == "rect") outputs = spinxfer::run_ptz(cfg, "rect");
    else if (command == "analytic") outputs = spinxfer::run_analytic(cfg);
    else outputs = spinxfer::run_evolve(cfg);
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    spinxfer::write_manifest(cfg, command, outputs, secs, threads);
    for (const auto& o : outputs) std::cout << cfg.out_dir << '/' << o << '\n';
  } catch (const std::exception& e) {
    std::cerr << "spinxfer " << command << ": " << e.what() << '\n';
    return 1;
  }
  return 0;
}
