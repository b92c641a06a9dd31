// SPDX-License-Identifier: Apache-2.0
#include <cstdio>
#include <exception>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "ssou/error.hpp"
#include "ssou/harness/experiments.hpp"

namespace {

struct CommonFlags {
  std::string config;
  std::string out = ".";
  std::optional<std::uint64_t> seed;
  unsigned workers = 1;
  bool full_scale = false;
  std::optional<std::size_t> max_cells;
};

void add_common(CLI::App* cmd, CommonFlags& f) {
  cmd->add_option("--config", f.config, "key=value config file")->check(CLI::ExistingFile);
  cmd->add_option("--out", f.out, "output directory")->capture_default_str();
  cmd->add_option("--seed", f.seed, "master seed (overrides the config)");
  cmd->add_option("--workers", f.workers, "worker threads")->check(CLI::PositiveNumber)->capture_default_str();
  cmd->add_flag("--full-scale", f.full_scale, "use full sample counts and grids");
  cmd->add_option("--max-cells", f.max_cells, "stop after this many new cells")->group("");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Switching Ornstein-Uhlenbeck simulator, theory tables and learnability sweeps"};
  app.require_subcommand(1);
  app.set_version_flag("--version", ssou::harness::code_version());

  CommonFlags flags;
  for (const auto& name : ssou::harness::experiment_names()) add_common(app.add_subcommand(name), flags);

  CLI11_PARSE(app, argc, argv);

  try {
    ssou::harness::RunContext ctx;
    if (!flags.config.empty()) ctx.config = ssou::harness::Config::load(flags.config);
    ctx.out_dir = flags.out;
    ctx.seed = flags.seed;
    ctx.workers = flags.workers;
    ctx.full_scale = flags.full_scale;
    ctx.cell_limit = flags.max_cells;
    const std::string name = app.get_subcommands().front()->get_name();
    const auto result = ssou::harness::run_experiment(name, ctx);
    std::cout << result.csv_path.string() << (result.complete ? "" : " (partial)") << '\n';
    return result.complete ? 0 : 3;
  } catch (const ssou::InvalidParameter& e) {
    std::cerr << "ssou: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "ssou: " << e.what() << '\n';
    return 1;
  }
}
