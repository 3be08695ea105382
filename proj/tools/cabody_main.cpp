/// Command-line front end: one subcommand per analysis, a shared --config
/// file, and a handful of overrides that map onto the run configuration.

#include "centroaffine/cli.hpp"

#include "CLI11.hpp"

#include <cstdint>
#include <cstdio>
#include <string>
#include <vector>

namespace {

struct CommonOptions {
  std::string config_path;
  std::int64_t seed = -1;
  std::string out_dir;
  std::vector<int> resolution;
  int p_max = 0;
};

void attach_common(CLI::App* cmd, CommonOptions& opts) {
  cmd->add_option("--config", opts.config_path, "run configuration file (JSON)")
      ->required();
  cmd->add_option("--seed", opts.seed, "override the configured seed");
  cmd->add_option("--out", opts.out_dir, "override the configured output directory");
  cmd->add_option("--resolution", opts.resolution,
                  "override the fine resolution (N, or Npolar,Nazimuth); the coarse "
                  "grid is halved from it")
      ->delimiter(',');
  cmd->add_option("--pmax", opts.p_max, "override the sequence ladder depth");
}

centroaffine::RunConfig apply_overrides(const CommonOptions& opts) {
  centroaffine::RunConfig config = centroaffine::load_config(opts.config_path);
  if (opts.seed >= 0) config.seed = static_cast<std::uint64_t>(opts.seed);
  if (!opts.out_dir.empty()) config.out_dir = opts.out_dir;
  if (!opts.resolution.empty()) {
    config.fine = opts.resolution;
    config.coarse.clear();
    for (int n : opts.resolution) {
      int half = n / 2;
      if (half % 2 != 0) --half;  // azimuth counts must stay even
      config.coarse.push_back(half < 8 ? 8 : half);
    }
    const int dim = centroaffine::body_dimension(config.body);
    const std::size_t arity = dim == 2 ? 1 : 2;
    if (config.fine.size() != arity) {
      throw centroaffine::ConfigError("--resolution needs " + std::to_string(arity) +
                                      " component(s) for this body");
    }
    for (std::size_t i = 0; i < arity; ++i) {
      if (config.coarse[i] >= config.fine[i]) {
        throw centroaffine::ConfigError("--resolution is too small to split into grids");
      }
    }
  }
  if (opts.p_max > 0) {
    if (opts.p_max > 48) throw centroaffine::ConfigError("--pmax must lie in [1, 48]");
    config.p_max = opts.p_max;
  }
  return config;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"centro-affine invariants of smooth convex bodies"};
  app.require_subcommand(1);

  const std::vector<std::pair<std::string, std::string>> commands = {
      {"report", "write every invariant of one body as JSON"},
      {"suite", "run the inequality catalogue, write CSV and JSON"},
      {"converge", "tabulate the dyadic approximation ladders against their targets"},
      {"flow", "integrate the planar support flow and check the volume variations"},
      {"falsify", "sweep seeded bodies and log near-equality candidates"},
  };

  std::vector<CommonOptions> option_blocks(commands.size());
  for (std::size_t i = 0; i < commands.size(); ++i) {
    CLI::App* cmd = app.add_subcommand(commands[i].first, commands[i].second);
    attach_common(cmd, option_blocks[i]);
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? centroaffine::kExitOk : centroaffine::kExitUsage;
  }

  for (std::size_t i = 0; i < commands.size(); ++i) {
    if (!app.get_subcommand(commands[i].first)->parsed()) continue;
    centroaffine::RunConfig config;
    try {
      config = apply_overrides(option_blocks[i]);
    } catch (const centroaffine::ConfigError& e) {
      std::fprintf(stderr, "configuration error: %s\n", e.what());
      return centroaffine::kExitUsage;
    }
    return centroaffine::dispatch(commands[i].first, config);
  }
  return centroaffine::kExitUsage;
}
