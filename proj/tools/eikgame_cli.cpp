#include <cstdio>
#include <exception>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "eikgame/commands.hpp"
#include "eikgame/error.hpp"

namespace {

eikgame::MultiIndex parse_node(const std::string& text) {
  eikgame::MultiIndex idx{0, 0, 0};
  std::istringstream in(text);
  std::string part;
  int n = 0;
  while (std::getline(in, part, ',')) {
    if (n == 3) throw eikgame::ConfigError("--node expects i,j[,k]");
    idx[n++] = std::stoi(part);
  }
  if (n < 2) throw eikgame::ConfigError("--node expects i,j[,k]");
  return idx;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Anisotropic fast marching and sensor placement games"};
  app.require_subcommand(1);

  std::string config_path;
  std::string out_dir = ".";
  std::string node;
  eikgame::CommandOptions options;

  const auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", config_path, "Run configuration (JSON)")->required();
    sub->add_option("--out", out_dir, "Output directory");
    sub->add_flag("--plot", options.plot, "Also write SVG figures");
    sub->add_option("--seed", options.seed, "Random seed for sampled checks");
  };
  CLI::App* solve = app.add_subcommand("solve", "Value functions and optimal paths");
  CLI::App* gradient = app.add_subcommand("gradient", "Objective value and gradient");
  CLI::App* optimize = app.add_subcommand("optimize", "Projected L-BFGS sensor placement");
  CLI::App* dump = app.add_subcommand("stencil-dump", "Stencil of one node");
  for (auto* sub : {solve, gradient, optimize, dump}) add_common(sub);
  gradient->add_flag("--check-gradient", options.check_gradient,
                     "Compare against central finite differences");
  dump->add_option("--node", node, "Node index i,j[,k]");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    options.out_dir = out_dir;
    if (!node.empty()) options.node = parse_node(node);
    const eikgame::RunConfig config = eikgame::load_run_config(config_path);
    if (*solve) return eikgame::cmd_solve(config, options);
    if (*gradient) return eikgame::cmd_gradient(config, options);
    if (*optimize) return eikgame::cmd_optimize(config, options);
    return eikgame::cmd_stencil_dump(config, options);
  } catch (const eikgame::ConfigError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  } catch (const eikgame::NumericalError& e) {
    std::fprintf(stderr, "numerical failure: %s\n", e.what());
    return 3;
  } catch (const std::invalid_argument& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "numerical failure: %s\n", e.what());
    return 3;
  }
}
