#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "latentforge/commands.hpp"
#include "latentforge/parallel.hpp"

int main(int argc, char** argv) {
  CLI::App app{"latentforge: latent-space image optimization test bench"};
  app.require_subcommand(1);

  std::string config_path;
  std::string out_dir;
  std::uint64_t seed = 0;
  bool seed_set = false;
  int threads = 0;

  const char* commands[] = {"optimize", "compose", "attack", "interpolate",
                            "bench"};
  const char* descriptions[] = {
      "top-k initialization plus over-parameterized score ascent",
      "composed generation with grid search and gradient-domain blending",
      "sign-gradient attack comparison of the plain and averaged scores",
      "render images along a line between two latent codes",
      "stagnation, bi-level oracle and k-ablation reference suites"};
  for (int i = 0; i < 5; ++i) {
    CLI::App* sub = app.add_subcommand(commands[i], descriptions[i]);
    sub->add_option("--config", config_path, "JSON config file");
    sub->add_option("--out", out_dir, "output directory (overrides config)");
    sub->add_option("--seed", seed, "global seed (overrides config)")
        ->each([&](const std::string&) { seed_set = true; });
    sub->add_option("--threads", threads,
                    "worker threads (default: LATENTFORGE_THREADS or 1)");
  }

  CLI11_PARSE(app, argc, argv);

  latentforge::RunConfig config;
  try {
    if (!config_path.empty())
      config = latentforge::parse_config_file(config_path);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  if (!out_dir.empty()) config.out = out_dir;
  if (seed_set) config.seed = seed;
  if (threads <= 0) threads = latentforge::default_thread_count();

  return latentforge::run_command(app.get_subcommands().front()->get_name(),
                                  config, threads);
}
