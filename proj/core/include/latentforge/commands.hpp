#pragma once

#include <string>

#include "latentforge/config.hpp"

namespace latentforge {

// Batch entry points behind the CLI subcommands. Each validates its inputs
// before writing anything, writes all artifacts into config.out and returns
// 0 on success. run_bench additionally returns nonzero when any benchmark
// property fails.
int run_optimize(const RunConfig& config, int threads);
int run_compose(const RunConfig& config, int threads);
int run_attack(const RunConfig& config, int threads);
int run_interpolate(const RunConfig& config, int threads);
int run_bench(const RunConfig& config, int threads);

/// Dispatch by subcommand name; exceptions become an error message on stderr
/// and a nonzero status.
int run_command(const std::string& name, const RunConfig& config, int threads);

}  // namespace latentforge
