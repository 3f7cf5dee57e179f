#pragma once

#include "run_config.hpp"

namespace augclip::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitRuntime = 1;
inline constexpr int kExitUsage = 2;

// Checks input paths and required settings for the subcommand. Throws
// UsageError.
void validate_paths(const RunConfig& cfg);

int cmd_describe(const RunConfig& cfg);
int cmd_embed(const RunConfig& cfg);
int cmd_score(const RunConfig& cfg);
int cmd_evaluate(const RunConfig& cfg);
int cmd_ablate(const RunConfig& cfg);
int cmd_synth(const RunConfig& cfg);

int dispatch(const RunConfig& cfg);

}  // namespace augclip::cli
