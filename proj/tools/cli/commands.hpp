#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "cli/config.hpp"

namespace fsre::cli {

// Exit codes shared by every command.
inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitBackend = 3;
inline constexpr int kExitData = 4;

// Each command writes under cfg.output_dir and records itself in manifest.json.
int cmd_synth(const ExperimentConfig& cfg, std::ostream& out);
int cmd_sample(const ExperimentConfig& cfg, std::ostream& out);
int cmd_icl(const ExperimentConfig& cfg, std::ostream& out);
int cmd_generate(const ExperimentConfig& cfg, std::ostream& out);
int cmd_sweep(const ExperimentConfig& cfg, std::ostream& out);
int cmd_report(const ExperimentConfig& cfg, std::ostream& out);

// Full command line (without argv[0]); maps fsre::Error kinds to exit codes.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace fsre::cli
