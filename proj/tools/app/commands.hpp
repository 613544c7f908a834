#pragma once

#include "config.hpp"

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace drift_cli {

namespace fs = std::filesystem;

// Process exit codes.
inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitSolver = 3;
inline constexpr int kExitDivergence = 4;
inline constexpr int kExitDegenerate = 5;

/// Exit code for the exception currently being handled.
int exit_code_for_current_exception(std::string* message = nullptr);

struct CommonOptions {
    fs::path out = "out";
    bool quiet = false;
};

struct InvertOptions {
    fs::path data;
};

struct ExperimentOptions {
    std::string name;  // smooth | piecewise | character
    std::vector<std::uint64_t> seeds{1};
    bool noise_only = false;
};

/// Noise levels of the experiment pipelines, noise-free first.
struct NoiseLevel {
    double delta;
    const char* label;
};
const std::vector<NoiseLevel>& experiment_levels();

std::vector<std::uint64_t> parse_seed_list(const std::string& text);

/// Worker count for fan-out: DRIFT_RECOVER_THREADS when set, else the
/// hardware concurrency.
unsigned thread_budget();

int cmd_generate_data(const RunConfig& cfg, const CommonOptions& common);
int cmd_invert(const RunConfig& cfg, const InvertOptions& opts, const CommonOptions& common);
int cmd_mms(const RunConfig& cfg, const CommonOptions& common);
int cmd_experiment(RunConfig cfg, const ExperimentOptions& opts, const CommonOptions& common);

/// Re-runs the command recorded in a manifest, writing into common.out.
int cmd_replay(const fs::path& manifest, const CommonOptions& common);

}  // namespace drift_cli
