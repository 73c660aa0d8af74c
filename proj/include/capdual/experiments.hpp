#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "capdual/error.hpp"

namespace capdual {

/// Malformed or invalid experiment configuration.
class ConfigError : public Error {
public:
    using Error::Error;
};

struct ExperimentInfo {
    std::string name;
    std::string checks;  // the identity the experiment reproduces
    std::string schema;  // payload fields, one per line
};

/// Every experiment, in a fixed order.
const std::vector<ExperimentInfo>& experiment_catalog();

/// Human-readable listing of experiment_catalog().
std::string list_experiments();

/// "0.1.0+<git describe>".
std::string version_string();

/// Caps the OpenMP worker count (no-op when n <= 0).
void set_thread_cap(int n);

struct RunOptions {
    std::optional<std::filesystem::path> out_dir;  // overrides the config's "output"
    std::optional<std::uint64_t> seed;             // overrides the config's "seed"
};

struct RunResult {
    int exit_code = 1;  // 0 pass, 2 tolerance failure, 1 error
    bool pass = false;
    std::filesystem::path csv, summary;
};

/// Parses, validates and runs one experiment config, then writes <name>.csv and
/// <name>.summary.json. Throws ConfigError (with line/column for syntax errors or a
/// JSON path for schema errors) before any file is written.
RunResult run_experiment(const std::string& config_text, const RunOptions& opts,
                         const std::filesystem::path& config_dir = ".");

RunResult run_experiment_file(const std::filesystem::path& config, const RunOptions& opts);

}  // namespace capdual
