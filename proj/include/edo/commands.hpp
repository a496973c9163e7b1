#pragma once

#include <filesystem>
#include <optional>
#include <string>

#include "edo/config.hpp"

namespace edo {

/// Exit codes shared by every subcommand.
inline constexpr int kExitOk = 0;
inline constexpr int kExitConfigError = 1;
inline constexpr int kExitRuntimeError = 2;

struct RunCommand {
    std::filesystem::path config_path;
    std::optional<std::filesystem::path> root;  // overrides config / EDO_ROOT
    std::optional<std::uint64_t> seed;          // overrides config seed
    int workers = 0;                            // 0 = number of cores
    bool dry_run = false;
};
int cmd_run(const RunCommand& command);

struct SummariseCommand {
    std::filesystem::path root;
    std::filesystem::path out_csv;
    int interval = 1;
};
int cmd_summarise(const SummariseCommand& command);

struct RepresentativesCommand {
    std::filesystem::path root;
    int epoch = 0;
    std::filesystem::path out_dir;
};
int cmd_representatives(const RepresentativesCommand& command);

struct CoverageCommand {
    std::filesystem::path root;
    std::filesystem::path out_csv;
    int interval = 50;
};
int cmd_coverage(const CoverageCommand& command);

/// --root > config output.root > $EDO_ROOT > "out".
std::filesystem::path resolve_root(const std::optional<std::filesystem::path>& flag,
                                   const std::filesystem::path& from_config = {});

}  // namespace edo
