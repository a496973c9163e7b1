#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "edo/core.hpp"

namespace edo {

/// One epoch of the run: the population, its fitnesses, the search-space
/// state under which it was created and the mutation probability in effect.
struct GenerationRecord {
    int epoch = 0;
    std::vector<Individual> individuals;
    std::vector<Fitness> fitnesses;
    SubtypeLimits subtype_state;
    double p_m = 0.0;
};

/// Everything needed to re-run the experiment bit-identically.
struct RunManifest {
    nlohmann::json config;
    std::uint64_t seed = 0;
    nlohmann::json fitness;
    std::string engine_version;
    std::string stop_reason;
};

/// Archive access failure; `path` names the file or directory involved.
struct ArchiveError : std::runtime_error {
    std::filesystem::path path;
    ArchiveError(const std::string& message, std::filesystem::path p)
        : std::runtime_error(message), path(std::move(p)) {}
};

/// Writes root/epoch_<t>/ with individual_<i>.csv, individual_<i>.meta.json,
/// fitness.csv, subtypes.json and epoch.json. Each file is written to a
/// temporary name and renamed into place.
void write_generation(const std::filesystem::path& root, const GenerationRecord& record,
                      std::span<const FamilySpec> families);

/// Faithful reconstruction of an archived epoch. Missing directories or
/// files raise ArchiveError naming the missing path.
GenerationRecord load_generation(const std::filesystem::path& root, int epoch,
                                 std::span<const FamilySpec> families);

void write_manifest(const std::filesystem::path& root, const RunManifest& manifest);
RunManifest load_manifest(const std::filesystem::path& root);

/// Epoch indices present under the root, ascending.
std::vector<int> list_epochs(const std::filesystem::path& root);

/// Per-epoch digest. Fitness statistics cover finite values only; the
/// infinite count is reported separately. Representative indices order the
/// whole population by fitness (+inf last, ties by index).
struct SummaryRow {
    int epoch = 0;
    int n_individuals = 0;
    int n_infinite = 0;
    std::optional<double> best, q1, median, q3, worst;
    long min_rows = 0, median_rows = 0, max_rows = 0;
    long min_cols = 0, median_cols = 0, max_cols = 0;
    int best_index = 0, median_index = 0, worst_index = 0;
};

std::vector<SummaryRow> summarise(const std::filesystem::path& root);

/// Population order sorted by fitness (stable: +inf last, ties by index).
std::vector<std::size_t> fitness_order(std::span<const Fitness> fitnesses);

}  // namespace edo
