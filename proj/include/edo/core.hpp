#pragma once

#include <functional>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "edo/distributions.hpp"
#include "edo/util.hpp"

namespace edo {

/// Column-major rectangular matrix of reals.
struct Dataset {
    std::vector<std::vector<double>> columns;

    std::size_t n_cols() const { return columns.size(); }
    std::size_t n_rows() const { return columns.empty() ? 0 : columns.front().size(); }

    double& at(std::size_t row, std::size_t col) { return columns[col][row]; }
    double at(std::size_t row, std::size_t col) const { return columns[col][row]; }

    /// Row `i` as a point (one coordinate per column).
    std::vector<double> row(std::size_t i) const;

    bool rectangular() const;
    bool operator==(const Dataset&) const = default;
};

/// A candidate solution: a dataset plus, per column, the distribution
/// instance that filled (and extends) it.
struct Individual {
    Dataset dataset;
    std::vector<DistributionInstance> metadata;

    bool operator==(const Individual&) const = default;
};

struct RowLimits {
    long min = 1;
    long max = 1;

    void validate() const;
};

/// Per-family column bounds; an absent max means unbounded above.
struct FamilyColumnLimits {
    long min = 0;
    std::optional<long> max;
};

/// Aggregate column bounds plus optional per-family bounds. The aggregate
/// max must be finite even when per-family maxima are unbounded.
struct ColumnLimits {
    long min = 1;
    long max = 1;
    std::vector<FamilyColumnLimits> per_family;  // empty = unconstrained

    /// Feasible aggregate range once per-family bounds are folded in.
    long feasible_min() const;
    long feasible_max() const;
    void validate(std::size_t n_families) const;
};

/// Extended-real fitness under minimisation; +inf is the worst value.
struct Fitness {
    double value = std::numeric_limits<double>::infinity();

    bool finite() const { return std::isfinite(value); }
    bool operator==(const Fitness&) const = default;
    friend bool operator<(Fitness a, Fitness b) { return a.value < b.value; }
    friend bool operator>(Fitness a, Fitness b) { return b < a; }
    friend bool operator<=(Fitness a, Fitness b) { return !(b < a); }
    friend bool operator>=(Fitness a, Fitness b) { return !(a < b); }
};

inline Fitness infinite_fitness() { return Fitness{std::numeric_limits<double>::infinity()}; }

using FitnessFn = std::function<Fitness(const Individual&)>;

/// n_rows independent draws from the instance.
std::vector<double> fill_column(const DistributionInstance& instance,
                                std::span<const FamilySpec> families, std::size_t n_rows, Rng& rng);

/// Algorithm: sample a shape within the limits, then per column choose a
/// family (weighted, per-family minima first, maxima by rejection), assign a
/// subtype, instantiate a distribution and fill the column from it.
Individual create_individual(const RowLimits& row_limits, const ColumnLimits& col_limits,
                             std::span<const FamilySpec> families, std::span<const double> weights,
                             SubtypeRegistry& registry, Rng& rng);

// --- serialisation ---------------------------------------------------------

/// CSV with header "c0,c1,..."; values as shortest round-trip decimals.
std::string dataset_to_csv(const Dataset& dataset);
Dataset dataset_from_csv(std::string_view csv);

/// One JSON document per individual: per column {family, subtype_id,
/// parameters}.
nlohmann::json metadata_to_json(const Individual& individual, std::span<const FamilySpec> families);
std::vector<DistributionInstance> metadata_from_json(const nlohmann::json& doc,
                                                     std::span<const FamilySpec> families);

}  // namespace edo
