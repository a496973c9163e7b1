#pragma once

#include <functional>
#include <optional>

#include "edo/history.hpp"

namespace edo {

/// Stops the run when it returns true for the history recorded so far.
using StoppingHook = std::function<bool(const std::vector<GenerationRecord>&)>;

/// Maps (epoch, history, current p_m) to the p_m for the next epoch.
using PmHook = std::function<double(int, const std::vector<GenerationRecord>&, double)>;

struct EdoConfig {
    int population_size = 100;  // N
    int max_iter = 100;         // M
    RowLimits row_limits;
    ColumnLimits col_limits;
    std::vector<FamilySpec> families;
    std::vector<double> weights;
    double best_prop = 0.2;       // b, truncation proportion
    double lucky_prop = 0.0;      // l
    double mutation_prob = 0.01;  // p_m
    std::optional<double> shrink_factor;
    std::uint64_t seed = 0;
    StoppingHook stopping;
    PmHook adjust_pm;

    void validate() const;
};

struct Population {
    std::vector<Individual> individuals;
    std::vector<Fitness> fitnesses;
};

struct History {
    std::vector<GenerationRecord> records;
    std::string stop_reason;
};

/// A fitness evaluation failed mid-run; carries the history recorded so far.
struct RunError : std::runtime_error {
    History partial;
    RunError(const std::string& message, History history)
        : std::runtime_error(message), partial(std::move(history)) {}
};

/// Truncation selection plus lucky picks: the ceil(b*N) fittest (stable sort,
/// ties by index), then ceil(l*N) drawn uniformly without replacement from
/// the remainder. Best block first.
std::vector<std::size_t> select_parent_indices(std::span<const Fitness> fitnesses, double best_prop,
                                               double lucky_prop, Rng& rng);

/// Retire every subtype not referenced by a parent column.
void prune_subtypes(std::span<const Individual> parents, std::size_t n_families,
                    SubtypeRegistry& registry);

/// Apply the shrinkage power law to every live subtype using the parameter
/// values observed on the parents' columns.
void shrink_search_space(std::span<const Individual> parents, std::span<const FamilySpec> families,
                         double shrink_factor, int iteration, SubtypeRegistry& registry);

/// Uniform crossover over datasets: each dimension drawn from the two
/// parents, each column drawn without replacement from the pooled parent
/// columns, then resized to fit (uniform entry deletion / metadata-sampled
/// extension).
Individual crossover(const Individual& parent_a, const Individual& parent_b,
                     std::span<const FamilySpec> families, Rng& rng);

/// The six-stage mutation pass: row append, row delete, column append,
/// column delete, per-parameter resample, per-entry resample. Each stage
/// fires with probability p_m and only when the shape limits allow it.
Individual mutate(Individual individual, double p_m, const RowLimits& row_limits,
                  const ColumnLimits& col_limits, std::span<const FamilySpec> families,
                  std::span<const double> weights, SubtypeRegistry& registry, Rng& rng);

/// Parents carried in unchanged (elitism), the remaining slots filled with
/// mutated crossovers of parent pairs sampled uniformly with replacement.
Population create_new_population(std::span<const Individual> parents, const EdoConfig& config,
                                 double p_m, SubtypeRegistry& registry, Rng& rng);

/// Fill in pop.fitnesses, optionally across worker threads. The fitness
/// function must be pure; results are identical for any worker count.
void evaluate_population(Population& population, const FitnessFn& fitness, int workers);

struct RunOptions {
    int workers = 1;
    /// Called after each epoch is recorded (used to stream the archive).
    std::function<void(const GenerationRecord&)> on_generation;
};

/// The main loop: initial population, then up to max_iter epochs of
/// select -> prune -> shrink -> repopulate -> evaluate -> record.
History run(const EdoConfig& config, const FitnessFn& fitness, const RunOptions& options = {});

/// Reference stopping hook: no strict improvement of the best fitness in the
/// last `epochs` epochs.
StoppingHook stop_after_no_improvement(int epochs);

/// Reference p_m hook: multiply by `factor` each epoch.
PmHook multiplicative_pm_decay(double factor);

}  // namespace edo
