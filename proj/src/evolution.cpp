#include "edo/evolution.hpp"

#include <algorithm>
#include <atomic>
#include <mutex>
#include <numeric>
#include <set>
#include <thread>

namespace edo {

void EdoConfig::validate() const {
    if (population_size < 1) throw ConfigError("population_size: must be >= 1");
    if (max_iter < 0) throw ConfigError("max_iter: must be >= 0");
    row_limits.validate();
    if (families.empty()) throw ConfigError("families: at least one distribution family is required");
    for (const auto& spec : families) spec.validate();
    col_limits.validate(families.size());
    if (weights.size() != families.size())
        throw ConfigError("weights: expected one entry per family (" + std::to_string(families.size()) +
                          "), got " + std::to_string(weights.size()));
    double total = 0.0;
    for (const double w : weights) {
        if (w < 0.0) throw ConfigError("weights: entries must be non-negative");
        total += w;
    }
    if (total <= 0.0) throw ConfigError("weights: must sum to a positive value");
    if (!(best_prop > 0.0 && best_prop <= 1.0)) throw ConfigError("best_prop: must lie in (0, 1]");
    if (!(lucky_prop >= 0.0 && lucky_prop <= 1.0)) throw ConfigError("lucky_prop: must lie in [0, 1]");
    const long n_best = ceil_count(best_prop * population_size);
    const long n_lucky = ceil_count(lucky_prop * population_size);
    if (n_best + n_lucky > population_size)
        throw ConfigError("best_prop/lucky_prop: ceil(b*N) + ceil(l*N) exceeds the population size");
    if (!(mutation_prob >= 0.0 && mutation_prob <= 1.0))
        throw ConfigError("mutation_prob: must lie in [0, 1]");
    if (shrink_factor && !(*shrink_factor >= 0.0 && *shrink_factor <= 1.0))
        throw ConfigError("shrink_factor: must lie in [0, 1]");

    // Families the weight vector can actually draw must offer enough column
    // headroom for every feasible column count.
    long reachable = 0;
    bool unbounded = false;
    for (std::size_t j = 0; j < families.size(); ++j) {
        if (weights[j] > 0.0) {
            if (col_limits.per_family.empty() || !col_limits.per_family[j].max)
                unbounded = true;
            else
                reachable += *col_limits.per_family[j].max;
        } else if (!col_limits.per_family.empty()) {
            reachable += col_limits.per_family[j].min;
        }
    }
    if (!unbounded && col_limits.feasible_min() > std::min(col_limits.max, reachable))
        throw ConfigError("weights/col_limits: zero-weight families leave too few reachable columns");
}

std::vector<std::size_t> select_parent_indices(std::span<const Fitness> fitnesses, double best_prop,
                                               double lucky_prop, Rng& rng) {
    const std::size_t n = fitnesses.size();
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return fitnesses[a] < fitnesses[b]; });

    const std::size_t n_best =
        std::min<std::size_t>(static_cast<std::size_t>(ceil_count(best_prop * static_cast<double>(n))), n);
    std::vector<std::size_t> parents(order.begin(), order.begin() + n_best);

    std::size_t n_lucky =
        static_cast<std::size_t>(ceil_count(lucky_prop * static_cast<double>(n)));
    std::vector<std::size_t> remainder(order.begin() + n_best, order.end());
    n_lucky = std::min(n_lucky, remainder.size());
    for (std::size_t t = 0; t < n_lucky; ++t) {
        const std::size_t pick = uniform_index(rng, remainder.size());
        parents.push_back(remainder[pick]);
        remainder.erase(remainder.begin() + static_cast<long>(pick));
    }
    return parents;
}

void prune_subtypes(std::span<const Individual> parents, std::size_t n_families,
                    SubtypeRegistry& registry) {
    std::vector<std::set<int>> referenced(n_families);
    for (const auto& parent : parents)
        for (const auto& instance : parent.metadata)
            referenced[instance.family_index].insert(instance.subtype_id);
    for (std::size_t f = 0; f < n_families; ++f) {
        const std::vector<int> keep(referenced[f].begin(), referenced[f].end());
        registry.retire_except(static_cast<int>(f), keep);
    }
}

void shrink_search_space(std::span<const Individual> parents, std::span<const FamilySpec> families,
                         double shrink_factor, int iteration, SubtypeRegistry& registry) {
    const SubtypeLimits state = registry.snapshot();
    for (std::size_t f = 0; f < families.size(); ++f) {
        const std::size_t n_params = families[f].family->parameters.size();
        for (const auto& [subtype_id, _] : state[f]) {
            for (std::size_t p = 0; p < n_params; ++p) {
                std::vector<double> observed;
                for (const auto& parent : parents)
                    for (const auto& instance : parent.metadata)
                        if (instance.family_index == static_cast<int>(f) &&
                            instance.subtype_id == subtype_id)
                            observed.push_back(instance.parameter_values[p]);
                registry.shrink_parameter(static_cast<int>(f), subtype_id, p, observed, shrink_factor,
                                          iteration);
            }
        }
    }
}

Individual crossover(const Individual& parent_a, const Individual& parent_b,
                     std::span<const FamilySpec> families, Rng& rng) {
    const std::size_t n_rows =
        (uniform_index(rng, 2) == 0 ? parent_a : parent_b).dataset.n_rows();
    const std::size_t n_cols =
        (uniform_index(rng, 2) == 0 ? parent_a : parent_b).dataset.n_cols();

    const std::size_t pool_size = parent_a.dataset.n_cols() + parent_b.dataset.n_cols();
    auto pooled = [&](std::size_t index) -> std::pair<const std::vector<double>*, const DistributionInstance*> {
        if (index < parent_a.dataset.n_cols())
            return {&parent_a.dataset.columns[index], &parent_a.metadata[index]};
        index -= parent_a.dataset.n_cols();
        return {&parent_b.dataset.columns[index], &parent_b.metadata[index]};
    };

    // Partial Fisher-Yates: the first n_cols entries become a uniform draw
    // without replacement from the pool.
    std::vector<std::size_t> pool(pool_size);
    std::iota(pool.begin(), pool.end(), 0);

    Individual child;
    child.dataset.columns.reserve(n_cols);
    child.metadata.reserve(n_cols);
    for (std::size_t c = 0; c < n_cols; ++c) {
        const std::size_t swap_with = c + uniform_index(rng, pool_size - c);
        std::swap(pool[c], pool[swap_with]);
        const auto [column_ptr, instance_ptr] = pooled(pool[c]);
        std::vector<double> column = *column_ptr;
        DistributionInstance instance = *instance_ptr;
        while (column.size() > n_rows)
            column.erase(column.begin() + static_cast<long>(uniform_index(rng, column.size())));
        while (column.size() < n_rows) column.push_back(sample_value(instance, families, rng));
        child.dataset.columns.push_back(std::move(column));
        child.metadata.push_back(std::move(instance));
    }
    return child;
}

Individual mutate(Individual individual, double p_m, const RowLimits& row_limits,
                  const ColumnLimits& col_limits, std::span<const FamilySpec> families,
                  std::span<const double> weights, SubtypeRegistry& registry, Rng& rng) {
    auto& dataset = individual.dataset;
    auto& metadata = individual.metadata;
    auto draw = [&] { return uniform_real(rng, 0.0, 1.0); };

    std::vector<long> counts(families.size(), 0);
    for (const auto& instance : metadata) ++counts[instance.family_index];

    // 1. append a row sampled from the column metadata
    if (draw() < p_m && static_cast<long>(dataset.n_rows()) + 1 <= row_limits.max) {
        for (std::size_t c = 0; c < dataset.n_cols(); ++c)
            dataset.columns[c].push_back(sample_value(metadata[c], families, rng));
    }

    // 2. delete a uniformly chosen row
    if (draw() < p_m && static_cast<long>(dataset.n_rows()) - 1 >= row_limits.min) {
        const std::size_t row = uniform_index(rng, dataset.n_rows());
        for (auto& column : dataset.columns) column.erase(column.begin() + static_cast<long>(row));
    }

    // 3. append a freshly created column
    {
        const double r = draw();
        std::vector<bool> eligible(families.size());
        bool any = false;
        for (std::size_t j = 0; j < families.size(); ++j) {
            const bool headroom = col_limits.per_family.empty() || !col_limits.per_family[j].max ||
                                  counts[j] < *col_limits.per_family[j].max;
            eligible[j] = headroom && weights[j] > 0.0;
            any = any || eligible[j];
        }
        if (r < p_m && static_cast<long>(dataset.n_cols()) + 1 <= col_limits.max && any) {
            const int j = choose_family(families.size(), weights, rng, &eligible);
            const int subtype = registry.assign_subtype(j, families[j], rng);
            DistributionInstance instance = new_instance(j, subtype, registry, rng);
            dataset.columns.push_back(fill_column(instance, families, dataset.n_rows(), rng));
            metadata.push_back(std::move(instance));
            ++counts[j];
        }
    }

    // 4. delete a uniformly chosen column (among those whose removal keeps
    //    every per-family minimum satisfied)
    {
        const double r = draw();
        if (r < p_m && static_cast<long>(dataset.n_cols()) - 1 >= col_limits.min) {
            std::vector<std::size_t> removable;
            for (std::size_t c = 0; c < dataset.n_cols(); ++c) {
                const int j = metadata[c].family_index;
                if (col_limits.per_family.empty() || counts[j] - 1 >= col_limits.per_family[j].min)
                    removable.push_back(c);
            }
            if (!removable.empty()) {
                const std::size_t c = removable[uniform_index(rng, removable.size())];
                --counts[metadata[c].family_index];
                dataset.columns.erase(dataset.columns.begin() + static_cast<long>(c));
                metadata.erase(metadata.begin() + static_cast<long>(c));
            }
        }
    }

    // 5. resample individual distribution parameters within the subtype's
    //    current limits
    for (auto& instance : metadata) {
        const auto& limits = registry.limits(instance.family_index, instance.subtype_id);
        for (std::size_t p = 0; p < instance.parameter_values.size(); ++p)
            if (draw() < p_m)
                instance.parameter_values[p] = uniform_real(rng, limits[p].lower, limits[p].upper);
    }

    // 6. resample individual entries from the (possibly updated) column
    //    instance
    for (std::size_t c = 0; c < dataset.n_cols(); ++c)
        for (std::size_t i = 0; i < dataset.n_rows(); ++i)
            if (draw() < p_m) dataset.columns[c][i] = sample_value(metadata[c], families, rng);

    return individual;
}

Population create_new_population(std::span<const Individual> parents, const EdoConfig& config,
                                 double p_m, SubtypeRegistry& registry, Rng& rng) {
    Population population;
    population.individuals.assign(parents.begin(), parents.end());
    population.individuals.reserve(config.population_size);
    while (population.individuals.size() < static_cast<std::size_t>(config.population_size)) {
        const Individual& a = parents[uniform_index(rng, parents.size())];
        const Individual& b = parents[uniform_index(rng, parents.size())];
        Individual child = crossover(a, b, config.families, rng);
        child = mutate(std::move(child), p_m, config.row_limits, config.col_limits, config.families,
                       config.weights, registry, rng);
        population.individuals.push_back(std::move(child));
    }
    population.fitnesses.assign(population.individuals.size(), infinite_fitness());
    return population;
}

void evaluate_population(Population& population, const FitnessFn& fitness, int workers) {
    const std::size_t n = population.individuals.size();
    population.fitnesses.assign(n, infinite_fitness());
    if (workers <= 1) {
        for (std::size_t i = 0; i < n; ++i)
            population.fitnesses[i] = fitness(population.individuals[i]);
        return;
    }

    std::atomic<std::size_t> next{0};
    std::exception_ptr error;
    std::mutex error_mutex;
    const std::size_t n_threads = std::min<std::size_t>(static_cast<std::size_t>(workers), n);
    std::vector<std::thread> threads;
    threads.reserve(n_threads);
    for (std::size_t t = 0; t < n_threads; ++t)
        threads.emplace_back([&] {
            while (true) {
                const std::size_t i = next.fetch_add(1);
                if (i >= n) return;
                try {
                    population.fitnesses[i] = fitness(population.individuals[i]);
                } catch (...) {
                    const std::lock_guard lock(error_mutex);
                    if (!error) error = std::current_exception();
                }
            }
        });
    for (auto& thread : threads) thread.join();
    if (error) std::rethrow_exception(error);
}

History run(const EdoConfig& config, const FitnessFn& fitness, const RunOptions& options) {
    config.validate();
    if (!fitness) throw ConfigError("fitness: a fitness function is required");

    Rng rng(config.seed);
    SubtypeRegistry registry(config.families.size());
    History history;
    double p_m = config.mutation_prob;

    auto record = [&](int epoch, const Population& population) {
        history.records.push_back(
            {epoch, population.individuals, population.fitnesses, registry.snapshot(), p_m});
        if (options.on_generation) options.on_generation(history.records.back());
    };
    auto evaluate = [&](Population& population) {
        try {
            evaluate_population(population, fitness, options.workers);
        } catch (const std::exception& e) {
            history.stop_reason = std::string("error: ") + e.what();
            throw RunError(e.what(), std::move(history));
        }
    };

    Population population;
    population.individuals.reserve(config.population_size);
    for (int i = 0; i < config.population_size; ++i)
        population.individuals.push_back(create_individual(config.row_limits, config.col_limits,
                                                           config.families, config.weights, registry,
                                                           rng));
    evaluate(population);
    record(0, population);

    history.stop_reason = "max_iter reached";
    for (int t = 1; t <= config.max_iter; ++t) {
        if (config.stopping && config.stopping(history.records)) {
            history.stop_reason = "stopping condition met after epoch " + std::to_string(t - 1);
            break;
        }
        const auto parent_indices =
            select_parent_indices(population.fitnesses, config.best_prop, config.lucky_prop, rng);
        std::vector<Individual> parents;
        parents.reserve(parent_indices.size());
        for (const std::size_t index : parent_indices) parents.push_back(population.individuals[index]);

        prune_subtypes(parents, config.families.size(), registry);
        if (config.shrink_factor)
            shrink_search_space(parents, config.families, *config.shrink_factor, t, registry);

        population = create_new_population(parents, config, p_m, registry, rng);
        evaluate(population);
        record(t, population);

        if (config.adjust_pm)
            p_m = std::clamp(config.adjust_pm(t, history.records, p_m), 0.0, 1.0);
    }
    return history;
}

StoppingHook stop_after_no_improvement(int epochs) {
    if (epochs < 1) throw ConfigError("stop_no_improvement: epoch window must be >= 1");
    return [epochs](const std::vector<GenerationRecord>& records) {
        if (records.size() <= static_cast<std::size_t>(epochs)) return false;
        auto best_of = [](const GenerationRecord& record) {
            return *std::min_element(record.fitnesses.begin(), record.fitnesses.end());
        };
        const Fitness reference = best_of(records[records.size() - 1 - epochs]);
        for (std::size_t i = records.size() - epochs; i < records.size(); ++i)
            if (best_of(records[i]) < reference) return false;
        return true;
    };
}

PmHook multiplicative_pm_decay(double factor) {
    if (factor < 0.0 || factor > 1.0) throw ConfigError("pm_decay: factor must lie in [0, 1]");
    return [factor](int, const std::vector<GenerationRecord>&, double p_m) { return p_m * factor; };
}

}  // namespace edo
