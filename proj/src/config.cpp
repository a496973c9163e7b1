#include "edo/config.hpp"

#include <fstream>

namespace edo {

namespace {

const nlohmann::json& require(const nlohmann::json& doc, const char* field) {
    const auto it = doc.find(field);
    if (it == doc.end()) throw ConfigError(std::string(field) + ": required field is missing");
    return *it;
}

long require_int(const nlohmann::json& doc, const char* field) {
    const auto& value = require(doc, field);
    if (!value.is_number_integer()) throw ConfigError(std::string(field) + ": expected an integer");
    return value.get<long>();
}

double require_number(const nlohmann::json& doc, const char* field) {
    const auto& value = require(doc, field);
    if (!value.is_number()) throw ConfigError(std::string(field) + ": expected a number");
    return value.get<double>();
}

std::pair<long, long> int_pair(const nlohmann::json& value, const std::string& field) {
    if (!value.is_array() || value.size() != 2 || !value[0].is_number_integer() ||
        !value[1].is_number_integer())
        throw ConfigError(field + ": expected [min, max] integers");
    return {value[0].get<long>(), value[1].get<long>()};
}

Interval interval(const nlohmann::json& value, const std::string& field) {
    if (!value.is_array() || value.size() != 2 || !value[0].is_number() || !value[1].is_number())
        throw ConfigError(field + ": expected [lower, upper] numbers");
    return {value[0].get<double>(), value[1].get<double>()};
}

}  // namespace

ExperimentConfig parse_experiment_config(const nlohmann::json& doc) {
    if (!doc.is_object()) throw ConfigError("config: expected a JSON object");
    ExperimentConfig config;
    auto& edo = config.edo;

    edo.seed = static_cast<std::uint64_t>(require_int(doc, "seed"));
    edo.population_size = static_cast<int>(require_int(doc, "population_size"));
    edo.max_iter = static_cast<int>(require_int(doc, "max_iter"));
    {
        const auto [lo, hi] = int_pair(require(doc, "row_limits"), "row_limits");
        edo.row_limits = {lo, hi};
    }

    const auto& families = require(doc, "families");
    if (!families.is_array() || families.empty())
        throw ConfigError("families: expected a non-empty array");
    bool any_per_family_bounds = false;
    std::vector<FamilyColumnLimits> per_family;
    for (std::size_t j = 0; j < families.size(); ++j) {
        const std::string field = "families[" + std::to_string(j) + "]";
        const auto& entry = families[j];
        if (!entry.is_object()) throw ConfigError(field + ": expected an object");

        FamilySpec spec;
        const auto name = require(entry, "family");
        if (!name.is_string()) throw ConfigError(field + ".family: expected a family name");
        spec.family = find_family(name.get<std::string>());
        if (!spec.family)
            throw ConfigError(field + ".family: unknown family '" + name.get<std::string>() +
                              "' (known: uniform, normal)");
        for (std::size_t k = 0; k < j; ++k)
            if (edo.families[k].family == spec.family)
                throw ConfigError(field + ".family: duplicate family '" + spec.family->name +
                                  "' (subtypes already evolve independently within one family)");

        const auto& limits = require(entry, "limits");
        for (const auto& param : spec.family->parameters) {
            const auto it = limits.find(param);
            if (it == limits.end())
                throw ConfigError(field + ".limits." + param + ": required interval is missing");
            spec.initial_limits.push_back(interval(*it, field + ".limits." + param));
        }
        spec.max_subtypes = entry.contains("max_subtypes")
                                ? static_cast<int>(entry.at("max_subtypes").get<long>())
                                : 1;
        edo.families.push_back(std::move(spec));
        edo.weights.push_back(entry.contains("weight") ? entry.at("weight").get<double>() : 1.0);

        FamilyColumnLimits bounds;
        if (entry.contains("columns")) {
            any_per_family_bounds = true;
            const auto& value = entry.at("columns");
            if (!value.is_array() || value.size() != 2 || !value[0].is_number_integer())
                throw ConfigError(field + ".columns: expected [min, max] with max an integer or null");
            bounds.min = value[0].get<long>();
            if (!value[1].is_null()) bounds.max = value[1].get<long>();
        }
        per_family.push_back(bounds);
    }
    if (any_per_family_bounds) edo.col_limits.per_family = per_family;

    if (doc.contains("col_limits")) {
        const auto [lo, hi] = int_pair(doc.at("col_limits"), "col_limits");
        edo.col_limits.min = lo;
        edo.col_limits.max = hi;
    } else {
        // Derive the aggregate from per-family bounds; they must be finite.
        if (!any_per_family_bounds)
            throw ConfigError("col_limits: required when families carry no per-family column bounds");
        long lo = 0, hi = 0;
        for (std::size_t j = 0; j < per_family.size(); ++j) {
            lo += per_family[j].min;
            if (!per_family[j].max)
                throw ConfigError("col_limits: required because families[" + std::to_string(j) +
                                  "].columns has no finite maximum");
            hi += *per_family[j].max;
        }
        edo.col_limits.min = std::max(lo, 1L);
        edo.col_limits.max = hi;
    }

    const auto& selection = require(doc, "selection");
    edo.best_prop = require_number(selection, "best");
    edo.lucky_prop = selection.contains("lucky") ? selection.at("lucky").get<double>() : 0.0;
    edo.mutation_prob = require_number(doc, "mutation_prob");
    if (doc.contains("shrink_factor") && !doc.at("shrink_factor").is_null())
        edo.shrink_factor = doc.at("shrink_factor").get<double>();

    const auto& fitness = require(doc, "fitness");
    const auto fitness_name = require(fitness, "name");
    if (!fitness_name.is_string()) throw ConfigError("fitness.name: expected a string");
    config.fitness.name = fitness_name.get<std::string>();
    if (fitness.contains("k")) config.fitness.k = static_cast<int>(fitness.at("k").get<long>());
    if (fitness.contains("eps")) config.fitness.eps = fitness.at("eps").get<double>();
    if (fitness.contains("min_points"))
        config.fitness.min_points = static_cast<int>(fitness.at("min_points").get<long>());
    if (fitness.contains("seed"))
        config.fitness.seed = static_cast<std::uint64_t>(fitness.at("seed").get<long>());

    if (doc.contains("hooks")) {
        const auto& hooks = doc.at("hooks");
        if (hooks.contains("stop_no_improvement")) {
            config.stop_no_improvement = static_cast<int>(hooks.at("stop_no_improvement").get<long>());
            edo.stopping = stop_after_no_improvement(*config.stop_no_improvement);
        }
        if (hooks.contains("pm_decay")) {
            config.pm_decay = hooks.at("pm_decay").get<double>();
            edo.adjust_pm = multiplicative_pm_decay(*config.pm_decay);
        }
    }

    if (doc.contains("output")) {
        const auto& output = doc.at("output");
        if (output.contains("root")) config.root = output.at("root").get<std::string>();
        if (output.contains("retention_every"))
            config.retention_every = static_cast<int>(output.at("retention_every").get<long>());
    }
    if (config.retention_every < 1) throw ConfigError("output.retention_every: must be >= 1");

    edo.validate();
    make_fitness(config.fitness);  // validates the fitness selector
    return config;
}

ExperimentConfig load_experiment_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("config: cannot read " + path.string());
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(in);
    } catch (const nlohmann::json::parse_error& e) {
        throw ConfigError("config: " + path.string() + " is not valid JSON: " + e.what());
    }
    return parse_experiment_config(doc);
}

nlohmann::json ExperimentConfig::resolved() const {
    nlohmann::json families = nlohmann::json::array();
    for (std::size_t j = 0; j < edo.families.size(); ++j) {
        const auto& spec = edo.families[j];
        nlohmann::json limits;
        for (std::size_t p = 0; p < spec.family->parameters.size(); ++p)
            limits[spec.family->parameters[p]] = {spec.initial_limits[p].lower,
                                                  spec.initial_limits[p].upper};
        nlohmann::json entry = {{"family", spec.family->name},
                                {"limits", limits},
                                {"max_subtypes", spec.max_subtypes},
                                {"weight", edo.weights[j]}};
        if (!edo.col_limits.per_family.empty()) {
            const auto& bounds = edo.col_limits.per_family[j];
            entry["columns"] = {bounds.min,
                                bounds.max ? nlohmann::json(*bounds.max) : nlohmann::json(nullptr)};
        }
        families.push_back(std::move(entry));
    }

    nlohmann::json fitness_doc = {{"name", fitness.name}, {"seed", fitness.seed}, {"k", fitness.k}};
    if (fitness.name == "kmeans-vs-dbscan" || fitness.name == "dbscan-vs-kmeans") {
        fitness_doc["eps"] = fitness.eps;
        fitness_doc["min_points"] = fitness.min_points;
    }

    nlohmann::json doc = {{"seed", edo.seed},
                          {"population_size", edo.population_size},
                          {"max_iter", edo.max_iter},
                          {"row_limits", {edo.row_limits.min, edo.row_limits.max}},
                          {"col_limits", {edo.col_limits.min, edo.col_limits.max}},
                          {"families", families},
                          {"selection", {{"best", edo.best_prop}, {"lucky", edo.lucky_prop}}},
                          {"mutation_prob", edo.mutation_prob},
                          {"fitness", fitness_doc},
                          // The output root is deliberately not part of the
                          // snapshot: archives must be byte-identical wherever
                          // they are written.
                          {"output", {{"retention_every", retention_every}}}};
    if (edo.shrink_factor) doc["shrink_factor"] = *edo.shrink_factor;
    nlohmann::json hooks = nlohmann::json::object();
    if (stop_no_improvement) hooks["stop_no_improvement"] = *stop_no_improvement;
    if (pm_decay) hooks["pm_decay"] = *pm_decay;
    if (!hooks.empty()) doc["hooks"] = hooks;
    return doc;
}

}  // namespace edo
