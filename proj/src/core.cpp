#include "edo/core.hpp"

#include <algorithm>
#include <sstream>

#include <nlohmann/json.hpp>

namespace edo {

std::vector<double> Dataset::row(std::size_t i) const {
    std::vector<double> point;
    point.reserve(n_cols());
    for (const auto& column : columns) point.push_back(column[i]);
    return point;
}

bool Dataset::rectangular() const {
    return std::all_of(columns.begin(), columns.end(),
                       [this](const auto& c) { return c.size() == n_rows(); });
}

void RowLimits::validate() const {
    if (min < 1) throw ConfigError("row_limits: minimum must be >= 1");
    if (min > max) throw ConfigError("row_limits: minimum exceeds maximum");
}

long ColumnLimits::feasible_min() const {
    long sum = 0;
    for (const auto& fl : per_family) sum += fl.min;
    return std::max(min, sum);
}

long ColumnLimits::feasible_max() const {
    if (per_family.empty()) return max;
    long sum = 0;
    for (const auto& fl : per_family) {
        if (!fl.max) return max;  // some family unbounded: aggregate max rules
        sum += *fl.max;
    }
    return std::min(max, sum);
}

void ColumnLimits::validate(std::size_t n_families) const {
    if (min < 1) throw ConfigError("col_limits: minimum must be >= 1");
    if (min > max) throw ConfigError("col_limits: minimum exceeds maximum");
    if (!per_family.empty() && per_family.size() != n_families)
        throw ConfigError("col_limits: per-family bounds must cover every family");
    for (std::size_t j = 0; j < per_family.size(); ++j) {
        const auto& fl = per_family[j];
        if (fl.min < 0) throw ConfigError("col_limits: family " + std::to_string(j) + " minimum is negative");
        if (fl.max && *fl.max < fl.min)
            throw ConfigError("col_limits: family " + std::to_string(j) + " minimum exceeds maximum");
    }
    if (feasible_min() > feasible_max())
        throw ConfigError("col_limits: no column count satisfies both the aggregate and per-family bounds");
}

std::vector<double> fill_column(const DistributionInstance& instance,
                                std::span<const FamilySpec> families, std::size_t n_rows, Rng& rng) {
    if (n_rows == 0) throw std::invalid_argument("fill_column: n_rows must be >= 1");
    std::vector<double> column;
    column.reserve(n_rows);
    for (std::size_t i = 0; i < n_rows; ++i) column.push_back(sample_value(instance, families, rng));
    return column;
}

Individual create_individual(const RowLimits& row_limits, const ColumnLimits& col_limits,
                             std::span<const FamilySpec> families, std::span<const double> weights,
                             SubtypeRegistry& registry, Rng& rng) {
    const long n_rows = uniform_int(rng, row_limits.min, row_limits.max);
    const long n_cols = uniform_int(rng, col_limits.feasible_min(), col_limits.feasible_max());

    // Family per column: mandatory per-family minima first, the rest drawn
    // from the weight vector with rejection when a maximum would be exceeded.
    std::vector<int> column_families;
    std::vector<long> counts(families.size(), 0);
    for (std::size_t j = 0; j < col_limits.per_family.size(); ++j)
        for (long c = 0; c < col_limits.per_family[j].min; ++c) {
            column_families.push_back(static_cast<int>(j));
            ++counts[j];
        }
    auto at_max = [&](int j) {
        return !col_limits.per_family.empty() && col_limits.per_family[j].max &&
               counts[j] >= *col_limits.per_family[j].max;
    };
    int guard = 0;
    while (column_families.size() < static_cast<std::size_t>(n_cols)) {
        const int j = choose_family(families.size(), weights, rng);
        if (at_max(j)) {
            if (++guard > 100000)
                throw ConfigError("col_limits: could not draw a feasible family assignment "
                                  "(weights give no mass to families with headroom)");
            continue;
        }
        column_families.push_back(j);
        ++counts[j];
    }

    Individual individual;
    individual.dataset.columns.reserve(column_families.size());
    individual.metadata.reserve(column_families.size());
    for (const int j : column_families) {
        const int subtype = registry.assign_subtype(j, families[j], rng);
        DistributionInstance instance = new_instance(j, subtype, registry, rng);
        individual.dataset.columns.push_back(
            fill_column(instance, families, static_cast<std::size_t>(n_rows), rng));
        individual.metadata.push_back(std::move(instance));
    }
    return individual;
}

std::string dataset_to_csv(const Dataset& dataset) {
    std::string out;
    for (std::size_t j = 0; j < dataset.n_cols(); ++j) {
        if (j) out += ',';
        out += 'c';
        out += std::to_string(j);
    }
    out += '\n';
    for (std::size_t i = 0; i < dataset.n_rows(); ++i) {
        for (std::size_t j = 0; j < dataset.n_cols(); ++j) {
            if (j) out += ',';
            out += format_double(dataset.at(i, j));
        }
        out += '\n';
    }
    return out;
}

namespace {

std::vector<std::string_view> split(std::string_view line, char sep) {
    std::vector<std::string_view> parts;
    std::size_t start = 0;
    while (true) {
        const std::size_t pos = line.find(sep, start);
        parts.push_back(line.substr(start, pos - start));
        if (pos == std::string_view::npos) break;
        start = pos + 1;
    }
    return parts;
}

}  // namespace

Dataset dataset_from_csv(std::string_view csv) {
    std::vector<std::string_view> lines;
    std::size_t start = 0;
    while (start < csv.size()) {
        std::size_t pos = csv.find('\n', start);
        if (pos == std::string_view::npos) pos = csv.size();
        if (pos > start) lines.push_back(csv.substr(start, pos - start));
        start = pos + 1;
    }
    if (lines.empty()) throw std::runtime_error("dataset CSV: empty document");

    const std::size_t n_cols = split(lines[0], ',').size();
    Dataset dataset;
    dataset.columns.assign(n_cols, {});
    for (std::size_t i = 1; i < lines.size(); ++i) {
        const auto cells = split(lines[i], ',');
        if (cells.size() != n_cols)
            throw std::runtime_error("dataset CSV: ragged row " + std::to_string(i));
        for (std::size_t j = 0; j < n_cols; ++j) dataset.columns[j].push_back(parse_double(cells[j]));
    }
    if (dataset.n_rows() == 0) throw std::runtime_error("dataset CSV: no data rows");
    return dataset;
}

nlohmann::json metadata_to_json(const Individual& individual, std::span<const FamilySpec> families) {
    nlohmann::json columns = nlohmann::json::array();
    for (const auto& instance : individual.metadata) {
        const Family* family = families[instance.family_index].family;
        nlohmann::json params;
        for (std::size_t p = 0; p < family->parameters.size(); ++p)
            params[family->parameters[p]] = instance.parameter_values[p];
        columns.push_back({{"family", family->name},
                           {"subtype_id", instance.subtype_id},
                           {"parameters", params}});
    }
    return nlohmann::json{{"columns", columns}};
}

std::vector<DistributionInstance> metadata_from_json(const nlohmann::json& doc,
                                                     std::span<const FamilySpec> families) {
    std::vector<DistributionInstance> metadata;
    for (const auto& entry : doc.at("columns")) {
        const std::string name = entry.at("family").get<std::string>();
        int family_index = -1;
        for (std::size_t j = 0; j < families.size(); ++j)
            if (families[j].family->name == name) family_index = static_cast<int>(j);
        if (family_index < 0) throw std::runtime_error("metadata: unknown family '" + name + "'");
        DistributionInstance instance{family_index, entry.at("subtype_id").get<int>(), {}};
        const Family* family = families[family_index].family;
        for (const auto& param : family->parameters)
            instance.parameter_values.push_back(entry.at("parameters").at(param).get<double>());
        metadata.push_back(std::move(instance));
    }
    return metadata;
}

}  // namespace edo
