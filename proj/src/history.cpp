#include "edo/history.hpp"

#include <algorithm>
#include <fstream>
#include <numeric>
#include <sstream>

namespace edo {

namespace fs = std::filesystem;

namespace {

void atomic_write(const fs::path& path, const std::string& contents) {
    const fs::path tmp = path.string() + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw ArchiveError("cannot open for writing: " + tmp.string(), tmp);
        out << contents;
        if (!out) throw ArchiveError("write failed: " + tmp.string(), tmp);
    }
    fs::rename(tmp, path);
}

std::string read_file(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ArchiveError("incomplete epoch: missing " + path.string(), path);
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return buffer.str();
}

fs::path epoch_dir(const fs::path& root, int epoch) {
    return root / ("epoch_" + std::to_string(epoch));
}

nlohmann::json subtypes_to_json(const SubtypeLimits& state, std::span<const FamilySpec> families) {
    nlohmann::json doc = nlohmann::json::object();
    for (std::size_t f = 0; f < families.size(); ++f) {
        nlohmann::json per_family = nlohmann::json::object();
        for (const auto& [id, limits] : state[f]) {
            nlohmann::json per_subtype = nlohmann::json::object();
            for (std::size_t p = 0; p < limits.size(); ++p)
                per_subtype[families[f].family->parameters[p]] = {limits[p].lower, limits[p].upper};
            per_family[std::to_string(id)] = std::move(per_subtype);
        }
        doc[families[f].family->name] = std::move(per_family);
    }
    return doc;
}

SubtypeLimits subtypes_from_json(const nlohmann::json& doc, std::span<const FamilySpec> families) {
    SubtypeLimits state(families.size());
    for (std::size_t f = 0; f < families.size(); ++f) {
        const auto it = doc.find(families[f].family->name);
        if (it == doc.end()) continue;
        for (const auto& [id_str, per_subtype] : it->items()) {
            std::vector<Interval> limits;
            for (const auto& param : families[f].family->parameters) {
                const auto& pair = per_subtype.at(param);
                limits.push_back({pair.at(0).get<double>(), pair.at(1).get<double>()});
            }
            state[f].emplace(std::stoi(id_str), std::move(limits));
        }
    }
    return state;
}

}  // namespace

void write_generation(const fs::path& root, const GenerationRecord& record,
                      std::span<const FamilySpec> families) {
    const fs::path dir = epoch_dir(root, record.epoch);
    fs::create_directories(dir);

    for (std::size_t i = 0; i < record.individuals.size(); ++i) {
        const auto& individual = record.individuals[i];
        atomic_write(dir / ("individual_" + std::to_string(i) + ".csv"),
                     dataset_to_csv(individual.dataset));
        atomic_write(dir / ("individual_" + std::to_string(i) + ".meta.json"),
                     metadata_to_json(individual, families).dump(2) + "\n");
    }

    std::string fitness_csv = "individual_index,fitness\n";
    for (std::size_t i = 0; i < record.fitnesses.size(); ++i)
        fitness_csv += std::to_string(i) + "," + format_double(record.fitnesses[i].value) + "\n";
    atomic_write(dir / "fitness.csv", fitness_csv);

    atomic_write(dir / "subtypes.json", subtypes_to_json(record.subtype_state, families).dump(2) + "\n");

    const nlohmann::json epoch_doc = {{"epoch", record.epoch},
                                      {"individuals", record.individuals.size()},
                                      {"p_m", record.p_m}};
    atomic_write(dir / "epoch.json", epoch_doc.dump(2) + "\n");
}

GenerationRecord load_generation(const fs::path& root, int epoch,
                                 std::span<const FamilySpec> families) {
    const fs::path dir = epoch_dir(root, epoch);
    if (!fs::is_directory(dir))
        throw ArchiveError("epoch " + std::to_string(epoch) + " not in archive: " + dir.string(), dir);

    GenerationRecord record;
    record.epoch = epoch;
    const auto epoch_doc = nlohmann::json::parse(read_file(dir / "epoch.json"));
    record.p_m = epoch_doc.at("p_m").get<double>();
    const std::size_t n = epoch_doc.at("individuals").get<std::size_t>();

    for (std::size_t i = 0; i < n; ++i) {
        Individual individual;
        individual.dataset =
            dataset_from_csv(read_file(dir / ("individual_" + std::to_string(i) + ".csv")));
        individual.metadata = metadata_from_json(
            nlohmann::json::parse(read_file(dir / ("individual_" + std::to_string(i) + ".meta.json"))),
            families);
        record.individuals.push_back(std::move(individual));
    }

    std::istringstream fitness_csv(read_file(dir / "fitness.csv"));
    std::string line;
    std::getline(fitness_csv, line);  // header
    while (std::getline(fitness_csv, line)) {
        const auto comma = line.find(',');
        record.fitnesses.push_back(Fitness{parse_double(line.substr(comma + 1))});
    }
    if (record.fitnesses.size() != n)
        throw ArchiveError("incomplete epoch: fitness.csv row count mismatch", dir / "fitness.csv");

    record.subtype_state =
        subtypes_from_json(nlohmann::json::parse(read_file(dir / "subtypes.json")), families);
    return record;
}

void write_manifest(const fs::path& root, const RunManifest& manifest) {
    fs::create_directories(root);
    const nlohmann::json doc = {{"config", manifest.config},
                                {"seed", manifest.seed},
                                {"fitness", manifest.fitness},
                                {"engine_version", manifest.engine_version},
                                {"stop_reason", manifest.stop_reason}};
    atomic_write(root / "manifest.json", doc.dump(2) + "\n");
}

RunManifest load_manifest(const fs::path& root) {
    const auto doc = nlohmann::json::parse(read_file(root / "manifest.json"));
    RunManifest manifest;
    manifest.config = doc.at("config");
    manifest.seed = doc.at("seed").get<std::uint64_t>();
    manifest.fitness = doc.at("fitness");
    manifest.engine_version = doc.at("engine_version").get<std::string>();
    manifest.stop_reason = doc.at("stop_reason").get<std::string>();
    return manifest;
}

std::vector<int> list_epochs(const fs::path& root) {
    std::vector<int> epochs;
    if (!fs::is_directory(root)) return epochs;
    for (const auto& entry : fs::directory_iterator(root)) {
        if (!entry.is_directory()) continue;
        const std::string name = entry.path().filename().string();
        if (name.rfind("epoch_", 0) != 0) continue;
        epochs.push_back(std::stoi(name.substr(6)));
    }
    std::sort(epochs.begin(), epochs.end());
    return epochs;
}

std::vector<std::size_t> fitness_order(std::span<const Fitness> fitnesses) {
    std::vector<std::size_t> order(fitnesses.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return fitnesses[a] < fitnesses[b]; });
    return order;
}

namespace {

double quantile(const std::vector<double>& sorted, double p) {
    // Linear interpolation between order statistics.
    const double h = (static_cast<double>(sorted.size()) - 1.0) * p;
    const std::size_t lo = static_cast<std::size_t>(h);
    if (lo + 1 >= sorted.size()) return sorted.back();
    const double frac = h - static_cast<double>(lo);
    return sorted[lo] + frac * (sorted[lo + 1] - sorted[lo]);
}

long long_median(std::vector<long>& values) {
    std::sort(values.begin(), values.end());
    return values[(values.size() - 1) / 2];
}

}  // namespace

std::vector<SummaryRow> summarise(const fs::path& root) {
    const auto epochs = list_epochs(root);
    if (epochs.empty()) throw ArchiveError("empty archive: " + root.string(), root);

    std::vector<SummaryRow> rows;
    for (const int epoch : epochs) {
        const fs::path dir = epoch_dir(root, epoch);
        SummaryRow row;
        row.epoch = epoch;

        std::vector<Fitness> fitnesses;
        std::istringstream fitness_csv(read_file(dir / "fitness.csv"));
        std::string line;
        std::getline(fitness_csv, line);
        while (std::getline(fitness_csv, line)) {
            const auto comma = line.find(',');
            fitnesses.push_back(Fitness{parse_double(line.substr(comma + 1))});
        }
        row.n_individuals = static_cast<int>(fitnesses.size());

        std::vector<double> finite;
        for (const auto& f : fitnesses)
            if (f.finite()) finite.push_back(f.value);
        row.n_infinite = row.n_individuals - static_cast<int>(finite.size());
        if (!finite.empty()) {
            std::sort(finite.begin(), finite.end());
            row.best = finite.front();
            row.q1 = quantile(finite, 0.25);
            row.median = quantile(finite, 0.5);
            row.q3 = quantile(finite, 0.75);
            row.worst = finite.back();
        }

        std::vector<long> n_rows, n_cols;
        for (int i = 0; i < row.n_individuals; ++i) {
            const Dataset dataset =
                dataset_from_csv(read_file(dir / ("individual_" + std::to_string(i) + ".csv")));
            n_rows.push_back(static_cast<long>(dataset.n_rows()));
            n_cols.push_back(static_cast<long>(dataset.n_cols()));
        }
        row.min_rows = *std::min_element(n_rows.begin(), n_rows.end());
        row.max_rows = *std::max_element(n_rows.begin(), n_rows.end());
        row.median_rows = long_median(n_rows);
        row.min_cols = *std::min_element(n_cols.begin(), n_cols.end());
        row.max_cols = *std::max_element(n_cols.begin(), n_cols.end());
        row.median_cols = long_median(n_cols);

        const auto order = fitness_order(fitnesses);
        row.best_index = static_cast<int>(order.front());
        row.median_index = static_cast<int>(order[(order.size() - 1) / 2]);
        row.worst_index = static_cast<int>(order.back());
        rows.push_back(row);
    }
    return rows;
}

}  // namespace edo
