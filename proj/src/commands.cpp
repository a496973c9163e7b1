#include "edo/commands.hpp"

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <set>
#include <thread>

#include "edo/geometry.hpp"
#include "edo/version.hpp"

namespace edo {

namespace fs = std::filesystem;

fs::path resolve_root(const std::optional<fs::path>& flag, const fs::path& from_config) {
    if (flag) return *flag;
    if (!from_config.empty()) return from_config;
    if (const char* env = std::getenv("EDO_ROOT"); env && *env) return fs::path(env);
    return fs::path("out");
}

namespace {

std::string fitness_cell(const Fitness& fitness) { return format_double(fitness.value); }

std::string optional_cell(const std::optional<double>& value) {
    return value ? format_double(*value) : std::string();
}

/// Keep epoch 0, every interval-th epoch and the final epoch.
std::vector<int> sample_epochs(const std::vector<int>& epochs, int interval) {
    std::vector<int> sampled;
    for (const int e : epochs)
        if (e % interval == 0 || e == epochs.back()) sampled.push_back(e);
    return sampled;
}

}  // namespace

int cmd_run(const RunCommand& command) {
    ExperimentConfig config;
    try {
        config = load_experiment_config(command.config_path);
        if (command.seed) config.edo.seed = *command.seed;
        config.root = resolve_root(command.root, config.root);
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitConfigError;
    }

    if (command.dry_run) {
        std::cout << config.resolved().dump(2) << "\n";
        return kExitOk;
    }
    if (fs::exists(config.root / "manifest.json")) {
        std::cerr << "config error: output root " << config.root
                  << " already contains an archive (refusing to overwrite)\n";
        return kExitConfigError;
    }

    RunManifest manifest;
    manifest.config = config.resolved();
    manifest.seed = config.edo.seed;
    manifest.fitness = manifest.config.at("fitness");
    manifest.engine_version = kEngineVersion;
    manifest.stop_reason = "running";

    RunOptions options;
    options.workers = command.workers > 0
                          ? command.workers
                          : static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));

    // Stream epochs to disk as they complete; retention keeps epoch 0, every
    // j-th epoch and always the final one.
    std::optional<GenerationRecord> pending;
    options.on_generation = [&](const GenerationRecord& record) {
        if (record.epoch % config.retention_every == 0) {
            write_generation(config.root, record, config.edo.families);
            pending.reset();
        } else {
            pending = record;
        }
        const auto order = fitness_order(record.fitnesses);
        const auto& best = record.individuals[order.front()];
        std::vector<double> finite;
        for (const auto& f : record.fitnesses)
            if (f.finite()) finite.push_back(f.value);
        std::sort(finite.begin(), finite.end());
        const std::string median =
            finite.empty() ? "inf" : format_double(finite[(finite.size() - 1) / 2]);
        std::cout << "epoch " << record.epoch << "  best "
                  << fitness_cell(record.fitnesses[order.front()]) << "  median " << median
                  << "  best_shape " << best.dataset.n_rows() << "x" << best.dataset.n_cols()
                  << "\n";
    };

    try {
        write_manifest(config.root, manifest);
        const History history = run(config.edo, make_fitness(config.fitness), options);
        if (pending) write_generation(config.root, *pending, config.edo.families);
        manifest.stop_reason = history.stop_reason;
        write_manifest(config.root, manifest);
    } catch (const RunError& e) {
        if (pending) write_generation(config.root, *pending, config.edo.families);
        manifest.stop_reason = std::string("error: ") + e.what();
        write_manifest(config.root, manifest);
        std::cerr << "runtime error: " << e.what() << " (partial archive kept at " << config.root
                  << ")\n";
        return kExitRuntimeError;
    } catch (const std::exception& e) {
        std::cerr << "runtime error: " << e.what() << "\n";
        return kExitRuntimeError;
    }
    return kExitOk;
}

int cmd_summarise(const SummariseCommand& command) {
    if (command.interval < 1) {
        std::cerr << "config error: --interval must be >= 1\n";
        return kExitConfigError;
    }
    try {
        const auto rows = summarise(command.root);
        std::set<int> wanted;
        {
            std::vector<int> epochs;
            for (const auto& row : rows) epochs.push_back(row.epoch);
            for (const int e : sample_epochs(epochs, command.interval)) wanted.insert(e);
        }
        std::string csv =
            "epoch,n,n_inf,best,q1,median,q3,worst,"
            "min_rows,median_rows,max_rows,min_cols,median_cols,max_cols,"
            "best_index,median_index,worst_index\n";
        for (const auto& row : rows) {
            if (!wanted.count(row.epoch)) continue;
            csv += std::to_string(row.epoch) + "," + std::to_string(row.n_individuals) + "," +
                   std::to_string(row.n_infinite) + "," + optional_cell(row.best) + "," +
                   optional_cell(row.q1) + "," + optional_cell(row.median) + "," +
                   optional_cell(row.q3) + "," + optional_cell(row.worst) + "," +
                   std::to_string(row.min_rows) + "," + std::to_string(row.median_rows) + "," +
                   std::to_string(row.max_rows) + "," + std::to_string(row.min_cols) + "," +
                   std::to_string(row.median_cols) + "," + std::to_string(row.max_cols) + "," +
                   std::to_string(row.best_index) + "," + std::to_string(row.median_index) + "," +
                   std::to_string(row.worst_index) + "\n";
        }
        std::ofstream out(command.out_csv);
        if (!out) throw std::runtime_error("cannot write " + command.out_csv.string());
        out << csv;
    } catch (const ArchiveError& e) {
        std::cerr << "runtime error: " << e.what() << "\n";
        return kExitRuntimeError;
    } catch (const std::exception& e) {
        std::cerr << "runtime error: " << e.what() << "\n";
        return kExitRuntimeError;
    }
    return kExitOk;
}

namespace {

std::vector<Point2> cluster_points(const Dataset& dataset, std::span<const int> labels, int cluster) {
    std::vector<Point2> points;
    for (std::size_t i = 0; i < dataset.n_rows(); ++i)
        if (labels[i] == cluster) points.push_back({dataset.at(i, 0), dataset.at(i, 1)});
    return points;
}

struct ClusteringReport {
    std::vector<int> labels;
    std::optional<double> silhouette_value;
    std::vector<std::pair<int, double>> cluster_convexity;  // 2-D datasets only
    std::optional<double> mean_convexity;
};

ClusteringReport report_clustering(const Dataset& dataset, std::vector<int> labels,
                                   std::span<const int> clusters_present) {
    ClusteringReport report;
    report.labels = std::move(labels);
    try {
        report.silhouette_value = silhouette(report.labels, dataset);
    } catch (const SilhouetteUndefined&) {
    }
    if (dataset.n_cols() == 2 && !clusters_present.empty()) {
        double total = 0.0;
        for (const int c : clusters_present) {
            const auto points = cluster_points(dataset, report.labels, c);
            const double value = points.empty() ? 1.0 : convexity(points);
            report.cluster_convexity.push_back({c, value});
            total += value;
        }
        report.mean_convexity = total / static_cast<double>(clusters_present.size());
    }
    return report;
}

}  // namespace

int cmd_representatives(const RepresentativesCommand& command) {
    try {
        const RunManifest manifest = load_manifest(command.root);
        const ExperimentConfig config = parse_experiment_config(manifest.config);
        const GenerationRecord record =
            load_generation(command.root, command.epoch, config.edo.families);

        fs::create_directories(command.out_dir);
        const auto order = fitness_order(record.fitnesses);
        const std::pair<const char*, std::size_t> roles[] = {
            {"best", order.front()},
            {"median", order[(order.size() - 1) / 2]},
            {"worst", order.back()}};

        std::string report_csv = "role,individual_index,fitness,inertia,silhouette_kmeans";
        const bool comparison =
            config.fitness.name == "kmeans-vs-dbscan" || config.fitness.name == "dbscan-vs-kmeans";
        if (comparison) report_csv += ",silhouette_dbscan";
        bool two_d = true;
        for (const auto& [role, index] : roles)
            two_d = two_d && record.individuals[index].dataset.n_cols() == 2;
        if (two_d) {
            report_csv += ",mean_convexity_kmeans";
            if (comparison) report_csv += ",mean_convexity_dbscan";
        }
        report_csv += "\n";
        std::string convexity_csv = "role,method,cluster,n_points,convexity\n";

        for (const auto& [role, index] : roles) {
            const Individual& individual = record.individuals[index];
            const Dataset& dataset = individual.dataset;
            std::ofstream(command.out_dir / (std::string(role) + ".csv")) << dataset_to_csv(dataset);
            std::ofstream(command.out_dir / (std::string(role) + ".meta.json"))
                << metadata_to_json(individual, config.edo.families).dump(2) << "\n";

            if (dataset.n_rows() < static_cast<std::size_t>(config.fitness.k)) {
                // Too few rows to cluster (the fitness scored it +inf).
                report_csv += std::string(role) + "," + std::to_string(index) + "," +
                              fitness_cell(record.fitnesses[index]) + ",,";
                if (comparison) report_csv += ",";
                if (two_d) report_csv += comparison ? ",," : ",";
                report_csv += "\n";
                continue;
            }

            Rng rng(config.fitness.seed);
            const KMeansRun km = kmeans_run(dataset, config.fitness.k, rng);
            std::vector<int> kmeans_clusters(config.fitness.k);
            std::iota(kmeans_clusters.begin(), kmeans_clusters.end(), 0);
            const ClusteringReport km_report =
                report_clustering(dataset, km.partition.labels, kmeans_clusters);

            std::optional<ClusteringReport> db_report;
            if (comparison) {
                const DbscanResult db =
                    dbscan(dataset, config.fitness.eps, config.fitness.min_points);
                // Noise joins the silhouette as one cluster but is excluded
                // from the per-cluster convexity report.
                std::vector<int> silhouette_labels = db.labels;
                for (int& l : silhouette_labels)
                    if (l == kNoiseLabel) l = db.n_clusters;
                std::vector<int> db_clusters(db.n_clusters);
                std::iota(db_clusters.begin(), db_clusters.end(), 0);
                db_report = report_clustering(dataset, db.labels, db_clusters);
                try {
                    db_report->silhouette_value = silhouette(silhouette_labels, dataset);
                } catch (const SilhouetteUndefined&) {
                    db_report->silhouette_value.reset();
                }
                std::string labels_csv = "point,kmeans,dbscan\n";
                for (std::size_t i = 0; i < dataset.n_rows(); ++i)
                    labels_csv += std::to_string(i) + "," + std::to_string(km.partition.labels[i]) +
                                  "," + std::to_string(db.labels[i]) + "\n";
                std::ofstream(command.out_dir / (std::string(role) + ".labels.csv")) << labels_csv;
            } else {
                std::string labels_csv = "point,kmeans\n";
                for (std::size_t i = 0; i < dataset.n_rows(); ++i)
                    labels_csv += std::to_string(i) + "," + std::to_string(km.partition.labels[i]) + "\n";
                std::ofstream(command.out_dir / (std::string(role) + ".labels.csv")) << labels_csv;
            }

            std::string centroids_csv = "cluster";
            for (std::size_t c = 0; c < dataset.n_cols(); ++c)
                centroids_csv += ",c" + std::to_string(c);
            centroids_csv += "\n";
            for (int j = 0; j < km.partition.k; ++j) {
                centroids_csv += std::to_string(j);
                for (const double coordinate : km.partition.centroids[j])
                    centroids_csv += "," + format_double(coordinate);
                centroids_csv += "\n";
            }
            std::ofstream(command.out_dir / (std::string(role) + ".centroids.csv")) << centroids_csv;

            report_csv += std::string(role) + "," + std::to_string(index) + "," +
                          fitness_cell(record.fitnesses[index]) + "," +
                          format_double(km.inertia_per_iteration.back()) + "," +
                          optional_cell(km_report.silhouette_value);
            if (comparison) report_csv += "," + optional_cell(db_report->silhouette_value);
            if (two_d) {
                report_csv += "," + optional_cell(km_report.mean_convexity);
                if (comparison) report_csv += "," + optional_cell(db_report->mean_convexity);
                for (const auto& [cluster, value] : km_report.cluster_convexity)
                    convexity_csv += std::string(role) + ",kmeans," + std::to_string(cluster) + "," +
                                     std::to_string(cluster_points(dataset, km_report.labels, cluster).size()) +
                                     "," + format_double(value) + "\n";
                if (db_report)
                    for (const auto& [cluster, value] : db_report->cluster_convexity)
                        convexity_csv += std::string(role) + ",dbscan," + std::to_string(cluster) + "," +
                                         std::to_string(cluster_points(dataset, db_report->labels, cluster).size()) +
                                         "," + format_double(value) + "\n";
            }
            report_csv += "\n";
        }

        std::ofstream(command.out_dir / "report.csv") << report_csv;
        if (two_d) std::ofstream(command.out_dir / "convexity.csv") << convexity_csv;
    } catch (const ArchiveError& e) {
        std::cerr << "runtime error: " << e.what() << "\n";
        return kExitRuntimeError;
    } catch (const std::exception& e) {
        std::cerr << "runtime error: " << e.what() << "\n";
        return kExitRuntimeError;
    }
    return kExitOk;
}

int cmd_coverage(const CoverageCommand& command) {
    if (command.interval < 1) {
        std::cerr << "config error: --interval must be >= 1\n";
        return kExitConfigError;
    }
    try {
        const auto epochs = list_epochs(command.root);
        if (epochs.empty())
            throw ArchiveError("empty archive: " + command.root.string(), command.root);

        std::string csv = "epoch,x,y\n";
        for (const int epoch : sample_epochs(epochs, command.interval)) {
            const fs::path dir = command.root / ("epoch_" + std::to_string(epoch));
            for (int i = 0;; ++i) {
                const fs::path file = dir / ("individual_" + std::to_string(i) + ".csv");
                if (!fs::exists(file)) break;
                std::ifstream in(file);
                std::ostringstream buffer;
                buffer << in.rdbuf();
                const Dataset dataset = dataset_from_csv(buffer.str());
                if (dataset.n_cols() != 2) {
                    std::cerr << "config error: coverage requires a 2-D archive; " << file
                              << " has " << dataset.n_cols() << " columns\n";
                    return kExitConfigError;
                }
                for (std::size_t r = 0; r < dataset.n_rows(); ++r)
                    csv += std::to_string(epoch) + "," + format_double(dataset.at(r, 0)) + "," +
                           format_double(dataset.at(r, 1)) + "\n";
            }
        }
        std::ofstream out(command.out_csv);
        if (!out) throw std::runtime_error("cannot write " + command.out_csv.string());
        out << csv;
    } catch (const std::exception& e) {
        std::cerr << "runtime error: " << e.what() << "\n";
        return kExitRuntimeError;
    }
    return kExitOk;
}

}  // namespace edo
