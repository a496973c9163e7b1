#include "edo/clustering.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>
#include <deque>
#include <limits>
#include <numeric>
#include <set>

namespace edo {

namespace {

double sq_dist_rows(const Dataset& X, std::size_t i, std::size_t j) {
    double sum = 0.0;
    for (const auto& column : X.columns) {
        const double diff = column[i] - column[j];
        sum += diff * diff;
    }
    return sum;
}

double sq_dist_to(const Dataset& X, std::size_t i, std::span<const double> point) {
    double sum = 0.0;
    for (std::size_t c = 0; c < X.n_cols(); ++c) {
        const double diff = X.columns[c][i] - point[c];
        sum += diff * diff;
    }
    return sum;
}

std::vector<std::vector<double>> cluster_means(const Dataset& X, std::span<const int> labels, int k) {
    std::vector<std::vector<double>> means(k, std::vector<double>(X.n_cols(), 0.0));
    std::vector<std::size_t> counts(k, 0);
    for (std::size_t i = 0; i < X.n_rows(); ++i) {
        ++counts[labels[i]];
        for (std::size_t c = 0; c < X.n_cols(); ++c) means[labels[i]][c] += X.columns[c][i];
    }
    for (int j = 0; j < k; ++j) {
        if (counts[j] == 0) continue;
        for (double& v : means[j]) v /= static_cast<double>(counts[j]);
    }
    return means;
}

double mean_sq_error(const Dataset& X, std::span<const int> labels,
                     const std::vector<std::vector<double>>& centroids) {
    double sum = 0.0;
    for (std::size_t i = 0; i < X.n_rows(); ++i) sum += sq_dist_to(X, i, centroids[labels[i]]);
    return sum / static_cast<double>(X.n_rows());
}

// Assignment step. Ties keep the point's current cluster so that degenerate
// datasets (all points identical) settle instead of oscillating with the
// empty-cluster repair.
std::vector<int> assign_labels(const Dataset& X, std::span<const int> current,
                               const std::vector<std::vector<double>>& centroids) {
    std::vector<int> labels(X.n_rows());
    for (std::size_t i = 0; i < X.n_rows(); ++i) {
        int best = 0;
        double best_d = sq_dist_to(X, i, centroids[0]);
        for (std::size_t j = 1; j < centroids.size(); ++j) {
            const double d = sq_dist_to(X, i, centroids[j]);
            if (d < best_d) {
                best_d = d;
                best = static_cast<int>(j);
            }
        }
        if (!current.empty() && current[i] >= 0 && sq_dist_to(X, i, centroids[current[i]]) == best_d)
            best = current[i];
        labels[i] = best;
    }
    return labels;
}

void repair_empty_clusters(const Dataset& X, std::vector<int>& labels,
                           const std::vector<std::vector<double>>& centroids) {
    const int k = static_cast<int>(centroids.size());
    std::vector<std::size_t> counts(k, 0);
    for (const int l : labels) ++counts[l];
    for (int j = 0; j < k; ++j) {
        if (counts[j] > 0) continue;
        // Move the farthest point out of a cluster that can spare one.
        std::size_t pick = X.n_rows();
        double farthest = -1.0;
        for (std::size_t i = 0; i < X.n_rows(); ++i) {
            if (counts[labels[i]] < 2) continue;
            const double d = sq_dist_to(X, i, centroids[labels[i]]);
            if (d > farthest) {
                farthest = d;
                pick = i;
            }
        }
        assert(pick < X.n_rows() && "n >= k guarantees a donor cluster");
        --counts[labels[pick]];
        labels[pick] = j;
        counts[j] = 1;
    }
}

}  // namespace

KMeansRun kmeans_run(const Dataset& X, int k, Rng& rng, int max_iter) {
    if (k < 1) throw ConfigError("kmeans: k must be >= 1");
    const std::size_t n = X.n_rows();
    if (n < static_cast<std::size_t>(k))
        throw std::invalid_argument("kmeans: more clusters than points");
    max_iter = std::max(max_iter, 1);

    // k-means++ seeding: each next centre drawn with probability proportional
    // to its squared distance from the nearest chosen centre.
    std::vector<std::vector<double>> centroids;
    centroids.reserve(k);
    centroids.push_back(X.row(uniform_index(rng, n)));
    std::vector<double> d2(n, 0.0);
    while (centroids.size() < static_cast<std::size_t>(k)) {
        double total = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            d2[i] = sq_dist_to(X, i, centroids[0]);
            for (std::size_t c = 1; c < centroids.size(); ++c)
                d2[i] = std::min(d2[i], sq_dist_to(X, i, centroids[c]));
            total += d2[i];
        }
        std::size_t pick;
        if (total <= 0.0) {
            pick = uniform_index(rng, n);
        } else {
            const double target = uniform_real(rng, 0.0, total);
            double cumulative = 0.0;
            pick = n - 1;
            for (std::size_t i = 0; i < n; ++i) {
                cumulative += d2[i];
                if (target < cumulative) {
                    pick = i;
                    break;
                }
            }
        }
        centroids.push_back(X.row(pick));
    }

    std::vector<int> labels = assign_labels(X, {}, centroids);
    repair_empty_clusters(X, labels, centroids);

    KMeansRun run;
    run.partition.k = k;
    for (int iter = 0; iter < max_iter; ++iter) {
        centroids = cluster_means(X, labels, k);
        run.inertia_per_iteration.push_back(mean_sq_error(X, labels, centroids));
        run.iterations = iter + 1;
        std::vector<int> next = assign_labels(X, labels, centroids);
        repair_empty_clusters(X, next, centroids);
        if (next == labels) {
            run.converged = true;
            break;
        }
        labels = std::move(next);
    }
    if (!run.converged) {
        centroids = cluster_means(X, labels, k);
        run.inertia_per_iteration.push_back(mean_sq_error(X, labels, centroids));
    }
    run.partition.labels = std::move(labels);
    run.partition.centroids = std::move(centroids);
    return run;
}

Partition kmeans(const Dataset& X, int k, Rng& rng, int max_iter) {
    return kmeans_run(X, k, rng, max_iter).partition;
}

double inertia(const Partition& partition, const Dataset& X) {
    if (partition.labels.size() != X.n_rows())
        throw std::invalid_argument("inertia: partition does not match the dataset");
    for (const int l : partition.labels)
        if (l < 0 || l >= partition.k) throw std::invalid_argument("inertia: label out of range");
    const auto& centroids =
        partition.centroids.empty() ? cluster_means(X, partition.labels, partition.k) : partition.centroids;
    return mean_sq_error(X, partition.labels, centroids);
}

double silhouette(std::span<const int> labels, const Dataset& X) {
    const std::size_t n = X.n_rows();
    if (labels.size() != n) throw std::invalid_argument("silhouette: labels do not match the dataset");

    // Compact the labels actually present.
    std::vector<int> present(labels.begin(), labels.end());
    std::sort(present.begin(), present.end());
    present.erase(std::unique(present.begin(), present.end()), present.end());
    const std::size_t m = present.size();
    if (m < 2) throw SilhouetteUndefined("silhouette requires at least two clusters");

    std::vector<int> compact(n);
    for (std::size_t i = 0; i < n; ++i)
        compact[i] = static_cast<int>(std::lower_bound(present.begin(), present.end(), labels[i]) -
                                      present.begin());
    std::vector<std::size_t> sizes(m, 0);
    for (const int c : compact) ++sizes[c];

    // Per point: mean distance to each cluster, then A (own) and B (nearest
    // other).
    double total = 0.0;
    std::vector<double> sums(m);
    for (std::size_t i = 0; i < n; ++i) {
        std::fill(sums.begin(), sums.end(), 0.0);
        for (std::size_t j = 0; j < n; ++j)
            if (j != i) sums[compact[j]] += std::sqrt(sq_dist_rows(X, i, j));
        const int own = compact[i];
        if (sizes[own] == 1) continue;  // S(x) = 0
        const double a = sums[own] / static_cast<double>(sizes[own] - 1);
        double b = std::numeric_limits<double>::infinity();
        for (std::size_t c = 0; c < m; ++c)
            if (c != static_cast<std::size_t>(own)) b = std::min(b, sums[c] / static_cast<double>(sizes[c]));
        const double denom = std::max(a, b);
        total += denom == 0.0 ? 0.0 : (b - a) / denom;
    }
    return total / static_cast<double>(n);
}

DbscanResult dbscan(const Dataset& X, double eps, int min_points) {
    if (eps <= 0.0) throw ConfigError("dbscan: eps must be positive");
    if (min_points < 1) throw ConfigError("dbscan: min_points must be >= 1");
    const std::size_t n = X.n_rows();
    const double eps_sq = eps * eps;

    std::vector<std::vector<std::size_t>> neighbours(n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j)
            if (sq_dist_rows(X, i, j) <= eps_sq) neighbours[i].push_back(j);

    std::vector<bool> core(n);
    for (std::size_t i = 0; i < n; ++i)
        core[i] = neighbours[i].size() >= static_cast<std::size_t>(min_points);

    constexpr int kUnvisited = -2;
    std::vector<int> labels(n, kUnvisited);
    int cluster = 0;
    for (std::size_t i = 0; i < n; ++i) {
        if (!core[i] || labels[i] != kUnvisited) continue;
        std::deque<std::size_t> queue{i};
        labels[i] = cluster;
        while (!queue.empty()) {
            const std::size_t u = queue.front();
            queue.pop_front();
            for (const std::size_t v : neighbours[u])
                if (core[v] && labels[v] == kUnvisited) {
                    labels[v] = cluster;
                    queue.push_back(v);
                }
        }
        ++cluster;
    }

    // Border points: nearest core neighbour decides the cluster (ties to the
    // lower cluster id, then the lower point index).
    for (std::size_t i = 0; i < n; ++i) {
        if (core[i]) continue;
        int best = kNoiseLabel;
        double best_d = std::numeric_limits<double>::infinity();
        std::size_t best_idx = n;
        for (const std::size_t v : neighbours[i]) {
            if (!core[v]) continue;
            const double d = sq_dist_rows(X, i, v);
            if (d < best_d || (d == best_d && (labels[v] < best || (labels[v] == best && v < best_idx)))) {
                best_d = d;
                best = labels[v];
                best_idx = v;
            }
        }
        labels[i] = best;
    }
    return {std::move(labels), cluster};
}

Fitness comparison_fitness(const Dataset& X, int k, double eps, int min_points, std::uint64_t seed,
                           int sign) {
    const std::size_t n = X.n_rows();
    const DbscanResult db = dbscan(X, eps, min_points);
    const bool has_noise =
        std::any_of(db.labels.begin(), db.labels.end(), [](int l) { return l == kNoiseLabel; });
    // Noise points form a single cluster of their own.
    const int effective_clusters = db.n_clusters + (has_noise ? 1 : 0);
    if (effective_clusters < 2) return infinite_fitness();
    if (n < static_cast<std::size_t>(std::max(k, 2))) return infinite_fitness();

    std::vector<int> dbscan_labels = db.labels;
    for (int& l : dbscan_labels)
        if (l == kNoiseLabel) l = db.n_clusters;
    const double s_dbscan = silhouette(dbscan_labels, X);

    Rng rng(seed);
    const Partition km = kmeans(X, k, rng);
    const double s_kmeans = silhouette(km.labels, X);
    return Fitness{static_cast<double>(sign) * (s_dbscan - s_kmeans)};
}

FitnessFn make_fitness(const FitnessSpec& spec) {
    if (spec.name == "inertia") {
        if (spec.k < 1) throw ConfigError("fitness.k: must be >= 1 for inertia");
        return [spec](const Individual& individual) {
            const Dataset& X = individual.dataset;
            if (X.n_rows() < static_cast<std::size_t>(spec.k)) return infinite_fitness();
            Rng rng(spec.seed);
            return Fitness{kmeans_run(X, spec.k, rng).inertia_per_iteration.back()};
        };
    }
    if (spec.name == "silhouette-kmeans") {
        if (spec.k < 2) throw ConfigError("fitness.k: must be >= 2 for silhouette-kmeans");
        return [spec](const Individual& individual) {
            const Dataset& X = individual.dataset;
            if (X.n_rows() < static_cast<std::size_t>(spec.k)) return infinite_fitness();
            Rng rng(spec.seed);
            const Partition km = kmeans(X, spec.k, rng);
            return Fitness{-silhouette(km.labels, X)};  // EDO minimises
        };
    }
    if (spec.name == "kmeans-vs-dbscan" || spec.name == "dbscan-vs-kmeans") {
        if (spec.k < 2) throw ConfigError("fitness.k: must be >= 2 for the comparison fitness");
        if (spec.eps <= 0.0) throw ConfigError("fitness.eps: must be positive");
        if (spec.min_points < 1) throw ConfigError("fitness.min_points: must be >= 1");
        const int sign = spec.name == "kmeans-vs-dbscan" ? 1 : -1;
        return [spec, sign](const Individual& individual) {
            return comparison_fitness(individual.dataset, spec.k, spec.eps, spec.min_points, spec.seed,
                                      sign);
        };
    }
    throw ConfigError("fitness.name: unknown fitness '" + spec.name +
                      "' (known: inertia, silhouette-kmeans, kmeans-vs-dbscan, dbscan-vs-kmeans)");
}

}  // namespace edo
