#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <stdexcept>
#include <string>

#include "edo/core.hpp"

namespace edo {

/// A hard clustering: one label per dataset row plus the cluster means.
struct Partition {
    std::vector<int> labels;
    std::vector<std::vector<double>> centroids;
    int k = 0;
};

struct KMeansRun {
    Partition partition;
    std::vector<double> inertia_per_iteration;  // after each centroid update
    int iterations = 0;
    bool converged = false;
};

/// Lloyd's algorithm with seeded k-means++ initialisation. Converges when no
/// label changes; an emptied cluster is repaired by reassigning the point
/// farthest from its current centroid (ties to the lowest point index).
KMeansRun kmeans_run(const Dataset& dataset, int k, Rng& rng, int max_iter = 300);
Partition kmeans(const Dataset& dataset, int k, Rng& rng, int max_iter = 300);

/// Mean over the dataset of squared Euclidean distance to the assigned
/// centroid.
double inertia(const Partition& partition, const Dataset& dataset);

/// Raised when fewer than two clusters are present.
struct SilhouetteUndefined : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Mean silhouette value over all points; singleton clusters contribute 0.
double silhouette(std::span<const int> labels, const Dataset& dataset);

inline constexpr int kNoiseLabel = -1;

struct DbscanResult {
    std::vector<int> labels;  // cluster index or kNoiseLabel
    int n_clusters = 0;
};

/// Density-based clustering: a point is core when at least min_points
/// neighbours (itself included) lie within eps. Border points join their
/// nearest core neighbour, so the result does not depend on row order.
DbscanResult dbscan(const Dataset& dataset, double eps, int min_points);

/// Silhouette difference S_D - S_k between DBSCAN (noise points counted as
/// one cluster) and k-means, multiplied by `sign`; +inf when DBSCAN finds
/// fewer than two clusters counting noise. sign=+1 searches k-means-preferable
/// datasets, sign=-1 DBSCAN-preferable ones.
Fitness comparison_fitness(const Dataset& dataset, int k, double eps, int min_points,
                           std::uint64_t seed, int sign);

/// Fitness selector for the experiment runner. Registered names: "inertia",
/// "silhouette-kmeans", "kmeans-vs-dbscan", "dbscan-vs-kmeans".
struct FitnessSpec {
    std::string name;
    int k = 2;
    double eps = 0.1;
    int min_points = 5;
    std::uint64_t seed = 0;
};

FitnessFn make_fitness(const FitnessSpec& spec);

}  // namespace edo
