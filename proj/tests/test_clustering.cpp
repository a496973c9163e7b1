#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <set>

#include "edo/clustering.hpp"
#include "oracles.hpp"
#include "test_support.hpp"

using namespace edo;

namespace {

Dataset random_dataset(Rng& rng, std::size_t rows, std::size_t cols) {
    Dataset dataset;
    for (std::size_t c = 0; c < cols; ++c) {
        std::vector<double> column;
        for (std::size_t r = 0; r < rows; ++r) column.push_back(uniform_real(rng, 0.0, 1.0));
        dataset.columns.push_back(std::move(column));
    }
    return dataset;
}

/// Canonical form of a labelling: map each label to the set of point indices.
std::set<std::set<std::size_t>> partition_sets(std::span<const int> labels) {
    std::map<int, std::set<std::size_t>> groups;
    for (std::size_t i = 0; i < labels.size(); ++i)
        if (labels[i] != kNoiseLabel) groups[labels[i]].insert(i);
    std::set<std::set<std::size_t>> out;
    for (auto& [_, group] : groups) out.insert(std::move(group));
    return out;
}

const Dataset kFourCorners = oracle::dataset_from_rows({{0, 0}, {0, 1}, {1, 0}, {1, 1}});

}  // namespace

TEST_CASE("kmeans") {
    SUBCASE("k = 1 centroid is the mean") {
        Rng rng(1);
        const Partition partition = kmeans(kFourCorners, 1, rng);
        CHECK(partition.centroids[0][0] == doctest::Approx(0.5).epsilon(1e-12));
        CHECK(partition.centroids[0][1] == doctest::Approx(0.5).epsilon(1e-12));
        CHECK(inertia(partition, kFourCorners) == doctest::Approx(0.5).epsilon(1e-12));
    }

    SUBCASE("two well-separated pairs split correctly for any seed") {
        const Dataset X =
            oracle::dataset_from_rows({{0, 0}, {0, 0.1}, {10, 10}, {10, 10.1}});
        const auto best = oracle::best_partition(X, 2);
        for (std::uint64_t seed = 0; seed < 10; ++seed) {
            Rng rng(seed);
            const Partition partition = kmeans(X, 2, rng);
            CHECK(partition_sets(partition.labels) == partition_sets(best.labels));
            CHECK(inertia(partition, X) == doctest::Approx(best.inertia).epsilon(1e-12));
        }
    }

    SUBCASE("all-identical points converge with inertia 0") {
        const Dataset X = oracle::dataset_from_rows({{0.3, 0.3}, {0.3, 0.3}, {0.3, 0.3}});
        Rng rng(5);
        const KMeansRun run = kmeans_run(X, 2, rng);
        CHECK(run.converged);
        CHECK(run.inertia_per_iteration.back() == 0.0);
        std::set<int> labels(run.partition.labels.begin(), run.partition.labels.end());
        CHECK(labels.size() == 2);  // the empty-cluster repair fired once
    }

    SUBCASE("contract violations") {
        Rng rng(0);
        CHECK_THROWS_AS(kmeans(kFourCorners, 0, rng), ConfigError);
        CHECK_THROWS_AS(kmeans(kFourCorners, 5, rng), std::invalid_argument);
    }

    SUBCASE("Lloyd descent is monotone per iteration (property)") {
        Rng rng(77);
        for (int trial = 0; trial < 25; ++trial) {
            const Dataset X = random_dataset(rng, 5 + uniform_index(rng, 40), 2);
            const KMeansRun run = kmeans_run(X, 3, rng);
            for (std::size_t i = 1; i < run.inertia_per_iteration.size(); ++i)
                CHECK(run.inertia_per_iteration[i] <=
                      run.inertia_per_iteration[i - 1] * (1 + 1e-12) + 1e-15);
        }
    }
}

TEST_CASE("inertia") {
    SUBCASE("each point its own cluster gives 0") {
        Partition partition{{0, 1, 2, 3}, {}, 4};
        CHECK(inertia(partition, kFourCorners) == 0.0);
    }

    SUBCASE("hand-computed left/right split gives 0.25") {
        Partition partition{{0, 0, 1, 1}, {}, 2};  // rows: (0,0),(0,1) | (1,0),(1,1)
        CHECK(inertia(partition, kFourCorners) == doctest::Approx(0.25).epsilon(1e-12));
        CHECK(inertia(partition, kFourCorners) ==
              doctest::Approx(oracle::inertia(partition.labels, kFourCorners)).epsilon(1e-12));
    }

    SUBCASE("duplicate rows in one cluster give 0") {
        const Dataset X = oracle::dataset_from_rows({{2, 3}, {2, 3}});
        Partition partition{{0, 0}, {}, 1};
        CHECK(inertia(partition, X) == 0.0);
    }

    SUBCASE("invariant under relabelling") {
        Rng rng(3);
        const Dataset X = random_dataset(rng, 12, 2);
        Partition partition{{}, {}, 3};
        for (std::size_t i = 0; i < 12; ++i)
            partition.labels.push_back(static_cast<int>(uniform_index(rng, 3)));
        std::vector<int> swapped = partition.labels;
        for (int& l : swapped) l = (l + 1) % 3;
        const Partition relabelled{swapped, {}, 3};
        CHECK(inertia(partition, X) == doctest::Approx(inertia(relabelled, X)).epsilon(1e-12));
    }

    SUBCASE("label out of range is a contract violation") {
        Partition partition{{0, 0, 0, 2}, {}, 2};
        CHECK_THROWS_AS(inertia(partition, kFourCorners), std::invalid_argument);
    }
}

TEST_CASE("silhouette") {
    SUBCASE("two singleton clusters give 0") {
        const Dataset X = oracle::dataset_from_rows({{0, 0}, {5, 5}});
        const std::vector<int> labels{0, 1};
        CHECK(silhouette(labels, X) == 0.0);
    }

    SUBCASE("tight far-apart pairs approach 1") {
        const double delta = 1e-9;
        const Dataset X = oracle::dataset_from_rows({{0, 0}, {0, delta}, {10, 0}, {10, delta}});
        const std::vector<int> labels{0, 0, 1, 1};
        CHECK(silhouette(labels, X) > 0.999);
    }

    SUBCASE("4-point left/right split matches the oracle and 3 - 2*sqrt(2)") {
        const std::vector<int> labels{0, 0, 1, 1};  // rows: (0,0),(0,1) | (1,0),(1,1)
        const double value = silhouette(labels, kFourCorners);
        CHECK(value == doctest::Approx(oracle::silhouette(labels, kFourCorners)).epsilon(1e-12));
        CHECK(value == doctest::Approx(3.0 - 2.0 * std::sqrt(2.0)).epsilon(1e-12));
    }

    SUBCASE("single cluster is undefined") {
        const std::vector<int> labels{0, 0, 0, 0};
        CHECK_THROWS_AS(silhouette(labels, kFourCorners), SilhouetteUndefined);
    }

    SUBCASE("coincident clusters yield 0, not NaN") {
        const Dataset X = oracle::dataset_from_rows({{1, 1}, {1, 1}, {1, 1}, {1, 1}});
        const std::vector<int> labels{0, 0, 1, 1};
        CHECK(silhouette(labels, X) == 0.0);
    }

    SUBCASE("bounded in [-1, 1] and equal to the oracle (property)") {
        Rng rng(9);
        for (int trial = 0; trial < 40; ++trial) {
            const std::size_t n = 3 + uniform_index(rng, 6);
            const Dataset X = random_dataset(rng, n, 2);
            std::vector<int> labels;
            for (std::size_t i = 0; i < n; ++i)
                labels.push_back(static_cast<int>(uniform_index(rng, 3)));
            std::set<int> distinct(labels.begin(), labels.end());
            if (distinct.size() < 2) continue;
            const double value = silhouette(labels, X);
            CHECK(value >= -1.0);
            CHECK(value <= 1.0);
            CHECK(value == doctest::Approx(oracle::silhouette(labels, X)).epsilon(1e-12));
        }
    }
}

TEST_CASE("dbscan") {
    SUBCASE("identical points form one cluster, no noise") {
        const Dataset X = oracle::dataset_from_rows({{1, 1}, {1, 1}, {1, 1}});
        const DbscanResult result = dbscan(X, 0.5, 3);
        CHECK(result.n_clusters == 1);
        CHECK(result.labels == std::vector<int>{0, 0, 0});
    }

    SUBCASE("widely spaced line is all noise") {
        const Dataset X = oracle::dataset_from_rows({{0, 0}, {10, 0}, {20, 0}, {30, 0}});
        const DbscanResult result = dbscan(X, 1.0, 2);
        CHECK(result.n_clusters == 0);
        CHECK(result.labels == std::vector<int>(4, kNoiseLabel));
    }

    SUBCASE("dense blob plus a far outlier") {
        std::vector<std::vector<double>> rows;
        Rng rng(19);
        for (int i = 0; i < 20; ++i)
            rows.push_back({0.5 + uniform_real(rng, -0.05, 0.05), 0.5 + uniform_real(rng, -0.05, 0.05)});
        rows.push_back({100.0, 100.0});
        const Dataset X = oracle::dataset_from_rows(rows);
        const DbscanResult result = dbscan(X, 0.2, 5);
        CHECK(result.n_clusters == 1);
        for (int i = 0; i < 20; ++i) CHECK(result.labels[i] == 0);
        CHECK(result.labels[20] == kNoiseLabel);

        const oracle::DbscanRef ref = oracle::dbscan(X, 0.2, 5);
        CHECK(result.labels == ref.labels);
        CHECK(result.n_clusters == ref.n_clusters);
    }

    SUBCASE("matches the naive reference on random instances") {
        Rng rng(29);
        for (int trial = 0; trial < 40; ++trial) {
            const Dataset X = random_dataset(rng, 3 + uniform_index(rng, 6), 2);
            const DbscanResult result = dbscan(X, 0.3, 2);
            const oracle::DbscanRef ref = oracle::dbscan(X, 0.3, 2);
            CHECK(result.labels == ref.labels);
            CHECK(result.n_clusters == ref.n_clusters);
        }
    }

    SUBCASE("row permutation changes nothing but the labelling (property)") {
        Rng rng(59);
        for (int trial = 0; trial < 25; ++trial) {
            const std::size_t n = 6 + uniform_index(rng, 14);
            const Dataset X = random_dataset(rng, n, 2);
            const DbscanResult base = dbscan(X, 0.25, 3);

            std::vector<std::size_t> perm(n);
            std::iota(perm.begin(), perm.end(), 0);
            std::shuffle(perm.begin(), perm.end(), rng);
            Dataset shuffled;
            shuffled.columns.assign(2, std::vector<double>(n));
            for (std::size_t i = 0; i < n; ++i)
                for (std::size_t c = 0; c < 2; ++c)
                    shuffled.columns[c][i] = X.columns[c][perm[i]];
            const DbscanResult moved = dbscan(shuffled, 0.25, 3);

            // Same noise set and the same partition of the points.
            std::vector<int> unpermuted(n);
            for (std::size_t i = 0; i < n; ++i) unpermuted[perm[i]] = moved.labels[i];
            for (std::size_t i = 0; i < n; ++i)
                CHECK((unpermuted[i] == kNoiseLabel) == (base.labels[i] == kNoiseLabel));
            CHECK(partition_sets(unpermuted) == partition_sets(base.labels));
            CHECK(moved.n_clusters == base.n_clusters);
        }
    }

    SUBCASE("parameter validation") {
        CHECK_THROWS_AS(dbscan(kFourCorners, 0.0, 2), ConfigError);
        CHECK_THROWS_AS(dbscan(kFourCorners, 1.0, 0), ConfigError);
    }
}

TEST_CASE("comparison fitness") {
    SUBCASE("single DBSCAN cluster without noise is +inf") {
        const Dataset X = oracle::dataset_from_rows({{0, 0}, {0.01, 0}, {0, 0.01}, {0.01, 0.01}});
        CHECK_FALSE(comparison_fitness(X, 2, 0.5, 2, 0, 1).finite());
    }

    SUBCASE("all-identical dataset is +inf") {
        const Dataset X = oracle::dataset_from_rows({{0.5, 0.5}, {0.5, 0.5}, {0.5, 0.5}});
        CHECK_FALSE(comparison_fitness(X, 2, 0.1, 2, 0, 1).finite());
    }

    SUBCASE("sign flips exactly between the two run modes") {
        // A blob and an outlier: DBSCAN keeps a cluster plus noise.
        std::vector<std::vector<double>> rows;
        Rng rng(7);
        for (int i = 0; i < 10; ++i)
            rows.push_back({uniform_real(rng, 0.4, 0.6), uniform_real(rng, 0.4, 0.6)});
        rows.push_back({5.0, 5.0});
        const Dataset X = oracle::dataset_from_rows(rows);
        const Fitness forward = comparison_fitness(X, 2, 0.3, 4, 3, 1);
        const Fitness inverse = comparison_fitness(X, 2, 0.3, 4, 3, -1);
        REQUIRE(forward.finite());
        CHECK(forward.value == -inverse.value);
        CHECK(forward.value >= -2.0);
        CHECK(forward.value <= 2.0);
    }

    SUBCASE("4-point instance equals the composed silhouette oracles") {
        // (0,0) and (0,0.08) are a dense pair; (1,0) and (1,0.08) another,
        // far away. eps = 0.1, min_points = 2: DBSCAN finds both pairs.
        const Dataset X = oracle::dataset_from_rows({{0, 0}, {0, 0.08}, {1, 0}, {1, 0.08}});
        const DbscanResult db = dbscan(X, 0.1, 2);
        REQUIRE(db.n_clusters == 2);
        const double s_dbscan = oracle::silhouette(db.labels, X);
        Rng rng(11);
        const Partition km = kmeans(X, 2, rng);
        const double s_kmeans = oracle::silhouette(km.labels, X);
        const Fitness fitness = comparison_fitness(X, 2, 0.1, 2, 11, 1);
        REQUIRE(fitness.finite());
        CHECK(fitness.value == doctest::Approx(s_dbscan - s_kmeans).epsilon(1e-12));
    }

    SUBCASE("finite values stay within [-2, 2] (property)") {
        Rng rng(83);
        for (int trial = 0; trial < 30; ++trial) {
            const Dataset X = random_dataset(rng, 10 + uniform_index(rng, 30), 2);
            const Fitness fitness = comparison_fitness(X, 3, 0.1, 5, trial, 1);
            if (!fitness.finite()) continue;
            CHECK(fitness.value >= -2.0);
            CHECK(fitness.value <= 2.0);
        }
    }
}

TEST_CASE("fitness registry") {
    CHECK_THROWS_AS(make_fitness({"nonsense", 2, 0.1, 5, 0}), ConfigError);
    CHECK_THROWS_AS(make_fitness({"silhouette-kmeans", 1, 0.1, 5, 0}), ConfigError);
    CHECK_THROWS_AS(make_fitness({"kmeans-vs-dbscan", 3, 0.0, 5, 0}), ConfigError);

    Individual individual;
    individual.dataset = kFourCorners;
    individual.metadata = {testing::pinned_uniform(0, 1), testing::pinned_uniform(0, 1)};

    SUBCASE("inertia fitness equals a direct kmeans run") {
        const FitnessFn fitness = make_fitness({"inertia", 2, 0.1, 5, 21});
        Rng rng(21);
        const KMeansRun run = kmeans_run(kFourCorners, 2, rng);
        CHECK(fitness(individual).value ==
              doctest::Approx(run.inertia_per_iteration.back()).epsilon(1e-12));
    }

    SUBCASE("silhouette fitness is the negated coefficient") {
        const FitnessFn fitness = make_fitness({"silhouette-kmeans", 2, 0.1, 5, 21});
        Rng rng(21);
        const Partition km = kmeans(kFourCorners, 2, rng);
        CHECK(fitness(individual).value ==
              doctest::Approx(-silhouette(km.labels, kFourCorners)).epsilon(1e-12));
    }

    SUBCASE("too few rows for k scores +inf") {
        Individual tiny;
        tiny.dataset = oracle::dataset_from_rows({{0.1, 0.2}});
        tiny.metadata = individual.metadata;
        const FitnessFn fitness = make_fitness({"inertia", 2, 0.1, 5, 0});
        CHECK_FALSE(fitness(tiny).finite());
    }
}
