#include <doctest.h>

#include <algorithm>
#include <numeric>

#include "dcinject/partition.hpp"
#include "dcinject/rng.hpp"

using namespace dcinject;

namespace {

std::vector<int> make_labels(int n_classes, int per_class) {
    std::vector<int> labels;
    for (int k = 0; k < n_classes; ++k) {
        labels.insert(labels.end(), per_class, k);
    }
    return labels;
}

void check_exact_cover(const PartitionPlan& plan, std::size_t n) {
    std::vector<std::size_t> all;
    for (const auto& a : plan.assignments) {
        CHECK(!a.empty());
        all.insert(all.end(), a.begin(), a.end());
    }
    REQUIRE(all.size() == n);
    std::sort(all.begin(), all.end());
    for (std::size_t i = 0; i < n; ++i) CHECK(all[i] == i);
}

// largest class share within one client's shard
double max_class_fraction(const std::vector<std::size_t>& shard,
                          const std::vector<int>& labels, int n_classes) {
    std::vector<int> counts(n_classes, 0);
    for (std::size_t idx : shard) ++counts[labels[idx]];
    const int m = *std::max_element(counts.begin(), counts.end());
    return static_cast<double>(m) / static_cast<double>(shard.size());
}

}  // namespace

TEST_CASE("single client takes everything") {
    const auto labels = make_labels(3, 10);
    const auto plan = dirichlet_partition(labels, 1, 0.5, 7);
    REQUIRE(plan.assignments.size() == 1);
    check_exact_cover(plan, labels.size());
}

TEST_CASE("exact cover on random instances") {
    Rng rng(101);
    for (int trial = 0; trial < 60; ++trial) {
        const int n_clients = 1 + static_cast<int>(rng.below(10));
        const int n_classes = 2 + static_cast<int>(rng.below(5));
        const int per_class =
            std::max(1, n_clients) + static_cast<int>(rng.below(40));
        const auto labels = make_labels(n_classes, per_class);
        const double alpha = std::exp(rng.uniform(std::log(0.05), std::log(50.0)));
        const auto plan = dirichlet_partition(labels, n_clients, alpha, rng.next_u64());
        check_exact_cover(plan, labels.size());
    }
}

TEST_CASE("deterministic given identical arguments") {
    const auto labels = make_labels(4, 50);
    const auto a = dirichlet_partition(labels, 8, 0.3, 42);
    const auto b = dirichlet_partition(labels, 8, 0.3, 42);
    CHECK(a.assignments == b.assignments);
    const auto c = dirichlet_partition(labels, 8, 0.3, 43);
    CHECK(a.assignments != c.assignments);
}

TEST_CASE("huge alpha concentrates near uniform shares") {
    const auto labels = make_labels(2, 1000);
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        const auto plan = dirichlet_partition(labels, 10, 1e6, seed);
        for (const auto& shard : plan.assignments) {
            int per_class[2] = {0, 0};
            for (std::size_t idx : shard) ++per_class[labels[idx]];
            CHECK(per_class[0] >= 80);
            CHECK(per_class[0] <= 120);
            CHECK(per_class[1] >= 80);
            CHECK(per_class[1] <= 120);
        }
    }
}

TEST_CASE("small alpha produces dominated clients") {
    const auto labels = make_labels(2, 1000);
    int seeds_with_dominated_client = 0;
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        const auto plan = dirichlet_partition(labels, 10, 0.1, seed);
        const bool found = std::any_of(plan.assignments.begin(), plan.assignments.end(),
                                       [&](const auto& shard) {
                                           return max_class_fraction(shard, labels, 2) > 0.8;
                                       });
        if (found) ++seeds_with_dominated_client;
    }
    CHECK(seeds_with_dominated_client >= 18);
}

TEST_CASE("heterogeneity shrinks as alpha grows") {
    const auto labels = make_labels(4, 250);
    double prev_mean = 1.0 + 1e-9;
    for (double alpha : {0.1, 0.5, 1.0, 10.0}) {
        double mean = 0.0;
        const int n_seeds = 20;
        for (std::uint64_t seed = 0; seed < n_seeds; ++seed) {
            const auto plan = dirichlet_partition(labels, 10, alpha, 1000 + seed);
            double worst = 0.0;
            for (const auto& shard : plan.assignments) {
                worst = std::max(worst, max_class_fraction(shard, labels, 4));
            }
            mean += worst;
        }
        mean /= n_seeds;
        CHECK(mean <= prev_mean);
        prev_mean = mean;
    }
}

TEST_CASE("repair fills every client even in tight splits") {
    // sparse alpha over 8 clients: single draws often leave empties
    const auto labels = make_labels(2, 20);
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        const auto plan = dirichlet_partition(labels, 8, 0.1, seed);
        check_exact_cover(plan, labels.size());
    }
}

TEST_CASE("repair gives up after the retry budget on infeasible splits") {
    // 10 samples across 10 clients at tiny alpha cannot cover every client
    const auto labels = make_labels(2, 5);
    CHECK_THROWS_AS(dirichlet_partition(labels, 10, 0.1, 0), std::runtime_error);
}

TEST_CASE("input validation") {
    CHECK_THROWS_AS(dirichlet_partition({}, 2, 0.5, 0), std::invalid_argument);
    CHECK_THROWS_AS(dirichlet_partition({0, 1}, 0, 0.5, 0), std::invalid_argument);
    CHECK_THROWS_AS(dirichlet_partition({0, 1}, 2, 0.0, 0), std::invalid_argument);
    CHECK_THROWS_AS(dirichlet_partition({0, 1}, 3, 0.5, 0), std::invalid_argument);
    CHECK_THROWS_AS(dirichlet_partition({0, -1}, 1, 0.5, 0), std::invalid_argument);
}

TEST_CASE("json report lists every client") {
    const auto labels = make_labels(2, 6);
    const auto plan = dirichlet_partition(labels, 3, 0.5, 5);
    const std::string json = partition_report_json(plan);
    CHECK(json.find("\"alpha_dirichlet\"") != std::string::npos);
    CHECK(json.find("\"0\"") != std::string::npos);
    CHECK(json.find("\"2\"") != std::string::npos);
}
