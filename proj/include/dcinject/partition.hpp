#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

namespace dcinject {

/// Per-client sample index lists. Assignments are disjoint, cover every
/// dataset index exactly once, and every client holds at least one sample.
struct PartitionPlan {
    std::vector<std::vector<std::size_t>> assignments;
    double alpha_dirichlet = 0.5;
    std::uint64_t seed = 0;

    std::size_t n_clients() const { return assignments.size(); }
};

/// Dirichlet non-IID split: for each class, draw client proportions from
/// Dirichlet(alpha * 1) and cut the class's (shuffled) indices by the
/// cumulative proportions. An all-empty client triggers a redraw with
/// seed+1, bounded at 100 retries.
PartitionPlan dirichlet_partition(const std::vector<int>& labels, int n_clients,
                                  double alpha_dirichlet, std::uint64_t seed);

/// JSON report of the plan (client id -> index list) for reproducibility audits.
std::string partition_report_json(const PartitionPlan& plan);

}  // namespace dcinject
