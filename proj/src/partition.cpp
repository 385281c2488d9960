#include "dcinject/partition.hpp"

#include <algorithm>
#include <stdexcept>
#include <string>

#include <json.hpp>

#include "dcinject/rng.hpp"

namespace dcinject {

namespace {

std::vector<double> dirichlet_draw(Rng& rng, int n, double alpha) {
    std::vector<double> p(n);
    double sum = 0.0;
    for (int i = 0; i < n; ++i) {
        p[i] = rng.gamma(alpha);
        sum += p[i];
    }
    if (sum <= 0.0) {  // all gamma draws underflowed; degenerate but possible at tiny alpha
        for (auto& v : p) v = 1.0 / n;
        return p;
    }
    for (auto& v : p) v /= sum;
    return p;
}

std::vector<std::vector<std::size_t>> try_split(const std::vector<int>& labels,
                                                int n_clients, double alpha,
                                                std::uint64_t seed) {
    int max_label = 0;
    for (int y : labels) max_label = std::max(max_label, y);
    std::vector<std::vector<std::size_t>> by_class(max_label + 1);
    for (std::size_t i = 0; i < labels.size(); ++i) {
        if (labels[i] < 0) throw std::invalid_argument("dirichlet_partition: negative label");
        by_class[labels[i]].push_back(i);
    }

    Rng rng(derive_seed(seed, {0x706172ULL}));
    std::vector<std::vector<std::size_t>> assignments(n_clients);
    for (auto& members : by_class) {
        if (members.empty()) continue;
        rng.shuffle(members);
        const auto p = dirichlet_draw(rng, n_clients, alpha);
        const std::size_t n = members.size();
        double cum = 0.0;
        std::size_t start = 0;
        for (int cl = 0; cl < n_clients; ++cl) {
            cum += p[cl];
            std::size_t end = cl + 1 == n_clients
                                  ? n
                                  : static_cast<std::size_t>(cum * static_cast<double>(n) + 0.5);
            end = std::min(end, n);
            end = std::max(end, start);
            for (std::size_t i = start; i < end; ++i) assignments[cl].push_back(members[i]);
            start = end;
        }
    }
    for (auto& a : assignments) std::sort(a.begin(), a.end());
    return assignments;
}

}  // namespace

PartitionPlan dirichlet_partition(const std::vector<int>& labels, int n_clients,
                                  double alpha_dirichlet, std::uint64_t seed) {
    if (labels.empty()) throw std::invalid_argument("dirichlet_partition: empty labels");
    if (n_clients < 1) throw std::invalid_argument("dirichlet_partition: n_clients must be >= 1");
    if (!(alpha_dirichlet > 0.0)) {
        throw std::invalid_argument("dirichlet_partition: alpha must be positive");
    }
    if (labels.size() < static_cast<std::size_t>(n_clients)) {
        throw std::invalid_argument("dirichlet_partition: fewer samples than clients");
    }

    for (int attempt = 0; attempt < 100; ++attempt) {
        auto assignments = try_split(labels, n_clients, alpha_dirichlet, seed + attempt);
        const bool ok = std::none_of(assignments.begin(), assignments.end(),
                                     [](const auto& a) { return a.empty(); });
        if (ok) {
            PartitionPlan plan;
            plan.assignments = std::move(assignments);
            plan.alpha_dirichlet = alpha_dirichlet;
            plan.seed = seed;
            return plan;
        }
    }
    throw std::runtime_error("dirichlet_partition: could not fill every client in 100 redraws");
}

std::string partition_report_json(const PartitionPlan& plan) {
    nlohmann::ordered_json j;
    j["alpha_dirichlet"] = plan.alpha_dirichlet;
    j["seed"] = plan.seed;
    nlohmann::ordered_json clients = nlohmann::ordered_json::object();
    for (std::size_t cl = 0; cl < plan.assignments.size(); ++cl) {
        clients[std::to_string(cl)] = plan.assignments[cl];
    }
    j["clients"] = clients;
    return j.dump(2);
}

}  // namespace dcinject
