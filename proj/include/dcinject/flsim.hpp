#pragma once

#include <cstdint>
#include <functional>
#include <stdexcept>
#include <unordered_map>
#include <utility>
#include <vector>

#include "dcinject/image.hpp"
#include "dcinject/nn.hpp"
#include "dcinject/partition.hpp"
#include "dcinject/trigger.hpp"

namespace dcinject {

/// Raised when aggregation produces a non-finite parameter; the CLI maps
/// this to its numerical-fault exit code.
class NumericalFault : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

enum class Personalization { none, fedbn };

struct FederationConfig {
    int n_clients = 20;
    double malicious_fraction = 0.1;  // beta; the first floor(beta*N) clients are malicious
    int rounds = 50;
    double sample_fraction = 0.5;
    int local_steps = 15;
    double lr = 0.1;
    int batch_size = 32;
    Personalization personalization = Personalization::fedbn;
    int hidden_dim = 64;
    TriggerConfig trigger;
    std::uint64_t seed = 0;

    int malicious_count() const;
    int sampled_per_round() const;
    void validate() const;
};

struct ClientState {
    int id = 0;
    bool malicious = false;
    std::vector<std::size_t> local_indices;
    PersonalParams personal;
};

struct RoundReport {
    int round = 0;
    std::vector<int> sampled;
    double clean_acc = 0.0;
    double asr = 0.0;
    double imag_residual = 0.0;  // mean over this round's trigger applications
    double secs = 0.0;
};

struct LocalTrainOpts {
    int local_steps = 15;
    double lr = 0.1;
    int batch_size = 32;
};

/// Shared parameter group exchanged with the server.
struct SharedParams {
    ModelDims dims;
    std::vector<double> w1, b1, w2, b2;
};

SharedParams shared_of(const ModelParams& p);
void set_shared(ModelParams& p, const SharedParams& shared);

/// Weighted FedAvg mean; weights are normalized to sum 1.
SharedParams aggregate(const std::vector<SharedParams>& updates,
                       const std::vector<double>& weights);
PersonalParams aggregate_personal(const std::vector<PersonalParams>& updates,
                                  const std::vector<double>& weights);

/// Triggered images computed once per (dataset index); the trigger is
/// deterministic in the sample index so reuse is exact.
using TriggerCache = std::unordered_map<std::size_t, std::pair<Image, double>>;

struct LocalUpdate {
    ModelParams params;
    double imag_residual_sum = 0.0;
    std::uint64_t n_triggered = 0;
};

/// Benign local objective: plain cross-entropy minibatch SGD. Takes no
/// trigger configuration at all, so no attack state can leak in.
LocalUpdate local_train_benign(const ClientState& client, const ModelParams& start,
                               const LabeledDataset& dataset, const LocalTrainOpts& opts,
                               Rng& rng);

/// Malicious local objective: each step's minibatch is paired with its
/// triggered copies and trained on the poison-ratio mixture. With
/// freeze_personal the attacker pins its personal normalization group, so
/// trigger fitting cannot drain into parameters that never leave the client;
/// the round dispatcher sets this in fedbn mode.
LocalUpdate local_train_malicious(const ClientState& client, const ModelParams& start,
                                  const LabeledDataset& dataset, const LocalTrainOpts& opts,
                                  const TriggerConfig& trigger, Rng& rng,
                                  TriggerCache* cache = nullptr, bool freeze_personal = false);

/// Round entry point: merges personal parameters in fedbn mode, derives the
/// client's rng stream from (seed, client id, round) and dispatches on the
/// malicious flag.
LocalUpdate local_train(const ClientState& client, const ModelParams& global_params,
                        const LabeledDataset& dataset, const FederationConfig& cfg,
                        int round, TriggerCache* cache = nullptr);

struct FederationResult {
    std::vector<RoundReport> reports;
    ModelParams global;
    std::vector<ClientState> clients;
};

/// Runs the federation: per round, sample clients, train them in parallel,
/// aggregate shared parameters, evaluate. In fedbn mode evaluation pairs the
/// global shared parameters with each client's personal group and averages
/// over clients. Deterministic given config and seed.
FederationResult run_federation(const FederationConfig& cfg, const PartitionPlan& plan,
                                const LabeledDataset& train, const LabeledDataset& test,
                                const LabeledDataset& triggered_test,
                                const std::function<void(const RoundReport&)>& on_round = {});

}  // namespace dcinject
