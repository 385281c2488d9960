#include "dcinject/flsim.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <future>
#include <numeric>
#include <string>

#include "dcinject/metrics.hpp"
#include "dcinject/rng.hpp"

namespace dcinject {

int FederationConfig::malicious_count() const {
    return static_cast<int>(std::floor(malicious_fraction * n_clients));
}

int FederationConfig::sampled_per_round() const {
    const int m = static_cast<int>(std::floor(sample_fraction * n_clients));
    return m < 1 ? 1 : m;
}

void FederationConfig::validate() const {
    if (n_clients < 1) throw std::invalid_argument("n_clients must be >= 1");
    if (!(malicious_fraction >= 0.0 && malicious_fraction < 1.0)) {
        throw std::invalid_argument("malicious_fraction outside [0,1)");
    }
    if (rounds < 0) throw std::invalid_argument("rounds must be nonnegative");
    if (!(sample_fraction > 0.0 && sample_fraction <= 1.0)) {
        throw std::invalid_argument("sample_fraction outside (0,1]");
    }
    if (local_steps < 0) throw std::invalid_argument("local_steps must be nonnegative");
    if (!(lr > 0.0)) throw std::invalid_argument("lr must be positive");
    if (batch_size < 1) throw std::invalid_argument("batch_size must be >= 1");
    if (hidden_dim < 1) throw std::invalid_argument("hidden_dim must be >= 1");
    trigger.validate();
}

SharedParams shared_of(const ModelParams& p) {
    return {p.dims, p.w1, p.b1, p.w2, p.b2};
}

void set_shared(ModelParams& p, const SharedParams& shared) {
    if (!(p.dims == shared.dims)) throw std::invalid_argument("set_shared: shape mismatch");
    p.w1 = shared.w1;
    p.b1 = shared.b1;
    p.w2 = shared.w2;
    p.b2 = shared.b2;
}

namespace {

std::vector<double> normalized(const std::vector<double>& weights) {
    if (weights.empty()) throw std::invalid_argument("aggregate: empty weights");
    double sum = 0.0;
    for (double w : weights) {
        if (!(w > 0.0)) throw std::invalid_argument("aggregate: weights must be positive");
        sum += w;
    }
    std::vector<double> out(weights.size());
    for (std::size_t i = 0; i < weights.size(); ++i) out[i] = weights[i] / sum;
    return out;
}

void accumulate(std::vector<double>& acc, const std::vector<double>& v, double w) {
    if (acc.size() != v.size()) throw std::invalid_argument("aggregate: shape mismatch");
    for (std::size_t i = 0; i < v.size(); ++i) acc[i] += w * v[i];
}

}  // namespace

SharedParams aggregate(const std::vector<SharedParams>& updates,
                       const std::vector<double>& weights) {
    if (updates.empty()) throw std::invalid_argument("aggregate: no updates");
    if (updates.size() != weights.size()) {
        throw std::invalid_argument("aggregate: updates/weights length mismatch");
    }
    const auto wn = normalized(weights);
    SharedParams out;
    out.dims = updates[0].dims;
    out.w1.assign(updates[0].w1.size(), 0.0);
    out.b1.assign(updates[0].b1.size(), 0.0);
    out.w2.assign(updates[0].w2.size(), 0.0);
    out.b2.assign(updates[0].b2.size(), 0.0);
    for (std::size_t i = 0; i < updates.size(); ++i) {
        if (!(updates[i].dims == out.dims)) {
            throw std::invalid_argument("aggregate: shape mismatch");
        }
        accumulate(out.w1, updates[i].w1, wn[i]);
        accumulate(out.b1, updates[i].b1, wn[i]);
        accumulate(out.w2, updates[i].w2, wn[i]);
        accumulate(out.b2, updates[i].b2, wn[i]);
    }
    return out;
}

PersonalParams aggregate_personal(const std::vector<PersonalParams>& updates,
                                  const std::vector<double>& weights) {
    if (updates.empty()) throw std::invalid_argument("aggregate: no updates");
    if (updates.size() != weights.size()) {
        throw std::invalid_argument("aggregate: updates/weights length mismatch");
    }
    const auto wn = normalized(weights);
    PersonalParams out;
    out.norm_scale.assign(updates[0].norm_scale.size(), 0.0);
    out.norm_shift.assign(updates[0].norm_shift.size(), 0.0);
    for (std::size_t i = 0; i < updates.size(); ++i) {
        accumulate(out.norm_scale, updates[i].norm_scale, wn[i]);
        accumulate(out.norm_shift, updates[i].norm_shift, wn[i]);
    }
    return out;
}

namespace {

struct MiniBatch {
    std::vector<const Image*> images;
    std::vector<int> labels;
    std::vector<std::size_t> indices;
};

MiniBatch draw_batch(const ClientState& client, const LabeledDataset& dataset,
                     int batch_size, Rng& rng) {
    MiniBatch batch;
    batch.images.reserve(batch_size);
    batch.labels.reserve(batch_size);
    batch.indices.reserve(batch_size);
    const std::size_t shard = client.local_indices.size();
    for (int b = 0; b < batch_size; ++b) {
        const std::size_t idx = client.local_indices[rng.below(shard)];
        batch.images.push_back(&dataset.images[idx]);
        batch.labels.push_back(dataset.labels[idx]);
        batch.indices.push_back(idx);
    }
    return batch;
}

void check_shard(const ClientState& client) {
    if (client.local_indices.empty()) {
        throw std::invalid_argument("local_train: client " + std::to_string(client.id) +
                                    " has an empty shard");
    }
}

}  // namespace

LocalUpdate local_train_benign(const ClientState& client, const ModelParams& start,
                               const LabeledDataset& dataset, const LocalTrainOpts& opts,
                               Rng& rng) {
    check_shard(client);
    LocalUpdate update{start};
    for (int step = 0; step < opts.local_steps; ++step) {
        const MiniBatch batch = draw_batch(client, dataset, opts.batch_size, rng);
        const LossGrad lg = loss_and_grad(update.params, batch.images, batch.labels,
                                          {}, 0, 0.0);
        update.params = sgd_step(update.params, lg.grad, opts.lr);
    }
    return update;
}

LocalUpdate local_train_malicious(const ClientState& client, const ModelParams& start,
                                  const LabeledDataset& dataset, const LocalTrainOpts& opts,
                                  const TriggerConfig& trigger, Rng& rng,
                                  TriggerCache* cache, bool freeze_personal) {
    check_shard(client);
    TriggerCache local_cache;
    if (!cache) cache = &local_cache;

    LocalUpdate update{start};
    for (int step = 0; step < opts.local_steps; ++step) {
        const MiniBatch batch = draw_batch(client, dataset, opts.batch_size, rng);
        std::vector<Image> triggered;
        triggered.reserve(batch.indices.size());
        for (std::size_t pos = 0; pos < batch.indices.size(); ++pos) {
            const std::size_t idx = batch.indices[pos];
            auto it = cache->find(idx);
            if (it == cache->end()) {
                double residual = 0.0;
                Image img = triggered_image(*batch.images[pos], trigger,
                                            image_noise_counter(*batch.images[pos]), &residual);
                it = cache->emplace(idx, std::make_pair(std::move(img), residual)).first;
            }
            triggered.push_back(it->second.first);
            update.imag_residual_sum += it->second.second;
            ++update.n_triggered;
        }
        LossGrad lg = loss_and_grad(update.params, batch.images, batch.labels,
                                    triggered, trigger.target_label,
                                    trigger.poison_ratio);
        if (freeze_personal) {
            std::fill(lg.grad.norm_scale.begin(), lg.grad.norm_scale.end(), 0.0);
            std::fill(lg.grad.norm_shift.begin(), lg.grad.norm_shift.end(), 0.0);
        }
        update.params = sgd_step(update.params, lg.grad, opts.lr);
    }
    return update;
}

LocalUpdate local_train(const ClientState& client, const ModelParams& global_params,
                        const LabeledDataset& dataset, const FederationConfig& cfg,
                        int round, TriggerCache* cache) {
    ModelParams start = global_params;
    if (cfg.personalization == Personalization::fedbn) {
        set_personal(start, client.personal);
    }
    Rng rng(derive_seed(cfg.seed, {0x636c69656e74ULL, static_cast<std::uint64_t>(client.id),
                                   static_cast<std::uint64_t>(round)}));
    const LocalTrainOpts opts{cfg.local_steps, cfg.lr, cfg.batch_size};
    if (client.malicious) {
        const bool freeze_personal = cfg.personalization == Personalization::fedbn;
        return local_train_malicious(client, start, dataset, opts, cfg.trigger, rng, cache,
                                     freeze_personal);
    }
    return local_train_benign(client, start, dataset, opts, rng);
}

namespace {

std::vector<int> sample_clients(int n_clients, int count, Rng& rng) {
    std::vector<int> ids(n_clients);
    std::iota(ids.begin(), ids.end(), 0);
    for (int i = 0; i < count; ++i) {
        const std::size_t j = i + rng.below(static_cast<std::uint64_t>(n_clients - i));
        std::swap(ids[i], ids[j]);
    }
    ids.resize(count);
    std::sort(ids.begin(), ids.end());
    return ids;
}

void check_finite(const ModelParams& p, int round) {
    for (const auto* tensor : {&p.norm_scale, &p.norm_shift, &p.w1, &p.b1, &p.w2, &p.b2}) {
        for (double v : *tensor) {
            if (!std::isfinite(v)) {
                throw NumericalFault("non-finite aggregated parameter at round " +
                                     std::to_string(round));
            }
        }
    }
}

}  // namespace

FederationResult run_federation(const FederationConfig& cfg, const PartitionPlan& plan,
                                const LabeledDataset& train, const LabeledDataset& test,
                                const LabeledDataset& triggered_test,
                                const std::function<void(const RoundReport&)>& on_round) {
    cfg.validate();
    train.validate();
    cfg.trigger.validate(train.n_classes);
    if (static_cast<int>(plan.n_clients()) != cfg.n_clients) {
        throw std::invalid_argument("run_federation: partition has " +
                                    std::to_string(plan.n_clients()) + " clients, config wants " +
                                    std::to_string(cfg.n_clients));
    }
    const Image& probe = train.images.at(0);
    const ModelDims dims{probe.height() * probe.width() * probe.channels(),
                         cfg.hidden_dim, train.n_classes};

    FederationResult result;
    result.global = ModelParams::init(dims, derive_seed(cfg.seed, {0x6d6f64656cULL}));

    const int n_malicious = cfg.malicious_count();
    result.clients.resize(cfg.n_clients);
    for (int i = 0; i < cfg.n_clients; ++i) {
        result.clients[i].id = i;
        result.clients[i].malicious = i < n_malicious;
        result.clients[i].local_indices = plan.assignments[i];
        result.clients[i].personal = personal_of(result.global);
    }
    std::vector<TriggerCache> caches(cfg.n_clients);

    for (int round = 0; round < cfg.rounds; ++round) {
        const auto t0 = std::chrono::steady_clock::now();

        Rng sample_rng(derive_seed(cfg.seed, {0x73616d706cULL, static_cast<std::uint64_t>(round)}));
        const std::vector<int> sampled =
            sample_clients(cfg.n_clients, cfg.sampled_per_round(), sample_rng);

        // Clients train on read-only snapshots; updates land in per-client
        // slots so completion order cannot matter.
        std::vector<LocalUpdate> updates(sampled.size());
        {
            std::vector<std::future<void>> futures;
            futures.reserve(sampled.size());
            for (std::size_t s = 0; s < sampled.size(); ++s) {
                futures.push_back(std::async(std::launch::async, [&, s] {
                    const int id = sampled[s];
                    updates[s] = local_train(result.clients[id], result.global, train, cfg,
                                             round, &caches[id]);
                }));
            }
            for (auto& f : futures) f.get();
        }

        std::vector<SharedParams> shared_updates;
        std::vector<double> weights;
        shared_updates.reserve(sampled.size());
        weights.reserve(sampled.size());
        for (std::size_t s = 0; s < sampled.size(); ++s) {
            shared_updates.push_back(shared_of(updates[s].params));
            weights.push_back(static_cast<double>(result.clients[sampled[s]].local_indices.size()));
        }
        set_shared(result.global, aggregate(shared_updates, weights));

        if (cfg.personalization == Personalization::fedbn) {
            for (std::size_t s = 0; s < sampled.size(); ++s) {
                result.clients[sampled[s]].personal = personal_of(updates[s].params);
            }
        } else {
            std::vector<PersonalParams> personals;
            personals.reserve(sampled.size());
            for (const auto& u : updates) personals.push_back(personal_of(u.params));
            set_personal(result.global, aggregate_personal(personals, weights));
        }
        check_finite(result.global, round);

        RoundReport report;
        report.round = round;
        report.sampled = sampled;
        double residual_sum = 0.0;
        std::uint64_t residual_count = 0;
        for (const auto& u : updates) {
            residual_sum += u.imag_residual_sum;
            residual_count += u.n_triggered;
        }
        report.imag_residual = residual_count == 0 ? 0.0 : residual_sum / residual_count;

        if (cfg.personalization == Personalization::fedbn) {
            double acc_sum = 0.0, asr_sum = 0.0;
            ModelParams eval_model = result.global;
            for (const ClientState& client : result.clients) {
                set_personal(eval_model, client.personal);
                acc_sum += accuracy(eval_model, test);
                asr_sum += asr_on_triggered(eval_model, triggered_test,
                                            cfg.trigger.target_label);
            }
            report.clean_acc = acc_sum / cfg.n_clients;
            report.asr = asr_sum / cfg.n_clients;
        } else {
            report.clean_acc = accuracy(result.global, test);
            report.asr = asr_on_triggered(result.global, triggered_test,
                                          cfg.trigger.target_label);
        }

        report.secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        if (on_round) on_round(report);
        result.reports.push_back(std::move(report));
    }
    return result;
}

}  // namespace dcinject
