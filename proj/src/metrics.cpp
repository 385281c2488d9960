#include "dcinject/metrics.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace dcinject {

int predict(const ModelParams& p, const Image& img) {
    const auto probs = forward(p, img);
    int best = 0;
    for (int c = 1; c < static_cast<int>(probs.size()); ++c) {
        if (probs[c] > probs[best]) best = c;
    }
    return best;
}

double accuracy(const ModelParams& p, const LabeledDataset& dataset) {
    if (dataset.images.empty()) throw std::invalid_argument("accuracy: empty dataset");
    std::size_t correct = 0;
    for (std::size_t i = 0; i < dataset.images.size(); ++i) {
        if (predict(p, dataset.images[i]) == dataset.labels[i]) ++correct;
    }
    return static_cast<double>(correct) / static_cast<double>(dataset.images.size());
}

LabeledDataset build_triggered_testset(const LabeledDataset& clean,
                                       const TriggerConfig& cfg) {
    LabeledDataset out;
    out.n_classes = clean.n_classes;
    for (std::size_t i = 0; i < clean.images.size(); ++i) {
        if (clean.labels[i] == cfg.target_label) continue;  // would inflate ASR
        out.images.push_back(
            triggered_image(clean.images[i], cfg, image_noise_counter(clean.images[i])));
        out.labels.push_back(clean.labels[i]);
    }
    return out;
}

double asr_on_triggered(const ModelParams& p, const LabeledDataset& triggered,
                        int target_label) {
    if (triggered.images.empty()) {
        throw std::invalid_argument("asr: no eligible triggered samples");
    }
    std::size_t hits = 0;
    for (const Image& img : triggered.images) {
        if (predict(p, img) == target_label) ++hits;
    }
    return static_cast<double>(hits) / static_cast<double>(triggered.images.size());
}

double asr(const ModelParams& p, const LabeledDataset& clean_test,
           const TriggerConfig& cfg) {
    return asr_on_triggered(p, build_triggered_testset(clean_test, cfg), cfg.target_label);
}

double psnr(const Image& a, const Image& b) {
    if (!a.same_shape(b)) throw std::invalid_argument("psnr: shape mismatch");
    double mse = 0.0;
    for (std::size_t i = 0; i < a.data().size(); ++i) {
        const double d = a.data()[i] - b.data()[i];
        mse += d * d;
    }
    mse /= static_cast<double>(a.data().size());
    if (mse == 0.0) return std::numeric_limits<double>::infinity();
    return 10.0 * std::log10(1.0 / mse);
}

}  // namespace dcinject
