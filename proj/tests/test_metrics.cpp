#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <limits>

#include "dcinject/metrics.hpp"
#include "dcinject/rng.hpp"
#include "test_support.hpp"

using namespace dcinject;
using testsupport::random_image;

namespace {

// zero weights give uniform outputs, so the tie rule forces class 0
ModelParams uniform_model(int input_dim, int n_classes) {
    ModelParams p = ModelParams::init({input_dim, 2, n_classes}, 0);
    std::fill(p.w1.begin(), p.w1.end(), 0.0);
    std::fill(p.w2.begin(), p.w2.end(), 0.0);
    return p;
}

LabeledDataset constant_label_set(int n, int label, int n_classes) {
    LabeledDataset ds;
    ds.n_classes = n_classes;
    Rng rng(5 + label);
    for (int i = 0; i < n; ++i) {
        ds.images.push_back(random_image(2, 2, 1, rng));
        ds.labels.push_back(label);
    }
    return ds;
}

}  // namespace

TEST_CASE("accuracy on degenerate sets") {
    const ModelParams p = uniform_model(4, 3);
    CHECK(accuracy(p, constant_label_set(10, 0, 3)) == 1.0);
    CHECK(accuracy(p, constant_label_set(10, 1, 3)) == 0.0);

    LabeledDataset mixed = constant_label_set(6, 0, 3);
    const LabeledDataset ones = constant_label_set(4, 1, 3);
    mixed.images.insert(mixed.images.end(), ones.images.begin(), ones.images.end());
    mixed.labels.insert(mixed.labels.end(), ones.labels.begin(), ones.labels.end());
    CHECK(accuracy(p, mixed) == doctest::Approx(0.6).epsilon(1e-12));

    CHECK_THROWS_AS(accuracy(p, LabeledDataset{}), std::invalid_argument);
}

TEST_CASE("asr degenerate cases") {
    TriggerConfig cfg;
    cfg.epsilon = 0.5;
    cfg.seed = 3;

    const LabeledDataset set = constant_label_set(8, 1, 3);
    cfg.target_label = 0;  // uniform model predicts 0 under the tie rule
    CHECK(asr(uniform_model(4, 3), set, cfg) == 1.0);

    cfg.target_label = 2;  // never predicted by the uniform model
    CHECK(asr(uniform_model(4, 3), set, cfg) == 0.0);
}

TEST_CASE("asr excludes samples already labeled with the target") {
    TriggerConfig cfg;
    cfg.epsilon = 0.3;
    cfg.target_label = 0;

    LabeledDataset set = constant_label_set(5, 0, 2);
    const LabeledDataset others = constant_label_set(3, 1, 2);
    set.images.insert(set.images.end(), others.images.begin(), others.images.end());
    set.labels.insert(set.labels.end(), others.labels.begin(), others.labels.end());

    const LabeledDataset triggered = build_triggered_testset(set, cfg);
    CHECK(triggered.images.size() == 3);
    for (int label : triggered.labels) CHECK(label != 0);

    // all-target sets have no eligible samples
    CHECK_THROWS_AS(asr(uniform_model(4, 2), constant_label_set(4, 0, 2), cfg),
                    std::invalid_argument);
}

TEST_CASE("psnr closed forms") {
    const Image a(4, 4, 1, 0.5);
    CHECK(std::isinf(psnr(a, a)));

    const Image b(4, 4, 1, 0.6);
    CHECK(psnr(a, b) == doctest::Approx(20.0).epsilon(1e-9));

    const Image c(4, 4, 1, 0.75);
    CHECK(psnr(a, c) < psnr(a, b));  // larger perturbation, lower PSNR

    CHECK_THROWS_AS(psnr(a, Image(4, 5, 1, 0.5)), std::invalid_argument);
}

TEST_CASE("metrics are invariant under dataset permutation") {
    Rng rng(11);
    LabeledDataset set;
    set.n_classes = 3;
    for (int i = 0; i < 12; ++i) {
        set.images.push_back(random_image(2, 2, 1, rng));
        set.labels.push_back(static_cast<int>(rng.below(3)));
    }
    ModelParams p = ModelParams::init({4, 6, 3}, 21);

    LabeledDataset shuffled = set;
    std::vector<std::size_t> order(set.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    rng.shuffle(order);
    for (std::size_t i = 0; i < order.size(); ++i) {
        shuffled.images[i] = set.images[order[i]];
        shuffled.labels[i] = set.labels[order[i]];
    }
    CHECK(accuracy(p, set) == accuracy(p, shuffled));

    TriggerConfig cfg;
    cfg.epsilon = 0.6;  // noise is content-keyed, so order cannot matter
    cfg.target_label = 1;
    cfg.seed = 4;
    CHECK(asr(p, set, cfg) == asr(p, shuffled, cfg));
}
