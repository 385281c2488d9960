#include "dcinject/nn.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "dcinject/rng.hpp"

namespace dcinject {

ModelParams ModelParams::init(ModelDims dims, std::uint64_t seed) {
    if (dims.input_dim < 1 || dims.hidden_dim < 1 || dims.num_classes < 2) {
        throw std::invalid_argument("ModelParams::init: bad dimensions");
    }
    ModelParams p;
    p.dims = dims;
    p.norm_scale.assign(dims.input_dim, 1.0);
    p.norm_shift.assign(dims.input_dim, 0.0);
    p.w1.resize(static_cast<std::size_t>(dims.hidden_dim) * dims.input_dim);
    p.b1.assign(dims.hidden_dim, 0.0);
    p.w2.resize(static_cast<std::size_t>(dims.num_classes) * dims.hidden_dim);
    p.b2.assign(dims.num_classes, 0.0);

    Rng rng(derive_seed(seed, {0x696e6974ULL}));
    const double lim1 = std::sqrt(6.0 / (dims.input_dim + dims.hidden_dim));
    for (auto& w : p.w1) w = rng.uniform(-lim1, lim1);
    const double lim2 = std::sqrt(6.0 / (dims.hidden_dim + dims.num_classes));
    for (auto& w : p.w2) w = rng.uniform(-lim2, lim2);
    return p;
}

bool ModelParams::shape_congruent(const ModelParams& other) const {
    return dims == other.dims && norm_scale.size() == other.norm_scale.size() &&
           norm_shift.size() == other.norm_shift.size() && w1.size() == other.w1.size() &&
           b1.size() == other.b1.size() && w2.size() == other.w2.size() &&
           b2.size() == other.b2.size();
}

PersonalParams personal_of(const ModelParams& p) {
    return {p.norm_scale, p.norm_shift};
}

void set_personal(ModelParams& p, const PersonalParams& personal) {
    if (personal.norm_scale.size() != p.norm_scale.size() ||
        personal.norm_shift.size() != p.norm_shift.size()) {
        throw std::invalid_argument("set_personal: shape mismatch");
    }
    p.norm_scale = personal.norm_scale;
    p.norm_shift = personal.norm_shift;
}

namespace {

struct ForwardTrace {
    std::vector<double> x;       // flattened input
    std::vector<double> z;       // normalized input
    std::vector<double> h_pre;   // hidden preactivation
    std::vector<double> h;       // ReLU output
    std::vector<double> probs;   // softmax
};

void forward_trace(const ModelParams& p, const Image& img, ForwardTrace& t) {
    const int d = p.dims.input_dim, hd = p.dims.hidden_dim, k = p.dims.num_classes;
    if (static_cast<int>(img.size()) != d) {
        throw std::invalid_argument("forward: image size " + std::to_string(img.size()) +
                                    " does not match input_dim " + std::to_string(d));
    }
    t.x.assign(img.data().begin(), img.data().end());
    t.z.resize(d);
    for (int i = 0; i < d; ++i) t.z[i] = p.norm_scale[i] * t.x[i] + p.norm_shift[i];

    t.h_pre.assign(hd, 0.0);
    for (int j = 0; j < hd; ++j) {
        const double* row = p.w1.data() + static_cast<std::size_t>(j) * d;
        double acc = p.b1[j];
        for (int i = 0; i < d; ++i) acc += row[i] * t.z[i];
        t.h_pre[j] = acc;
    }
    t.h.resize(hd);
    for (int j = 0; j < hd; ++j) t.h[j] = t.h_pre[j] > 0.0 ? t.h_pre[j] : 0.0;

    std::vector<double> logits(k);
    for (int c = 0; c < k; ++c) {
        const double* row = p.w2.data() + static_cast<std::size_t>(c) * hd;
        double acc = p.b2[c];
        for (int j = 0; j < hd; ++j) acc += row[j] * t.h[j];
        logits[c] = acc;
    }
    const double m = *std::max_element(logits.begin(), logits.end());
    double sum = 0.0;
    t.probs.resize(k);
    for (int c = 0; c < k; ++c) {
        t.probs[c] = std::exp(logits[c] - m);
        sum += t.probs[c];
    }
    for (int c = 0; c < k; ++c) t.probs[c] /= sum;
}

Gradients zero_like(const ModelParams& p) {
    Gradients g;
    g.dims = p.dims;
    g.norm_scale.assign(p.norm_scale.size(), 0.0);
    g.norm_shift.assign(p.norm_shift.size(), 0.0);
    g.w1.assign(p.w1.size(), 0.0);
    g.b1.assign(p.b1.size(), 0.0);
    g.w2.assign(p.w2.size(), 0.0);
    g.b2.assign(p.b2.size(), 0.0);
    return g;
}

// Accumulates weight * d(cross-entropy(img, label))/d(params) into g and
// returns the sample's cross-entropy. Standard backprop through the
// softmax, output layer, ReLU and input normalization.
double backward_sample(const ModelParams& p, const Image& img, int label, double weight,
                       ForwardTrace& t, Gradients& g) {
    const int d = p.dims.input_dim, hd = p.dims.hidden_dim, k = p.dims.num_classes;
    forward_trace(p, img, t);

    const double prob = std::max(t.probs[label], 1e-300);
    const double loss = -std::log(prob);

    std::vector<double> dlogits(k);
    for (int c = 0; c < k; ++c) dlogits[c] = (t.probs[c] - (c == label ? 1.0 : 0.0)) * weight;

    std::vector<double> dh(hd, 0.0);
    for (int c = 0; c < k; ++c) {
        double* grow = g.w2.data() + static_cast<std::size_t>(c) * hd;
        const double* row = p.w2.data() + static_cast<std::size_t>(c) * hd;
        const double dl = dlogits[c];
        for (int j = 0; j < hd; ++j) {
            grow[j] += dl * t.h[j];
            dh[j] += dl * row[j];
        }
        g.b2[c] += dl;
    }

    for (int j = 0; j < hd; ++j) {
        if (t.h_pre[j] <= 0.0) continue;  // ReLU gate
        const double dj = dh[j];
        double* grow = g.w1.data() + static_cast<std::size_t>(j) * d;
        const double* row = p.w1.data() + static_cast<std::size_t>(j) * d;
        for (int i = 0; i < d; ++i) {
            grow[i] += dj * t.z[i];
            const double dz = dj * row[i];
            g.norm_scale[i] += dz * t.x[i];
            g.norm_shift[i] += dz;
        }
        g.b1[j] += dj;
    }
    return loss;
}

}  // namespace

std::vector<double> forward(const ModelParams& p, const Image& img) {
    ForwardTrace t;
    forward_trace(p, img, t);
    return t.probs;
}

LossGrad loss_and_grad(const ModelParams& p,
                       std::span<const Image* const> batch,
                       std::span<const int> labels,
                       std::span<const Image> triggered_batch,
                       int target_label, double alpha_poison) {
    if (!(alpha_poison >= 0.0 && alpha_poison <= 1.0)) {
        throw std::invalid_argument("loss_and_grad: alpha_poison outside [0,1]");
    }
    if (alpha_poison < 1.0 && batch.empty()) {
        throw std::invalid_argument("loss_and_grad: empty clean batch");
    }
    if (batch.size() != labels.size()) {
        throw std::invalid_argument("loss_and_grad: batch/labels length mismatch");
    }
    if (alpha_poison > 0.0) {
        if (triggered_batch.empty()) {
            throw std::invalid_argument("loss_and_grad: alpha_poison > 0 with empty triggered batch");
        }
        if (target_label < 0 || target_label >= p.dims.num_classes) {
            throw std::invalid_argument("loss_and_grad: target_label out of range");
        }
    }

    LossGrad out;
    out.grad = zero_like(p);
    ForwardTrace t;

    if (alpha_poison < 1.0) {
        const double w = (1.0 - alpha_poison) / static_cast<double>(batch.size());
        double clean_loss = 0.0;
        for (std::size_t i = 0; i < batch.size(); ++i) {
            clean_loss += backward_sample(p, *batch[i], labels[i], w, t, out.grad);
        }
        out.loss += (1.0 - alpha_poison) * clean_loss / static_cast<double>(batch.size());
    }
    if (alpha_poison > 0.0) {
        const double w = alpha_poison / static_cast<double>(triggered_batch.size());
        double trig_loss = 0.0;
        for (const Image& img : triggered_batch) {
            trig_loss += backward_sample(p, img, target_label, w, t, out.grad);
        }
        out.loss += alpha_poison * trig_loss / static_cast<double>(triggered_batch.size());
    }
    return out;
}

ModelParams sgd_step(const ModelParams& p, const Gradients& g, double lr) {
    if (!p.shape_congruent(g)) {
        throw std::invalid_argument("sgd_step: gradient shape mismatch");
    }
    ModelParams out = p;
    auto axpy = [lr](std::vector<double>& dst, const std::vector<double>& grad) {
        for (std::size_t i = 0; i < dst.size(); ++i) dst[i] -= lr * grad[i];
    };
    axpy(out.norm_scale, g.norm_scale);
    axpy(out.norm_shift, g.norm_shift);
    axpy(out.w1, g.w1);
    axpy(out.b1, g.b1);
    axpy(out.w2, g.w2);
    axpy(out.b2, g.b2);
    return out;
}

}  // namespace dcinject
