#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "dcinject/image.hpp"

namespace dcinject {

struct ModelDims {
    int input_dim = 0;
    int hidden_dim = 0;
    int num_classes = 0;

    bool operator==(const ModelDims&) const = default;
};

/// Flatten -> per-feature affine normalization -> dense ReLU hidden layer ->
/// dense output. The normalization pair (scale, shift) is the personal
/// parameter group; everything else is shared across the federation.
struct ModelParams {
    ModelDims dims;
    std::vector<double> norm_scale;  // personal
    std::vector<double> norm_shift;  // personal
    std::vector<double> w1;          // hidden x input, row-major
    std::vector<double> b1;
    std::vector<double> w2;          // classes x hidden, row-major
    std::vector<double> b2;

    /// Glorot-uniform weights, zero biases, identity normalization.
    static ModelParams init(ModelDims dims, std::uint64_t seed);

    bool shape_congruent(const ModelParams& other) const;
};

using Gradients = ModelParams;  // same shapes, holds d(loss)/d(param)

/// Personal group alone, as kept by FedBN-style clients.
struct PersonalParams {
    std::vector<double> norm_scale;
    std::vector<double> norm_shift;
};

PersonalParams personal_of(const ModelParams& p);
void set_personal(ModelParams& p, const PersonalParams& personal);

/// Softmax class probabilities; entries positive, summing to 1.
std::vector<double> forward(const ModelParams& p, const Image& img);

struct LossGrad {
    double loss = 0.0;
    Gradients grad;
};

/// Mixture objective: (1-alpha) * cross-entropy(batch, labels)
///                    + alpha * cross-entropy(triggered batch, target label),
/// each term averaged over its batch, with exact analytic gradients.
LossGrad loss_and_grad(const ModelParams& p,
                       std::span<const Image* const> batch,
                       std::span<const int> labels,
                       std::span<const Image> triggered_batch,
                       int target_label, double alpha_poison);

ModelParams sgd_step(const ModelParams& p, const Gradients& g, double lr);

}  // namespace dcinject
