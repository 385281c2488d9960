#pragma once

#include "dcinject/image.hpp"
#include "dcinject/nn.hpp"
#include "dcinject/trigger.hpp"

namespace dcinject {

struct EvalResult {
    double clean_acc = 0.0;
    double asr = 0.0;
    int n_clean = 0;
    int n_triggered = 0;
    double psnr_db = 0.0;
};

/// Argmax class with ties broken by lowest index.
int predict(const ModelParams& p, const Image& img);

/// Fraction of argmax predictions equal to labels.
double accuracy(const ModelParams& p, const LabeledDataset& dataset);

/// Triggered copies of every sample whose label differs from the target;
/// labels keep their original values so reports stay interpretable. The
/// per-image noise counter is the sample's index in the clean set.
LabeledDataset build_triggered_testset(const LabeledDataset& clean,
                                       const TriggerConfig& cfg);

/// Fraction of a triggered set predicted as the target label.
double asr_on_triggered(const ModelParams& p, const LabeledDataset& triggered,
                        int target_label);

/// Attack success rate: triggers every eligible sample of the clean set and
/// measures how often the model outputs the target label.
double asr(const ModelParams& p, const LabeledDataset& clean_test,
           const TriggerConfig& cfg);

/// Peak signal-to-noise ratio in dB against a unit dynamic range;
/// +infinity for identical images.
double psnr(const Image& a, const Image& b);

}  // namespace dcinject
