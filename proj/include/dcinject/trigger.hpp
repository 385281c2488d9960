#pragma once

#include <cstdint>
#include <vector>

#include "dcinject/image.hpp"
#include "dcinject/rng.hpp"
#include "dcinject/spectral.hpp"

namespace dcinject {

class Rng;

enum class TriggerKind { dcinject, badnet };

/// Attack hyperparameters. delta scales the DC-component removal, epsilon
/// is the Gaussian noise standard deviation per frequency coefficient, and
/// the three toggles switch the noise modulation components on and off.
struct TriggerConfig {
    TriggerKind kind = TriggerKind::dcinject;
    double delta = 0.5;
    double epsilon = 0.0;
    FrequencyBand band{0.125};
    bool use_mfreq = true;
    bool use_whvs = true;
    bool use_scale = true;
    int target_label = 0;
    double poison_ratio = 0.5;  // alpha in the poisoned local objective
    std::uint64_t seed = 0;
    int patch_side = 3;         // badnet baseline geometry
    double patch_value = 1.0;

    void validate() const;
    void validate(int n_classes) const;
};

/// Default noise scale: spatial-domain noise std of roughly 0.05 once the
/// inverse transform's 1/(H*W) normalization is applied.
double default_epsilon(int h, int w);

/// Noise modulation: band indicator mask, perceptual weights, texture scalar.
struct NoiseComponents {
    int height = 0;
    int width = 0;
    std::vector<double> m_freq;  // H x W in {0,1}, indicator of the band
    std::vector<double> w_hvs;   // H x W in (0,1], 1 at DC, radially nonincreasing
    double s = 1.0;              // per-image texture scalar
};

/// Mean magnitude |F(u,v)| over all coefficients of one channel.
double spectral_mean_mu(const Spectrum& spec, int channel = 0);

/// Subtract delta * mu(channel) from the real part of every coefficient in
/// the band, channel by channel; coefficients outside the band untouched.
Spectrum remove_dc(const Spectrum& spec, double delta, const FrequencyBand& band);

/// Inverse-radial perceptual weights w(u,v) = 1 / (1 + r/r0) with
/// r0 = min(h,w)/8, indexed over the unshifted grid. Exactly 1 at DC.
std::vector<double> hvs_weights(int h, int w);

/// Texture scalar in [0.5, 1.5): RMS discrete-Laplacian energy over interior
/// pixels, mapped through s -> s/(s + 0.1) + 0.5. Flat images give 0.5.
double texture_scale(const Image& img);

NoiseComponents make_noise_components(int h, int w, const FrequencyBand& band,
                                      const Image& img);

/// Complex Gaussian noise, std epsilon per plane, modulated by whichever of
/// m_freq / w_hvs / s the config enables. Draw order is channel-major then
/// row-major, one Box-Muller pair (real, imag) per coefficient.
Spectrum adaptive_noise(int h, int w, int channels, const TriggerConfig& cfg,
                        const NoiseComponents& comps, Rng& rng);

/// Full frequency-domain trigger pipeline: FFT, DC removal, adaptive noise,
/// inverse transform, clip. Deterministic given (img, cfg, counter); the
/// counter selects the per-image noise stream.
Image apply_trigger(const Image& img, const TriggerConfig& cfg, std::uint64_t counter,
                    double* imag_residual = nullptr);

/// Same pipeline without the final clip, for spectral-support diagnostics.
RealGrid apply_trigger_unclipped(const Image& img, const TriggerConfig& cfg,
                                 std::uint64_t counter, double* imag_residual = nullptr);

/// Content-keyed noise counter (FNV-1a over the raw pixel bytes), so a
/// sample's trigger does not depend on its position in a dataset.
std::uint64_t image_noise_counter(const Image& img);

/// Spatial baseline: bottom-right patch_side x patch_side block of every
/// channel set to value.
Image badnet_patch(const Image& img, int patch_side, double value);

/// Dispatch on cfg.kind: the frequency-domain pipeline or the patch baseline.
Image triggered_image(const Image& img, const TriggerConfig& cfg, std::uint64_t counter,
                      double* imag_residual = nullptr);

}  // namespace dcinject
