#include "dcinject/trigger.hpp"

#include <cmath>
#include <cstring>
#include <stdexcept>
#include <string>

namespace dcinject {

void TriggerConfig::validate() const {
    if (!(delta >= 0.0 && delta <= 1.0)) {
        throw std::invalid_argument("trigger delta " + std::to_string(delta) +
                                    " outside [0,1]");
    }
    if (!(epsilon >= 0.0) || !std::isfinite(epsilon)) {
        throw std::invalid_argument("trigger epsilon must be finite and nonnegative");
    }
    if (!(band.rho > 0.0 && band.rho <= 1.0)) {
        throw std::invalid_argument("trigger rho outside (0,1]");
    }
    if (!(poison_ratio >= 0.0 && poison_ratio <= 1.0)) {
        throw std::invalid_argument("poison_ratio outside [0,1]");
    }
    if (target_label < 0) {
        throw std::invalid_argument("target_label must be nonnegative");
    }
    if (patch_side < 1) {
        throw std::invalid_argument("patch_side must be positive");
    }
    if (!(patch_value >= 0.0 && patch_value <= 1.0)) {
        throw std::invalid_argument("patch_value outside [0,1]");
    }
}

void TriggerConfig::validate(int n_classes) const {
    validate();
    if (target_label >= n_classes) {
        throw std::invalid_argument("target_label " + std::to_string(target_label) +
                                    " >= n_classes " + std::to_string(n_classes));
    }
}

double default_epsilon(int h, int w) {
    return 0.05 * std::sqrt(static_cast<double>(h) * w);
}

double spectral_mean_mu(const Spectrum& spec, int channel) {
    if (channel < 0 || channel >= spec.channels) {
        throw std::invalid_argument("spectral_mean_mu: channel out of range");
    }
    const std::size_t plane = static_cast<std::size_t>(spec.height) * spec.width;
    const std::complex<double>* p = spec.data.data() + channel * plane;
    double sum = 0.0;
    for (std::size_t i = 0; i < plane; ++i) sum += std::abs(p[i]);
    return sum / static_cast<double>(plane);
}

Spectrum remove_dc(const Spectrum& spec, double delta, const FrequencyBand& band) {
    Spectrum out = spec;
    const auto indices = band_indices(spec.height, spec.width, band);
    for (int ch = 0; ch < spec.channels; ++ch) {
        const double shift = delta * spectral_mean_mu(spec, ch);
        for (const auto& [u, v] : indices) {
            auto& coeff = out.at(ch, u, v);
            coeff = {coeff.real() - shift, coeff.imag()};
        }
    }
    return out;
}

std::vector<double> hvs_weights(int h, int w) {
    if (h < 1 || w < 1) throw std::invalid_argument("hvs_weights: dimensions must be positive");
    const double r0 = static_cast<double>(h < w ? h : w) / 8.0;
    std::vector<double> weights(static_cast<std::size_t>(h) * w);
    for (int u = 0; u < h; ++u) {
        const int uc = u < (h + 1) / 2 ? u : u - h;
        for (int v = 0; v < w; ++v) {
            const int vc = v < (w + 1) / 2 ? v : v - w;
            const double r = std::sqrt(static_cast<double>(uc) * uc +
                                       static_cast<double>(vc) * vc);
            weights[static_cast<std::size_t>(u) * w + v] = 1.0 / (1.0 + r / r0);
        }
    }
    return weights;
}

double texture_scale(const Image& img) {
    const int h = img.height(), w = img.width(), c = img.channels();
    double energy = 0.0;
    std::size_t count = 0;
    for (int ch = 0; ch < c; ++ch) {
        for (int y = 1; y + 1 < h; ++y) {
            for (int x = 1; x + 1 < w; ++x) {
                const double lap = img.at(ch, y - 1, x) + img.at(ch, y + 1, x) +
                                   img.at(ch, y, x - 1) + img.at(ch, y, x + 1) -
                                   4.0 * img.at(ch, y, x);
                energy += lap * lap;
                ++count;
            }
        }
    }
    const double rms = count == 0 ? 0.0 : std::sqrt(energy / static_cast<double>(count));
    return rms / (rms + 0.1) + 0.5;
}

NoiseComponents make_noise_components(int h, int w, const FrequencyBand& band,
                                      const Image& img) {
    NoiseComponents comps;
    comps.height = h;
    comps.width = w;
    comps.m_freq.assign(static_cast<std::size_t>(h) * w, 0.0);
    for (const auto& [u, v] : band_indices(h, w, band)) {
        comps.m_freq[static_cast<std::size_t>(u) * w + v] = 1.0;
    }
    comps.w_hvs = hvs_weights(h, w);
    comps.s = texture_scale(img);
    return comps;
}

Spectrum adaptive_noise(int h, int w, int channels, const TriggerConfig& cfg,
                        const NoiseComponents& comps, Rng& rng) {
    Spectrum noise(h, w, channels);
    const std::size_t plane = static_cast<std::size_t>(h) * w;
    const double scale = cfg.use_scale ? comps.s : 1.0;
    for (int ch = 0; ch < channels; ++ch) {
        for (std::size_t i = 0; i < plane; ++i) {
            const auto [nr, ni] = rng.normal_pair();
            double g = cfg.epsilon * scale;
            if (cfg.use_mfreq) g *= comps.m_freq[i];
            if (cfg.use_whvs) g *= comps.w_hvs[i];
            noise.data[ch * plane + i] = {nr * g, ni * g};
        }
    }
    return noise;
}

namespace {

// Steps: FFT, DC removal, adaptive noise, combine, inverse transform.
InverseResult trigger_pipeline(const Image& img, const TriggerConfig& cfg,
                               std::uint64_t counter) {
    const Spectrum spec = fft2d(img);
    Spectrum modified = remove_dc(spec, cfg.delta, cfg.band);
    if (cfg.epsilon > 0.0) {
        const NoiseComponents comps =
            make_noise_components(img.height(), img.width(), cfg.band, img);
        Rng rng(derive_seed(cfg.seed, {0x7472696767ULL, counter}));
        const Spectrum noise = adaptive_noise(img.height(), img.width(),
                                              img.channels(), cfg, comps, rng);
        for (std::size_t i = 0; i < modified.data.size(); ++i) {
            modified.data[i] += noise.data[i];
        }
    }
    return ifft2d(modified);
}

}  // namespace

Image apply_trigger(const Image& img, const TriggerConfig& cfg, std::uint64_t counter,
                    double* imag_residual) {
    InverseResult inv = trigger_pipeline(img, cfg, counter);
    if (imag_residual) *imag_residual = inv.imag_residual;
    return clip_unit(inv.values);
}

RealGrid apply_trigger_unclipped(const Image& img, const TriggerConfig& cfg,
                                 std::uint64_t counter, double* imag_residual) {
    InverseResult inv = trigger_pipeline(img, cfg, counter);
    if (imag_residual) *imag_residual = inv.imag_residual;
    return std::move(inv.values);
}

std::uint64_t image_noise_counter(const Image& img) {
    std::uint64_t hash = 0xcbf29ce484222325ULL;
    for (double v : img.data()) {
        std::uint64_t bits;
        static_assert(sizeof(bits) == sizeof(v));
        std::memcpy(&bits, &v, sizeof(bits));
        for (int shift = 0; shift < 64; shift += 8) {
            hash ^= (bits >> shift) & 0xff;
            hash *= 0x100000001b3ULL;
        }
    }
    return hash;
}

Image badnet_patch(const Image& img, int patch_side, double value) {
    const int h = img.height(), w = img.width();
    if (patch_side < 1 || patch_side > (h < w ? h : w)) {
        throw std::invalid_argument("badnet_patch: patch_side " + std::to_string(patch_side) +
                                    " exceeds image side");
    }
    if (!(value >= 0.0 && value <= 1.0)) {
        throw std::invalid_argument("badnet_patch: value outside [0,1]");
    }
    std::vector<double> data = img.data();
    for (int ch = 0; ch < img.channels(); ++ch) {
        for (int y = h - patch_side; y < h; ++y) {
            for (int x = w - patch_side; x < w; ++x) {
                data[img.index(ch, y, x)] = value;
            }
        }
    }
    return Image::from_data(h, w, img.channels(), std::move(data));
}

Image triggered_image(const Image& img, const TriggerConfig& cfg, std::uint64_t counter,
                      double* imag_residual) {
    if (cfg.kind == TriggerKind::badnet) {
        if (imag_residual) *imag_residual = 0.0;
        return badnet_patch(img, cfg.patch_side, cfg.patch_value);
    }
    return apply_trigger(img, cfg, counter, imag_residual);
}

}  // namespace dcinject
