#pragma once

#include <complex>
#include <utility>
#include <vector>

#include "dcinject/image.hpp"

namespace dcinject {

/// Per-channel 2D frequency coefficients, same shape metadata and layout
/// as Image (channel-major, row-major planes of H x W).
struct Spectrum {
    int height = 0;
    int width = 0;
    int channels = 0;
    std::vector<std::complex<double>> data;

    Spectrum() = default;
    Spectrum(int h, int w, int c)
        : height(h), width(w), channels(c),
          data(static_cast<std::size_t>(h) * w * c) {}

    std::size_t index(int c, int u, int v) const {
        return (static_cast<std::size_t>(c) * height + u) * width + v;
    }
    std::complex<double> at(int c, int u, int v) const { return data[index(c, u, v)]; }
    std::complex<double>& at(int c, int u, int v) { return data[index(c, u, v)]; }
};

/// Square low-frequency region centered on DC in the shifted spectrum;
/// rho is the fraction of min(H, W) setting its half-side.
struct FrequencyBand {
    double rho = 0.125;

    explicit FrequencyBand(double r);
    FrequencyBand() = default;
};

/// Unnormalized forward transform, per channel:
///   F(u,v) = sum_{x,y} I(x,y) exp(-2*pi*i*(u*x/H + v*y/W))
Spectrum fft2d(const Image& img);
Spectrum fft2d(const RealGrid& grid);

struct InverseResult {
    RealGrid values;       ///< real part of the inverse transform
    double imag_residual;  ///< mean |imag| discarded (nonzero for non-Hermitian input)
};

/// Inverse transform with 1/(H*W) normalization. The input may be
/// non-Hermitian (adaptive noise breaks conjugate symmetry), so the result
/// is genuinely complex; the real part is returned and the discarded
/// imaginary energy is surfaced for diagnostics.
InverseResult ifft2d(const Spectrum& spec);

/// Centered Chebyshev radius of the band: floor(rho * min(h,w) / 2).
int band_radius(int h, int w, const FrequencyBand& band);

/// All (u,v) with max(|u_c|,|v_c|) <= band_radius in centered coordinates,
/// mapped back to unshifted indices, ordered row-major over the unshifted
/// grid. Always contains (0,0).
std::vector<std::pair<int, int>> band_indices(int h, int w, const FrequencyBand& band);

}  // namespace dcinject
