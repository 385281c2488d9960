#pragma once

// Test-only oracles and generators. The transform oracle is a direct
// four-loop summation so it shares no code path with the library's
// row-column implementation.

#include <complex>
#include <vector>

#include "dcinject/image.hpp"
#include "dcinject/rng.hpp"
#include "dcinject/spectral.hpp"

namespace testsupport {

inline std::complex<double> unit_phasor(double turns) {
    const double ang = -2.0 * M_PI * turns;
    return {std::cos(ang), std::sin(ang)};
}

/// F(u,v) = sum_{x,y} I(x,y) exp(-2*pi*i*(u*x/H + v*y/W)), one channel.
inline std::vector<std::complex<double>> dft2d_oracle(const dcinject::Image& img,
                                                      int channel) {
    const int h = img.height(), w = img.width();
    std::vector<std::complex<double>> out(static_cast<std::size_t>(h) * w);
    for (int u = 0; u < h; ++u) {
        for (int v = 0; v < w; ++v) {
            std::complex<double> acc(0.0, 0.0);
            for (int x = 0; x < h; ++x) {
                for (int y = 0; y < w; ++y) {
                    acc += img.at(channel, x, y) *
                           unit_phasor(static_cast<double>(u) * x / h +
                                       static_cast<double>(v) * y / w);
                }
            }
            out[static_cast<std::size_t>(u) * w + v] = acc;
        }
    }
    return out;
}

/// Inverse with 1/(H*W) normalization, complex output, one channel.
inline std::vector<std::complex<double>> idft2d_oracle(const dcinject::Spectrum& spec,
                                                       int channel) {
    const int h = spec.height, w = spec.width;
    std::vector<std::complex<double>> out(static_cast<std::size_t>(h) * w);
    for (int x = 0; x < h; ++x) {
        for (int y = 0; y < w; ++y) {
            std::complex<double> acc(0.0, 0.0);
            for (int u = 0; u < h; ++u) {
                for (int v = 0; v < w; ++v) {
                    acc += spec.at(channel, u, v) *
                           std::conj(unit_phasor(static_cast<double>(u) * x / h +
                                                 static_cast<double>(v) * y / w));
                }
            }
            out[static_cast<std::size_t>(x) * w + y] = acc / static_cast<double>(h * w);
        }
    }
    return out;
}

inline dcinject::Image random_image(int h, int w, int c, dcinject::Rng& rng) {
    std::vector<double> data(static_cast<std::size_t>(h) * w * c);
    for (auto& v : data) v = rng.uniform();
    return dcinject::Image::from_data(h, w, c, std::move(data));
}

}  // namespace testsupport
