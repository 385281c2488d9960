#include "dcinject/spectral.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

namespace dcinject {

FrequencyBand::FrequencyBand(double r) : rho(r) {
    if (!(r > 0.0 && r <= 1.0)) {
        throw std::invalid_argument("band rho " + std::to_string(r) + " outside (0,1]");
    }
}

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

bool is_pow2(int n) { return n > 0 && (n & (n - 1)) == 0; }

// Iterative radix-2 Cooley-Tukey, in place. sign = -1 forward, +1 inverse.
void fft_pow2(std::vector<std::complex<double>>& a, int sign) {
    const int n = static_cast<int>(a.size());
    for (int i = 1, j = 0; i < n; ++i) {
        int bit = n >> 1;
        for (; j & bit; bit >>= 1) j ^= bit;
        j ^= bit;
        if (i < j) std::swap(a[i], a[j]);
    }
    for (int len = 2; len <= n; len <<= 1) {
        const double ang = sign * kTwoPi / len;
        const std::complex<double> wl(std::cos(ang), std::sin(ang));
        for (int i = 0; i < n; i += len) {
            std::complex<double> w(1.0, 0.0);
            for (int k = 0; k < len / 2; ++k) {
                const std::complex<double> u = a[i + k];
                const std::complex<double> v = a[i + k + len / 2] * w;
                a[i + k] = u + v;
                a[i + k + len / 2] = u - v;
                w *= wl;
            }
        }
    }
}

// Direct O(n^2) transform for general lengths; sizes here are desk-scale.
void dft_direct(std::vector<std::complex<double>>& a, int sign) {
    const int n = static_cast<int>(a.size());
    std::vector<std::complex<double>> twiddle(n);
    for (int k = 0; k < n; ++k) {
        const double ang = sign * kTwoPi * k / n;
        twiddle[k] = {std::cos(ang), std::sin(ang)};
    }
    std::vector<std::complex<double>> out(n);
    for (int u = 0; u < n; ++u) {
        std::complex<double> acc(0.0, 0.0);
        for (int x = 0; x < n; ++x) {
            acc += a[x] * twiddle[static_cast<int>((static_cast<long long>(u) * x) % n)];
        }
        out[u] = acc;
    }
    a = std::move(out);
}

void transform_1d(std::vector<std::complex<double>>& a, int sign) {
    if (a.size() <= 1) return;
    if (is_pow2(static_cast<int>(a.size()))) {
        fft_pow2(a, sign);
    } else {
        dft_direct(a, sign);
    }
}

// Row-column decomposition over one H x W plane.
void transform_plane(std::complex<double>* plane, int h, int w, int sign) {
    std::vector<std::complex<double>> line;
    line.resize(w);
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) line[x] = plane[static_cast<std::size_t>(y) * w + x];
        transform_1d(line, sign);
        for (int x = 0; x < w; ++x) plane[static_cast<std::size_t>(y) * w + x] = line[x];
    }
    line.resize(h);
    for (int x = 0; x < w; ++x) {
        for (int y = 0; y < h; ++y) line[y] = plane[static_cast<std::size_t>(y) * w + x];
        transform_1d(line, sign);
        for (int y = 0; y < h; ++y) plane[static_cast<std::size_t>(y) * w + x] = line[y];
    }
}

Spectrum forward(const int h, const int w, const int c, const std::vector<double>& data) {
    Spectrum spec(h, w, c);
    for (std::size_t i = 0; i < data.size(); ++i) spec.data[i] = {data[i], 0.0};
    const std::size_t plane = static_cast<std::size_t>(h) * w;
    for (int ch = 0; ch < c; ++ch) {
        transform_plane(spec.data.data() + ch * plane, h, w, -1);
    }
    return spec;
}

}  // namespace

Spectrum fft2d(const Image& img) {
    return forward(img.height(), img.width(), img.channels(), img.data());
}

Spectrum fft2d(const RealGrid& grid) {
    return forward(grid.height, grid.width, grid.channels, grid.data);
}

InverseResult ifft2d(const Spectrum& spec) {
    Spectrum work = spec;
    const std::size_t plane = static_cast<std::size_t>(spec.height) * spec.width;
    for (int ch = 0; ch < spec.channels; ++ch) {
        transform_plane(work.data.data() + ch * plane, spec.height, spec.width, +1);
    }
    const double norm = 1.0 / (static_cast<double>(spec.height) * spec.width);
    RealGrid out(spec.height, spec.width, spec.channels);
    double imag_sum = 0.0;
    for (std::size_t i = 0; i < work.data.size(); ++i) {
        out.data[i] = work.data[i].real() * norm;
        imag_sum += std::abs(work.data[i].imag()) * norm;
    }
    return {std::move(out), imag_sum / static_cast<double>(work.data.size())};
}

int band_radius(int h, int w, const FrequencyBand& band) {
    const int m = h < w ? h : w;
    return static_cast<int>(std::floor(band.rho * m / 2.0));
}

std::vector<std::pair<int, int>> band_indices(int h, int w, const FrequencyBand& band) {
    if (h < 1 || w < 1) throw std::invalid_argument("band_indices: dimensions must be positive");
    const int r = band_radius(h, w, band);
    std::vector<std::pair<int, int>> out;
    for (int u = 0; u < h; ++u) {
        const int uc = u < (h + 1) / 2 ? u : u - h;
        if (std::abs(uc) > r) continue;
        for (int v = 0; v < w; ++v) {
            const int vc = v < (w + 1) / 2 ? v : v - w;
            if (std::abs(vc) > r) continue;
            out.emplace_back(u, v);
        }
    }
    return out;
}

}  // namespace dcinject
