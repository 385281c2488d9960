#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <set>

#include "dcinject/spectral.hpp"
#include "test_support.hpp"

using namespace dcinject;
using testsupport::random_image;

namespace {

double max_abs_diff(const std::vector<double>& a, const std::vector<double>& b) {
    double m = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
    return m;
}

}  // namespace

TEST_CASE("single coefficient transform equals the value") {
    const Image img = Image::from_data(1, 1, 1, {0.5});
    const Spectrum spec = fft2d(img);
    CHECK(spec.at(0, 0, 0).real() == doctest::Approx(0.5).epsilon(1e-15));
    CHECK(spec.at(0, 0, 0).imag() == doctest::Approx(0.0).epsilon(1e-15));
}

TEST_CASE("impulse transforms to constant spectrum") {
    const Image img = Image::from_data(2, 2, 1, {1.0, 0.0, 0.0, 0.0});
    const Spectrum spec = fft2d(img);
    for (int u = 0; u < 2; ++u) {
        for (int v = 0; v < 2; ++v) {
            CHECK(std::abs(spec.at(0, u, v) - std::complex<double>(1.0, 0.0)) < 1e-12);
        }
    }
}

TEST_CASE("constant image has only a DC coefficient") {
    const Image img(2, 2, 1, 0.5);
    const Spectrum spec = fft2d(img);
    CHECK(std::abs(spec.at(0, 0, 0) - std::complex<double>(2.0, 0.0)) < 1e-12);
    CHECK(std::abs(spec.at(0, 0, 1)) < 1e-12);
    CHECK(std::abs(spec.at(0, 1, 0)) < 1e-12);
    CHECK(std::abs(spec.at(0, 1, 1)) < 1e-12);
}

TEST_CASE("roundtrip identity on random images") {
    Rng rng(7);
    const int shapes[][3] = {{8, 8, 1}, {13, 7, 3}, {16, 16, 3}, {5, 5, 1}, {1, 9, 1}, {32, 32, 1}};
    for (const auto& s : shapes) {
        const Image img = random_image(s[0], s[1], s[2], rng);
        const InverseResult inv = ifft2d(fft2d(img));
        CHECK(max_abs_diff(inv.values.data, img.data()) < 1e-9);
        CHECK(inv.imag_residual < 1e-12);
    }
}

TEST_CASE("DC-only spectrum is constant") {
    Spectrum spec(2, 2, 1);
    spec.at(0, 0, 0) = {2.0, 0.0};
    const InverseResult inv = ifft2d(spec);
    for (double v : inv.values.data) CHECK(v == doctest::Approx(0.5).epsilon(1e-15));
}

TEST_CASE("non-Hermitian spectrum: real part matches the direct oracle") {
    Rng rng(11);
    Spectrum spec(4, 6, 1);
    for (auto& z : spec.data) z = {rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0)};
    const InverseResult inv = ifft2d(spec);
    const auto oracle = testsupport::idft2d_oracle(spec, 0);
    double imag_mean = 0.0;
    for (std::size_t i = 0; i < oracle.size(); ++i) {
        CHECK(std::abs(inv.values.data[i] - oracle[i].real()) < 1e-10);
        imag_mean += std::abs(oracle[i].imag());
    }
    imag_mean /= static_cast<double>(oracle.size());
    CHECK(inv.imag_residual == doctest::Approx(imag_mean).epsilon(1e-9));
    CHECK(inv.imag_residual > 1e-3);  // genuinely non-Hermitian input
}

TEST_CASE("fft2d agrees with the direct-summation oracle") {
    Rng rng(13);
    for (const auto& s : {std::pair(3, 5), std::pair(8, 8), std::pair(7, 4), std::pair(1, 6)}) {
        const Image img = random_image(s.first, s.second, 1, rng);
        const Spectrum spec = fft2d(img);
        const auto oracle = testsupport::dft2d_oracle(img, 0);
        for (std::size_t i = 0; i < oracle.size(); ++i) {
            CHECK(std::abs(spec.data[i] - oracle[i]) < 1e-8);
        }
    }
}

TEST_CASE("linearity") {
    Rng rng(17);
    const Image x = random_image(6, 9, 1, rng);
    const Image y = random_image(6, 9, 1, rng);
    const double a = 0.7, b = -1.3;
    RealGrid combo(6, 9, 1);
    for (std::size_t i = 0; i < combo.data.size(); ++i) {
        combo.data[i] = a * x.data()[i] + b * y.data()[i];
    }
    const Spectrum fc = fft2d(combo);
    const Spectrum fx = fft2d(x);
    const Spectrum fy = fft2d(y);
    for (std::size_t i = 0; i < fc.data.size(); ++i) {
        CHECK(std::abs(fc.data[i] - (a * fx.data[i] + b * fy.data[i])) < 1e-9);
    }
}

TEST_CASE("Parseval") {
    Rng rng(19);
    const Image img = random_image(12, 10, 3, rng);
    const Spectrum spec = fft2d(img);
    double spatial = 0.0;
    for (double v : img.data()) spatial += v * v;
    double freq = 0.0;
    for (const auto& z : spec.data) freq += std::norm(z);
    freq /= 12.0 * 10.0;
    CHECK(spatial == doctest::Approx(freq).epsilon(1e-9));
}

TEST_CASE("band degenerates to DC at tiny rho") {
    const auto idx = band_indices(2, 2, FrequencyBand(0.01));
    REQUIRE(idx.size() == 1);
    CHECK(idx[0] == std::pair(0, 0));
}

TEST_CASE("full band at rho = 1") {
    CHECK(band_indices(8, 8, FrequencyBand(1.0)).size() == 64);
    CHECK(band_indices(9, 9, FrequencyBand(1.0)).size() == 81);
    // non-square grids: the square band is sized by the smaller side
    CHECK(band_indices(7, 5, FrequencyBand(1.0)).size() == 25);
}

TEST_CASE("band indices match a brute-force shifted enumeration") {
    for (const auto& [h, w, rho] : {std::tuple(8, 8, 0.25), std::tuple(6, 10, 0.4),
                                    std::tuple(5, 5, 0.7), std::tuple(16, 16, 0.125)}) {
        const FrequencyBand band(rho);
        const int r = band_radius(h, w, band);
        // enumerate centered coordinates directly, map back to unshifted
        std::set<std::pair<int, int>> expected;
        for (int uc = -(h / 2); uc <= (h - 1) / 2; ++uc) {
            for (int vc = -(w / 2); vc <= (w - 1) / 2; ++vc) {
                if (std::max(std::abs(uc), std::abs(vc)) <= r) {
                    expected.insert({(uc + h) % h, (vc + w) % w});
                }
            }
        }
        const auto got = band_indices(h, w, band);
        CHECK(got.size() == expected.size());
        for (const auto& uv : got) CHECK(expected.count(uv) == 1);
    }
    // the 8x8, rho=0.25 case is the centered 3x3 block
    CHECK(band_indices(8, 8, FrequencyBand(0.25)).size() == 9);
}

TEST_CASE("band always contains DC and grows with rho") {
    Rng rng(23);
    for (int trial = 0; trial < 30; ++trial) {
        const int h = 1 + static_cast<int>(rng.below(20));
        const int w = 1 + static_cast<int>(rng.below(20));
        std::size_t prev = 0;
        for (double rho : {0.05, 0.2, 0.5, 0.8, 1.0}) {
            const auto idx = band_indices(h, w, FrequencyBand(rho));
            CHECK(std::find(idx.begin(), idx.end(), std::pair(0, 0)) != idx.end());
            CHECK(idx.size() >= prev);
            prev = idx.size();
        }
    }
}

TEST_CASE("band rho validation") {
    CHECK_THROWS_AS(FrequencyBand(0.0), std::invalid_argument);
    CHECK_THROWS_AS(FrequencyBand(1.5), std::invalid_argument);
    CHECK_THROWS_AS(FrequencyBand(-0.2), std::invalid_argument);
}
