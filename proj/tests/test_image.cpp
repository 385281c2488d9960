#include <doctest.h>

#include <cmath>
#include <stdexcept>

#include "dcinject/image.hpp"
#include "dcinject/rng.hpp"

using namespace dcinject;

TEST_CASE("image constructor fills uniformly") {
    const Image a(2, 2, 1, 0.5);
    REQUIRE(a.size() == 4);
    for (double v : a.data()) CHECK(v == 0.5);

    const Image b(1, 1, 1, 0.0);
    CHECK(b.size() == 1);
    CHECK(b.at(0, 0, 0) == 0.0);

    const Image c(2, 2, 3, 1.0);
    REQUIRE(c.size() == 12);
    for (double v : c.data()) CHECK(v == 1.0);
}

TEST_CASE("image constructor rejects bad arguments") {
    CHECK_THROWS_AS(Image(2, 2, 1, 1.5), std::invalid_argument);
    CHECK_THROWS_AS(Image(2, 2, 1, -0.1), std::invalid_argument);
    CHECK_THROWS_AS(Image(0, 2, 1, 0.5), std::invalid_argument);
    CHECK_THROWS_AS(Image(2, 0, 1, 0.5), std::invalid_argument);
    CHECK_THROWS_AS(Image(2, 2, 2, 0.5), std::invalid_argument);
    CHECK_THROWS_AS(Image::from_data(2, 2, 1, {0.1, 0.2, 0.3}), std::invalid_argument);
    CHECK_THROWS_AS(Image::from_data(1, 2, 1, {0.1, 1.2}), std::invalid_argument);
}

TEST_CASE("channel-major layout") {
    // index = (c*H + y)*W + x
    Image img = Image::from_data(2, 2, 1, {0.0, 0.25, 0.5, 0.75});
    CHECK(img.at(0, 0, 0) == 0.0);
    CHECK(img.at(0, 0, 1) == 0.25);
    CHECK(img.at(0, 1, 0) == 0.5);
    CHECK(img.at(0, 1, 1) == 0.75);
}

TEST_CASE("clip_unit clamps and preserves in-range values") {
    RealGrid g(1, 3, 1);
    g.data = {-0.2, 0.5, 1.3};
    const Image clipped = clip_unit(g);
    CHECK(clipped.data() == std::vector<double>{0.0, 0.5, 1.0});

    RealGrid in_range(1, 3, 1);
    in_range.data = {0.0, 0.3, 1.0};
    CHECK(clip_unit(in_range).data() == in_range.data);
}

TEST_CASE("clip_unit rejects NaN") {
    RealGrid g(1, 2, 1);
    g.data = {0.5, std::nan("")};
    CHECK_THROWS_AS(clip_unit(g), std::domain_error);
}

TEST_CASE("clip_unit is idempotent and monotone") {
    Rng rng(42);
    for (int trial = 0; trial < 50; ++trial) {
        const int h = 1 + static_cast<int>(rng.below(6));
        const int w = 1 + static_cast<int>(rng.below(6));
        RealGrid a(h, w, 1), b(h, w, 1);
        for (std::size_t i = 0; i < a.data.size(); ++i) {
            a.data[i] = rng.uniform(-2.0, 3.0);
            b.data[i] = a.data[i] + rng.uniform(0.0, 1.0);  // b >= a elementwise
        }
        const Image ca = clip_unit(a);
        CHECK(clip_unit(ca.to_grid()).data() == ca.data());
        const Image cb = clip_unit(b);
        for (std::size_t i = 0; i < ca.data().size(); ++i) {
            CHECK(ca.data()[i] <= cb.data()[i]);
        }
    }
}

TEST_CASE("dataset validation") {
    LabeledDataset ds;
    ds.images.push_back(Image(2, 2, 1, 0.5));
    ds.labels = {0};
    ds.n_classes = 2;
    CHECK_NOTHROW(ds.validate());

    ds.n_classes = 1;
    CHECK_THROWS_AS(ds.validate(), std::invalid_argument);
    ds.n_classes = 2;
    ds.labels = {2};
    CHECK_THROWS_AS(ds.validate(), std::invalid_argument);
    ds.labels = {0, 1};
    CHECK_THROWS_AS(ds.validate(), std::invalid_argument);
    ds.labels = {0};
    ds.images.push_back(Image(3, 2, 1, 0.5));
    ds.labels.push_back(1);
    CHECK_THROWS_AS(ds.validate(), std::invalid_argument);
}
