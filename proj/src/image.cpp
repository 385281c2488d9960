#include "dcinject/image.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace dcinject {

namespace {

void check_dims(int h, int w, int c) {
    if (h < 1 || w < 1) {
        throw std::invalid_argument("image dimensions must be positive, got " +
                                    std::to_string(h) + "x" + std::to_string(w));
    }
    if (c != 1 && c != 3) {
        throw std::invalid_argument("channels must be 1 or 3, got " + std::to_string(c));
    }
}

}  // namespace

RealGrid::RealGrid(int h, int w, int c, double fill)
    : height(h), width(w), channels(c),
      data(static_cast<std::size_t>(h) * w * c, fill) {
    check_dims(h, w, c);
}

Image::Image(int h, int w, int c, double fill) : h_(h), w_(w), c_(c) {
    check_dims(h, w, c);
    if (!(fill >= 0.0 && fill <= 1.0)) {
        throw std::invalid_argument("fill value " + std::to_string(fill) +
                                    " outside [0,1]");
    }
    data_.assign(static_cast<std::size_t>(h) * w * c, fill);
}

Image Image::from_data(int h, int w, int c, std::vector<double> data) {
    check_dims(h, w, c);
    const std::size_t expected = static_cast<std::size_t>(h) * w * c;
    if (data.size() != expected) {
        throw std::invalid_argument("data length " + std::to_string(data.size()) +
                                    " does not match shape (" + std::to_string(expected) + ")");
    }
    for (double v : data) {
        if (!(v >= 0.0 && v <= 1.0)) {
            throw std::invalid_argument("pixel value " + std::to_string(v) +
                                        " outside [0,1]");
        }
    }
    Image img;
    img.h_ = h;
    img.w_ = w;
    img.c_ = c;
    img.data_ = std::move(data);
    return img;
}

RealGrid Image::to_grid() const {
    RealGrid g(h_, w_, c_);
    g.data = data_;
    return g;
}

Image clip_unit(const RealGrid& grid) {
    std::vector<double> out(grid.data.size());
    for (std::size_t i = 0; i < grid.data.size(); ++i) {
        const double v = grid.data[i];
        if (std::isnan(v)) {
            throw std::domain_error("clip_unit: NaN at element " + std::to_string(i));
        }
        out[i] = v < 0.0 ? 0.0 : (v > 1.0 ? 1.0 : v);
    }
    return Image::from_data(grid.height, grid.width, grid.channels, std::move(out));
}

void LabeledDataset::validate() const {
    if (images.size() != labels.size()) {
        throw std::invalid_argument("dataset images/labels length mismatch");
    }
    if (n_classes < 2) {
        throw std::invalid_argument("dataset needs at least 2 classes");
    }
    for (std::size_t i = 0; i < labels.size(); ++i) {
        if (labels[i] < 0 || labels[i] >= n_classes) {
            throw std::invalid_argument("label " + std::to_string(labels[i]) +
                                        " at sample " + std::to_string(i) +
                                        " outside [0," + std::to_string(n_classes) + ")");
        }
        if (i > 0 && !images[i].same_shape(images[0])) {
            throw std::invalid_argument("dataset images must share one shape");
        }
    }
}

}  // namespace dcinject
