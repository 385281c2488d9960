#pragma once

#include <cstddef>
#include <vector>

namespace dcinject {

/// Unconstrained real grid, channel-major then row-major. Intermediate
/// results (e.g. inverse-transform output) live here before clipping.
struct RealGrid {
    int height = 0;
    int width = 0;
    int channels = 0;
    std::vector<double> data;

    RealGrid() = default;
    RealGrid(int h, int w, int c, double fill = 0.0);

    std::size_t size() const { return data.size(); }
    std::size_t index(int c, int y, int x) const {
        return (static_cast<std::size_t>(c) * height + y) * width + x;
    }
    double at(int c, int y, int x) const { return data[index(c, y, x)]; }
    double& at(int c, int y, int x) { return data[index(c, y, x)]; }
};

/// Spatial-domain sample: channels x height x width reals, every element
/// in [0,1]. Values are immutable after construction; derived images are
/// built through new constructions.
class Image {
public:
    Image(int h, int w, int c, double fill);
    static Image from_data(int h, int w, int c, std::vector<double> data);

    int height() const { return h_; }
    int width() const { return w_; }
    int channels() const { return c_; }
    std::size_t size() const { return data_.size(); }

    std::size_t index(int c, int y, int x) const {
        return (static_cast<std::size_t>(c) * h_ + y) * w_ + x;
    }
    double at(int c, int y, int x) const { return data_[index(c, y, x)]; }
    const std::vector<double>& data() const { return data_; }

    RealGrid to_grid() const;

    bool same_shape(const Image& other) const {
        return h_ == other.h_ && w_ == other.w_ && c_ == other.c_;
    }

private:
    Image() = default;

    int h_ = 0, w_ = 0, c_ = 0;
    std::vector<double> data_;
};

/// Clamp every element to [0,1]. A NaN element signals an upstream
/// numerical fault and throws.
Image clip_unit(const RealGrid& grid);

/// Images of uniform shape with class labels in [0, n_classes).
struct LabeledDataset {
    std::vector<Image> images;
    std::vector<int> labels;
    int n_classes = 0;

    std::size_t size() const { return images.size(); }
    void validate() const;
};

}  // namespace dcinject
