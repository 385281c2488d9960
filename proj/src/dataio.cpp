#include "dcinject/dataio.hpp"

#include <cmath>
#include <cstring>
#include <fstream>

#include "dcinject/rng.hpp"

namespace dcinject {

namespace {

void put_u32le(std::vector<std::uint8_t>& out, std::uint32_t v) {
    out.push_back(static_cast<std::uint8_t>(v & 0xff));
    out.push_back(static_cast<std::uint8_t>((v >> 8) & 0xff));
    out.push_back(static_cast<std::uint8_t>((v >> 16) & 0xff));
    out.push_back(static_cast<std::uint8_t>((v >> 24) & 0xff));
}

void put_f32le(std::vector<std::uint8_t>& out, float v) {
    std::uint32_t bits;
    std::memcpy(&bits, &v, 4);
    put_u32le(out, bits);
}

class Reader {
public:
    explicit Reader(std::span<const std::uint8_t> bytes) : bytes_(bytes) {}

    std::size_t offset() const { return pos_; }
    std::size_t remaining() const { return bytes_.size() - pos_; }

    std::uint32_t u32le(const char* field) {
        if (remaining() < 4) {
            throw ParseError(std::string("truncated file while reading ") + field, pos_);
        }
        const std::uint32_t v = static_cast<std::uint32_t>(bytes_[pos_]) |
                                (static_cast<std::uint32_t>(bytes_[pos_ + 1]) << 8) |
                                (static_cast<std::uint32_t>(bytes_[pos_ + 2]) << 16) |
                                (static_cast<std::uint32_t>(bytes_[pos_ + 3]) << 24);
        pos_ += 4;
        return v;
    }

    float f32le(const char* field) {
        const std::uint32_t bits = u32le(field);
        float v;
        std::memcpy(&v, &bits, 4);
        return v;
    }

    void expect_magic(const char (&magic)[8], const char* what) {
        if (remaining() < 8) throw ParseError(std::string("truncated ") + what + " magic", pos_);
        if (std::memcmp(bytes_.data() + pos_, magic, 8) != 0) {
            throw ParseError(std::string("bad ") + what + " magic", pos_);
        }
        pos_ += 8;
    }

private:
    std::span<const std::uint8_t> bytes_;
    std::size_t pos_ = 0;
};

std::vector<std::uint8_t> read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open " + path);
    std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                    std::istreambuf_iterator<char>());
    return bytes;
}

void write_file(const std::string& path, const std::vector<std::uint8_t>& bytes) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + path);
    out.write(reinterpret_cast<const char*>(bytes.data()),
              static_cast<std::streamsize>(bytes.size()));
    if (!out) throw std::runtime_error("write failed for " + path);
}

double quantize_f32(double v) { return static_cast<double>(static_cast<float>(v)); }

}  // namespace

LabeledDataset synth_dataset(int n_per_class, int n_classes, int h, int w, int c,
                             std::uint64_t seed) {
    if (n_per_class < 1 || n_classes < 1 || h < 1 || w < 1 || (c != 1 && c != 3)) {
        throw std::invalid_argument("synth_dataset: bad parameters");
    }

    // Distinct primary frequency per class keeps classes linearly separable;
    // extra random low-frequency components and phases vary the texture.
    // Frequencies sit at Chebyshev radius >= 2 so class identity does not
    // ride on the lowest-frequency coefficients.
    static const int kFreqs[][2] = {{0, 2}, {2, 0}, {2, 2}, {1, 2}, {2, 1}, {0, 3},
                                    {3, 0}, {1, 3}, {3, 1}, {2, 3}, {3, 2}, {3, 3}};
    const int n_freqs = static_cast<int>(sizeof(kFreqs) / sizeof(kFreqs[0]));

    LabeledDataset ds;
    ds.n_classes = n_classes;
    for (int k = 0; k < n_classes; ++k) {
        Rng class_rng(derive_seed(seed, {0x636c73ULL, static_cast<std::uint64_t>(k)}));
        const int* primary = kFreqs[k % n_freqs];
        const double phase = class_rng.uniform(0.0, 2.0 * M_PI);
        struct Component { double fx, fy, amp, phase; };
        std::vector<Component> comps;
        comps.push_back({static_cast<double>(primary[0]), static_cast<double>(primary[1]),
                         0.22, phase});
        for (int extra = 0; extra < 2; ++extra) {
            const int* f = kFreqs[class_rng.below(n_freqs)];
            comps.push_back({static_cast<double>(f[0]), static_cast<double>(f[1]),
                             class_rng.uniform(0.03, 0.08),
                             class_rng.uniform(0.0, 2.0 * M_PI)});
        }

        RealGrid base(h, w, c);
        for (int ch = 0; ch < c; ++ch) {
            const double ch_shift = c == 1 ? 0.0 : class_rng.uniform(-0.05, 0.05);
            for (int y = 0; y < h; ++y) {
                for (int x = 0; x < w; ++x) {
                    double v = 0.5 + ch_shift;
                    for (const auto& comp : comps) {
                        v += comp.amp * std::cos(2.0 * M_PI * (comp.fx * y / h + comp.fy * x / w) +
                                                 comp.phase);
                    }
                    base.at(ch, y, x) = v;
                }
            }
        }

        for (int i = 0; i < n_per_class; ++i) {
            Rng img_rng(derive_seed(seed, {0x696d67ULL, static_cast<std::uint64_t>(k),
                                           static_cast<std::uint64_t>(i)}));
            RealGrid g = base;
            for (auto& v : g.data) {
                v += 0.1 * img_rng.normal();
                v = v < 0.0 ? 0.0 : (v > 1.0 ? 1.0 : v);
                v = quantize_f32(v);
            }
            ds.images.push_back(Image::from_data(h, w, c, std::move(g.data)));
            ds.labels.push_back(k);
        }
    }
    return ds;
}

std::pair<LabeledDataset, LabeledDataset> synth_split(int n_train_per_class,
                                                      int n_test_per_class, int n_classes,
                                                      int h, int w, int c,
                                                      std::uint64_t seed) {
    if (n_train_per_class < 1 || n_test_per_class < 1) {
        throw std::invalid_argument("synth_split: per-class counts must be >= 1");
    }
    const int total = n_train_per_class + n_test_per_class;
    const LabeledDataset all = synth_dataset(total, n_classes, h, w, c, seed);
    LabeledDataset train, test;
    train.n_classes = test.n_classes = n_classes;
    for (int k = 0; k < n_classes; ++k) {
        for (int i = 0; i < total; ++i) {
            const std::size_t idx = static_cast<std::size_t>(k) * total + i;
            LabeledDataset& dst = i < n_train_per_class ? train : test;
            dst.images.push_back(all.images[idx]);
            dst.labels.push_back(all.labels[idx]);
        }
    }
    return {std::move(train), std::move(test)};
}

std::vector<std::uint8_t> serialize_dataset(const LabeledDataset& dataset) {
    dataset.validate();
    const Image* first = dataset.images.empty() ? nullptr : &dataset.images[0];
    const std::uint32_t h = first ? static_cast<std::uint32_t>(first->height()) : 1;
    const std::uint32_t w = first ? static_cast<std::uint32_t>(first->width()) : 1;
    const std::uint32_t c = first ? static_cast<std::uint32_t>(first->channels()) : 1;

    std::vector<std::uint8_t> out;
    out.reserve(28 + dataset.size() * (4 + static_cast<std::size_t>(h) * w * c * 4));
    out.insert(out.end(), kDatasetMagic, kDatasetMagic + 8);
    put_u32le(out, static_cast<std::uint32_t>(dataset.size()));
    put_u32le(out, h);
    put_u32le(out, w);
    put_u32le(out, c);
    put_u32le(out, static_cast<std::uint32_t>(dataset.n_classes));
    for (int label : dataset.labels) put_u32le(out, static_cast<std::uint32_t>(label));
    for (const Image& img : dataset.images) {
        for (double v : img.data()) put_f32le(out, static_cast<float>(v));
    }
    return out;
}

void save_dataset(const LabeledDataset& dataset, const std::string& path) {
    write_file(path, serialize_dataset(dataset));
}

LabeledDataset parse_dataset(std::span<const std::uint8_t> bytes) {
    Reader r(bytes);
    r.expect_magic(kDatasetMagic, "dataset");
    const std::uint32_t n_samples = r.u32le("n_samples");
    const std::uint32_t h = r.u32le("height");
    const std::uint32_t w = r.u32le("width");
    const std::uint32_t c = r.u32le("channels");
    const std::uint32_t n_classes = r.u32le("n_classes");

    if (h < 1 || w < 1) throw ParseError("zero image dimension", 12);
    if (c != 1 && c != 3) throw ParseError("channels must be 1 or 3", 20);
    if (n_classes < 2) throw ParseError("n_classes must be >= 2", 24);

    // Overflow-safe size accounting before any allocation.
    const std::uint64_t pixels_per_sample = static_cast<std::uint64_t>(h) * w * c;
    if (pixels_per_sample > (1ULL << 32)) throw ParseError("image shape too large", 12);
    const std::uint64_t body = static_cast<std::uint64_t>(n_samples) * (4 + pixels_per_sample * 4);
    if (body != r.remaining()) {
        throw ParseError("declared sizes do not match file length (expected " +
                             std::to_string(body + 28) + " bytes, have " +
                             std::to_string(bytes.size()) + ")",
                         r.offset());
    }

    LabeledDataset ds;
    ds.n_classes = static_cast<int>(n_classes);
    ds.labels.reserve(n_samples);
    for (std::uint32_t i = 0; i < n_samples; ++i) {
        const std::uint32_t label = r.u32le("label");
        if (label >= n_classes) {
            throw ParseError("label " + std::to_string(label) + " >= n_classes " +
                                 std::to_string(n_classes),
                             r.offset() - 4);
        }
        ds.labels.push_back(static_cast<int>(label));
    }
    ds.images.reserve(n_samples);
    std::vector<double> pixels(pixels_per_sample);
    for (std::uint32_t i = 0; i < n_samples; ++i) {
        for (std::uint64_t j = 0; j < pixels_per_sample; ++j) {
            const float v = r.f32le("pixel");
            if (!(v >= 0.0f && v <= 1.0f)) {  // also rejects NaN
                throw ParseError("pixel value outside [0,1] in sample " + std::to_string(i),
                                 r.offset() - 4);
            }
            pixels[j] = static_cast<double>(v);
        }
        ds.images.push_back(Image::from_data(static_cast<int>(h), static_cast<int>(w),
                                             static_cast<int>(c), pixels));
    }
    return ds;
}

LabeledDataset load_dataset(const std::string& path) {
    const auto bytes = read_file(path);
    return parse_dataset(bytes);
}

void save_checkpoint(const ModelParams& params, const std::string& path) {
    std::vector<std::uint8_t> out;
    out.insert(out.end(), kCheckpointMagic, kCheckpointMagic + 8);
    put_u32le(out, static_cast<std::uint32_t>(params.dims.input_dim));
    put_u32le(out, static_cast<std::uint32_t>(params.dims.hidden_dim));
    put_u32le(out, static_cast<std::uint32_t>(params.dims.num_classes));
    for (const auto* tensor : {&params.norm_scale, &params.norm_shift, &params.w1,
                               &params.b1, &params.w2, &params.b2}) {
        for (double v : *tensor) put_f32le(out, static_cast<float>(v));
    }
    write_file(path, out);
}

ModelParams load_checkpoint(const std::string& path) {
    const auto bytes = read_file(path);
    Reader r(bytes);
    r.expect_magic(kCheckpointMagic, "checkpoint");
    ModelDims dims;
    dims.input_dim = static_cast<int>(r.u32le("input_dim"));
    dims.hidden_dim = static_cast<int>(r.u32le("hidden_dim"));
    dims.num_classes = static_cast<int>(r.u32le("num_classes"));
    if (dims.input_dim < 1 || dims.hidden_dim < 1 || dims.num_classes < 2) {
        throw ParseError("bad checkpoint dimensions", 8);
    }
    const std::uint64_t d = dims.input_dim, hd = dims.hidden_dim, k = dims.num_classes;
    const std::uint64_t n_floats = d + d + hd * d + hd + k * hd + k;
    if (r.remaining() != n_floats * 4) {
        throw ParseError("checkpoint length does not match dimensions", r.offset());
    }
    ModelParams p;
    p.dims = dims;
    auto read_tensor = [&r](std::vector<double>& dst, std::uint64_t n) {
        dst.resize(n);
        for (std::uint64_t i = 0; i < n; ++i) dst[i] = static_cast<double>(r.f32le("param"));
    };
    read_tensor(p.norm_scale, d);
    read_tensor(p.norm_shift, d);
    read_tensor(p.w1, hd * d);
    read_tensor(p.b1, hd);
    read_tensor(p.w2, k * hd);
    read_tensor(p.b2, k);
    return p;
}

}  // namespace dcinject
