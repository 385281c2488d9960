#pragma once

#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "dcinject/image.hpp"
#include "dcinject/nn.hpp"

namespace dcinject {

/// Structured load failure: what went wrong and at which byte offset.
class ParseError : public std::runtime_error {
public:
    ParseError(const std::string& what, std::size_t offset)
        : std::runtime_error(what + " (byte offset " + std::to_string(offset) + ")"),
          offset_(offset) {}

    std::size_t offset() const { return offset_; }

private:
    std::size_t offset_;
};

// DCINJDS1 dataset file, all multi-byte values little-endian:
//   magic            8 bytes  "DCINJDS1"
//   n_samples        u32
//   height           u32
//   width            u32
//   channels         u32      (1 or 3)
//   n_classes        u32      (>= 2)
//   labels           n_samples x u32, each < n_classes
//   image data       n_samples x C x H x W f32, each in [0,1]
inline constexpr char kDatasetMagic[8] = {'D', 'C', 'I', 'N', 'J', 'D', 'S', '1'};

/// Synthesizes a labeled task: each class is a fixed smooth low-frequency
/// base pattern plus per-image pixel noise of std 0.1, clipped to [0,1] and
/// quantized to f32 so disk roundtrips are exact.
LabeledDataset synth_dataset(int n_per_class, int n_classes, int h, int w, int c,
                             std::uint64_t seed);

/// Train/test split of one synthetic task. Both halves share the per-class
/// base patterns (the task) and hold disjoint noise draws; synthesizing the
/// two sets with unrelated seeds would yield two different tasks.
std::pair<LabeledDataset, LabeledDataset> synth_split(int n_train_per_class,
                                                      int n_test_per_class, int n_classes,
                                                      int h, int w, int c,
                                                      std::uint64_t seed);

std::vector<std::uint8_t> serialize_dataset(const LabeledDataset& dataset);
void save_dataset(const LabeledDataset& dataset, const std::string& path);

/// Strict parser: validates the magic, that declared sizes match the byte
/// count exactly, and every label/pixel range. Never reads out of bounds;
/// all failures are ParseError.
LabeledDataset parse_dataset(std::span<const std::uint8_t> bytes);
LabeledDataset load_dataset(const std::string& path);

// DCINJCK1 checkpoint file: magic, then input_dim/hidden_dim/num_classes as
// u32, then norm_scale, norm_shift, w1, b1, w2, b2 as f32, all little-endian.
inline constexpr char kCheckpointMagic[8] = {'D', 'C', 'I', 'N', 'J', 'C', 'K', '1'};

void save_checkpoint(const ModelParams& params, const std::string& path);
ModelParams load_checkpoint(const std::string& path);

}  // namespace dcinject
