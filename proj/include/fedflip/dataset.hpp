#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "fedflip/matrix.hpp"
#include "fedflip/nn.hpp"

namespace fedflip {

inline constexpr int kNumClasses = 7;
inline constexpr int kInputDim = 784;

// Skin-lesion class names in label order 0..6.
inline constexpr std::array<const char*, kNumClasses> kClassNames = {
    "nv", "mel", "bkl", "bcc", "akiec", "vasc", "df",
};

// Rows of 784 features in [0, 1] plus a class label in {0..6}.
struct LabeledDataset {
    Matrix features;          // n x 784
    std::vector<int> labels;  // n

    std::size_t size() const { return labels.size(); }
};

struct ClientShard {
    int client_id = 0;
    LabeledDataset data;
};

// Desk-scale surrogate dataset: one uniform cluster per class, anchored at a
// seeded random point in [0,1]^784.
struct SynthSpec {
    std::size_t n_samples = 5000;
    std::array<double, kNumClasses> class_weights{};
    double cluster_spread = 1.0;

    void validate() const;
};

// Class frequencies of the 2003-sample evaluation split (supports
// 61/96/228/37/1327/32/222), normalized.
std::array<double, kNumClasses> imbalanced_class_weights();

std::array<double, kNumClasses> balanced_class_weights();

// CSV format: header "pixel0000,...,pixel0783,label", one float per pixel
// column and an integer class label per row. If any pixel value exceeds 1.0
// the whole feature matrix is treated as raw 8-bit greyscale and divided by
// 255; otherwise values are taken as already scaled. Row order is preserved.
LabeledDataset load_csv(const std::filesystem::path& path);

// Inverse of load_csv for already-scaled data; floats are written with
// shortest round-trip precision.
void save_csv(const LabeledDataset& data, const std::filesystem::path& path);

// Uniform shuffle by seed, then split; |test| = round(n * test_fraction).
std::pair<LabeledDataset, LabeledDataset> train_test_split(const LabeledDataset& data,
                                                           double test_fraction,
                                                           std::uint64_t seed);

// Uniform shuffle by seed, then contiguous chunks; the first n mod n_clients
// shards get one extra row.
std::vector<ClientShard> partition_iid(const LabeledDataset& train, int n_clients,
                                       std::uint64_t seed);

// Rows shuffled by epoch_seed then grouped; the final partial batch is kept.
std::vector<Batch> batches(const ClientShard& shard, int batch_size,
                           std::uint64_t epoch_seed);

LabeledDataset synth_dataset(const SynthSpec& spec, std::uint64_t seed);

}  // namespace fedflip
