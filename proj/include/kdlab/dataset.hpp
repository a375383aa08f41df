#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "kdlab/matrix.hpp"

namespace kdlab {

struct LabeledDataset {
    Matrix inputs;            // n x d
    std::vector<int> labels;  // in [0, class_count)
    int class_count = 0;
    std::string split;        // "train" or "test"
    std::string provenance;

    std::size_t size() const { return inputs.rows; }
    void validate() const;  // throws on broken invariants
};

enum class SyntheticGenerator { gaussian_blobs, two_spirals };

struct SyntheticSpec {
    SyntheticGenerator generator = SyntheticGenerator::gaussian_blobs;
    int classes = 10;
    int dim = 16;
    int train_per_class = 500;
    int test_per_class = 200;
    double separation = 3.0;  // blobs: class means uniform in +/- separation/2
    double noise = 1.0;       // per-dimension gaussian noise scale
    std::uint64_t seed = 0;
};

// Deterministic per seed; classes balanced by construction.
// gaussian_blobs: mean_c ~ U(-separation/2, separation/2)^d, x = mean + noise*N(0,I).
// two_spirals: C interleaved spiral arms in the first two dims (radius grows
// with angle, separation scales the radius), remaining dims pure noise.
std::pair<LabeledDataset, LabeledDataset> gen_dataset(const SyntheticSpec& spec);

// Stratified subset: ceil(fraction * n_c) items per class, sampled without
// replacement, deterministic per seed. Output keeps the original row order.
LabeledDataset subset_data(const LabeledDataset& data, double fraction,
                           std::uint64_t seed);

// IDX ingestion (big-endian magics 0x803 images / 0x801 labels); pixels scaled
// to [0,1] and flattened row-major.
LabeledDataset load_idx(const std::string& images_path, const std::string& labels_path);

// Binary dataset file (digest-protected), used by the CLI.
void save_dataset(const LabeledDataset& data, const std::string& path);
LabeledDataset load_dataset(const std::string& path);

}  // namespace kdlab
