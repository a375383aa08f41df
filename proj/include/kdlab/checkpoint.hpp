#pragma once

#include <cstdint>
#include <string>

#include "kdlab/mlp.hpp"

namespace kdlab {

struct CheckpointMeta {
    std::uint64_t seed = 0;
    int epochs = 0;
    double best_test_acc = 0.0;
    double final_test_acc = 0.0;
    std::string note;
};

// Versioned, digest-protected binary format. load(save(m)) is bit-exact;
// any corruption trips the digest check.
void save_checkpoint(const Mlp& model, const CheckpointMeta& meta,
                     const std::string& path);

Mlp load_checkpoint(const std::string& path, CheckpointMeta* meta = nullptr);

}  // namespace kdlab
