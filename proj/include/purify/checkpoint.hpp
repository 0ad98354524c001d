#pragma once

#include <cstdint>
#include <string>

#include "purify/mlp.hpp"

namespace purify {

// Checkpoint schema (JSON, schema_version 1):
//   { "schema_version": 1,
//     "layer_dims": [..],
//     "time_embedding_dim": k,
//     "weights": [ [ [[W rows]], [bias] ], ... one entry per layer ],
//     "training_seed": n }
// Doubles are written with shortest round-trip formatting, so a save/load
// cycle reproduces outputs to full precision.
void save_checkpoint(const Mlp& model, const std::string& path, std::uint64_t training_seed);

struct LoadedCheckpoint {
    Mlp model;
    std::uint64_t training_seed = 0;
};

LoadedCheckpoint load_checkpoint(const std::string& path);

}  // namespace purify
