#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "purify/tensor.hpp"

namespace purify {

struct Dataset {
    std::string name;
    Tensor inputs;            // [N x d], every coordinate in [-1, 1]
    std::vector<int> labels;  // in [0, num_classes)
    int num_classes = 0;
    std::uint64_t seed = 0;

    std::size_t size() const { return labels.size(); }
    std::size_t dim() const { return inputs.cols(); }
};

// Isotropic Gaussian blobs (sigma = 0.1) around class means placed on a
// circle of radius `separation` in the first two coordinates; clipped to
// [-1, 1].
Dataset make_gaussian_blobs(int n_per_class, int num_classes, int d, double separation,
                            std::uint64_t seed);

// Two interleaved half-circles with Gaussian jitter, affinely mapped into
// [-1, 1]^2. Class counts differ by at most one.
Dataset make_two_moons(int n, double noise_sigma, std::uint64_t seed);

// Four fixed 8x8 glyph templates (d = 64) with per-pixel Gaussian jitter,
// clipped to [-1, 1]. noise_sigma defaults to 0.15; passing 0 returns exact
// templates (test hook).
Dataset make_digits8(int n_per_class, std::uint64_t seed, double noise_sigma = 0.15);

// The noiseless glyph template for a digits8 class, as a 64-vector.
Tensor digits8_template(int cls);

}  // namespace purify
