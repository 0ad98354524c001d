#include "purify/data.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "purify/errors.hpp"
#include "purify/rng.hpp"

namespace purify {

namespace {
constexpr double kPi = 3.1415926535897932384626433832795;
constexpr double kBlobSigma = 0.1;
}  // namespace

Dataset make_gaussian_blobs(int n_per_class, int num_classes, int d, double separation,
                            std::uint64_t seed) {
    if (n_per_class < 1) {
        throw ParameterError("make_gaussian_blobs: n_per_class " + std::to_string(n_per_class) +
                             " must be >= 1");
    }
    if (num_classes < 2) {
        throw ParameterError("make_gaussian_blobs: num_classes " + std::to_string(num_classes) +
                             " must be >= 2");
    }
    if (d < 2) {
        throw ParameterError("make_gaussian_blobs: d " + std::to_string(d) + " must be >= 2");
    }
    if (separation < 0.0) {
        throw ParameterError("make_gaussian_blobs: separation " + std::to_string(separation) +
                             " must be >= 0");
    }

    const std::size_t n = static_cast<std::size_t>(n_per_class) * static_cast<std::size_t>(num_classes);
    Dataset ds;
    ds.name = "blobs";
    ds.seed = seed;
    ds.num_classes = num_classes;
    ds.inputs = Tensor({n, static_cast<std::size_t>(d)});
    ds.labels.resize(n);

    Rng rng = make_rng(seed);
    std::size_t row = 0;
    for (int c = 0; c < num_classes; ++c) {
        const double angle = 2.0 * kPi * static_cast<double>(c) / static_cast<double>(num_classes);
        const double mx = separation * std::cos(angle);
        const double my = separation * std::sin(angle);
        for (int i = 0; i < n_per_class; ++i, ++row) {
            auto dst = ds.inputs.row(row);
            for (int j = 0; j < d; ++j) dst[static_cast<std::size_t>(j)] = kBlobSigma * standard_normal(rng);
            dst[0] += mx;
            dst[1] += my;
            for (double& v : dst) v = std::clamp(v, -1.0, 1.0);
            ds.labels[row] = c;
        }
    }
    return ds;
}

Dataset make_two_moons(int n, double noise_sigma, std::uint64_t seed) {
    if (n < 2) throw ParameterError("make_two_moons: n " + std::to_string(n) + " must be >= 2");
    if (noise_sigma < 0.0) {
        throw ParameterError("make_two_moons: noise_sigma " + std::to_string(noise_sigma) +
                             " must be >= 0");
    }

    Dataset ds;
    ds.name = "two_moons";
    ds.seed = seed;
    ds.num_classes = 2;
    const int n0 = (n + 1) / 2;
    const int n1 = n / 2;
    ds.inputs = Tensor({static_cast<std::size_t>(n), 2});
    ds.labels.resize(static_cast<std::size_t>(n));

    Rng rng = make_rng(seed);
    std::size_t row = 0;
    // Raw curves: upper arc (cos u, sin u); lower arc (1 - cos u, 0.5 - sin u),
    // u in [0, pi]. The raw bounding box [-1, 2] x [-0.5, 1] is mapped onto
    // [-1, 1]^2 before clipping.
    auto emit = [&](int count, int label) {
        for (int i = 0; i < count; ++i, ++row) {
            const double u = count == 1 ? 0.0 : kPi * static_cast<double>(i) / static_cast<double>(count - 1);
            double x = label == 0 ? std::cos(u) : 1.0 - std::cos(u);
            double y = label == 0 ? std::sin(u) : 0.5 - std::sin(u);
            x += noise_sigma * standard_normal(rng);
            y += noise_sigma * standard_normal(rng);
            auto dst = ds.inputs.row(row);
            dst[0] = std::clamp((x - 0.5) / 1.5, -1.0, 1.0);
            dst[1] = std::clamp((y - 0.25) / 0.75, -1.0, 1.0);
            ds.labels[row] = label;
        }
    };
    emit(n0, 0);
    emit(n1, 1);
    return ds;
}

namespace {

// 8x8 glyphs: '#' pixels are +1, '.' pixels are -1.
const char* const kGlyphs[4][8] = {
    // plus
    {"...##...",
     "...##...",
     "...##...",
     "########",
     "########",
     "...##...",
     "...##...",
     "...##..."},
    // hollow box
    {"########",
     "########",
     "##....##",
     "##....##",
     "##....##",
     "##....##",
     "########",
     "########"},
    // diagonal cross
    {"##....##",
     "###..###",
     ".######.",
     "..####..",
     "..####..",
     ".######.",
     "###..###",
     "##....##"},
    // stripes
    {"########",
     "########",
     "........",
     "........",
     "########",
     "########",
     "........",
     "........"},
};

}  // namespace

Tensor digits8_template(int cls) {
    if (cls < 0 || cls >= 4) {
        throw ParameterError("digits8_template: class " + std::to_string(cls) +
                             " outside [0, 4)");
    }
    Tensor t({64});
    for (int r = 0; r < 8; ++r) {
        for (int c = 0; c < 8; ++c) {
            t.data[static_cast<std::size_t>(8 * r + c)] = kGlyphs[cls][r][c] == '#' ? 1.0 : -1.0;
        }
    }
    return t;
}

Dataset make_digits8(int n_per_class, std::uint64_t seed, double noise_sigma) {
    if (n_per_class < 1) {
        throw ParameterError("make_digits8: n_per_class " + std::to_string(n_per_class) +
                             " must be >= 1");
    }
    if (noise_sigma < 0.0) {
        throw ParameterError("make_digits8: noise_sigma " + std::to_string(noise_sigma) +
                             " must be >= 0");
    }

    Dataset ds;
    ds.name = "digits8";
    ds.seed = seed;
    ds.num_classes = 4;
    const std::size_t n = 4 * static_cast<std::size_t>(n_per_class);
    ds.inputs = Tensor({n, 64});
    ds.labels.resize(n);

    Rng rng = make_rng(seed);
    std::size_t row = 0;
    for (int c = 0; c < 4; ++c) {
        const Tensor tmpl = digits8_template(c);
        for (int i = 0; i < n_per_class; ++i, ++row) {
            auto dst = ds.inputs.row(row);
            for (std::size_t j = 0; j < 64; ++j) {
                dst[j] = std::clamp(tmpl.data[j] + noise_sigma * standard_normal(rng), -1.0, 1.0);
            }
            ds.labels[row] = c;
        }
    }
    return ds;
}

}  // namespace purify
