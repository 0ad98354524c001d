#pragma once

#include <cstdint>
#include <vector>

#include "purify/rng.hpp"
#include "purify/schedule.hpp"
#include "purify/tensor.hpp"

namespace purify {

struct TrainReport {
    int epochs = 0;
    double final_loss = 0.0;
    std::vector<double> loss_curve;  // one entry per epoch, evaluated at epoch end
    std::uint64_t seed = 0;
};

// Dense feed-forward network, tanh hidden activations, linear output.
//
// layer_dims[0] is the full network input width. For a time-conditioned
// net it equals data_dim + time_embedding_dim: the step index t is mapped
// to sinusoidal features of t/total_steps (pairs sin(2^j pi u), cos(2^j pi u))
// and concatenated to the data columns. total_steps is supplied per call;
// it belongs to the schedule, not to the model.
class Mlp {
public:
    Mlp() = default;
    Mlp(std::vector<int> layer_dims, int time_embedding_dim, std::uint64_t init_seed);

    const std::vector<int>& layer_dims() const { return dims_; }
    int time_embedding_dim() const { return time_dim_; }
    int input_dim() const { return dims_.front(); }
    int data_dim() const { return dims_.front() - time_dim_; }
    int output_dim() const { return dims_.back(); }
    int num_layers() const { return static_cast<int>(weights_.size()); }
    std::size_t parameter_count() const;
    std::uint64_t version() const { return version_; }

    // Pure forward passes; x is [B x data_dim] (or rank-1 for one example).
    Tensor forward(const Tensor& x) const;
    Tensor forward(const Tensor& x, int t, int total_steps) const;
    // Raw pass over an already-augmented input of width layer_dims[0].
    Tensor forward_augmented(const Tensor& x_aug) const;

    struct Tape {
        const Mlp* model = nullptr;
        std::uint64_t version = 0;
        std::vector<Tensor> activations;  // activations[0] = augmented input
    };

    Tensor forward_tape(const Tensor& x_aug, Tape& tape) const;

    struct Gradients {
        std::vector<Tensor> weight_grads;
        std::vector<Tensor> bias_grads;
        Tensor input_grad;  // w.r.t. the augmented input
    };

    // Exact reverse-mode gradients of the scalar whose output cotangent is
    // output_grad. The tape must come from the immediately preceding
    // forward_tape on this model; a tape recorded before a parameter update
    // raises UsageError.
    Gradients backward(const Tape& tape, const Tensor& output_grad) const;

    void apply_sgd(const Gradients& grads, double lr);

    // Builds [x, embed(t)] rows; exposed for training loops that mix step
    // indices within one batch.
    Tensor augment(const Tensor& x, const std::vector<int>& ts, int total_steps) const;
    std::vector<double> time_embedding(int t, int total_steps) const;

    const Tensor& weight(int layer) const { return weights_[static_cast<std::size_t>(layer)]; }
    const Tensor& bias(int layer) const { return biases_[static_cast<std::size_t>(layer)]; }
    Tensor& mutable_weight(int layer) { return weights_[static_cast<std::size_t>(layer)]; }
    Tensor& mutable_bias(int layer) { return biases_[static_cast<std::size_t>(layer)]; }
    void bump_version() { ++version_; }

private:
    std::vector<int> dims_;
    int time_dim_ = 0;
    std::vector<Tensor> weights_;  // weight(l) is [dims_[l+1] x dims_[l]]
    std::vector<Tensor> biases_;
    std::uint64_t version_ = 0;
};

// Mean over all entries of (pred - target)^2 and its gradient w.r.t. pred.
std::pair<double, Tensor> mse_loss(const Tensor& pred, const Tensor& target);

// Mean softmax cross-entropy over the batch and its gradient w.r.t. logits.
std::pair<double, Tensor> softmax_cross_entropy(const Tensor& logits, const std::vector<int>& labels);

// Row-wise argmax with ties resolved to the lowest class index.
int argmax_row(std::span<const double> row);
std::vector<int> argmax_rows(const Tensor& logits);

// Epsilon-prediction training on the DDPM objective: for random (t, eps),
// minimize the per-coordinate MSE between eps and the model's prediction at
// sqrt(abar_t) x0 + sqrt(1-abar_t) eps. Reported losses use a fixed
// evaluation assignment of (t, eps) pairs derived from the seed, so the
// curve is a deterministic function of (model, data, seed).
TrainReport train_denoiser(Mlp& model, const Tensor& data, const NoiseSchedule& schedule,
                           int epochs, double lr, std::uint64_t seed, int batch_size = 32);

// Softmax cross-entropy training; loss curve reports the full-dataset loss
// at each epoch end.
TrainReport train_classifier(Mlp& model, const Tensor& data, const std::vector<int>& labels,
                             int epochs, double lr, std::uint64_t seed, int batch_size = 32);

}  // namespace purify
