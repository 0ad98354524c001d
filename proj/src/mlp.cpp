#include "purify/mlp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "purify/errors.hpp"

namespace purify {

namespace {
constexpr double kPi = 3.1415926535897932384626433832795;
}

Mlp::Mlp(std::vector<int> layer_dims, int time_embedding_dim, std::uint64_t init_seed)
    : dims_(std::move(layer_dims)), time_dim_(time_embedding_dim) {
    if (dims_.size() < 2) {
        throw ParameterError("Mlp: layer_dims needs at least input and output (got " +
                             std::to_string(dims_.size()) + " entries)");
    }
    for (int d : dims_) {
        if (d < 1) throw ParameterError("Mlp: layer dimension " + std::to_string(d) + " must be >= 1");
    }
    if (time_dim_ < 0 || time_dim_ % 2 != 0) {
        throw ParameterError("Mlp: time_embedding_dim " + std::to_string(time_dim_) +
                             " must be a nonnegative even number");
    }
    if (time_dim_ >= dims_.front()) {
        throw ParameterError("Mlp: time_embedding_dim " + std::to_string(time_dim_) +
                             " must leave room for data columns in input width " +
                             std::to_string(dims_.front()));
    }

    Rng rng = make_rng(init_seed);
    for (std::size_t l = 0; l + 1 < dims_.size(); ++l) {
        const auto fan_in = static_cast<std::size_t>(dims_[l]);
        const auto fan_out = static_cast<std::size_t>(dims_[l + 1]);
        Tensor w({fan_out, fan_in});
        const double scale = 1.0 / std::sqrt(static_cast<double>(fan_in));
        for (double& v : w.data) v = scale * standard_normal(rng);
        weights_.push_back(std::move(w));
        biases_.push_back(Tensor({fan_out}));
    }
}

std::size_t Mlp::parameter_count() const {
    std::size_t n = 0;
    for (std::size_t l = 0; l < weights_.size(); ++l) n += weights_[l].size() + biases_[l].size();
    return n;
}

std::vector<double> Mlp::time_embedding(int t, int total_steps) const {
    if (total_steps < 1) {
        throw ParameterError("time_embedding: total_steps " + std::to_string(total_steps) +
                             " must be >= 1");
    }
    const double u = static_cast<double>(t) / static_cast<double>(total_steps);
    std::vector<double> e(static_cast<std::size_t>(time_dim_));
    double freq = kPi;
    for (int j = 0; j < time_dim_ / 2; ++j) {
        e[static_cast<std::size_t>(2 * j)] = std::sin(freq * u);
        e[static_cast<std::size_t>(2 * j + 1)] = std::cos(freq * u);
        freq *= 2.0;
    }
    return e;
}

Tensor Mlp::augment(const Tensor& x, const std::vector<int>& ts, int total_steps) const {
    const std::size_t rows = x.rows();
    const std::size_t d = x.cols();
    if (static_cast<int>(d) != data_dim()) {
        throw ShapeError("augment: input " + x.shape_str() + " vs data_dim " +
                         std::to_string(data_dim()));
    }
    if (ts.size() != rows) {
        throw ShapeError("augment: " + std::to_string(ts.size()) + " step indices for " +
                         std::to_string(rows) + " rows");
    }
    Tensor out({rows, static_cast<std::size_t>(input_dim())});
    for (std::size_t i = 0; i < rows; ++i) {
        auto src = x.rank() == 1 ? std::span<const double>(x.data) : x.row(i);
        auto dst = out.row(i);
        std::copy(src.begin(), src.end(), dst.begin());
        const auto emb = time_embedding(ts[i], total_steps);
        std::copy(emb.begin(), emb.end(), dst.begin() + static_cast<std::ptrdiff_t>(d));
    }
    return out;
}

Tensor Mlp::forward_augmented(const Tensor& x_aug) const {
    Tape tape;
    return forward_tape(x_aug, tape);
}

Tensor Mlp::forward(const Tensor& x) const {
    if (time_dim_ != 0) {
        throw UsageError("forward(x): model is time-conditioned; supply a step index");
    }
    if (static_cast<int>(x.cols()) != data_dim()) {
        throw ShapeError("forward: input " + x.shape_str() + " vs expected width " +
                         std::to_string(data_dim()));
    }
    return forward_augmented(x);
}

Tensor Mlp::forward(const Tensor& x, int t, int total_steps) const {
    if (time_dim_ == 0) {
        throw UsageError("forward(x, t): model has no time conditioning");
    }
    std::vector<int> ts(x.rows(), t);
    return forward_augmented(augment(x, ts, total_steps));
}

Tensor Mlp::forward_tape(const Tensor& x_aug, Tape& tape) const {
    if (static_cast<int>(x_aug.cols()) != input_dim()) {
        throw ShapeError("forward: input " + x_aug.shape_str() + " vs expected width " +
                         std::to_string(input_dim()));
    }
    tape.model = this;
    tape.version = version_;
    tape.activations.clear();
    tape.activations.reserve(weights_.size() + 1);

    Tensor a = x_aug.rank() == 1 ? Tensor({1, x_aug.size()}, x_aug.data) : x_aug;
    tape.activations.push_back(a);
    for (std::size_t l = 0; l < weights_.size(); ++l) {
        Tensor z = matmul_nt(a, weights_[l]);
        add_row_bias(z, biases_[l]);
        if (l + 1 < weights_.size()) {
            for (double& v : z.data) v = std::tanh(v);
        }
        tape.activations.push_back(z);
        a = std::move(z);
    }
    debug_check_finite(a, "Mlp::forward output");
    return a;
}

Mlp::Gradients Mlp::backward(const Tape& tape, const Tensor& output_grad) const {
    if (tape.model != this || tape.version != version_) {
        throw UsageError("backward: tape is stale (recorded for a different model state)");
    }
    const std::size_t num_layers = weights_.size();
    if (tape.activations.size() != num_layers + 1) {
        throw UsageError("backward: tape incomplete");
    }
    Tensor g = output_grad.rank() == 1 ? Tensor({1, output_grad.size()}, output_grad.data)
                                       : output_grad;
    require_same_shape(g, tape.activations.back(), "backward: output gradient");

    Gradients grads;
    grads.weight_grads.resize(num_layers);
    grads.bias_grads.resize(num_layers);
    for (std::size_t li = num_layers; li-- > 0;) {
        const Tensor& a_prev = tape.activations[li];
        grads.weight_grads[li] = matmul_tn(g, a_prev);
        Tensor db({biases_[li].size()});
        for (std::size_t i = 0; i < g.rows(); ++i) {
            auto row = g.row(i);
            for (std::size_t j = 0; j < row.size(); ++j) db.data[j] += row[j];
        }
        grads.bias_grads[li] = std::move(db);
        Tensor g_prev = matmul(g, weights_[li]);
        if (li > 0) {
            // a_prev holds tanh(z); tanh' = 1 - tanh^2.
            for (std::size_t i = 0; i < g_prev.size(); ++i) {
                const double a = a_prev.data[i];
                g_prev.data[i] *= 1.0 - a * a;
            }
        }
        g = std::move(g_prev);
    }
    grads.input_grad = std::move(g);
    return grads;
}

void Mlp::apply_sgd(const Gradients& grads, double lr) {
    if (grads.weight_grads.size() != weights_.size()) {
        throw UsageError("apply_sgd: gradient count mismatch");
    }
    for (std::size_t l = 0; l < weights_.size(); ++l) {
        axpy(-lr, grads.weight_grads[l], weights_[l]);
        axpy(-lr, grads.bias_grads[l], biases_[l]);
    }
    ++version_;
}

std::pair<double, Tensor> mse_loss(const Tensor& pred, const Tensor& target) {
    require_same_shape(pred, target, "mse_loss");
    const double inv_n = 1.0 / static_cast<double>(pred.size());
    double loss = 0.0;
    Tensor grad(pred.shape);
    for (std::size_t i = 0; i < pred.size(); ++i) {
        const double diff = pred.data[i] - target.data[i];
        loss += diff * diff;
        grad.data[i] = 2.0 * diff * inv_n;
    }
    return {loss * inv_n, std::move(grad)};
}

std::pair<double, Tensor> softmax_cross_entropy(const Tensor& logits,
                                                const std::vector<int>& labels) {
    const std::size_t rows = logits.rows();
    const std::size_t classes = logits.cols();
    if (labels.size() != rows) {
        throw ShapeError("softmax_cross_entropy: " + std::to_string(labels.size()) +
                         " labels for " + std::to_string(rows) + " rows");
    }
    Tensor grad({rows, classes});
    double loss = 0.0;
    const double inv_b = 1.0 / static_cast<double>(rows);
    for (std::size_t i = 0; i < rows; ++i) {
        const int y = labels[i];
        if (y < 0 || static_cast<std::size_t>(y) >= classes) {
            throw DataError("softmax_cross_entropy: label " + std::to_string(y) +
                            " outside [0, " + std::to_string(classes) + ") at row " +
                            std::to_string(i));
        }
        auto row = logits.rank() == 1 ? std::span<const double>(logits.data) : logits.row(i);
        const double m = *std::max_element(row.begin(), row.end());
        double sum = 0.0;
        for (double v : row) sum += std::exp(v - m);
        const double log_sum = std::log(sum) + m;
        loss += log_sum - row[static_cast<std::size_t>(y)];
        auto grow = grad.row(i);
        for (std::size_t c = 0; c < classes; ++c) {
            grow[c] = (std::exp(row[c] - log_sum) - (static_cast<std::size_t>(y) == c ? 1.0 : 0.0)) *
                      inv_b;
        }
    }
    return {loss * inv_b, std::move(grad)};
}

int argmax_row(std::span<const double> row) {
    int best = 0;
    for (std::size_t c = 1; c < row.size(); ++c) {
        if (row[c] > row[best]) best = static_cast<int>(c);
    }
    return best;
}

std::vector<int> argmax_rows(const Tensor& logits) {
    std::vector<int> out(logits.rows());
    for (std::size_t i = 0; i < logits.rows(); ++i) {
        out[i] = argmax_row(logits.rank() == 1 ? std::span<const double>(logits.data)
                                               : logits.row(i));
    }
    return out;
}

namespace {

void check_training_inputs(const Mlp& model, const Tensor& data, int epochs, double lr,
                           int batch_size) {
    if (data.rows() == 0 || data.size() == 0) {
        throw TrainingError("training: dataset is empty");
    }
    if (static_cast<int>(data.cols()) != model.data_dim()) {
        throw ShapeError("training: data " + data.shape_str() + " vs model data_dim " +
                         std::to_string(model.data_dim()));
    }
    if (epochs < 0) throw ParameterError("training: epochs " + std::to_string(epochs) + " < 0");
    if (!(lr > 0.0)) throw ParameterError("training: lr " + std::to_string(lr) + " must be > 0");
    if (batch_size < 1) {
        throw ParameterError("training: batch_size " + std::to_string(batch_size) + " must be >= 1");
    }
}

std::vector<std::size_t> shuffled_indices(std::size_t n, Rng& rng) {
    std::vector<std::size_t> idx(n);
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    for (std::size_t i = n; i > 1; --i) {
        const std::size_t j = rng() % i;
        std::swap(idx[i - 1], idx[j]);
    }
    return idx;
}

}  // namespace

TrainReport train_denoiser(Mlp& model, const Tensor& data, const NoiseSchedule& schedule,
                           int epochs, double lr, std::uint64_t seed, int batch_size) {
    check_training_inputs(model, data, epochs, lr, batch_size);
    if (model.time_embedding_dim() == 0) {
        throw UsageError("train_denoiser: model has no time conditioning");
    }
    for (double v : data.data) {
        if (!(v >= -1.0 && v <= 1.0)) {
            throw DataError("train_denoiser: dataset value " + std::to_string(v) +
                            " outside [-1, 1]");
        }
    }

    const std::size_t n = data.rows();
    const std::size_t d = data.cols();
    const int total_steps = schedule.total_steps();

    TrainReport report;
    report.epochs = epochs;
    report.seed = seed;
    report.final_loss = std::numeric_limits<double>::quiet_NaN();
    if (epochs == 0) return report;

    // Fixed evaluation assignment: one (t, eps) pair per example, drawn once.
    Rng eval_rng = make_rng(derive_seed(seed, 0));
    std::vector<int> eval_ts(n);
    Tensor eval_eps({n, d});
    for (std::size_t i = 0; i < n; ++i) {
        eval_ts[i] = 1 + static_cast<int>(eval_rng() % static_cast<std::uint64_t>(total_steps));
    }
    fill_standard_normal(eval_rng, eval_eps.data);
    Tensor eval_x({n, d});
    for (std::size_t i = 0; i < n; ++i) {
        const double ab = schedule.alpha_bar(eval_ts[i]);
        const double cs = std::sqrt(ab), cn = std::sqrt(1.0 - ab);
        auto src = data.row(i);
        auto dst = eval_x.row(i);
        auto eps = eval_eps.row(i);
        for (std::size_t j = 0; j < d; ++j) dst[j] = cs * src[j] + cn * eps[j];
    }
    const Tensor eval_aug = model.augment(eval_x, eval_ts, total_steps);

    Rng rng = make_rng(derive_seed(seed, 1));
    const std::size_t bs = static_cast<std::size_t>(batch_size);
    for (int epoch = 0; epoch < epochs; ++epoch) {
        const auto order = shuffled_indices(n, rng);
        for (std::size_t start = 0; start < n; start += bs) {
            const std::size_t rows = std::min(bs, n - start);
            Tensor x_t({rows, d});
            Tensor eps({rows, d});
            std::vector<int> ts(rows);
            for (std::size_t b = 0; b < rows; ++b) {
                const std::size_t src_idx = order[start + b];
                ts[b] = 1 + static_cast<int>(rng() % static_cast<std::uint64_t>(total_steps));
                const double ab = schedule.alpha_bar(ts[b]);
                const double cs = std::sqrt(ab), cn = std::sqrt(1.0 - ab);
                auto src = data.row(src_idx);
                auto xrow = x_t.row(b);
                auto erow = eps.row(b);
                for (std::size_t j = 0; j < d; ++j) {
                    erow[j] = standard_normal(rng);
                    xrow[j] = cs * src[j] + cn * erow[j];
                }
            }
            Mlp::Tape tape;
            const Tensor pred = model.forward_tape(model.augment(x_t, ts, total_steps), tape);
            auto [loss, grad] = mse_loss(pred, eps);
            if (!std::isfinite(loss)) {
                throw TrainingError("train_denoiser: non-finite loss at epoch " +
                                    std::to_string(epoch));
            }
            model.apply_sgd(model.backward(tape, grad), lr);
        }
        const Tensor eval_pred = model.forward_augmented(eval_aug);
        const double eval_loss = mse_loss(eval_pred, eval_eps).first;
        if (!std::isfinite(eval_loss)) {
            throw TrainingError("train_denoiser: non-finite evaluation loss at epoch " +
                                std::to_string(epoch));
        }
        report.loss_curve.push_back(eval_loss);
    }
    report.final_loss = report.loss_curve.back();
    return report;
}

TrainReport train_classifier(Mlp& model, const Tensor& data, const std::vector<int>& labels,
                             int epochs, double lr, std::uint64_t seed, int batch_size) {
    check_training_inputs(model, data, epochs, lr, batch_size);
    if (model.time_embedding_dim() != 0) {
        throw UsageError("train_classifier: model must not be time-conditioned");
    }
    if (labels.size() != data.rows()) {
        throw DataError("train_classifier: " + std::to_string(labels.size()) + " labels for " +
                        std::to_string(data.rows()) + " examples");
    }
    for (std::size_t i = 0; i < labels.size(); ++i) {
        if (labels[i] < 0 || labels[i] >= model.output_dim()) {
            throw DataError("train_classifier: label " + std::to_string(labels[i]) +
                            " outside [0, " + std::to_string(model.output_dim()) + ") at row " +
                            std::to_string(i));
        }
    }

    TrainReport report;
    report.epochs = epochs;
    report.seed = seed;
    report.final_loss = std::numeric_limits<double>::quiet_NaN();
    if (epochs == 0) return report;

    const std::size_t n = data.rows();
    const std::size_t d = data.cols();
    Rng rng = make_rng(derive_seed(seed, 1));
    const std::size_t bs = static_cast<std::size_t>(batch_size);
    for (int epoch = 0; epoch < epochs; ++epoch) {
        const auto order = shuffled_indices(n, rng);
        for (std::size_t start = 0; start < n; start += bs) {
            const std::size_t rows = std::min(bs, n - start);
            Tensor x({rows, d});
            std::vector<int> y(rows);
            for (std::size_t b = 0; b < rows; ++b) {
                const std::size_t src_idx = order[start + b];
                auto src = data.row(src_idx);
                std::copy(src.begin(), src.end(), x.row(b).begin());
                y[b] = labels[src_idx];
            }
            Mlp::Tape tape;
            const Tensor logits = model.forward_tape(x, tape);
            auto [loss, grad] = softmax_cross_entropy(logits, y);
            if (!std::isfinite(loss)) {
                throw TrainingError("train_classifier: non-finite loss at epoch " +
                                    std::to_string(epoch));
            }
            model.apply_sgd(model.backward(tape, grad), lr);
        }
        const double eval_loss = softmax_cross_entropy(model.forward(data), labels).first;
        if (!std::isfinite(eval_loss)) {
            throw TrainingError("train_classifier: non-finite evaluation loss at epoch " +
                                std::to_string(epoch));
        }
        report.loss_curve.push_back(eval_loss);
    }
    report.final_loss = report.loss_curve.back();
    return report;
}

}  // namespace purify
