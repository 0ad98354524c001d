#pragma once

#include <functional>
#include <span>
#include <utility>
#include <vector>

#include "purify/mlp.hpp"
#include "purify/rng.hpp"
#include "purify/schedule.hpp"
#include "purify/tensor.hpp"

namespace purify {

// Batched noise predictor: [B x d] at step t -> predicted noise [B x d].
using DenoiseFn = std::function<Tensor(const Tensor&, int)>;

// Binds an Mlp denoiser to the total step count of the schedule it was
// trained on (the step index is embedded as t/total_steps).
DenoiseFn make_denoiser(const Mlp& model, int total_steps);

// Batched classifier: [B x d] -> logits [B x C].
using ClassifyFn = std::function<Tensor(const Tensor&)>;
ClassifyFn make_classifier(const Mlp& model);

struct PurifyConfig {
    int T = 0;                        // diffusion length (step index into the schedule)
    int M = 1;                        // purification runs (unguided)
    double guidance_a = 0.0;          // guidance strength a >= 0
    double perturbation_bound_r = 0.1;  // l_inf bound r used inside s_t
    double eta = 1.0;                 // DDIM randomness
    int respace_steps = 0;            // 0 means "no respacing" (= T steps)
    bool start_from_noise = true;     // Algorithm-1 initialization
    bool clamp_output = true;         // clamp final output to [-1, 1]
};

void validate(const PurifyConfig& config, const NoiseSchedule& schedule);

struct GuidanceStep {
    int t = 0;
    double s_t = 0.0;
    double distance = 0.0;    // D(x_t, x_t'), mean squared error
    double shift_norm = 0.0;  // || s_t * Sigma * grad D ||_2
};

struct GuidanceTrace {
    std::vector<GuidanceStep> steps;  // one record per executed reverse step
};

// q(x_t | x0): sqrt(abar_t) x0 + sqrt(1-abar_t) eps.
Tensor forward_sample(const NoiseSchedule& schedule, const Tensor& x0, int t, Rng& rng);

// Deterministic parts of the reverse kernels, shared by the samplers and by
// the equivalence tests. Both write the posterior mean for one row and
// report the kernel's sigma.
void ddpm_step_stats(const NoiseSchedule& schedule, std::span<const double> x_t,
                     std::span<const double> eps_hat, int t, std::span<double> mean_out,
                     double& sigma_out);
void ddim_step_stats(const RespacedSchedule& respaced, std::span<const double> x_t,
                     std::span<const double> eps_hat, int i, std::span<double> mean_out,
                     double& sigma_out);

// One ancestral DDPM step x_t -> x_{t-1}; sigma^2 is the posterior variance
// beta_tilde_t, which vanishes at t = 1 (no noise drawn there).
Tensor ddpm_reverse_step(const DenoiseFn& denoiser, const NoiseSchedule& schedule,
                         const Tensor& x_t, int t, Rng& rng);

// One respaced DDIM step x_{tau_i} -> x_{tau_{i-1}}; draws no randomness
// when sigma = 0 (eta = 0).
Tensor ddim_reverse_step(const DenoiseFn& denoiser, const RespacedSchedule& respaced,
                         const Tensor& x_t, int i, Rng& rng);

// s_t = a * sqrt(1-abar_t) / (r * sqrt(abar_t))
double guidance_scale(const NoiseSchedule& schedule, int t, double a, double r);

// RNG discipline: each sampler draws whole 64-bit child seeds from the
// caller's engine and runs on derived streams. generate() draws one seed;
// guided_purify draws one path seed then one guidance seed, so its
// trajectory at guidance_a = 0 is bit-identical to generate() started from
// an equal engine state; unguided_purify draws one seed per run, making an
// M-run call equal to M chained single-run calls.

// Unconditional ancestral generation over the respaced schedule.
Tensor generate(const DenoiseFn& denoiser, const RespacedSchedule& respaced, std::size_t dim,
                Rng& rng);

// Guided purification: start from noise (or from the diffused input),
// resample x_t' ~ q(x_t | x0_adv) at every reverse step, and shift the
// kernel mean by -s_t Sigma grad_x D(x_t, x_t') with D = mean squared
// error, grad = 2 (x_t - x_t') / d, Sigma = sigma_t^2 I.
std::pair<Tensor, GuidanceTrace> guided_purify(const DenoiseFn& denoiser,
                                               const RespacedSchedule& respaced,
                                               const Tensor& x0_adv, const PurifyConfig& config,
                                               Rng& rng);
// Convenience overload: respaces the first-T sub-schedule per the config.
std::pair<Tensor, GuidanceTrace> guided_purify(const DenoiseFn& denoiser,
                                               const NoiseSchedule& schedule,
                                               const Tensor& x0_adv, const PurifyConfig& config,
                                               Rng& rng);

// Unguided purification (M sequential runs of diffuse-to-T then full DDPM
// reverse; the output of run i feeds run i+1).
Tensor unguided_purify(const DenoiseFn& denoiser, const NoiseSchedule& schedule,
                       const Tensor& x0_adv, const PurifyConfig& config, Rng& rng);

// Batched variants: one parent engine per row, each advanced exactly like
// the single-example call, so batching never changes results.
Tensor guided_purify_batch(const DenoiseFn& denoiser, const RespacedSchedule& respaced,
                           const Tensor& x0_adv_rows, const PurifyConfig& config,
                           std::span<Rng> rngs, std::vector<GuidanceTrace>* traces = nullptr);
Tensor unguided_purify_batch(const DenoiseFn& denoiser, const NoiseSchedule& schedule,
                             const Tensor& x0_adv_rows, const PurifyConfig& config,
                             std::span<Rng> rngs);

}  // namespace purify
