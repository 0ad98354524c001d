#pragma once

#include <vector>

namespace purify {

// Diffusion noise schedule. Step indices are 1-based in every public
// signature (t in [1, T]); storage slot t-1 holds step t. alpha_bar(0) is
// defined as 1 so that transitions ending at "step 0" (fully denoised) are
// well formed.
struct NoiseSchedule {
    std::vector<double> betas;
    std::vector<double> alphas;
    std::vector<double> alpha_bars;

    int total_steps() const { return static_cast<int>(betas.size()); }

    double beta(int t) const;
    double alpha(int t) const;
    double alpha_bar(int t) const;  // alpha_bar(0) == 1
    // sqrt(1 - alpha_bar(t)), the forward-marginal noise scale at step t.
    double noise_scale(int t) const;
    // beta_tilde_t = beta_t * (1 - alpha_bar_{t-1}) / (1 - alpha_bar_t),
    // the DDPM posterior variance.
    double posterior_variance(int t) const;
};

// Linear beta interpolation from beta_start to beta_end inclusive (the
// DDPM default family). The cumulative product runs in extended precision
// before rounding to double.
NoiseSchedule make_linear_schedule(int total_steps, double beta_start, double beta_end);

// First `total_steps` steps of `s` as a standalone schedule; absolute step
// indices are preserved (step t of the truncation equals step t of s).
NoiseSchedule truncate(const NoiseSchedule& s, int total_steps);

// sigma_t(eta) = eta * sqrt((1-abar_{t_prev})/(1-abar_t)) * sqrt(1 - abar_t/abar_{t_prev})
// for the transition t -> t_prev. t_prev = 0 is allowed (abar_0 = 1, sigma = 0).
double sigma_ddim(const NoiseSchedule& s, int t, int t_prev, double eta);

// Evenly strided subset of [1, T] used for accelerated reverse passes.
// taus[i-1] = floor(i * T / S), which is strictly increasing and always
// ends exactly at T.
struct RespacedSchedule {
    NoiseSchedule parent;
    std::vector<int> taus;  // strictly increasing, 1-based, back() == T
    double eta = 0.0;
    // sigmas[i-1] is sigma for the transition tau_i -> tau_{i-1} (tau_0 := 0).
    std::vector<double> sigmas;

    int steps() const { return static_cast<int>(taus.size()); }
    // 1-based position; tau(0) == 0 by the abar_0 convention.
    int tau(int i) const;
    double alpha_bar_at(int i) const;  // parent.alpha_bar(tau(i))
    double sigma(int i) const;
};

RespacedSchedule respace(const NoiseSchedule& s, int num_steps, double eta);

}  // namespace purify
