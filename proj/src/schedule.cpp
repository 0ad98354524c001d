#include "purify/schedule.hpp"

#include <cmath>
#include <string>

#include "purify/errors.hpp"

namespace purify {

namespace {
void check_step(const NoiseSchedule& s, int t, const char* what) {
    if (t < 1 || t > s.total_steps()) {
        throw IndexError(std::string(what) + ": step " + std::to_string(t) +
                         " outside [1, " + std::to_string(s.total_steps()) + "]");
    }
}
}  // namespace

double NoiseSchedule::beta(int t) const {
    check_step(*this, t, "beta");
    return betas[static_cast<std::size_t>(t - 1)];
}

double NoiseSchedule::alpha(int t) const {
    check_step(*this, t, "alpha");
    return alphas[static_cast<std::size_t>(t - 1)];
}

double NoiseSchedule::alpha_bar(int t) const {
    if (t == 0) return 1.0;
    check_step(*this, t, "alpha_bar");
    return alpha_bars[static_cast<std::size_t>(t - 1)];
}

double NoiseSchedule::noise_scale(int t) const { return std::sqrt(1.0 - alpha_bar(t)); }

double NoiseSchedule::posterior_variance(int t) const {
    check_step(*this, t, "posterior_variance");
    return beta(t) * (1.0 - alpha_bar(t - 1)) / (1.0 - alpha_bar(t));
}

NoiseSchedule make_linear_schedule(int total_steps, double beta_start, double beta_end) {
    if (total_steps < 1) {
        throw ParameterError("make_linear_schedule: total_steps " + std::to_string(total_steps) +
                             " must be >= 1");
    }
    if (!(beta_start > 0.0)) {
        throw ParameterError("make_linear_schedule: beta_start " + std::to_string(beta_start) +
                             " must be > 0");
    }
    if (!(beta_end < 1.0)) {
        throw ParameterError("make_linear_schedule: beta_end " + std::to_string(beta_end) +
                             " must be < 1");
    }
    if (!(beta_start <= beta_end)) {
        throw ParameterError("make_linear_schedule: beta_start " + std::to_string(beta_start) +
                             " must be <= beta_end " + std::to_string(beta_end));
    }

    NoiseSchedule s;
    s.betas.resize(static_cast<std::size_t>(total_steps));
    s.alphas.resize(static_cast<std::size_t>(total_steps));
    s.alpha_bars.resize(static_cast<std::size_t>(total_steps));

    long double running = 1.0L;
    for (int t = 1; t <= total_steps; ++t) {
        const double frac = total_steps == 1
                                ? 0.0
                                : static_cast<double>(t - 1) / static_cast<double>(total_steps - 1);
        const double beta = beta_start + (beta_end - beta_start) * frac;
        const double alpha = 1.0 - beta;
        running *= static_cast<long double>(alpha);
        const std::size_t idx = static_cast<std::size_t>(t - 1);
        s.betas[idx] = beta;
        s.alphas[idx] = alpha;
        s.alpha_bars[idx] = static_cast<double>(running);
    }
    return s;
}

NoiseSchedule truncate(const NoiseSchedule& s, int total_steps) {
    if (total_steps < 1 || total_steps > s.total_steps()) {
        throw ParameterError("truncate: total_steps " + std::to_string(total_steps) +
                             " outside [1, " + std::to_string(s.total_steps()) + "]");
    }
    NoiseSchedule out;
    const std::size_t n = static_cast<std::size_t>(total_steps);
    out.betas.assign(s.betas.begin(), s.betas.begin() + n);
    out.alphas.assign(s.alphas.begin(), s.alphas.begin() + n);
    out.alpha_bars.assign(s.alpha_bars.begin(), s.alpha_bars.begin() + n);
    return out;
}

double sigma_ddim(const NoiseSchedule& s, int t, int t_prev, double eta) {
    check_step(s, t, "sigma_ddim");
    if (t_prev < 0 || t_prev >= t) {
        throw IndexError("sigma_ddim: t_prev " + std::to_string(t_prev) +
                         " must lie in [0, t) with t = " + std::to_string(t));
    }
    if (eta < 0.0) {
        throw ParameterError("sigma_ddim: eta " + std::to_string(eta) + " must be >= 0");
    }
    const double ab_t = s.alpha_bar(t);
    const double ab_prev = s.alpha_bar(t_prev);
    return eta * std::sqrt((1.0 - ab_prev) / (1.0 - ab_t)) * std::sqrt(1.0 - ab_t / ab_prev);
}

int RespacedSchedule::tau(int i) const {
    if (i == 0) return 0;
    if (i < 1 || i > steps()) {
        throw IndexError("tau: position " + std::to_string(i) + " outside [0, " +
                         std::to_string(steps()) + "]");
    }
    return taus[static_cast<std::size_t>(i - 1)];
}

double RespacedSchedule::alpha_bar_at(int i) const { return parent.alpha_bar(tau(i)); }

double RespacedSchedule::sigma(int i) const {
    if (i < 1 || i > steps()) {
        throw IndexError("sigma: position " + std::to_string(i) + " outside [1, " +
                         std::to_string(steps()) + "]");
    }
    return sigmas[static_cast<std::size_t>(i - 1)];
}

RespacedSchedule respace(const NoiseSchedule& s, int num_steps, double eta) {
    const int T = s.total_steps();
    if (num_steps < 1 || num_steps > T) {
        throw ParameterError("respace: num_steps " + std::to_string(num_steps) +
                             " outside [1, " + std::to_string(T) + "]");
    }
    if (eta < 0.0) {
        throw ParameterError("respace: eta " + std::to_string(eta) + " must be >= 0");
    }

    RespacedSchedule r;
    r.parent = s;
    r.eta = eta;
    r.taus.resize(static_cast<std::size_t>(num_steps));
    r.sigmas.resize(static_cast<std::size_t>(num_steps));
    for (int i = 1; i <= num_steps; ++i) {
        const auto tau_i = static_cast<int>((static_cast<long long>(i) * T) / num_steps);
        r.taus[static_cast<std::size_t>(i - 1)] = tau_i;
    }
    for (int i = 1; i <= num_steps; ++i) {
        const int t = r.taus[static_cast<std::size_t>(i - 1)];
        const int t_prev = i == 1 ? 0 : r.taus[static_cast<std::size_t>(i - 2)];
        r.sigmas[static_cast<std::size_t>(i - 1)] = sigma_ddim(s, t, t_prev, eta);
    }
    return r;
}

}  // namespace purify
