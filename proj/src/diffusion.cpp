#include "purify/diffusion.hpp"

#include <array>
#include <cmath>
#include <string>

#include "purify/errors.hpp"

namespace purify {

DenoiseFn make_denoiser(const Mlp& model, int total_steps) {
    return [&model, total_steps](const Tensor& x, int t) { return model.forward(x, t, total_steps); };
}

ClassifyFn make_classifier(const Mlp& model) {
    return [&model](const Tensor& x) { return model.forward(x); };
}

void validate(const PurifyConfig& config, const NoiseSchedule& schedule) {
    if (config.T < 1 || config.T > schedule.total_steps()) {
        throw ParameterError("PurifyConfig: T " + std::to_string(config.T) + " outside [1, " +
                             std::to_string(schedule.total_steps()) + "]");
    }
    if (config.M < 1) {
        throw ParameterError("PurifyConfig: M " + std::to_string(config.M) + " must be >= 1");
    }
    if (config.guidance_a < 0.0) {
        throw ParameterError("PurifyConfig: guidance_a " + std::to_string(config.guidance_a) +
                             " must be >= 0");
    }
    if (!(config.perturbation_bound_r > 0.0)) {
        throw ParameterError("PurifyConfig: perturbation_bound_r " +
                             std::to_string(config.perturbation_bound_r) + " must be > 0");
    }
    if (config.eta < 0.0) {
        throw ParameterError("PurifyConfig: eta " + std::to_string(config.eta) + " must be >= 0");
    }
    if (config.respace_steps < 0 || config.respace_steps > config.T) {
        throw ParameterError("PurifyConfig: respace_steps " + std::to_string(config.respace_steps) +
                             " outside [0, T = " + std::to_string(config.T) + "]");
    }
}

namespace {

Tensor as_rows(const Tensor& x) {
    return x.rank() == 1 ? Tensor({1, x.size()}, x.data) : x;
}

void check_finite_step(const Tensor& x, int t) {
    if (!x.all_finite()) {
        throw NumericError("reverse pass: non-finite state at step t = " + std::to_string(t));
    }
}

}  // namespace

Tensor forward_sample(const NoiseSchedule& schedule, const Tensor& x0, int t, Rng& rng) {
    const double ab = schedule.alpha_bar(t);  // range-checks t
    const double cs = std::sqrt(ab);
    const double cn = std::sqrt(1.0 - ab);
    if (!x0.all_finite()) throw NumericError("forward_sample: non-finite input");
    Tensor out = x0;
    for (double& v : out.data) v = cs * v + cn * standard_normal(rng);
    return out;
}

void ddpm_step_stats(const NoiseSchedule& schedule, std::span<const double> x_t,
                     std::span<const double> eps_hat, int t, std::span<double> mean_out,
                     double& sigma_out) {
    const double beta = schedule.beta(t);
    const double alpha = schedule.alpha(t);
    const double ab = schedule.alpha_bar(t);
    const double coef = beta / std::sqrt(1.0 - ab);
    const double inv_sqrt_alpha = 1.0 / std::sqrt(alpha);
    for (std::size_t j = 0; j < x_t.size(); ++j) {
        mean_out[j] = inv_sqrt_alpha * (x_t[j] - coef * eps_hat[j]);
    }
    sigma_out = t == 1 ? 0.0 : std::sqrt(schedule.posterior_variance(t));
}

void ddim_step_stats(const RespacedSchedule& respaced, std::span<const double> x_t,
                     std::span<const double> eps_hat, int i, std::span<double> mean_out,
                     double& sigma_out) {
    const double sigma = respaced.sigma(i);  // range-checks i
    const double ab_t = respaced.alpha_bar_at(i);
    const double ab_prev = respaced.alpha_bar_at(i - 1);
    const double resid = 1.0 - ab_prev - sigma * sigma;
    if (resid < 0.0) {
        throw ScheduleError("ddim step: sigma^2 = " + std::to_string(sigma * sigma) +
                            " exceeds 1 - alpha_bar = " + std::to_string(1.0 - ab_prev) +
                            " at tau_" + std::to_string(i));
    }
    const double sqrt_ab_t = std::sqrt(ab_t);
    const double sqrt_ab_prev = std::sqrt(ab_prev);
    const double noise_t = std::sqrt(1.0 - ab_t);
    const double eps_coef = std::sqrt(resid);
    for (std::size_t j = 0; j < x_t.size(); ++j) {
        const double x0_hat = (x_t[j] - noise_t * eps_hat[j]) / sqrt_ab_t;
        mean_out[j] = sqrt_ab_prev * x0_hat + eps_coef * eps_hat[j];
    }
    sigma_out = sigma;
}

Tensor ddpm_reverse_step(const DenoiseFn& denoiser, const NoiseSchedule& schedule,
                         const Tensor& x_t, int t, Rng& rng) {
    const Tensor rows = as_rows(x_t);
    const Tensor eps_hat = denoiser(rows, t);
    if (!eps_hat.all_finite()) {
        throw NumericError("ddpm_reverse_step: non-finite denoiser output at step t = " +
                           std::to_string(t));
    }
    Tensor out(x_t.shape);
    double sigma = 0.0;
    for (std::size_t i = 0; i < rows.rows(); ++i) {
        auto mean = std::span<double>(out.data.data() + i * rows.cols(), rows.cols());
        ddpm_step_stats(schedule, rows.row(i), eps_hat.row(i), t, mean, sigma);
        if (sigma > 0.0) {
            for (double& v : mean) v += sigma * standard_normal(rng);
        }
    }
    return out;
}

Tensor ddim_reverse_step(const DenoiseFn& denoiser, const RespacedSchedule& respaced,
                         const Tensor& x_t, int i, Rng& rng) {
    const Tensor rows = as_rows(x_t);
    const Tensor eps_hat = denoiser(rows, respaced.tau(i));
    if (!eps_hat.all_finite()) {
        throw NumericError("ddim_reverse_step: non-finite denoiser output at step tau_" +
                           std::to_string(i) + " = " + std::to_string(respaced.tau(i)));
    }
    Tensor out(x_t.shape);
    double sigma = 0.0;
    for (std::size_t r = 0; r < rows.rows(); ++r) {
        auto mean = std::span<double>(out.data.data() + r * rows.cols(), rows.cols());
        ddim_step_stats(respaced, rows.row(r), eps_hat.row(r), i, mean, sigma);
        if (sigma > 0.0) {
            for (double& v : mean) v += sigma * standard_normal(rng);
        }
    }
    return out;
}

double guidance_scale(const NoiseSchedule& schedule, int t, double a, double r) {
    if (!(r > 0.0)) {
        throw ParameterError("guidance_scale: r " + std::to_string(r) + " must be > 0");
    }
    if (a < 0.0) {
        throw ParameterError("guidance_scale: a " + std::to_string(a) + " must be >= 0");
    }
    const double ab = schedule.alpha_bar(t);
    return a * std::sqrt(1.0 - ab) / (r * std::sqrt(ab));
}

namespace {

struct GuidanceContext {
    const Tensor* x0_adv = nullptr;  // [B x d]
    double a = 0.0;
    double r = 1.0;
    std::vector<Rng> rngs;  // one guidance stream per row
    std::vector<GuidanceTrace>* traces = nullptr;
};

// Shared reverse pass over the respaced schedule; `guide` null means plain
// unconditional sampling.
Tensor reverse_pass(const DenoiseFn& denoiser, const RespacedSchedule& respaced, Tensor x,
                    std::vector<Rng>& path_rngs, GuidanceContext* guide) {
    const std::size_t rows = x.rows();
    const std::size_t d = x.cols();
    const double inv_d = 1.0 / static_cast<double>(d);
    std::vector<double> x_prime(d);

    for (int i = respaced.steps(); i >= 1; --i) {
        const int t = respaced.tau(i);
        const Tensor eps_hat = denoiser(x, t);
        if (!eps_hat.all_finite()) {
            throw NumericError("reverse pass: non-finite denoiser output at step t = " +
                               std::to_string(t));
        }
        Tensor next({rows, d});
        double sigma = 0.0;
        const double s_t = (guide != nullptr && guide->a > 0.0)
                               ? guidance_scale(respaced.parent, t, guide->a, guide->r)
                               : 0.0;
        const double ab_t = respaced.parent.alpha_bar(t);
        const double g_signal = std::sqrt(ab_t);
        const double g_noise = std::sqrt(1.0 - ab_t);
        for (std::size_t b = 0; b < rows; ++b) {
            auto mean = std::span<double>(next.data.data() + b * d, d);
            ddim_step_stats(respaced, x.row(b), eps_hat.row(b), i, mean, sigma);
            if (s_t > 0.0) {
                // x_t' ~ q(x_t | x0_adv), freshly drawn at every step.
                auto adv = guide->x0_adv->row(b);
                Rng& grng = guide->rngs[b];
                for (std::size_t j = 0; j < d; ++j) {
                    x_prime[j] = g_signal * adv[j] + g_noise * standard_normal(grng);
                }
                const double shift_coef = s_t * sigma * sigma * 2.0 * inv_d;
                double dist2 = 0.0;
                auto xrow = x.row(b);
                for (std::size_t j = 0; j < d; ++j) {
                    const double diff = xrow[j] - x_prime[j];
                    dist2 += diff * diff;
                    mean[j] -= shift_coef * diff;
                }
                if (guide->traces != nullptr) {
                    (*guide->traces)[b].steps.push_back(
                        {t, s_t, dist2 * inv_d, shift_coef * std::sqrt(dist2)});
                }
            } else if (guide != nullptr && guide->traces != nullptr) {
                (*guide->traces)[b].steps.push_back({t, s_t, 0.0, 0.0});
            }
            if (sigma > 0.0) {
                for (double& v : mean) v += sigma * standard_normal(path_rngs[b]);
            }
        }
        x = std::move(next);
        check_finite_step(x, t);
    }
    return x;
}

std::vector<Rng> child_streams(std::span<Rng> parents) {
    std::vector<Rng> out;
    out.reserve(parents.size());
    for (Rng& p : parents) out.push_back(make_rng(p()));
    return out;
}

}  // namespace

Tensor generate(const DenoiseFn& denoiser, const RespacedSchedule& respaced, std::size_t dim,
                Rng& rng) {
    std::vector<Rng> path;
    path.push_back(make_rng(rng()));
    Tensor x({1, dim});
    fill_standard_normal(path[0], x.data);
    Tensor out = reverse_pass(denoiser, respaced, std::move(x), path, nullptr);
    return Tensor({dim}, std::move(out.data));
}

Tensor guided_purify_batch(const DenoiseFn& denoiser, const RespacedSchedule& respaced,
                           const Tensor& x0_adv_rows, const PurifyConfig& config,
                           std::span<Rng> rngs, std::vector<GuidanceTrace>* traces) {
    const Tensor adv = as_rows(x0_adv_rows);
    const std::size_t rows = adv.rows();
    const std::size_t d = adv.cols();
    if (rngs.size() != rows) {
        throw ParameterError("guided_purify_batch: " + std::to_string(rngs.size()) +
                             " rng streams for " + std::to_string(rows) + " rows");
    }
    if (!adv.all_finite()) throw NumericError("guided_purify: non-finite input");

    GuidanceContext guide;
    guide.x0_adv = &adv;
    guide.a = config.guidance_a;
    guide.r = config.perturbation_bound_r;
    guide.traces = traces;
    if (traces != nullptr) {
        traces->assign(rows, GuidanceTrace{});
    }

    // Path seed first, then guidance seed, row by row.
    std::vector<Rng> path = child_streams(rngs);
    guide.rngs = child_streams(rngs);

    const int t_start = respaced.tau(respaced.steps());
    Tensor x({rows, d});
    for (std::size_t b = 0; b < rows; ++b) {
        auto dst = x.row(b);
        if (config.start_from_noise) {
            for (double& v : dst) v = standard_normal(path[b]);
        } else {
            const double ab = respaced.parent.alpha_bar(t_start);
            const double cs = std::sqrt(ab), cn = std::sqrt(1.0 - ab);
            auto src = adv.row(b);
            for (std::size_t j = 0; j < d; ++j) dst[j] = cs * src[j] + cn * standard_normal(path[b]);
        }
    }

    Tensor out = reverse_pass(denoiser, respaced, std::move(x), path, &guide);
    if (config.clamp_output) clamp_inplace(out, -1.0, 1.0);
    return out;
}

std::pair<Tensor, GuidanceTrace> guided_purify(const DenoiseFn& denoiser,
                                               const RespacedSchedule& respaced,
                                               const Tensor& x0_adv, const PurifyConfig& config,
                                               Rng& rng) {
    std::vector<GuidanceTrace> traces;
    std::array<Rng, 1> rngs{rng};
    Tensor out = guided_purify_batch(denoiser, respaced, x0_adv, config, rngs, &traces);
    rng = rngs[0];  // the batch call advanced the parent engine
    Tensor flat(x0_adv.shape, std::move(out.data));
    return {std::move(flat), std::move(traces[0])};
}

std::pair<Tensor, GuidanceTrace> guided_purify(const DenoiseFn& denoiser,
                                               const NoiseSchedule& schedule,
                                               const Tensor& x0_adv, const PurifyConfig& config,
                                               Rng& rng) {
    validate(config, schedule);
    const NoiseSchedule sub = truncate(schedule, config.T);
    const int steps = config.respace_steps == 0 ? config.T : config.respace_steps;
    return guided_purify(denoiser, respace(sub, steps, config.eta), x0_adv, config, rng);
}

Tensor unguided_purify_batch(const DenoiseFn& denoiser, const NoiseSchedule& schedule,
                             const Tensor& x0_adv_rows, const PurifyConfig& config,
                             std::span<Rng> rngs) {
    validate(config, schedule);
    const NoiseSchedule sub = truncate(schedule, config.T);
    Tensor x = as_rows(x0_adv_rows);
    const std::size_t rows = x.rows();
    const std::size_t d = x.cols();
    if (rngs.size() != rows) {
        throw ParameterError("unguided_purify_batch: " + std::to_string(rngs.size()) +
                             " rng streams for " + std::to_string(rows) + " rows");
    }
    if (!x.all_finite()) throw NumericError("unguided_purify: non-finite input");

    const int T = config.T;
    for (int run = 0; run < config.M; ++run) {
        std::vector<Rng> run_rngs = child_streams(rngs);
        // Diffuse to step T.
        const double cs = std::sqrt(sub.alpha_bar(T));
        const double cn = std::sqrt(1.0 - sub.alpha_bar(T));
        for (std::size_t b = 0; b < rows; ++b) {
            for (double& v : x.row(b)) v = cs * v + cn * standard_normal(run_rngs[b]);
        }
        // Full DDPM reverse.
        for (int t = T; t >= 1; --t) {
            const Tensor eps_hat = denoiser(x, t);
            if (!eps_hat.all_finite()) {
                throw NumericError("unguided_purify: non-finite denoiser output at step t = " +
                                   std::to_string(t));
            }
            Tensor next({rows, d});
            double sigma = 0.0;
            for (std::size_t b = 0; b < rows; ++b) {
                auto mean = std::span<double>(next.data.data() + b * d, d);
                ddpm_step_stats(sub, x.row(b), eps_hat.row(b), t, mean, sigma);
                if (sigma > 0.0) {
                    for (double& v : mean) v += sigma * standard_normal(run_rngs[b]);
                }
            }
            x = std::move(next);
            check_finite_step(x, t);
        }
    }
    if (config.clamp_output) clamp_inplace(x, -1.0, 1.0);
    return x;
}

Tensor unguided_purify(const DenoiseFn& denoiser, const NoiseSchedule& schedule,
                       const Tensor& x0_adv, const PurifyConfig& config, Rng& rng) {
    std::array<Rng, 1> rngs{rng};
    Tensor out = unguided_purify_batch(denoiser, schedule, x0_adv, config, rngs);
    rng = rngs[0];
    return Tensor(x0_adv.shape, std::move(out.data));
}

}  // namespace purify
