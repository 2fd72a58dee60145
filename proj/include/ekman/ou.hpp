#pragma once

#include <cmath>
#include <stdexcept>

#include "ekman/noise.hpp"

namespace ekman {

// Auxiliary Ornstein-Uhlenbeck vorticity d zeta + lambda zeta dt = dW_curl.
struct OUState {
    ScalarField zeta;
    double lambda = 1.0;
    double time = 0.0;
};

// Exact transition over dt: per mode, decay by exp(-lambda dt) plus a
// Gaussian with the integrated variance
// sigma^2 c_k^2 |k|^2 (1 - exp(-2 lambda dt)) / (2 lambda).
// No time-discretization bias: the law of zeta(t) is step-size independent.
inline OUState ou_exact_step(const OUState& state, double dt, const NoiseSpectrum& spec,
                             RngStream& rng) {
    if (dt <= 0.0) throw std::domain_error("ou_exact_step: dt must be > 0");
    if (state.lambda <= 0.0) throw std::domain_error("ou_exact_step: lambda must be > 0");
    OUState next = state;
    const double decay = std::exp(-state.lambda * dt);
    next.zeta *= decay;
    const double var_factor = (1.0 - decay * decay) / (2.0 * state.lambda);
    if (spec.amplitude > 0.0) {
        detail::add_curl_noise(next.zeta, spec, rng, [&](double k_sq) {
            return detail::curl_mode_variance_rate(spec, k_sq) * var_factor;
        });
    }
    next.time += dt;
    return next;
}

// Draw from the stationary law: per-mode variance sigma^2 c_k^2 |k|^2/(2 lambda),
// so that E || zeta ||_{H^a}^2 = S_a / (2 lambda).
inline OUState stationary_sample(const NoiseSpectrum& spec, const FourierGrid& grid,
                                 double lambda, RngStream& rng) {
    if (lambda <= 0.0) throw std::domain_error("stationary_sample: lambda must be > 0");
    if (spec.kcut > grid.kmax_dealias)
        throw config_error("stationary_sample: kcut exceeds dealias cutoff");
    OUState state{ScalarField(grid), lambda, 0.0};
    if (spec.amplitude > 0.0) {
        detail::add_curl_noise(state.zeta, spec, rng, [&](double k_sq) {
            return detail::curl_mode_variance_rate(spec, k_sq) / (2.0 * lambda);
        });
    }
    return state;
}

// Pick lambda so that c_tilde sqrt(S_a / (2 lambda)) < gamma / 2 with a
// factor-2 margin over the threshold value: lambda = 4 c_tilde^2 S_a / gamma^2.
// With degenerate noise (S_a = 0) any positive lambda works; gamma is
// returned so the decomposition xi = eta + zeta stays well-defined.
inline double calibrate_lambda(double gamma, const NoiseSpectrum& spec, double a,
                               double c_tilde) {
    if (gamma <= 0.0) throw std::domain_error("calibrate_lambda: gamma must be > 0");
    if (c_tilde <= 0.0) throw std::domain_error("calibrate_lambda: c_tilde must be > 0");
    if (a <= 2.0)
        throw std::domain_error(
            "calibrate_lambda: a must exceed 2 (H^(a-1) must embed into L^inf)");
    const double s_a = curl_growth_rate(spec, a);
    if (s_a == 0.0) return gamma;
    return 2.0 * (2.0 * c_tilde * c_tilde * s_a / (gamma * gamma));
}

// Margin actually achieved by a calibration: gamma/2 - c_tilde sqrt(S_a/(2 lambda)).
inline double calibration_margin(double gamma, const NoiseSpectrum& spec, double a,
                                 double c_tilde, double lambda) {
    const double s_a = curl_growth_rate(spec, a);
    return 0.5 * gamma - c_tilde * std::sqrt(s_a / (2.0 * lambda));
}

// Empirical estimate of the embedding constant relating |zeta|_inf to
// ||zeta||_{H^a}: least-squares slope through the origin over stationary
// samples.
inline double estimate_c_tilde(const NoiseSpectrum& spec, const FourierGrid& grid,
                               double lambda, double a, int samples, RngStream& rng) {
    if (samples < 1) throw std::domain_error("estimate_c_tilde: need at least one sample");
    double sxy = 0.0, sxx = 0.0;
    for (int i = 0; i < samples; ++i) {
        const OUState s = stationary_sample(spec, grid, lambda, rng);
        const double x = sobolev_norm(s.zeta, a);
        const double y = linf_norm(s.zeta);
        sxy += x * y;
        sxx += x * x;
    }
    return sxx > 0.0 ? sxy / sxx : 0.0;
}

} // namespace ekman
