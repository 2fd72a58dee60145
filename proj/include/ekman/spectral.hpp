#pragma once

#include <cmath>
#include <complex>
#include <stdexcept>

#include "ekman/field.hpp"
#include "ekman/grid.hpp"
#include "ekman/rng.hpp"

namespace ekman {

namespace detail {

// Canonical enumeration of one representative per conjugate mode pair with
// 0 < |k| <= kcut: first the k1 = 0 half-axis, then columns k1 > 0. Every
// routine that draws per-mode randomness walks modes in exactly this order,
// which is what makes draws reproducible and shareable across integrators.
template <typename Fn>
void for_each_half_mode(int kcut, Fn&& fn) {
    const long cut2 = static_cast<long>(kcut) * kcut;
    for (int k2 = 1; k2 <= kcut; ++k2) fn(0, k2);
    for (int k1 = 1; k1 <= kcut; ++k1)
        for (int k2 = -kcut; k2 <= kcut; ++k2)
            if (static_cast<long>(k1) * k1 + static_cast<long>(k2) * k2 <= cut2)
                fn(k1, k2);
}

inline int count_half_modes(int kcut) {
    int m = 0;
    for_each_half_mode(kcut, [&](int, int) { ++m; });
    return m;
}

} // namespace detail

// u = K * xi: velocity recovered from vorticity through the streamfunction,
// u = grad^perp psi with lap psi = xi, i.e. uhat = i (k2, -k1) xihat / |k|^2.
// Divergence-free by construction and curl(u) returns xi exactly.
inline VelocityField biot_savart(const ScalarField& xi) {
    const auto& c = xi.coeffs();
    double cmax = 0.0;
    for (const auto& z : c) cmax = std::max(cmax, std::abs(z));
    if (std::abs(c[0]) > 1e-12 * cmax)
        throw invariant_error("biot_savart: input field is not mean-zero");

    const int n = xi.n();
    const int cols = xi.spec_cols();
    ScalarField u1(xi.grid()), u2(xi.grid());
    auto& a1 = u1.mutable_coeffs();
    auto& a2 = u2.mutable_coeffs();
    for (int r = 0; r < n; ++r) {
        const int k1 = xi.k1_of_row(r);
        for (int col = 0; col < cols; ++col) {
            const int k2 = col;
            const double k_sq = static_cast<double>(k1) * k1 + static_cast<double>(k2) * k2;
            const std::size_t idx = static_cast<std::size_t>(r) * cols + col;
            if (k_sq == 0.0) {
                a1[idx] = a2[idx] = {0.0, 0.0};
                continue;
            }
            const std::complex<double> z = c[idx] / k_sq;
            a1[idx] = std::complex<double>(0.0, 1.0) * static_cast<double>(k2) * z;
            a2[idx] = std::complex<double>(0.0, -1.0) * static_cast<double>(k1) * z;
        }
    }
    return VelocityField{std::move(u1), std::move(u2)};
}

// Spectral partial derivative along axis 1 or 2.
inline ScalarField derivative(const ScalarField& f, int axis) {
    const auto& c = f.coeffs();
    const int n = f.n();
    const int cols = f.spec_cols();
    ScalarField d(f.grid());
    auto& out = d.mutable_coeffs();
    for (int r = 0; r < n; ++r) {
        const double k1 = f.k1_of_row(r);
        for (int col = 0; col < cols; ++col) {
            const double k = (axis == 1) ? k1 : col;
            out[static_cast<std::size_t>(r) * cols + col] =
                std::complex<double>(0.0, k) * c[static_cast<std::size_t>(r) * cols + col];
        }
    }
    return d;
}

inline ScalarField curl(const VelocityField& u) {
    ScalarField c = derivative(u.u2, 1);
    c -= derivative(u.u1, 2);
    return c;
}

// Dealiased pseudo-spectral u.grad(xi): gradients in spectral space, the
// product on the grid, and the result truncated to |k|_inf <= floor(N/3).
inline ScalarField advection(const ScalarField& xi, const VelocityField& u) {
    if (xi.grid() != u.grid())
        throw config_error("advection: vorticity and velocity live on different grids");
    const ScalarField dx1 = derivative(xi, 1);
    const ScalarField dx2 = derivative(xi, 2);
    const auto& g1 = dx1.values();
    const auto& g2 = dx2.values();
    const auto& v1 = u.u1.values();
    const auto& v2 = u.u2.values();
    std::vector<double> prod(g1.size());
    for (std::size_t i = 0; i < prod.size(); ++i)
        prod[i] = v1[i] * g1[i] + v2[i] * g2[i];
    ScalarField out = ScalarField::from_grid(xi.grid(), std::move(prod));
    out.truncate(xi.grid().kmax_dealias);
    out.project_mean_zero();
    return out;
}

// u.grad(xi) for the self-induced velocity u = K*xi, via the two-product
// form u.grad(curl u) = (d11 - d22)(u1 u2) + d12(u2^2 - u1^2). Needs two
// forward transforms instead of four inverse ones and equals the dealiased
// advection(xi, biot_savart(xi)) up to roundoff. Optionally reports max|u|
// for the CFL guard.
inline ScalarField self_advection(const ScalarField& xi, double* max_speed = nullptr) {
    const VelocityField u = biot_savart(xi);
    const auto& v1 = u.u1.values();
    const auto& v2 = u.u2.values();
    if (max_speed) *max_speed = u.max_speed();

    std::vector<double> p(v1.size()), q(v1.size());
    for (std::size_t i = 0; i < v1.size(); ++i) {
        p[i] = v1[i] * v2[i];
        q[i] = v2[i] * v2[i] - v1[i] * v1[i];
    }
    const ScalarField pf = ScalarField::from_grid(xi.grid(), std::move(p));
    const ScalarField qf = ScalarField::from_grid(xi.grid(), std::move(q));
    const auto& pc = pf.coeffs();
    const auto& qc = qf.coeffs();

    const int n = xi.n();
    const int cols = xi.spec_cols();
    ScalarField out(xi.grid());
    auto& oc = out.mutable_coeffs();
    const int kmax = xi.grid().kmax_dealias;
    for (int r = 0; r < n; ++r) {
        const double k1 = xi.k1_of_row(r);
        if (std::abs(k1) > kmax) continue;
        for (int col = 0; col <= std::min(cols - 1, kmax); ++col) {
            const double k2 = col;
            const std::size_t idx = static_cast<std::size_t>(r) * cols + col;
            oc[idx] = -(k1 * k1 - k2 * k2) * pc[idx] - (k1 * k2) * qc[idx];
        }
    }
    oc[0] = {0.0, 0.0};
    return out;
}

// --- norms and pairings -----------------------------------------------------

inline double lp_norm(const ScalarField& f, double p) {
    if (p < 1.0) throw std::domain_error("lp_norm: p must be >= 1");
    double s = 0.0;
    for (double v : f.values()) s += std::pow(std::abs(v), p);
    return std::pow(f.grid().cell() * s, 1.0 / p);
}

inline double linf_norm(const ScalarField& f) { return f.max_abs(); }

// sqrt(sum over full lattice of |k|^(2a) |fhat_k|^2); the k = 0 term is
// excluded (fields are mean-zero).
inline double sobolev_norm(const ScalarField& f, double a) {
    if (a < 0.0) throw std::domain_error("sobolev_norm: a must be >= 0");
    const auto& c = f.coeffs();
    const int n = f.n();
    const int cols = f.spec_cols();
    double s = 0.0;
    for (int r = 0; r < n; ++r) {
        const double k1 = f.k1_of_row(r);
        for (int col = 0; col < cols; ++col) {
            const double k_sq = k1 * k1 + static_cast<double>(col) * col;
            if (k_sq == 0.0) continue;
            // interior columns stand for a conjugate pair
            const double weight = (col == 0 || col == n / 2) ? 1.0 : 2.0;
            const double mag = std::abs(c[static_cast<std::size_t>(r) * cols + col]);
            s += weight * std::pow(k_sq, a) * mag * mag;
        }
    }
    return std::sqrt(s);
}

inline double grad_lp_norm(const ScalarField& f, double p) {
    if (p < 1.0) throw std::domain_error("grad_lp_norm: p must be >= 1");
    const ScalarField d1 = derivative(f, 1);
    const ScalarField d2 = derivative(f, 2);
    const auto& g1 = d1.values();
    const auto& g2 = d2.values();
    double s = 0.0;
    for (std::size_t i = 0; i < g1.size(); ++i)
        s += std::pow(std::sqrt(g1[i] * g1[i] + g2[i] * g2[i]), p);
    return std::pow(f.grid().cell() * s, 1.0 / p);
}

inline double l2_norm(const VelocityField& u) {
    const double a = lp_norm(u.u1, 2.0);
    const double b = lp_norm(u.u2, 2.0);
    return std::sqrt(a * a + b * b);
}

// Pointwise Frobenius norm of grad(u), maximized over the grid.
inline double grad_linf_norm(const VelocityField& u) {
    const ScalarField f11 = derivative(u.u1, 1);
    const ScalarField f12 = derivative(u.u1, 2);
    const ScalarField f21 = derivative(u.u2, 1);
    const ScalarField f22 = derivative(u.u2, 2);
    const auto& d11 = f11.values();
    const auto& d12 = f12.values();
    const auto& d21 = f21.values();
    const auto& d22 = f22.values();
    double m = 0.0;
    for (std::size_t i = 0; i < d11.size(); ++i) {
        const double f = d11[i] * d11[i] + d12[i] * d12[i] + d21[i] * d21[i] + d22[i] * d22[i];
        m = std::max(m, f);
    }
    return std::sqrt(m);
}

// Quadrature approximation of the L^inf x L^1 duality integral(xi g).
inline double pairing(const ScalarField& xi, const ScalarField& g) {
    if (xi.grid() != g.grid()) throw config_error("pairing: grid mismatch");
    const auto& a = xi.values();
    const auto& b = g.values();
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return xi.grid().cell() * s;
}

// Largest spectral divergence |k . uhat_k| over all modes (0 for exact
// Biot-Savart output, up to roundoff).
inline double spectral_divergence_max(const VelocityField& u) {
    const auto& c1 = u.u1.coeffs();
    const auto& c2 = u.u2.coeffs();
    const int n = u.grid().n;
    const int cols = n / 2 + 1;
    double m = 0.0;
    for (int r = 0; r < n; ++r) {
        const double k1 = u.u1.k1_of_row(r);
        for (int col = 0; col < cols; ++col) {
            const std::size_t idx = static_cast<std::size_t>(r) * cols + col;
            m = std::max(m, std::abs(k1 * c1[idx] + static_cast<double>(col) * c2[idx]));
        }
    }
    return m;
}

// Random mean-zero field supported on 0 < |k| <= kmax, rescaled to the
// requested sup norm. Coefficients decay like |k|^-decay.
inline ScalarField random_band_limited(const FourierGrid& grid, int kmax, double target_linf,
                                       RngStream& rng, double decay = 1.0) {
    ScalarField f(grid);
    detail::for_each_half_mode(kmax, [&](int k1, int k2) {
        const double k_sq = static_cast<double>(k1) * k1 + static_cast<double>(k2) * k2;
        const double scale = std::pow(k_sq, -decay / 2.0);
        f.set_mode(k1, k2, scale * std::complex<double>(rng.normal(), rng.normal()));
    });
    const double m = f.max_abs();
    if (m > 0.0 && target_linf > 0.0) f *= target_linf / m;
    return f;
}

} // namespace ekman
