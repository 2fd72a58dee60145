#pragma once

#include <cmath>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "ekman/noise.hpp"
#include "ekman/observable.hpp"
#include "ekman/ou.hpp"
#include "ekman/snapshot.hpp"
#include "ekman/spectral.hpp"

namespace ekman {

// |xi|_inf beyond this aborts the run as diverged.
inline constexpr double blowup_threshold = 1e6;

struct InitialCondition {
    enum class Kind { zero, random_band, modes, grid_file };

    struct Mode {
        int k1 = 1;
        int k2 = 0;
        double cos_amp = 0.0;
        double sin_amp = 0.0;
        bool operator==(const Mode&) const = default;
    };

    Kind kind = Kind::zero;
    int kmax = 8;             // random_band support
    double linf = 1.0;        // random_band target sup norm
    std::uint64_t seed = 1;   // random_band draw identity
    std::vector<Mode> modes;
    std::string path;         // grid_file source

    bool operator==(const InitialCondition&) const = default;
};

inline ScalarField build_initial(const InitialCondition& ic, const FourierGrid& grid) {
    switch (ic.kind) {
        case InitialCondition::Kind::zero:
            return ScalarField(grid);
        case InitialCondition::Kind::random_band: {
            if (ic.kmax > grid.kmax_dealias)
                throw config_error("initial condition: kmax exceeds the dealias cutoff");
            RngStream rng(ic.seed, 0x1c0de);
            return random_band_limited(grid, ic.kmax, ic.linf, rng);
        }
        case InitialCondition::Kind::modes: {
            ScalarField f(grid);
            for (const auto& m : ic.modes) {
                if (std::abs(m.k1) > grid.kmax_dealias || std::abs(m.k2) > grid.kmax_dealias)
                    throw config_error("initial condition: mode outside retained band");
                if (m.cos_amp != 0.0) f.add_cos(m.k1, m.k2, m.cos_amp);
                if (m.sin_amp != 0.0) f.add_sin(m.k1, m.k2, m.sin_amp);
            }
            return f;
        }
        case InitialCondition::Kind::grid_file: {
            auto loaded = snapshot::read(ic.path);
            if (loaded.field.n() != grid.n)
                throw config_error("initial condition: snapshot grid size " +
                                   std::to_string(loaded.field.n()) + " does not match N = " +
                                   std::to_string(grid.n));
            return std::move(loaded.field);
        }
    }
    throw config_error("initial condition: unknown kind");
}

struct SimConfig {
    int n = 128;
    double dt = 1e-3;
    double gamma = 0.5;
    NoiseSpectrum spectrum{};
    double t0 = 0.0;
    double t1 = 1.0;
    std::uint64_t seed = 42;
    std::uint64_t stream_id = 0;
    int snapshot_every = 0;
    bool advection_enabled = true;
    double cfl_limit = 0.5;
    InitialCondition initial{};
    std::vector<ObservableSpec> observables{};

    bool operator==(const SimConfig&) const = default;
};

struct TrajectoryState {
    ScalarField xi;
    double time = 0.0;
    RngStream rng;
    long step_count = 0;
};

struct FieldSnapshot {
    double time = 0.0;
    ScalarField field;
};

struct TrajectoryRecord {
    std::vector<double> times;
    std::vector<std::string> names;
    std::vector<std::vector<double>> series;  // series[observable][sample]
    std::vector<FieldSnapshot> snapshots;
    TrajectoryState final_state;
};

namespace detail {

// Integrated OU variance factor over a window tau at damping `rate`:
// (1 - exp(-2 rate tau)) / (2 rate), continuous at rate = 0.
inline double ou_var_factor(double rate, double tau) {
    return rate > 0.0 ? (1.0 - std::exp(-2.0 * rate * tau)) / (2.0 * rate) : tau;
}

// Exact damping-plus-noise half step of the vorticity equation.
inline void damping_noise_substep(ScalarField& xi, const SimConfig& cfg, double tau,
                                  RngStream& rng) {
    if (cfg.gamma > 0.0) xi *= std::exp(-cfg.gamma * tau);
    if (cfg.spectrum.amplitude > 0.0) {
        const double vf = ou_var_factor(cfg.gamma, tau);
        add_curl_noise(xi, cfg.spectrum, rng, [&](double k_sq) {
            return curl_mode_variance_rate(cfg.spectrum, k_sq) * vf;
        });
    }
}

// Shu-Osher three-stage strong-stability-preserving Runge-Kutta.
template <typename Rhs>
ScalarField ssp_rk3(const ScalarField& x0, double dt, Rhs&& rhs) {
    ScalarField f = rhs(x0);
    ScalarField s1 = x0;
    s1.axpy(dt, f);

    f = rhs(s1);
    s1.axpy(dt, f);
    ScalarField s2 = x0;
    s2 *= 0.75;
    s2.axpy(0.25, s1);

    f = rhs(s2);
    s2.axpy(dt, f);
    ScalarField out = x0;
    out *= 1.0 / 3.0;
    out.axpy(2.0 / 3.0, s2);
    return out;
}

inline void check_cfl(const SimConfig& cfg, double max_speed) {
    const double cfl = cfg.dt * max_speed * cfg.n / two_pi;
    if (cfl > cfg.cfl_limit)
        throw step_error("CFL guard violated: dt * max|u| * N / (2 pi) = " +
                         std::to_string(cfl) + " with measured max|u| = " +
                         std::to_string(max_speed));
}

// Advection substep of the Strang split, with the CFL guard evaluated on the
// first-stage velocity.
inline ScalarField rk3_advect(const ScalarField& x0, const SimConfig& cfg) {
    bool first_stage = true;
    auto rhs = [&](const ScalarField& x) {
        double max_speed = 0.0;
        ScalarField a = self_advection(x, first_stage ? &max_speed : nullptr);
        if (first_stage) {
            check_cfl(cfg, max_speed);
            first_stage = false;
        }
        a *= -1.0;
        return a;
    };
    return ssp_rk3(x0, cfg.dt, rhs);
}

// Upper bound on |xi|_inf from the coefficients alone (no grid transform):
// sum over the full lattice of |xi_hat_k|.
inline double linf_coeff_bound(const ScalarField& xi) {
    const auto& c = xi.coeffs();
    const int n = xi.n();
    const int cols = xi.spec_cols();
    double s = 0.0;
    for (int r = 0; r < n; ++r)
        for (int col = 0; col < cols; ++col) {
            const double w = (col == 0 || col == n / 2) ? 1.0 : 2.0;
            s += w * std::abs(c[static_cast<std::size_t>(r) * cols + col]);
        }
    return s;
}

} // namespace detail

// One Strang-split step: exact damping+noise over dt/2, a full SSP-RK3
// advection substep with the velocity refreshed at every stage, then
// damping+noise over dt/2 again. The stochastic half steps are transition-
// exact, so decay rates carry no scheme bias.
inline TrajectoryState sde_step(TrajectoryState state, const SimConfig& cfg) {
    detail::damping_noise_substep(state.xi, cfg, cfg.dt / 2.0, state.rng);
    if (cfg.advection_enabled) state.xi = detail::rk3_advect(state.xi, cfg);
    detail::damping_noise_substep(state.xi, cfg, cfg.dt / 2.0, state.rng);
    state.xi.project_mean_zero();
    state.time += cfg.dt;
    state.step_count += 1;
    return state;
}

using StepHook = std::function<void(const TrajectoryState&)>;

// Repeated sde_step from t0 to t1 with per-step observable records and
// periodic snapshots. Bit-reproducible for fixed (seed, stream_id, N, dt).
inline TrajectoryRecord integrate(const ScalarField& chi, const SimConfig& cfg,
                                  const StepHook& on_step = {}) {
    const FourierGrid grid = make_grid(cfg.n);
    if (chi.n() != cfg.n) throw config_error("integrate: initial field is on the wrong grid");
    if (!chi.all_finite()) throw config_error("integrate: initial field is not finite");
    if (std::abs(chi.mean()) > 1e-12 * std::max(1.0, chi.max_abs()))
        throw invariant_error("integrate: initial field is not mean-zero");
    if (cfg.spectrum.kcut > grid.kmax_dealias)
        throw config_error("integrate: kcut exceeds the dealias cutoff");
    if (cfg.dt <= 0.0) throw config_error("integrate: dt must be > 0");
    if (cfg.t1 < cfg.t0) throw config_error("integrate: t1 must be >= t0");

    std::vector<Observable> obs;
    for (const auto& spec : cfg.observables) obs.emplace_back(spec, grid);

    TrajectoryRecord rec;
    for (const auto& o : obs) rec.names.push_back(o.name());
    rec.series.resize(obs.size());

    TrajectoryState state{chi, cfg.t0, RngStream(cfg.seed, cfg.stream_id), 0};
    state.xi.truncate(grid.kmax_dealias);
    state.xi.project_mean_zero();

    const long nsteps = std::lround((cfg.t1 - cfg.t0) / cfg.dt);

    auto record = [&](long step) {
        const double t = cfg.t0 + step * cfg.dt;
        state.time = t;
        rec.times.push_back(t);
        for (std::size_t i = 0; i < obs.size(); ++i) rec.series[i].push_back(obs[i](state.xi));
        if (cfg.snapshot_every > 0 && step % cfg.snapshot_every == 0)
            rec.snapshots.push_back({t, state.xi});
        if (on_step) on_step(state);
    };

    record(0);
    for (long step = 1; step <= nsteps; ++step) {
        state = sde_step(std::move(state), cfg);
        if (!state.xi.all_finite())
            throw divergence_error("integrate: non-finite field at step " + std::to_string(step));
        if (detail::linf_coeff_bound(state.xi) > blowup_threshold) {
            const double linf = state.xi.max_abs();
            if (linf > blowup_threshold)
                throw divergence_error("integrate: |xi|_inf = " + std::to_string(linf) +
                                       " exceeded the blow-up threshold at step " +
                                       std::to_string(step));
        }
        record(step);
    }
    rec.final_state = std::move(state);
    return rec;
}

// Right-hand side of the advective part of the shifted equation:
// -u.grad(eta) - u.grad(zeta) + (lambda - gamma) zeta with u = K*(eta+zeta).
// Damping is excluded; the split integrator applies it exactly.
inline ScalarField eta_advection_rhs(const ScalarField& eta, const ScalarField& zeta,
                                     double lambda, double gamma) {
    ScalarField total = eta;
    total += zeta;
    total.project_mean_zero();
    const VelocityField u = biot_savart(total);
    ScalarField rhs = advection(eta, u);
    rhs *= -1.0;
    rhs -= advection(zeta, u);
    if (lambda != gamma) rhs.axpy(lambda - gamma, zeta);
    return rhs;
}

namespace detail {

// Noise addressed by global time slot. Every consumer of an interval
// [s0, s1) of slots composes per-slot exact OU increments, all drawn from
// the same per-(slot, mode) standard normals; two integrations at different
// step sizes therefore see the same underlying Brownian path.
class SlotNoise {
public:
    SlotNoise(const NoiseSpectrum& spec, RngStream base, double slot_dt)
        : spec_(spec), base_(base), slot_dt_(slot_dt), modes_(count_half_modes(spec.kcut)) {}

    void add_ou_increment(ScalarField& f, double rate, long s0, long s1) const {
        if (spec_.amplitude == 0.0 || s1 <= s0) return;
        const double vf = ou_var_factor(rate, slot_dt_);
        const double decay = std::exp(-rate * slot_dt_);
        long m = 0;
        for_each_half_mode(spec_.kcut, [&](int k1, int k2) {
            const double k_sq = static_cast<double>(k1) * k1 + static_cast<double>(k2) * k2;
            const double sd = std::sqrt(0.5 * curl_mode_variance_rate(spec_, k_sq) * vf);
            std::complex<double> acc{0.0, 0.0};
            for (long s = s0; s < s1; ++s) {
                const std::uint64_t slot_base = 2 * (static_cast<std::uint64_t>(s) * modes_ + m);
                const std::complex<double> z(sd * base_.normal_at(slot_base),
                                             sd * base_.normal_at(slot_base + 1));
                acc = acc * decay + z;
            }
            f.set_mode(k1, k2, f.coeff(k1, k2) + acc);
            ++m;
        });
    }

private:
    NoiseSpectrum spec_;
    RngStream base_;
    double slot_dt_;
    long modes_;
};

} // namespace detail

struct CrosscheckReport {
    double dt = 0.0;
    long steps = 0;
    double lambda = 0.0;
    double max_discrepancy = 0.0;    // max over steps of ||(eta+zeta) - xi||_2
    double final_discrepancy = 0.0;
};

// Integrates the pair (eta, zeta) alongside the direct vorticity equation
// under the identical noise realization and reports the splitting gap. The
// gap is O(dt): pass the same noise_slot_dt at dt and dt/2 to see it halve
// on a fixed Brownian path.
inline CrosscheckReport eta_step_crosscheck(
    const ScalarField& chi, const SimConfig& cfg, double lambda, double noise_slot_dt = 0.0,
    std::optional<std::uint64_t> direct_stream = {},
    std::optional<std::uint64_t> split_stream = {}) {
    if (lambda <= 0.0) throw std::domain_error("eta_step_crosscheck: lambda must be > 0");
    if (direct_stream.value_or(cfg.stream_id) != split_stream.value_or(cfg.stream_id))
        throw config_error(
            "eta_step_crosscheck: both integrations must consume the same noise stream");

    const FourierGrid grid = make_grid(cfg.n);
    const double dt = cfg.dt;
    const double slot = noise_slot_dt > 0.0 ? noise_slot_dt : dt / 4.0;
    const long slots_per_half = std::lround((dt / 2.0) / slot);
    if (slots_per_half < 1 || std::abs(slots_per_half * slot - dt / 2.0) > 1e-9 * dt)
        throw config_error("eta_step_crosscheck: dt/2 must be a whole number of noise slots");

    const std::uint64_t stream = direct_stream.value_or(cfg.stream_id);
    const detail::SlotNoise noise(cfg.spectrum, RngStream(cfg.seed, stream), slot);

    // stationary zeta(t0), drawn once from a derived stream so every
    // refinement level starts from the same sample
    RngStream zeta_rng = RngStream(cfg.seed, stream).substream(0x0e7a);
    ScalarField zeta = stationary_sample(cfg.spectrum, grid, lambda, zeta_rng).zeta;

    ScalarField xi = chi;
    xi.truncate(grid.kmax_dealias);
    xi.project_mean_zero();
    ScalarField eta = xi;
    eta -= zeta;

    const long nsteps = std::lround((cfg.t1 - cfg.t0) / dt);
    const double half_decay_g = std::exp(-cfg.gamma * dt / 2.0);
    const double half_decay_l = std::exp(-lambda * dt / 2.0);

    CrosscheckReport rep;
    rep.dt = dt;
    rep.steps = nsteps;
    rep.lambda = lambda;

    auto half_step = [&](long slot0) {
        if (cfg.gamma > 0.0) {
            xi *= half_decay_g;
            eta *= half_decay_g;
        }
        zeta *= half_decay_l;
        noise.add_ou_increment(xi, cfg.gamma, slot0, slot0 + slots_per_half);
        noise.add_ou_increment(zeta, lambda, slot0, slot0 + slots_per_half);
    };

    for (long step = 0; step < nsteps; ++step) {
        const long base = 2 * slots_per_half * step;
        half_step(base);

        if (cfg.advection_enabled) {
            xi = detail::rk3_advect(xi, cfg);
            eta = detail::ssp_rk3(eta, dt, [&](const ScalarField& e) {
                return eta_advection_rhs(e, zeta, lambda, cfg.gamma);
            });
        } else if (lambda != cfg.gamma) {
            eta.axpy(dt * (lambda - cfg.gamma), zeta);
        }

        half_step(base + slots_per_half);
        xi.project_mean_zero();
        eta.project_mean_zero();
        zeta.project_mean_zero();

        ScalarField diff = eta;
        diff += zeta;
        diff -= xi;
        rep.final_discrepancy = lp_norm(diff, 2.0);
        rep.max_discrepancy = std::max(rep.max_discrepancy, rep.final_discrepancy);
    }
    return rep;
}

} // namespace ekman
