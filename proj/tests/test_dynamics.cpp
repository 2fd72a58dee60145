#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "ekman/diagnostics.hpp"
#include "ekman/dynamics.hpp"

using namespace ekman;

namespace {

SimConfig quiet_config(int n, double dt, double gamma, double sigma, int kcut = 4) {
    SimConfig cfg;
    cfg.n = n;
    cfg.dt = dt;
    cfg.gamma = gamma;
    cfg.spectrum.amplitude = sigma;
    cfg.spectrum.kcut = kcut;
    cfg.seed = 42;
    return cfg;
}

} // namespace

TEST_CASE("exact damping with advection off") {
    SimConfig cfg = quiet_config(32, 1e-2, 0.8, 0.0);
    cfg.advection_enabled = false;

    const FourierGrid grid = make_grid(cfg.n);
    RngStream rng(3, 0);
    const ScalarField chi = random_band_limited(grid, 6, 1.0, rng);

    TrajectoryState st{chi, 0.0, RngStream(cfg.seed, 0), 0};
    const int steps = 1000;
    for (int i = 0; i < steps; ++i) st = sde_step(std::move(st), cfg);

    const double expected = std::exp(-cfg.gamma * steps * cfg.dt);
    ScalarField resid = st.xi;
    resid.axpy(-expected, chi);
    CHECK(resid.max_abs() <= 1e-12 * chi.max_abs());
}

TEST_CASE("single sinusoid is a steady state") {
    SimConfig cfg = quiet_config(64, 1e-3, 0.0, 0.0);
    const FourierGrid grid = make_grid(cfg.n);
    ScalarField chi(grid);
    chi.add_sin(1, 0, 1.0);

    TrajectoryState st{chi, 0.0, RngStream(cfg.seed, 0), 0};
    for (int i = 0; i < 1000; ++i) st = sde_step(std::move(st), cfg);

    ScalarField diff = st.xi;
    diff -= chi;
    CHECK(lp_norm(diff, 2.0) <= 1e-10);
}

TEST_CASE("inviscid run conserves energy and enstrophy") {
    SimConfig cfg = quiet_config(64, 1e-3, 0.0, 0.0);
    cfg.t1 = 0.5;
    const FourierGrid grid = make_grid(cfg.n);
    RngStream rng(17, 0);
    const ScalarField chi = random_band_limited(grid, 8, 1.0, rng, 1.5);

    const double z0 = lp_norm(chi, 2.0);
    const double e0 = l2_norm(biot_savart(chi));
    double max_z_drift = 0.0, max_e_drift = 0.0;
    integrate(chi, cfg, [&](const TrajectoryState& st) {
        max_z_drift = std::max(max_z_drift, std::abs(lp_norm(st.xi, 2.0) - z0) / z0);
        max_e_drift =
            std::max(max_e_drift, std::abs(l2_norm(biot_savart(st.xi)) - e0) / e0);
    });
    CHECK(max_z_drift <= 1e-6 * cfg.t1);
    CHECK(max_e_drift <= 1e-6 * cfg.t1);
}

TEST_CASE("damped deterministic run obeys the Gronwall decay") {
    SimConfig cfg = quiet_config(64, 1e-3, 1.0, 0.0);
    cfg.t1 = 2.0;
    const FourierGrid grid = make_grid(cfg.n);
    RngStream rng(21, 0);
    const ScalarField chi = random_band_limited(grid, 6, 0.5, rng, 1.5);

    const double c2 = lp_norm(chi, 2.0);
    const double c4 = lp_norm(chi, 4.0);
    double dev2 = 0.0, dev4 = 0.0;
    integrate(chi, cfg, [&](const TrajectoryState& st) {
        const double boost = std::exp(cfg.gamma * st.time);
        dev2 = std::max(dev2, std::abs(lp_norm(st.xi, 2.0) * boost - c2) / c2);
        dev4 = std::max(dev4, std::abs(lp_norm(st.xi, 4.0) * boost - c4) / c4);
    });
    CHECK(dev2 <= 1e-6);
    CHECK(dev4 <= 1e-6);
}

TEST_CASE("integrate with t1 == t0 returns only the initial state") {
    SimConfig cfg = quiet_config(32, 1e-2, 0.5, 1.0);
    cfg.t1 = cfg.t0;
    cfg.observables = default_catalog();
    const TrajectoryRecord rec = integrate(ScalarField(make_grid(cfg.n)), cfg);
    CHECK(rec.times.size() == 1);
    CHECK(rec.series.size() == cfg.observables.size());
    for (const auto& s : rec.series) CHECK(s.size() == 1);
}

TEST_CASE("identical seeds replay bit-identical series") {
    SimConfig cfg = quiet_config(32, 5e-3, 0.5, 1.0);
    cfg.t1 = 0.25;
    cfg.observables = default_catalog();
    const ScalarField chi(make_grid(cfg.n));

    const TrajectoryRecord a = integrate(chi, cfg);
    const TrajectoryRecord b = integrate(chi, cfg);
    REQUIRE(a.series.size() == b.series.size());
    for (std::size_t o = 0; o < a.series.size(); ++o) {
        REQUIRE(a.series[o].size() == b.series[o].size());
        for (std::size_t i = 0; i < a.series[o].size(); ++i)
            CHECK(a.series[o][i] == b.series[o][i]);
    }

    SimConfig other = cfg;
    other.stream_id = 1;
    const TrajectoryRecord c = integrate(chi, other);
    bool any_diff = false;
    for (std::size_t i = 0; i < a.series[0].size(); ++i)
        any_diff = any_diff || (a.series[0][i] != c.series[0][i]);
    CHECK(any_diff);
}

TEST_CASE("mean stays zero along stochastic runs") {
    SimConfig cfg = quiet_config(32, 5e-3, 0.5, 1.0);
    cfg.t1 = 0.5;
    double worst = 0.0;
    integrate(ScalarField(make_grid(cfg.n)), cfg, [&](const TrajectoryState& st) {
        worst = std::max(worst, std::abs(st.xi.mean()));
    });
    CHECK(worst <= 1e-12);
}

TEST_CASE("integrate rejects bad inputs") {
    SimConfig cfg = quiet_config(32, 1e-2, 0.5, 0.0);
    const FourierGrid grid = make_grid(cfg.n);

    ScalarField non_zero_mean(grid);
    non_zero_mean.mutable_values().assign(static_cast<std::size_t>(grid.n) * grid.n, 2.0);
    CHECK_THROWS_AS(integrate(non_zero_mean, cfg), invariant_error);

    CHECK_THROWS_AS(integrate(ScalarField(make_grid(64)), cfg), config_error);

    SimConfig backwards = cfg;
    backwards.t1 = -1.0;
    CHECK_THROWS_AS(integrate(ScalarField(grid), backwards), config_error);

    SimConfig wide = cfg;
    wide.spectrum.kcut = grid.kmax_dealias + 1;
    CHECK_THROWS_AS(integrate(ScalarField(grid), wide), config_error);
}

TEST_CASE("CFL guard fires on fast flows") {
    SimConfig cfg = quiet_config(64, 1e-2, 0.0, 0.0);
    const FourierGrid grid = make_grid(cfg.n);
    RngStream rng(9, 0);
    const ScalarField chi = random_band_limited(grid, 4, 5e3, rng);
    CHECK_THROWS_AS(integrate(chi, cfg), step_error);
}

TEST_CASE("divergence detection reports the blow-up") {
    SimConfig cfg = quiet_config(32, 1e-2, 0.0, 1e9, 2);
    cfg.advection_enabled = false;
    cfg.t1 = 0.5;
    CHECK_THROWS_AS(integrate(ScalarField(make_grid(cfg.n)), cfg), divergence_error);
}

TEST_CASE("snapshots follow snapshot_every") {
    SimConfig cfg = quiet_config(32, 1e-2, 0.5, 1.0);
    cfg.t1 = 0.1;  // 10 steps
    cfg.snapshot_every = 3;
    const TrajectoryRecord rec = integrate(ScalarField(make_grid(cfg.n)), cfg);
    REQUIRE(rec.snapshots.size() == 4);  // steps 0, 3, 6, 9
    CHECK(rec.snapshots[1].time == Catch::Approx(0.03));

    cfg.snapshot_every = 0;
    CHECK(integrate(ScalarField(make_grid(cfg.n)), cfg).snapshots.empty());
}

TEST_CASE("stochastic run stays bounded") {
    SimConfig cfg = quiet_config(64, 5e-3, 0.5, 1.0);
    cfg.t1 = 20.0;
    double running_max = 0.0, max_at_three_quarters = 0.0;
    integrate(ScalarField(make_grid(cfg.n)), cfg, [&](const TrajectoryState& st) {
        running_max = std::max(running_max, st.xi.max_abs());
        if (st.time <= 0.75 * cfg.t1) max_at_three_quarters = running_max;
    });
    CHECK(std::isfinite(running_max));
    CHECK(running_max > 0.0);
    // the running sup settles once the statistical steady state is reached
    CHECK(running_max <= 1.5 * max_at_three_quarters);
}

TEST_CASE("eta/zeta split matches the direct integration when decoupled") {
    // sigma = 0 and lambda = gamma: zeta stays 0 and the split scheme reduces
    // to the direct one step for step
    SimConfig cfg = quiet_config(64, 1e-2, 0.5, 0.0);
    cfg.t1 = 0.5;
    const FourierGrid grid = make_grid(cfg.n);
    RngStream rng(31, 0);
    const ScalarField chi = random_band_limited(grid, 8, 1.0, rng);

    const CrosscheckReport rep = eta_step_crosscheck(chi, cfg, cfg.gamma);
    CHECK(rep.max_discrepancy <= 1e-8);
}

TEST_CASE("eta/zeta split discrepancy is first order in dt") {
    SimConfig cfg = quiet_config(64, 2e-2, 0.5, 1.0, 4);
    cfg.t1 = 0.4;
    const FourierGrid grid = make_grid(cfg.n);
    RngStream rng(13, 0);
    const ScalarField chi = random_band_limited(grid, 6, 0.8, rng);
    const double lambda = 2.0;
    const double slot = cfg.dt / 8.0;  // shared by both refinement levels

    const CrosscheckReport coarse = eta_step_crosscheck(chi, cfg, lambda, slot);
    SimConfig fine = cfg;
    fine.dt = cfg.dt / 2.0;
    const CrosscheckReport refined = eta_step_crosscheck(chi, fine, lambda, slot);

    CHECK(coarse.max_discrepancy > 0.0);
    const double ratio = coarse.max_discrepancy / refined.max_discrepancy;
    CHECK(ratio >= 1.5);
    CHECK(ratio <= 2.5);
}

TEST_CASE("coupling term vanishes when lambda equals gamma") {
    const FourierGrid grid = make_grid(32);
    RngStream rng(5, 0);
    const ScalarField eta = random_band_limited(grid, 5, 1.0, rng);
    const ScalarField zeta = random_band_limited(grid, 5, 0.5, rng);
    const double gamma = 0.5, lambda_other = 1.7;

    ScalarField base = eta_advection_rhs(eta, zeta, gamma, gamma);
    ScalarField shifted = eta_advection_rhs(eta, zeta, lambda_other, gamma);
    shifted -= base;
    shifted.axpy(-(lambda_other - gamma), zeta);
    CHECK(shifted.max_abs() <= 1e-13);
}

TEST_CASE("crosscheck rejects mismatched streams") {
    SimConfig cfg = quiet_config(32, 1e-2, 0.5, 1.0, 4);
    cfg.t1 = 0.1;
    const ScalarField chi(make_grid(cfg.n));
    CHECK_THROWS_AS(eta_step_crosscheck(chi, cfg, 1.0, 0.0, std::uint64_t{0}, std::uint64_t{1}),
                    config_error);
}

TEST_CASE("discrete W14 cancellation: <u.grad grad(eta), grad(eta)|grad eta|^2> = 0") {
    const FourierGrid grid = make_grid(64);
    RngStream rng(27, 0);
    for (int trial = 0; trial < 10; ++trial) {
        // bandwidth N/8 keeps the quartic integrand exactly integrable
        const ScalarField eta = random_band_limited(grid, 8, 1.0, rng);
        const ScalarField stream_src = random_band_limited(grid, 8, 1.0, rng);
        const VelocityField u = biot_savart(stream_src);

        const ScalarField d1 = derivative(eta, 1);
        const ScalarField d2 = derivative(eta, 2);
        const ScalarField d11 = derivative(d1, 1);
        const ScalarField d12 = derivative(d1, 2);
        const ScalarField d21 = derivative(d2, 1);
        const ScalarField d22 = derivative(d2, 2);

        const auto& g1 = d1.values();
        const auto& g2 = d2.values();
        const auto& u1 = u.u1.values();
        const auto& u2 = u.u2.values();
        const auto& h11 = d11.values();
        const auto& h12 = d12.values();
        const auto& h21 = d21.values();
        const auto& h22 = d22.values();

        double acc = 0.0;
        for (std::size_t i = 0; i < g1.size(); ++i) {
            const double grad_sq = g1[i] * g1[i] + g2[i] * g2[i];
            const double term1 = (u1[i] * h11[i] + u2[i] * h12[i]) * g1[i];
            const double term2 = (u1[i] * h21[i] + u2[i] * h22[i]) * g2[i];
            acc += (term1 + term2) * grad_sq;
        }
        acc *= grid.cell();

        const double scale =
            linf_norm(u.u1) + linf_norm(u.u2);
        const double g4 = grad_lp_norm(eta, 4.0);
        CHECK(std::abs(acc) <= 1e-8 * std::max(1e-30, scale * g4 * g4 * g4 * g4));
    }
}
