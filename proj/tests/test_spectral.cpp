#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <complex>

#include "ekman/spectral.hpp"

using namespace ekman;

namespace {

ScalarField single_sin(const FourierGrid& g, int k1, int k2, double amp = 1.0) {
    ScalarField f(g);
    f.add_sin(k1, k2, amp);
    return f;
}

double rel_diff(double a, double b) { return std::abs(a - b) / std::max(std::abs(b), 1e-300); }

} // namespace

TEST_CASE("make_grid basics") {
    CHECK(make_grid(128).kmax_dealias == 42);
    CHECK(make_grid(16).kmax_dealias == 5);
    CHECK_THROWS_AS(make_grid(15), config_error);
    CHECK_THROWS_AS(make_grid(14), config_error);
    CHECK_THROWS_AS(make_grid(8192), config_error);
    CHECK_THROWS_WITH(make_grid(15), Catch::Matchers::ContainsSubstring("even"));
}

TEST_CASE("grid-spectral round trip and conjugate symmetry") {
    const auto g = make_grid(64);
    RngStream rng(7, 0);
    ScalarField f = random_band_limited(g, 12, 2.0, rng);

    // round trip through the grid view
    ScalarField f2 = ScalarField::from_grid(g, f.values());
    double max_err = 0.0;
    for (int k1 = -12; k1 <= 12; ++k1)
        for (int k2 = -12; k2 <= 12; ++k2)
            max_err = std::max(max_err, std::abs(f2.coeff(k1, k2) - f.coeff(k1, k2)));
    CHECK(max_err <= 1e-12 * f.max_abs());

    // symmetry is structural: coeff(-k) must be the exact conjugate
    for (int k1 = -5; k1 <= 5; ++k1)
        for (int k2 = -5; k2 <= 5; ++k2)
            CHECK(f.coeff(-k1, -k2) == std::conj(f.coeff(k1, k2)));

    CHECK(std::abs(f.mean()) <= 1e-12 * f.max_abs());
}

TEST_CASE("biot_savart single mode") {
    const auto g = make_grid(64);
    const ScalarField xi = single_sin(g, 1, 0);
    const VelocityField u = biot_savart(xi);

    // lap(psi) = sin(x1) gives psi = -sin(x1), u = (-d2 psi, d1 psi) = (0, -cos(x1))
    double err1 = 0.0, err2 = 0.0;
    for (int i = 0; i < g.n; ++i)
        for (int j = 0; j < g.n; ++j) {
            err1 = std::max(err1, std::abs(u.u1.at(i, j)));
            err2 = std::max(err2, std::abs(u.u2.at(i, j) + std::cos(g.x(i))));
        }
    CHECK(err1 <= 1e-12);
    CHECK(err2 <= 1e-12);
}

TEST_CASE("biot_savart zero field and mean check") {
    const auto g = make_grid(32);
    const VelocityField u = biot_savart(ScalarField(g));
    CHECK(u.u1.max_abs() == 0.0);
    CHECK(u.u2.max_abs() == 0.0);

    ScalarField bad(g);
    bad.mutable_values().assign(static_cast<std::size_t>(g.n) * g.n, 1.0);
    CHECK_THROWS_AS(biot_savart(bad), invariant_error);
}

TEST_CASE("biot_savart properties over random fields") {
    const auto g = make_grid(64);
    RngStream rng(11, 0);
    for (int trial = 0; trial < 20; ++trial) {
        ScalarField xi = random_band_limited(g, g.kmax_dealias, 1.5, rng);
        const VelocityField u = biot_savart(xi);

        double cmax = 0.0;
        for (const auto& z : u.u1.coeffs()) cmax = std::max(cmax, std::abs(z));
        for (const auto& z : u.u2.coeffs()) cmax = std::max(cmax, std::abs(z));
        CHECK(spectral_divergence_max(u) <= 1e-14 * std::max(cmax, 1e-300) * g.n);

        // curl recovers the input spectrally
        ScalarField back = curl(u);
        back -= xi;
        double diff = 0.0;
        for (const auto& z : back.coeffs()) diff = std::max(diff, std::abs(z));
        CHECK(diff <= 1e-12 * std::max(1.0, xi.max_abs()));

        CHECK(std::abs(u.u1.mean()) <= 1e-13);
        CHECK(std::abs(u.u2.mean()) <= 1e-13);
    }
}

TEST_CASE("advection of a single mode vanishes") {
    const auto g = make_grid(64);
    const ScalarField xi = single_sin(g, 1, 0);
    const ScalarField adv = advection(xi, biot_savart(xi));
    CHECK(adv.max_abs() <= 1e-12);
}

TEST_CASE("advection of zero is zero") {
    const auto g = make_grid(32);
    const ScalarField zero(g);
    const ScalarField adv = advection(zero, biot_savart(zero));
    CHECK(adv.max_abs() == 0.0);
}

TEST_CASE("advection orthogonality <u.grad xi, xi> = 0") {
    const auto g = make_grid(64);
    RngStream rng(23, 0);
    for (int trial = 0; trial < 100; ++trial) {
        ScalarField xi = random_band_limited(g, g.kmax_dealias, 2.0, rng, 0.5);
        const VelocityField u = biot_savart(xi);
        const ScalarField adv = advection(xi, u);
        const double ip = std::abs(pairing(adv, xi));
        CHECK(ip <= 1e-10 * lp_norm(xi, 2.0) * grad_lp_norm(xi, 2.0));
    }
}

TEST_CASE("advection grid mismatch") {
    const ScalarField a(make_grid(32));
    const ScalarField b(make_grid(64));
    CHECK_THROWS_AS(advection(a, biot_savart(b)), config_error);
    CHECK_THROWS_AS(pairing(a, b), config_error);
}

TEST_CASE("norms of sin(x1)") {
    const auto g = make_grid(64);  // divisible by 4, so the grid hits x1 = pi/2
    const ScalarField f = single_sin(g, 1, 0);

    // integral of sin^2(x1) over the square is 2 pi^2
    CHECK(rel_diff(lp_norm(f, 2.0), std::sqrt(2.0 * pi * pi)) <= 1e-12);
    CHECK(lp_norm(f, 2.0) == Catch::Approx(4.442882938158366).epsilon(1e-12));

    CHECK(linf_norm(f) == Catch::Approx(1.0).epsilon(1e-12));

    // integral of cos^4 over the square is 3 pi^2 / 2
    CHECK(rel_diff(grad_lp_norm(f, 4.0), std::pow(1.5 * pi * pi, 0.25)) <= 1e-12);
    CHECK(grad_lp_norm(f, 4.0) == Catch::Approx(1.961542630300344).epsilon(1e-12));

    // one conjugate pair with |coeff| = 1/2: sum over the full lattice is 1/2
    for (double a : {0.0, 1.0, 3.0, 4.5})
        CHECK(rel_diff(sobolev_norm(f, a), std::sqrt(0.5)) <= 1e-12);
}

TEST_CASE("norm domain errors") {
    const ScalarField f(make_grid(32));
    CHECK_THROWS_AS(lp_norm(f, 0.5), std::domain_error);
    CHECK_THROWS_AS(grad_lp_norm(f, 0.0), std::domain_error);
    CHECK_THROWS_AS(sobolev_norm(f, -1.0), std::domain_error);
}

TEST_CASE("pairing values") {
    const auto g = make_grid(64);
    const ScalarField s1 = single_sin(g, 1, 0);
    const ScalarField s2 = single_sin(g, 0, 1);

    CHECK(rel_diff(pairing(s1, s1), 2.0 * pi * pi) <= 1e-12);
    CHECK(pairing(s1, ScalarField(g)) == 0.0);
    CHECK(std::abs(pairing(s1, s2)) <= 1e-12);
}

TEST_CASE("pairing is bilinear") {
    const auto g = make_grid(64);
    RngStream rng(5, 0);
    for (int trial = 0; trial < 25; ++trial) {
        const ScalarField x1 = random_band_limited(g, 10, 1.0, rng);
        const ScalarField x2 = random_band_limited(g, 10, 1.0, rng);
        const ScalarField gg = random_band_limited(g, 10, 1.0, rng);
        const double a = 2.0 * rng.uniform() - 1.0;
        const double b = 2.0 * rng.uniform() - 1.0;
        ScalarField combo = x1;
        combo *= a;
        combo.axpy(b, x2);
        const double lhs = pairing(combo, gg);
        const double rhs = a * pairing(x1, gg) + b * pairing(x2, gg);
        CHECK(std::abs(lhs - rhs) <= 1e-12 * std::max(1.0, std::abs(rhs)));
    }
}

TEST_CASE("self_advection agrees with the gradient-form advection") {
    const auto g = make_grid(64);
    RngStream rng(37, 0);
    for (int trial = 0; trial < 20; ++trial) {
        const ScalarField xi = random_band_limited(g, g.kmax_dealias, 1.5, rng, 0.5);
        ScalarField fast = self_advection(xi);
        const ScalarField slow = advection(xi, biot_savart(xi));
        fast -= slow;
        double diff = 0.0;
        for (const auto& z : fast.coeffs()) diff = std::max(diff, std::abs(z));
        CHECK(diff <= 1e-12 * std::max(1.0, linf_norm(slow)));
    }
}

TEST_CASE("Parseval identity") {
    const auto g = make_grid(64);
    RngStream rng(13, 0);
    for (int trial = 0; trial < 20; ++trial) {
        const ScalarField f = random_band_limited(g, g.kmax_dealias, 1.0, rng);
        const double l2 = lp_norm(f, 2.0);
        const double spectral = two_pi * sobolev_norm(f, 0.0);
        CHECK(rel_diff(l2 * l2, spectral * spectral) <= 1e-12);
    }
}
