#pragma once

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

#include "ekman/dynamics.hpp"
#include "ekman/spectral.hpp"

namespace ekman {

struct DiagnosticRecord {
    double time = 0.0;
    double energy = 0.0;      // |u|_2
    double enstrophy = 0.0;   // |xi|_2
    double lp4 = 0.0;         // |xi|_4
    double linf = 0.0;        // |xi|_inf
    double grad4 = 0.0;       // |grad xi|_4
    double gradu_inf = 0.0;   // |grad u|_inf
    double kato_ratio = 0.0;  // 0 recorded for the zero field
    double sobolev_a = 0.0;   // ||xi||_{H^a}
};

// Trajectory-wise lower bound for the constant in the log-interpolation
// velocity-gradient estimate:
// |grad u|_inf <= C |xi|_inf [1 + log(1 + |grad xi|_4 / |xi|_inf)].
inline double kato_ratio(const ScalarField& xi) {
    const double linf = linf_norm(xi);
    if (linf <= 0.0) throw std::domain_error("kato_ratio: undefined for the zero field");
    const double gradu = grad_linf_norm(biot_savart(xi));
    const double grad4 = grad_lp_norm(xi, 4.0);
    return gradu / (linf * (1.0 + std::log(1.0 + grad4 / linf)));
}

inline DiagnosticRecord diagnose(const ScalarField& xi, double time, double a) {
    DiagnosticRecord rec;
    rec.time = time;
    rec.enstrophy = lp_norm(xi, 2.0);
    rec.lp4 = lp_norm(xi, 4.0);
    rec.linf = linf_norm(xi);
    rec.grad4 = grad_lp_norm(xi, 4.0);
    rec.sobolev_a = sobolev_norm(xi, a);
    if (rec.linf > 0.0) {
        const VelocityField u = biot_savart(xi);
        rec.energy = l2_norm(u);
        rec.gradu_inf = grad_linf_norm(u);
        rec.kato_ratio = rec.gradu_inf / (rec.linf * (1.0 + std::log(1.0 + rec.grad4 / rec.linf)));
    }
    return rec;
}

struct ContdepRow {
    int n = 0;
    double gap = 0.0;  // |<xi(T; chi + sin(n x1)) - xi(T; chi), g>|
};

// Pathwise continuous-dependence probe: perturb the initial vorticity by a
// high-frequency sinusoid (weak-star null as n grows), rerun under the
// identical noise realization, and measure the pairing gap at final time.
inline std::vector<ContdepRow> contdep_test(const ScalarField& chi, const SimConfig& cfg,
                                            const ScalarField& g, const std::vector<int>& n_list,
                                            double amplitude = 1.0) {
    const FourierGrid grid = make_grid(cfg.n);
    for (int n : n_list)
        if (n <= 0 || n > grid.kmax_dealias)
            throw config_error("contdep_test: perturbation frequency " + std::to_string(n) +
                               " outside the retained band (kmax = " +
                               std::to_string(grid.kmax_dealias) + ")");
    if (g.n() != cfg.n) throw config_error("contdep_test: test function on the wrong grid");

    SimConfig run = cfg;
    run.observables.clear();
    run.snapshot_every = 0;

    const ScalarField base = integrate(chi, run).final_state.xi;

    std::vector<ContdepRow> rows;
    for (int n : n_list) {
        ScalarField pert = chi;
        if (amplitude != 0.0) pert.add_sin(n, 0, amplitude);
        ScalarField diff = integrate(pert, run).final_state.xi;
        diff -= base;
        rows.push_back({n, std::abs(pairing(diff, g))});
    }
    return rows;
}

struct ConservationCheck {
    std::string quantity;
    double drift = 0.0;
    double tolerance = 0.0;
    bool pass = false;
};

struct ConservationReport {
    std::vector<ConservationCheck> checks;
    bool pass = true;
};

// Deterministic invariants of the scheme. With gamma = 0 the quadratic
// invariants and the L4 norm must hold their initial values; with gamma > 0
// the damping-compensated norms e^{gamma t} |xi|_p must stay constant.
inline ConservationReport conservation_suite(const SimConfig& cfg) {
    if (cfg.spectrum.amplitude != 0.0)
        throw config_error("conservation_suite: requires sigma = 0 (deterministic run)");

    const FourierGrid grid = make_grid(cfg.n);
    const ScalarField chi = build_initial(cfg.initial, grid);

    SimConfig run = cfg;
    run.observables.clear();
    run.snapshot_every = 0;

    struct Track {
        double initial = -1.0;
        double max_rel_dev = 0.0;
        void feed(double v) {
            if (initial < 0.0) {
                initial = v;
                return;
            }
            if (initial == 0.0) {
                max_rel_dev = std::max(max_rel_dev, v == 0.0 ? 0.0 : 1e300);
                return;
            }
            max_rel_dev = std::max(max_rel_dev, std::abs(v - initial) / initial);
        }
    };
    Track ens, lp4, energy, comp2, comp4;

    integrate(chi, run, [&](const TrajectoryState& st) {
        const double t = st.time - cfg.t0;
        const double l2 = lp_norm(st.xi, 2.0);
        const double l4 = lp_norm(st.xi, 4.0);
        if (cfg.gamma == 0.0) {
            ens.feed(l2);
            lp4.feed(l4);
            energy.feed(l2_norm(biot_savart(st.xi)));
        } else {
            const double boost = std::exp(cfg.gamma * t);
            comp2.feed(l2 * boost);
            comp4.feed(l4 * boost);
        }
    });

    const double duration = std::max(cfg.t1 - cfg.t0, 1e-300);
    ConservationReport rep;
    auto push = [&](const std::string& name, double drift, double tol) {
        rep.checks.push_back({name, drift, tol, drift <= tol});
        rep.pass = rep.pass && rep.checks.back().pass;
    };
    if (cfg.gamma == 0.0) {
        // per-unit-time relative drift
        push("enstrophy", ens.max_rel_dev / duration, 1e-6);
        push("lp4", lp4.max_rel_dev / duration, 1e-6);
        push("energy", energy.max_rel_dev / duration, 1e-6);
    } else {
        push("compensated_l2", comp2.max_rel_dev, 1e-6);
        push("compensated_l4", comp4.max_rel_dev, 1e-6);
    }
    return rep;
}

struct Grad4Report {
    std::vector<double> times;
    std::vector<double> grad4;
    double sup = 0.0;     // over [burn_in, T]
    double median = 0.0;  // over [burn_in, T]
    bool bounded = false; // sup <= 10 x median: no secular blow-up
};

// Track |grad xi(t)|_4 along a run and judge whether it stays bounded.
inline Grad4Report grad4_track(const SimConfig& cfg, double burn_in = 10.0) {
    SimConfig run = cfg;
    run.observables.clear();
    run.snapshot_every = 0;

    const FourierGrid grid = make_grid(run.n);
    const ScalarField chi = build_initial(run.initial, grid);

    Grad4Report rep;
    integrate(chi, run, [&](const TrajectoryState& st) {
        rep.times.push_back(st.time);
        rep.grad4.push_back(grad_lp_norm(st.xi, 4.0));
    });

    const double cutoff = std::min(cfg.t0 + burn_in, cfg.t0 + 0.5 * (cfg.t1 - cfg.t0));
    std::vector<double> tail;
    for (std::size_t i = 0; i < rep.times.size(); ++i)
        if (rep.times[i] >= cutoff) tail.push_back(rep.grad4[i]);
    if (tail.empty()) return rep;

    rep.sup = *std::max_element(tail.begin(), tail.end());
    std::vector<double> sorted = tail;
    std::nth_element(sorted.begin(), sorted.begin() + sorted.size() / 2, sorted.end());
    rep.median = sorted[sorted.size() / 2];
    rep.bounded = rep.sup <= 10.0 * rep.median;
    return rep;
}

} // namespace ekman
