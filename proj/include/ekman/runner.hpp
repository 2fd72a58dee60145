#pragma once

#include <atomic>
#include <cmath>
#include <filesystem>
#include <iostream>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

#include "ekman/config.hpp"
#include "ekman/csv.hpp"
#include "ekman/diagnostics.hpp"
#include "ekman/ergodics.hpp"
#include "ekman/ou.hpp"
#include "ekman/snapshot.hpp"

namespace ekman {

namespace detail {

template <typename Fn>
void parallel_for(int count, int workers, Fn&& fn) {
    workers = std::max(1, std::min(workers, count));
    if (workers == 1) {
        for (int i = 0; i < count; ++i) fn(i);
        return;
    }
    std::atomic<int> next{0};
    std::mutex err_mutex;
    std::exception_ptr err;
    std::vector<std::thread> pool;
    for (int w = 0; w < workers; ++w)
        pool.emplace_back([&] {
            for (;;) {
                const int i = next.fetch_add(1);
                if (i >= count) return;
                try {
                    fn(i);
                } catch (...) {
                    std::lock_guard<std::mutex> lock(err_mutex);
                    if (!err) err = std::current_exception();
                    return;
                }
            }
        });
    for (auto& t : pool) t.join();
    if (err) std::rethrow_exception(err);
}

} // namespace detail

struct Verdict {
    std::string name;
    double value = 0.0;
    std::string constraint;
    bool pass = false;
};

struct RunResult {
    int exit_code = 0;
    std::vector<Verdict> verdicts;
    std::vector<std::string> warnings;
    std::filesystem::path out_dir;
};

namespace detail {

inline ObservableSpec find_observable(const RunConfig& cfg, const std::string& name) {
    for (const auto& spec : cfg.sim.observables)
        if (spec.name == name) return spec;
    throw config_error("no observable named '" + name + "' in the configured catalog");
}

inline ScalarField build_test_function(const TestFunctionSpec& spec, const FourierGrid& grid) {
    ScalarField g(grid);
    for (const auto& term : spec.terms) {
        if (std::abs(term.k1) > grid.kmax_dealias || std::abs(term.k2) > grid.kmax_dealias)
            throw config_error("test-function mode outside the retained band");
        if (term.is_sin)
            g.add_sin(term.k1, term.k2, term.amplitude);
        else
            g.add_cos(term.k1, term.k2, term.amplitude);
    }
    return g;
}

inline void write_series_csv(const std::filesystem::path& path, const TrajectoryRecord& rec) {
    csv::Writer w(path.string());
    std::vector<std::string> names = {"time"};
    names.insert(names.end(), rec.names.begin(), rec.names.end());
    w.header(names);
    for (std::size_t i = 0; i < rec.times.size(); ++i) {
        std::vector<double> row = {rec.times[i]};
        for (const auto& s : rec.series) row.push_back(s[i]);
        w.row(row);
    }
}

inline void write_snapshots(const std::filesystem::path& dir, const TrajectoryRecord& rec,
                            const SimConfig& sim) {
    for (const auto& snap : rec.snapshots) {
        const long step = std::lround((snap.time - sim.t0) / sim.dt);
        char name[32];
        std::snprintf(name, sizeof(name), "snap_%08ld.vort", step);
        snapshot::write((dir / name).string(), snap.field, snap.time);
    }
}

inline void write_summary(const std::filesystem::path& dir, Command command,
                          const RunConfig& cfg, const RunResult& result) {
    nlohmann::json j;
    j["command"] = command_name(command);
    j["pass"] = result.exit_code == 0;
    j["warnings"] = result.warnings;
    nlohmann::json verdicts = nlohmann::json::array();
    for (const auto& v : result.verdicts)
        verdicts.push_back({{"name", v.name},
                            {"value", v.value},
                            {"constraint", v.constraint},
                            {"pass", v.pass}});
    j["verdicts"] = verdicts;
    j["config"] = nlohmann::json::parse(serialize(cfg));
    std::ofstream out(dir / "summary.json");
    out << j.dump(2) << "\n";
}

inline void log_verdicts(std::ostream& log, const RunResult& result) {
    for (const auto& w : result.warnings) log << "warning: " << w << "\n";
    for (const auto& v : result.verdicts)
        log << (v.pass ? "[PASS] " : "[FAIL] ") << v.name << " = " << v.value << "  ("
            << v.constraint << ")\n";
}

} // namespace detail

// Dispatch one experiment command. Artifacts land in cfg.output.dir: the
// echoed config, a summary manifest with verdicts, and command-specific CSV
// tables and snapshots. Exit code 0 when every verdict passes, 1 otherwise.
inline RunResult run_command(Command command, const RunConfig& cfg, int workers = 1,
                             bool quiet = false, std::ostream* log_stream = nullptr) {
    namespace fs = std::filesystem;
    std::ostream& log = log_stream ? *log_stream : std::cout;

    RunResult result;
    result.warnings = config_warnings(cfg, command);
    const fs::path dir = cfg.output.dir;
    fs::create_directories(dir);
    {
        std::ofstream echo(dir / "config.json");
        echo << serialize(cfg);
    }

    const FourierGrid grid = make_grid(cfg.sim.n);
    auto add = [&](const std::string& name, double value, const std::string& constraint,
                   bool pass) { result.verdicts.push_back({name, value, constraint, pass}); };

    switch (command) {
        case Command::simulate: {
            const ScalarField chi = build_initial(cfg.sim.initial, grid);
            const TrajectoryRecord rec = integrate(chi, cfg.sim);
            if (cfg.output.csv) detail::write_series_csv(dir / "series.csv", rec);
            if (cfg.output.snapshots) detail::write_snapshots(dir, rec, cfg.sim);
            add("steps", static_cast<double>(rec.times.size() - 1), "completed", true);
            break;
        }

        case Command::ensemble: {
            const int m = cfg.ensemble.trajectories;
            std::vector<TrajectoryRecord> records(m);
            detail::parallel_for(m, workers, [&](int i) {
                SimConfig sim = cfg.sim;
                sim.stream_id = cfg.sim.stream_id + static_cast<std::uint64_t>(i);
                const ScalarField chi = build_initial(sim.initial, make_grid(sim.n));
                records[i] = integrate(chi, sim);
            });
            if (cfg.output.csv) {
                for (int i = 0; i < m; ++i) {
                    char name[32];
                    std::snprintf(name, sizeof(name), "traj_%04d.csv", i);
                    detail::write_series_csv(dir / name, records[i]);
                }
                // cross-trajectory mean of every observable, per time sample
                csv::Writer mean(dir / "ensemble_mean.csv");
                std::vector<std::string> names = {"time"};
                names.insert(names.end(), records[0].names.begin(), records[0].names.end());
                mean.header(names);
                for (std::size_t s = 0; s < records[0].times.size(); ++s) {
                    std::vector<double> row = {records[0].times[s]};
                    for (std::size_t o = 0; o < records[0].series.size(); ++o) {
                        double acc = 0.0;
                        for (int i = 0; i < m; ++i) acc += records[i].series[o][s];
                        row.push_back(acc / m);
                    }
                    mean.row(row);
                }
            }
            add("trajectories", m, "completed", true);
            break;
        }

        case Command::ou_calibrate: {
            const double s_a = curl_growth_rate(cfg.sim.spectrum, cfg.ou.a);
            const double lambda =
                cfg.ou.lambda > 0.0
                    ? cfg.ou.lambda
                    : calibrate_lambda(cfg.sim.gamma, cfg.sim.spectrum, cfg.ou.a, cfg.ou.c_tilde);
            const double margin =
                calibration_margin(cfg.sim.gamma, cfg.sim.spectrum, cfg.ou.a, cfg.ou.c_tilde,
                                   lambda);
            if (!quiet)
                log << "lambda = " << lambda << "\nS_a = " << s_a << "\nmargin = " << margin
                    << "\n";
            if (cfg.output.csv) {
                csv::Writer w(dir / "ou_calibrate.csv");
                w.header({"lambda", "s_a", "margin", "gamma", "a", "c_tilde"});
                w.row({lambda, s_a, margin, cfg.sim.gamma, cfg.ou.a, cfg.ou.c_tilde});
            }
            add("margin", margin, "gamma/2 - c_tilde sqrt(S_a/(2 lambda)) > 0", margin > 0.0);
            break;
        }

        case Command::invariant: {
            const CesaroStudy study = cesaro_convergence_study(
                cfg.sim, cfg.invariant.burn_in, cfg.invariant.horizons, cfg.invariant.batches);
            if (cfg.output.csv) {
                csv::Writer w(dir / "invariant.csv");
                w.header({"observable", "n", "estimate", "estimate_2n", "diff"});
                for (std::size_t o = 0; o < study.names.size(); ++o)
                    for (std::size_t h = 0; h < study.horizons.size(); ++h)
                        w.raw_row({study.names[o], csv::format(study.horizons[h]),
                                   csv::format(study.estimates[o][h]),
                                   csv::format(study.doubled[o][h]),
                                   csv::format(study.diffs[o][h])});
                csv::Writer bw(dir / "invariant_batch_means.csv");
                bw.header({"observable", "mean", "se", "batches"});
                for (std::size_t o = 0; o < study.names.size(); ++o)
                    bw.raw_row({study.names[o], csv::format(study.full_window[o].mean),
                                csv::format(study.full_window[o].se),
                                std::to_string(study.full_window[o].batches)});
            }
            for (std::size_t o = 0; o < study.names.size(); ++o)
                add("cesaro_decreasing/" + study.names[o],
                    study.diffs[o].empty() ? 0.0 : study.diffs[o].back(),
                    "|est(n) - est(2n)| decreasing over the horizon list",
                    study.decreasing[o]);
            break;
        }

        case Command::markov_test: {
            const ObservableSpec phi = detail::find_observable(cfg, cfg.markov.observable);
            const MarkovReport rep = markov_semigroup_test(
                cfg.sim, cfg.markov.t, cfg.markov.s, phi, cfg.markov.m_outer, cfg.markov.m_inner);
            if (!quiet)
                log << "lhs = " << rep.lhs << "\nrhs = " << rep.rhs << "\nse = " << rep.se
                    << "\nz = " << rep.z_score << "\n";
            if (cfg.output.csv) {
                csv::Writer w(dir / "markov.csv");
                w.header({"lhs", "rhs", "se", "z", "m_outer", "m_inner", "t", "s"});
                w.row({rep.lhs, rep.rhs, rep.se, rep.z_score,
                       static_cast<double>(rep.m_outer), static_cast<double>(rep.m_inner),
                       cfg.markov.t, cfg.markov.s});
            }
            add("markov_z", rep.z_score, "|lhs - rhs| <= 3 pooled standard errors",
                rep.z_score <= 3.0);
            break;
        }

        case Command::tail_report: {
            const TailReport rep =
                tail_bound_report(cfg.sim, cfg.tail.times, cfg.tail.trajectories);
            if (cfg.output.csv) {
                csv::Writer w(dir / "tail.csv");
                std::vector<std::string> names = {"time"};
                for (double eps : rep.epsilons)
                    names.push_back("R_" + csv::format(eps));
                w.header(names);
                for (std::size_t i = 0; i < rep.times.size(); ++i) {
                    std::vector<double> row = {rep.times[i]};
                    for (std::size_t e = 0; e < rep.epsilons.size(); ++e)
                        row.push_back(rep.quantiles[i][e]);
                    w.row(row);
                }
            }
            // stabilization of the 90% radius between the reference and last times
            double q_ref = 0.0, q_last = 0.0;
            for (std::size_t i = 0; i < rep.times.size(); ++i) {
                if (rep.times[i] == cfg.tail.ref_time) q_ref = rep.quantiles[i][0];
                if (i + 1 == rep.times.size()) q_last = rep.quantiles[i][0];
            }
            const double ratio = q_ref > 0.0 ? q_last / q_ref : 0.0;
            add("tail_stabilization_ratio", ratio,
                "R_0.1(t_last)/R_0.1(t_ref) within [" + csv::format(cfg.tail.band_lo) + ", " +
                    csv::format(cfg.tail.band_hi) + "]",
                q_ref > 0.0 && ratio >= cfg.tail.band_lo && ratio <= cfg.tail.band_hi);
            if (rep.gamma_warning)
                add("gamma_positive", cfg.sim.gamma, "corollary hypothesis gamma > 0", false);
            break;
        }

        case Command::contdep_test: {
            const ScalarField chi = build_initial(cfg.sim.initial, grid);
            const ScalarField g = detail::build_test_function(cfg.contdep.g, grid);
            const auto rows =
                contdep_test(chi, cfg.sim, g, cfg.contdep.n_list, cfg.contdep.amplitude);
            if (cfg.output.csv) {
                csv::Writer w(dir / "contdep.csv");
                w.header({"n", "gap"});
                for (const auto& row : rows)
                    w.row({static_cast<double>(row.n), row.gap});
            }
            bool monotone = true;
            for (std::size_t i = 1; i < rows.size(); ++i)
                monotone = monotone && (rows[i].gap < rows[i - 1].gap);
            add("contdep_monotone", monotone ? 1.0 : 0.0,
                "pairing gap decreases along the frequency list", monotone);
            if (rows.size() >= 2) {
                const double ratio =
                    rows.front().gap > 0.0 ? rows.back().gap / rows.front().gap : 0.0;
                add("contdep_ratio", ratio,
                    "gap(n_last)/gap(n_first) <= " + csv::format(cfg.contdep.ratio_max),
                    ratio <= cfg.contdep.ratio_max);
            }
            break;
        }

        case Command::checks: {
            // deterministic sub-runs need a nonzero field to say anything
            InitialCondition det_initial = cfg.sim.initial;
            if (det_initial.kind == InitialCondition::Kind::zero) {
                det_initial.kind = InitialCondition::Kind::random_band;
                det_initial.kmax = std::min(8, grid.kmax_dealias);
                det_initial.linf = 1.0;
                det_initial.seed = cfg.sim.seed;
            }

            SimConfig inviscid = cfg.sim;
            inviscid.gamma = 0.0;
            inviscid.spectrum.amplitude = 0.0;
            inviscid.initial = det_initial;
            inviscid.t0 = 0.0;
            inviscid.t1 = 1.0;
            const ConservationReport cons0 = conservation_suite(inviscid);
            for (const auto& c : cons0.checks)
                add("conservation_gamma0/" + c.quantity, c.drift,
                    "relative drift per unit time <= " + csv::format(c.tolerance), c.pass);

            if (cfg.sim.gamma > 0.0) {
                SimConfig damped = inviscid;
                damped.gamma = cfg.sim.gamma;
                damped.t1 = 2.0;
                const ConservationReport consg = conservation_suite(damped);
                for (const auto& c : consg.checks)
                    add("conservation_damped/" + c.quantity, c.drift,
                        "compensated norm constant to " + csv::format(c.tolerance), c.pass);
            }

            // single-mode log-estimate ratio against its closed form
            ScalarField single(grid);
            single.add_sin(1, 0, 1.0);
            const double kato = kato_ratio(single);
            const double kato_expected =
                1.0 / (1.0 + std::log(1.0 + std::pow(1.5 * pi * pi, 0.25)));
            add("kato_single_mode", kato,
                "matches the closed form " + csv::format(kato_expected) + " to 1e-6",
                std::abs(kato - kato_expected) <= 1e-6);

            if (cfg.sim.spectrum.amplitude > 0.0) {
                // one stochastic run feeds the kato supremum, the W14 verdict
                // and the diagnostic series
                SimConfig stoch = cfg.sim;
                stoch.observables.clear();
                stoch.snapshot_every = 0;
                const ScalarField chi = build_initial(stoch.initial, grid);
                std::vector<DiagnosticRecord> series;
                std::vector<double> kato_samples, grad4_samples, times;
                integrate(chi, stoch, [&](const TrajectoryState& st) {
                    if (st.step_count % 10 != 0) return;
                    const DiagnosticRecord rec = diagnose(st.xi, st.time, cfg.ou.a);
                    series.push_back(rec);
                    times.push_back(st.time);
                    kato_samples.push_back(rec.kato_ratio);
                    grad4_samples.push_back(rec.grad4);
                });

                if (cfg.output.csv) {
                    csv::Writer w(dir / "diagnostics.csv");
                    w.header({"time", "energy", "enstrophy", "lp4", "linf", "grad4",
                              "gradu_inf", "kato_ratio", "sobolev_a"});
                    for (const auto& r : series)
                        w.row({r.time, r.energy, r.enstrophy, r.lp4, r.linf, r.grad4,
                               r.gradu_inf, r.kato_ratio, r.sobolev_a});
                }

                double half_max = 0.0, full_max = 0.0;
                const double t_half = stoch.t0 + 0.5 * (stoch.t1 - stoch.t0);
                const double t_three_quarters = stoch.t0 + 0.75 * (stoch.t1 - stoch.t0);
                double final_quarter_max = 0.0;
                for (std::size_t i = 0; i < times.size(); ++i) {
                    full_max = std::max(full_max, kato_samples[i]);
                    if (times[i] <= t_half) half_max = std::max(half_max, kato_samples[i]);
                    if (times[i] >= t_three_quarters)
                        final_quarter_max = std::max(final_quarter_max, kato_samples[i]);
                }
                add("kato_sup_stabilized", half_max > 0.0 ? final_quarter_max / half_max : 0.0,
                    "final-quarter max <= 1.1 x half-run max",
                    half_max > 0.0 && final_quarter_max <= 1.1 * half_max);

                std::vector<double> tail;
                const double cutoff =
                    std::min(stoch.t0 + 10.0, stoch.t0 + 0.5 * (stoch.t1 - stoch.t0));
                for (std::size_t i = 0; i < times.size(); ++i)
                    if (times[i] >= cutoff) tail.push_back(grad4_samples[i]);
                if (!tail.empty()) {
                    std::vector<double> sorted = tail;
                    std::nth_element(sorted.begin(), sorted.begin() + sorted.size() / 2,
                                     sorted.end());
                    const double median = sorted[sorted.size() / 2];
                    const double sup = *std::max_element(tail.begin(), tail.end());
                    add("grad4_bounded", median > 0.0 ? sup / median : 0.0,
                        "sup <= 10 x median after burn-in", sup <= 10.0 * median);
                }
            }
            break;
        }
    }

    for (const auto& v : result.verdicts)
        if (!v.pass) result.exit_code = 1;
    if (command == Command::checks && cfg.output.csv) {
        csv::Writer w(dir / "checks.csv");
        w.header({"check", "value", "constraint", "verdict"});
        for (const auto& v : result.verdicts)
            w.raw_row({v.name, csv::format(v.value), "\"" + v.constraint + "\"",
                       v.pass ? "pass" : "fail"});
    }
    detail::write_summary(dir, command, cfg, result);
    result.out_dir = dir;
    if (!quiet) detail::log_verdicts(log, result);
    return result;
}

} // namespace ekman
