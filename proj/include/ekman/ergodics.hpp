#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "ekman/dynamics.hpp"
#include "ekman/observable.hpp"

namespace ekman {

// Running trapezoid time-average of an observable along a trajectory; the
// numerical stand-in for the Cesaro averages of the law.
class CesaroAccumulator {
public:
    void update(double value, double t) {
        if (count_ > 0 && t <= t_now_)
            throw ordering_error("CesaroAccumulator: samples must have strictly increasing t");
        if (count_ == 0) {
            t_start_ = t;
            first_value_ = value;
        } else {
            integral_ += 0.5 * (value + last_value_) * (t - t_now_);
        }
        t_now_ = t;
        last_value_ = value;
        ++count_;
    }

    double estimate() const {
        if (count_ < 2)
            throw ordering_error("CesaroAccumulator: estimate undefined before two samples");
        return integral_ / (t_now_ - t_start_);
    }

    double integral() const { return integral_; }
    double t_start() const { return t_start_; }
    double t_now() const { return t_now_; }
    long count() const { return count_; }

    // Combine accumulators over adjacent intervals (b after a). When b starts
    // exactly where a ends the result equals one accumulator over the union.
    static CesaroAccumulator merge(const CesaroAccumulator& a, const CesaroAccumulator& b) {
        if (a.count_ == 0) return b;
        if (b.count_ == 0) return a;
        if (b.t_start_ < a.t_now_)
            throw ordering_error("CesaroAccumulator::merge: intervals out of order");
        CesaroAccumulator out;
        out.integral_ = a.integral_ + b.integral_ +
                        0.5 * (a.last_value_ + b.first_value_) * (b.t_start_ - a.t_now_);
        out.t_start_ = a.t_start_;
        out.t_now_ = b.t_now_;
        out.first_value_ = a.first_value_;
        out.last_value_ = b.last_value_;
        out.count_ = a.count_ + b.count_;
        return out;
    }

private:
    double integral_ = 0.0;
    double t_start_ = 0.0;
    double t_now_ = 0.0;
    double first_value_ = 0.0;
    double last_value_ = 0.0;
    long count_ = 0;
};

struct BatchMeansResult {
    double mean = 0.0;
    double se = 0.0;
    int batches = 0;
};

// Standard error via batch means: contiguous batches respect the temporal
// correlation that plain iid formulas would ignore.
inline BatchMeansResult batch_means_se(const std::vector<double>& samples, int batches = 10) {
    BatchMeansResult out;
    if (batches < 2 || samples.size() < static_cast<std::size_t>(2 * batches)) return out;
    const std::size_t per = samples.size() / batches;
    std::vector<double> means;
    means.reserve(batches);
    for (int b = 0; b < batches; ++b) {
        double acc = 0.0;
        for (std::size_t i = b * per; i < (b + 1) * per; ++i) acc += samples[i];
        means.push_back(acc / static_cast<double>(per));
    }
    double m = 0.0;
    for (double v : means) m += v;
    m /= batches;
    double var = 0.0;
    for (double v : means) var += (v - m) * (v - m);
    var /= (batches - 1);
    out.mean = m;
    out.se = std::sqrt(var / batches);
    out.batches = batches;
    return out;
}

struct MarkovReport {
    double lhs = 0.0;       // E phi(xi(t+s)) by direct Monte Carlo
    double rhs = 0.0;       // E of the inner estimate of (P_s phi)(xi(t))
    double se = 0.0;        // pooled standard error of lhs - rhs
    double z_score = 0.0;
    int m_outer = 0;
    int m_inner = 0;
};

// Monte Carlo check of the Markov/semigroup identity: the law of xi(t+s)
// started fresh must match restarting from the frozen state xi(t) with
// independent noise continuations.
inline MarkovReport markov_semigroup_test(const SimConfig& cfg, double t, double s,
                                          const ObservableSpec& phi_spec, int m_outer,
                                          int m_inner) {
    if (t <= 0.0 || s < 0.0)
        throw std::domain_error("markov_semigroup_test: horizons must be positive (s may be 0)");
    if (m_outer < 2 || m_inner < 2)
        throw std::domain_error("markov_semigroup_test: need at least two samples per level");

    const FourierGrid grid = make_grid(cfg.n);
    const Observable phi(phi_spec, grid);
    const ScalarField chi = build_initial(cfg.initial, grid);
    const RngStream base(cfg.seed, cfg.stream_id);

    SimConfig run = cfg;
    run.observables.clear();
    run.snapshot_every = 0;

    // lhs: full paths over [0, t+s]
    std::vector<double> lhs_vals(m_outer);
    for (int m = 0; m < m_outer; ++m) {
        SimConfig c = run;
        c.t0 = 0.0;
        c.t1 = t + s;
        c.stream_id = base.substream(0x10000u + m).stream_id();
        lhs_vals[m] = phi(integrate(chi, c).final_state.xi);
    }

    // rhs: freeze at t, then average fresh continuations over [t, t+s]. The
    // outer segment replays the lhs stream, so its frozen state is the lhs
    // path at time t; the continuations then branch off with derived streams.
    std::vector<double> rhs_vals(m_outer);
    for (int m = 0; m < m_outer; ++m) {
        SimConfig c = run;
        c.t0 = 0.0;
        c.t1 = t;
        c.stream_id = base.substream(0x10000u + m).stream_id();
        const ScalarField frozen = integrate(chi, c).final_state.xi;

        if (s == 0.0) {
            rhs_vals[m] = phi(frozen);
            continue;
        }
        double acc = 0.0;
        for (int j = 0; j < m_inner; ++j) {
            SimConfig cc = run;
            cc.t0 = t;
            cc.t1 = t + s;
            cc.stream_id =
                base.substream(0x30000u + static_cast<std::uint64_t>(m) * 65536u + j).stream_id();
            acc += phi(integrate(frozen, cc).final_state.xi);
        }
        rhs_vals[m] = acc / m_inner;
    }

    auto mean_var = [](const std::vector<double>& v) {
        double m = 0.0;
        for (double x : v) m += x;
        m /= static_cast<double>(v.size());
        double var = 0.0;
        for (double x : v) var += (x - m) * (x - m);
        var /= static_cast<double>(v.size() - 1);
        return std::pair<double, double>{m, var};
    };

    MarkovReport rep;
    rep.m_outer = m_outer;
    rep.m_inner = m_inner;
    const auto [lm, lv] = mean_var(lhs_vals);
    const auto [rm, rv] = mean_var(rhs_vals);
    rep.lhs = lm;
    rep.rhs = rm;
    rep.se = std::sqrt(lv / m_outer + rv / m_outer);
    const double diff = std::abs(lm - rm);
    rep.z_score = rep.se > 0.0
                      ? diff / rep.se
                      : (diff == 0.0 ? 0.0 : std::numeric_limits<double>::infinity());
    return rep;
}

struct TailReport {
    std::vector<double> times;
    std::vector<double> epsilons;
    // quantiles[time][epsilon]: empirical (1-eps) quantile of |xi(t)|_inf
    std::vector<std::vector<double>> quantiles;
    std::vector<double> r_eps;  // per epsilon, max over sample times
    bool gamma_warning = false;
    int trajectories = 0;
};

// Empirical tail radii of |xi(t)|_inf from a cold start over an ensemble:
// the numerical surrogate for uniform boundedness in probability.
inline TailReport tail_bound_report(const SimConfig& cfg, std::vector<double> sample_times,
                                    int trajectories,
                                    std::vector<double> epsilons = {0.1, 0.05, 0.01}) {
    if (cfg.initial.kind != InitialCondition::Kind::zero)
        throw config_error("tail_bound_report: requires the zero initial condition");
    if (trajectories < 2) throw std::domain_error("tail_bound_report: need at least 2 paths");
    std::sort(sample_times.begin(), sample_times.end());
    if (!sample_times.empty() && sample_times.front() < 0.0)
        throw std::domain_error("tail_bound_report: sample times must be >= 0");

    TailReport rep;
    rep.times = sample_times;
    rep.epsilons = epsilons;
    rep.gamma_warning = (cfg.gamma <= 0.0);
    rep.trajectories = trajectories;

    const FourierGrid grid = make_grid(cfg.n);
    const ScalarField zero(grid);
    const RngStream base(cfg.seed, cfg.stream_id);
    const double horizon = sample_times.empty() ? 0.0 : sample_times.back();

    std::vector<long> sample_steps;
    for (double T : sample_times) sample_steps.push_back(std::lround(T / cfg.dt));

    // samples[time][trajectory]
    std::vector<std::vector<double>> samples(sample_times.size(),
                                             std::vector<double>(trajectories, 0.0));
    for (int m = 0; m < trajectories; ++m) {
        SimConfig c = cfg;
        c.observables.clear();
        c.snapshot_every = 0;
        c.t0 = 0.0;
        c.t1 = horizon;
        c.stream_id = base.substream(0x40000u + m).stream_id();
        integrate(zero, c, [&](const TrajectoryState& st) {
            for (std::size_t i = 0; i < sample_steps.size(); ++i)
                if (st.step_count == sample_steps[i]) samples[i][m] = st.xi.max_abs();
        });
    }

    rep.quantiles.assign(sample_times.size(), std::vector<double>(epsilons.size(), 0.0));
    rep.r_eps.assign(epsilons.size(), 0.0);
    for (std::size_t i = 0; i < sample_times.size(); ++i) {
        std::vector<double> sorted = samples[i];
        std::sort(sorted.begin(), sorted.end());
        for (std::size_t e = 0; e < epsilons.size(); ++e) {
            // nearest-rank (1-eps) quantile
            const double q = 1.0 - epsilons[e];
            std::size_t idx = static_cast<std::size_t>(std::ceil(q * trajectories));
            idx = std::min(std::max<std::size_t>(idx, 1), sorted.size()) - 1;
            rep.quantiles[i][e] = sorted[idx];
            rep.r_eps[e] = std::max(rep.r_eps[e], sorted[idx]);
        }
    }
    return rep;
}

struct CesaroStudy {
    std::vector<std::string> names;
    std::vector<double> horizons;
    // estimates[observable][horizon index]: time average over [burn_in, burn_in + n]
    std::vector<std::vector<double>> estimates;
    // doubled[observable][horizon index]: same over [burn_in, burn_in + 2n]
    std::vector<std::vector<double>> doubled;
    // diffs[observable][horizon index] = |estimate - doubled|
    std::vector<std::vector<double>> diffs;
    std::vector<bool> decreasing;  // per observable, diffs strictly decreasing
    std::vector<BatchMeansResult> full_window;  // over [burn_in, end]
    double burn_in = 0.0;
};

// Convergence study of the Cesaro averages along one trajectory: for each
// catalog observable the n -> 2n horizon differences should shrink as the
// time averages settle.
inline CesaroStudy cesaro_convergence_study(const SimConfig& cfg, double burn_in,
                                            std::vector<double> horizons, int batches = 10) {
    std::sort(horizons.begin(), horizons.end());
    if (horizons.empty()) throw config_error("cesaro_convergence_study: empty horizon list");

    SimConfig run = cfg;
    if (run.observables.empty()) run.observables = default_catalog();
    run.snapshot_every = 0;
    run.t0 = 0.0;
    run.t1 = burn_in + 2.0 * horizons.back();

    const FourierGrid grid = make_grid(run.n);
    const ScalarField chi = build_initial(run.initial, grid);
    const TrajectoryRecord rec = integrate(chi, run);

    CesaroStudy study;
    study.names = rec.names;
    study.horizons = horizons;
    study.burn_in = burn_in;

    const std::size_t nobs = rec.names.size();
    const std::size_t nsamp = rec.times.size();
    std::size_t start = 0;
    while (start < nsamp && rec.times[start] < burn_in - 1e-12) ++start;

    for (std::size_t o = 0; o < nobs; ++o) {
        // prefix trapezoid integral from the burn-in sample onward
        std::vector<double> prefix(nsamp, 0.0);
        for (std::size_t i = start + 1; i < nsamp; ++i)
            prefix[i] = prefix[i - 1] + 0.5 * (rec.series[o][i] + rec.series[o][i - 1]) *
                                            (rec.times[i] - rec.times[i - 1]);
        auto average_to = [&](double horizon) {
            const double target = burn_in + horizon;
            std::size_t idx = start;
            while (idx + 1 < nsamp && rec.times[idx + 1] <= target + 1e-12) ++idx;
            const double span = rec.times[idx] - rec.times[start];
            return span > 0.0 ? prefix[idx] / span : 0.0;
        };

        std::vector<double> est, est2, diff;
        for (double n : horizons) {
            est.push_back(average_to(n));
            est2.push_back(average_to(2.0 * n));
            diff.push_back(std::abs(est.back() - est2.back()));
        }
        bool dec = true;
        for (std::size_t i = 1; i < diff.size(); ++i) dec = dec && (diff[i] < diff[i - 1]);
        study.estimates.push_back(std::move(est));
        study.doubled.push_back(std::move(est2));
        study.diffs.push_back(std::move(diff));
        study.decreasing.push_back(dec);

        std::vector<double> post(rec.series[o].begin() + start, rec.series[o].end());
        study.full_window.push_back(batch_means_se(post, batches));
    }
    return study;
}

} // namespace ekman
