#pragma once

#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "ekman/dynamics.hpp"
#include "ekman/observable.hpp"

namespace ekman {

enum class Command {
    simulate,
    ensemble,
    ou_calibrate,
    invariant,
    markov_test,
    tail_report,
    contdep_test,
    checks,
};

inline const char* command_name(Command c) {
    switch (c) {
        case Command::simulate: return "simulate";
        case Command::ensemble: return "ensemble";
        case Command::ou_calibrate: return "ou-calibrate";
        case Command::invariant: return "invariant";
        case Command::markov_test: return "markov-test";
        case Command::tail_report: return "tail-report";
        case Command::contdep_test: return "contdep-test";
        case Command::checks: return "checks";
    }
    return "?";
}

inline Command command_from_name(const std::string& name) {
    for (Command c : {Command::simulate, Command::ensemble, Command::ou_calibrate,
                      Command::invariant, Command::markov_test, Command::tail_report,
                      Command::contdep_test, Command::checks})
        if (name == command_name(c)) return c;
    throw config_error("unknown command '" + name + "'");
}

struct InvariantParams {
    double burn_in = 10.0;
    std::vector<double> horizons = {25.0, 50.0, 100.0, 200.0};
    int batches = 10;
    bool operator==(const InvariantParams&) const = default;
};

struct MarkovParams {
    double t = 1.0;
    double s = 1.0;
    int m_outer = 200;
    int m_inner = 50;
    std::string observable = "tanh_s10";
    bool operator==(const MarkovParams&) const = default;
};

struct TailParams {
    std::vector<double> times = {5.0, 10.0, 20.0, 40.0};
    int trajectories = 200;
    double ref_time = 10.0;     // stabilization compares the last time against this
    double band_lo = 0.5;
    double band_hi = 2.0;
    bool operator==(const TailParams&) const = default;
};

struct ContdepParams {
    std::vector<int> n_list = {4, 8, 16, 32};
    TestFunctionSpec g = {{{true, 1, 0, 1.0}, {false, 0, 1, 1.0}}};
    double amplitude = 1.0;
    double ratio_max = 0.2;  // gap(n_last) / gap(n_first) must not exceed this
    bool operator==(const ContdepParams&) const = default;
};

struct OuParams {
    double a = 3.0;
    double c_tilde = 1.0;
    double lambda = 0.0;  // 0 means calibrate from gamma and the spectrum
    bool operator==(const OuParams&) const = default;
};

struct EnsembleParams {
    int trajectories = 4;
    bool operator==(const EnsembleParams&) const = default;
};

struct OutputParams {
    std::string dir = "out";
    bool csv = true;
    bool snapshots = true;
    bool operator==(const OutputParams&) const = default;
};

struct RunConfig {
    SimConfig sim{};
    bool default_observables = true;  // "observables": "default"
    InvariantParams invariant{};
    MarkovParams markov{};
    TailParams tail{};
    ContdepParams contdep{};
    OuParams ou{};
    EnsembleParams ensemble{};
    OutputParams output{};

    bool operator==(const RunConfig&) const = default;
};

namespace detail {

using nlohmann::json;

// Strict-schema reader: every key must be consumed, unknown keys are errors.
class StrictObject {
public:
    StrictObject(const json& j, std::string path) : j_(j), path_(std::move(path)) {
        if (!j_.is_object())
            throw config_error("config: expected an object at " + path_);
    }

    bool has(const char* key) const { return j_.contains(key); }

    template <typename T>
    void get(const char* key, T& out) {
        seen_.insert(key);
        if (!j_.contains(key)) return;
        try {
            out = j_.at(key).get<T>();
        } catch (const json::exception& e) {
            throw config_error("config: bad value for '" + path_ + key + "': " + e.what());
        }
    }

    const json& raw(const char* key) {
        seen_.insert(key);
        return j_.at(key);
    }

    std::string child_path(const char* key) const { return path_ + key + "."; }

    void finish() const {
        for (const auto& item : j_.items())
            if (!seen_.count(item.key()))
                throw config_error("config: unknown key '" + path_ + item.key() + "'");
    }

private:
    const json& j_;
    std::string path_;
    std::set<std::string> seen_;
};

inline TestFunctionSpec parse_test_function(const json& j, const std::string& path) {
    StrictObject o(j, path);
    TestFunctionSpec spec;
    if (o.has("terms")) {
        const json& terms = o.raw("terms");
        if (!terms.is_array()) throw config_error("config: '" + path + "terms' must be an array");
        for (std::size_t i = 0; i < terms.size(); ++i) {
            StrictObject t(terms[i], path + "terms[" + std::to_string(i) + "].");
            TestFunctionTerm term;
            std::string fn = "sin";
            std::vector<int> k = {1, 0};
            t.get("fn", fn);
            t.get("k", k);
            t.get("amplitude", term.amplitude);
            t.finish();
            if (fn != "sin" && fn != "cos")
                throw config_error("config: test-function fn must be 'sin' or 'cos'");
            if (k.size() != 2) throw config_error("config: test-function k must have 2 entries");
            term.is_sin = (fn == "sin");
            term.k1 = k[0];
            term.k2 = k[1];
            spec.terms.push_back(term);
        }
    }
    o.finish();
    if (spec.terms.empty())
        throw config_error("config: test function at " + path + " has no terms");
    return spec;
}

inline json test_function_to_json(const TestFunctionSpec& spec) {
    json terms = json::array();
    for (const auto& t : spec.terms)
        terms.push_back({{"fn", t.is_sin ? "sin" : "cos"},
                         {"k", {t.k1, t.k2}},
                         {"amplitude", t.amplitude}});
    return json{{"terms", terms}};
}

inline ObservableSpec parse_observable(const json& j, const std::string& path) {
    StrictObject o(j, path);
    ObservableSpec spec;
    o.get("name", spec.name);
    if (spec.name.empty()) throw config_error("config: observable at " + path + " needs a name");

    if (o.has("outer")) {
        StrictObject out(o.raw("outer"), path + "outer.");
        std::string kind = "tanh";
        out.get("kind", kind);
        if (kind == "identity")
            spec.outer.kind = OuterSpec::Kind::identity;
        else if (kind == "poly")
            spec.outer.kind = OuterSpec::Kind::clipped_poly;
        else if (kind == "tanh")
            spec.outer.kind = OuterSpec::Kind::tanh_combo;
        else if (kind == "band")
            spec.outer.kind = OuterSpec::Kind::smoothed_band;
        else
            throw config_error("config: unknown outer kind '" + kind + "'");
        out.get("index", spec.outer.index);
        out.get("bound", spec.outer.bound);
        out.get("coeffs", spec.outer.coeffs);
        out.get("weights", spec.outer.weights);
        out.get("bias", spec.outer.bias);
        out.get("lo", spec.outer.lo);
        out.get("hi", spec.outer.hi);
        out.get("width", spec.outer.width);
        out.finish();
        if (spec.outer.bound <= 0.0)
            throw config_error("config: observable bound must be positive");
        if (spec.outer.width <= 0.0)
            throw config_error("config: band width must be positive");
    }

    const json& tfs = o.raw("test_functions");
    if (!tfs.is_array() || tfs.empty())
        throw config_error("config: '" + path + "test_functions' must be a non-empty array");
    for (std::size_t i = 0; i < tfs.size(); ++i)
        spec.test_functions.push_back(
            parse_test_function(tfs[i], path + "test_functions[" + std::to_string(i) + "]."));
    o.finish();
    return spec;
}

inline json observable_to_json(const ObservableSpec& spec) {
    json outer;
    switch (spec.outer.kind) {
        case OuterSpec::Kind::identity: outer["kind"] = "identity"; break;
        case OuterSpec::Kind::clipped_poly: outer["kind"] = "poly"; break;
        case OuterSpec::Kind::tanh_combo: outer["kind"] = "tanh"; break;
        case OuterSpec::Kind::smoothed_band: outer["kind"] = "band"; break;
    }
    outer["index"] = spec.outer.index;
    outer["bound"] = spec.outer.bound;
    outer["coeffs"] = spec.outer.coeffs;
    outer["weights"] = spec.outer.weights;
    outer["bias"] = spec.outer.bias;
    outer["lo"] = spec.outer.lo;
    outer["hi"] = spec.outer.hi;
    outer["width"] = spec.outer.width;

    json tfs = json::array();
    for (const auto& tf : spec.test_functions) tfs.push_back(test_function_to_json(tf));
    return json{{"name", spec.name}, {"outer", outer}, {"test_functions", tfs}};
}

inline InitialCondition parse_initial(const json& j, const std::string& path) {
    StrictObject o(j, path);
    InitialCondition ic;
    std::string preset = "zero";
    o.get("preset", preset);
    if (preset == "zero") {
        ic.kind = InitialCondition::Kind::zero;
    } else if (preset == "random") {
        ic.kind = InitialCondition::Kind::random_band;
        o.get("kmax", ic.kmax);
        o.get("linf", ic.linf);
        o.get("seed", ic.seed);
        if (ic.kmax < 1) throw config_error("config: initial kmax must be >= 1");
        if (ic.linf < 0.0) throw config_error("config: initial linf must be >= 0");
    } else if (preset == "modes") {
        ic.kind = InitialCondition::Kind::modes;
        const json& modes = o.raw("modes");
        if (!modes.is_array()) throw config_error("config: initial modes must be an array");
        for (std::size_t i = 0; i < modes.size(); ++i) {
            StrictObject m(modes[i], path + "modes[" + std::to_string(i) + "].");
            InitialCondition::Mode mode;
            std::vector<int> k = {1, 0};
            m.get("k", k);
            m.get("cos", mode.cos_amp);
            m.get("sin", mode.sin_amp);
            m.finish();
            if (k.size() != 2) throw config_error("config: mode k must have 2 entries");
            mode.k1 = k[0];
            mode.k2 = k[1];
            ic.modes.push_back(mode);
        }
    } else if (preset == "file") {
        ic.kind = InitialCondition::Kind::grid_file;
        o.get("path", ic.path);
        if (ic.path.empty()) throw config_error("config: initial file preset needs a path");
    } else {
        throw config_error("config: unknown initial preset '" + preset + "'");
    }
    o.finish();
    return ic;
}

inline json initial_to_json(const InitialCondition& ic) {
    switch (ic.kind) {
        case InitialCondition::Kind::zero:
            return json{{"preset", "zero"}};
        case InitialCondition::Kind::random_band:
            return json{{"preset", "random"}, {"kmax", ic.kmax}, {"linf", ic.linf},
                        {"seed", ic.seed}};
        case InitialCondition::Kind::modes: {
            json modes = json::array();
            for (const auto& m : ic.modes)
                modes.push_back({{"k", {m.k1, m.k2}}, {"cos", m.cos_amp}, {"sin", m.sin_amp}});
            return json{{"preset", "modes"}, {"modes", modes}};
        }
        case InitialCondition::Kind::grid_file:
            return json{{"preset", "file"}, {"path", ic.path}};
    }
    return {};
}

} // namespace detail

// Parse and validate a config document. Unknown keys are rejected; module
// invariants are checked here so commands can trust their inputs.
inline RunConfig parse_config(const std::string& text) {
    using detail::StrictObject;
    nlohmann::json j;
    if (text.find_first_not_of(" \t\r\n") == std::string::npos) {
        j = nlohmann::json::object();
    } else {
        try {
            j = nlohmann::json::parse(text);
        } catch (const nlohmann::json::exception& e) {
            throw config_error(std::string("config: not valid JSON: ") + e.what());
        }
    }

    RunConfig cfg;
    StrictObject o(j, "");
    o.get("n", cfg.sim.n);
    o.get("dt", cfg.sim.dt);
    o.get("gamma", cfg.sim.gamma);
    o.get("t0", cfg.sim.t0);
    o.get("t1", cfg.sim.t1);
    o.get("seed", cfg.sim.seed);
    o.get("stream_id", cfg.sim.stream_id);
    o.get("snapshot_every", cfg.sim.snapshot_every);
    o.get("advection", cfg.sim.advection_enabled);

    if (o.has("noise")) {
        StrictObject noise(o.raw("noise"), "noise.");
        noise.get("alpha", cfg.sim.spectrum.alpha);
        noise.get("h", cfg.sim.spectrum.h);
        noise.get("kcut", cfg.sim.spectrum.kcut);
        noise.get("amplitude", cfg.sim.spectrum.amplitude);
        noise.finish();
    }

    if (o.has("initial")) cfg.sim.initial = detail::parse_initial(o.raw("initial"), "initial.");

    if (o.has("observables")) {
        const nlohmann::json& obs = o.raw("observables");
        if (obs.is_string()) {
            if (obs.get<std::string>() != "default")
                throw config_error("config: 'observables' must be \"default\" or an array");
            cfg.default_observables = true;
        } else if (obs.is_array()) {
            cfg.default_observables = false;
            for (std::size_t i = 0; i < obs.size(); ++i)
                cfg.sim.observables.push_back(detail::parse_observable(
                    obs[i], "observables[" + std::to_string(i) + "]."));
        } else {
            throw config_error("config: 'observables' must be \"default\" or an array");
        }
    }
    if (cfg.default_observables) cfg.sim.observables = default_catalog();

    if (o.has("invariant")) {
        StrictObject inv(o.raw("invariant"), "invariant.");
        inv.get("burn_in", cfg.invariant.burn_in);
        inv.get("horizons", cfg.invariant.horizons);
        inv.get("batches", cfg.invariant.batches);
        inv.finish();
    }
    if (o.has("markov")) {
        StrictObject mk(o.raw("markov"), "markov.");
        mk.get("t", cfg.markov.t);
        mk.get("s", cfg.markov.s);
        mk.get("m_outer", cfg.markov.m_outer);
        mk.get("m_inner", cfg.markov.m_inner);
        mk.get("observable", cfg.markov.observable);
        mk.finish();
    }
    if (o.has("tail")) {
        StrictObject tl(o.raw("tail"), "tail.");
        tl.get("times", cfg.tail.times);
        tl.get("trajectories", cfg.tail.trajectories);
        tl.get("ref_time", cfg.tail.ref_time);
        tl.get("band_lo", cfg.tail.band_lo);
        tl.get("band_hi", cfg.tail.band_hi);
        tl.finish();
    }
    if (o.has("contdep")) {
        StrictObject cd(o.raw("contdep"), "contdep.");
        cd.get("n_list", cfg.contdep.n_list);
        if (cd.has("g")) cfg.contdep.g = detail::parse_test_function(cd.raw("g"), "contdep.g.");
        cd.get("amplitude", cfg.contdep.amplitude);
        cd.get("ratio_max", cfg.contdep.ratio_max);
        cd.finish();
    }
    if (o.has("ou")) {
        StrictObject ou(o.raw("ou"), "ou.");
        ou.get("a", cfg.ou.a);
        ou.get("c_tilde", cfg.ou.c_tilde);
        ou.get("lambda", cfg.ou.lambda);
        ou.finish();
    }
    if (o.has("ensemble")) {
        StrictObject en(o.raw("ensemble"), "ensemble.");
        en.get("trajectories", cfg.ensemble.trajectories);
        en.finish();
    }
    if (o.has("output")) {
        StrictObject out(o.raw("output"), "output.");
        out.get("dir", cfg.output.dir);
        out.get("csv", cfg.output.csv);
        out.get("snapshots", cfg.output.snapshots);
        out.finish();
    }
    o.finish();

    // module invariants, checked up front
    make_grid(cfg.sim.n);
    if (cfg.sim.dt <= 0.0) throw config_error("config: dt must be > 0");
    if (cfg.sim.t1 < cfg.sim.t0) throw config_error("config: t1 must be >= t0");
    if (cfg.sim.gamma < 0.0) throw config_error("config: gamma must be >= 0");
    if (cfg.sim.spectrum.amplitude < 0.0)
        throw config_error("config: noise amplitude must be >= 0");
    if (cfg.sim.spectrum.kcut < 1)
        throw config_error("config: noise kcut must be >= 1");
    if (cfg.sim.spectrum.kcut > cfg.sim.n / 3)
        throw config_error("config: noise kcut " + std::to_string(cfg.sim.spectrum.kcut) +
                           " exceeds the dealias cutoff floor(N/3) = " +
                           std::to_string(cfg.sim.n / 3));
    if (cfg.sim.spectrum.alpha <= cfg.sim.spectrum.h + 1.0)
        throw config_error(
            "config: alpha must exceed h+1 so the noise regularity sum converges (alpha = " +
            std::to_string(cfg.sim.spectrum.alpha) + ", h = " +
            std::to_string(cfg.sim.spectrum.h) + ")");
    if (cfg.sim.spectrum.h <= 3.0)
        throw config_error("config: noise regularity index h must exceed 3");
    if (cfg.ou.a <= 2.0)
        throw config_error("config: ou.a must exceed 2 (H^(a-1) must embed into L^inf)");
    if (cfg.ou.c_tilde <= 0.0) throw config_error("config: ou.c_tilde must be > 0");
    if (cfg.ou.lambda < 0.0) throw config_error("config: ou.lambda must be >= 0");
    if (cfg.ensemble.trajectories < 1)
        throw config_error("config: ensemble.trajectories must be >= 1");
    if (cfg.markov.m_outer < 2 || cfg.markov.m_inner < 2)
        throw config_error("config: markov sample counts must be >= 2");
    if (cfg.tail.trajectories < 2)
        throw config_error("config: tail.trajectories must be >= 2");
    return cfg;
}

// Per-command warnings (accepted configs that violate soft hypotheses).
inline std::vector<std::string> config_warnings(const RunConfig& cfg, Command command) {
    std::vector<std::string> warnings;
    if (cfg.sim.gamma == 0.0 &&
        (command == Command::invariant || command == Command::tail_report))
        warnings.push_back(
            "gamma = 0: the invariant-measure construction assumes strictly positive damping");
    if (cfg.sim.spectrum.h <= 4.0 &&
        (command == Command::checks || command == Command::invariant))
        warnings.push_back("h <= 4: W^{1,4} diagnostics assume regularity index h > 4");
    return warnings;
}

inline std::string serialize(const RunConfig& cfg) {
    using nlohmann::json;
    json j;
    j["n"] = cfg.sim.n;
    j["dt"] = cfg.sim.dt;
    j["gamma"] = cfg.sim.gamma;
    j["t0"] = cfg.sim.t0;
    j["t1"] = cfg.sim.t1;
    j["seed"] = cfg.sim.seed;
    j["stream_id"] = cfg.sim.stream_id;
    j["snapshot_every"] = cfg.sim.snapshot_every;
    j["advection"] = cfg.sim.advection_enabled;
    j["noise"] = {{"alpha", cfg.sim.spectrum.alpha},
                  {"h", cfg.sim.spectrum.h},
                  {"kcut", cfg.sim.spectrum.kcut},
                  {"amplitude", cfg.sim.spectrum.amplitude}};
    j["initial"] = detail::initial_to_json(cfg.sim.initial);
    if (cfg.default_observables) {
        j["observables"] = "default";
    } else {
        json arr = json::array();
        for (const auto& spec : cfg.sim.observables)
            arr.push_back(detail::observable_to_json(spec));
        j["observables"] = arr;
    }
    j["invariant"] = {{"burn_in", cfg.invariant.burn_in},
                      {"horizons", cfg.invariant.horizons},
                      {"batches", cfg.invariant.batches}};
    j["markov"] = {{"t", cfg.markov.t},
                   {"s", cfg.markov.s},
                   {"m_outer", cfg.markov.m_outer},
                   {"m_inner", cfg.markov.m_inner},
                   {"observable", cfg.markov.observable}};
    j["tail"] = {{"times", cfg.tail.times},
                 {"trajectories", cfg.tail.trajectories},
                 {"ref_time", cfg.tail.ref_time},
                 {"band_lo", cfg.tail.band_lo},
                 {"band_hi", cfg.tail.band_hi}};
    j["contdep"] = {{"n_list", cfg.contdep.n_list},
                    {"g", detail::test_function_to_json(cfg.contdep.g)},
                    {"amplitude", cfg.contdep.amplitude},
                    {"ratio_max", cfg.contdep.ratio_max}};
    j["ou"] = {{"a", cfg.ou.a}, {"c_tilde", cfg.ou.c_tilde}, {"lambda", cfg.ou.lambda}};
    j["ensemble"] = {{"trajectories", cfg.ensemble.trajectories}};
    j["output"] = {{"dir", cfg.output.dir},
                   {"csv", cfg.output.csv},
                   {"snapshots", cfg.output.snapshots}};
    return j.dump(2) + "\n";
}

} // namespace ekman
