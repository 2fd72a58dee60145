#include <catch2/catch_amalgamated.hpp>

#include <cstdint>
#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "ekman/ekman.hpp"

using namespace ekman;
namespace fs = std::filesystem;

namespace {

fs::path fresh_dir(const std::string& name) {
    const fs::path dir = fs::temp_directory_path() / ("ekman_cli_" + name);
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

std::string slurp(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    REQUIRE(in.good());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

} // namespace

TEST_CASE("empty config yields the documented defaults") {
    const RunConfig cfg = parse_config("");
    CHECK(cfg.sim.n == 128);
    CHECK(cfg.sim.dt == 1e-3);
    CHECK(cfg.sim.gamma == 0.5);
    CHECK(cfg.sim.spectrum.alpha == 6.0);
    CHECK(cfg.sim.spectrum.h == 4.5);
    CHECK(cfg.sim.spectrum.kcut == 8);
    CHECK(cfg.sim.spectrum.amplitude == 1.0);
    CHECK(cfg.ou.a == 3.0);
    CHECK(cfg.sim.seed == 42);
    CHECK(cfg.sim.observables.size() == default_catalog().size());
}

TEST_CASE("config validation rejects bad physics") {
    CHECK_THROWS_WITH(parse_config(R"({"noise": {"alpha": 5.0, "h": 4.5}})"),
                      Catch::Matchers::ContainsSubstring("alpha must exceed h+1"));
    CHECK_THROWS_AS(parse_config(R"({"n": 15})"), config_error);
    CHECK_THROWS_AS(parse_config(R"({"dt": 0.0})"), config_error);
    CHECK_THROWS_AS(parse_config(R"({"gamma": -1.0})"), config_error);
    CHECK_THROWS_AS(parse_config(R"({"noise": {"kcut": 100}})"), config_error);
    CHECK_THROWS_AS(parse_config(R"({"noise": {"h": 2.0, "alpha": 6.0}})"), config_error);
    CHECK_THROWS_AS(parse_config(R"({"ou": {"a": 2.0}})"), config_error);
    CHECK_THROWS_AS(parse_config(R"({"t0": 1.0, "t1": 0.0})"), config_error);
    CHECK_THROWS_AS(parse_config("not json at all {"), config_error);
}

TEST_CASE("unknown keys are rejected at every level") {
    CHECK_THROWS_WITH(parse_config(R"({"dampening": 0.5})"),
                      Catch::Matchers::ContainsSubstring("unknown key 'dampening'"));
    CHECK_THROWS_WITH(parse_config(R"({"noise": {"alpha": 6.0, "cutoff": 3}})"),
                      Catch::Matchers::ContainsSubstring("noise.cutoff"));
    CHECK_THROWS_AS(parse_config(R"({"markov": {"t": 1.0, "horizon": 2.0}})"), config_error);
    CHECK_THROWS_AS(parse_config(R"({"initial": {"preset": "zero", "x": 1}})"), config_error);
}

TEST_CASE("gamma = 0 with the invariant command warns but is accepted") {
    const RunConfig cfg = parse_config(R"({"gamma": 0.0})");
    const auto warnings = config_warnings(cfg, Command::invariant);
    REQUIRE_FALSE(warnings.empty());
    CHECK(warnings.front().find("gamma") != std::string::npos);
    CHECK(config_warnings(cfg, Command::simulate).empty());
}

TEST_CASE("config round trip is exact") {
    RunConfig cfg = parse_config("");
    cfg.sim.n = 64;
    cfg.sim.dt = 0.0025;
    cfg.sim.gamma = 0.75;
    cfg.sim.seed = 1234567890123ull;
    cfg.sim.initial.kind = InitialCondition::Kind::modes;
    cfg.sim.initial.modes = {{1, 0, 0.25, -1.5}, {2, -3, 0.0, 0.125}};
    cfg.tail.times = {1.0, 2.5};
    cfg.contdep.n_list = {3, 9};
    const RunConfig back = parse_config(serialize(cfg));
    CHECK(back == cfg);

    // explicit observables of every outer kind
    RunConfig rich = parse_config(R"({
      "observables": [
        {"name": "a", "outer": {"kind": "identity", "index": 0, "bound": 50.0},
         "test_functions": [{"terms": [{"fn": "sin", "k": [1, 0], "amplitude": 1.0}]}]},
        {"name": "b", "outer": {"kind": "poly", "coeffs": [0.0, 1.0, 0.5], "bound": 10.0},
         "test_functions": [{"terms": [{"fn": "cos", "k": [2, 1], "amplitude": 0.5}]}]},
        {"name": "c", "outer": {"kind": "tanh", "weights": [0.3, 0.7], "bias": -0.2},
         "test_functions": [{"terms": [{"fn": "sin", "k": [1, 1], "amplitude": 1.0}]},
                             {"terms": [{"fn": "cos", "k": [0, 2], "amplitude": 1.0}]}]},
        {"name": "d", "outer": {"kind": "band", "lo": -2.0, "hi": 2.0, "width": 0.25},
         "test_functions": [{"terms": [{"fn": "cos", "k": [1, 0], "amplitude": 2.0}]}]}
      ]})");
    CHECK_FALSE(rich.default_observables);
    CHECK(rich.sim.observables.size() == 4);
    CHECK(parse_config(serialize(rich)) == rich);
}

TEST_CASE("snapshot files are bit-exact and carry the documented header") {
    const fs::path dir = fresh_dir("snap");
    const FourierGrid grid = make_grid(32);
    RngStream rng(5, 0);
    const ScalarField f = random_band_limited(grid, 6, 1.0, rng);
    const fs::path path = dir / "field.vort";
    snapshot::write(path.string(), f, 1.25);

    const std::string bytes = slurp(path);
    REQUIRE(bytes.size() == 4 + 4 + 4 + 8 + 32 * 32 * 8);
    CHECK(bytes.compare(0, 4, "VORT") == 0);
    std::uint32_t ver = 0, n = 0;
    double time = 0.0;
    std::memcpy(&ver, bytes.data() + 4, 4);
    std::memcpy(&n, bytes.data() + 8, 4);
    std::memcpy(&time, bytes.data() + 12, 8);
    CHECK(ver == 1);
    CHECK(n == 32);
    CHECK(time == 1.25);

    const auto loaded = snapshot::read(path.string());
    CHECK(loaded.time == 1.25);
    const auto& a = f.values();
    const auto& b = loaded.field.values();
    REQUIRE(a.size() == b.size());
    for (std::size_t i = 0; i < a.size(); ++i) CHECK(a[i] == b[i]);

    // write -> read -> write reproduces the bytes exactly
    const fs::path path2 = dir / "field2.vort";
    snapshot::write(path2.string(), loaded.field, loaded.time);
    CHECK(slurp(path2) == bytes);

    CHECK_THROWS_AS(snapshot::read((dir / "missing.vort").string()), config_error);
}

TEST_CASE("simulate command writes series and obeys snapshot_every") {
    RunConfig cfg = parse_config(
        R"({"n": 32, "dt": 0.01, "t1": 0.1, "noise": {"kcut": 4}, "snapshot_every": 0})");
    cfg.output.dir = fresh_dir("sim0").string();
    const RunResult res = run_command(Command::simulate, cfg, 1, true);
    CHECK(res.exit_code == 0);
    CHECK(fs::exists(fs::path(cfg.output.dir) / "series.csv"));
    CHECK(fs::exists(fs::path(cfg.output.dir) / "config.json"));
    CHECK(fs::exists(fs::path(cfg.output.dir) / "summary.json"));
    int vort_files = 0;
    for (const auto& e : fs::directory_iterator(cfg.output.dir))
        if (e.path().extension() == ".vort") ++vort_files;
    CHECK(vort_files == 0);

    RunConfig snappy = cfg;
    snappy.sim.snapshot_every = 5;
    snappy.output.dir = fresh_dir("sim1").string();
    run_command(Command::simulate, snappy, 1, true);
    vort_files = 0;
    for (const auto& e : fs::directory_iterator(snappy.output.dir))
        if (e.path().extension() == ".vort") ++vort_files;
    CHECK(vort_files == 3);  // steps 0, 5, 10

    const std::string header = slurp(fs::path(cfg.output.dir) / "series.csv").substr(0, 50);
    CHECK(header.rfind("time,", 0) == 0);
}

TEST_CASE("ensemble reruns bit-identically and ignores worker count") {
    RunConfig cfg = parse_config(
        R"({"n": 32, "dt": 0.005, "t1": 0.25, "noise": {"kcut": 4}, "ensemble": {"trajectories": 3}})");

    auto run_into = [&](const std::string& tag, int workers) {
        RunConfig c = cfg;
        c.output.dir = fresh_dir(tag).string();
        const RunResult res = run_command(Command::ensemble, c, workers, true);
        REQUIRE(res.exit_code == 0);
        std::map<std::string, std::string> files;
        for (const auto& e : fs::directory_iterator(c.output.dir))
            if (e.path().extension() == ".csv") files[e.path().filename().string()] = slurp(e.path());
        return files;
    };

    const auto first = run_into("ens_a", 1);
    const auto second = run_into("ens_b", 1);
    const auto threaded = run_into("ens_c", 3);

    REQUIRE(first.size() == 4);  // 3 trajectories + ensemble mean
    CHECK(first == second);
    CHECK(first == threaded);

    // distinct stream ids give distinct series
    CHECK(first.at("traj_0000.csv") != first.at("traj_0001.csv"));
}

TEST_CASE("contdep command verdicts control the exit code") {
    RunConfig cfg = parse_config(R"({
      "n": 32, "dt": 0.005, "t1": 0.2, "gamma": 10.0,
      "noise": {"amplitude": 0.0},
      "contdep": {"n_list": [2, 4], "g": {"terms": [{"fn": "sin", "k": [2, 0], "amplitude": 1.0},
                                                      {"fn": "sin", "k": [4, 0], "amplitude": 0.5}]},
                   "ratio_max": 0.9}})");
    cfg.output.dir = fresh_dir("contdep").string();
    const RunResult res = run_command(Command::contdep_test, cfg, 1, true);
    CHECK(fs::exists(fs::path(cfg.output.dir) / "contdep.csv"));
    // pure decay: gap(n) = e^{-gamma T} <sin(n x1), g>, so gap(4) / gap(2) = 0.5
    CHECK(res.exit_code == 0);

    RunConfig strict = cfg;
    strict.contdep.ratio_max = 0.1;
    strict.output.dir = fresh_dir("contdep2").string();
    CHECK(run_command(Command::contdep_test, strict, 1, true).exit_code == 1);
}

TEST_CASE("ou-calibrate command reports a positive margin") {
    RunConfig cfg = parse_config("");
    cfg.output.dir = fresh_dir("ou").string();
    std::ostringstream sink;
    const RunResult res = run_command(Command::ou_calibrate, cfg, 1, false, &sink);
    CHECK(res.exit_code == 0);
    CHECK(sink.str().find("lambda") != std::string::npos);
    CHECK(fs::exists(fs::path(cfg.output.dir) / "ou_calibrate.csv"));
}

TEST_CASE("cli binary end to end") {
    const fs::path cli = fs::path(EKMAN_CLI_PATH);
    REQUIRE(fs::exists(cli));
    const fs::path dir = fresh_dir("proc");
    const fs::path cfg_path = dir / "cfg.json";
    {
        std::ofstream out(cfg_path);
        out << R"({"n": 32, "dt": 0.01, "t1": 0.05, "noise": {"kcut": 4}})";
    }
    const std::string base = "cd " + dir.string() + " && " + cli.string();
    CHECK(std::system((base + " simulate --config cfg.json --out run1 --quiet").c_str()) == 0);
    CHECK(fs::exists(dir / "run1" / "series.csv"));

    // identical rerun produces identical bytes
    CHECK(std::system((base + " simulate --config cfg.json --out run2 --quiet").c_str()) == 0);
    CHECK(slurp(dir / "run1" / "series.csv") == slurp(dir / "run2" / "series.csv"));

    // --seed overrides the configured seed
    CHECK(std::system((base + " simulate --config cfg.json --seed 7 --out run3 --quiet").c_str()) ==
          0);
    CHECK(slurp(dir / "run1" / "series.csv") != slurp(dir / "run3" / "series.csv"));

    // runtime errors exit with status 2
    const int code = std::system((base + " simulate --config missing.json --quiet").c_str());
    CHECK(WEXITSTATUS(code) == 2);
}
