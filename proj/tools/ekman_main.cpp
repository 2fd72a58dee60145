#include <cstdint>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "ekman/ekman.hpp"

namespace {

std::string read_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ekman::config_error("cannot open config file '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Stochastic damped 2D Euler laboratory (vorticity form, torus)"};
    app.require_subcommand(1);

    std::string config_path;
    std::string out_dir;
    std::uint64_t seed = 0;
    bool seed_set = false;
    int workers = 1;
    bool quiet = false;

    for (ekman::Command cmd :
         {ekman::Command::simulate, ekman::Command::ensemble, ekman::Command::ou_calibrate,
          ekman::Command::invariant, ekman::Command::markov_test, ekman::Command::tail_report,
          ekman::Command::contdep_test, ekman::Command::checks}) {
        CLI::App* sub = app.add_subcommand(ekman::command_name(cmd), "");
        sub->add_option("--config", config_path, "path to the JSON run configuration");
        sub->add_option("--seed", seed, "override the configured RNG seed")
            ->each([&](const std::string&) { seed_set = true; });
        sub->add_option("--out", out_dir, "override the configured output directory");
        sub->add_option("--workers", workers, "worker threads for ensembles")
            ->check(CLI::PositiveNumber);
        sub->add_flag("--quiet", quiet, "suppress progress output");
    }

    CLI11_PARSE(app, argc, argv);

    try {
        const ekman::Command command =
            ekman::command_from_name(app.get_subcommands().front()->get_name());
        ekman::RunConfig cfg =
            ekman::parse_config(config_path.empty() ? std::string{} : read_file(config_path));
        if (seed_set) cfg.sim.seed = seed;
        if (!out_dir.empty()) cfg.output.dir = out_dir;

        const ekman::RunResult result = ekman::run_command(command, cfg, workers, quiet);
        return result.exit_code;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
}
