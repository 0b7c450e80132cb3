#include <cstdlib>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "fishlab/experiment.hpp"
#include "fishlab/types.hpp"

namespace {

std::optional<std::uint64_t> seed_from_env() {
    const char* env = std::getenv("FISHLAB_SEED");
    if (!env || !*env) return std::nullopt;
    try {
        return std::stoull(env);
    } catch (const std::exception&) {
        throw fishlab::ConfigError("FISHLAB_SEED is not an integer");
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"fishlab: stream grouping simulator and experiment runner"};
    app.require_subcommand(1);

    unsigned jobs = 1;
    bool verbose = false;
    app.add_option("--jobs", jobs, "parallel scenario workers")->capture_default_str();
    app.add_flag("--verbose", verbose, "chatty progress output");

    std::string run_config;
    auto* run_cmd = app.add_subcommand("run", "run an experiment matrix from a config file");
    run_cmd->add_option("config", run_config, "experiment config path")->required();

    std::string report_csv;
    auto* report_cmd = app.add_subcommand("report", "render a comparison table from a result CSV");
    report_cmd->add_option("csv", report_csv, "CSV produced by run")->required();

    std::string gen_config, gen_out;
    auto* gen_cmd = app.add_subcommand("gen", "generate the configured dataset as a tuple file");
    gen_cmd->add_option("config", gen_config, "experiment config path")->required();
    gen_cmd->add_option("--out", gen_out, "output tuple file")->required();

    CLI11_PARSE(app, argc, argv);

    try {
        if (*run_cmd) {
            const auto seed = seed_from_env();
            if (verbose) {
                std::cerr << "running " << run_config;
                if (seed) std::cerr << " (seed override " << *seed << ")";
                std::cerr << " with " << jobs << " job(s)\n";
            }
            const auto outcome = fishlab::run_experiment_file(run_config, jobs, seed);
            if (!outcome.ok) {
                std::cerr << "error: " << outcome.error << "\n"
                          << "flushed " << outcome.rows_written << " completed row(s)\n";
                return 1;
            }
            if (verbose) std::cerr << "wrote " << outcome.rows_written << " row(s)\n";
        } else if (*report_cmd) {
            std::cout << fishlab::emit_report(report_csv);
        } else if (*gen_cmd) {
            fishlab::generate_dataset_file(gen_config, gen_out, seed_from_env());
            if (verbose) std::cerr << "wrote " << gen_out << "\n";
        }
    } catch (const fishlab::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const fishlab::ParseError& e) {
        std::cerr << "parse error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
