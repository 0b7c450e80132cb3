#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "fishlab/config.hpp"
#include "fishlab/grouping.hpp"
#include "fishlab/simulator.hpp"
#include "fishlab/workload.hpp"

namespace fishlab {

struct DatasetSpec {
    enum class Kind { Zipf, File } kind = Kind::Zipf;
    std::uint64_t tuples = 0;
    std::uint64_t keys = 0;
    double phase_split = 0.8;
    double arrival_rate = 1000.0;
    bool batch_arrival = false;  // collapse all arrival times to zero
    std::string path;            // Kind::File
};

/// One experiment: the cross product of schemes, worker counts, skews and
/// seeds over a dataset, with shared scheme/simulator parameters.
struct ExperimentConfig {
    std::vector<SchemeKind> schemes;
    std::vector<std::uint32_t> worker_counts;
    std::vector<double> skews;
    std::vector<std::uint64_t> seeds;
    DatasetSpec dataset;

    SketchConfig sketch;
    ThetaRule theta;
    DminRule dmin;
    AssignMode assign_mode = AssignMode::Heuristic;
    double assign_refresh = 10.0;
    double capacity_noise_stddev = 0.0;
    std::uint32_t ring_vnodes = 16;
    std::uint64_t ring_seed = 0;

    std::uint32_t source_count = 1;
    double capacity = 0.001;  // base seconds per tuple
    bool heterogeneous = false;  // capacities alternate P, P/2
    double imbalance_period = 1.0;

    std::string output_csv;
    std::string output_json;
};

ExperimentConfig parse_experiment_config(const ConfigFile& file);

struct ScenarioId {
    SchemeKind scheme;
    std::uint32_t workers;
    double z;
    std::uint64_t seed;
};

struct ScenarioResult {
    ScenarioId id;
    MetricsReport metrics;
};

struct ExperimentOutcome {
    bool ok = true;
    std::string error;
    std::size_t rows_written = 0;
    std::vector<ScenarioResult> results;
};

inline constexpr std::string_view kCsvHeader =
    "scheme,workers,z,seed,makespan_s,lat_mean_s,lat_p50_s,lat_p95_s,lat_p99_s,"
    "throughput_tps,memory_units,memory_ratio_fg,mean_imbalance_s";

/// Runs the whole matrix and writes the CSV and JSON outputs. Scenario
/// failures stop the run after flushing the rows completed so far; the
/// outcome carries the error. Config problems throw ConfigError/ParseError.
ExperimentOutcome run_experiment(const ExperimentConfig& cfg, unsigned jobs = 1);
ExperimentOutcome run_experiment_file(const std::string& config_path, unsigned jobs = 1,
                                      std::optional<std::uint64_t> seed_override = {});

/// Renders a per-(workers, z) comparison table from a result CSV: makespan
/// normalized to sg, memory to fg, seeds averaged, 3 decimals.
std::string emit_report(const std::string& csv_path);

/// Generates the configured dataset and writes it as a tuple file.
void generate_dataset_file(const std::string& config_path, const std::string& out_path,
                           std::optional<std::uint64_t> seed_override = {});

/// Builds the stream for one (z, seed) cell, honoring batch arrival.
std::vector<TupleEvent> build_stream(const DatasetSpec& dataset, double z, std::uint64_t seed);

/// Shortest round-trip decimal rendering, shared by the CSV and JSON writers.
std::string format_double(double v);

std::string csv_row(const ScenarioResult& r);
std::string scenario_key(const ScenarioId& id);

}  // namespace fishlab
