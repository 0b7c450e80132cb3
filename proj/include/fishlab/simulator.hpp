#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "fishlab/grouping.hpp"
#include "fishlab/types.hpp"

namespace fishlab {

enum class WorkerEventKind { Add, Remove };

struct WorkerEvent {
    double time = 0.0;
    WorkerEventKind kind = WorkerEventKind::Remove;
    WorkerId worker = 0;
};

struct SimConfig {
    std::uint32_t worker_count = 1;
    std::uint32_t source_count = 1;
    std::vector<double> capacities;  // seconds per tuple, indexed by worker id
    SchemeKind scheme = SchemeKind::SG;
    SchemeParams scheme_params;      // workers list is filled in by run()
    std::vector<WorkerEvent> worker_events;
    double imbalance_sample_period = 1.0;
    double capacity_noise_stddev = 0.0;
    std::uint64_t seed = 1;
};

/// Everything a finished run exposes to the metrics layer.
struct RunTrace {
    std::vector<double> latencies;        // completion - arrival, per tuple
    double makespan = 0.0;                // last completion time
    std::uint64_t completed = 0;
    std::uint64_t memory_units = 0;       // distinct (key, worker) pairs
    std::uint64_t distinct_keys = 0;      // distinct keys in the stream
    std::vector<double> imbalance_samples;
};

struct MetricsReport {
    double makespan = 0.0;
    double latency_mean = 0.0;
    double latency_p50 = 0.0;
    double latency_p95 = 0.0;
    double latency_p99 = 0.0;
    double throughput = 0.0;          // tuples per simulated second
    std::uint64_t memory_units = 0;
    double memory_ratio_vs_fg = 1.0;  // memory_units / distinct stream keys
    double mean_imbalance = 0.0;      // mean over samples of max - avg backlog seconds
};

/// Runs the discrete-event simulation: sources route arriving tuples via
/// their scheme instance to FIFO worker queues drained one tuple per P_w
/// seconds. Worker removal re-routes the victim's pending tuples at the
/// event time; tuples keep their original arrival time for latency.
/// Strictly single-threaded and deterministic for a given (config, stream).
RunTrace run(const SimConfig& cfg, std::span<const TupleEvent> stream);

/// Throws StateError on an empty trace. Percentiles use nearest-rank.
MetricsReport compute_metrics(const RunTrace& trace);

MetricsReport run_and_measure(const SimConfig& cfg, std::span<const TupleEvent> stream);

}  // namespace fishlab
