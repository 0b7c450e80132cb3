#include "fishlab/experiment.hpp"

#include <atomic>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <thread>
#include <variant>

#include <json.hpp>

namespace fishlab {

std::string format_double(double v) {
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, ptr);
}

ExperimentConfig parse_experiment_config(const ConfigFile& file) {
    ExperimentConfig cfg;

    for (const auto& name : file.get_list("experiment", "schemes")) {
        try {
            cfg.schemes.push_back(parse_scheme_kind(name));
        } catch (const ConfigError& e) {
            throw ConfigError(std::string("experiment.schemes: ") + e.what());
        }
    }
    for (auto w : file.get_int_list("experiment", "workers")) {
        if (w < 1) throw ConfigError("experiment.workers: must be positive");
        cfg.worker_counts.push_back(static_cast<std::uint32_t>(w));
    }

    const std::string kind = file.get_string("dataset", "kind", "zipf");
    if (kind == "zipf") {
        cfg.dataset.kind = DatasetSpec::Kind::Zipf;
        cfg.dataset.tuples = static_cast<std::uint64_t>(file.get_int("dataset", "tuples"));
        cfg.dataset.keys = static_cast<std::uint64_t>(file.get_int("dataset", "keys"));
        cfg.dataset.phase_split = file.get_double("dataset", "phase_split", 0.8);
        cfg.skews = file.get_double_list("experiment", "z");
    } else if (kind == "file") {
        cfg.dataset.kind = DatasetSpec::Kind::File;
        cfg.dataset.path = file.get_string("dataset", "path");
        if (!std::filesystem::exists(cfg.dataset.path))
            throw ConfigError("dataset.path: no such file: " + cfg.dataset.path);
        cfg.skews = file.has("experiment", "z") ? file.get_double_list("experiment", "z")
                                                : std::vector<double>{0.0};
    } else {
        throw ConfigError("dataset.kind: unknown kind '" + kind + "' (want zipf|file)");
    }
    cfg.dataset.arrival_rate = file.get_double("dataset", "arrival_rate", 1000.0);
    if (!(cfg.dataset.arrival_rate > 0.0)) throw ConfigError("dataset.arrival_rate: must be positive");
    const std::string arrival = file.get_string("dataset", "arrival", "rate");
    if (arrival == "batch")
        cfg.dataset.batch_arrival = true;
    else if (arrival != "rate")
        throw ConfigError("dataset.arrival: want batch|rate");

    for (auto s : file.get_int_list("experiment", "seeds"))
        cfg.seeds.push_back(static_cast<std::uint64_t>(s));

    cfg.sketch.capacity = static_cast<std::size_t>(file.get_int("detector", "k_max", 1000));
    cfg.sketch.epoch_size = static_cast<std::size_t>(file.get_int("detector", "n_epoch", 1000));
    cfg.sketch.decay = file.get_double("detector", "alpha", 0.2);
    if (cfg.sketch.decay < 0.0 || cfg.sketch.decay > 1.0)
        throw ConfigError("detector.alpha: must be in [0, 1]");

    try {
        cfg.theta = ThetaRule::parse(file.get_string("classifier", "theta", "1/4n"));
        cfg.dmin = DminRule::parse(file.get_string("classifier", "dmin", "2"));
    } catch (const ConfigError& e) {
        throw ConfigError(std::string("classifier: ") + e.what());
    }

    const std::string mode = file.get_string("assigner", "mode", "heuristic");
    if (mode == "heuristic")
        cfg.assign_mode = AssignMode::Heuristic;
    else if (mode == "count")
        cfg.assign_mode = AssignMode::CountBased;
    else
        throw ConfigError("assigner.mode: want heuristic|count");
    cfg.assign_refresh = file.get_double("assigner", "refresh_interval", 10.0);
    if (!(cfg.assign_refresh > 0.0)) throw ConfigError("assigner.refresh_interval: must be positive");
    cfg.capacity_noise_stddev = file.get_double("assigner", "noise_stddev", 0.0);
    if (cfg.capacity_noise_stddev < 0.0) throw ConfigError("assigner.noise_stddev: must be >= 0");

    cfg.ring_vnodes = static_cast<std::uint32_t>(file.get_int("ring", "vnodes", 16));
    if (cfg.ring_vnodes == 0) throw ConfigError("ring.vnodes: must be positive");
    cfg.ring_seed = static_cast<std::uint64_t>(file.get_int("ring", "hash_seed", 0));

    cfg.source_count = static_cast<std::uint32_t>(file.get_int("simulator", "sources", 1));
    if (cfg.source_count == 0) throw ConfigError("simulator.sources: must be positive");
    cfg.capacity = file.get_double("simulator", "capacity", 0.001);
    if (!(cfg.capacity > 0.0)) throw ConfigError("simulator.capacity: must be positive");
    cfg.heterogeneous = file.get_bool("simulator", "heterogeneous", false);
    cfg.imbalance_period = file.get_double("simulator", "imbalance_period", 1.0);
    if (!(cfg.imbalance_period > 0.0)) throw ConfigError("simulator.imbalance_period: must be positive");

    cfg.output_csv = file.get_string("experiment", "output_csv");
    cfg.output_json = file.get_string("experiment", "output_json", "");
    return cfg;
}

std::vector<TupleEvent> build_stream(const DatasetSpec& dataset, double z, std::uint64_t seed) {
    std::vector<TupleEvent> stream;
    if (dataset.kind == DatasetSpec::Kind::Zipf) {
        ZipfEvolvingConfig zc;
        zc.total_tuples = dataset.tuples;
        zc.distinct_keys = dataset.keys;
        zc.skew = z;
        zc.phase_split = dataset.phase_split;
        zc.arrival_rate = dataset.arrival_rate;
        zc.rng_seed = seed;
        stream = generate_zipf_evolving(zc);
    } else {
        stream = read_tuple_file(dataset.path);
    }
    if (dataset.batch_arrival)
        for (auto& t : stream) t.arrival_time = 0.0;
    return stream;
}

namespace {

SimConfig scenario_sim_config(const ExperimentConfig& cfg, const ScenarioId& id) {
    SimConfig sim;
    sim.worker_count = id.workers;
    sim.source_count = cfg.source_count;
    sim.capacities.resize(id.workers);
    for (std::uint32_t w = 0; w < id.workers; ++w)
        sim.capacities[w] = cfg.heterogeneous && (w % 2 == 1) ? cfg.capacity / 2.0 : cfg.capacity;
    sim.scheme = id.scheme;
    sim.scheme_params.ring_vnodes = cfg.ring_vnodes;
    sim.scheme_params.ring_seed = cfg.ring_seed;
    sim.scheme_params.sketch = cfg.sketch;
    sim.scheme_params.theta = cfg.theta;
    sim.scheme_params.dmin = cfg.dmin;
    sim.scheme_params.assign_mode = cfg.assign_mode;
    sim.scheme_params.assign_refresh = cfg.assign_refresh;
    sim.imbalance_sample_period = cfg.imbalance_period;
    sim.capacity_noise_stddev = cfg.capacity_noise_stddev;
    sim.seed = id.seed;
    return sim;
}

}  // namespace

std::string scenario_key(const ScenarioId& id) {
    std::string key(to_string(id.scheme));
    key += "/w" + std::to_string(id.workers);
    key += "/z" + format_double(id.z);
    key += "/s" + std::to_string(id.seed);
    return key;
}

std::string csv_row(const ScenarioResult& r) {
    std::string row(to_string(r.id.scheme));
    row += ',' + std::to_string(r.id.workers);
    row += ',' + format_double(r.id.z);
    row += ',' + std::to_string(r.id.seed);
    const auto& m = r.metrics;
    row += ',' + format_double(m.makespan);
    row += ',' + format_double(m.latency_mean);
    row += ',' + format_double(m.latency_p50);
    row += ',' + format_double(m.latency_p95);
    row += ',' + format_double(m.latency_p99);
    row += ',' + format_double(m.throughput);
    row += ',' + std::to_string(m.memory_units);
    row += ',' + format_double(m.memory_ratio_vs_fg);
    row += ',' + format_double(m.mean_imbalance);
    return row;
}

ExperimentOutcome run_experiment(const ExperimentConfig& cfg, unsigned jobs) {
    // Streams are shared across the schemes and worker counts of a cell.
    std::map<std::pair<double, std::uint64_t>, std::vector<TupleEvent>> streams;
    for (double z : cfg.skews)
        for (std::uint64_t seed : cfg.seeds)
            streams.emplace(std::make_pair(z, seed), build_stream(cfg.dataset, z, seed));

    std::vector<ScenarioId> scenarios;
    for (std::uint32_t w : cfg.worker_counts)
        for (double z : cfg.skews)
            for (std::uint64_t seed : cfg.seeds)
                for (SchemeKind scheme : cfg.schemes)
                    scenarios.push_back({scheme, w, z, seed});

    struct Slot {
        bool done = false;
        std::string error;
        MetricsReport metrics;
    };
    std::vector<Slot> slots(scenarios.size());

    const auto run_one = [&](std::size_t i) {
        const auto& id = scenarios[i];
        try {
            const auto& stream = streams.at({id.z, id.seed});
            slots[i].metrics = run_and_measure(scenario_sim_config(cfg, id), stream);
            slots[i].done = true;
        } catch (const std::exception& e) {
            slots[i].error = std::string("scenario ") + scenario_key(id) + ": " + e.what();
        }
    };

    if (jobs <= 1) {
        for (std::size_t i = 0; i < scenarios.size(); ++i) {
            run_one(i);
            if (!slots[i].done) break;  // abort the matrix, flush what we have
        }
    } else {
        std::atomic<std::size_t> next{0};
        std::vector<std::thread> pool;
        for (unsigned t = 0; t < jobs; ++t)
            pool.emplace_back([&] {
                for (std::size_t i = next.fetch_add(1); i < scenarios.size();
                     i = next.fetch_add(1))
                    run_one(i);
            });
        for (auto& t : pool) t.join();
    }

    if (const auto parent = std::filesystem::path(cfg.output_csv).parent_path(); !parent.empty())
        std::filesystem::create_directories(parent);
    std::ofstream csv(cfg.output_csv, std::ios::binary);
    if (!csv) throw StateError("cannot write csv: " + cfg.output_csv);
    csv << kCsvHeader << '\n';

    ExperimentOutcome outcome;
    for (std::size_t i = 0; i < scenarios.size(); ++i) {
        if (!slots[i].done) {
            outcome.ok = false;
            outcome.error = slots[i].error.empty() ? "scenario did not run" : slots[i].error;
            break;
        }
        ScenarioResult r{scenarios[i], slots[i].metrics};
        csv << csv_row(r) << '\n';
        csv.flush();
        outcome.results.push_back(std::move(r));
        ++outcome.rows_written;
    }
    if (!outcome.ok) return outcome;

    if (!cfg.output_json.empty()) {
        nlohmann::ordered_json summary;
        for (const auto& r : outcome.results) {
            nlohmann::ordered_json row;
            row["scheme"] = std::string(to_string(r.id.scheme));
            row["workers"] = r.id.workers;
            row["z"] = r.id.z;
            row["seed"] = r.id.seed;
            row["makespan_s"] = r.metrics.makespan;
            row["lat_mean_s"] = r.metrics.latency_mean;
            row["lat_p50_s"] = r.metrics.latency_p50;
            row["lat_p95_s"] = r.metrics.latency_p95;
            row["lat_p99_s"] = r.metrics.latency_p99;
            row["throughput_tps"] = r.metrics.throughput;
            row["memory_units"] = r.metrics.memory_units;
            row["memory_ratio_fg"] = r.metrics.memory_ratio_vs_fg;
            row["mean_imbalance_s"] = r.metrics.mean_imbalance;
            summary[scenario_key(r.id)] = std::move(row);
        }
        if (const auto parent = std::filesystem::path(cfg.output_json).parent_path();
            !parent.empty())
            std::filesystem::create_directories(parent);
        std::ofstream js(cfg.output_json, std::ios::binary);
        if (!js) throw StateError("cannot write json: " + cfg.output_json);
        js << summary.dump(2) << '\n';
    }
    return outcome;
}

ExperimentOutcome run_experiment_file(const std::string& config_path, unsigned jobs,
                                      std::optional<std::uint64_t> seed_override) {
    ExperimentConfig cfg = parse_experiment_config(ConfigFile::load(config_path));
    if (seed_override) cfg.seeds = {*seed_override};
    return run_experiment(cfg, jobs);
}

void generate_dataset_file(const std::string& config_path, const std::string& out_path,
                           std::optional<std::uint64_t> seed_override) {
    const ConfigFile file = ConfigFile::load(config_path);
    ExperimentConfig cfg = parse_experiment_config(file);
    if (cfg.dataset.kind != DatasetSpec::Kind::Zipf)
        throw ConfigError("dataset.kind: gen needs a zipf dataset");
    const double z = file.has("dataset", "z") ? file.get_double("dataset", "z") : cfg.skews.front();
    const std::uint64_t seed = seed_override ? *seed_override : cfg.seeds.front();
    const auto stream = build_stream(cfg.dataset, z, seed);
    write_tuple_file(out_path, stream);
}

// ---------------------------------------------------------------------------
// Report rendering

namespace {

struct CsvRow {
    std::string scheme;
    std::uint32_t workers;
    double z;
    std::uint64_t seed;
    double makespan;
    std::uint64_t memory_units;
};

std::vector<CsvRow> read_result_csv(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ParseError("cannot open csv: " + path);
    std::string line;
    if (!std::getline(in, line)) throw ParseError(path + ": empty file");
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line != kCsvHeader) throw ParseError(path + ": unexpected header");

    std::vector<CsvRow> rows;
    std::size_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        std::vector<std::string> fields;
        std::size_t start = 0;
        while (start <= line.size()) {
            auto comma = line.find(',', start);
            if (comma == std::string::npos) comma = line.size();
            fields.push_back(line.substr(start, comma - start));
            start = comma + 1;
        }
        if (fields.size() != 13)
            throw ParseError(path + ":" + std::to_string(lineno) + ": expected 13 fields");
        try {
            CsvRow r;
            r.scheme = fields[0];
            r.workers = static_cast<std::uint32_t>(std::stoul(fields[1]));
            r.z = std::stod(fields[2]);
            r.seed = std::stoull(fields[3]);
            r.makespan = std::stod(fields[4]);
            r.memory_units = std::stoull(fields[10]);
            rows.push_back(std::move(r));
        } catch (const std::exception&) {
            throw ParseError(path + ":" + std::to_string(lineno) + ": malformed field");
        }
    }
    if (rows.empty()) throw ParseError(path + ": no data rows");
    return rows;
}

}  // namespace

std::string emit_report(const std::string& csv_path) {
    const auto rows = read_result_csv(csv_path);

    std::vector<std::pair<std::uint32_t, double>> cells;
    std::vector<std::string> scheme_order;
    for (const auto& r : rows) {
        if (std::find(cells.begin(), cells.end(), std::make_pair(r.workers, r.z)) == cells.end())
            cells.emplace_back(r.workers, r.z);
        if (std::find(scheme_order.begin(), scheme_order.end(), r.scheme) == scheme_order.end())
            scheme_order.push_back(r.scheme);
    }

    std::ostringstream out;
    out << "makespan normalized to sg, memory to fg; seeds averaged\n";
    for (const auto& [workers, z] : cells) {
        struct Acc {
            double makespan = 0.0;
            double memory = 0.0;
            std::size_t n = 0;
        };
        std::map<std::string, Acc> per_scheme;
        for (const auto& r : rows) {
            if (r.workers != workers || r.z != z) continue;
            auto& acc = per_scheme[r.scheme];
            acc.makespan += r.makespan;
            acc.memory += static_cast<double>(r.memory_units);
            ++acc.n;
        }
        if (!per_scheme.count("sg") || !per_scheme.count("fg"))
            throw ParseError(csv_path + ": report needs sg and fg rows in every cell");
        const auto mean = [](const Acc& a, bool mem) {
            return (mem ? a.memory : a.makespan) / static_cast<double>(a.n);
        };
        const double sg_makespan = mean(per_scheme.at("sg"), false);
        const double fg_memory = mean(per_scheme.at("fg"), true);

        char buf[96];
        out << "\nworkers=" << workers << " z=" << format_double(z) << "\n";
        std::snprintf(buf, sizeof(buf), "  %-6s %15s %13s\n", "scheme", "makespan_vs_sg",
                      "memory_vs_fg");
        out << buf;
        for (const auto& name : scheme_order) {
            auto it = per_scheme.find(name);
            if (it == per_scheme.end()) continue;
            std::snprintf(buf, sizeof(buf), "  %-6s %15.3f %13.3f\n", name.c_str(),
                          mean(it->second, false) / sg_makespan,
                          mean(it->second, true) / fg_memory);
            out << buf;
        }
    }
    return out.str();
}

}  // namespace fishlab
