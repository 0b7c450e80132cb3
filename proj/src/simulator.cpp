#include "fishlab/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <queue>
#include <random>
#include <unordered_set>

namespace fishlab {

namespace {

// Event ordering at equal times: completions settle queues first, then
// topology changes, then imbalance samples, and arrivals route last.
enum EventRank : int { kCompletion = 0, kWorkerChange = 1, kSample = 2 };

struct Event {
    double time;
    int rank;
    std::uint64_t seq;     // FIFO within (time, rank)
    WorkerId worker = 0;   // completion target
    std::uint64_t generation = 0;
    std::size_t payload = 0;  // worker_events index

    bool operator>(const Event& other) const {
        if (time != other.time) return time > other.time;
        if (rank != other.rank) return rank > other.rank;
        return seq > other.seq;
    }
};

struct WorkerSim {
    std::deque<std::size_t> queue;  // stream indices; front is in service
    double capacity = 0.0;
    bool active = true;
    bool busy = false;
    std::uint64_t generation = 0;
};

struct Engine {
    const SimConfig& cfg;
    std::span<const TupleEvent> stream;
    std::vector<WorkerSim> workers;
    std::vector<std::unique_ptr<GroupingScheme>> schemes;  // one per source
    std::priority_queue<Event, std::vector<Event>, std::greater<>> events;
    std::uint64_t next_seq = 0;
    std::size_t next_arrival = 0;
    std::mt19937_64 noise_rng;
    RunTrace trace;

    Engine(const SimConfig& c, std::span<const TupleEvent> s)
        : cfg(c), stream(s), noise_rng(c.seed ^ 0xc2b2ae3d27d4eb4full) {}

    std::size_t active_count() const {
        std::size_t n = 0;
        for (const auto& w : workers) n += w.active;
        return n;
    }

    double sampled_capacity(double true_cap) {
        if (cfg.capacity_noise_stddev <= 0.0) return true_cap;
        // Box-Muller on the raw generator output keeps runs portable.
        const double u1 = std::max(1e-12, static_cast<double>(noise_rng() >> 11) * 0x1.0p-53);
        const double u2 = static_cast<double>(noise_rng() >> 11) * 0x1.0p-53;
        const double g = std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586 * u2);
        return true_cap * std::max(0.01, 1.0 + cfg.capacity_noise_stddev * g);
    }

    void sample_capacities() {
        for (auto& scheme : schemes) {
            auto* fish = dynamic_cast<FishGrouping*>(scheme.get());
            if (!fish || fish->assign_mode() != AssignMode::Heuristic) continue;
            for (WorkerId w = 0; w < workers.size(); ++w)
                if (workers[w].active)
                    fish->assigner().sample_capacity(w, sampled_capacity(workers[w].capacity));
        }
    }

    void sample_capacity_all_sources(WorkerId w) {
        for (auto& scheme : schemes) {
            auto* fish = dynamic_cast<FishGrouping*>(scheme.get());
            if (fish && fish->assign_mode() == AssignMode::Heuristic)
                fish->assigner().sample_capacity(w, sampled_capacity(workers[w].capacity));
        }
    }

    void schedule_completion(WorkerId w, double t) {
        events.push({t + workers[w].capacity, kCompletion, next_seq++, w, workers[w].generation, 0});
    }

    void enqueue(WorkerId w, std::size_t tuple_idx, double t) {
        auto& ws = workers[w];
        ws.queue.push_back(tuple_idx);
        if (!ws.busy) {
            ws.busy = true;
            schedule_completion(w, t);
        }
    }

    void route_and_enqueue(std::size_t tuple_idx, double t) {
        const std::uint32_t source = tuple_idx % cfg.source_count;
        const WorkerId w = schemes[source]->route(stream[tuple_idx].key, t);
        enqueue(w, tuple_idx, t);
    }

    void on_completion(const Event& ev) {
        auto& ws = workers[ev.worker];
        if (!ws.active || ws.generation != ev.generation) return;  // cancelled by churn
        const std::size_t idx = ws.queue.front();
        ws.queue.pop_front();
        trace.latencies.push_back(ev.time - stream[idx].arrival_time);
        ++trace.completed;
        trace.makespan = ev.time;
        if (!ws.queue.empty())
            schedule_completion(ev.worker, ev.time);
        else
            ws.busy = false;
    }

    void on_worker_change(const Event& ev) {
        const auto& we = cfg.worker_events[ev.payload];
        auto& ws = workers[we.worker];
        if (we.kind == WorkerEventKind::Remove) {
            if (!ws.active) throw StateError("worker event: removing an inactive worker");
            if (active_count() == 1) throw StateError("worker event: removal leaves zero workers");
            ws.active = false;
            ws.busy = false;
            ++ws.generation;
            std::deque<std::size_t> pending = std::move(ws.queue);
            ws.queue.clear();
            for (auto& scheme : schemes) scheme->remove_worker(we.worker);
            for (std::size_t idx : pending) route_and_enqueue(idx, ev.time);
        } else {
            if (ws.active) throw StateError("worker event: adding an already active worker");
            ws.active = true;
            ws.busy = false;
            ++ws.generation;
            for (auto& scheme : schemes) scheme->add_worker(we.worker);
            sample_capacity_all_sources(we.worker);
        }
    }

    bool work_pending() const {
        if (next_arrival < stream.size()) return true;
        for (const auto& w : workers)
            if (w.active && !w.queue.empty()) return true;
        return false;
    }

    void on_sample(const Event& ev) {
        if (!work_pending()) return;  // run is draining; stop the sampler
        double max_load = 0.0, sum_load = 0.0;
        std::size_t n = 0;
        for (const auto& w : workers) {
            if (!w.active) continue;
            const double load = static_cast<double>(w.queue.size()) * w.capacity;
            max_load = std::max(max_load, load);
            sum_load += load;
            ++n;
        }
        if (n > 0) trace.imbalance_samples.push_back(max_load - sum_load / static_cast<double>(n));
        sample_capacities();
        events.push({ev.time + cfg.imbalance_sample_period, kSample, next_seq++, 0, 0, 0});
    }
};

void validate(const SimConfig& cfg, std::span<const TupleEvent> stream) {
    if (cfg.worker_count == 0) throw ConfigError("worker_count must be positive");
    if (cfg.source_count == 0) throw ConfigError("source_count must be positive");
    if (cfg.capacities.size() != cfg.worker_count)
        throw ConfigError("capacities must list one entry per worker");
    for (double c : cfg.capacities)
        if (!(c > 0.0)) throw ConfigError("capacities must be positive");
    if (!(cfg.imbalance_sample_period > 0.0))
        throw ConfigError("imbalance_sample_period must be positive");
    double prev = -1.0;
    for (const auto& ev : cfg.worker_events) {
        if (ev.worker >= cfg.worker_count) throw ConfigError("worker_events references unknown worker");
        if (ev.time < prev) throw ConfigError("worker_events times must be non-decreasing");
        prev = ev.time;
    }
    prev = -std::numeric_limits<double>::infinity();
    for (const auto& t : stream) {
        if (t.arrival_time < prev) throw ConfigError("stream is not time-ordered");
        prev = t.arrival_time;
    }
}

}  // namespace

RunTrace run(const SimConfig& cfg, std::span<const TupleEvent> stream) {
    validate(cfg, stream);

    Engine eng(cfg, stream);
    eng.workers.resize(cfg.worker_count);
    for (std::uint32_t w = 0; w < cfg.worker_count; ++w)
        eng.workers[w].capacity = cfg.capacities[w];

    SchemeParams params = cfg.scheme_params;
    params.workers.clear();
    for (WorkerId w = 0; w < cfg.worker_count; ++w) params.workers.push_back(w);
    for (std::uint32_t s = 0; s < cfg.source_count; ++s) {
        SchemeParams per_source = params;
        per_source.choice_seed = cfg.seed ^ (0x9e3779b97f4a7c15ull * (s + 1));
        eng.schemes.push_back(make_scheme(cfg.scheme, per_source));
    }
    eng.sample_capacities();

    for (std::size_t i = 0; i < cfg.worker_events.size(); ++i)
        eng.events.push({cfg.worker_events[i].time, kWorkerChange, eng.next_seq++, 0, 0, i});
    if (!stream.empty())
        eng.events.push({cfg.imbalance_sample_period, kSample, eng.next_seq++, 0, 0, 0});

    eng.trace.latencies.reserve(stream.size());
    while (true) {
        const bool have_arrival = eng.next_arrival < stream.size();
        const bool have_event = !eng.events.empty();
        if (!have_arrival && !have_event) break;

        bool take_arrival;
        if (!have_event) {
            take_arrival = true;
        } else if (!have_arrival) {
            take_arrival = false;
        } else {
            // Arrivals rank below every event kind at the same timestamp.
            take_arrival = stream[eng.next_arrival].arrival_time < eng.events.top().time;
        }

        if (take_arrival) {
            const std::size_t idx = eng.next_arrival++;
            eng.route_and_enqueue(idx, stream[idx].arrival_time);
            continue;
        }
        const Event ev = eng.events.top();
        eng.events.pop();
        switch (ev.rank) {
            case kCompletion: eng.on_completion(ev); break;
            case kWorkerChange: eng.on_worker_change(ev); break;
            case kSample: eng.on_sample(ev); break;
        }
    }

    // Memory overhead: distinct (key, worker) pairs, unioned across sources.
    std::map<WorkerId, std::unordered_set<std::string_view>> replicas;
    for (const auto& scheme : eng.schemes)
        for (const auto& [w, keys] : scheme->tracked_state())
            for (const auto& k : keys) replicas[w].insert(k);
    for (const auto& [w, keys] : replicas) eng.trace.memory_units += keys.size();

    std::unordered_set<std::string_view> distinct;
    for (const auto& t : stream) distinct.insert(t.key);
    eng.trace.distinct_keys = distinct.size();
    return eng.trace;
}

MetricsReport compute_metrics(const RunTrace& trace) {
    if (trace.completed == 0 || trace.latencies.empty())
        throw StateError("compute_metrics: empty trace");

    std::vector<double> sorted = trace.latencies;
    std::sort(sorted.begin(), sorted.end());
    const auto nearest_rank = [&](double p) {
        const std::size_t n = sorted.size();
        std::size_t r = static_cast<std::size_t>(std::ceil(p * static_cast<double>(n)));
        if (r == 0) r = 1;
        return sorted[std::min(r, n) - 1];
    };

    MetricsReport m;
    m.makespan = trace.makespan;
    double sum = 0.0;
    for (double l : sorted) sum += l;
    m.latency_mean = sum / static_cast<double>(sorted.size());
    m.latency_p50 = nearest_rank(0.50);
    m.latency_p95 = nearest_rank(0.95);
    m.latency_p99 = nearest_rank(0.99);
    m.throughput = trace.makespan > 0.0
                       ? static_cast<double>(trace.completed) / trace.makespan
                       : 0.0;
    m.memory_units = trace.memory_units;
    m.memory_ratio_vs_fg = trace.distinct_keys > 0
                               ? static_cast<double>(trace.memory_units) /
                                     static_cast<double>(trace.distinct_keys)
                               : 1.0;
    if (!trace.imbalance_samples.empty()) {
        double s = 0.0;
        for (double v : trace.imbalance_samples) s += v;
        m.mean_imbalance = s / static_cast<double>(trace.imbalance_samples.size());
    }
    return m;
}

MetricsReport run_and_measure(const SimConfig& cfg, std::span<const TupleEvent> stream) {
    return compute_metrics(run(cfg, stream));
}

}  // namespace fishlab
