#include "fishlab/assigner.hpp"

namespace fishlab {

HeuristicAssigner::HeuristicAssigner(double refresh_interval) : interval_(refresh_interval) {
    if (!(refresh_interval > 0.0)) throw ConfigError("refresh_interval must be positive");
}

void HeuristicAssigner::add_worker(WorkerId w) {
    if (!estimates_.emplace(w, WorkerEstimate{}).second)
        throw std::invalid_argument("add_worker: worker already tracked");
}

void HeuristicAssigner::remove_worker(WorkerId w) {
    if (estimates_.erase(w) == 0) throw std::invalid_argument("remove_worker: unknown worker");
}

void HeuristicAssigner::sample_capacity(WorkerId w, double measured) {
    if (!(measured > 0.0)) throw std::invalid_argument("sample_capacity: non-positive measurement");
    auto it = estimates_.find(w);
    if (it == estimates_.end()) throw StateError("sample_capacity: unknown worker");
    auto& e = it->second;
    e.seconds_per_tuple = e.capacity_sampled ? 0.5 * e.seconds_per_tuple + 0.5 * measured : measured;
    e.capacity_sampled = true;
}

void HeuristicAssigner::refresh_estimates(double t_cur) {
    if (t_cur < t_pri_) throw std::invalid_argument("refresh_estimates: time went backwards");
    if (t_cur - t_pri_ <= interval_) return;
    for (auto& [w, e] : estimates_) {
        if (!e.capacity_sampled) throw StateError("refresh_estimates: capacity never sampled");
        // The live backlog already counts this interval's assignments (the
        // per-selection bumps), so it equals base-estimate + N_w. Draining
        // one interval's worth of service from it keeps the estimate in
        // step with the real queue; adding N_w again would double-count
        // every assignment and diverge.
        const double pending = e.backlog * e.seconds_per_tuple;
        e.backlog = pending > interval_ ? (pending - interval_) / e.seconds_per_tuple : 0.0;
        e.assigned = 0;
    }
    t_pri_ = t_cur;
}

WorkerId HeuristicAssigner::select_worker(std::span<const WorkerId> candidates) {
    if (candidates.empty()) throw std::invalid_argument("select_worker: no candidates");
    WorkerEstimate* best = nullptr;
    WorkerId best_id = 0;
    double best_wait = 0.0;
    for (WorkerId w : candidates) {
        auto it = estimates_.find(w);
        if (it == estimates_.end()) throw StateError("select_worker: unknown candidate");
        if (!it->second.capacity_sampled) throw StateError("select_worker: capacity never sampled");
        const double wait = it->second.backlog * it->second.seconds_per_tuple;
        if (best == nullptr || wait < best_wait) {
            best = &it->second;
            best_id = w;
            best_wait = wait;
        }
    }
    best->backlog += 1.0;
    best->assigned += 1;
    return best_id;
}

const WorkerEstimate& HeuristicAssigner::estimate(WorkerId w) const {
    auto it = estimates_.find(w);
    if (it == estimates_.end()) throw StateError("estimate: unknown worker");
    return it->second;
}

}  // namespace fishlab
