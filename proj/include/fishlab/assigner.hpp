#pragma once

#include <cstdint>
#include <span>
#include <unordered_map>
#include <vector>

#include "fishlab/types.hpp"

namespace fishlab {

/// Per-worker state tracked by one assigner.
struct WorkerEstimate {
    double backlog = 0.0;             // C_w: estimated unprocessed tuples
    std::uint64_t assigned = 0;       // N_w: tuples assigned since the last refresh
    double seconds_per_tuple = 0.0;   // P_w: sampled capacity
    bool capacity_sampled = false;
};

/// Infers worker backlogs from local assignment counts and sampled
/// capacities, and picks the candidate with the shortest estimated wait.
/// One instance per source; nothing is shared across sources.
///
/// On refresh (at most once per interval) each backlog becomes
///   ((C_w + N_w) * P_w - T) / P_w, floored at zero,
/// where C_w is the previous refresh's estimate and N_w the tuples
/// assigned since; the stored live backlog equals that sum already, since
/// every selection charges it. Selection minimizes backlog * P_w over the
/// candidates, first one winning ties, and charges the winner one tuple.
class HeuristicAssigner {
public:
    explicit HeuristicAssigner(double refresh_interval = 10.0);

    void add_worker(WorkerId w);
    void remove_worker(WorkerId w);

    /// Records a capacity measurement: the first sample is taken as is,
    /// later ones are averaged in with weight one half.
    void sample_capacity(WorkerId w, double measured_seconds_per_tuple);

    /// Re-estimates every backlog if more than the refresh interval has
    /// passed since the previous refresh; otherwise a no-op.
    void refresh_estimates(double t_cur);

    /// Shortest-wait candidate. Requires a non-empty candidate list whose
    /// workers are all known and capacity-sampled.
    WorkerId select_worker(std::span<const WorkerId> candidates);

    const WorkerEstimate& estimate(WorkerId w) const;
    double last_refresh() const { return t_pri_; }
    double refresh_interval() const { return interval_; }
    std::size_t worker_count() const { return estimates_.size(); }

private:
    double interval_;
    double t_pri_ = 0.0;
    std::unordered_map<WorkerId, WorkerEstimate> estimates_;
};

}  // namespace fishlab
