#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "fishlab/assigner.hpp"
#include "fishlab/classifier.hpp"
#include "fishlab/detector.hpp"
#include "fishlab/hash_ring.hpp"
#include "fishlab/types.hpp"

namespace fishlab {

enum class SchemeKind { SG, FG, PKG, DC, WC, FISH };

SchemeKind parse_scheme_kind(std::string_view name);
std::string_view to_string(SchemeKind kind);

/// Hot-key threshold, either a fraction of the worker count ("1/4n",
/// "2/n") or an absolute frequency ("0.05").
struct ThetaRule {
    bool per_worker = true;
    double numerator = 1.0;
    double multiplier = 4.0;
    double absolute = 0.0;

    double value(std::uint32_t workers) const;
    static ThetaRule parse(std::string_view text);
    std::string str() const;
};

/// Lower bound on a hot key's candidate count: a fixed value, or derived
/// from the hot keys' aggregate frequency share once per epoch.
struct DminRule {
    bool automatic = false;
    int fixed = 2;

    static DminRule parse(std::string_view text);
    std::string str() const;
};

enum class AssignMode { Heuristic, CountBased };

struct SchemeParams {
    std::vector<WorkerId> workers;
    std::uint32_t ring_vnodes = 16;
    std::uint64_t ring_seed = 0;
    SketchConfig sketch;  // decay applies to FISH; lifetime schemes pin it to 1
    ThetaRule theta;
    DminRule dmin;
    AssignMode assign_mode = AssignMode::Heuristic;
    double assign_refresh = 10.0;
    std::uint64_t choice_seed = 1;  // two-choice hashes for PKG and fallbacks
};

/// Uniform routing interface over the six grouping schemes. One instance
/// serves one source; instances share nothing.
class GroupingScheme {
public:
    virtual ~GroupingScheme() = default;

    virtual SchemeKind kind() const = 0;

    /// Routes one tuple, updating all scheme state. Always returns an
    /// active worker; throws StateError when none is active.
    virtual WorkerId route(std::string_view key, double t_cur) = 0;

    virtual void add_worker(WorkerId w);
    virtual void remove_worker(WorkerId w);

    /// Distinct keys ever routed to each worker under this scheme.
    const std::map<WorkerId, std::unordered_set<std::string>>& tracked_state() const {
        return routed_;
    }
    /// Total distinct (key, worker) pairs, the memory-overhead unit.
    std::uint64_t memory_units() const;

    const std::vector<WorkerId>& active_workers() const { return active_; }

protected:
    explicit GroupingScheme(const std::vector<WorkerId>& workers);
    void record(WorkerId w, std::string_view key);
    void require_active() const;

    std::vector<WorkerId> active_;  // sorted by id
    std::map<WorkerId, std::unordered_set<std::string>> routed_;
};

std::unique_ptr<GroupingScheme> make_scheme(SchemeKind kind, const SchemeParams& params);

/// Round-robin over the active workers.
class ShuffleGrouping final : public GroupingScheme {
public:
    explicit ShuffleGrouping(const SchemeParams& params);
    SchemeKind kind() const override { return SchemeKind::SG; }
    WorkerId route(std::string_view key, double t_cur) override;

private:
    std::size_t cursor_ = 0;
};

/// Every key goes to its consistent-hash owner.
class FieldsGrouping final : public GroupingScheme {
public:
    explicit FieldsGrouping(const SchemeParams& params);
    SchemeKind kind() const override { return SchemeKind::FG; }
    WorkerId route(std::string_view key, double t_cur) override;
    void add_worker(WorkerId w) override;
    void remove_worker(WorkerId w) override;

    const HashRing& ring() const { return ring_; }

private:
    HashRing ring_;
};

/// Two hash choices per key, least assigned-count wins.
class PartialKeyGrouping final : public GroupingScheme {
public:
    explicit PartialKeyGrouping(const SchemeParams& params);
    SchemeKind kind() const override { return SchemeKind::PKG; }
    WorkerId route(std::string_view key, double t_cur) override;

    const std::unordered_map<WorkerId, std::uint64_t>& assigned_counts() const { return counts_; }

private:
    std::uint64_t seed_;
    std::unordered_map<WorkerId, std::uint64_t> counts_;

    friend class ChoicesGrouping;
    static WorkerId pick_two_choices(std::string_view key, std::uint64_t seed,
                                     const std::vector<WorkerId>& active,
                                     std::unordered_map<WorkerId, std::uint64_t>& counts);
};

/// D-Choices and W-Choices: a lifetime (undecayed) sketch marks hot keys,
/// which get d workers (W-C: all workers) picked by least assigned-count;
/// everything else falls back to the two-choice rule.
class ChoicesGrouping final : public GroupingScheme {
public:
    ChoicesGrouping(const SchemeParams& params, bool all_workers_for_hot);
    SchemeKind kind() const override {
        return all_workers_for_hot_ ? SchemeKind::WC : SchemeKind::DC;
    }
    WorkerId route(std::string_view key, double t_cur) override;
    void add_worker(WorkerId w) override;
    void remove_worker(WorkerId w) override;

    const FrequencySketch& sketch() const { return sketch_; }
    const HotKeyTable& table() const { return table_; }

private:
    void refresh_rules();

    bool all_workers_for_hot_;
    ThetaRule theta_rule_;
    DminRule dmin_rule_;
    FrequencySketch sketch_;
    HotKeyTable table_;
    HashRing ring_;
    std::uint64_t choice_seed_;
    std::unordered_map<WorkerId, std::uint64_t> counts_;
    std::uint64_t seen_decays_ = 0;
};

/// The full pipeline: decayed frequency sketch, hot-key classification with
/// grant memory, consistent-hash candidate walk, and shortest-estimated-wait
/// selection (or plain least-count selection, for comparison runs).
class FishGrouping final : public GroupingScheme {
public:
    explicit FishGrouping(const SchemeParams& params);
    SchemeKind kind() const override { return SchemeKind::FISH; }
    WorkerId route(std::string_view key, double t_cur) override;
    void add_worker(WorkerId w) override;
    void remove_worker(WorkerId w) override;

    HeuristicAssigner& assigner() { return assigner_; }
    const HeuristicAssigner& assigner() const { return assigner_; }
    const FrequencySketch& sketch() const { return sketch_; }
    const HotKeyTable& table() const { return table_; }
    const HashRing& ring() const { return ring_; }
    AssignMode assign_mode() const { return mode_; }

private:
    void refresh_rules();

    ThetaRule theta_rule_;
    DminRule dmin_rule_;
    FrequencySketch sketch_;
    HotKeyTable table_;
    HashRing ring_;
    HeuristicAssigner assigner_;
    AssignMode mode_;
    std::unordered_map<WorkerId, std::uint64_t> counts_;  // CountBased mode
    std::uint64_t seen_decays_ = 0;
};

}  // namespace fishlab
