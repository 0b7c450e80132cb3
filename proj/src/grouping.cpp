#include "fishlab/grouping.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>

namespace fishlab {

SchemeKind parse_scheme_kind(std::string_view name) {
    if (name == "sg") return SchemeKind::SG;
    if (name == "fg") return SchemeKind::FG;
    if (name == "pkg") return SchemeKind::PKG;
    if (name == "dc") return SchemeKind::DC;
    if (name == "wc") return SchemeKind::WC;
    if (name == "fish") return SchemeKind::FISH;
    throw ConfigError("unknown scheme '" + std::string(name) + "' (want sg|fg|pkg|dc|wc|fish)");
}

std::string_view to_string(SchemeKind kind) {
    switch (kind) {
        case SchemeKind::SG: return "sg";
        case SchemeKind::FG: return "fg";
        case SchemeKind::PKG: return "pkg";
        case SchemeKind::DC: return "dc";
        case SchemeKind::WC: return "wc";
        case SchemeKind::FISH: return "fish";
    }
    return "?";
}

double ThetaRule::value(std::uint32_t workers) const {
    double v = per_worker ? numerator / (multiplier * static_cast<double>(workers)) : absolute;
    return std::min(v, 1.0 - 1e-9);
}

ThetaRule ThetaRule::parse(std::string_view text) {
    ThetaRule rule;
    if (!text.empty() && text.back() == 'n') {
        const auto slash = text.find('/');
        if (slash == std::string_view::npos)
            throw ConfigError("theta rule '" + std::string(text) + "' (want c/mn or a number)");
        const std::string num(text.substr(0, slash));
        const std::string mult(text.substr(slash + 1, text.size() - slash - 2));
        try {
            rule.numerator = std::stod(num);
            rule.multiplier = mult.empty() ? 1.0 : std::stod(mult);
        } catch (const std::exception&) {
            throw ConfigError("theta rule '" + std::string(text) + "' has non-numeric parts");
        }
        if (!(rule.numerator > 0.0) || !(rule.multiplier > 0.0))
            throw ConfigError("theta rule '" + std::string(text) + "' must be positive");
        rule.per_worker = true;
        return rule;
    }
    try {
        rule.absolute = std::stod(std::string(text));
    } catch (const std::exception&) {
        throw ConfigError("theta '" + std::string(text) + "' is not a number");
    }
    if (!(rule.absolute > 0.0) || rule.absolute >= 1.0)
        throw ConfigError("theta '" + std::string(text) + "' must be in (0, 1)");
    rule.per_worker = false;
    return rule;
}

std::string ThetaRule::str() const {
    if (!per_worker) return std::to_string(absolute);
    std::string s = std::to_string(numerator) + "/" + std::to_string(multiplier) + "n";
    return s;
}

DminRule DminRule::parse(std::string_view text) {
    DminRule rule;
    if (text == "auto") {
        rule.automatic = true;
        return rule;
    }
    int v = 0;
    auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
    if (ec != std::errc{} || ptr != text.data() + text.size() || v < 2)
        throw ConfigError("dmin '" + std::string(text) + "' (want 'auto' or an integer >= 2)");
    rule.fixed = v;
    return rule;
}

std::string DminRule::str() const { return automatic ? "auto" : std::to_string(fixed); }

GroupingScheme::GroupingScheme(const std::vector<WorkerId>& workers) {
    active_ = workers;
    std::sort(active_.begin(), active_.end());
    if (std::adjacent_find(active_.begin(), active_.end()) != active_.end())
        throw ConfigError("duplicate worker id");
}

void GroupingScheme::record(WorkerId w, std::string_view key) {
    routed_[w].emplace(key);
}

void GroupingScheme::require_active() const {
    if (active_.empty()) throw StateError("route: no active workers");
}

std::uint64_t GroupingScheme::memory_units() const {
    std::uint64_t total = 0;
    for (const auto& [w, keys] : routed_) total += keys.size();
    return total;
}

void GroupingScheme::add_worker(WorkerId w) {
    auto it = std::lower_bound(active_.begin(), active_.end(), w);
    if (it != active_.end() && *it == w) throw std::invalid_argument("add_worker: already active");
    active_.insert(it, w);
}

void GroupingScheme::remove_worker(WorkerId w) {
    auto it = std::lower_bound(active_.begin(), active_.end(), w);
    if (it == active_.end() || *it != w) throw std::invalid_argument("remove_worker: not active");
    active_.erase(it);
}

// ---------------------------------------------------------------------------
// Shuffle grouping

ShuffleGrouping::ShuffleGrouping(const SchemeParams& params) : GroupingScheme(params.workers) {}

WorkerId ShuffleGrouping::route(std::string_view key, double) {
    require_active();
    const WorkerId w = active_[cursor_ % active_.size()];
    ++cursor_;
    record(w, key);
    return w;
}

// ---------------------------------------------------------------------------
// Fields grouping

FieldsGrouping::FieldsGrouping(const SchemeParams& params)
    : GroupingScheme(params.workers), ring_(params.ring_vnodes, params.ring_seed) {
    for (WorkerId w : active_) ring_.add_worker(w);
}

WorkerId FieldsGrouping::route(std::string_view key, double) {
    require_active();
    const WorkerId w = ring_.owner(key);
    record(w, key);
    return w;
}

void FieldsGrouping::add_worker(WorkerId w) {
    GroupingScheme::add_worker(w);
    ring_.add_worker(w);
}

void FieldsGrouping::remove_worker(WorkerId w) {
    if (active_.size() <= 1) throw StateError("remove_worker: would leave no workers");
    GroupingScheme::remove_worker(w);
    ring_.remove_worker(w);
}

// ---------------------------------------------------------------------------
// Partial key grouping

PartialKeyGrouping::PartialKeyGrouping(const SchemeParams& params)
    : GroupingScheme(params.workers), seed_(params.choice_seed) {}

WorkerId PartialKeyGrouping::pick_two_choices(std::string_view key, std::uint64_t seed,
                                              const std::vector<WorkerId>& active,
                                              std::unordered_map<WorkerId, std::uint64_t>& counts) {
    const std::size_t n = active.size();
    const std::size_t i1 = mix32(ring_hash(key, seed)) % n;
    std::size_t i2 = mix32(ring_hash(key, seed ^ 0x9e3779b97f4a7c15ull)) % n;
    if (i2 == i1 && n > 1) i2 = (i2 + 1) % n;
    const WorkerId a = active[i1];
    const WorkerId b = active[i2];
    // smaller local assigned-count wins; first choice wins ties
    const WorkerId w = counts[b] < counts[a] ? b : a;
    ++counts[w];
    return w;
}

WorkerId PartialKeyGrouping::route(std::string_view key, double) {
    require_active();
    const WorkerId w = pick_two_choices(key, seed_, active_, counts_);
    record(w, key);
    return w;
}

// ---------------------------------------------------------------------------
// D-Choices / W-Choices

namespace {

SketchConfig lifetime_sketch(SketchConfig cfg) {
    cfg.decay = 1.0;  // lifetime counting: epochs pass but nothing ages
    return cfg;
}

WorkerId least_count(const std::vector<WorkerId>& candidates,
                     std::unordered_map<WorkerId, std::uint64_t>& counts) {
    WorkerId best = candidates.front();
    std::uint64_t best_count = counts[best];
    for (std::size_t i = 1; i < candidates.size(); ++i) {
        const std::uint64_t c = counts[candidates[i]];
        if (c < best_count) {
            best = candidates[i];
            best_count = c;
        }
    }
    ++counts[best];
    return best;
}

}  // namespace

ChoicesGrouping::ChoicesGrouping(const SchemeParams& params, bool all_workers_for_hot)
    : GroupingScheme(params.workers),
      all_workers_for_hot_(all_workers_for_hot),
      theta_rule_(params.theta),
      dmin_rule_(params.dmin),
      sketch_(lifetime_sketch(params.sketch)),
      table_(params.theta.value(static_cast<std::uint32_t>(params.workers.size())),
             static_cast<std::uint32_t>(params.workers.size()),
             params.dmin.fixed),
      ring_(params.ring_vnodes, params.ring_seed),
      choice_seed_(params.choice_seed) {
    for (WorkerId w : active_) ring_.add_worker(w);
}

void ChoicesGrouping::refresh_rules() {
    const auto n = static_cast<std::uint32_t>(active_.size());
    if (n < 2) return;
    table_.set_worker_count(n);
    table_.set_theta(theta_rule_.value(n));
    if (dmin_rule_.automatic)
        table_.set_d_min(compute_dmin(std::min(1.0, sketch_.hot_mass(table_.theta())), n));
}

WorkerId ChoicesGrouping::route(std::string_view key, double) {
    require_active();
    if (auto evicted = sketch_.observe(key)) table_.forget(*evicted);
    if (sketch_.decay_count() != seen_decays_) {
        seen_decays_ = sketch_.decay_count();
        refresh_rules();
    }
    if (active_.size() == 1) {
        record(active_[0], key);
        return active_[0];
    }

    const auto f = sketch_.frequency(key);
    WorkerId w;
    if (f && *f > table_.theta()) {
        std::vector<WorkerId> cands;
        if (all_workers_for_hot_) {
            cands = active_;
        } else {
            const int d = table_.classify(key, f, sketch_.top_frequency());
            cands = ring_.candidates(key, static_cast<std::uint32_t>(d));
        }
        w = least_count(cands, counts_);
    } else {
        w = PartialKeyGrouping::pick_two_choices(key, choice_seed_, active_, counts_);
    }
    record(w, key);
    return w;
}

void ChoicesGrouping::add_worker(WorkerId w) {
    GroupingScheme::add_worker(w);
    ring_.add_worker(w);
    refresh_rules();
}

void ChoicesGrouping::remove_worker(WorkerId w) {
    if (active_.size() <= 1) throw StateError("remove_worker: would leave no workers");
    GroupingScheme::remove_worker(w);
    ring_.remove_worker(w);
    refresh_rules();
}

// ---------------------------------------------------------------------------
// FISH

FishGrouping::FishGrouping(const SchemeParams& params)
    : GroupingScheme(params.workers),
      theta_rule_(params.theta),
      dmin_rule_(params.dmin),
      sketch_(params.sketch),
      table_(params.theta.value(static_cast<std::uint32_t>(params.workers.size())),
             static_cast<std::uint32_t>(params.workers.size()),
             params.dmin.fixed),
      ring_(params.ring_vnodes, params.ring_seed),
      assigner_(params.assign_refresh),
      mode_(params.assign_mode) {
    for (WorkerId w : active_) {
        ring_.add_worker(w);
        assigner_.add_worker(w);
    }
}

void FishGrouping::refresh_rules() {
    const auto n = static_cast<std::uint32_t>(active_.size());
    if (n < 2) return;
    table_.set_worker_count(n);
    table_.set_theta(theta_rule_.value(n));
    if (dmin_rule_.automatic)
        table_.set_d_min(compute_dmin(std::min(1.0, sketch_.hot_mass(table_.theta())), n));
}

WorkerId FishGrouping::route(std::string_view key, double t_cur) {
    require_active();
    if (auto evicted = sketch_.observe(key)) table_.forget(*evicted);
    if (sketch_.decay_count() != seen_decays_) {
        seen_decays_ = sketch_.decay_count();
        refresh_rules();
    }
    if (active_.size() == 1) {
        record(active_[0], key);
        return active_[0];
    }

    const auto f = sketch_.frequency(key);
    const int d = table_.classify(key, f, sketch_.top_frequency());
    const auto cands = ring_.candidates(key, static_cast<std::uint32_t>(d));

    WorkerId w;
    if (mode_ == AssignMode::Heuristic) {
        assigner_.refresh_estimates(t_cur);
        w = assigner_.select_worker(cands);
    } else {
        w = least_count(cands, counts_);
    }
    record(w, key);
    return w;
}

void FishGrouping::add_worker(WorkerId w) {
    GroupingScheme::add_worker(w);
    ring_.add_worker(w);
    assigner_.add_worker(w);
    refresh_rules();
}

void FishGrouping::remove_worker(WorkerId w) {
    if (active_.size() <= 1) throw StateError("remove_worker: would leave no workers");
    GroupingScheme::remove_worker(w);
    ring_.remove_worker(w);
    assigner_.remove_worker(w);
    refresh_rules();
}

// ---------------------------------------------------------------------------

std::unique_ptr<GroupingScheme> make_scheme(SchemeKind kind, const SchemeParams& params) {
    if (params.workers.empty()) throw ConfigError("workers list is empty");
    switch (kind) {
        case SchemeKind::SG: return std::make_unique<ShuffleGrouping>(params);
        case SchemeKind::FG: return std::make_unique<FieldsGrouping>(params);
        case SchemeKind::PKG: return std::make_unique<PartialKeyGrouping>(params);
        case SchemeKind::DC: return std::make_unique<ChoicesGrouping>(params, false);
        case SchemeKind::WC: return std::make_unique<ChoicesGrouping>(params, true);
        case SchemeKind::FISH: return std::make_unique<FishGrouping>(params);
    }
    throw ConfigError("unknown scheme kind");
}

}  // namespace fishlab
