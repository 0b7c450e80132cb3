#pragma once

#include <cstdint>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <unordered_map>

#include "fishlab/types.hpp"

namespace fishlab {

struct SketchConfig {
    std::size_t capacity = 1000;    // K_max: bound on tracked keys
    std::size_t epoch_size = 1000;  // tuples per epoch
    double decay = 0.2;             // per-epoch counter multiplier, in [0, 1]
};

/// Bounded top-K frequency counter with per-epoch multiplicative decay.
///
/// Counting follows space-saving replacement: when the sketch is full, the
/// key with the smallest counter is evicted and the newcomer inherits its
/// count plus one. Every epoch_size observations all counters and the total
/// mass are multiplied by the decay factor, so a counter reflects recent
/// occurrences rather than lifetime ones. The decay check runs at the start
/// of an observation, before the tuple is counted.
///
/// Frequencies are counters normalized by the decayed total observation
/// mass, not by the sum of retained counters, which keeps them meaningful
/// when the capacity is small relative to the key universe.
class FrequencySketch {
public:
    struct Entry {
        double count = 0.0;
        // Count inherited from the evicted key at insertion; the classic
        // space-saving overestimation bound for this entry.
        double credit = 0.0;
        std::uint64_t inserted_at = 0;
    };

    explicit FrequencySketch(SketchConfig cfg);

    /// Counts one occurrence of key. Returns the key that was evicted to
    /// make room, if the observation triggered a replacement.
    std::optional<std::string> observe(std::string_view key);

    /// Multiplies every counter and the total mass by the decay factor and
    /// resets the epoch position. Entries are never removed here; counters
    /// may drop below one.
    void decay_epoch();

    /// Decayed relative frequency of key, or nullopt if the key is not
    /// tracked. A tracked key in a fully annihilated sketch (decay == 0
    /// right at an epoch boundary) reports 0.
    std::optional<double> frequency(std::string_view key) const;

    /// Highest frequency over tracked keys. Throws StateError when empty.
    double top_frequency() const;

    /// Sum of frequencies strictly above theta.
    double hot_mass(double theta) const;

    double total_mass() const { return mass_; }
    std::size_t size() const { return entries_.size(); }
    std::size_t capacity() const { return cfg_.capacity; }
    std::size_t tuples_in_epoch() const { return tuples_in_epoch_; }
    std::uint64_t decay_count() const { return decay_count_; }
    double decay() const { return cfg_.decay; }

    const std::unordered_map<std::string, Entry>& entries() const { return entries_; }

private:
    void replace_min(std::string_view key, std::string& evicted);

    SketchConfig cfg_;
    std::unordered_map<std::string, Entry> entries_;
    // Mirror of entries_ ordered by (count, insertion sequence); the front
    // is the replacement victim. Ties evict the least recently inserted.
    std::set<std::pair<double, std::uint64_t>> order_;
    std::unordered_map<std::uint64_t, std::string> key_by_seq_;
    double mass_ = 0.0;
    std::size_t tuples_in_epoch_ = 0;
    std::uint64_t next_seq_ = 0;
    std::uint64_t decay_count_ = 0;
};

}  // namespace fishlab
