#include "fishlab/detector.hpp"

#include <cmath>

namespace fishlab {

FrequencySketch::FrequencySketch(SketchConfig cfg) : cfg_(cfg) {
    if (cfg_.capacity == 0) throw ConfigError("capacity must be positive");
    if (cfg_.epoch_size == 0) throw ConfigError("epoch_size must be positive");
    if (cfg_.decay < 0.0 || cfg_.decay > 1.0) throw ConfigError("decay must be in [0, 1]");
}

std::optional<std::string> FrequencySketch::observe(std::string_view key) {
    if (key.empty()) throw std::invalid_argument("observe: empty key");
    if (tuples_in_epoch_ == cfg_.epoch_size) decay_epoch();

    std::optional<std::string> evicted;
    auto it = entries_.find(std::string(key));
    if (it != entries_.end()) {
        order_.erase({it->second.count, it->second.inserted_at});
        it->second.count += 1.0;
        order_.insert({it->second.count, it->second.inserted_at});
    } else if (entries_.size() < cfg_.capacity) {
        Entry e{1.0, 0.0, next_seq_++};
        order_.insert({e.count, e.inserted_at});
        key_by_seq_.emplace(e.inserted_at, std::string(key));
        entries_.emplace(std::string(key), e);
    } else {
        std::string victim;
        replace_min(key, victim);
        evicted = std::move(victim);
    }
    ++tuples_in_epoch_;
    mass_ += 1.0;
    return evicted;
}

void FrequencySketch::replace_min(std::string_view key, std::string& evicted) {
    auto victim = *order_.begin();
    order_.erase(order_.begin());
    auto seq_it = key_by_seq_.find(victim.second);
    evicted = std::move(seq_it->second);
    key_by_seq_.erase(seq_it);
    const double floor_count = victim.first;
    entries_.erase(evicted);

    Entry e{floor_count + 1.0, floor_count, next_seq_++};
    order_.insert({e.count, e.inserted_at});
    key_by_seq_.emplace(e.inserted_at, std::string(key));
    entries_.emplace(std::string(key), e);
}

void FrequencySketch::decay_epoch() {
    for (auto& [key, e] : entries_) {
        e.count *= cfg_.decay;
        e.credit *= cfg_.decay;
    }
    mass_ *= cfg_.decay;
    tuples_in_epoch_ = 0;
    ++decay_count_;
    order_.clear();
    for (const auto& [key, e] : entries_) order_.insert({e.count, e.inserted_at});
}

std::optional<double> FrequencySketch::frequency(std::string_view key) const {
    auto it = entries_.find(std::string(key));
    if (it == entries_.end()) return std::nullopt;
    return mass_ > 0.0 ? it->second.count / mass_ : 0.0;
}

double FrequencySketch::top_frequency() const {
    if (entries_.empty()) throw StateError("top_frequency on empty sketch");
    if (mass_ <= 0.0) return 0.0;
    return order_.rbegin()->first / mass_;
}

double FrequencySketch::hot_mass(double theta) const {
    if (mass_ <= 0.0) return 0.0;
    double sum = 0.0;
    for (auto it = order_.rbegin(); it != order_.rend(); ++it) {
        const double f = it->first / mass_;
        if (f <= theta) break;
        sum += f;
    }
    return sum;
}

}  // namespace fishlab
