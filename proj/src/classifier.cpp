#include "fishlab/classifier.hpp"

#include <algorithm>
#include <cmath>

namespace fishlab {

HotKeyTable::HotKeyTable(double theta, std::uint32_t worker_count, int d_min)
    : theta_(theta), worker_count_(worker_count), d_min_(d_min) {
    if (!(theta > 0.0) || theta >= 1.0) throw ConfigError("theta must be in (0, 1)");
    if (worker_count == 0) throw ConfigError("worker_count must be positive");
    if (d_min < 2) throw ConfigError("d_min must be >= 2");
}

int HotKeyTable::classify(std::string_view key, std::optional<double> f_k, double f_top) {
    if (f_k && *f_k > f_top) throw std::invalid_argument("classify: f_k exceeds f_top");
    if (worker_count_ < 2) throw ConfigError("classify needs at least 2 workers");

    if (!f_k || *f_k <= theta_) return 2;

    // floor(log2(f_top / f_k)); the epsilon keeps exact power-of-two ratios
    // from landing one bucket low.
    const double ratio = f_top / *f_k;
    const int index = std::max(0, static_cast<int>(std::floor(std::log2(ratio) + 1e-12)));
    int d = index >= 31 ? 0 : static_cast<int>(worker_count_ >> index);
    if (d < d_min_) d = d_min_;

    int result = d;
    auto it = grants_.find(std::string(key));
    if (it == grants_.end()) {
        grants_.emplace(std::string(key), d);
    } else if (it->second < d) {
        it->second = d;
    } else {
        result = it->second;
    }
    return std::min(result, static_cast<int>(worker_count_));
}

void HotKeyTable::forget(std::string_view key) { grants_.erase(std::string(key)); }

void HotKeyTable::set_worker_count(std::uint32_t n) {
    if (n == 0) throw ConfigError("worker_count must be positive");
    worker_count_ = n;
}

void HotKeyTable::set_theta(double theta) {
    if (!(theta > 0.0) || theta >= 1.0) throw ConfigError("theta must be in (0, 1)");
    theta_ = theta;
}

void HotKeyTable::set_d_min(int d_min) {
    if (d_min < 2) throw ConfigError("d_min must be >= 2");
    d_min_ = d_min;
}

int compute_dmin(double hot_mass, std::uint32_t worker_count) {
    if (hot_mass < 0.0 || hot_mass > 1.0 || !std::isfinite(hot_mass))
        throw std::invalid_argument("compute_dmin: hot_mass outside [0, 1]");
    if (worker_count < 2) throw ConfigError("worker_count must be >= 2");
    const int raw = static_cast<int>(std::ceil(hot_mass * static_cast<double>(worker_count) - 1e-9));
    return std::clamp(raw, 2, static_cast<int>(worker_count));
}

}  // namespace fishlab
