#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>

#include "fishlab/types.hpp"

namespace fishlab {

/// Decides how many candidate workers a key may use and remembers past
/// grants. Hot keys (frequency above theta) receive a share of the workers
/// that halves with every power of two between their frequency and the top
/// frequency; everyone else gets two. Grants only ever grow while a key
/// stays tracked.
class HotKeyTable {
public:
    HotKeyTable(double theta, std::uint32_t worker_count, int d_min = 2);

    /// Candidate worker count for key, given its frequency and the current
    /// top frequency. Updates the grant memory for hot keys. The returned
    /// value is clamped to the current worker count.
    int classify(std::string_view key, std::optional<double> f_k, double f_top);

    /// Drops the stored grant, typically because the detector evicted key.
    void forget(std::string_view key);

    void set_worker_count(std::uint32_t n);
    void set_theta(double theta);
    void set_d_min(int d_min);

    double theta() const { return theta_; }
    std::uint32_t worker_count() const { return worker_count_; }
    int d_min() const { return d_min_; }
    const std::unordered_map<std::string, int>& grants() const { return grants_; }

private:
    double theta_;
    std::uint32_t worker_count_;
    int d_min_;
    std::unordered_map<std::string, int> grants_;  // M
};

/// Minimal worker count for hot keys: the hot keys' share of the stream,
/// mapped onto the worker pool. hot_mass is the summed frequency of all
/// keys above theta.
int compute_dmin(double hot_mass, std::uint32_t worker_count);

}  // namespace fishlab
