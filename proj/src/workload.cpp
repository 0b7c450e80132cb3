#include "fishlab/workload.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <random>
#include <sstream>

namespace fishlab {

namespace {

void validate(const ZipfEvolvingConfig& cfg) {
    if (cfg.total_tuples == 0) throw ConfigError("total_tuples must be positive");
    if (cfg.distinct_keys == 0) throw ConfigError("distinct_keys must be positive");
    if (cfg.skew < 0.0 || !std::isfinite(cfg.skew)) throw ConfigError("skew must be >= 0");
    if (!(cfg.phase_split > 0.0) || cfg.phase_split > 1.0)
        throw ConfigError("phase_split must be in (0, 1]");
    if (!(cfg.arrival_rate > 0.0) || !std::isfinite(cfg.arrival_rate))
        throw ConfigError("arrival_rate must be positive");
    if (cfg.total_tuples >= 2 &&
        static_cast<std::uint64_t>(cfg.phase_split * static_cast<double>(cfg.total_tuples)) < 1)
        throw ConfigError("phase_split leaves an empty first phase");
}

// Uniform double in [0, 1) from the raw 64-bit output. The stdlib
// distributions are implementation-defined; this keeps streams portable.
inline double uniform01(std::mt19937_64& rng) {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

}  // namespace

std::vector<TupleEvent> generate_zipf_evolving(const ZipfEvolvingConfig& cfg) {
    validate(cfg);
    const std::uint64_t n = cfg.total_tuples;
    const std::uint64_t k = cfg.distinct_keys;

    // Inverse-CDF table over ranks 1..k with weight rank^-z. Phase 2 reuses
    // the same table through the rank -> k+1-rank reflection.
    std::vector<double> cdf(k);
    double sum = 0.0;
    for (std::uint64_t i = 0; i < k; ++i) {
        sum += std::pow(static_cast<double>(i + 1), -cfg.skew);
        cdf[i] = sum;
    }
    for (auto& c : cdf) c /= sum;
    cdf.back() = 1.0;

    std::vector<std::string> key_names(k);
    for (std::uint64_t i = 0; i < k; ++i) key_names[i] = std::to_string(i + 1);

    const std::uint64_t phase1 =
        std::min(n, static_cast<std::uint64_t>(cfg.phase_split * static_cast<double>(n)));

    std::mt19937_64 rng(cfg.rng_seed);
    std::vector<TupleEvent> out;
    out.reserve(n);
    for (std::uint64_t j = 0; j < n; ++j) {
        const double u = uniform01(rng);
        auto it = std::lower_bound(cdf.begin(), cdf.end(), u);
        std::uint64_t rank = static_cast<std::uint64_t>(it - cdf.begin());  // 0-based
        if (rank >= k) rank = k - 1;
        const std::uint64_t id = (j < phase1) ? rank : k - 1 - rank;
        out.push_back({static_cast<double>(j) / cfg.arrival_rate, key_names[id]});
    }
    return out;
}

std::vector<TupleEvent> read_tuple_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ParseError("cannot open tuple file: " + path);

    std::vector<TupleEvent> out;
    std::string line;
    std::size_t lineno = 0;
    double prev_time = -std::numeric_limits<double>::infinity();
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty() || line[0] == '#') continue;

        const auto tab = line.find('\t');
        if (tab == std::string::npos)
            throw ParseError("line " + std::to_string(lineno) + ": missing tab separator");
        double t = 0.0;
        const char* first = line.data();
        const char* last = line.data() + tab;
        auto [ptr, ec] = std::from_chars(first, last, t);
        if (ec != std::errc{} || ptr != last || !std::isfinite(t) || t < 0.0)
            throw ParseError("line " + std::to_string(lineno) + ": bad arrival time");
        std::string key = line.substr(tab + 1);
        if (key.empty())
            throw ParseError("line " + std::to_string(lineno) + ": empty key");
        if (t < prev_time)
            throw ParseError("line " + std::to_string(lineno) + ": decreasing arrival time");
        prev_time = t;
        out.push_back({t, std::move(key)});
    }
    return out;
}

void write_tuple_file(const std::string& path, std::span<const TupleEvent> events) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw StateError("cannot open for writing: " + path);
    char buf[64];
    for (const auto& e : events) {
        auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), e.arrival_time);
        out.write(buf, ptr - buf);
        out.put('\t');
        out.write(e.key.data(), static_cast<std::streamsize>(e.key.size()));
        out.put('\n');
    }
    if (!out) throw StateError("write failed: " + path);
}

}  // namespace fishlab
