#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "fishlab/types.hpp"

namespace fishlab {

/// Parameters of the two-phase evolving Zipf stream.
///
/// The first floor(phase_split * N) tuples draw key i with probability
/// proportional to i^-z; the remaining tuples draw key i with probability
/// proportional to (k - i + 1)^-z, so the popularity ranking reverses in
/// the second phase.
struct ZipfEvolvingConfig {
    std::uint64_t total_tuples = 0;   // N
    std::uint64_t distinct_keys = 0;  // k
    double skew = 1.0;                // z >= 0
    double phase_split = 0.8;         // fraction in (0, 1]
    double arrival_rate = 1000.0;     // tuples per simulated second
    std::uint64_t rng_seed = 1;
};

/// Generates the evolving Zipf stream. Keys are the decimal renderings of
/// the ids 1..k; tuple j (0-based) arrives at j / arrival_rate. The result
/// is a pure function of the config, byte-identical across runs.
/// Throws ConfigError naming the offending field on invalid input.
std::vector<TupleEvent> generate_zipf_evolving(const ZipfEvolvingConfig& cfg);

/// Reads a tuple file: UTF-8 text, one `arrival_time<TAB>key` record per
/// line, '#'-prefixed comment lines and blank lines ignored. Throws
/// ParseError (citing the 1-based line number) on malformed lines or
/// decreasing timestamps.
std::vector<TupleEvent> read_tuple_file(const std::string& path);

/// Writes events in the tuple-file format accepted by read_tuple_file.
void write_tuple_file(const std::string& path, std::span<const TupleEvent> events);

}  // namespace fishlab
