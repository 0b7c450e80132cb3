#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <unordered_map>

#include "fishlab/workload.hpp"
#include "oracles.hpp"

using namespace fishlab;

namespace {

std::string temp_path(const std::string& name) {
    return (std::filesystem::temp_directory_path() / name).string();
}

std::unordered_map<std::string, std::uint64_t> key_histogram(
    const std::vector<TupleEvent>& stream, std::size_t begin, std::size_t end) {
    std::unordered_map<std::string, std::uint64_t> h;
    for (std::size_t i = begin; i < end; ++i) h[stream[i].key] += 1;
    return h;
}

}  // namespace

TEST_CASE("uniform draw at z=0 spreads keys evenly") {
    ZipfEvolvingConfig cfg;
    cfg.total_tuples = 100000;
    cfg.distinct_keys = 4;
    cfg.skew = 0.0;
    cfg.phase_split = 1.0;
    cfg.arrival_rate = 1000.0;
    cfg.rng_seed = 7;
    const auto stream = generate_zipf_evolving(cfg);
    REQUIRE(stream.size() == 100000);
    const auto h = key_histogram(stream, 0, stream.size());
    for (const auto& key : {"1", "2", "3", "4"}) {
        const double freq = static_cast<double>(h.at(key)) / 100000.0;
        CHECK(freq == doctest::Approx(0.25).epsilon(0.04));  // +-0.01 absolute
        CHECK(std::abs(freq - 0.25) <= 0.01);
    }
}

TEST_CASE("z=1 head frequency matches the harmonic normalizer") {
    // Pr[key 1] = 1 / (1 + 1/2 + 1/3 + 1/4) = 12/25
    ZipfEvolvingConfig cfg;
    cfg.total_tuples = 100000;
    cfg.distinct_keys = 4;
    cfg.skew = 1.0;
    cfg.phase_split = 1.0;
    cfg.rng_seed = 11;
    const auto stream = generate_zipf_evolving(cfg);
    const auto h = key_histogram(stream, 0, stream.size());
    const double freq = static_cast<double>(h.at("1")) / 100000.0;
    CHECK(std::abs(freq - 0.48) <= 0.01);
}

TEST_CASE("phase flip reverses the modal key") {
    ZipfEvolvingConfig cfg;
    cfg.total_tuples = 1000000;
    cfg.distinct_keys = 10000;
    cfg.skew = 2.0;
    cfg.phase_split = 0.8;
    cfg.rng_seed = 3;
    const auto stream = generate_zipf_evolving(cfg);
    REQUIRE(stream.size() == 1000000);

    const std::size_t split = 800000;
    const auto phase1 = key_histogram(stream, 0, split);
    const auto phase2 = key_histogram(stream, split, stream.size());
    const auto modal = [](const std::unordered_map<std::string, std::uint64_t>& h) {
        std::string best;
        std::uint64_t best_count = 0;
        for (const auto& [k, c] : h)
            if (c > best_count) {
                best = k;
                best_count = c;
            }
        return best;
    };
    CHECK(modal(phase1) == "1");
    CHECK(modal(phase2) == "10000");
}

TEST_CASE("arrival times and reproducibility") {
    ZipfEvolvingConfig cfg;
    cfg.total_tuples = 1000;
    cfg.distinct_keys = 50;
    cfg.skew = 1.2;
    cfg.arrival_rate = 200.0;
    cfg.rng_seed = 99;
    const auto a = generate_zipf_evolving(cfg);
    const auto b = generate_zipf_evolving(cfg);
    REQUIRE(a.size() == b.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
        CHECK(a[i].arrival_time == static_cast<double>(i) / 200.0);
        CHECK(a[i].key == b[i].key);
        CHECK(a[i].arrival_time == b[i].arrival_time);
        if (i > 0) CHECK(a[i].arrival_time >= a[i - 1].arrival_time);
    }
}

TEST_CASE("config validation names the offending field") {
    ZipfEvolvingConfig cfg;
    cfg.total_tuples = 0;
    cfg.distinct_keys = 4;
    CHECK_THROWS_WITH_AS(generate_zipf_evolving(cfg), doctest::Contains("total_tuples"),
                         ConfigError);
    cfg.total_tuples = 10;
    cfg.distinct_keys = 0;
    CHECK_THROWS_WITH_AS(generate_zipf_evolving(cfg), doctest::Contains("distinct_keys"),
                         ConfigError);
    cfg.distinct_keys = 4;
    cfg.skew = -0.5;
    CHECK_THROWS_WITH_AS(generate_zipf_evolving(cfg), doctest::Contains("skew"), ConfigError);
    cfg.skew = 1.0;
    cfg.phase_split = 0.0;
    CHECK_THROWS_WITH_AS(generate_zipf_evolving(cfg), doctest::Contains("phase_split"),
                         ConfigError);
    cfg.phase_split = 0.01;  // floor(0.01 * 10) = 0: empty first phase
    CHECK_THROWS_WITH_AS(generate_zipf_evolving(cfg), doctest::Contains("phase_split"),
                         ConfigError);
}

TEST_CASE("phase-1 frequencies pass a chi-square fit against exact probabilities") {
    ZipfEvolvingConfig cfg;
    cfg.total_tuples = 1000000;
    cfg.distinct_keys = 100;
    cfg.skew = 1.0;
    cfg.phase_split = 1.0;
    cfg.rng_seed = 1234;
    const auto stream = generate_zipf_evolving(cfg);
    const auto probs = oracles::zipf_probabilities(cfg.distinct_keys, cfg.skew);
    const auto h = key_histogram(stream, 0, stream.size());

    double x2 = 0.0;
    for (std::uint64_t i = 0; i < cfg.distinct_keys; ++i) {
        const double expected = probs[i] * static_cast<double>(cfg.total_tuples);
        const auto it = h.find(std::to_string(i + 1));
        const double observed = it == h.end() ? 0.0 : static_cast<double>(it->second);
        x2 += (observed - expected) * (observed - expected) / expected;
    }
    CHECK(x2 < oracles::chi_square_critical(cfg.distinct_keys - 1, 0.01));
}

TEST_CASE("tuple file round trip and parse errors") {
    const auto path = temp_path("fishlab_tuples_test.tsv");

    SUBCASE("plain two-line file") {
        std::ofstream out(path);
        out << "0.0\ta\n0.5\tb\n";
        out.close();
        const auto events = read_tuple_file(path);
        REQUIRE(events.size() == 2);
        CHECK(events[0].key == "a");
        CHECK(events[1].key == "b");
        CHECK(events[1].arrival_time == 0.5);
    }

    SUBCASE("empty file gives empty sequence") {
        std::ofstream(path).close();
        CHECK(read_tuple_file(path).empty());
    }

    SUBCASE("comments and blank lines are ignored but counted") {
        std::ofstream out(path);
        out << "# header\n\n1.0\tx\n";
        out.close();
        CHECK(read_tuple_file(path).size() == 1);
    }

    SUBCASE("decreasing timestamps cite the line") {
        std::ofstream out(path);
        out << "1.0\ta\n0.5\tb\n";
        out.close();
        CHECK_THROWS_WITH_AS(read_tuple_file(path), doctest::Contains("line 2"), ParseError);
    }

    SUBCASE("missing tab cites the line") {
        std::ofstream out(path);
        out << "0.25 nokey\n";
        out.close();
        CHECK_THROWS_WITH_AS(read_tuple_file(path), doctest::Contains("line 1"), ParseError);
    }

    SUBCASE("missing file") {
        CHECK_THROWS_AS(read_tuple_file(temp_path("fishlab_no_such_file.tsv")), ParseError);
    }

    SUBCASE("write then read is identity") {
        ZipfEvolvingConfig cfg;
        cfg.total_tuples = 500;
        cfg.distinct_keys = 20;
        cfg.skew = 1.0;
        cfg.arrival_rate = 333.0;
        cfg.rng_seed = 5;
        const auto stream = generate_zipf_evolving(cfg);
        write_tuple_file(path, stream);
        const auto back = read_tuple_file(path);
        REQUIRE(back.size() == stream.size());
        for (std::size_t i = 0; i < back.size(); ++i) {
            CHECK(back[i].key == stream[i].key);
            CHECK(back[i].arrival_time == stream[i].arrival_time);
        }
    }

    std::remove(path.c_str());
}
