#include <doctest.h>

#include <random>

#include "fishlab/grouping.hpp"
#include "fishlab/workload.hpp"

using namespace fishlab;

namespace {

SchemeParams base_params(std::uint32_t workers) {
    SchemeParams p;
    for (WorkerId w = 0; w < workers; ++w) p.workers.push_back(w);
    p.sketch = {1000, 1000, 0.2};
    p.theta = ThetaRule::parse("1/4n");
    p.dmin = DminRule::parse("2");
    p.choice_seed = 11;
    return p;
}

void sample_all(FishGrouping& fish, double seconds_per_tuple) {
    for (WorkerId w : fish.active_workers())
        fish.assigner().sample_capacity(w, seconds_per_tuple);
}

}  // namespace

TEST_CASE("scheme names round trip") {
    for (const auto name : {"sg", "fg", "pkg", "dc", "wc", "fish"}) {
        const auto kind = parse_scheme_kind(name);
        CHECK(to_string(kind) == name);
        auto scheme = make_scheme(kind, base_params(4));
        if (auto* fish = dynamic_cast<FishGrouping*>(scheme.get())) sample_all(*fish, 0.01);
        CHECK(scheme->kind() == kind);
        CHECK(scheme->route("x", 0.0) < 4);
    }
    CHECK_THROWS_AS(parse_scheme_kind("bogus"), ConfigError);
}

TEST_CASE("theta rules") {
    CHECK(ThetaRule::parse("1/4n").value(64) == doctest::Approx(1.0 / 256.0));
    CHECK(ThetaRule::parse("2/n").value(16) == doctest::Approx(0.125));
    CHECK(ThetaRule::parse("1/8n").value(8) == doctest::Approx(1.0 / 64.0));
    CHECK(ThetaRule::parse("0.05").value(64) == doctest::Approx(0.05));
    CHECK_THROWS_AS(ThetaRule::parse("n/"), ConfigError);
    CHECK_THROWS_AS(ThetaRule::parse("five"), ConfigError);
    CHECK_THROWS_AS(ThetaRule::parse("1.5"), ConfigError);
}

TEST_CASE("dmin rules") {
    CHECK(DminRule::parse("auto").automatic);
    CHECK(DminRule::parse("4").fixed == 4);
    CHECK_THROWS_AS(DminRule::parse("1"), ConfigError);
    CHECK_THROWS_AS(DminRule::parse("x"), ConfigError);
}

TEST_CASE("shuffle grouping cycles the pool") {
    auto sg = make_scheme(SchemeKind::SG, base_params(3));
    std::map<WorkerId, int> counts;
    for (int i = 0; i < 6; ++i) counts[sg->route("k" + std::to_string(i), 0.0)] += 1;
    for (WorkerId w = 0; w < 3; ++w) CHECK(counts[w] == 2);
}

TEST_CASE("fields grouping pins a key to one worker") {
    auto fg = make_scheme(SchemeKind::FG, base_params(8));
    const WorkerId first = fg->route("x", 0.0);
    for (int i = 0; i < 10000; ++i) CHECK(fg->route("x", 0.0) == first);
    CHECK(fg->memory_units() == 1);
}

TEST_CASE("pkg bounds every key to two workers") {
    auto pkg = make_scheme(SchemeKind::PKG, base_params(16));
    std::mt19937_64 rng(3);
    for (int i = 0; i < 20000; ++i)
        pkg->route("k" + std::to_string(rng() % 100), 0.0);
    for (const auto& [w, keys] : pkg->tracked_state())
        CHECK(keys.size() <= 100);
    std::map<std::string, std::set<WorkerId>> per_key;
    for (const auto& [w, keys] : pkg->tracked_state())
        for (const auto& k : keys) per_key[k].insert(w);
    for (const auto& [k, workers] : per_key) CHECK(workers.size() <= 2);
}

TEST_CASE("shuffle grouping visits every worker for recurring keys") {
    // Three keys cycling through a four-worker pool: 3 and 4 are coprime,
    // so each key's occurrences sweep all cursor positions.
    auto sg = make_scheme(SchemeKind::SG, base_params(4));
    for (int round = 0; round < 80; ++round)
        for (const auto key : {"a", "b", "c"}) sg->route(key, 0.0);
    for (const auto key : {"a", "b", "c"}) {
        int on = 0;
        for (const auto& [w, keys] : sg->tracked_state()) on += keys.count(key);
        CHECK(on == 4);
    }
}

TEST_CASE("fish routes hot keys across the pool by estimated wait") {
    auto params = base_params(2);
    FishGrouping fish(params);
    sample_all(fish, 1.0);
    std::map<WorkerId, int> counts;
    for (int i = 0; i < 10; ++i) counts[fish.route("h", 0.0)] += 1;
    // "h" is the only key: f_k == f_top > theta, so both workers are
    // candidates and least-wait alternates between them.
    CHECK(counts[0] == 5);
    CHECK(counts[1] == 5);
    CHECK(fish.table().grants().at("h") == 2);
    CHECK(fish.memory_units() == 2);
}

TEST_CASE("fish keys land inside their granted candidate set") {
    auto params = base_params(8);
    FishGrouping fish(params);
    sample_all(fish, 1.0);
    std::mt19937_64 rng(9);
    for (int i = 0; i < 20000; ++i) fish.route("k" + std::to_string(rng() % 400), 0.0);
    // Steady state: route once more and verify the worker sits inside the
    // candidate prefix implied by the key's current grant (2 when cold and
    // never granted more).
    for (int i = 0; i < 50; ++i) {
        const std::string key = "k" + std::to_string(i);
        const WorkerId got = fish.route(key, 0.0);
        const auto it = fish.table().grants().find(key);
        const std::uint32_t width =
            it == fish.table().grants().end() ? 2u : static_cast<std::uint32_t>(it->second);
        const auto cands = fish.ring().candidates(key, width);
        CHECK(std::find(cands.begin(), cands.end(), got) != cands.end());
    }
}

TEST_CASE("fish candidate width equals the latest grant") {
    auto params = base_params(8);
    params.sketch = {64, 100, 0.5};
    FishGrouping fish(params);
    sample_all(fish, 1.0);
    std::mt19937_64 rng(13);
    for (int i = 0; i < 5000; ++i) {
        const std::string key = "k" + std::to_string(rng() % 50);
        fish.route(key, 0.0);
    }
    for (const auto& [key, grant] : fish.table().grants()) {
        const auto cands = fish.ring().candidates(key, static_cast<std::uint32_t>(grant));
        CHECK(cands.size() ==
              std::min<std::size_t>(grant, fish.active_workers().size()));
    }
}

TEST_CASE("fish count mode balances by assignment count") {
    auto params = base_params(4);
    params.assign_mode = AssignMode::CountBased;
    FishGrouping fish(params);
    std::map<WorkerId, int> counts;
    for (int i = 0; i < 8000; ++i) counts[fish.route("hot", 0.0)] += 1;
    for (const auto& [w, c] : counts) CHECK(c == 2000);
}

TEST_CASE("dc and wc spread hot keys but bound cold ones") {
    for (const auto kind : {SchemeKind::DC, SchemeKind::WC}) {
        auto params = base_params(8);
        params.theta = ThetaRule::parse("1/4n");
        auto scheme = make_scheme(kind, params);
        std::mt19937_64 rng(17);
        for (int i = 0; i < 30000; ++i) {
            // one dominant key plus a cold tail
            const bool hot = rng() % 2 == 0;
            scheme->route(hot ? "hot" : "cold" + std::to_string(rng() % 500), 0.0);
        }
        std::set<WorkerId> hot_workers;
        std::map<std::string, std::set<WorkerId>> cold_workers;
        for (const auto& [w, keys] : scheme->tracked_state()) {
            if (keys.count("hot")) hot_workers.insert(w);
            for (const auto& k : keys)
                if (k != "hot") cold_workers[k].insert(w);
        }
        if (kind == SchemeKind::WC)
            CHECK(hot_workers.size() == 8);  // the whole pool
        else
            CHECK(hot_workers.size() >= 4);
        // Cold keys ride the two-choice fallback. The handful of keys that
        // looked hot while the lifetime sketch was nearly empty may carry a
        // wider footprint; they must stay a rarity.
        std::size_t wide = 0;
        for (const auto& [k, ws] : cold_workers) wide += ws.size() > 2;
        CHECK(wide <= cold_workers.size() / 20);
    }
}

TEST_CASE("schemes are deterministic given identical inputs") {
    ZipfEvolvingConfig zc;
    zc.total_tuples = 5000;
    zc.distinct_keys = 200;
    zc.skew = 1.2;
    zc.rng_seed = 33;
    const auto stream = generate_zipf_evolving(zc);
    for (const auto kind :
         {SchemeKind::SG, SchemeKind::FG, SchemeKind::PKG, SchemeKind::DC, SchemeKind::WC,
          SchemeKind::FISH}) {
        auto a = make_scheme(kind, base_params(8));
        auto b = make_scheme(kind, base_params(8));
        if (auto* fish = dynamic_cast<FishGrouping*>(a.get())) sample_all(*fish, 0.01);
        if (auto* fish = dynamic_cast<FishGrouping*>(b.get())) sample_all(*fish, 0.01);
        for (const auto& t : stream)
            CHECK(a->route(t.key, t.arrival_time) == b->route(t.key, t.arrival_time));
    }
}

TEST_CASE("routing with no active workers fails loudly") {
    auto params = base_params(1);
    ShuffleGrouping sg(params);
    sg.remove_worker(0);
    CHECK_THROWS_AS(sg.route("x", 0.0), StateError);
}

TEST_CASE("worker churn keeps fish routable") {
    auto params = base_params(4);
    FishGrouping fish(params);
    sample_all(fish, 0.5);
    std::mt19937_64 rng(19);
    for (int i = 0; i < 2000; ++i) fish.route("k" + std::to_string(rng() % 60), 0.0);
    fish.remove_worker(2);
    for (int i = 0; i < 2000; ++i) {
        const WorkerId w = fish.route("k" + std::to_string(rng() % 60), 0.0);
        CHECK(w != 2);
    }
    fish.add_worker(2);
    fish.assigner().sample_capacity(2, 0.5);
    fish.add_worker(9);
    fish.assigner().sample_capacity(9, 0.5);
    std::set<WorkerId> seen;
    for (int i = 0; i < 5000; ++i) seen.insert(fish.route("k" + std::to_string(rng() % 60), 0.0));
    CHECK(seen.count(9) == 1);
}
