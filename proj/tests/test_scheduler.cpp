#include <doctest.h>

#include <cmath>
#include <vector>

#include "disktour/density.hpp"
#include "disktour/rng.hpp"
#include "disktour/scheduler.hpp"

using namespace disktour;

namespace {

std::vector<DiskPoint> uniform_batch(int n, std::uint64_t seed) {
    return sample(Density::uniform(), static_cast<std::size_t>(n), seed).points;
}

} // namespace

TEST_CASE("layer_chain_order") {
    SeekModel c1(1.0);
    CHECK(layer_chain_order({{0.3, 0.4}}, c1) == std::vector<int>{0});
    {
        std::vector<DiskPoint> layer{{0.1, 0.5}, {0.6, 0.55}};
        auto order = layer_chain_order(layer, c1);
        REQUIRE(order.size() == 2);
        CHECK(order[0] == 0);
        CHECK(order[1] == 1);
        // successive lifts are reachable, including the wrap back
        StripPoint a{layer[0].theta, layer[0].r};
        StripPoint b{layer[1].theta, layer[1].r};
        CHECK(leq_hor(a, b, c1));
        CHECK(leq_hor(b, shift(a, 1), c1));
    }
    // chain pair is not an antichain
    std::vector<DiskPoint> bad{{0.3, 0.1}, {0.35, 0.9}};
    CHECK_THROWS_AS(layer_chain_order(bad, c1), std::invalid_argument);

    // layers straight out of a peel qualify, and neighbors chain up
    SeekModel m(0.5);
    auto batch = uniform_batch(150, 41);
    PeelLayers pl = peel_cylinder_ver(batch, m);
    for (const auto& layer_ids : pl.layers) {
        std::vector<DiskPoint> layer;
        for (int idx : layer_ids) layer.push_back(batch[static_cast<std::size_t>(idx)]);
        auto order = layer_chain_order(layer, m);
        for (std::size_t i = 0; i < order.size(); ++i) {
            const DiskPoint& p = layer[static_cast<std::size_t>(order[i])];
            const DiskPoint& q = layer[static_cast<std::size_t>(order[(i + 1) % order.size()])];
            double dt = q.theta - p.theta;
            if (i + 1 == order.size()) dt += 1.0;
            CHECK(leq_hor({0.0, p.r}, {dt, q.r}, m));
        }
    }
}

TEST_CASE("modified_abz single request") {
    SeekModel c1(1.0);
    Tour t = modified_abz({{0.5, 0.49}}, c1);
    REQUIRE(t.visits.size() == 3);
    CHECK(t.visits[0].t == 0.0);
    CHECK(t.visits[1].t == doctest::Approx(0.5));
    CHECK(t.visits[1].r == doctest::Approx(0.49));
    CHECK(t.k == 1);
    CHECK(validate_tour(t, {{0.5, 0.49}}, c1));
    CHECK_THROWS_AS(modified_abz({}, c1), std::invalid_argument);
}

TEST_CASE("modified_abz on a vertical chain of 3") {
    SeekModel c1(1.0);
    std::vector<DiskPoint> chain{{0.30, 0.10}, {0.31, 0.20}, {0.29, 0.28}};
    CHECK(peel_cylinder_ver(chain, c1).depth() == 3);
    Tour t = modified_abz(chain, c1);
    CHECK(validate_tour(t, chain, c1));
    CHECK(t.k >= 3);
    CHECK(t.k <= 4);
}

TEST_CASE("modified_abz scaling at n=1000") {
    SeekModel c1(1.0);
    auto batch = uniform_batch(1000, 321);
    Tour t = modified_abz(batch, c1);
    CHECK(validate_tour(t, batch, c1));
    double ratio = static_cast<double>(t.k) / std::sqrt(1000.0);
    CHECK(ratio >= 1.2);
    CHECK(ratio <= 1.7);
}

TEST_CASE("layer curves accumulate monotonically") {
    SeekModel c1(1.0);
    auto batch = uniform_batch(200, 515);
    PeelLayers pl = peel_cylinder_ver(batch, c1);
    LayerCurves lcs = build_layer_curves(batch, pl, c1);
    REQUIRE(lcs.layers.size() == static_cast<std::size_t>(pl.depth()));
    double prev_entry = 0.0;
    for (std::size_t i = 0; i < lcs.layers.size(); ++i) {
        CHECK(lcs.layers[i].entry_t >= prev_entry);
        prev_entry = lcs.layers[i].entry_t;
    }
    for (int i = 1; i < pl.depth(); ++i)
        for (int g = 0; g <= 1000; ++g) {
            double t = g / 1000.0;
            CHECK(eval_accumulated_curve(lcs, i + 1, t) >=
                  eval_accumulated_curve(lcs, i, t) - 1e-12);
        }
}

TEST_CASE("abz") {
    SeekModel c1(1.0);
    {
        Tour a = abz({{0.5, 0.49}}, c1);
        Tour m = modified_abz({{0.5, 0.49}}, c1);
        CHECK(a.k == m.k);
        CHECK(validate_tour(a, {{0.5, 0.49}}, c1));
    }
    CHECK_THROWS_AS(abz({}, c1), std::invalid_argument);

    for (double c : {0.5, 1.0, 2.0}) {
        SeekModel m(c);
        for (int inst = 0; inst < 50; ++inst) {
            auto batch = sample(Density::uniform(), 60, derive_seed(2222, static_cast<std::uint64_t>(inst) + 100 * static_cast<std::uint64_t>(c * 2))).points;
            Tour a = abz(batch, m);
            Tour md = modified_abz(batch, m);
            CHECK(validate_tour(a, batch, m));
            CHECK(validate_tour(md, batch, m));
            std::vector<DiskPoint> with_origin = batch;
            with_origin.push_back({0.0, 0.0});
            int M = peel_cylinder_ver(with_origin, m).depth();
            CHECK(static_cast<double>(a.k) <= M + 1.0 + 2.0 / c + 1e-9);
            CHECK(static_cast<double>(md.k) <= M + 1.0 + 2.0 / c + 1e-9);
        }
    }
}

TEST_CASE("exact_service_time") {
    SeekModel c1(1.0);
    CHECK(exact_service_time({{0.5, 0.49}}, c1) == 1);
    {
        // two vertically comparable requests: M (with origin) is at least 2
        std::vector<DiskPoint> two{{0.3, 0.35}, {0.32, 0.7}};
        long long k = exact_service_time(two, c1);
        std::vector<DiskPoint> with_origin = two;
        with_origin.push_back({0.0, 0.0});
        int M = peel_cylinder_ver(with_origin, c1).depth();
        CHECK(M == 3);
        CHECK(static_cast<double>(k) >= M - 2.0 - 1e-9);
        CHECK(static_cast<double>(k) <= M + 3.0 + 1e-9);
    }
    std::vector<DiskPoint> big(10, DiskPoint{0.1, 0.1});
    CHECK_THROWS_AS(exact_service_time(big, c1), std::invalid_argument);
}

TEST_CASE("exact_service_time is a lower bound for the heuristics") {
    for (double c : {0.5, 1.0, 2.0}) {
        SeekModel m(c);
        for (int inst = 0; inst < 100; ++inst) {
            auto batch = sample(Density::uniform(), 2 + inst % 6,
                                derive_seed(909, static_cast<std::uint64_t>(inst) +
                                                     1000 * static_cast<std::uint64_t>(c * 2)))
                             .points;
            long long k = exact_service_time(batch, m);
            CHECK(k <= modified_abz(batch, m).k);
            CHECK(k <= abz(batch, m).k);
        }
    }
}

TEST_CASE("sandwich_check") {
    for (double c : {0.5, 1.0, 2.0}) {
        SeekModel m(c);
        for (int inst = 0; inst < 200; ++inst) {
            int n = 2 + inst % 8;
            auto batch = sample(Density::uniform(), static_cast<std::size_t>(n),
                                derive_seed(4040, static_cast<std::uint64_t>(inst) +
                                                      1000 * static_cast<std::uint64_t>(c * 2)))
                             .points;
            SandwichReport rep = sandwich_check(batch, m);
            CHECK(rep.holds);
            REQUIRE(rep.k_exact.has_value());
        }
    }
    // large-n: the heuristic upper bound still holds
    SeekModel c1(1.0);
    auto big = uniform_batch(10000, 777);
    SandwichReport rep = sandwich_check(big, c1);
    CHECK(rep.holds);
    CHECK_FALSE(rep.k_exact.has_value());
}

TEST_CASE("validate_tour rejects corrupted tours") {
    SeekModel c1(1.0);
    auto batch = uniform_batch(20, 31);
    Tour good = modified_abz(batch, c1);
    REQUIRE(validate_tour(good, batch, c1));

    Tour swapped = good;
    std::swap(swapped.visits[3], swapped.visits[10]);
    std::swap(swapped.request_id[3], swapped.request_id[10]);
    CHECK_FALSE(validate_tour(swapped, batch, c1));

    Tour missing = good;
    missing.visits.erase(missing.visits.begin() + 5);
    missing.request_id.erase(missing.request_id.begin() + 5);
    missing.layer.erase(missing.layer.begin() + 5);
    CHECK_FALSE(validate_tour(missing, batch, c1));

    Tour bad_end = good;
    bad_end.visits.back().r = 0.1;
    CHECK_FALSE(validate_tour(bad_end, batch, c1));
}
