#include <catch2/catch_amalgamated.hpp>

#include "twoport/circuit.hpp"
#include "twoport/rng.hpp"
#include "twoport/value_grid.hpp"

using namespace twoport;

namespace {

Configuration make(std::initializer_list<Component> cs) {
    return Configuration(std::vector<Component>(cs));
}

constexpr Alignment S = Alignment::Series;
constexpr Alignment P = Alignment::Parallel;
constexpr ComponentType R = ComponentType::Resistor;
constexpr ComponentType C = ComponentType::Capacitor;
constexpr ComponentType L = ComponentType::Inductor;

} // namespace

TEST_CASE("canonicalize sorts within same-alignment runs only", "[circuit]") {
    const Configuration in = make({{S, R, 1.0}, {P, R, 0.5}, {P, C, 0.1}, {P, R, 0.05}});
    const Configuration want =
        make({{S, R, 1.0}, {P, R, 0.05}, {P, R, 0.5}, {P, C, 0.1}});
    CHECK(canonicalize(in) == want);
    CHECK(is_canonical(want));
    CHECK_FALSE(is_canonical(in));
}

TEST_CASE("canonicalize is idempotent and preserves run boundaries", "[circuit]") {
    Rng rng(7);
    const ValueGrid grid = ValueGrid::standard();
    for (int trial = 0; trial < 200; ++trial) {
        Configuration x;
        const int n = 1 + rng.index(6);
        for (int i = 0; i < n; ++i) {
            x.components.push_back(Component{
                rng.coin() ? S : P, static_cast<ComponentType>(rng.index(3)),
                grid.representative(static_cast<ComponentType>(0), rng.index(5)) *
                    (1.0 + rng.uniform())});
        }
        const Configuration c1 = canonicalize(x);
        CHECK(canonicalize(c1) == c1);
        REQUIRE(c1.size() == x.size());
        for (std::size_t i = 0; i < x.size(); ++i)
            CHECK(c1[i].alignment == x[i].alignment);
    }
}

TEST_CASE("permuting a run then canonicalizing restores the canonical form",
          "[circuit]") {
    Rng rng(11);
    const Configuration canon =
        make({{S, R, 1.0}, {S, C, 2e-6}, {S, L, 1e-5}, {P, R, 10.0}, {P, R, 90.0}});
    REQUIRE(is_canonical(canon));
    for (int trial = 0; trial < 50; ++trial) {
        Configuration shuffled = canon;
        std::vector<Component> head(shuffled.components.begin(),
                                    shuffled.components.begin() + 3);
        rng.shuffle(head);
        std::copy(head.begin(), head.end(), shuffled.components.begin());
        CHECK(canonicalize(shuffled) == canon);
        CHECK(equivalent(shuffled, canon));
    }
}

TEST_CASE("single component chains are canonical", "[circuit]") {
    CHECK(is_canonical(make({{S, R, 1.0}})));
    CHECK_FALSE(is_canonical(make({{P, C, 0.1}, {P, R, 0.5}})));
}

TEST_CASE("equivalent distinguishes alignment and compares bins when present",
          "[circuit]") {
    CHECK_FALSE(equivalent(make({{S, R, 1.0}}), make({{P, R, 1.0}})));
    CHECK(equivalent(make({{S, R, 1.0}}), make({{S, R, 1.0}})));

    Component a{S, R, 1.0, 2};
    Component b{S, R, 1.0000001, 2};  // same bin, slightly different value
    CHECK(equivalent(make({a}), make({b})));
    b.value_bin = 3;
    CHECK_FALSE(equivalent(make({a}), make({b})));
}

TEST_CASE("empty configurations are rejected", "[circuit]") {
    const Configuration empty;
    CHECK_THROWS_AS(canonicalize(empty), InvalidInput);
    CHECK_THROWS_AS(is_canonical(empty), InvalidInput);
    CHECK_THROWS_AS(equivalent(empty, make({{S, R, 1.0}})), InvalidInput);
}

TEST_CASE("literal parsing handles SI suffixes and value forms", "[circuit]") {
    const Configuration fig = parse_configuration("P:C:1m;S:R:1;S:L:0.5u");
    REQUIRE(fig.size() == 3);
    CHECK(fig[0].alignment == P);
    CHECK(fig[0].type == C);
    CHECK(fig[0].value == Catch::Approx(1e-3));
    CHECK(fig[1].type == R);
    CHECK(fig[1].value == 1.0);
    CHECK(fig[2].type == L);
    CHECK(fig[2].value == Catch::Approx(0.5e-6));

    CHECK(parse_component("S:R:1e3").value == 1000.0);
    CHECK(parse_component("S:R:2k").value == 2000.0);
    CHECK(parse_component("P:L:3n").value == Catch::Approx(3e-9));
    CHECK(parse_component("P:C:4p").value == Catch::Approx(4e-12));
    CHECK(parse_component("S:R:5M").value == 5e6);
    CHECK(parse_component("S:R:6G").value == 6e9);
}

TEST_CASE("literal parsing rejects malformed tokens with a diagnostic", "[circuit]") {
    CHECK_THROWS_AS(parse_configuration(""), InvalidInput);
    CHECK_THROWS_AS(parse_component("X:R:1"), InvalidInput);
    CHECK_THROWS_AS(parse_component("S:Q:1"), InvalidInput);
    CHECK_THROWS_AS(parse_component("S:R:"), InvalidInput);
    CHECK_THROWS_AS(parse_component("S:R:abc"), InvalidInput);
    CHECK_THROWS_AS(parse_component("S:R:-1"), InvalidInput);
    CHECK_THROWS_AS(parse_component("S:R:0"), InvalidInput);
    CHECK_THROWS_AS(parse_component("SR1"), InvalidInput);
    CHECK_THROWS_AS(parse_component("S:R:m"), InvalidInput);
    CHECK_THROWS_AS(parse_configuration("S:R:1;;P:C:1"), InvalidInput);

    try {
        parse_component("S:Q:1");
        FAIL("expected InvalidInput");
    } catch (const InvalidInput& e) {
        CHECK(std::string(e.what()).find("S:Q:1") != std::string::npos);
    }
}

TEST_CASE("format/parse round trips exact values", "[circuit]") {
    Rng rng(3);
    for (int trial = 0; trial < 100; ++trial) {
        Configuration x;
        const int n = 1 + rng.index(5);
        for (int i = 0; i < n; ++i) {
            x.components.push_back(
                Component{rng.coin() ? S : P, static_cast<ComponentType>(rng.index(3)),
                          std::exp(rng.normal() * 8.0)});
        }
        const Configuration back = parse_configuration(format_configuration(x));
        REQUIRE(back.size() == x.size());
        for (std::size_t i = 0; i < x.size(); ++i) {
            CHECK(back[i].alignment == x[i].alignment);
            CHECK(back[i].type == x[i].type);
            CHECK(back[i].value == x[i].value);  // %.17g is lossless for double
        }
    }
}

TEST_CASE("canonical_key separates by bin when available, by value otherwise",
          "[circuit]") {
    const Configuration a = make({{S, R, 1.0}});
    const Configuration b = make({{S, R, 2.0}});
    CHECK(canonical_key(a) != canonical_key(b));

    Configuration c = a, d = a;
    c[0].value_bin = 1;
    d[0].value_bin = 1;
    d[0].value = 1.5;  // same bin dominates the key
    CHECK(canonical_key(c) == canonical_key(d));

    // equivalent configurations share a key
    const Configuration e = make({{P, R, 0.5}, {P, C, 0.1}, {P, R, 0.05}});
    CHECK(canonical_key(e) == canonical_key(canonicalize(e)));
}
