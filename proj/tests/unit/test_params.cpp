#include "fcml/params.hpp"
#include "fcml/switch_set.hpp"

#include <catch_amalgamated.hpp>

#include <cmath>

using namespace fcml;
using Catch::Matchers::ContainsSubstring;

namespace {

ConverterParams baseline() { return ConverterParams{}; }

}  // namespace

TEST_CASE("Baseline parameters are accepted unchanged", "[params]") {
    const ConverterParams p = baseline();
    REQUIRE(p.level_count == 6);
    REQUIRE(p.inductance == 4.4e-6);
    REQUIRE(p.flying_capacitance == 8.8e-6);
    REQUIRE(p.input_voltage == 400.0);
    REQUIRE(p.freq_min == 70e3);
    REQUIRE(p.freq_max == 230e3);
    const ConverterParams v = validate(p);
    CHECK(v.level_count == p.level_count);
    CHECK(v.adjacency_threshold == p.adjacency_threshold);
}

TEST_CASE("two levels are rejected", "[params]") {
    ConverterParams p = baseline();
    p.level_count = 2;
    REQUIRE_THROWS_WITH(validate(p), ContainsSubstring("level_count"));
}

TEST_CASE("alpha at or beyond half a level step is rejected", "[params]") {
    ConverterParams p = baseline();
    p.adjacency_threshold = 0.15;
    REQUIRE_THROWS_WITH(validate(p), ContainsSubstring("adjacency_threshold"));
    p.adjacency_threshold = 0.1;
    REQUIRE_THROWS_AS(validate(p), ParamError);
    p.adjacency_threshold = 0.0999;
    REQUIRE_NOTHROW(validate(p));
}

TEST_CASE("validate names the first failing invariant", "[params]") {
    ConverterParams p = baseline();
    p.inductance = 0.0;
    p.freq_min = 300e3;
    REQUIRE_THROWS_WITH(validate(p), ContainsSubstring("inductance"));

    p = baseline();
    p.freq_min = 300e3;
    REQUIRE_THROWS_WITH(validate(p), ContainsSubstring("freq"));

    p = baseline();
    p.series_resistance = -1.0;
    REQUIRE_THROWS_AS(validate(p), ParamError);

    p = baseline();
    p.series_resistance = 0.0;
    REQUIRE_NOTHROW(validate(p));

    p = baseline();
    p.load = ParallelRC{0.0, 1e-6};
    REQUIRE_THROWS_AS(validate(p), ParamError);
}

TEST_CASE("validate is idempotent", "[params][property]") {
    for (int n : {3, 4, 6, 9, 17}) {
        ConverterParams p = baseline();
        p.level_count = n;
        p.adjacency_threshold = 0.4 / (n - 1);
        const ConverterParams once = validate(p);
        const ConverterParams twice = validate(once);
        CHECK(twice.level_count == once.level_count);
        CHECK(twice.adjacency_threshold == once.adjacency_threshold);
        CHECK(twice.inductance == once.inductance);
    }
}

TEST_CASE("quantization step", "[params]") {
    ConverterParams p = baseline();
    CHECK(quantization_step(p) == Catch::Approx(0.2));
    p.level_count = 3;
    CHECK(quantization_step(p) == Catch::Approx(0.5));
    p.level_count = 11;
    CHECK(quantization_step(p) == Catch::Approx(0.1));
    // Exact except where 1/(N−1) itself rounds (N = 50), which is one ulp off.
    for (int n = 3; n <= kMaxLevels; ++n) {
        p.level_count = n;
        const double product = quantization_step(p) * (n - 1);
        INFO("N=" << n);
        if (n == 50) CHECK(product == std::nextafter(1.0, 0.0));
        else CHECK(product == 1.0);
    }
}

TEST_CASE("nominal flying-capacitor voltages", "[params]") {
    const ConverterParams p = baseline();
    REQUIRE(p.flying_cap_count() == 4);
    REQUIRE(p.switch_count() == 5);
    for (int k = 1; k <= 4; ++k) CHECK(nominal_cap_voltage(p, k) == Catch::Approx(80.0 * k));
}

TEST_CASE("switch sets", "[params][switch_set]") {
    const SwitchSet s = SwitchSet::from_list({1, 1, 0, 0, 0});
    CHECK(s.popcount() == 2);
    CHECK(s.to_string() == "11000");
    CHECK(s.rotated_up() == SwitchSet::from_list({0, 1, 1, 0, 0}));
    CHECK(SwitchSet::from_list({0, 0, 0, 0, 1}).rotated_up() == SwitchSet::from_list({1, 0, 0, 0, 0}));
    CHECK(SwitchSet::from_list({1, 0, 0, 0, 1}).circularly_contiguous());
    CHECK_FALSE(SwitchSet::from_list({1, 0, 1, 0, 0}).circularly_contiguous());
    CHECK(SwitchSet::all_on(5).full());
    CHECK(SwitchSet(5).none());
}
