#include "fcml/zvs_scheduler.hpp"

#include <catch_amalgamated.hpp>

#include <cmath>

using namespace fcml;
using Catch::Approx;

namespace {

ConverterParams baseline() {
    ConverterParams p;
    p.adjacency_threshold = 0.04;
    return p;
}

DutyFrame frame(double d, const ConverterParams& p, ModePolicy policy = ModePolicy::sapwm_enabled) {
    return make_duty_frame(d, p, policy);
}

}  // namespace

TEST_CASE("PSPWM law examples", "[scheduler]") {
    const ConverterParams p = baseline();

    // (80 − 40)·0.1 / (2·4.4µ·4)
    auto c = pspwm_frequency(frame(0.1, p), 40.0, 3.0, p);
    CHECK(c.f_star == Approx(40.0 * 0.1 / (2 * 4.4e-6 * 4)).epsilon(1e-12));
    CHECK(c.f_star == Approx(113.64e3).epsilon(1e-3));
    CHECK_FALSE(c.clamped_low);
    CHECK(c.f_applied == c.f_star);

    c = pspwm_frequency(frame(0.2, p), 80.0, 3.0, p);
    CHECK(c.f_star == 0.0);
    CHECK(c.f_applied == 70e3);
    CHECK(c.clamped_low);

    c = pspwm_frequency(frame(0.58, p), 232.0, 3.0, p);
    CHECK(c.f_star == Approx(40.9e3).epsilon(1e-3));
    CHECK(c.clamped_low);
    CHECK(c.f_applied == 70e3);
}

TEST_CASE("SAPWM law examples", "[scheduler]") {
    const ConverterParams p = baseline();
    const DutyFrame f = frame(0.58, p);
    REQUIRE(f.mode == Mode::sapwm);
    REQUIRE(f.d_mod == Approx(0.49));
    const auto c = sapwm_frequency(f, 232.0, 3.0, p);
    CHECK(c.f_star == Approx(std::abs((160.0 - 232.0) * 0.09) / 3.52e-5).epsilon(1e-12));
    CHECK(c.f_star == Approx(184.1e3).epsilon(1e-3));
    CHECK(c.mode == Mode::sapwm);

    for (double level : {0.2, 0.4, 0.6, 0.8}) {
        const DutyFrame g = frame(level, p);
        const double expected = p.input_voltage * 0.04 / (4 * p.inductance * 4.0);
        CHECK(sapwm_frequency(g, level * p.input_voltage, 3.0, p).f_star == Approx(expected));
        CHECK(pspwm_frequency(g, level * p.input_voltage, 3.0, p).f_star == Approx(0.0).margin(1e-6));
    }

    CHECK(sapwm_frequency(f, 232.0, 1e9, p).f_star < 1.0);
}

TEST_CASE("clamping", "[scheduler]") {
    const ConverterParams p = baseline();
    auto c = clamp_frequency(500e3, Mode::pspwm, p);
    CHECK(c.clamped_high);
    CHECK(c.f_applied == 230e3);
    c = clamp_frequency(100e3, Mode::sapwm, p);
    CHECK_FALSE(c.clamped_low);
    CHECK_FALSE(c.clamped_high);
    CHECK(c.f_applied == 100e3);
    for (double f : {0.0, 1.0, 69999.0, 70e3, 150e3, 230e3, 1e7}) {
        c = clamp_frequency(f, Mode::pspwm, p);
        CHECK(c.f_applied >= p.freq_min);
        CHECK(c.f_applied <= p.freq_max);
        CHECK(c.clamped_low == (f < p.freq_min));
    }
}

TEST_CASE("PSPWM law monotonicity", "[scheduler][property]") {
    const ConverterParams p = baseline();
    // Increasing in the distance from the lower level inside the lower half
    // of each step, decreasing in |i_L|.
    for (int level = 0; level < 5; ++level) {
        double prev = -1.0;
        for (int j = 1; j <= 40; ++j) {
            const double d = 0.2 * level + 0.1 * j / 40.0 * 0.999;
            const double f = pspwm_frequency(frame(d, p, ModePolicy::pspwm_only), d * 400.0, 3.0, p).f_star;
            CHECK(f > prev);
            prev = f;
        }
    }
    for (double d : {0.1, 0.33, 0.5, 0.77}) {
        double prev = INFINITY;
        for (double i = 0.0; i <= 20.0; i += 0.5) {
            const double f = pspwm_frequency(frame(d, p, ModePolicy::pspwm_only), d * 400.0, i, p).f_star;
            CHECK(f < prev);
            prev = f;
        }
    }
}

TEST_CASE("inside the SAPWM band the SAPWM law never falls below the PSPWM law", "[scheduler][property]") {
    const ConverterParams p = baseline();
    for (int i = 0; i <= 4000; ++i) {
        const double d = i / 4000.0;
        const DutyFrame f = frame(d, p);
        if (f.mode != Mode::sapwm) continue;
        INFO("d=" << d);
        CHECK(sapwm_frequency(f, d * 400.0, 3.0, p).f_star >= pspwm_frequency(f, d * 400.0, 3.0, p).f_star);
    }
}

TEST_CASE("charge requirement", "[scheduler]") {
    ConverterParams p = baseline();
    const auto ps = zvs_charge_requirement(Mode::pspwm, p);
    const auto sa = zvs_charge_requirement(Mode::sapwm, p);
    CHECK(ps.q_required == Approx(16e-9).epsilon(1e-12));
    CHECK(ps.min_dead_time == Approx(16e-9).epsilon(1e-12));
    CHECK(sa.q_required == Approx(32e-9).epsilon(1e-12));
    CHECK(sa.min_dead_time == Approx(32e-9).epsilon(1e-12));
    CHECK(sa.q_required == 2.0 * ps.q_required);
    CHECK(ps.feasible);
    CHECK(sa.feasible);

    p.switch_output_capacitance = 0.0;
    CHECK(zvs_charge_requirement(Mode::pspwm, p).q_required == 0.0);
    CHECK(zvs_charge_requirement(Mode::sapwm, p).feasible);

    p = baseline();
    p.dead_time = 20e-9;
    CHECK(zvs_charge_requirement(Mode::pspwm, p).feasible);
    CHECK_FALSE(zvs_charge_requirement(Mode::sapwm, p).feasible);
}

TEST_CASE("automatic adjacency threshold", "[scheduler]") {
    const ConverterParams p = baseline();
    const double alpha = solve_adjacency_threshold(p, 3.0);
    CHECK(alpha > 0.0);
    CHECK(alpha < 0.1);
    // Independent closed form near the first level: V_in·δ·(d_u − δ) / (2L(|i| + I_ZVS)) = f_min.
    const double k = p.freq_min * 2.0 * p.inductance * 4.0 / p.input_voltage;
    const double closed = 0.5 * (0.2 - std::sqrt(0.04 - 4.0 * k));
    CHECK(alpha == Approx(closed).margin(2e-9));
    CHECK(alpha >= closed);

    ConverterParams tight = p;
    tight.freq_min = 200e3;
    CHECK_THROWS_AS(solve_adjacency_threshold(tight, 3.0), ParamError);
}
