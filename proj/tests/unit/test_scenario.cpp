#include "fcml/io.hpp"
#include "fcml/scenario.hpp"
#include "fcml/simulation.hpp"

#include <catch_amalgamated.hpp>

#include <sstream>

using namespace fcml;
using Catch::Matchers::ContainsSubstring;

namespace {

const char* kBaseline = R"(# Baseline converter
level_count = 6
inductance_h = 4.4e-6
flying_capacitance_f = 8.8e-6
switch_output_capacitance_f = 100e-12
input_voltage_v = 400
dead_time_s = 100e-9
zvs_current_a = 1
adjacency_threshold = auto
freq_min_hz = 70e3
freq_max_hz = 230e3
series_resistance_ohm = 0.05
load_type = sink
load_value = track
mode_policy = sapwm_enabled
source_mode = ideal_sources
schedule_kind = duty
schedule_points = 0:0.05, 1e-3:0.95   # ramp
duration_s = 1e-3
trace_decimation = 4
)";

std::string replace_line(std::string text, const std::string& key, const std::string& line) {
    const auto pos = text.find(key + " =");
    REQUIRE(pos != std::string::npos);
    const auto end = text.find('\n', pos);
    return text.replace(pos, end - pos, line);
}

}  // namespace

TEST_CASE("baseline config parses", "[scenario]") {
    const Scenario s = parse_scenario(std::string(kBaseline));
    CHECK(s.params.level_count == 6);
    CHECK(s.params.inductance == 4.4e-6);
    CHECK(s.auto_adjacency);
    CHECK(std::get<IdealSink>(s.params.load).tracking);
    CHECK(s.schedule.points().size() == 2);
    CHECK(s.schedule(0.5e-3) == Catch::Approx(0.5));
    CHECK(s.trace_decimation == 4);
    const ConverterParams p = resolved_params(s);
    CHECK(p.adjacency_threshold == Catch::Approx(0.038032).epsilon(1e-4));
}

TEST_CASE("parse errors carry line numbers", "[scenario]") {
    const std::string good(kBaseline);
    CHECK_THROWS_WITH(parse_scenario(replace_line(good, "inductance_h", "inductance_h = 4.4uH")),
                      ContainsSubstring("line 3") && ContainsSubstring("inductance_h"));
    CHECK_THROWS_WITH(parse_scenario(good + "bogus_key = 1\n"), ContainsSubstring("line 21") && ContainsSubstring("unknown"));
    CHECK_THROWS_WITH(parse_scenario(good + "level_count = 5\n"), ContainsSubstring("duplicate"));
    CHECK_THROWS_WITH(parse_scenario(good + "no equals sign\n"), ContainsSubstring("line 21"));
    CHECK_THROWS_WITH(parse_scenario(replace_line(good, "mode_policy", "mode_policy = sometimes")),
                      ContainsSubstring("line 15"));
    CHECK_THROWS_WITH(parse_scenario(replace_line(good, "schedule_points", "schedule_points = 0:0.5, 0:0.6")),
                      ContainsSubstring("line 18"));
    CHECK_THROWS_WITH(parse_scenario(replace_line(good, "load_value", "load_value = 0:20, banana")),
                      ContainsSubstring("load_value"));
}

TEST_CASE("invalid scenarios are rejected", "[scenario]") {
    const std::string good(kBaseline);
    CHECK_THROWS_AS(parse_scenario(replace_line(good, "level_count", "level_count = 2")), ConfigError);
    CHECK_THROWS_AS(parse_scenario(replace_line(good, "adjacency_threshold", "adjacency_threshold = 0.15")),
                    ConfigError);
    CHECK_THROWS_AS(parse_scenario(replace_line(good, "schedule_points", "schedule_points = 0:1.2")), ConfigError);
    CHECK_THROWS_AS(parse_scenario(replace_line(good, "duration_s", "duration_s = 1e-4")), ConfigError);
    CHECK_THROWS_AS(parse_scenario(replace_line(good, "schedule_kind", "schedule_kind = current")), ConfigError);
    CHECK_THROWS_AS(parse_scenario(replace_line(good, "trace_decimation", "trace_decimation = 0")), ConfigError);
}

TEST_CASE("configs round-trip through the canonical form", "[scenario][property]") {
    const std::string good(kBaseline);
    const std::vector<std::string> variants{
        good,
        replace_line(good, "adjacency_threshold", "adjacency_threshold = 0.0312"),
        replace_line(replace_line(good, "load_type", "load_type = rc"), "load_value", "load_value = 40, 10e-6"),
        replace_line(replace_line(good, "schedule_kind", "schedule_kind = current"), "load_value",
                     "load_value = 0:20, 1e-3:380"),
        replace_line(replace_line(good, "load_value", "load_value = 123.456"), "mode_policy",
                     "mode_policy = pspwm_only"),
        good + "kp = 0.2\nki = auto\ninitial_current_a = -1.5\nnominal_current_a = 2.5\nseed = 42\n",
    };
    for (const auto& text : variants) {
        const Scenario s = parse_scenario(text);
        const std::string emitted = emit_scenario(s);
        const Scenario back = parse_scenario(emitted);
        INFO(emitted);
        CHECK(back == s);
        CHECK(emit_scenario(back) == emitted);
    }
}

TEST_CASE("identical scenarios give byte-identical output", "[scenario][sim]") {
    Scenario s = parse_scenario(std::string(kBaseline));
    s.duration = 0.3e-3;
    s.schedule = PiecewiseLinear({{0.0, 0.15}, {0.3e-3, 0.65}});
    auto render = [&] {
        const RunResult r = simulate(s);
        std::ostringstream o;
        write_trace_csv(o, r.trace, s.trace_decimation);
        write_events_csv(o, r.events);
        return o.str();
    };
    const std::string a = render();
    CHECK(a == render());
    CHECK(a.size() > 1000);
}

TEST_CASE("numbers use nine significant digits", "[scenario][io]") {
    CHECK(fmt_num(1.0) == "1.00000000e+00");
    CHECK(fmt_num(-113636.3636) == "-1.13636364e+05");
    CHECK(fmt_num(0.0) == "0.00000000e+00");
}
