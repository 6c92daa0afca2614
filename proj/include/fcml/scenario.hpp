#pragma once

// Scenario description and its flat `key = value` configuration format.

#include "fcml/control.hpp"
#include "fcml/modulator.hpp"
#include "fcml/params.hpp"
#include "fcml/plant.hpp"
#include "fcml/zvs_scheduler.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <istream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace fcml {

class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct Scenario {
    ConverterParams params;
    bool auto_adjacency = true;  // α solved at start from the nominal current
    ModePolicy mode_policy = ModePolicy::sapwm_enabled;
    SourceMode source_mode = SourceMode::ideal_sources;
    ScheduleKind schedule_kind = ScheduleKind::duty;
    PiecewiseLinear schedule = PiecewiseLinear::constant(0.5);
    double duration = 1e-3;
    double nominal_current = 3.0;
    std::optional<double> initial_current;
    std::optional<double> kp;
    std::optional<double> ki;
    long long seed = 0;
    int trace_decimation = 1;

    bool operator==(const Scenario& o) const;
};

inline bool operator==(const IdealSink& a, const IdealSink& b) {
    return a.tracking == b.tracking && (a.tracking || a.voltage == b.voltage);
}
inline bool operator==(const ParallelRC& a, const ParallelRC& b) {
    return a.resistance == b.resistance && a.capacitance == b.capacitance;
}

inline bool Scenario::operator==(const Scenario& o) const {
    const auto& a = params;
    const auto& b = o.params;
    const bool alpha_eq = auto_adjacency ? o.auto_adjacency
                                         : (!o.auto_adjacency && a.adjacency_threshold == b.adjacency_threshold);
    return a.level_count == b.level_count && a.inductance == b.inductance &&
           a.flying_capacitance == b.flying_capacitance &&
           a.switch_output_capacitance == b.switch_output_capacitance && a.input_voltage == b.input_voltage &&
           a.dead_time == b.dead_time && a.zvs_current == b.zvs_current && alpha_eq && a.freq_min == b.freq_min &&
           a.freq_max == b.freq_max && a.series_resistance == b.series_resistance && a.load == b.load &&
           mode_policy == o.mode_policy && source_mode == o.source_mode && schedule_kind == o.schedule_kind &&
           schedule == o.schedule && duration == o.duration && nominal_current == o.nominal_current &&
           initial_current == o.initial_current && kp == o.kp && ki == o.ki && seed == o.seed &&
           trace_decimation == o.trace_decimation;
}

/// Parameters with α resolved (solved when `auto`) and validated.
inline ConverterParams resolved_params(const Scenario& s) {
    ConverterParams p = s.params;
    if (s.auto_adjacency) p.adjacency_threshold = solve_adjacency_threshold(p, s.nominal_current);
    return validate(p);
}

inline PiGains resolved_gains(const Scenario& s, const ConverterParams& p) {
    PiGains g = default_pi_gains(p);
    if (s.kp) g.kp = *s.kp;
    if (s.ki) g.ki = *s.ki;
    return g;
}

/// Throws ConfigError when the scenario cannot be run.
inline void validate_scenario(const Scenario& s) {
    ConverterParams p;
    try {
        p = resolved_params(s);
    } catch (const ParamError& e) {
        throw ConfigError(std::string("invalid parameters: ") + e.what());
    }
    for (const auto& [t, v] : s.schedule.points()) {
        if (!std::isfinite(t) || !std::isfinite(v)) throw ConfigError("schedule points must be finite");
        if (s.schedule_kind == ScheduleKind::duty && (v < 0.0 || v > 1.0))
            throw ConfigError("duty schedule values must lie in [0, 1]");
    }
    if (!(s.duration > 10.0 / p.freq_min))
        throw ConfigError("duration_s must exceed 10 switching periods at freq_min");
    if (!(s.nominal_current >= 0.0) || !std::isfinite(s.nominal_current))
        throw ConfigError("nominal_current_a must be finite and >= 0");
    if (s.trace_decimation < 1) throw ConfigError("trace_decimation must be >= 1");
    if (const auto* sink = std::get_if<IdealSink>(&p.load); sink && sink->tracking &&
                                                           s.schedule_kind != ScheduleKind::duty)
        throw ConfigError("a tracking sink needs a duty schedule");
}

namespace detail {

inline std::string trim(std::string_view sv) {
    const auto b = sv.find_first_not_of(" \t\r");
    if (b == std::string_view::npos) return {};
    const auto e = sv.find_last_not_of(" \t\r");
    return std::string(sv.substr(b, e - b + 1));
}

inline std::vector<std::string> split(std::string_view sv, char sep) {
    std::vector<std::string> out;
    std::size_t start = 0;
    while (true) {
        const auto pos = sv.find(sep, start);
        out.push_back(trim(sv.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start)));
        if (pos == std::string_view::npos) break;
        start = pos + 1;
    }
    return out;
}

inline double parse_number(const std::string& s) {
    double v = 0.0;
    const char* first = s.data();
    const char* last = s.data() + s.size();
    if (!s.empty() && *first == '+') ++first;
    auto [ptr, ec] = std::from_chars(first, last, v);
    if (ec != std::errc{} || ptr != last || s.empty()) throw std::invalid_argument("expected a number, got '" + s + "'");
    return v;
}

inline long long parse_integer(const std::string& s) {
    long long v = 0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || ptr != s.data() + s.size() || s.empty())
        throw std::invalid_argument("expected an integer, got '" + s + "'");
    return v;
}

inline std::string exact(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

/// "t:v, t:v, ..." into a piecewise-linear profile.
inline PiecewiseLinear parse_points(const std::string& text) {
    std::vector<std::pair<double, double>> pts;
    for (const auto& item : split(text, ',')) {
        const auto tv = split(item, ':');
        if (tv.size() != 2) throw std::invalid_argument("points are 'time:value' pairs");
        pts.emplace_back(parse_number(tv[0]), parse_number(tv[1]));
    }
    return PiecewiseLinear(std::move(pts));
}

inline std::string emit_points(const PiecewiseLinear& f) {
    std::string out;
    for (const auto& [t, v] : f.points()) {
        if (!out.empty()) out += ", ";
        out += exact(t) + ':' + exact(v);
    }
    return out;
}

}  // namespace detail

/// Parses a scenario. Errors carry the 1-based line number.
inline Scenario parse_scenario(std::istream& in) {
    using namespace detail;
    Scenario s;
    std::string load_type = "sink";
    std::optional<std::string> load_value;
    int load_line = 0;
    std::set<std::string> seen;

    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        const std::string body = trim(line);
        if (body.empty()) continue;
        const auto eq = body.find('=');
        if (eq == std::string::npos)
            throw ConfigError("line " + std::to_string(lineno) + ": expected 'key = value'");
        const std::string key = trim(std::string_view(body).substr(0, eq));
        const std::string value = trim(std::string_view(body).substr(eq + 1));
        auto fail = [&](const std::string& why) -> ConfigError {
            return ConfigError("line " + std::to_string(lineno) + ": " + key + ": " + why);
        };
        if (!seen.insert(key).second) throw fail("duplicate key");
        if (value.empty()) throw fail("missing value");

        try {
            auto& p = s.params;
            if (key == "level_count") p.level_count = static_cast<int>(parse_integer(value));
            else if (key == "inductance_h") p.inductance = parse_number(value);
            else if (key == "flying_capacitance_f") p.flying_capacitance = parse_number(value);
            else if (key == "switch_output_capacitance_f") p.switch_output_capacitance = parse_number(value);
            else if (key == "input_voltage_v") p.input_voltage = parse_number(value);
            else if (key == "dead_time_s") p.dead_time = parse_number(value);
            else if (key == "zvs_current_a") p.zvs_current = parse_number(value);
            else if (key == "adjacency_threshold") {
                if (value == "auto") s.auto_adjacency = true;
                else {
                    s.auto_adjacency = false;
                    p.adjacency_threshold = parse_number(value);
                }
            } else if (key == "freq_min_hz") p.freq_min = parse_number(value);
            else if (key == "freq_max_hz") p.freq_max = parse_number(value);
            else if (key == "series_resistance_ohm") p.series_resistance = parse_number(value);
            else if (key == "load_type") {
                if (value != "sink" && value != "rc") throw std::invalid_argument("expected sink or rc");
                load_type = value;
            } else if (key == "load_value") {
                load_value = value;
                load_line = lineno;
            } else if (key == "mode_policy") {
                if (value == "pspwm_only") s.mode_policy = ModePolicy::pspwm_only;
                else if (value == "sapwm_enabled") s.mode_policy = ModePolicy::sapwm_enabled;
                else throw std::invalid_argument("expected pspwm_only or sapwm_enabled");
            } else if (key == "source_mode") {
                if (value == "ideal_sources") s.source_mode = SourceMode::ideal_sources;
                else if (value == "real_capacitors") s.source_mode = SourceMode::real_capacitors;
                else throw std::invalid_argument("expected ideal_sources or real_capacitors");
            } else if (key == "schedule_kind") {
                if (value == "duty") s.schedule_kind = ScheduleKind::duty;
                else if (value == "current") s.schedule_kind = ScheduleKind::current;
                else throw std::invalid_argument("expected duty or current");
            } else if (key == "schedule_points") s.schedule = parse_points(value);
            else if (key == "duration_s") s.duration = parse_number(value);
            else if (key == "trace_decimation") s.trace_decimation = static_cast<int>(parse_integer(value));
            else if (key == "nominal_current_a") s.nominal_current = parse_number(value);
            else if (key == "initial_current_a") s.initial_current = parse_number(value);
            else if (key == "kp") s.kp = value == "auto" ? std::nullopt : std::optional(parse_number(value));
            else if (key == "ki") s.ki = value == "auto" ? std::nullopt : std::optional(parse_number(value));
            else if (key == "seed") s.seed = parse_integer(value);
            else throw std::invalid_argument("unknown key");
        } catch (const ConfigError&) {
            throw;
        } catch (const std::exception& e) {
            throw fail(e.what());
        }
    }

    try {
        if (load_type == "sink") {
            IdealSink sink;
            if (!load_value || *load_value == "track") sink.tracking = true;
            else if (load_value->find(':') == std::string::npos) sink.voltage = PiecewiseLinear::constant(parse_number(*load_value));
            else sink.voltage = parse_points(*load_value);
            s.params.load = sink;
        } else {
            if (!load_value) throw std::invalid_argument("rc load needs 'load_value = <ohms>, <farads>'");
            const auto parts = split(*load_value, ',');
            if (parts.size() != 2) throw std::invalid_argument("rc load needs '<ohms>, <farads>'");
            s.params.load = ParallelRC{parse_number(parts[0]), parse_number(parts[1])};
        }
    } catch (const std::exception& e) {
        throw ConfigError("line " + std::to_string(load_line) + ": load_value: " + e.what());
    }
    validate_scenario(s);
    return s;
}

inline Scenario parse_scenario(const std::string& text) {
    std::istringstream in(text);
    return parse_scenario(in);
}

/// Canonical text form; parse_scenario(emit_scenario(s)) == s.
inline std::string emit_scenario(const Scenario& s) {
    using detail::exact;
    const auto& p = s.params;
    std::ostringstream o;
    o << "level_count = " << p.level_count << '\n'
      << "inductance_h = " << exact(p.inductance) << '\n'
      << "flying_capacitance_f = " << exact(p.flying_capacitance) << '\n'
      << "switch_output_capacitance_f = " << exact(p.switch_output_capacitance) << '\n'
      << "input_voltage_v = " << exact(p.input_voltage) << '\n'
      << "dead_time_s = " << exact(p.dead_time) << '\n'
      << "zvs_current_a = " << exact(p.zvs_current) << '\n'
      << "adjacency_threshold = " << (s.auto_adjacency ? std::string("auto") : exact(p.adjacency_threshold)) << '\n'
      << "freq_min_hz = " << exact(p.freq_min) << '\n'
      << "freq_max_hz = " << exact(p.freq_max) << '\n'
      << "series_resistance_ohm = " << exact(p.series_resistance) << '\n';
    if (const auto* sink = std::get_if<IdealSink>(&p.load)) {
        o << "load_type = sink\n"
          << "load_value = ";
        if (sink->tracking) o << "track";
        else if (sink->voltage.is_constant()) o << exact(sink->voltage(0.0));
        else o << detail::emit_points(sink->voltage);
        o << '\n';
    } else {
        const auto& rc = std::get<ParallelRC>(p.load);
        o << "load_type = rc\n"
          << "load_value = " << exact(rc.resistance) << ", " << exact(rc.capacitance) << '\n';
    }
    o << "mode_policy = " << (s.mode_policy == ModePolicy::pspwm_only ? "pspwm_only" : "sapwm_enabled") << '\n'
      << "source_mode = " << (s.source_mode == SourceMode::ideal_sources ? "ideal_sources" : "real_capacitors")
      << '\n'
      << "schedule_kind = " << (s.schedule_kind == ScheduleKind::duty ? "duty" : "current") << '\n'
      << "schedule_points = " << detail::emit_points(s.schedule) << '\n'
      << "duration_s = " << exact(s.duration) << '\n'
      << "trace_decimation = " << s.trace_decimation << '\n'
      << "nominal_current_a = " << exact(s.nominal_current) << '\n';
    if (s.initial_current) o << "initial_current_a = " << exact(*s.initial_current) << '\n';
    o << "kp = " << (s.kp ? exact(*s.kp) : std::string("auto")) << '\n'
      << "ki = " << (s.ki ? exact(*s.ki) : std::string("auto")) << '\n'
      << "seed = " << s.seed << '\n';
    return o.str();
}

}  // namespace fcml
