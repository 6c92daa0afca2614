#pragma once

// Converter parameters and the validation rules shared by every module.

#include "fcml/schedule.hpp"

#include <cmath>
#include <cstdint>
#include <sstream>
#include <stdexcept>
#include <string>
#include <variant>

namespace fcml {

/// Raised when a parameter set violates one of its invariants.
class ParamError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Largest supported level count: switch states are packed into 64 bits.
inline constexpr int kMaxLevels = 65;

/// Stiff output voltage following a time profile. `tracking` replaces the
/// profile with d*·V_in − R_s·I_nom from the duty script, refreshed at every
/// carrier valley.
struct IdealSink {
    PiecewiseLinear voltage = PiecewiseLinear::constant(0.0);
    bool tracking = false;
};

/// Resistor in parallel with a capacitor at the output node.
struct ParallelRC {
    double resistance = 0.0;
    double capacitance = 0.0;
};

using Load = std::variant<IdealSink, ParallelRC>;

struct ConverterParams {
    int level_count = 6;
    double inductance = 4.4e-6;
    double flying_capacitance = 8.8e-6;
    double switch_output_capacitance = 100e-12;
    double input_voltage = 400.0;
    double dead_time = 100e-9;
    double zvs_current = 1.0;
    double adjacency_threshold = 0.04;
    double freq_min = 70e3;
    double freq_max = 230e3;
    double series_resistance = 0.05;
    Load load = IdealSink{PiecewiseLinear::constant(0.0), true};

    int switch_count() const { return level_count - 1; }
    int flying_cap_count() const { return level_count - 2; }
};

/// Duty quantization step d_u = 1/(N−1).
inline double quantization_step(const ConverterParams& p) {
    return 1.0 / static_cast<double>(p.level_count - 1);
}

/// Nominal voltage of flying capacitor k (1-based), k·V_in/(N−1).
inline double nominal_cap_voltage(const ConverterParams& p, int k) {
    return p.input_voltage * static_cast<double>(k) / static_cast<double>(p.level_count - 1);
}

namespace detail {

inline bool positive_finite(double x) { return std::isfinite(x) && x > 0.0; }

template <typename... Args>
[[noreturn]] inline void fail(Args&&... parts) {
    std::ostringstream oss;
    (oss << ... << parts);
    throw ParamError(oss.str());
}

}  // namespace detail

/// Returns `p` unchanged when every invariant holds; otherwise throws a
/// ParamError naming the first violated invariant.
inline ConverterParams validate(const ConverterParams& p) {
    using detail::fail;
    using detail::positive_finite;

    if (p.level_count < 3) fail("level_count must be >= 3 (got ", p.level_count, ")");
    if (p.level_count > kMaxLevels) fail("level_count must be <= ", kMaxLevels, " (got ", p.level_count, ")");
    if (!positive_finite(p.inductance)) fail("inductance must be > 0");
    if (!positive_finite(p.flying_capacitance)) fail("flying_capacitance must be > 0");
    if (!std::isfinite(p.switch_output_capacitance) || p.switch_output_capacitance < 0.0)
        fail("switch_output_capacitance must be >= 0");
    if (!positive_finite(p.input_voltage)) fail("input_voltage must be > 0");
    if (!positive_finite(p.dead_time)) fail("dead_time must be > 0");
    if (!positive_finite(p.zvs_current)) fail("zvs_current must be > 0");

    const double half_step = 0.5 * quantization_step(p);
    if (!positive_finite(p.adjacency_threshold) || !(p.adjacency_threshold < half_step))
        fail("adjacency_threshold must lie in (0, d_u/2) = (0, ", half_step, ") (got ",
             p.adjacency_threshold, ")");

    if (!positive_finite(p.freq_min)) fail("freq_min must be > 0");
    if (!positive_finite(p.freq_max)) fail("freq_max must be > 0");
    if (!(p.freq_min <= p.freq_max)) fail("freq_min must be <= freq_max");
    if (!std::isfinite(p.series_resistance) || p.series_resistance < 0.0)
        fail("series_resistance must be >= 0");

    if (const auto* sink = std::get_if<IdealSink>(&p.load)) {
        if (!sink->tracking)
            for (const auto& [t, v] : sink->voltage.points())
                if (!std::isfinite(t) || !std::isfinite(v) || v < 0.0) fail("sink voltage must be finite and >= 0");
    } else {
        const auto& rc = std::get<ParallelRC>(p.load);
        if (!positive_finite(rc.resistance)) fail("load resistance must be > 0");
        if (!positive_finite(rc.capacitance)) fail("load capacitance must be > 0");
    }
    return p;
}

}  // namespace fcml
