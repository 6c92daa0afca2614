#pragma once

// Variable switching-frequency laws for ZVS and the dead-time charge check.

#include "fcml/modulator.hpp"
#include "fcml/params.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace fcml {

struct FrequencyCommand {
    double f_star = 0.0;     // unclamped magnitude
    double f_applied = 0.0;  // clamped to [freq_min, freq_max]
    bool clamped_low = false;
    bool clamped_high = false;
    Mode mode = Mode::pspwm;
};

inline FrequencyCommand clamp_frequency(double f_star, Mode mode, const ConverterParams& p) {
    FrequencyCommand c;
    c.f_star = f_star;
    c.mode = mode;
    c.clamped_low = f_star < p.freq_min;
    c.clamped_high = f_star > p.freq_max;
    c.f_applied = std::clamp(f_star, p.freq_min, p.freq_max);
    return c;
}

/// PSPWM law: the frequency at which the valley (or peak, for reverse flow)
/// current just reaches ∓I_ZVS, using the upper of the two adjacent levels.
inline FrequencyCommand pspwm_frequency(const DutyFrame& d, double v_out, double i_l, const ConverterParams& p) {
    const double level_error = p.input_voltage * (d.d_floor + d.d_u) - v_out;
    const double on_fraction = d.d_star - d.d_floor;
    const double f = std::abs(level_error * on_fraction) /
                     (2.0 * p.inductance * (std::abs(i_l) + p.zvs_current));
    return clamp_frequency(f, Mode::pspwm, p);
}

/// SAPWM law, evaluated on the modified duty. Returns the magnitude of the
/// expression; its signed value is negative because the low skipped level
/// sits below v_out.
inline FrequencyCommand sapwm_frequency(const DutyFrame& d, double v_out, double i_l, const ConverterParams& p) {
    const double level_error = p.input_voltage * (d.d_round - d.d_u) - v_out;
    const double on_fraction = d.d_mod - d.d_round + d.d_u;
    const double f = std::abs(level_error * on_fraction) /
                     (2.0 * p.inductance * (std::abs(i_l) + p.zvs_current));
    return clamp_frequency(f, Mode::sapwm, p);
}

/// Dispatches on the frame's mode.
inline FrequencyCommand schedule_frequency(const DutyFrame& d, double v_out, double i_l, const ConverterParams& p) {
    return d.mode == Mode::sapwm ? sapwm_frequency(d, v_out, i_l, p) : pspwm_frequency(d, v_out, i_l, p);
}

struct ChargeRequirement {
    double q_required = 0.0;       // coulombs
    double min_dead_time = 0.0;    // q_required / I_ZVS
    double equivalent_capacitance = 0.0;
    bool feasible = false;         // min_dead_time ≤ t_d
};

/// Charge the inductor must move during one dead time: one switch set per
/// commutation under PSPWM, two adjacent sets under SAPWM.
inline ChargeRequirement zvs_charge_requirement(Mode mode, const ConverterParams& p) {
    const double sets = mode == Mode::sapwm ? 2.0 : 1.0;
    ChargeRequirement r;
    r.equivalent_capacitance = 2.0 * sets * p.switch_output_capacitance;
    r.q_required = r.equivalent_capacitance * quantization_step(p) * p.input_voltage;
    r.min_dead_time = r.q_required / p.zvs_current;
    r.feasible = r.min_dead_time <= p.dead_time;
    return r;
}

/// Distance from a quantized level at which the PSPWM law, with
/// v_out = d*·V_in and the given current, falls to freq_min. Bisection; the
/// returned value is the upper bracket so the law is ≥ freq_min there.
inline double solve_adjacency_threshold(const ConverterParams& p, double nominal_current, double tol = 1e-9) {
    const double d_u = quantization_step(p);
    auto law = [&](double delta) {
        // Just above the first interior level: d_f = d_u, d* = d_u + delta.
        DutyFrame f;
        f.d_u = d_u;
        f.d_floor = d_u;
        f.d_star = d_u + delta;
        return pspwm_frequency(f, f.d_star * p.input_voltage, nominal_current, p).f_star;
    };
    double lo = 0.0;
    double hi = 0.5 * d_u;
    if (law(hi) < p.freq_min)
        throw ParamError("no adjacency threshold below d_u/2 reaches freq_min at this current");
    while (hi - lo > tol) {
        const double mid = 0.5 * (lo + hi);
        (law(mid) < p.freq_min ? lo : hi) = mid;
    }
    return hi;
}

}  // namespace fcml
