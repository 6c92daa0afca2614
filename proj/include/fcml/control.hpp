#pragma once

// Valley-sampled current loop. Everything computed here is written to the
// carrier bank's shadow registers and takes effect at the same valley.

#include "fcml/modulator.hpp"
#include "fcml/params.hpp"
#include "fcml/schedule.hpp"
#include "fcml/zvs_scheduler.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace fcml {

struct PiGains {
    double kp = 0.0;  // V/A
    double ki = 0.0;  // V/(A·s)
};

/// Pole-zero cancellation against the R_s–L plant with a closed-loop
/// bandwidth of freq_min/10.
inline PiGains default_pi_gains(const ConverterParams& p) {
    const double omega = 2.0 * std::numbers::pi * p.freq_min / 10.0;
    PiGains g;
    g.kp = omega * p.inductance;
    g.ki = omega * p.series_resistance;
    return g;
}

enum class ScheduleKind { duty, current };

struct ControllerState {
    ScheduleKind kind = ScheduleKind::duty;
    PiecewiseLinear script;  // d* or i_ref against time
    PiGains gains;
    double i_ref = 0.0;
    double integ = 0.0;
    double d_star_next = 0.0;
    double f_star_next = 0.0;
    bool saturated = false;
};

struct ValleyUpdate {
    double i_sample = 0.0;
    DutyFrame duty;
    FrequencyCommand freq;
};

/// Runs at a carrier-1 valley: samples i_L, produces d* (open-loop script or
/// PI with v_out feed-forward), quantizes, picks the mode and the frequency.
/// `dt` is the length of the period that just ended (0 on the first call).
inline ValleyUpdate sample_and_update(ControllerState& c, double i_sample, double v_out, double t, double dt,
                                      const ConverterParams& p, ModePolicy policy) {
    double d_star = 0.0;
    if (c.kind == ScheduleKind::duty) {
        d_star = std::clamp(c.script(t), 0.0, 1.0);
        c.saturated = false;
    } else {
        c.i_ref = c.script(t);
        const double err = c.i_ref - i_sample;
        const double lo = p.adjacency_threshold;
        const double hi = 1.0 - p.adjacency_threshold;
        const double candidate_integ = c.integ + c.gains.ki * err * dt;
        const double raw = (v_out + c.gains.kp * err + candidate_integ) / p.input_voltage;
        d_star = std::clamp(raw, lo, hi);
        c.saturated = raw != d_star;
        if (!c.saturated) c.integ = candidate_integ;
    }

    ValleyUpdate u;
    u.i_sample = i_sample;
    u.duty = make_duty_frame(d_star, p, policy);
    u.freq = schedule_frequency(u.duty, v_out, i_sample, p);
    c.d_star_next = d_star;
    c.f_star_next = u.freq.f_star;
    return u;
}

}  // namespace fcml
