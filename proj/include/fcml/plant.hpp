#pragma once

// Switched-linear model of the FCML power stage and the ZVS/hard
// classification of each commutation.

#include "fcml/modulator.hpp"
#include "fcml/params.hpp"
#include "fcml/switch_set.hpp"
#include "fcml/zvs_scheduler.hpp"

#include <cmath>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

namespace fcml {

class SimulationError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Flying capacitors as state variables, or replaced by ideal level sources.
enum class SourceMode { ideal_sources, real_capacitors };

struct PlantState {
    double i_l = 0.0;
    std::vector<double> v_fc;  // v_1..v_{N−2}
    double v_out = 0.0;
    double t = 0.0;
};

/// Balanced initial state: every flying capacitor at its nominal share.
inline PlantState nominal_state(const ConverterParams& p, double i_l, double v_out) {
    PlantState s;
    s.i_l = i_l;
    s.v_out = v_out;
    s.v_fc.resize(static_cast<std::size_t>(p.flying_cap_count()));
    for (int k = 1; k <= p.flying_cap_count(); ++k) s.v_fc[static_cast<std::size_t>(k - 1)] = nominal_cap_voltage(p, k);
    return s;
}

enum class TurnOn { high, low };
enum class Switching { zvs, hard };

inline std::string_view to_string(TurnOn d) { return d == TurnOn::high ? "turn_on_high" : "turn_on_low"; }
inline std::string_view to_string(Switching c) { return c == Switching::zvs ? "ZVS" : "HARD"; }

struct SwitchingEvent {
    double t = 0.0;  // start of the dead-time window
    int switch_index = 0;
    TurnOn direction = TurnOn::high;
    double i_l_at_event = 0.0;
    double q_required = 0.0;
    double q_available = 0.0;
    double residual_voltage = 0.0;
    Switching classification = Switching::hard;
    Mode mode = Mode::pspwm;
};

/// Classifies one commutation from the inductor current at the start of its
/// dead time. The upper switch needs negative current to find its body diode
/// conducting, the lower switch positive current; the current must also move
/// the required charge within the dead time.
inline SwitchingEvent resolve_deadtime_node(double i_l, TurnOn direction, Mode mode, const ConverterParams& p) {
    const ChargeRequirement req = zvs_charge_requirement(mode, p);
    SwitchingEvent e;
    e.direction = direction;
    e.mode = mode;
    e.i_l_at_event = i_l;
    e.q_required = req.q_required;
    e.q_available = std::abs(i_l) * p.dead_time;

    const bool sign_ok = direction == TurnOn::high ? i_l < 0.0 : i_l > 0.0;
    const double swing = quantization_step(p) * p.input_voltage;
    if (!sign_ok) {
        // The node never starts moving toward the incoming rail.
        e.classification = Switching::hard;
        e.residual_voltage = swing;
    } else if (e.q_available >= e.q_required) {
        e.classification = Switching::zvs;
        e.residual_voltage = 0.0;
    } else {
        e.classification = Switching::hard;
        e.residual_voltage = (e.q_required - e.q_available) / req.equivalent_capacitance;
    }
    return e;
}

/// Node state of a pair whose gates are both off: the body diode picked by
/// the current direction conducts.
inline bool diode_state(double i_l, bool previous) {
    if (i_l > 0.0) return false;
    if (i_l < 0.0) return true;
    return previous;
}

class Plant {
public:
    Plant(const ConverterParams& p, SourceMode mode) : p_(p), mode_(mode) {
        const std::size_t n = static_cast<std::size_t>(p_.flying_cap_count()) + 2;
        for (auto* v : {&k1_, &k2_, &k3_, &k4_, &x_, &tmp_}) v->resize(n);
    }

    const ConverterParams& params() const { return p_; }
    SourceMode source_mode() const { return mode_; }

    /// Voltage of flying capacitor k (0 and N−1 are the rails).
    double level_voltage(const PlantState& s, int k) const {
        if (k <= 0) return 0.0;
        if (k >= p_.level_count - 1) return p_.input_voltage;
        if (mode_ == SourceMode::ideal_sources) return nominal_cap_voltage(p_, k);
        return s.v_fc[static_cast<std::size_t>(k - 1)];
    }

    /// v_sw = Σ S_k (v_k − v_{k−1}).
    double pole_voltage(SwitchSet gates, const PlantState& s) const {
        double v = 0.0;
        for (int k = 1; k <= p_.switch_count(); ++k)
            if (gates[k - 1]) v += level_voltage(s, k) - level_voltage(s, k - 1);
        return v;
    }

    /// One classical RK4 step with the gates held constant.
    void advance(PlantState& s, SwitchSet gates, double dt) {
        pack(s, x_);
        derivative(x_, gates, k1_);
        axpy(x_, 0.5 * dt, k1_, tmp_);
        derivative(tmp_, gates, k2_);
        axpy(x_, 0.5 * dt, k2_, tmp_);
        derivative(tmp_, gates, k3_);
        axpy(x_, dt, k3_, tmp_);
        derivative(tmp_, gates, k4_);
        for (std::size_t i = 0; i < x_.size(); ++i)
            x_[i] += dt / 6.0 * (k1_[i] + 2.0 * k2_[i] + 2.0 * k3_[i] + k4_[i]);
        unpack(x_, s);
        s.t += dt;
        check_finite(s);
    }

    /// Integrates over `duration` in equal steps no longer than `max_step`.
    void integrate(PlantState& s, SwitchSet gates, double duration, double max_step) {
        if (duration <= 0.0) return;
        const double t_end = s.t + duration;
        const int n = std::max(1, static_cast<int>(std::ceil(duration / max_step - 1e-9)));
        const double h = duration / n;
        for (int i = 0; i < n; ++i) advance(s, gates, h);
        s.t = t_end;
    }

    /// Stored energy in the inductor, flying capacitors and output capacitor.
    double stored_energy(const PlantState& s) const {
        double e = 0.5 * p_.inductance * s.i_l * s.i_l;
        if (mode_ == SourceMode::real_capacitors)
            for (double v : s.v_fc) e += 0.5 * p_.flying_capacitance * v * v;
        if (const auto* rc = std::get_if<ParallelRC>(&p_.load)) e += 0.5 * rc->capacitance * s.v_out * s.v_out;
        return e;
    }

private:
    void pack(const PlantState& s, std::vector<double>& x) const {
        x[0] = s.i_l;
        for (std::size_t i = 0; i < s.v_fc.size(); ++i) x[i + 1] = s.v_fc[i];
        x.back() = s.v_out;
    }

    void unpack(const std::vector<double>& x, PlantState& s) const {
        s.i_l = x[0];
        for (std::size_t i = 0; i < s.v_fc.size(); ++i) s.v_fc[i] = x[i + 1];
        s.v_out = x.back();
    }

    static void axpy(const std::vector<double>& x, double a, const std::vector<double>& k, std::vector<double>& out) {
        for (std::size_t i = 0; i < x.size(); ++i) out[i] = x[i] + a * k[i];
    }

    double level_from_vector(const std::vector<double>& x, int k) const {
        if (k <= 0) return 0.0;
        if (k >= p_.level_count - 1) return p_.input_voltage;
        if (mode_ == SourceMode::ideal_sources) return nominal_cap_voltage(p_, k);
        return x[static_cast<std::size_t>(k)];
    }

    void derivative(const std::vector<double>& x, SwitchSet gates, std::vector<double>& dx) const {
        const double i_l = x[0];
        const double v_out = x.back();
        double v_sw = 0.0;
        for (int k = 1; k <= p_.switch_count(); ++k)
            if (gates[k - 1]) v_sw += level_from_vector(x, k) - level_from_vector(x, k - 1);
        dx[0] = (v_sw - v_out - p_.series_resistance * i_l) / p_.inductance;

        // Capacitor k sits between switch k (below) and switch k+1 (above).
        for (int k = 1; k <= p_.flying_cap_count(); ++k) {
            const double ds = static_cast<double>(gates[k]) - static_cast<double>(gates[k - 1]);
            dx[static_cast<std::size_t>(k)] =
                mode_ == SourceMode::real_capacitors ? ds * i_l / p_.flying_capacitance : 0.0;
        }
        if (const auto* rc = std::get_if<ParallelRC>(&p_.load))
            dx.back() = (i_l - v_out / rc->resistance) / rc->capacitance;
        else
            dx.back() = 0.0;
    }

    static void check_finite(const PlantState& s) {
        bool ok = std::isfinite(s.i_l) && std::isfinite(s.v_out);
        for (double v : s.v_fc) ok = ok && std::isfinite(v);
        if (!ok) throw SimulationError("plant state became non-finite at t = " + std::to_string(s.t));
    }

    ConverterParams p_;
    SourceMode mode_;
    std::vector<double> k1_, k2_, k3_, k4_, x_, tmp_;
};

/// Functional form of Plant::integrate for one fixed-gate interval.
inline PlantState step(const ConverterParams& p, SourceMode mode, PlantState s, SwitchSet gates, double dt,
                       double max_step) {
    Plant plant(p, mode);
    plant.integrate(s, gates, dt, max_step);
    return s;
}

}  // namespace fcml
