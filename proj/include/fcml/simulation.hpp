#pragma once

// Lockstep run loop: sample at the carrier-1 valley, latch the new period
// and duty, then integrate the plant segment by segment, stepping exactly
// onto every command edge and every delayed gate turn-on.

#include "fcml/control.hpp"
#include "fcml/modulator.hpp"
#include "fcml/params.hpp"
#include "fcml/plant.hpp"
#include "fcml/scenario.hpp"
#include "fcml/switch_set.hpp"
#include "fcml/zvs_scheduler.hpp"

#include <algorithm>
#include <cstdint>
#include <limits>
#include <vector>

namespace fcml {

/// Full-resolution record of a run. Sample i holds the state at t[i] and the
/// gate/pole-voltage values that apply over [t[i], t[i+1]).
struct Trace {
    int cap_count = 0;
    std::vector<double> t, i_l, v_sw, v_out, d_star, d_in, f_applied;
    std::vector<double> v_fc;  // row-major, cap_count per sample
    std::vector<Mode> mode;
    std::vector<std::uint64_t> gates;  // effective node states after dead-time resolution
    std::vector<double> valleys;

    std::size_t size() const { return t.size(); }
    double fc(std::size_t i, int k) const { return v_fc[i * static_cast<std::size_t>(cap_count) + static_cast<std::size_t>(k - 1)]; }
};

struct PeriodRecord {
    double t_valley = 0.0;
    double period = 0.0;
    double i_sample = 0.0;
    double v_out = 0.0;
    DutyFrame duty;
    FrequencyCommand freq;
};

/// A change of the gate-driver input vector s_in.
struct Commutation {
    double t = 0.0;
    SwitchSet before;
    SwitchSet after;
    Mode mode = Mode::pspwm;
    int n_r = 0;
};

struct RunResult {
    ConverterParams params;  // α resolved
    Trace trace;
    std::vector<SwitchingEvent> events;
    std::vector<PeriodRecord> periods;
    std::vector<Commutation> commutations;
    std::vector<GateEdge> gate_edges;
    int swallowed_pulses = 0;
    PlantState final_state;
};

struct SimOptions {
    double max_step = 0.0;  // 0 → 1/(200·freq_max)
    bool record_trace = true;
    bool record_gates = false;
};

class Simulator {
public:
    Simulator(const Scenario& sc, SimOptions opt = {})
        : sc_(sc),
          p_(resolved_params(sc)),
          opt_(opt),
          plant_(p_, sc.source_mode),
          bank_(p_.switch_count()),
          pairs_(static_cast<std::size_t>(p_.switch_count())),
          window_current_(static_cast<std::size_t>(p_.switch_count()), 0.0),
          window_mode_(static_cast<std::size_t>(p_.switch_count()), Mode::pspwm),
          effective_(p_.switch_count()) {
        validate_scenario(sc);
        if (opt_.max_step <= 0.0) opt_.max_step = 1.0 / (200.0 * p_.freq_max);
        ctrl_.kind = sc.schedule_kind;
        ctrl_.script = sc.schedule;
        ctrl_.gains = resolved_gains(sc, p_);
    }

    RunResult run() {
        RunResult r;
        r.params = p_;
        r.trace.cap_count = p_.flying_cap_count();
        out_ = &r;

        const double i0 = sc_.initial_current.value_or(
            sc_.schedule_kind == ScheduleKind::duty ? sc_.nominal_current : sc_.schedule(0.0));
        double v0 = 0.0;
        if (const auto* sink = std::get_if<IdealSink>(&p_.load)) v0 = sink->tracking ? tracking_voltage(0.0) : sink->voltage(0.0);
        else v0 = i0 * std::get<ParallelRC>(p_.load).resistance;
        state_ = nominal_state(p_, i0, v0);

        const double t_stop = sc_.duration * (1.0 - 1e-12);
        double last_period = 0.0;
        bool first = true;
        while (state_.t < t_stop) {
            const double valley = state_.t;
            if (const auto* sink = std::get_if<IdealSink>(&p_.load); sink && sink->tracking)
                state_.v_out = tracking_voltage(valley);

            const ValleyUpdate u =
                sample_and_update(ctrl_, state_.i_l, state_.v_out, valley, last_period, p_, sc_.mode_policy);
            frame_ = u.duty;
            freq_ = u.freq;
            bank_.stage(1.0 / u.freq.f_applied, u.duty.d_in);
            bank_.latch(valley);
            last_period = bank_.period();
            r.periods.push_back({valley, bank_.period(), u.i_sample, state_.v_out, u.duty, u.freq});
            r.trace.valleys.push_back(valley);

            const auto segs = bank_.segments();
            std::vector<SwitchSet> s_in;
            s_in.reserve(segs.size());
            for (const auto& seg : segs) s_in.push_back(make_switch_frame(seg.raw, frame_).s_in);

            if (first) {
                command_ = s_in.front();
                for (int k = 0; k < p_.switch_count(); ++k) {
                    pairs_[static_cast<std::size_t>(k)].reset(command_[k]);
                    effective_.set(k, command_[k]);
                }
                first = false;
            }
            apply_command(s_in.front(), valley);

            const double period_end = bank_.next_valley();
            std::size_t seg = 0;
            double cursor = valley;
            while (cursor < period_end) {
                const double next_cmd = seg + 1 < segs.size() ? segs[seg + 1].t_begin : period_end;
                double next_gate = DeadtimePair::kNever;
                for (const auto& pr : pairs_) next_gate = std::min(next_gate, pr.pending_turn_on());
                const double tn = std::min({next_cmd, next_gate, period_end});
                integrate_to(tn);
                cursor = tn;
                fire_due(tn);
                if (seg + 1 < segs.size() && next_cmd <= tn) {
                    ++seg;
                    apply_command(s_in[seg], tn);
                }
            }
            state_.t = period_end;
        }
        if (opt_.record_trace) record_sample();
        std::stable_sort(r.events.begin(), r.events.end(), [](const SwitchingEvent& a, const SwitchingEvent& b) {
            return a.t != b.t ? a.t < b.t : a.switch_index < b.switch_index;
        });
        r.final_state = state_;
        out_ = nullptr;
        return r;
    }

private:
    double tracking_voltage(double t) const {
        const double d = std::clamp(sc_.schedule(t), 0.0, 1.0);
        return d * p_.input_voltage - p_.series_resistance * sc_.nominal_current;
    }

    void apply_command(SwitchSet next, double t) {
        const SwitchSet diff = command_ ^ next;
        if (diff.none()) return;
        out_->commutations.push_back({t, command_, next, frame_.mode, frame_.rounded_level()});
        for (int k = 0; k < p_.switch_count(); ++k) {
            if (!diff[k]) continue;
            auto& pair = pairs_[static_cast<std::size_t>(k)];
            const auto res = pair.command(next[k], t, p_.dead_time);
            if (res.swallowed) ++out_->swallowed_pulses;
            if (res.turned_off && opt_.record_gates) out_->gate_edges.push_back({t, k + 1, *res.turned_off, false});
            if (res.window_opened) {
                window_current_[static_cast<std::size_t>(k)] = state_.i_l;
                window_mode_[static_cast<std::size_t>(k)] = frame_.mode;
            }
        }
        command_ = next;
    }

    void fire_due(double t) {
        for (int k = 0; k < p_.switch_count(); ++k) {
            auto& pair = pairs_[static_cast<std::size_t>(k)];
            const auto side = pair.fire(t);
            if (!side) continue;
            if (opt_.record_gates) out_->gate_edges.push_back({t, k + 1, *side, true});
            SwitchingEvent e = resolve_deadtime_node(window_current_[static_cast<std::size_t>(k)],
                                                     *side == GateSide::high ? TurnOn::high : TurnOn::low,
                                                     window_mode_[static_cast<std::size_t>(k)], p_);
            e.t = pair.window_start();
            e.switch_index = k + 1;
            out_->events.push_back(e);
        }
    }

    void resolve_effective() {
        for (int k = 0; k < p_.switch_count(); ++k) {
            const auto& pair = pairs_[static_cast<std::size_t>(k)];
            bool s = effective_[k];
            if (pair.high()) s = true;
            else if (pair.low()) s = false;
            else s = diode_state(window_current_[static_cast<std::size_t>(k)], s);
            effective_.set(k, s);
        }
    }

    void record_sample() {
        auto& tr = out_->trace;
        tr.t.push_back(state_.t);
        tr.i_l.push_back(state_.i_l);
        tr.v_sw.push_back(plant_.pole_voltage(effective_, state_));
        tr.v_out.push_back(state_.v_out);
        tr.d_star.push_back(frame_.d_star);
        tr.d_in.push_back(frame_.d_in);
        tr.f_applied.push_back(freq_.f_applied);
        tr.mode.push_back(frame_.mode);
        tr.gates.push_back(effective_.bits());
        for (int k = 1; k <= p_.flying_cap_count(); ++k) tr.v_fc.push_back(plant_.level_voltage(state_, k));
    }

    void integrate_to(double t_end) {
        const double span = t_end - state_.t;
        if (span <= 0.0) return;
        resolve_effective();
        const int n = std::max(1, static_cast<int>(std::ceil(span / opt_.max_step - 1e-9)));
        const double h = span / n;
        const auto* sink = std::get_if<IdealSink>(&p_.load);
        const bool profiled = sink && !sink->tracking && !sink->voltage.is_constant();
        for (int i = 0; i < n; ++i) {
            if (profiled) state_.v_out = sink->voltage(state_.t);
            if (opt_.record_trace) record_sample();
            plant_.advance(state_, effective_, h);
        }
        state_.t = t_end;
    }

    Scenario sc_;
    ConverterParams p_;
    SimOptions opt_;
    Plant plant_;
    CarrierBank bank_;
    ControllerState ctrl_;
    std::vector<DeadtimePair> pairs_;
    std::vector<double> window_current_;
    std::vector<Mode> window_mode_;
    SwitchSet effective_;
    SwitchSet command_;
    DutyFrame frame_;
    FrequencyCommand freq_;
    PlantState state_;
    RunResult* out_ = nullptr;
};

inline RunResult simulate(const Scenario& sc, SimOptions opt = {}) { return Simulator(sc, opt).run(); }

}  // namespace fcml
