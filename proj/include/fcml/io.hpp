#pragma once

// CSV and text output. Numbers are written in fixed scientific notation with
// nine significant digits through snprintf in the "C" locale.

#include "fcml/analysis.hpp"
#include "fcml/modulator.hpp"
#include "fcml/plant.hpp"
#include "fcml/simulation.hpp"
#include "fcml/zvs_scheduler.hpp"

#include <cstdio>
#include <ostream>
#include <span>
#include <string>

namespace fcml {

inline std::string fmt_num(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.8e", v);
    return buf;
}

inline void write_trace_csv(std::ostream& o, const Trace& tr, int decimation = 1) {
    o << "t_s,i_L_A,v_sw_V,v_out_V";
    for (int k = 1; k <= tr.cap_count; ++k) o << ",v_fc" << k << "_V";
    o << ",mode,f_applied_hz\n";
    const std::size_t step = static_cast<std::size_t>(std::max(1, decimation));
    for (std::size_t i = 0; i < tr.size(); i += step) {
        o << fmt_num(tr.t[i]) << ',' << fmt_num(tr.i_l[i]) << ',' << fmt_num(tr.v_sw[i]) << ',' << fmt_num(tr.v_out[i]);
        for (int k = 1; k <= tr.cap_count; ++k) o << ',' << fmt_num(tr.fc(i, k));
        o << ',' << to_string(tr.mode[i]) << ',' << fmt_num(tr.f_applied[i]) << '\n';
    }
}

inline void write_events_csv(std::ostream& o, std::span<const SwitchingEvent> events) {
    o << "t_s,switch_index,direction,i_L_A,q_req_C,q_avail_C,classification\n";
    for (const auto& e : events) {
        o << fmt_num(e.t) << ',' << e.switch_index << ',' << to_string(e.direction) << ',' << fmt_num(e.i_l_at_event)
          << ',' << fmt_num(e.q_required) << ',' << fmt_num(e.q_available) << ',' << to_string(e.classification)
          << '\n';
    }
}

inline void write_sweep_header(std::ostream& o) {
    o << "d_star,mode,f_applied_hz,zvs_rate,ripple_pkpk_A,v_sw_mean_V,v_fc_max_dev_pct,steady\n";
}

inline void write_sweep_row(std::ostream& o, const SweepRow& r) {
    o << fmt_num(r.d_star) << ',' << to_string(r.mode) << ',' << fmt_num(r.f_applied_hz) << ',' << fmt_num(r.zvs_rate)
      << ',' << fmt_num(r.ripple_pkpk_a) << ',' << fmt_num(r.v_sw_mean_v) << ',' << fmt_num(r.v_fc_max_dev_pct) << ','
      << (r.steady ? 1 : 0) << '\n';
}

inline void write_sweep_csv(std::ostream& o, std::span<const SweepRow> rows) {
    write_sweep_header(o);
    for (const auto& r : rows) write_sweep_row(o, r);
}

inline void write_gate_csv(std::ostream& o, std::span<const GateEdge> edges) {
    o << "time_s,switch_index,side,level\n";
    for (const auto& e : edges)
        o << fmt_num(e.t) << ',' << e.switch_index << ',' << (e.side == GateSide::high ? 'H' : 'L') << ','
          << (e.level ? 1 : 0) << '\n';
}

inline std::string_view clamp_label(const FrequencyCommand& c) {
    if (c.clamped_low) return "low";
    if (c.clamped_high) return "high";
    return "none";
}

inline void write_profile_csv(std::ostream& o, std::span<const FrequencyProfileRow> rows) {
    o << "d_star,f_pspwm_hz,f_sapwm_hz,mode,clamped\n";
    for (const auto& r : rows)
        o << fmt_num(r.d_star) << ',' << fmt_num(r.f_pspwm_hz) << ',' << fmt_num(r.f_sapwm_hz) << ','
          << to_string(r.mode) << ',' << clamp_label(r.selected) << '\n';
}

inline void write_feasibility(std::ostream& o, const ConverterParams& p) {
    o << "dead_time_s " << fmt_num(p.dead_time) << '\n' << "zvs_current_a " << fmt_num(p.zvs_current) << '\n';
    for (Mode m : {Mode::pspwm, Mode::sapwm}) {
        const ChargeRequirement r = zvs_charge_requirement(m, p);
        o << to_string(m) << " q_req_C " << fmt_num(r.q_required) << " min_dead_time_s " << fmt_num(r.min_dead_time)
          << ' ' << (r.feasible ? "PASS" : "FAIL") << '\n';
    }
}

}  // namespace fcml
