#pragma once

// Post-processing of runs into per-operating-point metrics, and the sweep
// and frequency-profile drivers built on them.

#include "fcml/modulator.hpp"
#include "fcml/params.hpp"
#include "fcml/plant.hpp"
#include "fcml/scenario.hpp"
#include "fcml/simulation.hpp"
#include "fcml/zvs_scheduler.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <mutex>
#include <span>
#include <stdexcept>
#include <thread>
#include <vector>

namespace fcml {

class AnalysisError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct SweepRow {
    double d_star = 0.0;
    Mode mode = Mode::pspwm;
    double f_applied_hz = 0.0;
    double zvs_rate = 0.0;
    double ripple_pkpk_a = 0.0;
    double v_sw_mean_v = 0.0;
    double v_fc_max_dev_pct = 0.0;
    bool steady = true;  // per-period flying-cap means settled
};

struct Window {
    double t_begin = 0.0;
    double t_end = 0.0;
};

/// The final `fraction` of the trace's time span.
inline Window steady_window(const Trace& tr, double fraction = 0.25) {
    if (tr.size() < 2) throw AnalysisError("trace too short");
    const double t0 = tr.t.front();
    const double t1 = tr.t.back();
    return {t1 - fraction * (t1 - t0), t1};
}

namespace detail {

/// Time integral of g(i) over the samples of `w`, treating each sample as
/// holding until the next one.
template <typename F>
double integrate_held(const Trace& tr, Window w, F&& g) {
    double acc = 0.0;
    for (std::size_t i = 0; i + 1 < tr.size(); ++i) {
        const double a = std::max(tr.t[i], w.t_begin);
        const double b = std::min(tr.t[i + 1], w.t_end);
        if (b > a) acc += g(i) * (b - a);
    }
    return acc;
}

}  // namespace detail

/// ∫|v_sw − v_out| dt per switching period, averaged over the complete
/// carrier periods inside the window (the whole window if it holds none).
inline double volt_seconds(const Trace& tr, Window w) {
    auto vs = [&](Window sub) {
        return detail::integrate_held(tr, sub, [&](std::size_t i) { return std::abs(tr.v_sw[i] - tr.v_out[i]); });
    };
    std::vector<double> bounds;
    for (double v : tr.valleys)
        if (v >= w.t_begin - 1e-15 && v <= w.t_end + 1e-15) bounds.push_back(v);
    if (bounds.size() < 2) return vs(w);
    double total = 0.0;
    for (std::size_t k = 0; k + 1 < bounds.size(); ++k) total += vs({bounds[k], bounds[k + 1]});
    return total / static_cast<double>(bounds.size() - 1);
}

/// Aggregates the steady-state window (final 25%) of one run.
inline SweepRow classify_run(const Trace& tr, std::span<const SwitchingEvent> events, const ConverterParams& p,
                             double fraction = 0.25) {
    if (events.empty()) throw AnalysisError("empty event log");
    const Window w = steady_window(tr, fraction);

    std::size_t zvs = 0;
    std::size_t total = 0;
    for (const auto& e : events) {
        if (e.t < w.t_begin || e.t > w.t_end) continue;
        ++total;
        if (e.classification == Switching::zvs) ++zvs;
    }
    if (total == 0) throw AnalysisError("no switching events inside the steady-state window");

    SweepRow row;
    row.zvs_rate = static_cast<double>(zvs) / static_cast<double>(total);

    double i_min = std::numeric_limits<double>::infinity();
    double i_max = -i_min;
    double dev = 0.0;
    std::size_t last = 0;
    for (std::size_t i = 0; i < tr.size(); ++i) {
        if (tr.t[i] < w.t_begin) continue;
        i_min = std::min(i_min, tr.i_l[i]);
        i_max = std::max(i_max, tr.i_l[i]);
        for (int k = 1; k <= tr.cap_count; ++k) {
            const double nom = nominal_cap_voltage(p, k);
            dev = std::max(dev, std::abs(tr.fc(i, k) - nom) / nom * 100.0);
        }
        last = i;
    }
    row.ripple_pkpk_a = i_max - i_min;
    row.v_fc_max_dev_pct = dev;
    row.v_sw_mean_v = detail::integrate_held(tr, w, [&](std::size_t i) { return tr.v_sw[i]; }) / (w.t_end - w.t_begin);
    row.d_star = tr.d_star[last];
    row.mode = tr.mode[last];
    row.f_applied_hz = tr.f_applied[last];

    // Per-period flying-cap means must have settled to within 1% of V_in.
    std::vector<double> valleys;
    for (double v : tr.valleys)
        if (v >= w.t_begin) valleys.push_back(v);
    valleys.push_back(w.t_end);
    if (valleys.size() >= 3 && tr.cap_count > 0) {
        for (int k = 1; k <= tr.cap_count; ++k) {
            std::vector<double> means;
            for (std::size_t j = 0; j + 1 < valleys.size(); ++j) {
                const Window pw{valleys[j], valleys[j + 1]};
                if (pw.t_end <= pw.t_begin) continue;
                means.push_back(detail::integrate_held(tr, pw, [&](std::size_t i) { return tr.fc(i, k); }) /
                                (pw.t_end - pw.t_begin));
            }
            double mean = 0.0;
            for (double m : means) mean += m;
            mean /= static_cast<double>(means.size());
            double var = 0.0;
            for (double m : means) var += (m - mean) * (m - mean);
            const double sd = std::sqrt(var / static_cast<double>(means.size()));
            if (sd >= 0.01 * p.input_voltage) row.steady = false;
        }
    }
    return row;
}

inline SweepRow classify_run(const RunResult& r, double fraction = 0.25) {
    return classify_run(r.trace, r.events, r.params, fraction);
}

/// `n` uniformly spaced duties from α to 1−α inclusive.
inline std::vector<double> sweep_grid(const ConverterParams& p, int n) {
    if (n < 1) throw std::invalid_argument("sweep grid needs at least one point");
    std::vector<double> g;
    const double lo = p.adjacency_threshold;
    const double hi = 1.0 - p.adjacency_threshold;
    for (int i = 0; i < n; ++i) g.push_back(n == 1 ? 0.5 * (lo + hi) : lo + (hi - lo) * i / (n - 1));
    return g;
}

/// The scenario for one sweep point. With a duty schedule the point runs
/// open loop at d* and any ideal sink tracks it. With a current schedule the
/// PI loop regulates to that current against a sink held at d*·V_in.
inline Scenario sweep_point(const Scenario& base, double d_star) {
    Scenario s = base;
    const bool is_sink = std::holds_alternative<IdealSink>(s.params.load);
    if (base.schedule_kind == ScheduleKind::current) {
        if (is_sink) s.params.load = IdealSink{PiecewiseLinear::constant(d_star * s.params.input_voltage), false};
    } else {
        s.schedule = PiecewiseLinear::constant(d_star);
        if (is_sink) s.params.load = IdealSink{PiecewiseLinear::constant(0.0), true};
    }
    s.initial_current.reset();
    return s;
}

/// Runs every grid point on a worker pool; rows come back in grid order.
inline std::vector<SweepRow> run_sweep(const Scenario& base, std::span<const double> grid, unsigned workers = 0,
                                       SimOptions opt = {}) {
    opt.record_trace = true;
    if (workers == 0) workers = std::max(1u, std::thread::hardware_concurrency());
    workers = std::min<unsigned>(workers, static_cast<unsigned>(std::max<std::size_t>(1, grid.size())));
    std::vector<SweepRow> rows(grid.size());
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    auto worker = [&] {
        for (std::size_t i = next++; i < grid.size(); i = next++) {
            try {
                const RunResult r = simulate(sweep_point(base, grid[i]), opt);
                rows[i] = classify_run(r);
            } catch (...) {
                std::lock_guard lock(failure_mutex);
                if (!failure) failure = std::current_exception();
            }
        }
    };
    std::vector<std::thread> pool;
    for (unsigned w = 1; w < workers; ++w) pool.emplace_back(worker);
    worker();
    for (auto& t : pool) t.join();
    if (failure) std::rethrow_exception(failure);
    return rows;
}

struct FrequencyProfileRow {
    double d_star = 0.0;
    double f_pspwm_hz = 0.0;
    double f_sapwm_hz = 0.0;
    Mode mode = Mode::pspwm;
    FrequencyCommand selected;
};

/// Both frequency laws at each duty with v_out = d*·V_in and a fixed |i_L|.
inline std::vector<FrequencyProfileRow> frequency_profile(const ConverterParams& p, double i_l,
                                                          std::span<const double> grid,
                                                          ModePolicy policy = ModePolicy::sapwm_enabled) {
    std::vector<FrequencyProfileRow> rows;
    rows.reserve(grid.size());
    for (double d : grid) {
        const DutyFrame f = make_duty_frame(d, p, policy);
        const double v_out = d * p.input_voltage;
        FrequencyProfileRow row;
        row.d_star = d;
        row.f_pspwm_hz = pspwm_frequency(f, v_out, i_l, p).f_star;
        row.f_sapwm_hz = sapwm_frequency(f, v_out, i_l, p).f_star;
        row.mode = f.mode;
        row.selected = schedule_frequency(f, v_out, i_l, p);
        rows.push_back(row);
    }
    return rows;
}

}  // namespace fcml
