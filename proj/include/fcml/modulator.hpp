#pragma once

// Duty quantization, phase-shifted carrier comparison, the skipped-adjacency
// logic transform and dead-time insertion: everything between a duty
// reference and the gate-driver inputs.

#include "fcml/params.hpp"
#include "fcml/switch_set.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <span>
#include <stdexcept>
#include <string_view>
#include <vector>

namespace fcml {

enum class Mode { pspwm, sapwm };
enum class ModePolicy { pspwm_only, sapwm_enabled };

inline std::string_view to_string(Mode m) { return m == Mode::pspwm ? "PSPWM" : "SAPWM"; }

struct DutyFrame {
    double d_star = 0.0;
    double d_floor = 0.0;
    double d_round = 0.0;
    double d_u = 0.0;
    double d_mod = 0.0;
    double d_in = 0.0;
    Mode mode = Mode::pspwm;

    /// Rounded level count n_r = (N−1)·d_round.
    int rounded_level() const { return static_cast<int>(std::lround(d_round / d_u)); }
};

namespace detail {

// Level products like 0.6·5 land a few ulps off the integer; snap them.
inline constexpr double kLevelSnap = 1e-9;

inline double snapped_level_product(double d_star, int steps) {
    const double x = d_star * steps;
    const double nearest = std::round(x);
    return std::abs(x - nearest) < kLevelSnap ? nearest : x;
}

}  // namespace detail

/// Fills d_floor, d_round and d_u. Ties in the rounding go away from zero.
inline DutyFrame quantize_duty(double d_star, const ConverterParams& p) {
    if (!(d_star >= 0.0 && d_star <= 1.0))
        throw std::out_of_range("duty reference must lie in [0, 1]");
    const int steps = p.level_count - 1;
    const double x = detail::snapped_level_product(d_star, steps);
    double fl = std::floor(x);
    double rd = std::floor(x);
    const double frac = x - fl;
    if (std::abs(frac - 0.5) < detail::kLevelSnap || frac > 0.5) rd = fl + 1.0;

    DutyFrame f;
    f.d_star = d_star;
    f.d_u = 1.0 / steps;
    f.d_floor = fl / steps;
    f.d_round = rd / steps;
    f.d_in = d_star;
    return f;
}

/// SAPWM iff |d* − d_r*| ≤ α; the boundary belongs to SAPWM.
inline Mode select_mode(double d_star, double d_round, double alpha) {
    return std::abs(d_star - d_round) <= alpha ? Mode::sapwm : Mode::pspwm;
}

/// Comparator reference that keeps the average pole voltage at d* once the
/// nearest level is skipped.
inline double modified_duty(double d_star, double d_round, double d_u) {
    return 0.5 * (d_star + d_round - d_u);
}

/// Full duty frame for one carrier period. The two outer levels have no
/// neighbour to skip to, so duties rounding to 0 or 1 always run PSPWM.
inline DutyFrame make_duty_frame(double d_star, const ConverterParams& p, ModePolicy policy) {
    DutyFrame f = quantize_duty(d_star, p);
    f.d_mod = modified_duty(f.d_star, f.d_round, f.d_u);
    const int n_r = f.rounded_level();
    const bool interior = n_r > 0 && n_r < p.level_count - 1;
    f.mode = (policy == ModePolicy::sapwm_enabled && interior)
                 ? select_mode(f.d_star, f.d_round, p.adjacency_threshold)
                 : Mode::pspwm;
    f.d_in = f.mode == Mode::sapwm ? f.d_mod : f.d_star;
    return f;
}

// ---------------------------------------------------------------------------
// Carriers
// ---------------------------------------------------------------------------

/// Symmetric unit triangle: 0 at phase 0 (valley), 1 at phase 1/2 (peak).
inline double triangle(double phase) {
    double ph = phase - std::floor(phase);
    return 2.0 * std::min(ph, 1.0 - ph);
}

/// Value in [0,1] of carrier k (1-based) at time t. Carrier 1 has its valley
/// at `valley_time`; carrier k lags it by (k−1)/(N−1) of a period.
inline double carrier_value(int k, double t, double valley_time, double period, int switch_count) {
    const double phase = (t - valley_time) / period - static_cast<double>(k - 1) / switch_count;
    return triangle(phase);
}

/// S_k = 1 iff d_in ≥ carrier_k(t).
inline SwitchSet compare_carriers(double d_in, double t, double valley_time, double period, int switch_count) {
    SwitchSet s(switch_count);
    if (d_in <= 0.0) return s;
    for (int k = 1; k <= switch_count; ++k)
        s.set(k - 1, d_in >= carrier_value(k, t, valley_time, period, switch_count));
    return s;
}

/// A span of constant comparator output inside one carrier period.
struct CarrierSegment {
    double t_begin;
    double t_end;
    SwitchSet raw;
};

/// N−1 phase-shifted carriers sharing one period, with shadow registers for
/// period and duty that only take effect at a valley of carrier 1.
class CarrierBank {
public:
    explicit CarrierBank(int switch_count) : switch_count_(switch_count) {}

    int switch_count() const { return switch_count_; }
    double period() const { return period_; }
    double duty() const { return duty_; }
    double valley_time() const { return valley_; }
    bool started() const { return started_; }
    double next_valley() const { return valley_ + period_; }

    void stage(double period, double d_in) {
        if (!(period > 0.0) || !std::isfinite(period)) throw std::invalid_argument("carrier period must be > 0");
        shadow_period_ = period;
        shadow_duty_ = std::clamp(d_in, 0.0, 1.0);
        staged_ = true;
    }

    /// Copies the shadow registers into the live ones. `t` must be the
    /// current period's closing valley (or any time before the first latch).
    void latch(double t) {
        if (!staged_) throw std::logic_error("carrier bank latched without staged values");
        if (started_) {
            const double expected = next_valley();
            if (std::abs(t - expected) > 1e-9 * period_)
                throw std::logic_error("carrier registers may only change at a carrier-1 valley");
        }
        valley_ = t;
        period_ = shadow_period_;
        duty_ = shadow_duty_;
        started_ = true;
        staged_ = false;
    }

    SwitchSet compare(double t) const { return compare_carriers(duty_, t, valley_, period_, switch_count_); }

    /// Piecewise-constant comparator output over the live period.
    std::vector<CarrierSegment> segments() const {
        const double T = period_;
        std::vector<double> cuts{0.0, T};
        if (duty_ > 0.0 && duty_ < 1.0) {
            const double half_width = 0.5 * duty_ * T;
            for (int k = 0; k < switch_count_; ++k) {
                const double centre = T * k / switch_count_;
                for (double edge : {centre - half_width, centre + half_width}) {
                    double e = std::fmod(edge, T);
                    if (e < 0.0) e += T;
                    cuts.push_back(e);
                }
            }
        }
        std::sort(cuts.begin(), cuts.end());
        const double merge = 1e-9 * T;
        std::vector<double> unique;
        for (double c : cuts) {
            if (unique.empty() || c - unique.back() > merge) unique.push_back(c);
        }
        if (T - unique.back() <= merge) unique.back() = T;
        else unique.push_back(T);

        std::vector<CarrierSegment> out;
        for (std::size_t i = 0; i + 1 < unique.size(); ++i) {
            const double a = unique[i];
            const double b = unique[i + 1];
            const SwitchSet raw = compare_carriers(duty_, valley_ + 0.5 * (a + b), valley_, T, switch_count_);
            if (!out.empty() && out.back().raw == raw) {
                out.back().t_end = valley_ + b;
            } else {
                out.push_back({valley_ + a, valley_ + b, raw});
            }
        }
        return out;
    }

private:
    int switch_count_;
    double period_ = 0.0;
    double duty_ = 0.0;
    double valley_ = 0.0;
    double shadow_period_ = 0.0;
    double shadow_duty_ = 0.0;
    bool staged_ = false;
    bool started_ = false;
};

// ---------------------------------------------------------------------------
// Skipped-adjacency logic
// ---------------------------------------------------------------------------

/// σ_k = S_{k−1} OR S_k with S_0 ≡ S_{N−1}.
inline SwitchSet or_with_previous(SwitchSet s_raw) { return s_raw | s_raw.rotated_up(); }

/// σ when the instantaneous on-count equals n_r, otherwise the raw state.
inline SwitchSet sapwm_transform(SwitchSet s_raw, int n_r) {
    return s_raw.popcount() == n_r ? or_with_previous(s_raw) : s_raw;
}

struct SwitchFrame {
    SwitchSet s_raw;
    SwitchSet s_or;
    SwitchSet s_mod;
    SwitchSet s_in;
    int n_r = 0;
    int n_s = 0;
};

inline SwitchFrame make_switch_frame(SwitchSet s_raw, const DutyFrame& duty) {
    SwitchFrame f;
    f.s_raw = s_raw;
    f.s_or = or_with_previous(s_raw);
    f.n_r = duty.rounded_level();
    f.n_s = s_raw.popcount();
    f.s_mod = f.n_s == f.n_r ? f.s_or : s_raw;
    f.s_in = duty.mode == Mode::sapwm ? f.s_mod : s_raw;
    return f;
}

// ---------------------------------------------------------------------------
// Dead time
// ---------------------------------------------------------------------------

enum class GateSide { high, low };

struct GateEdge {
    double t;
    int switch_index;  // 1-based
    GateSide side;
    bool level;
};

class DeadtimeError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Complementary gate pair driven by one command bit. Each gate's rising
/// edge is delayed by the dead time; falling edges pass straight through.
/// A command that reverts before the delayed rise swallows that pulse.
class DeadtimePair {
public:
    explicit DeadtimePair(bool command = false) { reset(command); }

    void reset(bool command) {
        command_ = command;
        high_ = command;
        low_ = !command;
        pending_ = kNever;
    }

    struct CommandResult {
        std::optional<GateSide> turned_off;
        bool window_opened = false;
        bool swallowed = false;
    };

    CommandResult command(bool level, double t, double dead_time) {
        CommandResult r;
        if (level == command_) return r;
        command_ = level;
        r.swallowed = pending_ != kNever;
        if (level && low_) {
            low_ = false;
            r.turned_off = GateSide::low;
        } else if (!level && high_) {
            high_ = false;
            r.turned_off = GateSide::high;
        }
        if (r.turned_off) {
            r.window_opened = true;
            window_start_ = t;
        }
        pending_ = t + dead_time;
        return r;
    }

    /// Turns on the waiting gate if its delayed edge is due at `t`.
    std::optional<GateSide> fire(double t) {
        if (pending_ == kNever || t < pending_) return std::nullopt;
        pending_ = kNever;
        if (command_) {
            high_ = true;
            return GateSide::high;
        }
        low_ = true;
        return GateSide::low;
    }

    bool command_level() const { return command_; }
    bool high() const { return high_; }
    bool low() const { return low_; }
    bool in_dead_window() const { return !high_ && !low_; }
    double pending_turn_on() const { return pending_; }
    double window_start() const { return window_start_; }

    static constexpr double kNever = std::numeric_limits<double>::infinity();

private:
    bool command_ = false;
    bool high_ = false;
    bool low_ = true;
    double pending_ = kNever;
    double window_start_ = 0.0;
};

struct LevelChange {
    double t;
    bool level;
};

/// Piecewise-constant command for one switch pair.
struct SwitchStream {
    bool initial = false;
    std::vector<LevelChange> changes;  // strictly increasing times
};

/// Complementary gate edges for every stream (switch index = position + 1),
/// sorted by time. Any command pulse shorter than twice the dead time would
/// be swallowed, so it is rejected.
inline std::vector<GateEdge> latch_and_deadtime(std::span<const SwitchStream> streams, double dead_time) {
    if (!(dead_time > 0.0)) throw std::invalid_argument("dead time must be > 0");
    std::vector<GateEdge> edges;
    for (std::size_t idx = 0; idx < streams.size(); ++idx) {
        const int sw = static_cast<int>(idx) + 1;
        const auto& stream = streams[idx];
        DeadtimePair pair(stream.initial);
        bool level = stream.initial;
        std::optional<double> last_change;
        auto fire_until = [&](double t) {
            const double due = pair.pending_turn_on();
            if (due <= t) {
                if (auto side = pair.fire(due)) edges.push_back({due, sw, *side, true});
            }
        };
        for (const auto& ch : stream.changes) {
            if (ch.level == level) continue;
            if (last_change && ch.t - *last_change < 2.0 * dead_time)
                throw DeadtimeError("switch " + std::to_string(sw) +
                                    ": pulse shorter than twice the dead time would be swallowed");
            fire_until(ch.t);
            auto res = pair.command(ch.level, ch.t, dead_time);
            if (res.turned_off) edges.push_back({ch.t, sw, *res.turned_off, false});
            level = ch.level;
            last_change = ch.t;
        }
        fire_until(DeadtimePair::kNever);
    }
    std::stable_sort(edges.begin(), edges.end(), [](const GateEdge& a, const GateEdge& b) {
        if (a.t != b.t) return a.t < b.t;
        if (a.switch_index != b.switch_index) return a.switch_index < b.switch_index;
        return a.side < b.side;
    });
    return edges;
}

}  // namespace fcml
