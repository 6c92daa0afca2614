#pragma once

#include <algorithm>
#include <iterator>
#include <stdexcept>
#include <utility>
#include <vector>

namespace fcml {

/// Piecewise-linear function of time, held constant outside its breakpoints.
class PiecewiseLinear {
public:
    PiecewiseLinear() = default;
    explicit PiecewiseLinear(std::vector<std::pair<double, double>> points) : points_(std::move(points)) {
        if (points_.empty()) throw std::invalid_argument("schedule needs at least one point");
        for (std::size_t i = 1; i < points_.size(); ++i)
            if (!(points_[i].first > points_[i - 1].first))
                throw std::invalid_argument("schedule times must be strictly increasing");
    }

    static PiecewiseLinear constant(double v) { return PiecewiseLinear({{0.0, v}}); }

    double operator()(double t) const {
        if (points_.empty()) return 0.0;
        if (t <= points_.front().first) return points_.front().second;
        if (t >= points_.back().first) return points_.back().second;
        auto it = std::upper_bound(points_.begin(), points_.end(), t,
                                   [](double x, const auto& pt) { return x < pt.first; });
        const auto& [t1, v1] = *it;
        const auto& [t0, v0] = *std::prev(it);
        return v0 + (v1 - v0) * (t - t0) / (t1 - t0);
    }

    bool is_constant() const { return points_.size() <= 1; }
    const std::vector<std::pair<double, double>>& points() const { return points_; }
    bool operator==(const PiecewiseLinear&) const = default;

private:
    std::vector<std::pair<double, double>> points_;
};

}  // namespace fcml
