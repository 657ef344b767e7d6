#pragma once

#include "jdmc/engine.hpp"

#include <cmath>
#include <cstdint>
#include <limits>

namespace jdmc {

/// Normal quantile for two-sided 99% intervals.
inline constexpr double kZ99 = 2.576;

/// Streaming mean/variance (Welford) with pairwise merge (Chan et al.).
struct EstimateStats {
    std::int64_t n = 0;
    double mean = 0.0;
    double m2 = 0.0;  ///< sum of squared deviations from the mean
    double wall_seconds = 0.0;
    double jumps_sum = 0.0;
    double grid_sum = 0.0;
    double segments_sum = 0.0;

    void add(double x) {
        ++n;
        const double delta = x - mean;
        mean += delta / static_cast<double>(n);
        m2 += delta * (x - mean);
    }

    void add(const TrialResult& r) {
        add(r.value);
        jumps_sum += static_cast<double>(r.n_jumps);
        grid_sum += static_cast<double>(r.n_grid_points_total);
        segments_sum += static_cast<double>(r.n_jumps + 1);
    }

    void merge(const EstimateStats& o) {
        if (o.n == 0) return;
        if (n == 0) {
            *this = o;
            return;
        }
        const double na = static_cast<double>(n);
        const double nb = static_cast<double>(o.n);
        const double delta = o.mean - mean;
        const double total = na + nb;
        mean += delta * nb / total;
        m2 += o.m2 + delta * delta * na * nb / total;
        n += o.n;
        wall_seconds += o.wall_seconds;
        jumps_sum += o.jumps_sum;
        grid_sum += o.grid_sum;
        segments_sum += o.segments_sum;
    }

    double var() const {
        return n > 1 ? m2 / static_cast<double>(n - 1) : std::numeric_limits<double>::quiet_NaN();
    }
    double std_error() const { return std::sqrt(var() / static_cast<double>(n)); }
    double ci99() const { return kZ99 * std_error(); }
    double jumps_mean() const { return n ? jumps_sum / static_cast<double>(n) : 0.0; }
    double grid_points_per_segment() const {
        return segments_sum > 0 ? grid_sum / segments_sum : 0.0;
    }
};

}  // namespace jdmc
