#pragma once

#include "jdmc/parametrix.hpp"

#include <chrono>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>

namespace jdmc {

/// One realization of the jump-diffusion estimator.
struct TrialResult {
    double value = 0.0;
    std::int64_t n_jumps = 0;              ///< arrivals before the horizon
    std::int64_t n_grid_points_total = 0;  ///< interior grid points over all segments
    std::int64_t wall_ns = 0;
};

struct EngineOptions {
    /// Optional diagnostic guard |M| <= multiplier_cap. Infinite by default;
    /// any finite cap biases the estimator.
    double multiplier_cap = std::numeric_limits<double>::infinity();
    /// Recompute the compensating factor as a product of per-segment factors
    /// and throw if it differs from exp(-sigma_A^2 T / 2).
    bool check_factor_telescoping = false;
    /// Test hook: replaces the first exponential draw.
    std::optional<double> first_jump_time;
};

/// Exponential arrival time with the given rate, by inverse CDF.
inline double sample_jump_time(double rate, Rng& rng) {
    if (!(rate > 0.0)) throw NumericalError("sample_jump_time: rate must be positive");
    return rng.exponential(rate);
}

/// Unbiased estimate of E f(X_T) for X started at x0.
///
/// Jump times are drawn exponentially with the rate frozen at the last
/// post-jump state. Each inter-jump segment is simulated on its own Beta grid
/// and contributes its L1 weight to a running multiplier; the segment reaching
/// T contributes the L2 weight times f. The product is scaled by
/// exp(-sigma_A^2 T / 2) to compensate the auxiliary noise.
inline TrialResult estimate_once(const ModelSpec& model, const Payoff& f, const Vec& x0,
                                 const EstimatorParams& params, Rng& rng,
                                 const EngineOptions& options = {}) {
    const auto start = std::chrono::steady_clock::now();
    const double horizon = params.horizon;
    const double s2 = params.sigma_a * params.sigma_a;

    TrialResult out;
    double multiplier = 1.0;
    double factor_product = 1.0;
    Vec x = x0;
    double elapsed = 0.0;  // T^xi_{i-1}
    double xi = options.first_jump_time ? *options.first_jump_time
                                        : sample_jump_time(model.intensity(x), rng);

    while (elapsed + xi < horizon) {
        const GridPath path = simulate_segment(model, params, x, xi, rng);
        out.n_grid_points_total += path.grid_points();
        multiplier *= l1_theta(model, params, path).weight;
        if (std::abs(multiplier) > options.multiplier_cap)
            multiplier = std::copysign(options.multiplier_cap, multiplier);
        if (options.check_factor_telescoping) factor_product *= std::exp(-s2 * xi / 2.0);

        const Vec& y_end = path.terminal().y;
        x = y_end + model.jump(y_end, model.mark_sampler(rng));
        elapsed += xi;
        ++out.n_jumps;
        xi = sample_jump_time(model.intensity(x), rng);
    }

    const double rest = horizon - elapsed;
    const GridPath path = simulate_segment(model, params, x, rest, rng);
    out.n_grid_points_total += path.grid_points();
    const double global_factor = std::exp(-s2 * horizon / 2.0);
    out.value = global_factor * multiplier * l2_theta(model, params, path, f).weight;

    if (options.check_factor_telescoping) {
        factor_product *= std::exp(-s2 * rest / 2.0);
        if (std::abs(factor_product - global_factor) > 1e-12 * global_factor)
            throw NumericalError("per-segment compensating factors do not telescope");
    }
    if (!std::isfinite(out.value)) throw NumericalError("non-finite estimator value");

    out.wall_ns = std::chrono::duration_cast<std::chrono::nanoseconds>(
                      std::chrono::steady_clock::now() - start)
                      .count();
    return out;
}

}  // namespace jdmc
