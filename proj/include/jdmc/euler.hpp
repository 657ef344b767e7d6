#pragma once

#include "jdmc/engine.hpp"

#include <chrono>
#include <cmath>

namespace jdmc {

/// Accepts a thinning candidate at state x with probability lambda(x) / lambda_hi.
inline bool thinning_accept(const ModelSpec& model, const Vec& x, Rng& rng) {
    return rng.uniform() * model.intensity_hi < model.intensity(x);
}

/// Discretization baseline: Euler-Maruyama on a uniform grid of p_steps
/// steps, with jumps generated by thinning against the dominating rate
/// lambda_hi. Every thinning candidate becomes an extra grid point so the
/// acceptance test sees the state at the candidate time. Returns f(X_T).
inline TrialResult estimate_once_euler_baseline(const ModelSpec& model, const Payoff& f,
                                                const Vec& x0, double horizon, int p_steps,
                                                Rng& rng) {
    if (p_steps < 1) throw ConfigError("euler baseline: p_steps must be >= 1");
    if (!(horizon > 0.0)) throw ConfigError("euler baseline: horizon must be positive");
    const auto start = std::chrono::steady_clock::now();

    const int m = model.m;
    const double rate = model.intensity_hi;
    const bool has_jumps = rate > 0.0;

    TrialResult out;
    Vec x = x0;
    Vec dw(m);
    double t = 0.0;
    double candidate = has_jumps ? rng.exponential(rate) : horizon + 1.0;

    const int d = model.d;
    // Explicit loops: Eigen's generic product is slow for these tiny
    // dynamic-size operands and this is the innermost loop of the baseline.
    auto euler_step = [&](double dt) {
        const double sq = std::sqrt(dt);
        for (int j = 0; j < m; ++j) dw[j] = sq * rng.normal();
        const Vec mu = model.drift(x);
        const Mat sigma = model.diffusion(x);
        for (int i = 0; i < d; ++i) {
            double inc = mu[i] * dt;
            for (int j = 0; j < m; ++j) inc += sigma(i, j) * dw[j];
            x[i] += inc;
        }
    };

    const double h = horizon / p_steps;
    for (int k = 1; k <= p_steps; ++k) {
        const double t_next = k == p_steps ? horizon : k * h;
        while (candidate < t_next) {
            euler_step(candidate - t);
            t = candidate;
            ++out.n_grid_points_total;
            if (thinning_accept(model, x, rng)) {
                x += model.jump(x, model.mark_sampler(rng));
                ++out.n_jumps;
            }
            candidate += rng.exponential(rate);
        }
        euler_step(t_next - t);
        t = t_next;
        ++out.n_grid_points_total;
    }
    if (!x.allFinite()) throw NumericalError("euler baseline: non-finite state " + format_state(x));

    out.value = f(x);
    out.wall_ns = std::chrono::duration_cast<std::chrono::nanoseconds>(
                      std::chrono::steady_clock::now() - start)
                      .count();
    return out;
}

}  // namespace jdmc
