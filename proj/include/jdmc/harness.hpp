#pragma once

#include "jdmc/euler.hpp"
#include "jdmc/stats.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cstdint>
#include <functional>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <vector>

namespace jdmc {

using TrialFn = std::function<TrialResult(Rng&)>;

/// A trial threw; `index` is the smallest failing trial index observed.
class TrialFailure : public NumericalError {
  public:
    TrialFailure(std::int64_t index, const std::string& what)
        : NumericalError("trial " + std::to_string(index) + " failed: " + what), index(index) {}
    std::int64_t index;
};

namespace detail {

// Trials are grouped into fixed-size chunks that do not depend on the worker
// count; chunk statistics are merged in chunk order, so the result is a pure
// function of (trial_fn, M, seed).
inline constexpr std::int64_t kChunk = 4096;

template <class PerChunk>
void for_each_chunk(std::int64_t trials, int workers, PerChunk&& body) {
    const std::int64_t chunks = (trials + kChunk - 1) / kChunk;
    std::atomic<std::int64_t> next{0};
    std::atomic<bool> stop{false};
    std::mutex failure_mutex;
    std::optional<std::int64_t> failed_index;
    std::string failed_what;

    auto worker = [&] {
        for (;;) {
            const std::int64_t c = next.fetch_add(1);
            if (c >= chunks || stop.load()) return;
            const std::int64_t lo = c * kChunk;
            const std::int64_t hi = std::min(trials, lo + kChunk);
            std::int64_t i = lo;
            try {
                for (; i < hi; ++i) body(c, i);
            } catch (const std::exception& e) {
                std::lock_guard lock(failure_mutex);
                if (!failed_index || i < *failed_index) {
                    failed_index = i;
                    failed_what = e.what();
                }
                stop.store(true);
                return;
            }
        }
    };

    const int n = std::max(1, workers);
    if (n == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        pool.reserve(n);
        for (int w = 0; w < n; ++w) pool.emplace_back(worker);
        for (auto& t : pool) t.join();
    }
    if (failed_index) throw TrialFailure(*failed_index, failed_what);
}

}  // namespace detail

/// Runs exactly `trials` independent trials, trial i drawing from
/// Rng::stream(seed, i), and returns the merged statistics. The result does
/// not depend on `workers`.
inline EstimateStats run_batch(const TrialFn& trial, std::int64_t trials, std::uint64_t seed,
                               int workers = 1) {
    if (trials < 2) throw ConfigError("run_batch: at least 2 trials are required");
    const auto start = std::chrono::steady_clock::now();
    const std::int64_t chunks = (trials + detail::kChunk - 1) / detail::kChunk;
    std::vector<EstimateStats> partial(static_cast<std::size_t>(chunks));
    detail::for_each_chunk(trials, workers, [&](std::int64_t c, std::int64_t i) {
        Rng rng = Rng::stream(seed, static_cast<std::uint64_t>(i));
        partial[static_cast<std::size_t>(c)].add(trial(rng));
    });
    EstimateStats total;
    for (const auto& p : partial) total.merge(p);
    total.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return total;
}

/// Same trials as run_batch, returning the raw values in trial order.
inline std::vector<double> collect_values(const TrialFn& trial, std::int64_t trials,
                                          std::uint64_t seed, int workers = 1) {
    std::vector<double> values(static_cast<std::size_t>(trials));
    detail::for_each_chunk(trials, workers, [&](std::int64_t, std::int64_t i) {
        Rng rng = Rng::stream(seed, static_cast<std::uint64_t>(i));
        values[static_cast<std::size_t>(i)] = trial(rng).value;
    });
    return values;
}

enum class Estimator { parametrix, euler };

inline std::string to_string(Estimator e) { return e == Estimator::parametrix ? "parametrix" : "euler"; }

/// Everything needed to run one estimator on one model.
struct Experiment {
    ModelSpec model;
    Payoff payoff;
    Vec x0;
    EstimatorParams params;
    std::int64_t trials = 50'000;
    std::uint64_t seed = 1;
    int workers = 1;
};

inline TrialFn parametrix_trial(const Experiment& e) {
    return [&e](Rng& rng) { return estimate_once(e.model, e.payoff, e.x0, e.params, rng); };
}

inline TrialFn euler_trial(const Experiment& e, int p_steps) {
    return [&e, p_steps](Rng& rng) {
        return estimate_once_euler_baseline(e.model, e.payoff, e.x0, e.params.horizon, p_steps, rng);
    };
}

/// Fine-grid Euler estimate used as the "nearly exact" value.
struct Reference {
    double value = 0.0;
    double std_error = 0.0;
    std::int64_t trials = 0;
    int p_steps = 0;
    EstimateStats stats;
    std::string provenance;
};

inline Reference compute_reference(const ModelSpec& model, const Payoff& f, const Vec& x0,
                                   double horizon, std::int64_t trials, int p_steps,
                                   std::uint64_t seed, int workers = 1) {
    if (p_steps < 1) throw ConfigError("compute_reference: p_steps must be >= 1");
    Experiment e{model, f, x0, EstimatorParams{}, trials, seed, workers};
    e.params.horizon = horizon;
    const EstimateStats s = run_batch(euler_trial(e, p_steps), trials, seed, workers);
    return {s.mean, s.std_error(), trials, p_steps, s,
            "euler p=" + std::to_string(p_steps) + " M=" + std::to_string(trials)};
}

enum class SweepParam { sigma_a, gamma, epsilon };

inline std::string to_string(SweepParam p) {
    switch (p) {
        case SweepParam::sigma_a: return "sigma_a";
        case SweepParam::gamma: return "gamma";
        case SweepParam::epsilon: return "epsilon";
    }
    return "?";
}

struct SweepResult {
    std::string parameter;
    std::vector<double> grid;
    std::vector<EstimateStats> stats;
    std::optional<double> reference;
    std::string reference_provenance;
};

namespace detail {

inline double median(std::vector<double> v) {
    std::sort(v.begin(), v.end());
    const std::size_t n = v.size();
    return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

/// Runs a batch `repeats` times (identical seed, so identical statistics) and
/// reports the median wall time.
inline EstimateStats timed_batch(const TrialFn& trial, std::int64_t trials, std::uint64_t seed,
                                 int workers, int repeats) {
    std::vector<double> walls;
    EstimateStats s;
    for (int r = 0; r < std::max(1, repeats); ++r) {
        s = run_batch(trial, trials, seed, workers);
        walls.push_back(s.wall_seconds);
    }
    s.wall_seconds = median(walls);
    return s;
}

}  // namespace detail

/// Parametrix estimates across a grid of one design parameter, every value
/// sharing the base seed.
inline SweepResult sweep(SweepParam param, const std::vector<double>& grid, const Experiment& base,
                         int repeats = 3, std::optional<Reference> reference = std::nullopt) {
    if (grid.empty()) throw ConfigError("sweep: grid must be non-empty");
    SweepResult out;
    out.parameter = to_string(param);
    out.grid = grid;
    if (reference) {
        out.reference = reference->value;
        out.reference_provenance = reference->provenance;
    }
    for (double v : grid) {
        Experiment e = base;
        switch (param) {
            case SweepParam::sigma_a: e.params.sigma_a = v; break;
            case SweepParam::gamma: e.params.gamma = v; break;
            case SweepParam::epsilon: e.params.epsilon = v; break;
        }
        e.params.validate();
        out.stats.push_back(
            detail::timed_batch(parametrix_trial(e), e.trials, e.seed, e.workers, repeats));
    }
    return out;
}

struct EfficiencyConfig {
    Estimator estimator = Estimator::parametrix;
    std::int64_t trials = 0;
    int p_steps = 0;  ///< Euler only
};

struct EfficiencyPoint {
    EfficiencyConfig config;
    EstimateStats stats;
    double wall_seconds = 0.0;
    double ci99 = 0.0;
};

/// (wall time, ci99) for each configuration; wall time is the median of
/// `repeats` runs.
inline std::vector<EfficiencyPoint> efficiency_curve(const std::vector<EfficiencyConfig>& configs,
                                                     const Experiment& base, int repeats = 3) {
    std::vector<EfficiencyPoint> out;
    for (const auto& c : configs) {
        const TrialFn trial = c.estimator == Estimator::parametrix ? parametrix_trial(base)
                                                                   : euler_trial(base, c.p_steps);
        const EstimateStats s = detail::timed_batch(trial, c.trials, base.seed, base.workers, repeats);
        out.push_back({c, s, s.wall_seconds, s.ci99()});
    }
    return out;
}

}  // namespace jdmc
