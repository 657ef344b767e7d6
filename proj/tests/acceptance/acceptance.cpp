// End-to-end acceptance run. Each criterion prints one PASS/FAIL line; the
// exit status is non-zero if any criterion fails.
//
// Default sizes are the full ones (10^7-trial, 2^12-step Euler references),
// which take about half an hour each on a single core. Use
// --reference-trials and --only for quicker development runs.

#include "jdmc/jdmc.hpp"

#include <CLI11.hpp>
#include <boost/math/distributions/normal.hpp>
#include <boost/math/distributions/poisson.hpp>

#include <chrono>
#include <cstdio>
#include <functional>
#include <iostream>
#include <set>
#include <sstream>
#include <thread>

using namespace jdmc;

namespace {

struct Settings {
    std::int64_t reference_trials = 10'000'000;
    int reference_steps = 4096;
    int workers = 1;
    std::uint64_t seed = 20260101;
};

struct Outcome {
    bool pass = false;
    std::string detail;
};

std::string fmt(double v, int digits = 6) {
    std::ostringstream s;
    s.precision(digits);
    s << v;
    return s.str();
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

Vec origin(int d) { return Vec::Zero(d); }

Reference reference_for(const ModelSpec& m, const Payoff& f, const Settings& s, std::uint64_t seed) {
    std::cerr << "  computing Euler reference for " << m.name << "/" << f.name << " (M="
              << s.reference_trials << ", p=" << s.reference_steps << ") ..." << std::endl;
    return compute_reference(m, f, origin(m.d), 1.0, s.reference_trials, s.reference_steps, seed,
                             s.workers);
}

// 1. Parametrix on the diffusion with phantom jumps against a fine Euler reference.
Outcome diffusion_unbiasedness(const Settings& s) {
    TrigParams p;
    p.lambda2 = 0.0;
    p.jump_size = 0.0;
    const ModelSpec m = build_model_trig(p);
    const Payoff f = payoff_indicator(1.8);
    Experiment e{m, f, origin(2), EstimatorParams{}, 1'000'000, s.seed + 1, s.workers};
    const EstimateStats est = run_batch(parametrix_trial(e), e.trials, e.seed, e.workers);
    const auto t0 = std::chrono::steady_clock::now();
    const Reference ref = reference_for(m, f, s, s.seed + 2);
    const double ref_wall = seconds_since(t0);
    const double diff = std::abs(est.mean - ref.value);
    const double bound = 3.0 * std::hypot(est.std_error(), ref.std_error);
    const bool fast = est.wall_seconds < 300.0;
    return {diff <= bound && fast,
            "parametrix " + fmt(est.mean) + " +- " + fmt(est.std_error(), 3) + " vs reference " +
                fmt(ref.value) + " +- " + fmt(ref.std_error, 3) + ", |diff| " + fmt(diff, 3) +
                " <= " + fmt(bound, 3) + "; parametrix wall " + fmt(est.wall_seconds, 3) +
                "s (< 300s), reference wall " + fmt(ref_wall, 4) + "s"};
}

// 2. d = 1 constant coefficients with deterministic jumps: Poisson mixture of Gaussians.
Outcome poisson_mixture_oracle(const Settings& s) {
    const double lambda = 0.3, delta = 0.5, T = 1.0;
    const boost::math::normal_distribution<> z;
    const boost::math::poisson_distribution<> n_law(lambda * T);
    double oracle = 0.0;
    for (int n = 0; n < 60; ++n) {
        const double mn = delta * n;
        oracle += boost::math::pdf(n_law, n) *
                  (mn * boost::math::cdf(z, mn / std::sqrt(T)) + std::sqrt(T) * boost::math::pdf(z, mn / std::sqrt(T)));
    }
    const ModelSpec m = build_model_constant(ConstantParams{1, 0.0, 1.0, lambda, delta});
    Experiment e{m, payoff_call(0.0), origin(1), EstimatorParams{}, 1'000'000, s.seed + 3, s.workers};
    const EstimateStats est = run_batch(parametrix_trial(e), e.trials, e.seed, e.workers);
    const double diff = std::abs(est.mean - oracle);
    return {diff <= 3.0 * est.std_error(),
            "engine " + fmt(est.mean) + " vs closed form " + fmt(oracle) + ", |diff| " + fmt(diff, 3) +
                " <= 3 stderr = " + fmt(3.0 * est.std_error(), 3)};
}

// 3. Parametrix (M = 5e4) vs Euler (M = 4e3, p = 200) on both models and payoffs.
Outcome cross_estimator(const Settings& s) {
    bool ok = true;
    std::string detail;
    for (const char* model_id : {"trig", "affine"}) {
        const ModelSpec m = std::string(model_id) == "trig" ? build_model_trig() : build_model_affine();
        for (const Payoff& f : {payoff_indicator(1.8), payoff_call(1.8)}) {
            Experiment e{m, f, origin(2), EstimatorParams{}, 50'000, s.seed + 4, s.workers};
            const EstimateStats par = run_batch(parametrix_trial(e), 50'000, e.seed, e.workers);
            const EstimateStats eul = run_batch(euler_trial(e, 200), 4'000, e.seed + 1, e.workers);
            const double diff = std::abs(par.mean - eul.mean);
            const bool agree = diff <= par.ci99() + eul.ci99();
            const bool ci_scale = par.ci99() >= 0.018 / 3 && par.ci99() <= 0.018 * 3;
            ok = ok && agree && ci_scale;
            detail += std::string(detail.empty() ? "" : "; ") + model_id + "/" + f.name + ": " +
                      fmt(par.mean, 4) + " vs " + fmt(eul.mean, 4) + " (|diff| " + fmt(diff, 2) +
                      (agree ? " <= " : " > ") + fmt(par.ci99() + eul.ci99(), 2) + "), ci99 " +
                      fmt(par.ci99(), 3) + (ci_scale ? " in" : " outside") + " [0.006, 0.054]";
        }
    }
    return {ok, detail};
}

// 4. Running second moment of the diffusion weight over 10^6 trials.
Outcome variance_regime(const Settings& s) {
    const ModelSpec m = build_model_trig();
    const Payoff f = payoff_indicator(1.8);
    auto drift_for = [&](double gamma) {
        EstimatorParams params;
        params.gamma = gamma;
        Experiment e{m, f, origin(2), params, 1'000'000, s.seed + 5, s.workers};
        const TrialFn trial = [&e](Rng& rng) {
            const GridPath p = simulate_segment(e.model, e.params, e.x0, e.params.horizon, rng);
            TrialResult r;
            r.value = l2_theta(e.model, e.params, p, e.payoff).weight;
            return r;
        };
        const auto values = collect_values(trial, e.trials, e.seed, e.workers);
        double sum_sq = 0.0, at_decade = 0.0;
        for (std::size_t i = 0; i < values.size(); ++i) {
            sum_sq += values[i] * values[i];
            if (i + 1 == values.size() / 10) at_decade = sum_sq / static_cast<double>(i + 1);
        }
        const double final_moment = sum_sq / static_cast<double>(values.size());
        return std::pair{std::abs(final_moment - at_decade) / final_moment, final_moment};
    };
    const auto [low, low_m2] = drift_for(0.25);
    const auto [high, high_m2] = drift_for(0.75);
    return {low < 0.05 && high > 0.5,
            "gamma=0.25: second moment " + fmt(low_m2, 4) + ", last-decade drift " + fmt(100 * low, 3) +
                "% (< 5%); gamma=0.75: second moment " + fmt(high_m2, 4) + ", drift " +
                fmt(100 * high, 3) + "% (> 50%)"};
}

// 5. Variance across sigma_A at M = 2e6.
Outcome sigma_a_sensitivity(const Settings& s) {
    Experiment e{build_model_trig(), payoff_indicator(1.8), origin(2), EstimatorParams{}, 2'000'000,
                 s.seed + 6, s.workers};
    const std::vector<double> grid{0.01, 0.1, 0.5, 1.0, 5.0};
    const SweepResult r = sweep(SweepParam::sigma_a, grid, e, 1);
    std::vector<double> var;
    for (const auto& st : r.stats) var.push_back(st.var());
    bool ok = true;
    for (int i : {1, 2, 3}) ok = ok && var[i] < var[0] && var[i] < var[4];
    std::string detail = "var:";
    for (std::size_t i = 0; i < grid.size(); ++i) detail += " sigma_a=" + fmt(grid[i], 2) + " -> " + fmt(var[i], 4);
    return {ok, detail};
}

// 6. Grid density, wall time and accuracy across epsilon.
Outcome epsilon_sensitivity(const Settings& s) {
    const ModelSpec m = build_model_trig();
    const Payoff f = payoff_indicator(1.8);
    Experiment e{m, f, origin(2), EstimatorParams{}, 1'000'000, s.seed + 7, s.workers};
    const std::vector<double> grid{0.1, 0.5, 1.0, 5.0};
    const SweepResult r = sweep(SweepParam::epsilon, grid, e, 3);
    const Reference ref = reference_for(m, f, s, s.seed + 8);
    bool ok = true;
    std::string detail = "reference " + fmt(ref.value) + " +- " + fmt(ref.std_error, 3) + ";";
    for (std::size_t i = 0; i < grid.size(); ++i) {
        const EstimateStats& st = r.stats[i];
        if (i > 0) {
            ok = ok && st.grid_points_per_segment() < r.stats[i - 1].grid_points_per_segment();
            ok = ok && st.wall_seconds < r.stats[i - 1].wall_seconds;
        }
        const double bound = 3.0 * std::hypot(st.std_error(), ref.std_error);
        const double diff = std::abs(st.mean - ref.value);
        if (grid[i] >= 0.5) ok = ok && diff <= bound;
        detail += " eps=" + fmt(grid[i], 2) + ": points/segment " + fmt(st.grid_points_per_segment(), 4) +
                  ", wall " + fmt(st.wall_seconds, 3) + "s, mean " + fmt(st.mean, 5) + " (|diff| " +
                  fmt(diff, 2) + " vs 3 stderr " + fmt(bound, 2) + ");";
    }
    return {ok, detail};
}

// 7. Wall time to reach ci99 <= 5e-3: parametrix doubling M, Euler on the
// (4M, 2p) schedule starting from (4e3, 200).
Outcome efficiency(const Settings& s) {
    const double target = 5e-3;
    Experiment e{build_model_trig(), payoff_indicator(1.8), origin(2), EstimatorParams{}, 0, s.seed + 9,
                 s.workers};
    std::int64_t m_par = 50'000;
    EstimateStats par;
    for (;;) {
        par = run_batch(parametrix_trial(e), m_par, e.seed, e.workers);
        if (par.ci99() <= target) break;
        m_par *= 2;
    }
    std::int64_t m_eul = 4'000;
    int p = 200;
    EstimateStats eul;
    for (;;) {
        eul = run_batch(euler_trial(e, p), m_eul, e.seed + 1, e.workers);
        if (eul.ci99() <= target) break;
        m_eul *= 4;
        p *= 2;
    }
    return {par.wall_seconds < eul.wall_seconds,
            "parametrix M=" + std::to_string(m_par) + " ci99 " + fmt(par.ci99(), 3) + " in " +
                fmt(par.wall_seconds, 3) + "s; Euler M=" + std::to_string(m_eul) + " p=" + std::to_string(p) +
                " ci99 " + fmt(eul.ci99(), 3) + " in " + fmt(eul.wall_seconds, 3) + "s"};
}

// 8. Deterministic identities.
Outcome deterministic_suites(const Settings& s) {
    std::vector<std::string> failed;
    auto expect = [&](bool ok, const std::string& what) {
        if (!ok) failed.push_back(what);
    };

    Mat id = Mat::Identity(2, 2);
    Vec x(2);
    x << 1, 0;
    expect(herm1(id, x, 0) == -1.0, "herm1(I, (1,0)) = -1");
    expect(herm2(id, Vec::Zero(2), 0, 0) == -1.0, "herm2(I, 0) = -1");
    Mat d(2, 2);
    d << 2, 0, 0, 4;
    Vec y(2);
    y << 2, 4;
    expect(std::abs(herm2(d, y, 0, 1) - 1.0) < 1e-15, "herm2(diag(2,4), (2,4), 1, 2) = 1");

    expect(beta_Psi(0.0, 1.0, 0.25, 1.0) == 1.0 && beta_Psi(2.0, 1.0, 0.25, 1.0) == 0.0, "Psi endpoints");
    expect(std::abs(beta_psi(1.0, 1.0, 0.25, 1.0) - 0.75 / std::pow(2.0, 0.75)) < 1e-15, "psi closed form");
    expect(std::abs(beta_Psi(1.0, 1.0, 0.25, 1.0) - (1.0 - std::pow(2.0, -0.75))) < 1e-15, "Psi closed form");

    const ModelSpec trig = build_model_trig();
    const EstimatorParams params;
    Rng rng(s.seed);
    double worst = 0.0;
    for (int k = 0; k < 10'000; ++k) {
        const double t_seg = 0.1 + rng.uniform();
        const auto grid = sample_beta_grid(t_seg, params.gamma, params.epsilon, rng);
        const GridPath p = simulate_augmented_path(trig, params, Vec::Zero(2), grid, t_seg, rng);
        double prod = 1.0;
        for (int j = 1; j <= p.grid_points(); ++j)
            prod *= theta_aug(trig, params, p.times[j] - p.times[j - 1], p.states[j - 1], p.states[j]);
        const double a = correction_theta2(trig, params, p);
        const double b = prod / grid_density(grid, t_seg, params.gamma, params.epsilon);
        worst = std::max(worst, std::abs(a - b) / std::max(1.0, std::abs(a)));
    }
    expect(worst <= 1e-12, "Theta2 product form vs p_n form (worst " + fmt(worst, 3) + ")");

    EngineOptions opt;
    opt.check_factor_telescoping = true;
    try {
        for (int k = 0; k < 10'000; ++k) estimate_once(trig, payoff_indicator(1.8), Vec::Zero(2), params, rng, opt);
    } catch (const NumericalError& e) {
        expect(false, std::string("telescoping: ") + e.what());
    }

    std::vector<EstimateStats> parts(3);
    EstimateStats all;
    for (int p = 0; p < 3; ++p)
        for (int i = 0; i < 5000; ++i) {
            const double v = std::exp(rng.normal()) + p;
            parts[p].add(v);
            all.add(v);
        }
    EstimateStats ab = parts[0];
    ab.merge(parts[1]);
    ab.merge(parts[2]);
    EstimateStats bc = parts[1];
    bc.merge(parts[2]);
    EstimateStats a_bc = parts[0];
    a_bc.merge(bc);
    expect(std::abs(ab.mean - a_bc.mean) <= 1e-9 * std::abs(all.mean) &&
               std::abs(ab.var() - a_bc.var()) <= 1e-9 * all.var() &&
               std::abs(ab.var() - all.var()) <= 1e-9 * all.var(),
           "merge associativity");

    Experiment e{trig, payoff_indicator(1.8), Vec::Zero(2), params, 50'000, 11, 1};
    const EstimateStats w1 = run_batch(parametrix_trial(e), e.trials, e.seed, 1);
    const EstimateStats w8 = run_batch(parametrix_trial(e), e.trials, e.seed, 8);
    expect(std::abs(w1.mean - w8.mean) <= 1e-12 * std::abs(w1.mean), "worker-count reproducibility");

    std::string detail = failed.empty() ? "Hermite, psi/Psi, Theta2 p_n form (worst rel " + fmt(worst, 3) +
                                              "), telescoping, merge, worker reproducibility"
                                        : "failed:";
    for (const auto& f : failed) detail += " [" + f + "]";
    return {failed.empty(), detail};
}

}  // namespace

int main(int argc, char** argv) {
    Settings s;
    s.workers = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
    std::vector<int> only;

    CLI::App app{"Acceptance criteria"};
    app.add_option("--reference-trials", s.reference_trials, "trials for the Euler references");
    app.add_option("--reference-steps", s.reference_steps, "steps for the Euler references");
    app.add_option("--workers", s.workers, "worker threads");
    app.add_option("--seed", s.seed, "root seed");
    app.add_option("--only", only, "run only these criteria")->delimiter(',');
    CLI11_PARSE(app, argc, argv);

    const std::vector<std::pair<const char*, std::function<Outcome(const Settings&)>>> criteria{
        {"diffusion-only unbiasedness vs fine Euler reference", diffusion_unbiasedness},
        {"closed-form Poisson mixture oracle", poisson_mixture_oracle},
        {"parametrix vs Euler baseline consistency and CI scale", cross_estimator},
        {"second-moment regime in gamma", variance_regime},
        {"sigma_A sensitivity of the variance", sigma_a_sensitivity},
        {"epsilon sensitivity of grid density, time and accuracy", epsilon_sensitivity},
        {"efficiency crossover at ci99 <= 5e-3", efficiency},
        {"deterministic identities", deterministic_suites},
    };
    const std::set<int> selected(only.begin(), only.end());

    int failures = 0;
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        const int number = static_cast<int>(i) + 1;
        if (!selected.empty() && !selected.count(number)) continue;
        const auto t0 = std::chrono::steady_clock::now();
        Outcome o;
        try {
            o = criteria[i].second(s);
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        failures += !o.pass;
        std::cout << (o.pass ? "PASS" : "FAIL") << " criterion " << number << " (" << criteria[i].first
                  << ", " << fmt(seconds_since(t0), 4) << "s): " << o.detail << std::endl;
    }
    return failures == 0 ? 0 : 1;
}
