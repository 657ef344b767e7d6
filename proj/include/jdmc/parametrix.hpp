#pragma once

#include "jdmc/models.hpp"

#include <cmath>
#include <limits>
#include <string>
#include <vector>

namespace jdmc {

/// Design knobs of the unbiased diffusion estimator.
struct EstimatorParams {
    double sigma_a = 0.5;  ///< scale of the auxiliary noise on the A-bar coordinate
    double gamma = 0.25;   ///< Beta tail exponent of the grid interarrivals
    double epsilon = 1.0;  ///< support of the interarrival law is [0, T_seg + epsilon]
    double horizon = 1.0;  ///< T
    double t_min = 1e-12;  ///< grid points closer than this to a neighbour are dropped

    /// Throws ConfigError naming the violated constraint.
    void validate() const {
        if (!(sigma_a > 0.0) || !std::isfinite(sigma_a))
            throw ConfigError("sigma_a must be positive and finite");
        if (!(gamma > 0.0 && gamma < 1.0)) throw ConfigError("gamma must lie in (0, 1)");
        if (!(epsilon > 0.0) || !std::isfinite(epsilon))
            throw ConfigError("epsilon must be positive and finite");
        if (!(horizon > 0.0) || !std::isfinite(horizon))
            throw ConfigError("horizon must be positive and finite");
        if (!(t_min >= 0.0)) throw ConfigError("t_min must be non-negative");
    }

    bool finite_variance_regime() const { return gamma > 0.0 && gamma < 0.5; }

    /// Non-fatal diagnostics; gamma outside (0, 1/2) is allowed so that the
    /// sensitivity studies can probe it.
    std::vector<std::string> warnings() const {
        std::vector<std::string> w;
        if (!finite_variance_regime())
            w.push_back("gamma = " + std::to_string(gamma) +
                        " is outside (0, 1/2); finite estimator variance is not guaranteed");
        return w;
    }
};

/// A point z = (y, a_bar) of the augmented process.
struct AugmentedState {
    Vec y;
    double a_bar = 0.0;
};

/// Euler path of the augmented process on one random grid. `times` runs from
/// 0 through the interior grid points to the terminal time `segment_length`;
/// `states[k]` is the state at `times[k]`.
struct GridPath {
    double segment_length = 0.0;
    std::vector<double> times;
    std::vector<AugmentedState> states;

    int grid_points() const { return static_cast<int>(times.size()) - 2; }
    const AugmentedState& terminal() const { return states.back(); }
};

/// Weight and terminal state of one segment estimator.
struct SegmentOutcome {
    double weight = 0.0;
    Vec terminal_y;
    double terminal_a_bar = 0.0;
};

// --- Hermite polynomials of the Gaussian kernel --------------------------

namespace detail {

/// Cholesky of an SPD matrix; throws NumericalError when it fails.
inline Eigen::LLT<Mat> spd_factor(const Mat& m, const char* what) {
    Eigen::LLT<Mat> llt(m);
    if (llt.info() != Eigen::Success) throw NumericalError(std::string(what) + ": matrix is not SPD");
    return llt;
}

/// M^{-1} x and the entries of M^{-1}, both obtained from triangular solves.
struct HermiteTerms {
    Vec v;     ///< M^{-1} x
    Mat minv;  ///< M^{-1}

    HermiteTerms(const Eigen::LLT<Mat>& llt, const Vec& x, double scale = 1.0)
        : v(llt.solve(x) / scale),
          minv(llt.solve(Mat(Mat::Identity(x.size(), x.size()))) / scale) {}

    double h1(int i) const { return -v[i]; }
    double h2(int i, int j) const { return v[i] * v[j] - minv(i, j); }
};

}  // namespace detail

/// First-order Hermite polynomial H^i_M(x) = -(M^{-1} x)_i.
inline double herm1(const Mat& mmat, const Vec& x, int i) {
    return detail::HermiteTerms(detail::spd_factor(mmat, "herm1"), x).h1(i);
}

/// Second-order Hermite polynomial H^{ij}_M(x) = (M^{-1}x)_i (M^{-1}x)_j - (M^{-1})_{ij}.
inline double herm2(const Mat& mmat, const Vec& x, int i, int j) {
    return detail::HermiteTerms(detail::spd_factor(mmat, "herm2"), x).h2(i, j);
}

// --- Parametrix weights --------------------------------------------------

/// Weight of one Euler transition y1 -> y2 over time t for the diffusion part:
///
///   1/2 sum_ij [ d2_ij a^ij(y2) + d_j a^ij(y2) H^i + d_i a^ij(y2) H^j
///                + (a^ij(y2) - a^ij(y1)) H^ij ]
///   - sum_i [ d_i mu^i(y2) + (mu^i(y2) - mu^i(y1)) H^i ]
///
/// with Hermite polynomials taken at M = t a(y1), argument y2 - y1 - t mu(y1).
inline double vartheta(const ModelSpec& model, double t, const Vec& y1, const Vec& y2) {
    if (!(t > 0.0)) throw NumericalError("vartheta: t must be positive");
    const int d = model.d;
    const Mat a1 = model.covariance(y1);
    const Vec mu1 = model.drift(y1);
    // M = t a1, so M^{-1} = a1^{-1} / t.
    const detail::HermiteTerms herm(detail::spd_factor(a1, "vartheta"), Vec(y2 - y1 - t * mu1), t);

    const Mat a2 = model.covariance(y2);
    const CovarianceGrad da2 = model.covariance_grad(y2);
    const Mat d2a2 = model.covariance_hess(y2);
    const Vec mu2 = model.drift(y2);
    const Mat dmu2 = model.drift_jacobian(y2);

    double diffusion_part = 0.0;
    double drift_part = 0.0;
    for (int i = 0; i < d; ++i) {
        for (int j = 0; j < d; ++j) {
            diffusion_part += d2a2(i, j) + da2[j](i, j) * herm.h1(i) + da2[i](i, j) * herm.h1(j) +
                              (a2(i, j) - a1(i, j)) * herm.h2(i, j);
        }
        drift_part += dmu2(i, i) + (mu2[i] - mu1[i]) * herm.h1(i);
    }
    return 0.5 * diffusion_part - drift_part;
}

/// Transition weight of the augmented process: vartheta plus the
/// contribution of the A-bar coordinate,
/// (lambda(y2) - lambda(y1)) (a2 - a1 - lambda(y1) t) / (t sigma_A^2).
inline double theta_aug(const ModelSpec& model, const EstimatorParams& params, double t,
                        const AugmentedState& z1, const AugmentedState& z2) {
    const double l1 = model.intensity(z1.y);
    const double l2 = model.intensity(z2.y);
    const double s2 = params.sigma_a * params.sigma_a;
    return vartheta(model, t, z1.y, z2.y) +
           (l2 - l1) * ((z2.a_bar - z1.a_bar - l1 * t) / (t * s2));
}

// --- Beta interarrival law -----------------------------------------------

/// Interarrival density (1 - gamma) / (t^gamma (T_seg + eps)^(1 - gamma)).
inline double beta_psi(double t, double t_seg, double gamma, double eps) {
    const double span = t_seg + eps;
    if (!(t > 0.0 && t <= span)) throw NumericalError("beta_psi: t outside (0, T_seg + eps]");
    return (1.0 - gamma) / (std::pow(t, gamma) * std::pow(span, 1.0 - gamma));
}

/// Survival function 1 - (t / (T_seg + eps))^(1 - gamma).
inline double beta_Psi(double t, double t_seg, double gamma, double eps) {
    const double span = t_seg + eps;
    if (!(t >= 0.0 && t <= span)) throw NumericalError("beta_Psi: t outside [0, T_seg + eps]");
    return 1.0 - std::pow(t / span, 1.0 - gamma);
}

/// Inverse CDF of the interarrival law.
inline double beta_quantile(double u, double t_seg, double gamma, double eps) {
    return (t_seg + eps) * std::pow(u, 1.0 / (1.0 - gamma));
}

/// Interior grid points of one segment: partial sums of i.i.d. Beta
/// interarrivals that fall strictly below t_seg. Points within t_min of their
/// predecessor or of t_seg are dropped.
inline std::vector<double> sample_beta_grid(double t_seg, double gamma, double eps, Rng& rng,
                                            double t_min = 1e-12) {
    std::vector<double> grid;
    double last = 0.0;
    double s = 0.0;
    for (;;) {
        s += beta_quantile(rng.uniform(), t_seg, gamma, eps);
        if (s >= t_seg) break;
        if (s - last > t_min && t_seg - s > t_min) {
            grid.push_back(s);
            last = s;
        }
    }
    return grid;
}

/// Joint density p_n of the first n arrival times of the grid process
/// together with no arrival in (s_n, t_seg].
inline double grid_density(const std::vector<double>& grid, double t_seg, double gamma, double eps) {
    const double span = t_seg + eps;
    const double s_n = grid.empty() ? 0.0 : grid.back();
    double p = 1.0 - std::pow((t_seg - s_n) / span, 1.0 - gamma);
    const double c = (1.0 - gamma) / std::pow(span, 1.0 - gamma);
    double prev = 0.0;
    for (double s : grid) {
        p *= c / std::pow(s - prev, gamma);
        prev = s;
    }
    return p;
}

// --- Euler path of the augmented process ---------------------------------

/// Simulates (Y, A-bar) from (x0, 0) through `grid` and on to `t_seg`:
///
///   y' = y + mu(y) dt + chol(a(y)) sqrt(dt) xi
///   a' = a + lambda(y) dt + sigma_A sqrt(dt) xi_bar
///
/// `Noise` needs a `normal()` member; tests substitute a zero source.
template <class Noise>
GridPath simulate_augmented_path(const ModelSpec& model, const EstimatorParams& params,
                                 const Vec& x0, const std::vector<double>& grid, double t_seg,
                                 Noise& noise) {
    GridPath path;
    path.segment_length = t_seg;
    path.times.reserve(grid.size() + 2);
    path.states.reserve(grid.size() + 2);
    path.times.push_back(0.0);
    path.states.push_back({x0, 0.0});

    const int d = model.d;
    Vec xi(d);
    auto step_to = [&](double t_next) {
        const AugmentedState& z = path.states.back();
        const double dt = t_next - path.times.back();
        const double sq = std::sqrt(dt);
        const Mat a = model.covariance(z.y);
        Eigen::LLT<Mat> llt(a);
        if (llt.info() != Eigen::Success)
            throw NumericalError("covariance not SPD at state " + format_state(z.y));
        for (int i = 0; i < d; ++i) xi[i] = noise.normal();
        const Vec shock = llt.matrixL() * xi;
        AugmentedState next;
        next.y = z.y + model.drift(z.y) * dt + sq * shock;
        next.a_bar = z.a_bar + model.intensity(z.y) * dt + params.sigma_a * sq * noise.normal();
        path.times.push_back(t_next);
        path.states.push_back(std::move(next));
    };
    for (double t : grid) step_to(t);
    step_to(t_seg);
    return path;
}

/// Correction functional
///
///   Theta_2 = 1 / Psi(T_seg - tau_N) * prod_k theta(z_{k-1}, z_k) / psi(tau_k - tau_{k-1})
///
/// using the segment length as the horizon of the Beta law.
inline double correction_theta2(const ModelSpec& model, const EstimatorParams& params,
                                const GridPath& path) {
    const double t_seg = path.segment_length;
    const int n = path.grid_points();
    double w = 1.0;
    for (int k = 1; k <= n; ++k) {
        const double dt = path.times[k] - path.times[k - 1];
        w *= theta_aug(model, params, dt, path.states[k - 1], path.states[k]) /
             beta_psi(dt, t_seg, params.gamma, params.epsilon);
    }
    return w / beta_Psi(t_seg - path.times[n], t_seg, params.gamma, params.epsilon);
}

/// exp(-a_bar_T + T lambda(x0)) * lambda(y_T) / lambda(x0) * Theta_2
inline SegmentOutcome l1_theta(const ModelSpec& model, const EstimatorParams& params,
                               const GridPath& path) {
    const AugmentedState& z0 = path.states.front();
    const AugmentedState& zt = path.terminal();
    const double l0 = model.intensity(z0.y);
    const double w = std::exp(-zt.a_bar + path.segment_length * l0) * (model.intensity(zt.y) / l0) *
                     correction_theta2(model, params, path);
    return {w, zt.y, zt.a_bar};
}

/// exp(-a_bar_T + T lambda(x0)) * f(y_T) * Theta_2
inline SegmentOutcome l2_theta(const ModelSpec& model, const EstimatorParams& params,
                               const GridPath& path, const Payoff& f) {
    const AugmentedState& z0 = path.states.front();
    const AugmentedState& zt = path.terminal();
    const double w = std::exp(-zt.a_bar + path.segment_length * model.intensity(z0.y)) * f(zt.y) *
                     correction_theta2(model, params, path);
    return {w, zt.y, zt.a_bar};
}

/// Beta grid plus Euler path for one segment of length t_seg.
inline GridPath simulate_segment(const ModelSpec& model, const EstimatorParams& params,
                                 const Vec& x0, double t_seg, Rng& rng) {
    const auto grid = sample_beta_grid(t_seg, params.gamma, params.epsilon, rng, params.t_min);
    return simulate_augmented_path(model, params, x0, grid, t_seg, rng);
}

}  // namespace jdmc
