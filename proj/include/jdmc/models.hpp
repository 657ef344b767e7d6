#pragma once

#include "jdmc/rng.hpp"
#include "jdmc/types.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <limits>
#include <string>

namespace jdmc {

/// grad[k](i, j) holds the partial derivative of a^{ij} along coordinate k.
using CovarianceGrad = std::array<Mat, kMaxDim>;

/// A jump-diffusion
///
///   dX = mu(X) dt + sigma(X) dW + sum over jumps of h(X-, R),   R ~ nu,
///
/// with jump arrivals at state-dependent rate lambda(X). Besides the
/// coefficients, each model supplies the analytic derivatives the parametrix
/// weights need and the bound constants used by the samplers and the
/// assumption checker. Instances are immutable once built.
struct ModelSpec {
    std::string name;
    int d = 1;  ///< state dimension
    int m = 1;  ///< Brownian dimension

    std::function<Vec(const Vec&)> drift;
    std::function<Mat(const Vec&)> drift_jacobian;  ///< (i, k) = d mu^i / dx_k
    std::function<Mat(const Vec&)> diffusion;       ///< d x m
    std::function<Mat(const Vec&)> covariance;      ///< a = sigma sigma^T
    std::function<CovarianceGrad(const Vec&)> covariance_grad;
    std::function<Mat(const Vec&)> covariance_hess;  ///< (i, j) = d^2 a^{ij} / dx_i dx_j
    std::function<double(const Vec&)> intensity;
    std::function<Vec(const Vec&)> intensity_grad;
    std::function<Vec(const Vec&, const Vec&)> jump;  ///< h(x, r)
    std::function<Vec(Rng&)> mark_sampler;            ///< draws R ~ nu

    // Predicates telling where a floor/cap replaced the raw coefficient. Left
    // empty for models whose coefficients are never clamped.
    std::function<bool(const Vec&)> covariance_clamped;
    std::function<bool(const Vec&)> intensity_clamped;

    double intensity_lo = 0.0;
    double intensity_hi = 0.0;
    double jump_bound = 0.0;
    double a_min = 0.0;
    double a_max = 0.0;

    /// Informational: the model is run even though bounded-coefficient
    /// requirements fail.
    bool assumption_violating = false;
};

/// Target function f with growth constants: |f(x)| <= exp(c1 |x|_1 + c2).
struct Payoff {
    std::string name;
    std::function<double(const Vec&)> f;
    double c1 = 0.0;
    double c2 = 0.0;

    double operator()(const Vec& x) const { return f(x); }
};

struct TrigParams {
    double mu1 = 0.4;
    double mu2 = 0.2;
    double sigma1 = 1.0;
    double sigma2 = 0.2;
    double lambda1 = 0.3;
    double lambda2 = 0.2;
    double lambda3 = 0.2;
    double lambda4 = 0.2;
    /// Marks are uniform on [0, jump_size]^2 and h(x, r) = r.
    double jump_size = 0.1;
};

struct AffineParams {
    double mu1 = 0.6;
    double mu2 = 0.1;
    double mu3 = 0.5;
    double mu4 = 0.2;
    double sigma1 = 1.0;
    double sigma2 = 0.2;
    double lambda1 = 0.3;
    double lambda2 = 0.04;
    double lambda3 = 0.04;
    double jump_size = 0.1;
    double intensity_floor = 1e-6;
    double covariance_floor = 1e-8;
    /// Upper clamp on the intensity; it is also the dominating rate used by
    /// the thinning baseline.
    double intensity_cap = 2.0;
};

/// Constant coefficients in every coordinate, deterministic jump of size
/// `jump` added to each coordinate.
struct ConstantParams {
    int dim = 1;
    double drift = 0.0;
    double vol = 1.0;
    double intensity = 0.3;
    double jump = 0.5;
};

namespace detail {

inline Vec uniform_marks(Rng& rng, int d, double width) {
    Vec r(d);
    for (int i = 0; i < d; ++i) r[i] = width * rng.uniform();
    return r;
}

inline CovarianceGrad zero_grad(int d) {
    CovarianceGrad g;
    for (int k = 0; k < kMaxDim; ++k) g[k] = Mat::Zero(d, d);
    return g;
}

inline void require(bool ok, const std::string& what) {
    if (!ok) throw ConfigError(what);
}

}  // namespace detail

/// Two-dimensional model with bounded trigonometric coefficients:
///
///   dX1 = (mu1 - mu2 sin X1) dt + sqrt(sigma1 + sigma2 sin X1) dW1
///   dX2 = (mu1 - mu2 cos X2) dt + sqrt(sigma1 + sigma2 sin X2) dW2
///   lambda(x) = lambda1 + lambda2 sin(lambda3 x1 + lambda4 x2)
inline ModelSpec build_model_trig(const TrigParams& p = {}) {
    detail::require(p.sigma1 - std::abs(p.sigma2) > 0.0,
                    "trig model: sigma1 - |sigma2| must be positive (ellipticity)");
    detail::require(p.lambda1 - std::abs(p.lambda2) > 0.0,
                    "trig model: lambda1 - |lambda2| must be positive (intensity)");
    detail::require(p.jump_size >= 0.0, "trig model: jump_size must be non-negative");

    ModelSpec m;
    m.name = "trig";
    m.d = 2;
    m.m = 2;
    m.drift = [p](const Vec& x) {
        Vec v(2);
        v << p.mu1 - p.mu2 * std::sin(x[0]), p.mu1 - p.mu2 * std::cos(x[1]);
        return v;
    };
    m.drift_jacobian = [p](const Vec& x) {
        Mat j = Mat::Zero(2, 2);
        j(0, 0) = -p.mu2 * std::cos(x[0]);
        j(1, 1) = p.mu2 * std::sin(x[1]);
        return j;
    };
    m.covariance = [p](const Vec& x) {
        Mat a = Mat::Zero(2, 2);
        a(0, 0) = p.sigma1 + p.sigma2 * std::sin(x[0]);
        a(1, 1) = p.sigma1 + p.sigma2 * std::sin(x[1]);
        return a;
    };
    m.diffusion = [p](const Vec& x) {
        Mat s = Mat::Zero(2, 2);
        s(0, 0) = std::sqrt(p.sigma1 + p.sigma2 * std::sin(x[0]));
        s(1, 1) = std::sqrt(p.sigma1 + p.sigma2 * std::sin(x[1]));
        return s;
    };
    m.covariance_grad = [p](const Vec& x) {
        CovarianceGrad g = detail::zero_grad(2);
        g[0](0, 0) = p.sigma2 * std::cos(x[0]);
        g[1](1, 1) = p.sigma2 * std::cos(x[1]);
        return g;
    };
    m.covariance_hess = [p](const Vec& x) {
        Mat h = Mat::Zero(2, 2);
        h(0, 0) = -p.sigma2 * std::sin(x[0]);
        h(1, 1) = -p.sigma2 * std::sin(x[1]);
        return h;
    };
    m.intensity = [p](const Vec& x) {
        return p.lambda1 + p.lambda2 * std::sin(p.lambda3 * x[0] + p.lambda4 * x[1]);
    };
    m.intensity_grad = [p](const Vec& x) {
        const double c = p.lambda2 * std::cos(p.lambda3 * x[0] + p.lambda4 * x[1]);
        Vec g(2);
        g << c * p.lambda3, c * p.lambda4;
        return g;
    };
    m.jump = [](const Vec&, const Vec& r) { return r; };
    m.mark_sampler = [w = p.jump_size](Rng& rng) { return detail::uniform_marks(rng, 2, w); };

    m.intensity_lo = p.lambda1 - std::abs(p.lambda2);
    m.intensity_hi = p.lambda1 + std::abs(p.lambda2);
    m.jump_bound = p.jump_size;
    m.a_min = p.sigma1 - std::abs(p.sigma2);
    m.a_max = p.sigma1 + std::abs(p.sigma2);
    return m;
}

/// Two-dimensional affine model with square-root diffusion:
///
///   dX1 = (mu1 - mu2 X1) dt + sqrt(sigma1 + sigma2 X1) dW1
///   dX2 = (mu3 - mu4 X2) dt + sqrt(sigma1 + sigma2 X2) dW2
///   lambda(x) = lambda1 + lambda2 x1 + lambda3 x2
///
/// Coefficients are unbounded, so the model is flagged as assumption
/// violating. The covariance diagonal is floored at `covariance_floor` and the
/// intensity is clamped to [intensity_floor, intensity_cap]; derivatives are
/// zero where a clamp is active.
inline ModelSpec build_model_affine(const AffineParams& p = {}) {
    detail::require(p.sigma1 > 0.0, "affine model: sigma1 must be positive");
    detail::require(p.lambda1 > 0.0, "affine model: lambda1 must be positive");
    detail::require(p.intensity_floor > 0.0, "affine model: intensity_floor must be positive");
    detail::require(p.covariance_floor > 0.0, "affine model: covariance_floor must be positive");
    detail::require(p.intensity_cap > p.lambda1,
                    "affine model: intensity_cap must exceed lambda1");
    detail::require(p.jump_size >= 0.0, "affine model: jump_size must be non-negative");

    auto raw_var = [p](double xi) { return p.sigma1 + p.sigma2 * xi; };
    auto raw_lambda = [p](const Vec& x) {
        return p.lambda1 + p.lambda2 * x[0] + p.lambda3 * x[1];
    };

    ModelSpec m;
    m.name = "affine";
    m.d = 2;
    m.m = 2;
    m.assumption_violating = true;
    m.drift = [p](const Vec& x) {
        Vec v(2);
        v << p.mu1 - p.mu2 * x[0], p.mu3 - p.mu4 * x[1];
        return v;
    };
    m.drift_jacobian = [p](const Vec&) {
        Mat j = Mat::Zero(2, 2);
        j(0, 0) = -p.mu2;
        j(1, 1) = -p.mu4;
        return j;
    };
    m.covariance = [p, raw_var](const Vec& x) {
        Mat a = Mat::Zero(2, 2);
        a(0, 0) = std::max(raw_var(x[0]), p.covariance_floor);
        a(1, 1) = std::max(raw_var(x[1]), p.covariance_floor);
        return a;
    };
    m.diffusion = [p, raw_var](const Vec& x) {
        Mat s = Mat::Zero(2, 2);
        s(0, 0) = std::sqrt(std::max(raw_var(x[0]), p.covariance_floor));
        s(1, 1) = std::sqrt(std::max(raw_var(x[1]), p.covariance_floor));
        return s;
    };
    m.covariance_grad = [p, raw_var](const Vec& x) {
        CovarianceGrad g = detail::zero_grad(2);
        g[0](0, 0) = raw_var(x[0]) > p.covariance_floor ? p.sigma2 : 0.0;
        g[1](1, 1) = raw_var(x[1]) > p.covariance_floor ? p.sigma2 : 0.0;
        return g;
    };
    m.covariance_hess = [](const Vec&) { return Mat(Mat::Zero(2, 2)); };
    m.intensity = [p, raw_lambda](const Vec& x) {
        return std::clamp(raw_lambda(x), p.intensity_floor, p.intensity_cap);
    };
    m.intensity_grad = [p, raw_lambda](const Vec& x) {
        const double l = raw_lambda(x);
        Vec g = Vec::Zero(2);
        if (l > p.intensity_floor && l < p.intensity_cap) g << p.lambda2, p.lambda3;
        return g;
    };
    m.jump = [](const Vec&, const Vec& r) { return r; };
    m.mark_sampler = [w = p.jump_size](Rng& rng) { return detail::uniform_marks(rng, 2, w); };
    m.covariance_clamped = [p, raw_var](const Vec& x) {
        return raw_var(x[0]) <= p.covariance_floor || raw_var(x[1]) <= p.covariance_floor;
    };
    m.intensity_clamped = [p, raw_lambda](const Vec& x) {
        const double l = raw_lambda(x);
        return l <= p.intensity_floor || l >= p.intensity_cap;
    };

    m.intensity_lo = p.intensity_floor;
    m.intensity_hi = p.intensity_cap;
    m.jump_bound = p.jump_size;
    m.a_min = p.covariance_floor;
    m.a_max = std::numeric_limits<double>::infinity();
    return m;
}

/// Constant drift, diagonal constant volatility, constant intensity, and a
/// deterministic jump. With dim = 1 this is X_T = x0 + drift T + vol W_T +
/// jump N_T, N_T ~ Poisson(intensity T), which has closed-form moments.
inline ModelSpec build_model_constant(const ConstantParams& p = {}) {
    detail::require(p.dim >= 1 && p.dim <= kMaxDim, "constant model: dim must be in [1, 4]");
    detail::require(p.vol > 0.0, "constant model: vol must be positive");
    detail::require(p.intensity >= 0.0, "constant model: intensity must be non-negative");

    const int d = p.dim;
    ModelSpec m;
    m.name = "custom";
    m.d = d;
    m.m = d;
    m.drift = [p, d](const Vec&) { return Vec(Vec::Constant(d, p.drift)); };
    m.drift_jacobian = [d](const Vec&) { return Mat(Mat::Zero(d, d)); };
    m.diffusion = [p, d](const Vec&) { return Mat(p.vol * Mat::Identity(d, d)); };
    m.covariance = [p, d](const Vec&) { return Mat(p.vol * p.vol * Mat::Identity(d, d)); };
    m.covariance_grad = [d](const Vec&) { return detail::zero_grad(d); };
    m.covariance_hess = [d](const Vec&) { return Mat(Mat::Zero(d, d)); };
    m.intensity = [l = p.intensity](const Vec&) { return l; };
    m.intensity_grad = [d](const Vec&) { return Vec(Vec::Zero(d)); };
    m.jump = [p, d](const Vec&, const Vec&) { return Vec(Vec::Constant(d, p.jump)); };
    m.mark_sampler = [d](Rng&) { return Vec(Vec::Zero(d)); };

    m.intensity_lo = p.intensity;
    m.intensity_hi = p.intensity;
    m.jump_bound = std::abs(p.jump);
    m.a_min = p.vol * p.vol;
    m.a_max = p.vol * p.vol;
    return m;
}

/// f1(x) = 1 if sum_i x_i > k (strict), else 0.
inline Payoff payoff_indicator(double k) {
    return {"indicator", [k](const Vec& x) { return x.sum() > k ? 1.0 : 0.0; }, 0.0, 0.0};
}

/// f2(x) = (sum_i x_i - k)_+. Since s - k <= |x|_1 + max(0, -k) <= exp of the
/// same, c1 = 1 and c2 = max(0, -k).
inline Payoff payoff_call(double k) {
    return {"call", [k](const Vec& x) { return std::max(x.sum() - k, 0.0); }, 1.0,
            std::max(0.0, -k)};
}

}  // namespace jdmc
