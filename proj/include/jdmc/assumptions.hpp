#pragma once

#include "jdmc/models.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>

namespace jdmc {

struct AssumptionReport {
    int probes = 0;
    double intensity_min = std::numeric_limits<double>::infinity();
    double intensity_max = -std::numeric_limits<double>::infinity();
    double eigen_min = std::numeric_limits<double>::infinity();
    double eigen_max = -std::numeric_limits<double>::infinity();
    double jump_sup = 0.0;
    /// Largest |sigma sigma^T - a| entry.
    double covariance_mismatch = 0.0;
    /// Largest scaled analytic-vs-finite-difference error, |g - fd| / max(1, |g|).
    double derivative_error = 0.0;
    int covariance_clamped_probes = 0;
    int intensity_clamped_probes = 0;

    bool intensity_ok = false;
    bool ellipticity_ok = false;
    bool jump_ok = false;
    bool covariance_ok = false;
    bool derivatives_ok = false;

    bool all_ok() const {
        return intensity_ok && ellipticity_ok && jump_ok && covariance_ok && derivatives_ok;
    }
};

struct ProbeOptions {
    double box_half_width = 10.0;  ///< probes are uniform on [-w, w]^d
    double fd_step = 1e-5;
    double derivative_tol = 1e-6;
    double covariance_tol = 1e-12;
    std::uint64_t seed = 20240601;
};

namespace detail {

inline double scaled_error(double analytic, double fd) {
    return std::abs(analytic - fd) / std::max(1.0, std::abs(analytic));
}

inline bool clamped_near(const ModelSpec& model, const Vec& x, double h) {
    auto hit = [&](const Vec& y) {
        return (model.covariance_clamped && model.covariance_clamped(y)) ||
               (model.intensity_clamped && model.intensity_clamped(y));
    };
    if (hit(x)) return true;
    for (int k = 0; k < model.d; ++k) {
        Vec e = Vec::Zero(model.d);
        e[k] = h;
        if (hit(x + e) || hit(x - e)) return true;
    }
    return false;
}

// Central differences of mu, a, lambda and of the analytic covariance gradient
// (for the contracted second derivatives) at x.
inline double derivative_error_at(const ModelSpec& model, const Vec& x, double h) {
    const int d = model.d;
    const Mat jac = model.drift_jacobian(x);
    const CovarianceGrad grad = model.covariance_grad(x);
    const Mat hess = model.covariance_hess(x);
    const Vec lgrad = model.intensity_grad(x);

    double worst = 0.0;
    for (int k = 0; k < d; ++k) {
        Vec e = Vec::Zero(d);
        e[k] = h;
        const Vec dmu = (model.drift(x + e) - model.drift(x - e)) / (2 * h);
        const Mat da = (model.covariance(x + e) - model.covariance(x - e)) / (2 * h);
        const double dl = (model.intensity(x + e) - model.intensity(x - e)) / (2 * h);
        for (int i = 0; i < d; ++i) {
            worst = std::max(worst, scaled_error(jac(i, k), dmu[i]));
            for (int j = 0; j < d; ++j) worst = std::max(worst, scaled_error(grad[k](i, j), da(i, j)));
        }
        worst = std::max(worst, scaled_error(lgrad[k], dl));
    }
    // d^2 a^{ij} / dx_i dx_j as the x_i-difference of the analytic d a^{ij} / dx_j.
    for (int i = 0; i < d; ++i) {
        Vec e = Vec::Zero(d);
        e[i] = h;
        const CovarianceGrad gp = model.covariance_grad(x + e);
        const CovarianceGrad gm = model.covariance_grad(x - e);
        for (int j = 0; j < d; ++j) {
            const double fd = (gp[j](i, j) - gm[j](i, j)) / (2 * h);
            worst = std::max(worst, scaled_error(hess(i, j), fd));
        }
    }
    return worst;
}

}  // namespace detail

/// Probes a model on a random cloud and reports empirical bounds and
/// pass/fail flags for bounded intensity, uniform ellipticity, bounded jumps,
/// a = sigma sigma^T consistency and analytic derivatives.
inline AssumptionReport check_assumptions(const ModelSpec& model, int probe_cloud_size,
                                          const ProbeOptions& opt = {}) {
    if (probe_cloud_size < 1) throw ConfigError("check_assumptions: probe_cloud_size must be >= 1");

    AssumptionReport r;
    r.probes = probe_cloud_size;
    Rng rng(opt.seed);
    bool spd_everywhere = true;

    for (int n = 0; n < probe_cloud_size; ++n) {
        Vec x(model.d);
        for (int i = 0; i < model.d; ++i)
            x[i] = opt.box_half_width * (2.0 * rng.uniform() - 1.0);

        const double l = model.intensity(x);
        r.intensity_min = std::min(r.intensity_min, l);
        r.intensity_max = std::max(r.intensity_max, l);
        if (model.intensity_clamped && model.intensity_clamped(x)) ++r.intensity_clamped_probes;
        if (model.covariance_clamped && model.covariance_clamped(x)) ++r.covariance_clamped_probes;

        const Mat a = model.covariance(x);
        const Mat s = model.diffusion(x);
        r.covariance_mismatch =
            std::max(r.covariance_mismatch, (s * s.transpose() - a).cwiseAbs().maxCoeff());
        if ((a - a.transpose()).cwiseAbs().maxCoeff() > 0.0) spd_everywhere = false;
        Eigen::LLT<Mat> llt(a);
        if (llt.info() != Eigen::Success) spd_everywhere = false;
        Eigen::SelfAdjointEigenSolver<Mat> eig(a, Eigen::EigenvaluesOnly);
        r.eigen_min = std::min(r.eigen_min, eig.eigenvalues().minCoeff());
        r.eigen_max = std::max(r.eigen_max, eig.eigenvalues().maxCoeff());

        const Vec jump = model.jump(x, model.mark_sampler(rng));
        r.jump_sup = std::max(r.jump_sup, jump.cwiseAbs().maxCoeff());

        if (!detail::clamped_near(model, x, opt.fd_step))
            r.derivative_error =
                std::max(r.derivative_error, detail::derivative_error_at(model, x, opt.fd_step));
    }

    r.intensity_ok = r.intensity_clamped_probes == 0 && model.intensity_lo > 0.0 &&
                     std::isfinite(model.intensity_hi) && r.intensity_min >= model.intensity_lo &&
                     r.intensity_max <= model.intensity_hi;
    r.ellipticity_ok = r.covariance_clamped_probes == 0 && spd_everywhere && model.a_min > 0.0 &&
                       std::isfinite(model.a_max) && r.eigen_min >= model.a_min &&
                       r.eigen_max <= model.a_max;
    r.jump_ok = r.jump_sup <= model.jump_bound;
    r.covariance_ok = spd_everywhere && r.covariance_mismatch <= opt.covariance_tol;
    r.derivatives_ok = r.derivative_error <= opt.derivative_tol;
    return r;
}

}  // namespace jdmc
