#pragma once

// Dense marginal maximum likelihood for small problems.
//
// y ~ N(X beta, V),  V = sigma2_e I + sum_k sigma2_k Z_k Z_k' + pair terms,
//
// with beta profiled out by generalized least squares. V is built explicitly,
// so this is only meant for verification-sized data (n <= kDenseLimit).

#include <ccmm/design.hpp>
#include <ccmm/error.hpp>
#include <ccmm/nelder_mead.hpp>

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>
#include <vector>

namespace ccmm {

inline constexpr std::size_t kDenseLimit = 2000;

/// Variance parameters in design order: scalar variances for simple classifications,
/// one 2x2 block per correlated pair, and the residual variance.
struct VarianceParameters {
    std::vector<double> sigma2;
    std::vector<Eigen::Matrix2d> pair_cov;
    double sigma2_e = 1.0;
};

inline void check_dense_guard(const DesignSet& ds) {
    if (ds.n > kDenseLimit) {
        throw DataError("dense likelihood needs n <= " + std::to_string(kDenseLimit) + " observations, got " +
                        std::to_string(ds.n));
    }
}

inline Eigen::MatrixXd marginal_covariance(const DesignSet& ds, const VarianceParameters& theta) {
    check_dense_guard(ds);
    const auto n = static_cast<Eigen::Index>(ds.n);
    const auto simple = ds.simple_classifications();
    if (theta.sigma2.size() != simple.size() || theta.pair_cov.size() != ds.pairs.size())
        throw DataError("variance parameters do not match the design");
    Eigen::MatrixXd V = theta.sigma2_e * Eigen::MatrixXd::Identity(n, n);
    for (std::size_t s = 0; s < simple.size(); ++s) {
        const auto& a = ds.classifications[simple[s]].assign;
        for (Eigen::Index i = 0; i < n; ++i)
            for (Eigen::Index l = 0; l < n; ++l)
                if (a[static_cast<std::size_t>(i)] == a[static_cast<std::size_t>(l)]) V(i, l) += theta.sigma2[s];
    }
    for (std::size_t p = 0; p < ds.pairs.size(); ++p) {
        const auto& o = ds.classifications[ds.pairs[p].first].assign;
        const auto& d = ds.classifications[ds.pairs[p].second].assign;
        const auto& S = theta.pair_cov[p];
        for (Eigen::Index i = 0; i < n; ++i) {
            const auto ii = static_cast<std::size_t>(i);
            for (Eigen::Index l = 0; l < n; ++l) {
                const auto ll = static_cast<std::size_t>(l);
                double c = 0.0;
                if (o[ii] == o[ll]) c += S(0, 0);
                if (d[ii] == d[ll]) c += S(1, 1);
                if (o[ii] == d[ll]) c += S(0, 1);
                if (d[ii] == o[ll]) c += S(1, 0);
                V(i, l) += c;
            }
        }
    }
    return V;
}

struct ProfileLikelihood {
    double loglik = 0.0;
    Eigen::VectorXd beta_hat;
};

inline ProfileLikelihood profile_loglik(const DesignSet& ds, const Eigen::VectorXd& y,
                                        const VarianceParameters& theta) {
    const Eigen::MatrixXd V = marginal_covariance(ds, theta);
    Eigen::LLT<Eigen::MatrixXd> llt(V);
    if (llt.info() != Eigen::Success) throw NumericalError("marginal covariance is not positive definite");
    const double logdet = 2.0 * llt.matrixLLT().diagonal().array().log().sum();

    ProfileLikelihood out;
    Eigen::VectorXd r = y;
    out.beta_hat = Eigen::VectorXd::Zero(ds.X.cols());
    if (ds.X.cols() > 0) {
        const Eigen::MatrixXd VinvX = llt.solve(ds.X);
        const Eigen::MatrixXd XtVX = ds.X.transpose() * VinvX;
        Eigen::LLT<Eigen::MatrixXd> gls(XtVX);
        const Eigen::VectorXd d = gls.matrixLLT().diagonal();
        if (gls.info() != Eigen::Success || !(d.minCoeff() > 1e-8 * d.maxCoeff()))
            throw NumericalError("X' V^-1 X is singular");
        out.beta_hat = gls.solve(VinvX.transpose() * y);
        r -= ds.X * out.beta_hat;
    }
    const double quad = r.dot(llt.solve(r));
    out.loglik = -0.5 * (static_cast<double>(ds.n) * std::log(2.0 * std::numbers::pi) + logdet + quad);
    return out;
}

struct MlOptions {
    int restarts = 3;  // starts from {1x, 0.1x, 10x} the initial variances, in that order
    double tolerance = 1e-8;
    int max_iterations = 10000;
};

struct MlFit {
    VarianceParameters theta;
    Eigen::VectorXd beta_hat;
    double loglik = -std::numeric_limits<double>::infinity();
    int converged_starts = 0;
    std::vector<double> start_logliks;
};

// log-variance search box; the lower edge is where a vanishing component ends up
inline constexpr double kLogVarianceLower = -23.0;
inline constexpr double kLogVarianceUpper = 23.0;

namespace detail {

inline double clamp_log_variance(double v) { return std::clamp(v, kLogVarianceLower, kLogVarianceUpper); }

inline VarianceParameters unpack_variances(const DesignSet& ds, const std::vector<double>& x) {
    VarianceParameters t;
    std::size_t at = 0;
    for (std::size_t s = 0; s < ds.simple_classifications().size(); ++s)
        t.sigma2.push_back(std::exp(clamp_log_variance(x[at++])));
    for (std::size_t p = 0; p < ds.pairs.size(); ++p) {
        // Cholesky factor with log-diagonal
        Eigen::Matrix2d L = Eigen::Matrix2d::Zero();
        L(0, 0) = std::exp(0.5 * clamp_log_variance(x[at++]));
        L(1, 0) = std::clamp(x[at++], -1e6, 1e6);
        L(1, 1) = std::exp(0.5 * clamp_log_variance(x[at++]));
        t.pair_cov.push_back(L * L.transpose());
    }
    t.sigma2_e = std::exp(clamp_log_variance(x[at++]));
    return t;
}

inline std::vector<double> pack_variances(const VarianceParameters& t) {
    std::vector<double> x;
    for (double v : t.sigma2) x.push_back(std::log(v));
    for (const auto& S : t.pair_cov) {
        const Eigen::Matrix2d L = S.llt().matrixL();
        x.push_back(2.0 * std::log(L(0, 0)));
        x.push_back(L(1, 0));
        x.push_back(2.0 * std::log(L(1, 1)));
    }
    x.push_back(std::log(t.sigma2_e));
    return x;
}

}  // namespace detail

/// Maximizes the profile log-likelihood over the variance parameters by
/// multi-start Nelder-Mead in log-variance space.
inline MlFit ml_fit(const DesignSet& ds, const Eigen::VectorXd& y, const MlOptions& opt = {}) {
    check_dense_guard(ds);
    ds.validate();
    if (static_cast<std::size_t>(y.size()) != ds.n) throw DataError("response length differs from design");

    // initial variances: OLS residual variance split evenly across components
    Eigen::VectorXd resid = y;
    if (ds.X.cols() > 0) {
        const Eigen::VectorXd b = ds.X.colPivHouseholderQr().solve(y);
        resid -= ds.X * b;
    }
    const double dof = std::max<double>(static_cast<double>(ds.n) - 1.0, 1.0);
    const double rv = (resid.array() - resid.mean()).square().sum() / dof;
    const auto simple = ds.simple_classifications();
    const double comps = 1.0 + static_cast<double>(simple.size()) + 2.0 * static_cast<double>(ds.pairs.size());
    const double v0 = std::max(rv / comps, 1e-8);

    auto objective = [&](const std::vector<double>& x) {
        try {
            return -profile_loglik(ds, y, detail::unpack_variances(ds, x)).loglik;
        } catch (const NumericalError&) {
            return HUGE_VAL;
        }
    };

    const double multipliers[] = {1.0, 0.1, 10.0};
    MlFit best;
    std::vector<double> best_x;
    const int starts = std::clamp(opt.restarts, 1, 3);
    for (int s = 0; s < starts; ++s) {
        VarianceParameters init;
        const double v = v0 * multipliers[s];
        init.sigma2.assign(simple.size(), v);
        init.pair_cov.assign(ds.pairs.size(), v * Eigen::Matrix2d::Identity());
        init.sigma2_e = v;

        auto r = nelder_mead(objective, detail::pack_variances(init), 1.0, opt.tolerance, opt.max_iterations);
        // restart from the optimum until it stops moving; guards against simplex collapse
        for (int again = 0; again < 5 && r.converged; ++again) {
            auto r2 = nelder_mead(objective, r.x, 0.25, opt.tolerance, opt.max_iterations);
            const bool moved = r2.value < r.value - opt.tolerance;
            if (r2.value <= r.value) r = r2;
            if (!moved) break;
        }
        best.start_logliks.push_back(-r.value);
        if (!r.converged) continue;
        ++best.converged_starts;
        if (-r.value > best.loglik) {
            best.loglik = -r.value;
            best_x = r.x;
        }
    }
    if (best.converged_starts == 0) {
        throw NumericalError("maximum likelihood: no start converged within " + std::to_string(opt.max_iterations) +
                             " iterations");
    }
    best.theta = detail::unpack_variances(ds, best_x);
    const auto pl = profile_loglik(ds, y, best.theta);
    best.beta_hat = pl.beta_hat;
    best.loglik = pl.loglik;
    return best;
}

/// Parameter names matching VarianceParameters order (same convention as the sampler's draws).
inline std::vector<std::string> variance_names(const DesignSet& ds) {
    std::vector<std::string> out;
    for (auto k : ds.simple_classifications()) out.push_back("sigma2[" + ds.classifications[k].name + "]");
    for (const auto& pr : ds.pairs) {
        out.push_back("cov[" + pr.name + "][0][0]");
        out.push_back("cov[" + pr.name + "][0][1]");
        out.push_back("cov[" + pr.name + "][1][1]");
    }
    out.push_back("sigma2[e]");
    return out;
}

inline std::vector<double> variance_values(const VarianceParameters& t) {
    std::vector<double> out(t.sigma2.begin(), t.sigma2.end());
    for (const auto& S : t.pair_cov) {
        out.push_back(S(0, 0));
        out.push_back(S(0, 1));
        out.push_back(S(1, 1));
    }
    out.push_back(t.sigma2_e);
    return out;
}

}  // namespace ccmm
