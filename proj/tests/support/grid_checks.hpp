#pragma once

// Numeric checks of the sampler's full conditionals: each conditional density is
// recomputed by normalizing exp(log_joint) over a grid of the updated block and
// compared pointwise with the closed form. Trapezoid sums over smooth,
// fast-decaying integrands converge geometrically, so the grid results are
// accurate far below the comparison tolerance.

#include <ccmm/sampler.hpp>

#include <Eigen/Dense>

#include <cmath>
#include <functional>
#include <numbers>
#include <string>
#include <vector>

namespace ccmm::check {

inline std::vector<double> linspace(double lo, double hi, int n) {
    std::vector<double> g(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) g[static_cast<std::size_t>(i)] = lo + (hi - lo) * i / (n - 1);
    return g;
}

inline double normal_pdf(double x, double mean, double var) {
    return std::exp(-0.5 * (x - mean) * (x - mean) / var) / std::sqrt(2.0 * std::numbers::pi * var);
}

inline double normal2_pdf(const Eigen::Vector2d& x, const Eigen::Vector2d& mean, const Eigen::Matrix2d& cov) {
    const Eigen::Vector2d d = x - mean;
    return std::exp(-0.5 * d.dot(cov.inverse() * d)) / (2.0 * std::numbers::pi * std::sqrt(cov.determinant()));
}

// Normalizes exp(logf) over a 1-D grid (with an optional Jacobian from grid
// coordinate to the parameter) and returns the max abs difference from `closed`.
inline double compare_1d(const std::vector<double>& grid, const std::function<double(double)>& logf,
                         const std::function<double(double)>& jacobian, const std::function<double(double)>& closed) {
    std::vector<double> lf(grid.size());
    double peak = -HUGE_VAL;
    for (std::size_t i = 0; i < grid.size(); ++i) peak = std::max(peak, lf[i] = logf(grid[i]));
    const double h = grid[1] - grid[0];
    double z = 0.0;
    for (std::size_t i = 0; i < grid.size(); ++i) {
        const double w = (i == 0 || i + 1 == grid.size()) ? 0.5 : 1.0;
        z += w * std::exp(lf[i] - peak) * jacobian(grid[i]) * h;
    }
    double err = 0.0;
    for (std::size_t i = 0; i < grid.size(); ++i)
        err = std::max(err, std::abs(std::exp(lf[i] - peak) / z - closed(grid[i])));
    return err;
}

struct ConditionalErrors {
    std::vector<std::pair<std::string, double>> items;
    double max() const {
        double m = 0.0;
        for (const auto& [_, e] : items) m = std::max(m, e);
        return m;
    }
};

// Checks every scalar/vector block of the state against its closed form.
inline ConditionalErrors check_conditionals(const GibbsKernel& kernel, const ChainState& base) {
    ConditionalErrors out;
    const auto& ds = kernel.design();
    auto lj = [&](const ChainState& s) { return kernel.log_joint(s).total(); };

    // fixed effects, one coordinate at a time (conditional on the others)
    for (Eigen::Index j = 0; j < base.beta.size(); ++j) {
        const auto g = kernel.beta_conditional(base);
        // conditional of coordinate j given the other coordinates of beta
        const Eigen::MatrixXd P = g.covariance.inverse();
        const double var = 1.0 / P(j, j);
        double mean = g.mean[j];
        for (Eigen::Index l = 0; l < base.beta.size(); ++l)
            if (l != j) mean -= var * P(j, l) * (base.beta[l] - g.mean[l]);
        ChainState s = base;
        const double err = compare_1d(
            linspace(mean - 40.0 * std::sqrt(var), mean + 40.0 * std::sqrt(var), 4001),
            [&](double b) {
                s.beta[j] = b;
                return lj(s);
            },
            [](double) { return 1.0; }, [&](double b) { return normal_pdf(b, mean, var); });
        out.items.push_back({"beta[" + std::to_string(j) + "]", err});
    }

    // scalar random effects and their variances
    for (auto k : ds.simple_classifications()) {
        for (std::size_t c = 0; c < ds.classifications[k].J(); ++c) {
            const auto cond = kernel.effect_conditional(base, k, c);
            ChainState s = base;
            const double sd = std::sqrt(cond.variance);
            const double err = compare_1d(
                linspace(cond.mean - 40.0 * sd, cond.mean + 40.0 * sd, 4001),
                [&](double u) {
                    s.u[k][static_cast<Eigen::Index>(c)] = u;
                    return lj(s);
                },
                [](double) { return 1.0; }, [&](double u) { return normal_pdf(u, cond.mean, cond.variance); });
            out.items.push_back({"u[" + ds.classifications[k].name + "][" + std::to_string(c) + "]", err});
        }
        const auto ig = kernel.variance_conditional(base, k);
        ChainState s = base;
        // grid over log variance; density reported on the variance scale
        const double err = compare_1d(
            linspace(-30.0, 30.0, 12001),
            [&](double t) {
                s.sigma2[k] = std::exp(t);
                return lj(s);
            },
            [](double t) { return std::exp(t); },
            [&](double t) { return std::exp(log_inv_gamma_density(std::exp(t), ig.shape, ig.scale)); });
        out.items.push_back({"sigma2[" + ds.classifications[k].name + "]", err});
    }

    // residual variance
    {
        const auto ig = kernel.residual_variance_conditional(base);
        ChainState s = base;
        const double err = compare_1d(
            linspace(-30.0, 30.0, 12001),
            [&](double t) {
                s.sigma2_e = std::exp(t);
                return lj(s);
            },
            [](double t) { return std::exp(t); },
            [&](double t) { return std::exp(log_inv_gamma_density(std::exp(t), ig.shape, ig.scale)); });
        out.items.push_back({"sigma2[e]", err});
    }

    // correlated pairs: each unit's 2-vector, then the covariance
    for (std::size_t p = 0; p < ds.pairs.size(); ++p) {
        const auto& pr = ds.pairs[p];
        for (std::size_t c = 0; c < ds.classifications[pr.first].J(); ++c) {
            const auto g = kernel.pair_effect_conditional(base, p, c);
            const Eigen::Vector2d m = g.mean;
            const double r0 = 14.0 * std::sqrt(g.covariance(0, 0)), r1 = 14.0 * std::sqrt(g.covariance(1, 1));
            const auto ga = linspace(m[0] - r0, m[0] + r0, 401), gb = linspace(m[1] - r1, m[1] + r1, 401);
            ChainState s = base;
            Eigen::MatrixXd lf(401, 401);
            double peak = -HUGE_VAL;
            for (int i = 0; i < 401; ++i)
                for (int l = 0; l < 401; ++l) {
                    s.u[pr.first][static_cast<Eigen::Index>(c)] = ga[static_cast<std::size_t>(i)];
                    s.u[pr.second][static_cast<Eigen::Index>(c)] = gb[static_cast<std::size_t>(l)];
                    peak = std::max(peak, lf(i, l) = lj(s));
                }
            const double ha = ga[1] - ga[0], hb = gb[1] - gb[0];
            double z = 0.0;
            for (int i = 0; i < 401; ++i)
                for (int l = 0; l < 401; ++l) {
                    const double w = ((i == 0 || i == 400) ? 0.5 : 1.0) * ((l == 0 || l == 400) ? 0.5 : 1.0);
                    z += w * std::exp(lf(i, l) - peak) * ha * hb;
                }
            double err = 0.0;
            for (int i = 0; i < 401; ++i)
                for (int l = 0; l < 401; ++l) {
                    const Eigen::Vector2d x(ga[static_cast<std::size_t>(i)], gb[static_cast<std::size_t>(l)]);
                    err = std::max(err, std::abs(std::exp(lf(i, l) - peak) / z - normal2_pdf(x, m, g.covariance)));
                }
            out.items.push_back({"pair[" + pr.name + "][" + std::to_string(c) + "]", err});
        }

        // covariance over (log s11, log s22, atanh rho)
        const auto iw = kernel.pair_cov_conditional(base, p);
        const auto t1 = linspace(-14.0, 16.0, 151), t2 = linspace(-14.0, 16.0, 151), tz = linspace(-7.0, 7.0, 141);
        auto to_cov = [](double a, double b, double zc) {
            const double s11 = std::exp(a), s22 = std::exp(b), rho = std::tanh(zc);
            Eigen::Matrix2d S;
            S << s11, rho * std::sqrt(s11 * s22), rho * std::sqrt(s11 * s22), s22;
            return S;
        };
        auto jac = [](double a, double b, double zc) {
            const double rho = std::tanh(zc);
            return std::exp(a) * std::exp(b) * std::sqrt(std::exp(a + b)) * (1.0 - rho * rho);
        };
        ChainState s = base;
        std::vector<double> lf(t1.size() * t2.size() * tz.size());
        double peak = -HUGE_VAL;
        std::size_t at = 0;
        for (double a : t1)
            for (double b : t2)
                for (double zc : tz) {
                    s.pair_cov[p] = to_cov(a, b, zc);
                    peak = std::max(peak, lf[at++] = lj(s));
                }
        const double vol = (t1[1] - t1[0]) * (t2[1] - t2[0]) * (tz[1] - tz[0]);
        double z = 0.0;
        at = 0;
        for (std::size_t i = 0; i < t1.size(); ++i)
            for (std::size_t l = 0; l < t2.size(); ++l)
                for (std::size_t m = 0; m < tz.size(); ++m) {
                    const double w = ((i == 0 || i + 1 == t1.size()) ? 0.5 : 1.0) *
                                     ((l == 0 || l + 1 == t2.size()) ? 0.5 : 1.0) *
                                     ((m == 0 || m + 1 == tz.size()) ? 0.5 : 1.0);
                    z += w * std::exp(lf[at++] - peak) * jac(t1[i], t2[l], tz[m]) * vol;
                }
        double err = 0.0;
        at = 0;
        for (double a : t1)
            for (double b : t2)
                for (double zc : tz) {
                    const double closed = std::exp(log_inv_wishart_density(to_cov(a, b, zc), iw.df, iw.scale));
                    err = std::max(err, std::abs(std::exp(lf[at++] - peak) / z - closed));
                }
        out.items.push_back({"cov[" + pr.name + "]", err});
    }
    return out;
}

}  // namespace ccmm::check
