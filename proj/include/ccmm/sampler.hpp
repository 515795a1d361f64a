#pragma once

// Gibbs sampler for the Gaussian cross-classified random-intercept model
//
//   y_i = x_i' beta + sum_k u^(k)_{c_k(i)} + e_i,
//   u^(k)_j ~ N(0, sigma2_k),  e_i ~ N(0, sigma2_e),
//
// with correlated pairs (origin, dest) whose per-unit effect vectors are
// bivariate normal with a 2x2 covariance. Every update is an exact draw from
// its conjugate full conditional.

#include <ccmm/design.hpp>
#include <ccmm/draws.hpp>
#include <ccmm/error.hpp>
#include <ccmm/rng.hpp>

#include <Eigen/Dense>

#include <cmath>
#include <cstdint>
#include <exception>
#include <limits>
#include <map>
#include <numbers>
#include <string>
#include <thread>
#include <vector>

namespace ccmm {

struct InvGammaPrior {
    double shape = 0.001;
    double scale = 0.001;
};

struct PriorSpec {
    InvGammaPrior variance;                         // default for every scalar variance
    std::map<std::string, InvGammaPrior> overrides;  // by classification name, "e" for the residual
    double pair_df = 3.0;
    Eigen::Matrix2d pair_scale = Eigen::Matrix2d::Identity();

    InvGammaPrior for_variance(const std::string& name) const {
        auto it = overrides.find(name);
        return it == overrides.end() ? variance : it->second;
    }

    void validate() const {
        auto check = [](const InvGammaPrior& p, const std::string& what) {
            if (!(p.shape > 0.0) || !(p.scale > 0.0))
                throw DataError("inverse-gamma prior for " + what + " needs shape > 0 and scale > 0");
        };
        check(variance, "variances");
        for (const auto& [k, p] : overrides) check(p, k);
        if (!(pair_df > 1.0)) throw DataError("inverse-Wishart degrees of freedom must exceed 1");
        Eigen::LLT<Eigen::Matrix2d> llt(pair_scale);
        if (llt.info() != Eigen::Success || std::abs(pair_scale(0, 1) - pair_scale(1, 0)) > 1e-12)
            throw NumericalError("inverse-Wishart scale matrix is not symmetric positive definite");
    }
};

struct McmcControl {
    int iterations = 5000;
    int burnin = 500;
    int thin = 1;
    int chains = 2;
    std::uint64_t seed = 1;
    // Extra exact move per sweep: translate each classification's effects against
    // the intercept. Helps the intercept mix when clusters are few and large.
    bool recenter = false;

    void validate() const {
        if (iterations <= burnin) throw DataError("iterations must exceed burn-in");
        if (burnin < 0) throw DataError("burn-in must be non-negative");
        if (thin < 1) throw DataError("thin must be at least 1");
        if (chains < 1) throw DataError("at least one chain is required");
    }
};

inline constexpr double kVarianceFloor = 1e-12;

struct ChainState {
    Eigen::VectorXd beta;
    std::vector<Eigen::VectorXd> u;  // per classification, length J_k
    std::vector<double> sigma2;      // per classification; unused (NaN) for paired classifications
    double sigma2_e = 1.0;
    std::vector<Eigen::Matrix2d> pair_cov;
    RandomStream rng;
    std::uint64_t iteration = 0;
};

struct NormalConditional {
    double mean;
    double variance;
};

struct GaussianConditional {
    Eigen::VectorXd mean;
    Eigen::MatrixXd covariance;
};

struct InvGammaConditional {
    double shape;
    double scale;
};

struct InvWishartConditional {
    double df;
    Eigen::Matrix2d scale;
};

/// Conditional of one random intercept given the sum of its cluster's partial residuals.
inline NormalConditional cluster_conditional(double partial_sum, double count, double sigma2_e,
                                             double sigma2_k) {
    const double denom = count + sigma2_e / sigma2_k;
    return {partial_sum / denom, sigma2_e / denom};
}

inline InvGammaConditional inv_gamma_update(const InvGammaPrior& prior, double count, double sum_squares) {
    return {prior.shape + 0.5 * count, prior.scale + 0.5 * sum_squares};
}

inline double log_inv_gamma_density(double x, double shape, double scale) {
    return shape * std::log(scale) - std::lgamma(shape) - (shape + 1.0) * std::log(x) - scale / x;
}

/// log density of a 2x2 inverse-Wishart(df, scale) at sigma.
inline double log_inv_wishart_density(const Eigen::Matrix2d& sigma, double df, const Eigen::Matrix2d& scale) {
    constexpr double p = 2.0;
    const double log_gamma2 = 0.5 * std::log(std::numbers::pi) + std::lgamma(0.5 * df) + std::lgamma(0.5 * df - 0.5);
    return 0.5 * df * std::log(scale.determinant()) - 0.5 * df * p * std::numbers::ln2 - log_gamma2 -
           0.5 * (df + p + 1.0) * std::log(sigma.determinant()) - 0.5 * (scale * sigma.inverse()).trace();
}

struct LogJoint {
    double likelihood = 0.0;
    double random_effects = 0.0;
    double priors = 0.0;
    double total() const noexcept { return likelihood + random_effects + priors; }
};

inline std::vector<std::string> parameter_names(const DesignSet& ds) {
    std::vector<std::string> names;
    for (std::size_t j = 0; j < ds.p(); ++j) names.push_back("beta[" + std::to_string(j) + "]");
    for (auto k : ds.simple_classifications()) names.push_back("sigma2[" + ds.classifications[k].name + "]");
    for (const auto& pr : ds.pairs) {
        names.push_back("cov[" + pr.name + "][0][0]");
        names.push_back("cov[" + pr.name + "][0][1]");
        names.push_back("cov[" + pr.name + "][1][1]");
        names.push_back("corr[" + pr.name + "]");
    }
    names.push_back("sigma2[e]");
    return names;
}

class GibbsKernel {
public:
    GibbsKernel(const DesignSet& ds, const Eigen::VectorXd& y, PriorSpec prior)
        : ds_(ds), y_(y), prior_(std::move(prior)) {
        ds_.validate();
        prior_.validate();
        if (static_cast<std::size_t>(y_.size()) != ds_.n) throw DataError("response length differs from design");
        if (!y_.allFinite()) throw DataError("response has non-finite values");

        members_.reserve(ds_.classifications.size());
        for (const auto& c : ds_.classifications) members_.push_back(group_members(c));

        if (ds_.p() > 0) {
            xtx_llt_.compute(ds_.X.transpose() * ds_.X);
            const Eigen::VectorXd diag = xtx_llt_.matrixLLT().diagonal();
            if (xtx_llt_.info() != Eigen::Success || !(diag.minCoeff() > 1e-8 * diag.maxCoeff()))
                throw NumericalError("fixed-effect design matrix is rank deficient");
        }
        // Centering by the mean is absorbed into the intercept; it leaves the chain
        // itself unchanged when a constant is added to y.
        shift_ = ds_.intercept ? y_.mean() : 0.0;
        y_work_ = y_.array() - shift_;
    }

    const DesignSet& design() const noexcept { return ds_; }
    const PriorSpec& prior() const noexcept { return prior_; }

    /// Deterministic start: OLS beta, zero effects, variances from the OLS residual variance.
    ChainState initial_state(std::uint64_t seed, std::uint64_t chain) const {
        auto s = working_initial_state(seed, chain);
        if (ds_.p() > 0) s.beta[0] += shift_;
        return s;
    }

    // Full conditionals evaluated at a state on the original response scale.

    NormalConditional effect_conditional(const ChainState& s, std::size_t k, std::size_t j) const {
        return effect_conditional(residual(s, y_), s, k, j);
    }

    GaussianConditional beta_conditional(const ChainState& s) const {
        return beta_conditional(residual(s, y_), s);
    }

    GaussianConditional pair_effect_conditional(const ChainState& s, std::size_t pair, std::size_t j) const {
        return pair_effect_conditional(residual(s, y_), s, pair, j);
    }

    InvGammaConditional variance_conditional(const ChainState& s, std::size_t k) const {
        return inv_gamma_update(prior_.for_variance(ds_.classifications[k].name),
                                static_cast<double>(s.u[k].size()), s.u[k].squaredNorm());
    }

    InvGammaConditional residual_variance_conditional(const ChainState& s) const {
        return inv_gamma_update(prior_.for_variance("e"), static_cast<double>(ds_.n), residual(s, y_).squaredNorm());
    }

    InvWishartConditional pair_cov_conditional(const ChainState& s, std::size_t pair) const {
        const auto& pr = ds_.pairs[pair];
        Eigen::Matrix2d scatter = Eigen::Matrix2d::Zero();
        const auto& a = s.u[pr.first];
        const auto& b = s.u[pr.second];
        for (Eigen::Index j = 0; j < a.size(); ++j) {
            const Eigen::Vector2d v(a[j], b[j]);
            scatter += v * v.transpose();
        }
        return {prior_.pair_df + static_cast<double>(a.size()), prior_.pair_scale + scatter};
    }

    /// Unnormalized log posterior; the flat prior on beta contributes nothing.
    LogJoint log_joint(const ChainState& s) const {
        const double log2pi = std::log(2.0 * std::numbers::pi);
        if (!(s.sigma2_e > 0.0)) throw NumericalError("residual variance must be positive");
        LogJoint lj;
        const Eigen::VectorXd e = residual(s, y_);
        lj.likelihood = -0.5 * static_cast<double>(ds_.n) * (log2pi + std::log(s.sigma2_e)) -
                        0.5 * e.squaredNorm() / s.sigma2_e;
        for (auto k : ds_.simple_classifications()) {
            const double v = s.sigma2[k];
            if (!(v > 0.0)) throw NumericalError("variance of '" + ds_.classifications[k].name + "' must be positive");
            lj.random_effects += -0.5 * static_cast<double>(s.u[k].size()) * (log2pi + std::log(v)) -
                                 0.5 * s.u[k].squaredNorm() / v;
            const auto pr = prior_.for_variance(ds_.classifications[k].name);
            lj.priors += log_inv_gamma_density(v, pr.shape, pr.scale);
        }
        for (std::size_t p = 0; p < ds_.pairs.size(); ++p) {
            const auto& cov = s.pair_cov[p];
            Eigen::LLT<Eigen::Matrix2d> llt(cov);
            if (llt.info() != Eigen::Success) throw NumericalError("pair covariance is not positive definite");
            const Eigen::Matrix2d inv = cov.inverse();
            const double logdet = std::log(cov.determinant());
            const auto& a = s.u[ds_.pairs[p].first];
            const auto& b = s.u[ds_.pairs[p].second];
            for (Eigen::Index j = 0; j < a.size(); ++j) {
                const Eigen::Vector2d v(a[j], b[j]);
                lj.random_effects += -log2pi - 0.5 * logdet - 0.5 * v.dot(inv * v);
            }
            lj.priors += log_inv_wishart_density(cov, prior_.pair_df, prior_.pair_scale);
        }
        const auto pe = prior_.for_variance("e");
        lj.priors += log_inv_gamma_density(s.sigma2_e, pe.shape, pe.scale);
        return lj;
    }

    /// Runs one chain from the deterministic start and returns its retained draws
    /// (rows) in parameter_names order.
    Eigen::MatrixXd run_chain(const McmcControl& ctl, std::uint64_t chain_index, std::uint64_t& floor_hits) const {
        ChainState s = working_initial_state(ctl.seed, chain_index);
        const auto rows = static_cast<Eigen::Index>((ctl.iterations - ctl.burnin) / ctl.thin);
        const auto names = parameter_names(ds_);
        Eigen::MatrixXd out(rows, static_cast<Eigen::Index>(names.size()));

        Eigen::VectorXd e = residual(s, y_work_);
        Eigen::Index row = 0;
        for (int it = 1; it <= ctl.iterations; ++it) {
            sweep(s, e, floor_hits, ctl.recenter);
            s.iteration = static_cast<std::uint64_t>(it);
            if (!finite(s)) {
                throw NumericalError("numeric overflow in chain " + std::to_string(chain_index) + " at iteration " +
                                     std::to_string(it));
            }
            if (it > ctl.burnin && (it - ctl.burnin) % ctl.thin == 0 && row < rows) record(s, out.row(row++));
        }
        return out;
    }

private:
    ChainState working_initial_state(std::uint64_t seed, std::uint64_t chain) const {
        ChainState s;
        s.rng = RandomStream(seed, chain);
        Eigen::VectorXd resid = y_work_;
        s.beta = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(ds_.p()));
        if (ds_.p() > 0) {
            s.beta = xtx_llt_.solve(ds_.X.transpose() * y_work_);
            resid -= ds_.X * s.beta;
        }
        const double dof = std::max<double>(static_cast<double>(ds_.n) - 1.0, 1.0);
        const double resid_var = (resid.array() - resid.mean()).square().sum() / dof;
        const auto simple = ds_.simple_classifications();
        const double components = 1.0 + static_cast<double>(simple.size()) + 2.0 * static_cast<double>(ds_.pairs.size());
        const double v = std::max(resid_var / components, kVarianceFloor);

        for (const auto& c : ds_.classifications) s.u.push_back(Eigen::VectorXd::Zero(static_cast<Eigen::Index>(c.J())));
        s.sigma2.assign(ds_.classifications.size(), std::numeric_limits<double>::quiet_NaN());
        for (auto k : simple) s.sigma2[k] = v;
        s.sigma2_e = v;
        s.pair_cov.assign(ds_.pairs.size(), v * Eigen::Matrix2d::Identity());
        return s;
    }

    // CSR grouping of observations by cluster.
    struct Members {
        std::vector<std::size_t> offsets;
        std::vector<std::size_t> obs;
        std::size_t count(std::size_t j) const { return offsets[j + 1] - offsets[j]; }
    };

    static Members group_members(const ClassificationMap& c) {
        Members m;
        m.offsets.assign(c.J() + 1, 0);
        for (auto a : c.assign) ++m.offsets[a + 1];
        for (std::size_t j = 0; j < c.J(); ++j) m.offsets[j + 1] += m.offsets[j];
        m.obs.resize(c.n());
        auto fill = m.offsets;
        for (std::size_t i = 0; i < c.n(); ++i) m.obs[fill[c.assign[i]]++] = i;
        return m;
    }

    Eigen::VectorXd residual(const ChainState& s, const Eigen::VectorXd& y) const {
        Eigen::VectorXd e = y;
        if (ds_.p() > 0) e -= ds_.X * s.beta;
        for (std::size_t k = 0; k < ds_.classifications.size(); ++k) {
            const auto& a = ds_.classifications[k].assign;
            for (std::size_t i = 0; i < ds_.n; ++i) e[static_cast<Eigen::Index>(i)] -= s.u[k][static_cast<Eigen::Index>(a[i])];
        }
        return e;
    }

    NormalConditional effect_conditional(const Eigen::VectorXd& e, const ChainState& s, std::size_t k,
                                         std::size_t j) const {
        const auto& m = members_[k];
        const double uj = s.u[k][static_cast<Eigen::Index>(j)];
        double sum = 0.0;
        for (auto i = m.offsets[j]; i < m.offsets[j + 1]; ++i) sum += e[static_cast<Eigen::Index>(m.obs[i])] + uj;
        return cluster_conditional(sum, static_cast<double>(m.count(j)), s.sigma2_e, s.sigma2[k]);
    }

    GaussianConditional beta_conditional(const Eigen::VectorXd& e, const ChainState& s) const {
        const Eigen::VectorXd r = e + ds_.X * s.beta;
        GaussianConditional g;
        g.mean = xtx_llt_.solve(ds_.X.transpose() * r);
        g.covariance = s.sigma2_e * xtx_llt_.solve(Eigen::MatrixXd::Identity(ds_.X.cols(), ds_.X.cols()));
        return g;
    }

    GaussianConditional pair_effect_conditional(const Eigen::VectorXd& e, const ChainState& s, std::size_t pair,
                                                std::size_t j) const {
        const auto& pr = ds_.pairs[pair];
        const auto& from = members_[pr.first];
        const auto& to = members_[pr.second];
        const auto& dest_assign = ds_.classifications[pr.second].assign;
        const auto& origin_assign = ds_.classifications[pr.first].assign;
        const auto jj = static_cast<Eigen::Index>(j);
        const double a = s.u[pr.first][jj];
        const double b = s.u[pr.second][jj];

        double sum_o = 0.0, sum_d = 0.0, both = 0.0;
        for (auto t = from.offsets[j]; t < from.offsets[j + 1]; ++t) {
            const auto i = from.obs[t];
            const bool self = dest_assign[i] == j;
            sum_o += e[static_cast<Eigen::Index>(i)] + a + (self ? b : 0.0);
            if (self) both += 1.0;
        }
        for (auto t = to.offsets[j]; t < to.offsets[j + 1]; ++t) {
            const auto i = to.obs[t];
            sum_d += e[static_cast<Eigen::Index>(i)] + b + (origin_assign[i] == j ? a : 0.0);
        }
        Eigen::Matrix2d counts;
        counts << static_cast<double>(from.count(j)), both, both, static_cast<double>(to.count(j));
        const Eigen::Matrix2d precision = s.pair_cov[pair].inverse() + counts / s.sigma2_e;
        GaussianConditional g;
        g.covariance = precision.inverse();
        g.mean = g.covariance * Eigen::Vector2d(sum_o, sum_d) / s.sigma2_e;
        return g;
    }

    double floored(double v, std::uint64_t& hits) const {
        if (v < kVarianceFloor) {
            ++hits;
            return kVarianceFloor;
        }
        return v;
    }

    static Eigen::Matrix2d sample_inv_wishart(RandomStream& rng, const InvWishartConditional& c) {
        const Eigen::Matrix2d L = c.scale.inverse().llt().matrixL();
        Eigen::Matrix2d A = Eigen::Matrix2d::Zero();
        A(0, 0) = std::sqrt(rng.chi_square(c.df));
        A(1, 0) = rng.normal();
        A(1, 1) = std::sqrt(rng.chi_square(c.df - 1.0));
        const Eigen::Matrix2d LA = L * A;
        Eigen::Matrix2d sigma = (LA * LA.transpose()).inverse();
        sigma(1, 0) = sigma(0, 1);
        return sigma;
    }

    void sweep(ChainState& s, Eigen::VectorXd& e, std::uint64_t& hits, bool recenter_moves) const {
        auto& rng = s.rng;
        // (1) fixed effects
        if (ds_.p() > 0) {
            const auto g = beta_conditional(e, s);
            Eigen::VectorXd z(g.mean.size());
            for (Eigen::Index i = 0; i < z.size(); ++i) z[i] = rng.normal();
            // XtX = L L'  =>  cov = sigma2_e L^-T L^-1
            const Eigen::VectorXd draw =
                g.mean + std::sqrt(s.sigma2_e) * xtx_llt_.matrixU().solve(z);
            e -= ds_.X * (draw - s.beta);
            s.beta = draw;
        }
        // (2) scalar-variance classifications, cluster by cluster
        const auto simple = ds_.simple_classifications();
        for (auto k : simple) {
            const auto& m = members_[k];
            auto& u = s.u[k];
            for (std::size_t j = 0; j < ds_.classifications[k].J(); ++j) {
                const auto c = effect_conditional(e, s, k, j);
                const double draw = c.mean + std::sqrt(c.variance) * rng.normal();
                const double delta = draw - u[static_cast<Eigen::Index>(j)];
                for (auto t = m.offsets[j]; t < m.offsets[j + 1]; ++t) e[static_cast<Eigen::Index>(m.obs[t])] -= delta;
                u[static_cast<Eigen::Index>(j)] = draw;
            }
        }
        // (3) correlated pairs: per-unit 2-vectors, then the 2x2 covariance
        for (std::size_t p = 0; p < ds_.pairs.size(); ++p) {
            const auto& pr = ds_.pairs[p];
            const auto& from = members_[pr.first];
            const auto& to = members_[pr.second];
            for (std::size_t j = 0; j < ds_.classifications[pr.first].J(); ++j) {
                const auto g = pair_effect_conditional(e, s, p, j);
                const Eigen::Matrix2d L = g.covariance.llt().matrixL();
                const Eigen::Vector2d z(rng.normal(), rng.normal());
                const Eigen::Vector2d draw = g.mean + L * z;
                const auto jj = static_cast<Eigen::Index>(j);
                const double da = draw[0] - s.u[pr.first][jj];
                const double db = draw[1] - s.u[pr.second][jj];
                for (auto t = from.offsets[j]; t < from.offsets[j + 1]; ++t) e[static_cast<Eigen::Index>(from.obs[t])] -= da;
                for (auto t = to.offsets[j]; t < to.offsets[j + 1]; ++t) e[static_cast<Eigen::Index>(to.obs[t])] -= db;
                s.u[pr.first][jj] = draw[0];
                s.u[pr.second][jj] = draw[1];
            }
            s.pair_cov[p] = sample_inv_wishart(rng, pair_cov_conditional(s, p));
        }
        if (recenter_moves && ds_.intercept) recenter(s);
        // (4) classification variances
        for (auto k : simple) {
            const auto c = variance_conditional(s, k);
            s.sigma2[k] = floored(rng.inv_gamma(c.shape, c.scale), hits);
        }
        // (5) residual variance from the full residual
        const auto pe = prior_.for_variance("e");
        const auto c = inv_gamma_update(pe, static_cast<double>(ds_.n), e.squaredNorm());
        s.sigma2_e = floored(rng.inv_gamma(c.shape, c.scale), hits);
    }

    // Shifting every effect of one classification by -d and the intercept by +d leaves
    // the fitted values unchanged; d is drawn from its conditional, which only
    // involves the effects' own distribution.
    void recenter(ChainState& s) const {
        auto& rng = s.rng;
        for (auto k : ds_.simple_classifications()) {
            auto& u = s.u[k];
            const double J = static_cast<double>(u.size());
            const double d = u.mean() + std::sqrt(s.sigma2[k] / J) * rng.normal();
            u.array() -= d;
            s.beta[0] += d;
        }
        for (std::size_t p = 0; p < ds_.pairs.size(); ++p) {
            auto& a = s.u[ds_.pairs[p].first];
            auto& b = s.u[ds_.pairs[p].second];
            const double J = static_cast<double>(a.size());
            const Eigen::Matrix2d L = (s.pair_cov[p] / J).llt().matrixL();
            const Eigen::Vector2d z(rng.normal(), rng.normal());
            const Eigen::Vector2d d = Eigen::Vector2d(a.mean(), b.mean()) + L * z;
            a.array() -= d[0];
            b.array() -= d[1];
            s.beta[0] += d[0] + d[1];
        }
    }

    bool finite(const ChainState& s) const {
        if (!std::isfinite(s.sigma2_e) || !s.beta.allFinite()) return false;
        for (auto k : ds_.simple_classifications())
            if (!std::isfinite(s.sigma2[k])) return false;
        for (const auto& c : s.pair_cov)
            if (!c.allFinite()) return false;
        return true;
    }

    template <typename Row>
    void record(const ChainState& s, Row&& row) const {
        Eigen::Index c = 0;
        for (Eigen::Index j = 0; j < s.beta.size(); ++j) row[c++] = s.beta[j] + (j == 0 ? shift_ : 0.0);
        for (auto k : ds_.simple_classifications()) row[c++] = s.sigma2[k];
        for (const auto& cov : s.pair_cov) {
            row[c++] = cov(0, 0);
            row[c++] = cov(0, 1);
            row[c++] = cov(1, 1);
            row[c++] = cov(0, 1) / std::sqrt(cov(0, 0) * cov(1, 1));
        }
        row[c++] = s.sigma2_e;
    }

    DesignSet ds_;
    Eigen::VectorXd y_;
    PriorSpec prior_;
    std::vector<Members> members_;
    Eigen::LLT<Eigen::MatrixXd> xtx_llt_;
    double shift_ = 0.0;
    Eigen::VectorXd y_work_;
};

/// Runs `control.chains` independent chains concurrently; bit-reproducible for a given seed.
inline DrawsMatrix gibbs_fit(const DesignSet& ds, const Eigen::VectorXd& y, const PriorSpec& prior,
                             const McmcControl& control) {
    control.validate();
    const GibbsKernel kernel(ds, y, prior);

    DrawsMatrix d;
    d.names = parameter_names(ds);
    d.iterations = control.iterations;
    d.burnin = control.burnin;
    d.thin = control.thin;
    d.seed = control.seed;
    d.chains.resize(static_cast<std::size_t>(control.chains));
    d.floor_hits.assign(static_cast<std::size_t>(control.chains), 0);

    std::vector<std::exception_ptr> errors(static_cast<std::size_t>(control.chains));
    {
        std::vector<std::jthread> workers;
        for (std::size_t c = 0; c < d.chains.size(); ++c) {
            workers.emplace_back([&, c] {
                try {
                    d.chains[c] = kernel.run_chain(control, c, d.floor_hits[c]);
                } catch (...) {
                    errors[c] = std::current_exception();
                }
            });
        }
    }
    for (auto& err : errors)
        if (err) std::rethrow_exception(err);
    return d;
}

}  // namespace ccmm
