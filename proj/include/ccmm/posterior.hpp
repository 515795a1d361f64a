#pragma once

// Posterior summaries: moments, quantiles, split R-hat, effective sample size,
// kernel-density modes, and variance partition coefficients.

#include <ccmm/draws.hpp>
#include <ccmm/error.hpp>

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>
#include <span>
#include <string>
#include <vector>

namespace ccmm {

/// Linear-interpolation quantile of unsorted values.
inline double quantile(std::vector<double> v, double q) {
    if (v.empty()) throw DataError("quantile of empty sample");
    std::sort(v.begin(), v.end());
    const double h = (static_cast<double>(v.size()) - 1.0) * q;
    const auto lo = static_cast<std::size_t>(std::floor(h));
    const auto hi = std::min(lo + 1, v.size() - 1);
    return v[lo] + (h - static_cast<double>(lo)) * (v[hi] - v[lo]);
}

namespace detail {

// Split each chain in half (dropping the middle draw of odd-length chains).
inline std::vector<Eigen::VectorXd> split_chains(const std::vector<Eigen::VectorXd>& chains) {
    std::vector<Eigen::VectorXd> out;
    for (const auto& c : chains) {
        const Eigen::Index half = c.size() / 2;
        out.push_back(c.head(half));
        out.push_back(c.tail(half));
    }
    return out;
}

inline double sample_variance(const Eigen::VectorXd& v) {
    if (v.size() < 2) return 0.0;
    return (v.array() - v.mean()).square().sum() / static_cast<double>(v.size() - 1);
}

inline double autocovariance(const Eigen::VectorXd& v, double mean, Eigen::Index lag) {
    const Eigen::Index n = v.size();
    double s = 0.0;
    for (Eigen::Index t = 0; t + lag < n; ++t) s += (v[t] - mean) * (v[t + lag] - mean);
    return s / static_cast<double>(n);
}

}  // namespace detail

/// Split-chain potential scale reduction. Zero variance everywhere is reported as 1.
inline double split_rhat(const std::vector<Eigen::VectorXd>& chains) {
    const auto halves = detail::split_chains(chains);
    const auto m = static_cast<double>(halves.size());
    const auto n = static_cast<double>(halves.front().size());
    if (n < 2) throw DataError("too few draws for R-hat");
    double W = 0.0;
    Eigen::VectorXd means(static_cast<Eigen::Index>(halves.size()));
    for (std::size_t c = 0; c < halves.size(); ++c) {
        W += detail::sample_variance(halves[c]) / m;
        means[static_cast<Eigen::Index>(c)] = halves[c].mean();
    }
    const double B_over_n = detail::sample_variance(means);
    if (W <= 0.0) return B_over_n <= 0.0 ? 1.0 : std::numeric_limits<double>::infinity();
    const double var_plus = (n - 1.0) / n * W + B_over_n;
    return std::sqrt(var_plus / W);
}

/// Multi-chain effective sample size with Geyer's initial positive (monotone) sequence.
inline double effective_sample_size(const std::vector<Eigen::VectorXd>& chains) {
    const auto halves = detail::split_chains(chains);
    const auto m = static_cast<double>(halves.size());
    const Eigen::Index n = halves.front().size();
    const double total = m * static_cast<double>(n);
    if (n < 2) throw DataError("too few draws for effective sample size");

    std::vector<double> means, vars;
    double W = 0.0;
    for (const auto& h : halves) {
        means.push_back(h.mean());
        vars.push_back(detail::sample_variance(h));
        W += vars.back() / m;
    }
    Eigen::Map<const Eigen::VectorXd> mv(means.data(), static_cast<Eigen::Index>(means.size()));
    const double B_over_n = halves.size() > 1 ? detail::sample_variance(mv) : 0.0;
    const double var_plus = (static_cast<double>(n) - 1.0) / static_cast<double>(n) * W + B_over_n;
    if (!(var_plus > 0.0)) return total;

    auto rho = [&](Eigen::Index lag) {
        double acov = 0.0;
        for (std::size_t c = 0; c < halves.size(); ++c) acov += detail::autocovariance(halves[c], means[c], lag) / m;
        return 1.0 - (W - acov) / var_plus;
    };

    double tau = -1.0;
    double prev_pair = std::numeric_limits<double>::infinity();
    for (Eigen::Index k = 0; 2 * k + 1 < n; ++k) {
        double pair = rho(2 * k) + rho(2 * k + 1);
        if (pair <= 0.0) break;
        pair = std::min(pair, prev_pair);  // monotone sequence
        tau += 2.0 * pair;
        prev_pair = pair;
    }
    tau = std::max(tau, 1.0 / std::log10(total));
    return std::min(total / tau, total);
}

/// Mode of a Gaussian kernel density estimate (Silverman bandwidth) over [min, max].
inline double kde_mode(std::span<const double> values, int grid = 512) {
    if (values.empty()) throw DataError("mode of empty sample");
    std::vector<double> v(values.begin(), values.end());
    std::sort(v.begin(), v.end());
    const double n = static_cast<double>(v.size());
    const double mean = std::accumulate(v.begin(), v.end(), 0.0) / n;
    double ss = 0.0;
    for (double x : v) ss += (x - mean) * (x - mean);
    const double sd = v.size() > 1 ? std::sqrt(ss / (n - 1.0)) : 0.0;
    const double iqr = quantile(v, 0.75) - quantile(v, 0.25);
    double spread = iqr > 0.0 ? std::min(sd, iqr / 1.34) : sd;
    const double h = 0.9 * spread * std::pow(n, -0.2);
    if (!(h > 0.0)) return v[v.size() / 2];

    const double lo = v.front(), hi = v.back();
    double best_x = lo, best_f = -1.0;
    for (int g = 0; g < grid; ++g) {
        const double x = lo + (hi - lo) * g / (grid - 1);
        // only points within 6 bandwidths contribute meaningfully
        auto first = std::lower_bound(v.begin(), v.end(), x - 6.0 * h);
        auto last = std::upper_bound(v.begin(), v.end(), x + 6.0 * h);
        double f = 0.0;
        for (auto it = first; it != last; ++it) {
            const double z = (x - *it) / h;
            f += std::exp(-0.5 * z * z);
        }
        if (f > best_f) {
            best_f = f;
            best_x = x;
        }
    }
    return best_x;
}

struct ParameterSummary {
    std::string name;
    double mean = 0.0;
    double sd = 0.0;
    double q025 = 0.0;
    double q50 = 0.0;
    double q975 = 0.0;
    double rhat = 1.0;
    double ess = 0.0;
};

struct SummaryTable {
    std::vector<ParameterSummary> rows;
    std::size_t chains = 0;
    std::size_t draws = 0;

    const ParameterSummary& at(const std::string& name) const {
        for (const auto& r : rows)
            if (r.name == name) return r;
        throw DataError("summary has no parameter '" + name + "'");
    }

    /// Parameters whose R-hat exceeds the threshold.
    std::vector<std::string> unconverged(double threshold = 1.05) const {
        std::vector<std::string> out;
        for (const auto& r : rows)
            if (!(r.rhat <= threshold)) out.push_back(r.name);
        return out;
    }
};

inline std::vector<Eigen::VectorXd> chain_columns(const DrawsMatrix& d, Eigen::Index col) {
    std::vector<Eigen::VectorXd> out;
    for (const auto& c : d.chains) out.push_back(c.col(col));
    return out;
}

inline SummaryTable summarize(const DrawsMatrix& d) {
    if (d.chains.empty()) throw DataError("no chains to summarize");
    for (const auto& c : d.chains)
        if (c.rows() < 4) throw DataError("too few draws: need at least 4 retained draws per chain");
    SummaryTable t;
    t.chains = d.chain_count();
    t.draws = d.total_draws();
    for (std::size_t k = 0; k < d.names.size(); ++k) {
        const auto col = static_cast<Eigen::Index>(k);
        const auto chains = chain_columns(d, col);
        const Eigen::VectorXd all = d.pooled(d.names[k]);
        std::vector<double> v(all.data(), all.data() + all.size());
        ParameterSummary s;
        s.name = d.names[k];
        s.mean = all.mean();
        s.sd = std::sqrt(detail::sample_variance(all));
        s.q025 = quantile(v, 0.025);
        s.q50 = quantile(v, 0.5);
        s.q975 = quantile(v, 0.975);
        s.rhat = split_rhat(chains);
        s.ess = effective_sample_size(chains);
        t.rows.push_back(s);
    }
    return t;
}

/// True for parameters that are variance components: sigma2[...] and pair-covariance diagonals.
inline bool is_variance_parameter(const std::string& name) {
    if (name.rfind("sigma2[", 0) == 0) return true;
    if (name.rfind("cov[", 0) == 0) {
        const auto tail = name.substr(name.find(']') + 1);
        return tail == "[0][0]" || tail == "[1][1]";
    }
    return false;
}

struct VpcRow {
    std::string component;  // variance parameter name
    double mean = 0.0;
    double q025 = 0.0;
    double q975 = 0.0;
};

struct VpcReport {
    std::vector<VpcRow> rows;
    Eigen::MatrixXd shares;  // per draw (pooled over chains) x component

    const VpcRow& at(const std::string& name) const {
        for (const auto& r : rows)
            if (r.component == name) return r;
        throw DataError("VPC report has no component '" + name + "'");
    }
};

/// Variance partition coefficients: each component's share of the total variance,
/// computed draw by draw and then summarized.
inline VpcReport vpc(const DrawsMatrix& d) {
    if (!d.has("sigma2[e]")) throw DataError("draws are missing variance column 'sigma2[e]'");
    std::vector<std::string> comps;
    for (const auto& n : d.names)
        if (is_variance_parameter(n) && n != "sigma2[e]") comps.push_back(n);
    comps.push_back("sigma2[e]");

    const auto total = static_cast<Eigen::Index>(d.total_draws());
    Eigen::MatrixXd values(total, static_cast<Eigen::Index>(comps.size()));
    for (std::size_t c = 0; c < comps.size(); ++c) values.col(static_cast<Eigen::Index>(c)) = d.pooled(comps[c]);

    VpcReport r;
    r.shares.resize(total, values.cols());
    for (Eigen::Index i = 0; i < total; ++i) {
        const double sum = values.row(i).sum();
        if (!(sum > 0.0)) throw DataError("draw " + std::to_string(i) + " has non-positive total variance");
        r.shares.row(i) = values.row(i) / sum;
    }
    for (std::size_t c = 0; c < comps.size(); ++c) {
        const Eigen::VectorXd col = r.shares.col(static_cast<Eigen::Index>(c));
        std::vector<double> v(col.data(), col.data() + col.size());
        r.rows.push_back({comps[c], col.mean(), quantile(v, 0.025), quantile(v, 0.975)});
    }
    return r;
}

}  // namespace ccmm
