#pragma once

// Synthetic data from a fully specified cross-classified model.
//
// Draw order is fixed so a seed reproduces a dataset exactly: main effects per
// classification, interaction cells, dyadic unit effects, then observations
// (assignment, covariates, residual) one at a time.

#include <ccmm/dataset.hpp>
#include <ccmm/error.hpp>
#include <ccmm/rng.hpp>

#include <Eigen/Dense>
#include <json.hpp>

#include <cmath>
#include <cstdint>
#include <fstream>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

namespace ccmm {

enum class AssignmentScheme { full_cross_balanced, random_assignment, panel_one_per_cell, dyadic_all_pairs };

inline const char* to_string(AssignmentScheme s) {
    switch (s) {
    case AssignmentScheme::full_cross_balanced: return "full-cross-balanced";
    case AssignmentScheme::random_assignment: return "random-assignment";
    case AssignmentScheme::panel_one_per_cell: return "panel-one-per-cell";
    case AssignmentScheme::dyadic_all_pairs: return "dyadic-all-pairs";
    }
    return "?";
}

inline AssignmentScheme parse_scheme(const std::string& s) {
    if (s == "full-cross-balanced") return AssignmentScheme::full_cross_balanced;
    if (s == "random-assignment") return AssignmentScheme::random_assignment;
    if (s == "panel-one-per-cell") return AssignmentScheme::panel_one_per_cell;
    if (s == "dyadic-all-pairs") return AssignmentScheme::dyadic_all_pairs;
    throw DataError("unknown assignment scheme '" + s + "'");
}

struct SimClassification {
    std::string name;
    std::size_t count = 0;
    double sigma2 = 0.0;
};

struct DyadicSpec {
    std::size_t areas = 0;
    std::string origin = "origin";
    std::string dest = "dest";
    Eigen::Matrix2d cov = Eigen::Matrix2d::Zero();
};

struct SimDesign {
    AssignmentScheme scheme = AssignmentScheme::random_assignment;
    std::vector<SimClassification> classifications;
    std::size_t n = 0;         // random-assignment only
    std::size_t per_cell = 1;  // full-cross-balanced only
    std::vector<double> beta{0.0};  // intercept, then one slope per standard-normal covariate
    double sigma2_e = 1.0;
    std::optional<double> sigma2_interaction;  // between the first two classifications
    DyadicSpec dyadic;
    std::uint64_t seed = 1;

    /// Covariate column names: "x" for a single slope, else x1, x2, ...
    std::vector<std::string> covariate_names() const {
        std::vector<std::string> out;
        if (beta.size() == 2) return {"x"};
        for (std::size_t j = 1; j < beta.size(); ++j) out.push_back("x" + std::to_string(j));
        return out;
    }

    void validate() const {
        if (beta.empty()) throw DataError("design needs at least an intercept in beta");
        if (!(sigma2_e >= 0.0)) throw DataError("residual variance must be non-negative");
        for (const auto& c : classifications) {
            if (c.name.empty()) throw DataError("classification without a name");
            if (c.count == 0) throw DataError("classification '" + c.name + "' needs at least one cluster");
            if (!(c.sigma2 >= 0.0)) throw DataError("variance of '" + c.name + "' must be non-negative");
        }
        if (sigma2_interaction && !(*sigma2_interaction >= 0.0))
            throw DataError("interaction variance must be non-negative");
        if (sigma2_interaction && classifications.size() < 2)
            throw DataError("an interaction needs at least two classifications");
        switch (scheme) {
        case AssignmentScheme::random_assignment:
            if (classifications.empty()) throw DataError("random assignment needs classifications");
            if (n == 0) throw DataError("random assignment needs n >= 1");
            break;
        case AssignmentScheme::full_cross_balanced:
            if (classifications.empty()) throw DataError("full cross needs classifications");
            if (per_cell == 0) throw DataError("per_cell must be at least 1");
            break;
        case AssignmentScheme::panel_one_per_cell:
            if (classifications.size() != 2) throw DataError("a panel needs exactly two classifications");
            break;
        case AssignmentScheme::dyadic_all_pairs: {
            if (dyadic.areas < 2) throw DataError("dyadic design needs at least two areas");
            const auto& S = dyadic.cov;
            if (std::abs(S(0, 1) - S(1, 0)) > 1e-12 || S(0, 0) < 0.0 || S(1, 1) < 0.0 ||
                S.determinant() < -1e-12)
                throw DataError("dyadic covariance must be symmetric positive semidefinite");
            if (sigma2_interaction) throw DataError("interaction effects are not defined for dyadic designs");
            break;
        }
        }
    }
};

namespace detail {

inline std::string cluster_label(const std::string& name, std::size_t j) { return name + "_" + std::to_string(j + 1); }

}  // namespace detail

inline Dataset simulate(const SimDesign& sd) {
    sd.validate();
    RandomStream rng(sd.seed, 0);
    const std::size_t K = sd.classifications.size();
    const bool dyadic = sd.scheme == AssignmentScheme::dyadic_all_pairs;

    std::vector<std::vector<double>> effects;
    if (!dyadic) {
        for (const auto& c : sd.classifications) {
            std::vector<double> u(c.count);
            const double s = std::sqrt(c.sigma2);
            for (auto& v : u) v = s * rng.normal();
            effects.push_back(std::move(u));
        }
    }
    std::vector<double> cell_effects;
    if (sd.sigma2_interaction) {
        const std::size_t cells = sd.classifications[0].count * sd.classifications[1].count;
        cell_effects.resize(cells);
        const double s = std::sqrt(*sd.sigma2_interaction);
        for (auto& v : cell_effects) v = s * rng.normal();
    }
    std::vector<Eigen::Vector2d> unit_effects;
    if (dyadic) {
        const auto& S = sd.dyadic.cov;
        const double l00 = std::sqrt(S(0, 0));
        const double l10 = l00 > 0.0 ? S(1, 0) / l00 : 0.0;
        const double l11 = std::sqrt(std::max(0.0, S(1, 1) - l10 * l10));
        for (std::size_t a = 0; a < sd.dyadic.areas; ++a) {
            const double z0 = rng.normal(), z1 = rng.normal();
            unit_effects.emplace_back(l00 * z0, l10 * z0 + l11 * z1);
        }
    }

    // cluster tuples, one per observation
    std::vector<std::vector<std::size_t>> tuples;
    switch (sd.scheme) {
    case AssignmentScheme::random_assignment:
        for (std::size_t i = 0; i < sd.n; ++i) {
            std::vector<std::size_t> t(K);
            for (std::size_t k = 0; k < K; ++k) t[k] = rng.below(sd.classifications[k].count);
            tuples.push_back(std::move(t));
        }
        break;
    case AssignmentScheme::full_cross_balanced:
    case AssignmentScheme::panel_one_per_cell: {
        const std::size_t reps = sd.scheme == AssignmentScheme::panel_one_per_cell ? 1 : sd.per_cell;
        // odometer over all cluster tuples, last classification fastest
        std::vector<std::size_t> t(K, 0);
        for (bool done = false; !done;) {
            for (std::size_t r = 0; r < reps; ++r) tuples.push_back(t);
            for (std::size_t k = K;;) {
                if (k == 0) {
                    done = true;
                    break;
                }
                --k;
                if (++t[k] < sd.classifications[k].count) break;
                t[k] = 0;
            }
        }
        break;
    }
    case AssignmentScheme::dyadic_all_pairs:
        for (std::size_t a = 0; a < sd.dyadic.areas; ++a)
            for (std::size_t b = 0; b < sd.dyadic.areas; ++b)
                if (a != b) tuples.push_back({a, b});
        break;
    }

    const std::size_t n = tuples.size();
    const auto cov_names = sd.covariate_names();
    std::vector<double> y(n);
    std::vector<std::vector<double>> x(cov_names.size(), std::vector<double>(n));
    const double se = std::sqrt(sd.sigma2_e);
    for (std::size_t i = 0; i < n; ++i) {
        const auto& t = tuples[i];
        double v = sd.beta[0];
        for (std::size_t j = 0; j < cov_names.size(); ++j) {
            x[j][i] = rng.normal();
            v += sd.beta[j + 1] * x[j][i];
        }
        if (dyadic) {
            v += unit_effects[t[0]][0] + unit_effects[t[1]][1];
        } else {
            for (std::size_t k = 0; k < K; ++k) v += effects[k][t[k]];
            if (sd.sigma2_interaction) v += cell_effects[t[0] * sd.classifications[1].count + t[1]];
        }
        v += se * rng.normal();
        y[i] = v;
    }

    std::vector<Column> cols;
    cols.push_back({"y", std::move(y)});
    for (std::size_t j = 0; j < cov_names.size(); ++j) cols.push_back({cov_names[j], std::move(x[j])});
    if (dyadic) {
        std::vector<std::string> from(n), to(n);
        for (std::size_t i = 0; i < n; ++i) {
            from[i] = detail::cluster_label("area", tuples[i][0]);
            to[i] = detail::cluster_label("area", tuples[i][1]);
        }
        cols.push_back({sd.dyadic.origin, std::move(from)});
        cols.push_back({sd.dyadic.dest, std::move(to)});
    } else {
        for (std::size_t k = 0; k < K; ++k) {
            std::vector<std::string> lab(n);
            for (std::size_t i = 0; i < n; ++i) lab[i] = detail::cluster_label(sd.classifications[k].name, tuples[i][k]);
            cols.push_back({sd.classifications[k].name, std::move(lab)});
        }
    }
    return Dataset(std::move(cols));
}

/// Removes every observation of a uniformly chosen fraction of the occupied cells
/// of `cell_columns` (default: all label columns). At least one cell always survives.
inline Dataset drop_cells(const Dataset& d, double fraction, std::uint64_t seed,
                          std::vector<std::string> cell_columns = {}) {
    if (!(fraction >= 0.0 && fraction < 1.0)) throw DataError("drop fraction must lie in [0, 1)");
    if (cell_columns.empty()) {
        for (const auto& c : d.columns())
            if (!c.numeric()) cell_columns.push_back(c.name);
    }
    if (cell_columns.empty()) throw DataError("no label columns define cells");

    std::unordered_map<std::string, std::size_t> index;
    std::vector<std::size_t> cell_of(d.n());
    for (std::size_t i = 0; i < d.n(); ++i) {
        std::string key;
        for (const auto& c : cell_columns) {
            key += d.labels(c)[i];
            key += '\x1f';
        }
        cell_of[i] = index.try_emplace(key, index.size()).first->second;
    }
    const std::size_t cells = index.size();
    const auto want = static_cast<std::size_t>(std::llround(fraction * static_cast<double>(cells)));
    const std::size_t k = std::min(want, cells - 1);

    // partial Fisher-Yates over cell ids
    std::vector<std::size_t> ids(cells);
    for (std::size_t c = 0; c < cells; ++c) ids[c] = c;
    RandomStream rng(seed, 0);
    std::vector<bool> dropped(cells, false);
    for (std::size_t t = 0; t < k; ++t) {
        const auto r = t + rng.below(cells - t);
        std::swap(ids[t], ids[r]);
        dropped[ids[t]] = true;
    }
    std::vector<std::size_t> keep;
    for (std::size_t i = 0; i < d.n(); ++i)
        if (!dropped[cell_of[i]]) keep.push_back(i);
    return d.select_rows(keep);
}

// Design files: key/value documents mirroring SimDesign.

inline SimDesign sim_design_from_json(const nlohmann::json& j) {
    SimDesign sd;
    try {
        sd.scheme = parse_scheme(j.at("scheme").get<std::string>());
        if (j.contains("classifications")) {
            for (const auto& c : j.at("classifications")) {
                sd.classifications.push_back(
                    {c.at("name").get<std::string>(), c.at("count").get<std::size_t>(), c.value("sigma2", 0.0)});
            }
        }
        sd.n = j.value("n", std::size_t{0});
        sd.per_cell = j.value("per_cell", std::size_t{1});
        if (j.contains("beta")) sd.beta = j.at("beta").get<std::vector<double>>();
        sd.sigma2_e = j.value("sigma2_e", 1.0);
        if (j.contains("sigma2_interaction")) sd.sigma2_interaction = j.at("sigma2_interaction").get<double>();
        if (j.contains("dyadic")) {
            const auto& dy = j.at("dyadic");
            sd.dyadic.areas = dy.at("areas").get<std::size_t>();
            sd.dyadic.origin = dy.value("origin", std::string("origin"));
            sd.dyadic.dest = dy.value("dest", std::string("dest"));
            const auto cov = dy.at("cov").get<std::vector<std::vector<double>>>();
            if (cov.size() != 2 || cov[0].size() != 2 || cov[1].size() != 2)
                throw DataError("dyadic cov must be a 2x2 array");
            sd.dyadic.cov << cov[0][0], cov[0][1], cov[1][0], cov[1][1];
        }
        sd.seed = j.value("seed", std::uint64_t{1});
    } catch (const nlohmann::json::exception& e) {
        throw DataError(std::string("design file: ") + e.what());
    }
    sd.validate();
    return sd;
}

inline nlohmann::json sim_design_to_json(const SimDesign& sd) {
    nlohmann::json j;
    j["scheme"] = to_string(sd.scheme);
    j["classifications"] = nlohmann::json::array();
    for (const auto& c : sd.classifications)
        j["classifications"].push_back({{"name", c.name}, {"count", c.count}, {"sigma2", c.sigma2}});
    j["n"] = sd.n;
    j["per_cell"] = sd.per_cell;
    j["beta"] = sd.beta;
    j["sigma2_e"] = sd.sigma2_e;
    if (sd.sigma2_interaction) j["sigma2_interaction"] = *sd.sigma2_interaction;
    if (sd.scheme == AssignmentScheme::dyadic_all_pairs) {
        const auto& S = sd.dyadic.cov;
        j["dyadic"] = {{"areas", sd.dyadic.areas},
                       {"origin", sd.dyadic.origin},
                       {"dest", sd.dyadic.dest},
                       {"cov", {{S(0, 0), S(0, 1)}, {S(1, 0), S(1, 1)}}}};
    }
    j["seed"] = sd.seed;
    return j;
}

inline SimDesign read_sim_design(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open '" + path + "'");
    try {
        return sim_design_from_json(nlohmann::json::parse(in));
    } catch (const nlohmann::json::parse_error& e) {
        throw DataError("design file '" + path + "': " + e.what());
    }
}

}  // namespace ccmm
