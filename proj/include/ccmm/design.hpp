#pragma once

// Fitting-ready representation of a formula over a dataset. Random-intercept
// design matrices are never materialized: each classification is an index
// vector selecting one cluster per observation.

#include <ccmm/dataset.hpp>
#include <ccmm/dyadic.hpp>
#include <ccmm/error.hpp>
#include <ccmm/formula.hpp>

#include <Eigen/Dense>

#include <algorithm>
#include <string>
#include <vector>

namespace ccmm {

/// Two classifications sharing one label space whose effects are correlated.
struct CorrelatedPair {
    std::size_t first = 0;
    std::size_t second = 0;
    std::string name;  // "origin,dest"
};

struct DesignSet {
    std::size_t n = 0;
    Eigen::MatrixXd X;
    std::vector<std::string> fixed_names;
    bool intercept = false;
    std::vector<ClassificationMap> classifications;
    std::vector<CorrelatedPair> pairs;
    std::vector<std::string> warnings;

    std::size_t p() const noexcept { return static_cast<std::size_t>(X.cols()); }

    bool paired(std::size_t k) const noexcept {
        return std::any_of(pairs.begin(), pairs.end(),
                           [k](const CorrelatedPair& pr) { return pr.first == k || pr.second == k; });
    }

    /// Classifications with their own scalar variance (everything not in a correlated pair).
    std::vector<std::size_t> simple_classifications() const {
        std::vector<std::size_t> out;
        for (std::size_t k = 0; k < classifications.size(); ++k)
            if (!paired(k)) out.push_back(k);
        return out;
    }

    void validate() const {
        if (static_cast<std::size_t>(X.rows()) != n) throw DataError("fixed-effect matrix has wrong row count");
        for (const auto& c : classifications) {
            if (c.n() != n) throw DataError("classification '" + c.name + "' has wrong length");
            for (auto a : c.assign)
                if (a >= c.J()) throw DataError("classification '" + c.name + "' has an out-of-range index");
        }
        for (const auto& pr : pairs) {
            if (pr.first == pr.second || pr.first >= classifications.size() ||
                pr.second >= classifications.size())
                throw DataError("correlated pair '" + pr.name + "' references invalid classifications");
            if (classifications[pr.first].labels != classifications[pr.second].labels)
                throw DataError("correlated pair '" + pr.name + "' columns have non-identical label sets");
        }
    }
};

/// One cluster per occupied (a, b) cell, in order of first appearance; labels "aLabel:bLabel".
inline ClassificationMap interaction_map(const ClassificationMap& a, const ClassificationMap& b) {
    const auto t = tabulate_cells(a, b);
    ClassificationMap m;
    m.name = a.name + ":" + b.name;
    m.assign = t.cell_of;
    m.labels.reserve(t.cells.size());
    for (const auto& [ca, cb] : t.cells) m.labels.push_back(a.labels[ca] + ":" + b.labels[cb]);
    return m;
}

struct DesignOptions {
    SelfPairPolicy self_pairs = SelfPairPolicy::forbid;
};

inline Eigen::VectorXd response_vector(const ModelFormula& f, const Dataset& d) {
    const auto& y = d.numeric(f.response);
    return Eigen::Map<const Eigen::VectorXd>(y.data(), static_cast<Eigen::Index>(y.size()));
}

inline DesignSet build_design(const ModelFormula& f, const Dataset& d, const DesignOptions& opt = {}) {
    DesignSet ds;
    ds.n = d.n();
    ds.intercept = f.intercept;
    (void)d.numeric(f.response);

    const auto p = static_cast<Eigen::Index>(f.fixed_terms.size() + (f.intercept ? 1 : 0));
    ds.X.resize(static_cast<Eigen::Index>(ds.n), p);
    Eigen::Index col = 0;
    if (f.intercept) {
        ds.X.col(col++).setOnes();
        ds.fixed_names.push_back("(Intercept)");
    }
    for (const auto& name : f.fixed_terms) {
        const auto& v = d.numeric(name);
        ds.X.col(col++) = Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
        ds.fixed_names.push_back(name);
    }

    std::vector<std::string> paired_columns;
    for (const auto& t : f.random_terms)
        if (t.kind == RandomTerm::Kind::correlated_pair)
            paired_columns.insert(paired_columns.end(), t.columns.begin(), t.columns.end());

    for (const auto& t : f.random_terms) {
        switch (t.kind) {
        case RandomTerm::Kind::simple: {
            if (std::count(paired_columns.begin(), paired_columns.end(), t.columns[0]))
                throw DataError("'" + t.columns[0] + "' already carries a correlated-pair effect");
            ds.classifications.push_back(encode_classification(d, t.columns[0]));
            break;
        }
        case RandomTerm::Kind::interaction: {
            const auto a = encode_classification(d, t.columns[0]);
            const auto b = encode_classification(d, t.columns[1]);
            const std::vector<ClassificationMap> parents{a, b};
            const auto report = analyze_structure(parents);
            const auto& ps = report.pairs.front();
            if (ps.relation() == Relation::aliased) {
                throw DataError("interaction '" + t.expression() + "' of aliased classifications");
            }
            if (ps.cells.max_occupancy <= 1) {
                ds.warnings.push_back("interaction " + t.expression() +
                                      " confounded with residual: at most one observation per cell, "
                                      "interaction variance is not identified");
            }
            ds.classifications.push_back(interaction_map(a, b));
            break;
        }
        case RandomTerm::Kind::correlated_pair: {
            for (const auto& c : t.columns)
                if (std::count(paired_columns.begin(), paired_columns.end(), c) > 1)
                    throw DataError("column '" + c + "' appears in more than one correlated pair");
            auto dyad = build_dyad(d, t.columns[0], t.columns[1], opt.self_pairs);
            CorrelatedPair pr;
            pr.first = ds.classifications.size();
            pr.second = pr.first + 1;
            pr.name = t.columns[0] + "," + t.columns[1];
            ds.classifications.push_back(std::move(dyad.origin));
            ds.classifications.push_back(std::move(dyad.dest));
            ds.pairs.push_back(std::move(pr));
            break;
        }
        }
    }
    ds.validate();
    return ds;
}

}  // namespace ccmm
