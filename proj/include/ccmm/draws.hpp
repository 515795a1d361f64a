#pragma once

// MCMC output: per chain, retained iterations x named parameters.
//
// File format: comma-delimited with header "chain,iteration,<parameter names...>",
// one row per retained iteration. Names containing commas are quoted.

#include <ccmm/detail/csv.hpp>
#include <ccmm/error.hpp>

#include <Eigen/Dense>

#include <cstdint>
#include <fstream>
#include <istream>
#include <ostream>
#include <string>
#include <vector>

namespace ccmm {

struct DrawsMatrix {
    std::vector<std::string> names;
    std::vector<Eigen::MatrixXd> chains;  // rows = retained iterations, cols = names
    int iterations = 0;
    int burnin = 0;
    int thin = 1;
    std::uint64_t seed = 0;
    std::vector<std::uint64_t> floor_hits;  // variance-floor activations per chain

    std::size_t chain_count() const noexcept { return chains.size(); }
    std::size_t draws_per_chain() const noexcept {
        return chains.empty() ? 0 : static_cast<std::size_t>(chains.front().rows());
    }
    std::size_t total_draws() const noexcept {
        std::size_t t = 0;
        for (const auto& c : chains) t += static_cast<std::size_t>(c.rows());
        return t;
    }

    bool has(const std::string& name) const {
        for (const auto& n : names)
            if (n == name) return true;
        return false;
    }

    Eigen::Index index(const std::string& name) const {
        for (std::size_t i = 0; i < names.size(); ++i)
            if (names[i] == name) return static_cast<Eigen::Index>(i);
        throw DataError("draws have no parameter '" + name + "'");
    }

    /// All chains concatenated in chain order.
    Eigen::VectorXd pooled(const std::string& name) const {
        const auto col = index(name);
        Eigen::VectorXd out(static_cast<Eigen::Index>(total_draws()));
        Eigen::Index at = 0;
        for (const auto& c : chains) {
            out.segment(at, c.rows()) = c.col(col);
            at += c.rows();
        }
        return out;
    }

    double mean(const std::string& name) const { return pooled(name).mean(); }
};

inline void write_draws(std::ostream& out, const DrawsMatrix& d) {
    out << "chain,iteration";
    for (const auto& n : d.names) out << ',' << detail::escape_csv_field(n);
    out << '\n';
    for (std::size_t c = 0; c < d.chains.size(); ++c) {
        const auto& m = d.chains[c];
        for (Eigen::Index r = 0; r < m.rows(); ++r) {
            out << c << ',' << (d.burnin + (r + 1) * d.thin);
            for (Eigen::Index k = 0; k < m.cols(); ++k) out << ',' << detail::format_double(m(r, k));
            out << '\n';
        }
    }
}

inline void write_draws(const std::string& path, const DrawsMatrix& d) {
    std::ofstream out(path);
    if (!out) throw DataError("cannot write '" + path + "'");
    write_draws(out, d);
}

/// Reads a draws file; iteration metadata is not stored in the file and is left at defaults.
inline DrawsMatrix read_draws(std::istream& in) {
    std::string line;
    std::size_t line_no = 0;
    if (!detail::read_csv_line(in, line)) throw DataError("empty draws file");
    ++line_no;
    auto header = detail::split_csv_record(line, line_no);
    if (header.size() < 2 || header[0] != "chain" || header[1] != "iteration") {
        throw DataError("draws header must start with 'chain,iteration'");
    }
    DrawsMatrix d;
    d.names.assign(header.begin() + 2, header.end());
    std::vector<std::vector<std::vector<double>>> rows;
    while (detail::read_csv_line(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        auto f = detail::split_csv_record(line, line_no);
        if (f.size() != header.size()) {
            throw DataError("draws line " + std::to_string(line_no) + ": wrong field count");
        }
        const auto chain = std::stoul(f[0]);
        if (chain >= rows.size()) rows.resize(chain + 1);
        std::vector<double> v;
        v.reserve(d.names.size());
        for (std::size_t k = 2; k < f.size(); ++k) v.push_back(std::strtod(f[k].c_str(), nullptr));
        rows[chain].push_back(std::move(v));
    }
    for (const auto& chain : rows) {
        Eigen::MatrixXd m(static_cast<Eigen::Index>(chain.size()), static_cast<Eigen::Index>(d.names.size()));
        for (std::size_t r = 0; r < chain.size(); ++r)
            for (std::size_t k = 0; k < d.names.size(); ++k)
                m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(k)) = chain[r][k];
        d.chains.push_back(std::move(m));
    }
    d.floor_hits.assign(d.chains.size(), 0);
    return d;
}

inline DrawsMatrix read_draws(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open '" + path + "'");
    return read_draws(in);
}

}  // namespace ccmm
