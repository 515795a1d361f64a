#pragma once

// Analyst workflows behind the command-line tool. Each command writes its
// report to a stream, writes artifacts to disk, and returns a process exit code.

#include <ccmm/dataset.hpp>
#include <ccmm/design.hpp>
#include <ccmm/draws.hpp>
#include <ccmm/error.hpp>
#include <ccmm/formula.hpp>
#include <ccmm/oracle.hpp>
#include <ccmm/posterior.hpp>
#include <ccmm/sampler.hpp>
#include <ccmm/simulate.hpp>

#include <json.hpp>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

namespace ccmm {

enum ExitCode : int { kExitOk = 0, kExitUsage = 1, kExitNumerical = 2, kExitConvergenceWarning = 3 };

inline constexpr double kRhatWarning = 1.05;

enum class OutputFormat { table, doc };

struct RunConfig {
    std::string data;
    std::string formula;
    std::string engine = "gibbs";
    std::optional<int> iterations, burnin, thin, chains;  // MCMC-only
    bool recenter = false;                                 // MCMC-only
    std::uint64_t seed = 1;
    std::optional<double> prior_a, prior_b;
    std::string out;  // output directory; empty = report only
    OutputFormat format = OutputFormat::table;
    SelfPairPolicy self_pairs = SelfPairPolicy::forbid;

    McmcControl control() const {
        McmcControl c;
        c.iterations = iterations.value_or(c.iterations);
        c.burnin = burnin.value_or(c.burnin);
        c.thin = thin.value_or(c.thin);
        c.chains = chains.value_or(c.chains);
        c.seed = seed;
        c.recenter = recenter;
        return c;
    }

    PriorSpec prior() const {
        PriorSpec p;
        if (prior_a) p.variance.shape = *prior_a;
        if (prior_b) p.variance.scale = *prior_b;
        return p;
    }

    void validate() const {
        if (engine != "gibbs" && engine != "ml") throw DataError("engine must be 'gibbs' or 'ml'");
        if (engine == "ml" && (iterations || burnin || thin || chains || prior_a || prior_b || recenter))
            throw DataError(
                "engine ml does not take MCMC options (--iter, --burnin, --thin, --chains, --prior-*, --recenter)");
    }
};

/// Maps an exception escaping a command to its exit status.
inline int exit_code_for(const std::exception& e) {
    if (dynamic_cast<const NumericalError*>(&e)) return kExitNumerical;
    return kExitUsage;
}

namespace detail {

inline TableSchema schema_for(const ModelFormula& f) {
    TableSchema s;
    s.numeric.push_back(f.response);
    s.numeric.insert(s.numeric.end(), f.fixed_terms.begin(), f.fixed_terms.end());
    for (const auto& t : f.random_terms) s.labels.insert(s.labels.end(), t.columns.begin(), t.columns.end());
    return s;
}

inline std::string fmt(double v, int prec = 4) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*f", prec, v);
    return buf;
}

inline std::string pad(std::string s, std::size_t w) {
    if (s.size() < w) s.append(w - s.size(), ' ');
    return s;
}

inline void ensure_dir(const std::string& dir) {
    if (dir.empty()) return;
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) throw DataError("cannot create output directory '" + dir + "': " + ec.message());
}

inline void write_file(const std::string& path, const std::string& text) {
    std::ofstream out(path);
    if (!out) throw DataError("cannot write '" + path + "'");
    out << text;
}

}  // namespace detail

inline std::string render_structure(const StructureReport& r) {
    std::ostringstream os;
    os << "classifications:";
    for (std::size_t k = 0; k < r.names.size(); ++k)
        os << (k ? ", " : " ") << r.names[k] << " (" << r.cluster_counts[k] << " clusters)";
    os << '\n';
    for (const auto& p : r.pairs) {
        const auto rel = p.relation();
        const bool flip = rel == Relation::contains;
        const auto& first = r.names[flip ? p.b : p.a];
        const auto& second = r.names[flip ? p.a : p.b];
        os << first << ' ' << to_string(flip ? Relation::nested_in : rel) << ' ' << second << "; "
           << p.cells.occupied << '/' << p.cells.total << " cells occupied (" << p.cells.empty()
           << " empty); max occupancy " << p.cells.max_occupancy;
        if (rel == Relation::crossed && p.cells.max_occupancy <= 1)
            os << "; advisory: interaction not identifiable (at most one observation per cell, "
                  "confounded with residual)";
        os << '\n';
    }
    return os.str();
}

/// `structure --data PATH --classes a,b,c`
inline int cmd_structure(const std::string& data, const std::vector<std::string>& classes, std::ostream& out) {
    if (classes.empty()) throw DataError("no classification columns given");
    TableSchema schema;
    schema.labels = classes;
    const auto d = read_table(data, schema);
    std::vector<ClassificationMap> maps;
    for (const auto& c : classes) maps.push_back(encode_classification(d, c));
    out << render_structure(analyze_structure(maps));
    return kExitOk;
}

inline nlohmann::json summary_json(const SummaryTable& s) {
    nlohmann::json rows = nlohmann::json::array();
    for (const auto& r : s.rows) {
        rows.push_back({{"name", r.name}, {"mean", r.mean}, {"sd", r.sd}, {"q2.5", r.q025}, {"q50", r.q50},
                        {"q97.5", r.q975}, {"rhat", r.rhat}, {"ess", r.ess}});
    }
    return rows;
}

inline nlohmann::json vpc_json(const VpcReport& v) {
    nlohmann::json rows = nlohmann::json::array();
    for (const auto& r : v.rows)
        rows.push_back({{"component", r.component}, {"mean", r.mean}, {"q2.5", r.q025}, {"q97.5", r.q975}});
    return rows;
}

inline std::string render_summary(const SummaryTable& s, const VpcReport& v) {
    std::ostringstream os;
    os << detail::pad("parameter", 26) << detail::pad("mean", 11) << detail::pad("sd", 10)
       << detail::pad("2.5%", 11) << detail::pad("50%", 11) << detail::pad("97.5%", 11)
       << detail::pad("rhat", 8) << "ess\n";
    for (const auto& r : s.rows) {
        os << detail::pad(r.name, 26) << detail::pad(detail::fmt(r.mean), 11) << detail::pad(detail::fmt(r.sd), 10)
           << detail::pad(detail::fmt(r.q025), 11) << detail::pad(detail::fmt(r.q50), 11)
           << detail::pad(detail::fmt(r.q975), 11) << detail::pad(detail::fmt(r.rhat, 3), 8)
           << detail::fmt(r.ess, 0) << '\n';
    }
    os << "\nvariance partition coefficients\n";
    for (const auto& r : v.rows) {
        os << detail::pad(r.component, 26) << detail::pad(detail::fmt(r.mean), 11) << '[' << detail::fmt(r.q025)
           << ", " << detail::fmt(r.q975) << "]\n";
    }
    return os.str();
}

struct GibbsRun {
    ModelFormula formula;
    DesignSet design;
    DrawsMatrix draws;
    SummaryTable summary;
    VpcReport vpc;
};

inline GibbsRun run_gibbs(const std::string& data, const std::string& formula_text, const McmcControl& control,
                          const PriorSpec& prior, SelfPairPolicy self_pairs = SelfPairPolicy::forbid) {
    GibbsRun r;
    r.formula = parse_formula(formula_text);
    const auto d = read_table(data, detail::schema_for(r.formula));
    r.design = build_design(r.formula, d, {self_pairs});
    r.draws = gibbs_fit(r.design, response_vector(r.formula, d), prior, control);
    r.summary = summarize(r.draws);
    r.vpc = vpc(r.draws);
    return r;
}

/// `fit --data PATH --formula STR --engine gibbs|ml ...`
inline int cmd_fit(const RunConfig& cfg, std::ostream& out) {
    cfg.validate();
    const auto formula = parse_formula(cfg.formula);
    if (cfg.engine == "ml") {
        const auto d = read_table(cfg.data, detail::schema_for(formula));
        const auto ds = build_design(formula, d, {cfg.self_pairs});
        check_dense_guard(ds);
        const auto fit = ml_fit(ds, response_vector(formula, d));
        const auto names = variance_names(ds);
        const auto values = variance_values(fit.theta);

        nlohmann::json doc;
        doc["engine"] = "ml";
        doc["formula"] = render_formula(formula);
        doc["n"] = ds.n;
        doc["loglik"] = fit.loglik;
        doc["theta_hat"] = nlohmann::json::object();
        for (std::size_t i = 0; i < names.size(); ++i) doc["theta_hat"][names[i]] = values[i];
        doc["beta_hat"] = nlohmann::json::object();
        for (Eigen::Index j = 0; j < fit.beta_hat.size(); ++j)
            doc["beta_hat"]["beta[" + std::to_string(j) + "]"] = fit.beta_hat[j];
        doc["warnings"] = ds.warnings;

        std::ostringstream table;
        table << "engine: ml (profile likelihood, n = " << ds.n << ")\n";
        table << "loglik: " << detail::format_double(fit.loglik) << '\n';
        for (Eigen::Index j = 0; j < fit.beta_hat.size(); ++j)
            table << detail::pad("beta[" + std::to_string(j) + "]", 26) << detail::fmt(fit.beta_hat[j], 6) << "   ("
                  << ds.fixed_names[static_cast<std::size_t>(j)] << ")\n";
        for (std::size_t i = 0; i < names.size(); ++i)
            table << detail::pad(names[i], 26) << detail::fmt(values[i], 6) << '\n';
        for (const auto& w : ds.warnings) table << "warning: " << w << '\n';

        const std::string report = cfg.format == OutputFormat::doc ? doc.dump(2) + "\n" : table.str();
        out << report;
        if (!cfg.out.empty()) {
            detail::ensure_dir(cfg.out);
            std::ostringstream est;
            est << "parameter,estimate\n";
            for (Eigen::Index j = 0; j < fit.beta_hat.size(); ++j)
                est << "beta[" << j << "]," << detail::format_double(fit.beta_hat[j]) << '\n';
            for (std::size_t i = 0; i < names.size(); ++i)
                est << detail::escape_csv_field(names[i]) << ',' << detail::format_double(values[i]) << '\n';
            est << "loglik," << detail::format_double(fit.loglik) << '\n';
            detail::write_file(cfg.out + "/estimates.csv", est.str());
            detail::write_file(cfg.out + (cfg.format == OutputFormat::doc ? "/summary.json" : "/summary.txt"), report);
        }
        return kExitOk;
    }

    const auto run = run_gibbs(cfg.data, cfg.formula, cfg.control(), cfg.prior(), cfg.self_pairs);
    const auto bad = run.summary.unconverged(kRhatWarning);

    std::string report;
    if (cfg.format == OutputFormat::doc) {
        nlohmann::json doc;
        doc["engine"] = "gibbs";
        doc["formula"] = render_formula(run.formula);
        doc["n"] = run.design.n;
        doc["chains"] = run.draws.chain_count();
        doc["iterations"] = run.draws.iterations;
        doc["burnin"] = run.draws.burnin;
        doc["thin"] = run.draws.thin;
        doc["seed"] = run.draws.seed;
        doc["fixed_effects"] = run.design.fixed_names;
        doc["parameters"] = summary_json(run.summary);
        doc["vpc"] = vpc_json(run.vpc);
        doc["warnings"] = run.design.warnings;
        doc["variance_floor_hits"] = run.draws.floor_hits;
        doc["convergence_warning"] = !bad.empty();
        doc["unconverged"] = bad;
        report = doc.dump(2) + "\n";
    } else {
        std::ostringstream os;
        os << "engine: gibbs; " << run.draws.chain_count() << " chains x " << run.draws.draws_per_chain()
           << " retained draws; formula: " << render_formula(run.formula) << '\n';
        os << render_summary(run.summary, run.vpc);
        for (const auto& w : run.design.warnings) os << "warning: " << w << '\n';
        std::uint64_t floors = 0;
        for (auto h : run.draws.floor_hits) floors += h;
        if (floors) os << "warning: variance floor hit " << floors << " times\n";
        if (!bad.empty()) {
            os << "warning: R-hat > " << kRhatWarning << " for";
            for (const auto& b : bad) os << ' ' << b;
            os << '\n';
        }
        report = os.str();
    }
    out << report;
    if (!cfg.out.empty()) {
        detail::ensure_dir(cfg.out);
        write_draws(cfg.out + "/draws.csv", run.draws);
        detail::write_file(cfg.out + (cfg.format == OutputFormat::doc ? "/summary.json" : "/summary.txt"), report);
    }
    return bad.empty() ? kExitOk : kExitConvergenceWarning;
}

struct CompareRow {
    std::string component;
    std::optional<ParameterSummary> full, reduced;
    std::optional<double> full_vpc, reduced_vpc;
    double delta = 0.0;  // reduced - full posterior mean
    bool flagged = false;
    std::string note;
};

struct CompareReport {
    std::vector<CompareRow> rows;
    bool convergence_warning = false;

    const CompareRow& at(const std::string& component) const {
        for (const auto& r : rows)
            if (r.component == component) return r;
        throw DataError("comparison has no component '" + component + "'");
    }
};

/// Fits both specifications on the same data and contrasts their variance components.
/// A shared component is flagged when its posterior means differ by more than 1.96
/// combined posterior standard deviations.
inline CompareReport compare_fits(const GibbsRun& full, const GibbsRun& reduced) {
    CompareReport rep;
    rep.convergence_warning =
        !full.summary.unconverged(kRhatWarning).empty() || !reduced.summary.unconverged(kRhatWarning).empty();
    for (const auto& r : full.summary.rows) {
        if (!is_variance_parameter(r.name)) continue;
        CompareRow row;
        row.component = r.name;
        row.full = r;
        row.full_vpc = full.vpc.at(r.name).mean;
        if (reduced.draws.has(r.name)) {
            row.reduced = reduced.summary.at(r.name);
            row.reduced_vpc = reduced.vpc.at(r.name).mean;
            row.delta = row.reduced->mean - r.mean;
            const double se = std::sqrt(r.sd * r.sd + row.reduced->sd * row.reduced->sd);
            row.flagged = std::abs(row.delta) > 1.96 * se;
            row.note = row.flagged ? (row.delta > 0 ? "inflated" : "deflated") : "";
        } else {
            row.note = "omitted in reduced";
        }
        rep.rows.push_back(std::move(row));
    }
    return rep;
}

inline void check_nested_formulas(const ModelFormula& full, const ModelFormula& reduced) {
    if (full.response != reduced.response) throw DataError("full and reduced formulas have different responses");
    for (const auto& t : reduced.random_terms) {
        const bool found = std::any_of(full.random_terms.begin(), full.random_terms.end(),
                                       [&](const RandomTerm& u) { return u.key() == t.key(); });
        if (!found) {
            throw DataError("reduced formula term '" + t.expression() +
                            "' is not in the full formula; formulas are not nested");
        }
    }
}

inline std::string render_compare(const CompareReport& rep) {
    std::ostringstream os;
    os << detail::pad("component", 26) << detail::pad("full", 24) << detail::pad("reduced", 24)
       << detail::pad("delta", 10) << detail::pad("vpc full", 10) << detail::pad("vpc red", 10) << "note\n";
    auto cell = [](const std::optional<ParameterSummary>& s) {
        if (!s) return std::string("-");
        return detail::fmt(s->mean) + " [" + detail::fmt(s->q025, 3) + "," + detail::fmt(s->q975, 3) + "]";
    };
    for (const auto& r : rep.rows) {
        os << detail::pad(r.component, 26) << detail::pad(cell(r.full), 24) << detail::pad(cell(r.reduced), 24)
           << detail::pad(r.reduced ? detail::fmt(r.delta) : "-", 10)
           << detail::pad(r.full_vpc ? detail::fmt(*r.full_vpc) : "-", 10)
           << detail::pad(r.reduced_vpc ? detail::fmt(*r.reduced_vpc) : "-", 10) << (r.flagged ? "* " : "")
           << r.note << '\n';
    }
    if (rep.convergence_warning) os << "warning: R-hat > " << kRhatWarning << " in at least one fit\n";
    return os.str();
}

struct CompareConfig {
    std::string data;
    std::string full;
    std::string reduced;
    McmcControl control;
    PriorSpec prior;
    OutputFormat format = OutputFormat::table;
    SelfPairPolicy self_pairs = SelfPairPolicy::forbid;
};

/// `compare --data PATH --full STR --reduced STR ...`
inline int cmd_compare(const CompareConfig& cfg, std::ostream& out, CompareReport* report = nullptr) {
    check_nested_formulas(parse_formula(cfg.full), parse_formula(cfg.reduced));
    const auto full = run_gibbs(cfg.data, cfg.full, cfg.control, cfg.prior, cfg.self_pairs);
    const auto reduced = run_gibbs(cfg.data, cfg.reduced, cfg.control, cfg.prior, cfg.self_pairs);
    auto rep = compare_fits(full, reduced);
    if (cfg.format == OutputFormat::doc) {
        nlohmann::json doc;
        doc["full"] = render_formula(full.formula);
        doc["reduced"] = render_formula(reduced.formula);
        doc["components"] = nlohmann::json::array();
        for (const auto& r : rep.rows) {
            nlohmann::json row{{"component", r.component}, {"full_mean", r.full->mean}, {"flagged", r.flagged},
                               {"note", r.note}, {"full_vpc", *r.full_vpc}};
            if (r.reduced) {
                row["reduced_mean"] = r.reduced->mean;
                row["delta"] = r.delta;
                row["reduced_vpc"] = *r.reduced_vpc;
            }
            doc["components"].push_back(row);
        }
        doc["convergence_warning"] = rep.convergence_warning;
        out << doc.dump(2) << '\n';
    } else {
        out << "full:    " << render_formula(full.formula) << '\n'
            << "reduced: " << render_formula(reduced.formula) << "\n\n"
            << render_compare(rep);
    }
    const int code = rep.convergence_warning ? kExitConvergenceWarning : kExitOk;
    if (report) *report = std::move(rep);
    return code;
}

/// `simulate --design PATH --seed N --out PATH`
inline int cmd_simulate(const std::string& design_path, std::optional<std::uint64_t> seed, const std::string& out_path,
                        std::ostream& out) {
    auto sd = read_sim_design(design_path);
    if (seed) sd.seed = *seed;
    const auto d = simulate(sd);
    write_table(out_path, d);
    out << "wrote " << d.n() << " rows to " << out_path << " (scheme " << to_string(sd.scheme) << ", seed " << sd.seed
        << ")\n";
    return kExitOk;
}

}  // namespace ccmm
