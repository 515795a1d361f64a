// ccmm: simulate, inspect, fit, and compare cross-classified random-intercept models.

#include <ccmm/commands.hpp>

#include <CLI11.hpp>

#include <iostream>

namespace {

const std::map<std::string, ccmm::OutputFormat> kFormats{{"table", ccmm::OutputFormat::table},
                                                          {"doc", ccmm::OutputFormat::doc}};
const std::map<std::string, ccmm::SelfPairPolicy> kSelfPairs{{"forbid", ccmm::SelfPairPolicy::forbid},
                                                             {"allow", ccmm::SelfPairPolicy::allow}};

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Cross-classified multilevel models: simulate, inspect structure, fit, compare"};
    app.require_subcommand(1);

    ccmm::RunConfig fit;
    auto* fit_cmd = app.add_subcommand("fit", "fit a model by Gibbs sampling or dense maximum likelihood");
    fit_cmd->add_option("--data", fit.data, "input CSV")->required()->check(CLI::ExistingFile);
    fit_cmd->add_option("--formula", fit.formula, "model formula, e.g. 'y ~ x + (1|school) + (1|neigh)'")
        ->required();
    fit_cmd->add_option("--engine", fit.engine, "gibbs or ml")->check(CLI::IsMember({"gibbs", "ml"}));
    fit_cmd->add_option("--iter", fit.iterations, "total iterations per chain (default 5000)");
    fit_cmd->add_option("--burnin", fit.burnin, "burn-in iterations (default 500)");
    fit_cmd->add_option("--thin", fit.thin, "keep every k-th draw (default 1)");
    fit_cmd->add_option("--chains", fit.chains, "number of chains (default 2)");
    fit_cmd->add_option("--seed", fit.seed, "random seed");
    fit_cmd->add_flag("--recenter", fit.recenter, "add intercept/effect location moves to each sweep");
    fit_cmd->add_option("--prior-a", fit.prior_a, "inverse-gamma shape for variances (default 0.001)");
    fit_cmd->add_option("--prior-b", fit.prior_b, "inverse-gamma scale for variances (default 0.001)");
    fit_cmd->add_option("--out", fit.out, "output directory for draws/estimates and summary");
    fit_cmd->add_option("--format", fit.format, "summary format: table or doc")
        ->transform(CLI::CheckedTransformer(kFormats));
    fit_cmd->add_option("--self-pairs", fit.self_pairs, "dyadic self pairs: forbid or allow")
        ->transform(CLI::CheckedTransformer(kSelfPairs));

    std::string design_path, sim_out;
    std::optional<std::uint64_t> sim_seed;
    auto* sim_cmd = app.add_subcommand("simulate", "simulate a data set from a design file");
    sim_cmd->add_option("--design", design_path, "JSON design file")->required()->check(CLI::ExistingFile);
    sim_cmd->add_option("--seed", sim_seed, "overrides the design's seed");
    sim_cmd->add_option("--out", sim_out, "output CSV")->required();

    std::string structure_data;
    std::vector<std::string> classes;
    auto* structure_cmd = app.add_subcommand("structure", "report nesting/crossing and cell occupancy");
    structure_cmd->add_option("--data", structure_data, "input CSV")->required()->check(CLI::ExistingFile);
    structure_cmd->add_option("--classes", classes, "classification columns, comma separated")
        ->required()
        ->delimiter(',');

    ccmm::CompareConfig cmp;
    int cmp_iter = cmp.control.iterations, cmp_burnin = cmp.control.burnin, cmp_thin = cmp.control.thin,
        cmp_chains = cmp.control.chains;
    std::uint64_t cmp_seed = cmp.control.seed;
    auto* cmp_cmd = app.add_subcommand("compare", "fit a full and a reduced specification and contrast them");
    cmp_cmd->add_option("--data", cmp.data, "input CSV")->required()->check(CLI::ExistingFile);
    cmp_cmd->add_option("--full", cmp.full, "full formula")->required();
    cmp_cmd->add_option("--reduced", cmp.reduced, "reduced formula (random terms a subset of the full)")
        ->required();
    cmp_cmd->add_option("--iter", cmp_iter, "total iterations per chain");
    cmp_cmd->add_option("--burnin", cmp_burnin, "burn-in iterations");
    cmp_cmd->add_option("--thin", cmp_thin, "keep every k-th draw");
    cmp_cmd->add_option("--chains", cmp_chains, "number of chains");
    cmp_cmd->add_option("--seed", cmp_seed, "random seed");
    bool cmp_recenter = false;
    cmp_cmd->add_flag("--recenter", cmp_recenter, "add intercept/effect location moves to each sweep");
    cmp_cmd->add_option("--prior-a", cmp.prior.variance.shape, "inverse-gamma shape for variances");
    cmp_cmd->add_option("--prior-b", cmp.prior.variance.scale, "inverse-gamma scale for variances");
    cmp_cmd->add_option("--format", cmp.format, "report format: table or doc")
        ->transform(CLI::CheckedTransformer(kFormats));
    cmp_cmd->add_option("--self-pairs", cmp.self_pairs, "dyadic self pairs: forbid or allow")
        ->transform(CLI::CheckedTransformer(kSelfPairs));

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? ccmm::kExitOk : ccmm::kExitUsage;
    }

    try {
        if (*fit_cmd) return ccmm::cmd_fit(fit, std::cout);
        if (*sim_cmd) return ccmm::cmd_simulate(design_path, sim_seed, sim_out, std::cout);
        if (*structure_cmd) return ccmm::cmd_structure(structure_data, classes, std::cout);
        if (*cmp_cmd) {
            cmp.control = {cmp_iter, cmp_burnin, cmp_thin, cmp_chains, cmp_seed, cmp_recenter};
            return ccmm::cmd_compare(cmp, std::cout);
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return ccmm::exit_code_for(e);
    }
    return ccmm::kExitUsage;
}
