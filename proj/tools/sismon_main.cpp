// sismon: label-budgeted defect-rate monitoring.
//
// Subcommands: synth (generate pools), plan (draw a sampling plan), estimate
// (apply labels to a plan), diagnose (exact variance diagnostics), simulate
// (seeded Monte-Carlo replication grid).
//
// Exit codes: 0 success, 2 usage error, 3 data error, 4 config error,
// 1 unexpected internal failure.

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "sismon/config.hpp"
#include "sismon/designs.hpp"
#include "sismon/diagnostics.hpp"
#include "sismon/errors.hpp"
#include "sismon/harness.hpp"
#include "sismon/numeric.hpp"
#include "sismon/pool.hpp"
#include "sismon/proposal.hpp"
#include "sismon/rng.hpp"
#include "sismon/strata.hpp"

namespace {

using namespace sismon;

struct StrataFlags {
    std::string method = "none";
    std::string attr;
    std::string feature;
    std::size_t feature_bins = 1;
    std::size_t score_bins = 1;
    std::size_t min_count = 3;
    double min_frac = 0.005;
};

StrataSpec to_strata_spec(const StrataFlags& flags) {
    StrataSpec spec;
    if (flags.method == "none") {
        spec.method = StrataSpec::Method::none;
    } else if (flags.method == "categorical") {
        spec.method = StrataSpec::Method::categorical;
        if (flags.attr.empty()) {
            throw std::invalid_argument("--strata-attr required for categorical strata");
        }
        spec.attr = flags.attr;
    } else if (flags.method == "quantile") {
        spec.method = StrataSpec::Method::quantile;
        spec.feature = flags.feature;
        spec.feature_bins = flags.feature_bins;
        spec.score_bins = flags.score_bins;
        if (spec.feature.empty() && spec.feature_bins > 1) {
            throw std::invalid_argument("--strata-feature required when --feature-bins > 1");
        }
    } else {
        throw std::invalid_argument("unknown strata method '" + flags.method +
                                    "' (available: none, categorical, quantile)");
    }
    spec.min_count = flags.min_count;
    spec.min_frac = flags.min_frac;
    return spec;
}

void add_strata_flags(CLI::App* cmd, StrataFlags& flags) {
    cmd->add_option("--strata-method", flags.method, "none|categorical|quantile")
        ->default_val("none");
    cmd->add_option("--strata-attr", flags.attr, "attribute for categorical strata");
    cmd->add_option("--strata-feature", flags.feature,
                    "numeric attribute (or 'score') for quantile strata");
    cmd->add_option("--feature-bins", flags.feature_bins, "quantile bins on the feature")
        ->default_val(1);
    cmd->add_option("--score-bins", flags.score_bins, "score quantile bins per feature bin")
        ->default_val(1);
    cmd->add_option("--min-count", flags.min_count, "merge strata smaller than this count")
        ->default_val(3);
    cmd->add_option("--min-frac", flags.min_frac, "merge strata smaller than this pool fraction")
        ->default_val(0.005);
}

// Criteria within 1e-12 of zero are reported as equality rather than leaning
// on the sign of floating-point dust.
std::string verdict(double criterion, const char* relation) {
    if (std::abs(criterion) <= 1e-12) return std::string(relation) + " predicted: equality";
    return std::string(relation) + " predicted: " + (criterion < 0.0 ? "yes" : "no");
}

int cmd_synth(const std::string& preset, const std::string& spec_path, std::size_t n,
              std::uint64_t seed, const std::string& out) {
    std::vector<SynthStratum> spec;
    if (!preset.empty() && !spec_path.empty()) {
        throw std::invalid_argument("--preset and --spec are mutually exclusive");
    }
    if (!preset.empty()) {
        spec = preset_spec(preset, n);
    } else if (!spec_path.empty()) {
        spec = load_synth_spec(spec_path);
    } else {
        throw std::invalid_argument("one of --preset or --spec is required");
    }
    Pool pool = synth_pool(spec, seed);
    write_pool(pool, out);
    std::cout << "wrote " << out << " N=" << pool.size()
              << " epsilon=" << format_double(true_defect_rate(pool)) << "\n";
    return 0;
}

int cmd_plan(const std::string& pool_path, const std::string& design_name, std::size_t budget,
             std::optional<std::uint64_t> seed, std::optional<std::uint64_t> master_seed,
             std::optional<std::uint64_t> replication, const StrataFlags& strata_flags,
             std::optional<std::string> family, std::optional<double> alpha, double floor,
             const std::string& out, const std::string& strata_out,
             const std::string& proposal_out) {
    Pool pool = load_pool(pool_path);
    DesignKind kind = design_kind_from_name(design_name);

    DesignSpec spec;
    spec.kind = kind;
    spec.budget = budget;
    StrataSpec strata_spec = to_strata_spec(strata_flags);
    if (design_is_stratified(kind) && strata_spec.method == StrataSpec::Method::none) {
        throw std::invalid_argument(design_name + " requires --strata-method");
    }
    spec.strat = build_strata_from_spec(pool, strata_spec);
    if (design_uses_proposal(kind)) {
        if (!alpha) throw std::invalid_argument(design_name + " requires --alpha");
        ProposalConfig prop_spec;
        prop_spec.present = true;
        prop_spec.family = transform_family_from_name(family.value_or("raw_score"));
        prop_spec.alpha = *alpha;
        prop_spec.floor = floor;
        spec.proposal = build_proposal_from_spec(pool, prop_spec);
    }

    std::uint64_t plan_seed;
    if (seed) {
        if (master_seed || replication) {
            throw std::invalid_argument("--seed excludes --master-seed/--replication");
        }
        plan_seed = *seed;
    } else if (master_seed && replication) {
        // The same derivation the simulation harness uses for replication m,
        // so a plan can reproduce any harness replication exactly.
        plan_seed = derive_seed(*master_seed, design_kind_name(kind), budget, *replication);
    } else {
        throw std::invalid_argument("provide --seed, or --master-seed with --replication");
    }

    SamplePlan plan = draw_plan(spec, pool, plan_seed);
    write_plan(plan, out);
    if (!strata_out.empty()) {
        if (!spec.strat) throw std::invalid_argument("--strata-out needs a stratified design");
        write_stratification(*spec.strat, pool, strata_out);
    }
    if (!proposal_out.empty()) {
        if (!spec.proposal) throw std::invalid_argument("--proposal-out needs IS or SIS");
        write_proposal(*spec.proposal, pool, proposal_out);
    }
    std::cout << "wrote " << out << " design=" << design_name << " n=" << plan.draws.size()
              << " seed=" << plan_seed << "\n";
    return 0;
}

int cmd_estimate(const std::string& plan_path, const std::string& labels_path,
                 const std::string& pool_path, const std::string& out) {
    SamplePlan plan = read_plan(plan_path);
    Pool pool = load_pool(pool_path);
    LabelOracle oracle = LabelOracle::load(labels_path);
    std::vector<std::int64_t> ids;
    ids.reserve(plan.draws.size());
    for (const Draw& d : plan.draws) ids.push_back(d.id);
    std::map<std::int64_t, int> labels = oracle_query(oracle, ids);
    Estimate est = estimate(plan, labels, pool);
    write_estimate(est, out);
    std::cout << "value=" << format_double(est.value) << "\n";
    return 0;
}

int cmd_diagnose(const std::string& pool_path, const std::string& config_path,
                 const std::string& csv_out) {
    Pool pool = load_pool(pool_path);
    SimConfig config = load_sim_config(config_path);
    if (!pool.oracle_complete()) {
        throw data_error("diagnosis requires oracle-complete pool");
    }
    if (!config.proposal.present) {
        throw config_error(config_path + ": diagnose requires a proposal section");
    }
    std::optional<Stratification> built = build_strata_from_spec(pool, config.strata);
    Stratification strat = built ? *built : Stratification::single(pool.size());
    Proposal prop = *build_proposal_from_spec(pool, config.proposal);
    StratumDiagnostics diag = stratum_diagnostics(pool, strat, prop);

    std::cout << "pool=" << pool_path << " N=" << pool.size()
              << " epsilon=" << format_double(diag.epsilon) << "\n";
    std::cout << "strata=" << strata_spec_description(config.strata)
              << ":P=" << strat.stratum_count() << "\n";
    std::cout << "proposal=" << transform_family_name(config.proposal.family)
              << " alpha=" << format_double(config.proposal.alpha)
              << " floor=" << format_double(config.proposal.floor) << "\n";
    write_stratum_csv(diag, std::cout);

    // Budget-independent gap criteria.
    AllocationPlan first_alloc = allocate_proportional(strat, std::max(config.budgets.front(),
                                                                       strat.stratum_count()));
    TheoremReport head = theorem_report(diag, first_alloc, first_alloc.total);
    std::cout << "mismatch_term=" << format_double(head.mismatch_term) << "\n";
    std::cout << "inter_stratum_term=" << format_double(head.inter_stratum_term) << "\n";
    std::cout << "thm1_criterion=" << format_double(head.thm1_criterion) << "\n";
    if (strat.stratum_count() == 1) {
        std::cout << "Var_IS = Var_SIS\n";
    } else {
        // Criterion >= 0 predicts the stratified estimator at proportional
        // allocation does no worse than plain importance sampling.
        std::cout << verdict(-head.thm1_criterion, "SIS <= IS") << "\n";
    }
    std::cout << "thm2_criterion=" << format_double(head.thm2_criterion) << "\n";
    std::cout << verdict(head.thm2_criterion, "SIS <= SRS") << "\n";

    for (std::size_t budget : config.budgets) {
        if (budget < strat.stratum_count()) {
            throw config_error("budget " + std::to_string(budget) + " < " +
                               std::to_string(strat.stratum_count()) +
                               " strata: each stratum needs at least one draw");
        }
        AllocationPlan alloc = allocate_proportional(strat, budget);
        TheoremReport report = theorem_report(diag, alloc, budget);
        std::string alloc_str;
        for (std::size_t j = 0; j < alloc.counts.size(); ++j) {
            if (j) alloc_str += ',';
            alloc_str += std::to_string(alloc.counts[j]);
        }
        std::cout << "n=" << budget << " allocation=" << alloc_str
                  << " var_rs=" << format_double(report.var_rs)
                  << " var_srs=" << format_double(report.var_srs)
                  << " var_is=" << format_double(report.var_is)
                  << " var_sis=" << format_double(report.var_sis) << "\n";
        if (!report.decomposition_consistent) {
            std::cout << "note: n=" << budget
                      << " gap decomposition residual="
                      << format_double(report.decomposition_residual)
                      << " (proposal shares or allocation deviate from exact proportionality);"
                      << " exact variances are authoritative\n";
        }
    }

    if (!csv_out.empty()) {
        std::ofstream out(csv_out);
        if (!out) throw data_error("cannot write '" + csv_out + "'");
        write_stratum_csv(diag, out);
    }
    return 0;
}

int cmd_simulate(const std::string& pool_flag, const std::string& config_path,
                 const std::string& out_prefix, std::size_t workers) {
    SimConfig config = load_sim_config(config_path);
    std::string pool_path = !pool_flag.empty() ? pool_flag : config.pool_path;
    if (pool_path.empty()) {
        throw config_error(config_path + ": no pool given (config 'pool' or --pool)");
    }
    Pool pool = load_pool(pool_path);
    SimReport report = run_simulation(pool, config, workers);
    std::filesystem::path csv = out_prefix + ".csv";
    std::filesystem::path json = out_prefix + ".json";
    write_sim_report_csv(report, csv);
    write_sim_report_json(report, json);
    std::cout << "epsilon=" << format_double(report.epsilon) << " cells=" << report.cells.size()
              << " wrote " << csv.string() << " " << json.string() << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"stratified importance sampling for defect-rate monitoring"};
    app.require_subcommand(1);

    // synth
    auto* synth = app.add_subcommand("synth", "generate a synthetic labeled pool");
    std::string synth_preset, synth_spec, synth_out;
    std::size_t synth_n = 10000;
    std::uint64_t synth_seed = 0;
    synth->add_option("--preset", synth_preset,
                      "two-strata-aligned|two-strata-misaligned|low-defect");
    synth->add_option("--spec", synth_spec, "JSON stratum spec file");
    synth->add_option("--n", synth_n, "total pool size for presets")->default_val(10000);
    synth->add_option("--seed", synth_seed, "score-generation seed")->required();
    synth->add_option("--out", synth_out, "output pool CSV")->required();

    // plan
    auto* plan = app.add_subcommand("plan", "draw a sampling plan for annotation");
    std::string plan_pool, plan_design, plan_out, plan_strata_out, plan_proposal_out;
    std::size_t plan_budget = 0;
    std::optional<std::uint64_t> plan_seed, plan_master, plan_replication;
    StrataFlags plan_strata;
    std::optional<std::string> plan_family;
    std::optional<double> plan_alpha;
    double plan_floor = 1e-6;
    plan->add_option("--pool", plan_pool, "pool CSV")->required();
    plan->add_option("--design", plan_design, "RS|SRS|IS|SIS")->required();
    plan->add_option("--budget", plan_budget, "number of draws")->required();
    plan->add_option("--seed", plan_seed, "plan seed");
    plan->add_option("--master-seed", plan_master, "derive the seed like the simulation harness");
    plan->add_option("--replication", plan_replication, "replication index (with --master-seed)");
    add_strata_flags(plan, plan_strata);
    plan->add_option("--family", plan_family,
                     "raw_score|one_minus_score|margin|binary_entropy");
    plan->add_option("--alpha", plan_alpha, "proposal exponent (IS/SIS)");
    plan->add_option("--floor", plan_floor, "transformed-score floor")->default_val(1e-6);
    plan->add_option("--out", plan_out, "output plan CSV")->required();
    plan->add_option("--strata-out", plan_strata_out, "audit CSV of stratum assignment");
    plan->add_option("--proposal-out", plan_proposal_out, "audit CSV of proposal masses");

    // estimate
    auto* est = app.add_subcommand("estimate", "estimate the defect rate from a labeled plan");
    std::string est_plan, est_labels, est_pool, est_out;
    est->add_option("--plan", est_plan, "plan CSV from 'plan'")->required();
    est->add_option("--labels", est_labels, "labels CSV (id,true_label)")->required();
    est->add_option("--pool", est_pool, "pool CSV")->required();
    est->add_option("--out", est_out, "output estimate JSON")->required();

    // diagnose
    auto* diag = app.add_subcommand("diagnose", "exact variance and gap-criteria diagnostics");
    std::string diag_pool, diag_config, diag_csv;
    diag->add_option("--pool", diag_pool, "oracle-complete pool CSV")->required();
    diag->add_option("--config", diag_config, "experiment config JSON")->required();
    diag->add_option("--csv-out", diag_csv, "also write the per-stratum CSV here");

    // simulate
    auto* sim = app.add_subcommand("simulate", "seeded Monte-Carlo replication grid");
    std::string sim_pool, sim_config, sim_out;
    std::size_t sim_workers = 1;
    sim->add_option("--pool", sim_pool, "pool CSV (overrides config 'pool')");
    sim->add_option("--config", sim_config, "experiment config JSON")->required();
    sim->add_option("--out", sim_out, "output prefix (.csv and .json)")->required();
    sim->add_option("--workers", sim_workers, "worker threads")->default_val(1);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    try {
        if (synth->parsed()) {
            return cmd_synth(synth_preset, synth_spec, synth_n, synth_seed, synth_out);
        }
        if (plan->parsed()) {
            return cmd_plan(plan_pool, plan_design, plan_budget, plan_seed, plan_master,
                            plan_replication, plan_strata, plan_family, plan_alpha, plan_floor,
                            plan_out, plan_strata_out, plan_proposal_out);
        }
        if (est->parsed()) return cmd_estimate(est_plan, est_labels, est_pool, est_out);
        if (diag->parsed()) return cmd_diagnose(diag_pool, diag_config, diag_csv);
        if (sim->parsed()) return cmd_simulate(sim_pool, sim_config, sim_out, sim_workers);
        std::cerr << "no subcommand\n";
        return 2;
    } catch (const config_error& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 4;
    } catch (const data_error& e) {
        std::cerr << "data error: " << e.what() << "\n";
        return 3;
    } catch (const std::invalid_argument& e) {
        std::cerr << "usage error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
