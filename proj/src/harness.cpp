#include "sismon/harness.hpp"

#include <cmath>
#include <exception>
#include <limits>
#include <stdexcept>
#include <thread>

#include "json.hpp"

#include "sismon/csv.hpp"
#include "sismon/diagnostics.hpp"
#include "sismon/errors.hpp"
#include "sismon/numeric.hpp"
#include "sismon/rng.hpp"

namespace sismon {

namespace {

double kahan_mean(const std::vector<double>& xs) {
    KahanSum sum;
    for (double x : xs) sum.add(x);
    return sum.value() / static_cast<double>(xs.size());
}

double sample_sd(const std::vector<double>& xs, double mean) {
    KahanSum sum;
    for (double x : xs) sum.add((x - mean) * (x - mean));
    return std::sqrt(sum.value() / static_cast<double>(xs.size() - 1));
}

// Replications are partitioned into contiguous chunks, one per worker; each
// writes results only at its own replication indices, so the reduced vectors
// are identical no matter how many workers ran.
template <class Body>
void run_replications(std::size_t m_total, std::size_t workers, const Body& body) {
    if (workers <= 1) {
        for (std::size_t m = 0; m < m_total; ++m) body(m);
        return;
    }
    std::size_t used = std::min(workers, m_total);
    std::vector<std::thread> threads;
    std::vector<std::exception_ptr> errors(used);
    for (std::size_t t = 0; t < used; ++t) {
        std::size_t begin = t * m_total / used;
        std::size_t end = (t + 1) * m_total / used;
        threads.emplace_back([&, t, begin, end] {
            try {
                for (std::size_t m = begin; m < end; ++m) body(m);
            } catch (...) {
                errors[t] = std::current_exception();
            }
        });
    }
    for (std::thread& th : threads) th.join();
    for (const std::exception_ptr& err : errors) {
        if (err) std::rethrow_exception(err);
    }
}

template <class Fn>
auto with_cell_context(DesignKind design, std::size_t budget, Fn&& fn) {
    auto context = [&](const std::string& what) {
        return "(design=" + design_kind_name(design) + ", n=" + std::to_string(budget) + ") " +
               what;
    };
    try {
        return fn();
    } catch (const data_error& e) {
        throw data_error(context(e.what()));
    } catch (const config_error& e) {
        throw config_error(context(e.what()));
    } catch (const std::invalid_argument& e) {
        throw std::invalid_argument(context(e.what()));
    }
}

}  // namespace

RelativeEfficiency relative_efficiency(const SimCell& reference, const SimCell& target) {
    if (reference.budget != target.budget) {
        throw std::invalid_argument("relative efficiency needs matching budgets");
    }
    if (reference.sq_errors.size() != target.sq_errors.size() || reference.sq_errors.empty()) {
        throw std::invalid_argument("relative efficiency needs matching replication counts");
    }
    std::size_t m = reference.sq_errors.size();
    KahanSum ref_sum_k, tgt_sum_k;
    for (double e : reference.sq_errors) ref_sum_k.add(e);
    for (double e : target.sq_errors) tgt_sum_k.add(e);
    double ref_sum = ref_sum_k.value();
    double tgt_sum = tgt_sum_k.value();

    RelativeEfficiency re;
    if (tgt_sum == 0.0) {
        re.value = std::numeric_limits<double>::infinity();
        re.se = 0.0;
        re.infinite = true;
        return re;
    }
    re.value = (ref_sum / static_cast<double>(m)) / (tgt_sum / static_cast<double>(m));

    std::vector<double> jack(m);
    for (std::size_t i = 0; i < m; ++i) {
        double denom = tgt_sum - target.sq_errors[i];
        if (denom == 0.0) {
            re.se = std::numeric_limits<double>::infinity();
            return re;
        }
        jack[i] = (ref_sum - reference.sq_errors[i]) / denom;
    }
    double jack_mean = kahan_mean(jack);
    KahanSum dev;
    for (double j : jack) dev.add((j - jack_mean) * (j - jack_mean));
    re.se = std::sqrt(static_cast<double>(m - 1) / static_cast<double>(m) * dev.value());
    return re;
}

SimReport run_simulation(const Pool& pool, const SimConfig& config, std::size_t workers) {
    if (!pool.oracle_complete()) {
        throw data_error("simulation requires oracle-complete pool");
    }
    if (config.replications < 2) throw config_error("replications must be >= 2");
    if (config.designs.empty()) throw config_error("no designs configured");
    if (config.budgets.empty()) throw config_error("no budgets configured");
    if (workers < 1) workers = 1;

    std::optional<Stratification> strat = build_strata_from_spec(pool, config.strata);
    std::optional<Proposal> prop = build_proposal_from_spec(pool, config.proposal);
    for (DesignKind kind : config.designs) {
        if (design_is_stratified(kind) && !strat) {
            throw config_error("design " + design_kind_name(kind) + " requires a strata method");
        }
        if (design_uses_proposal(kind) && !prop) {
            throw config_error("design " + design_kind_name(kind) + " requires a proposal");
        }
    }

    SimReport report;
    report.seed = config.seed;
    report.pool_size = pool.size();
    report.epsilon = true_defect_rate(pool);
    report.replications = config.replications;
    report.strata_desc = strata_spec_description(config.strata);
    if (strat) {
        report.stratum_count = strat->stratum_count();
        report.strata_desc += ":P=" + std::to_string(strat->stratum_count());
    }
    report.proposal_present = config.proposal.present;
    report.proposal_desc =
        config.proposal.present ? transform_family_name(config.proposal.family) : "none";
    report.alpha = config.proposal.alpha;

    // Exact variances come from one diagnostics pass per budget. SRS needs no
    // proposal, so a uniform stand-in is used when none is configured; the
    // within-stratum defect moments it contributes are proposal-free.
    std::optional<StratumDiagnostics> diag;
    if (strat) {
        const Proposal& for_diag =
            prop ? *prop
                 : build_proposal(pool, ScoreTransform{TransformFamily::raw_score, 1e-6}, 0.0);
        diag = stratum_diagnostics(pool, *strat, for_diag);
    }

    double epsilon = report.epsilon;
    std::size_t m_total = config.replications;
    for (std::size_t budget : config.budgets) {
        std::optional<TheoremReport> theorem;
        if (strat) {
            if (budget < strat->stratum_count()) {
                throw config_error("budget " + std::to_string(budget) + " < " +
                                   std::to_string(strat->stratum_count()) +
                                   " strata: each stratum needs at least one draw");
            }
            theorem = theorem_report(*diag, allocate_proportional(*strat, budget), budget);
        }
        for (DesignKind kind : config.designs) {
            SimCell cell;
            cell.design = kind;
            cell.budget = budget;
            cell.replications = m_total;
            with_cell_context(kind, budget, [&] {
                DesignSpec spec;
                spec.kind = kind;
                spec.budget = budget;
                if (design_is_stratified(kind)) spec.strat = *strat;
                if (design_uses_proposal(kind)) spec.proposal = *prop;
                PlanSampler sampler(spec, pool);

                switch (kind) {
                    case DesignKind::RS:
                        cell.analytic_var =
                            epsilon * (1.0 - epsilon) / static_cast<double>(budget);
                        break;
                    case DesignKind::SRS: cell.analytic_var = theorem->var_srs; break;
                    case DesignKind::SIS: cell.analytic_var = theorem->var_sis; break;
                    case DesignKind::IS:
                        cell.analytic_var = strat ? theorem->var_is
                                                  : global_proposal_variance(pool, *prop) /
                                                        static_cast<double>(budget);
                        break;
                }

                cell.estimates.resize(m_total);
                cell.sq_errors.resize(m_total);
                std::string tag = design_kind_name(kind);
                run_replications(m_total, workers, [&](std::size_t m) {
                    std::uint64_t seed = derive_seed(config.seed, tag, budget, m + 1);
                    SamplePlan plan = sampler.draw(seed);
                    double value = estimate(plan, pool).value;
                    cell.estimates[m] = value;
                    cell.sq_errors[m] = (value - epsilon) * (value - epsilon);
                });
                cell.mse = kahan_mean(cell.sq_errors);
                cell.mse_se = sample_sd(cell.sq_errors, cell.mse) /
                              std::sqrt(static_cast<double>(m_total));
                cell.mean_estimate = kahan_mean(cell.estimates);
                cell.sd_estimate = sample_sd(cell.estimates, cell.mean_estimate);
            });
            report.cells.push_back(std::move(cell));
        }
    }

    // Relative efficiency against the RS cell of the same budget.
    for (SimCell& cell : report.cells) {
        const SimCell* rs = nullptr;
        for (const SimCell& other : report.cells) {
            if (other.design == DesignKind::RS && other.budget == cell.budget) {
                rs = &other;
                break;
            }
        }
        if (!rs) continue;
        cell.has_re = true;
        if (rs == &cell) {
            cell.re_vs_rs = 1.0;  // self-ratio, exact by definition
            cell.re_se = 0.0;
            cell.re_infinite = false;
            continue;
        }
        RelativeEfficiency re = relative_efficiency(*rs, cell);
        cell.re_vs_rs = re.value;
        cell.re_se = re.se;
        cell.re_infinite = re.infinite;
    }
    return report;
}

void write_sim_report_csv(const SimReport& report, const std::filesystem::path& path) {
    CsvFile out(path);
    out.row({"design", "strata", "proposal", "alpha", "n", "M", "mse", "mse_se", "analytic_var",
             "re_vs_rs", "re_se"});
    for (const SimCell& cell : report.cells) {
        std::string re_value, re_se;
        if (cell.has_re) {
            re_value = cell.re_infinite ? "inf" : format_double(cell.re_vs_rs);
            re_se = format_double(cell.re_se);
        }
        out.row({design_kind_name(cell.design), report.strata_desc, report.proposal_desc,
                 report.proposal_present ? format_double(report.alpha) : "",
                 std::to_string(cell.budget), std::to_string(cell.replications),
                 format_double(cell.mse), format_double(cell.mse_se),
                 format_double(cell.analytic_var), re_value, re_se});
    }
    out.close();
}

void write_sim_report_json(const SimReport& report, const std::filesystem::path& path) {
    nlohmann::json doc;
    doc["seed"] = report.seed;
    doc["pool_size"] = report.pool_size;
    doc["epsilon"] = report.epsilon;
    doc["replications"] = report.replications;
    doc["strata"] = report.strata_desc;
    doc["stratum_count"] = report.stratum_count;
    doc["proposal"] = report.proposal_desc;
    if (report.proposal_present) doc["alpha"] = report.alpha;
    nlohmann::json cells = nlohmann::json::array();
    for (const SimCell& cell : report.cells) {
        nlohmann::json row;
        row["design"] = design_kind_name(cell.design);
        row["n"] = cell.budget;
        row["M"] = cell.replications;
        row["mse"] = cell.mse;
        row["mse_se"] = cell.mse_se;
        row["analytic_var"] = cell.analytic_var;
        row["mean_estimate"] = cell.mean_estimate;
        row["sd_estimate"] = cell.sd_estimate;
        if (cell.has_re) {
            row["re_infinite"] = cell.re_infinite;
            if (cell.re_infinite) {
                row["re_vs_rs"] = nullptr;
            } else {
                row["re_vs_rs"] = cell.re_vs_rs;
            }
            row["re_se"] = cell.re_se;
        } else {
            row["re_vs_rs"] = nullptr;
        }
        cells.push_back(std::move(row));
    }
    doc["cells"] = std::move(cells);
    std::ofstream out(path);
    if (!out) throw data_error("cannot write '" + path.string() + "'");
    out << doc.dump(2) << '\n';
    if (!out) throw data_error("error writing '" + path.string() + "'");
}

}  // namespace sismon
