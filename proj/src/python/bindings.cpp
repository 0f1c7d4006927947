// Python surface over the sampling library: pool construction, strata,
// proposals, plans, estimates, diagnostics, and the simulation harness.
// Report-like results cross the boundary as plain dicts.

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <optional>

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

namespace py = pybind11;
using namespace sismon;

namespace {

Pool pool_from_columns(const std::vector<std::int64_t>& ids, const std::vector<double>& scores,
                       const std::vector<int>& pred_labels,
                       const std::optional<std::vector<int>>& true_labels,
                       const std::map<std::string, std::vector<std::string>>& attrs) {
    if (ids.size() != scores.size() || ids.size() != pred_labels.size() ||
        (true_labels && true_labels->size() != ids.size())) {
        throw std::invalid_argument("column lengths differ");
    }
    std::vector<Instance> rows(ids.size());
    for (std::size_t i = 0; i < ids.size(); ++i) {
        rows[i].id = ids[i];
        rows[i].score = scores[i];
        rows[i].pred_label = pred_labels[i];
        if (true_labels) rows[i].true_label = (*true_labels)[i];
    }
    std::map<std::string, AttrColumn> cols;
    for (const auto& [name, raw] : attrs) {
        AttrColumn col;
        col.raw = raw;
        col.numeric = true;
        for (const std::string& cell : raw) {
            try {
                col.num.push_back(parse_double(cell, ""));
            } catch (const data_error&) {
                col.numeric = false;
                col.num.clear();
                break;
            }
        }
        cols[name] = std::move(col);
    }
    return Pool::from_rows(std::move(rows), std::move(cols));
}

py::dict diag_to_dict(const StratumDiagnostics& diag) {
    py::list strata;
    for (const StratumDiag& d : diag.strata) {
        py::dict row;
        row["stratum"] = d.stratum + 1;
        row["size"] = d.size;
        row["w"] = d.w;
        row["r"] = d.r;
        row["pi"] = d.pi;
        row["V"] = d.V;
        row["T_sis"] = d.T_sis;
        row["T_is"] = d.T_is;
        row["delta"] = d.delta;
        strata.append(row);
    }
    py::dict out;
    out["epsilon"] = diag.epsilon;
    out["strata"] = strata;
    return out;
}

py::dict report_to_dict(const TheoremReport& report) {
    py::dict out;
    out["mismatch_term"] = report.mismatch_term;
    out["inter_stratum_term"] = report.inter_stratum_term;
    out["thm1_criterion"] = report.thm1_criterion;
    out["thm2_criterion"] = report.thm2_criterion;
    out["var_rs"] = report.var_rs;
    out["var_srs"] = report.var_srs;
    out["var_is"] = report.var_is;
    out["var_sis"] = report.var_sis;
    out["epsilon"] = report.epsilon;
    out["n"] = report.n;
    out["allocation"] = report.allocation;
    out["decomposition_residual"] = report.decomposition_residual;
    out["decomposition_consistent"] = report.decomposition_consistent;
    return out;
}

DesignSpec make_spec(const std::string& design, std::size_t budget,
                     const std::optional<Stratification>& strat,
                     const std::optional<Proposal>& prop) {
    DesignSpec spec;
    spec.kind = design_kind_from_name(design);
    spec.budget = budget;
    spec.strat = strat;
    spec.proposal = prop;
    return spec;
}

}  // namespace

PYBIND11_MODULE(sismon, m) {
    m.doc() = "stratified importance sampling for defect-rate monitoring";

    py::register_exception<data_error>(m, "DataError", PyExc_ValueError);
    py::register_exception<config_error>(m, "ConfigError", PyExc_ValueError);

    py::class_<Pool>(m, "Pool")
        .def_static("from_columns", &pool_from_columns, py::arg("ids"), py::arg("scores"),
                    py::arg("pred_labels"), py::arg("true_labels") = std::nullopt,
                    py::arg("attrs") = std::map<std::string, std::vector<std::string>>{})
        .def("__len__", &Pool::size)
        .def_property_readonly("oracle_complete", &Pool::oracle_complete)
        .def("score", [](const Pool& p, std::size_t i) { return p.at(i).score; })
        .def("id", [](const Pool& p, std::size_t i) { return p.at(i).id; });

    py::class_<Stratification>(m, "Stratification")
        .def_property_readonly("stratum_count", &Stratification::stratum_count)
        .def("sizes",
             [](const Stratification& s) {
                 std::vector<std::size_t> out;
                 for (std::size_t j = 0; j < s.stratum_count(); ++j) out.push_back(s.size_of(j));
                 return out;
             })
        .def("weights", [](const Stratification& s) {
            std::vector<double> out;
            for (std::size_t j = 0; j < s.stratum_count(); ++j) out.push_back(s.weight(j));
            return out;
        });

    py::class_<Proposal>(m, "Proposal")
        .def_property_readonly("alpha", &Proposal::alpha)
        .def("mass", &Proposal::mass)
        .def("__len__", &Proposal::size);

    py::class_<SamplePlan>(m, "SamplePlan")
        .def_property_readonly("design",
                               [](const SamplePlan& p) { return design_kind_name(p.design); })
        .def_property_readonly("seed", [](const SamplePlan& p) { return p.seed; })
        .def("draws", [](const SamplePlan& p) {
            std::vector<std::tuple<std::int64_t, std::optional<std::size_t>, double>> out;
            for (const Draw& d : p.draws) {
                out.emplace_back(d.id,
                                 d.stratum ? std::optional<std::size_t>(*d.stratum + 1)
                                           : std::nullopt,
                                 d.weight);
            }
            return out;
        });

    m.def("load_pool", [](const std::string& path) { return load_pool(path); }, py::arg("path"));
    m.def("write_pool",
          [](const Pool& pool, const std::string& path) { write_pool(pool, path); });
    m.def("true_defect_rate", &true_defect_rate);
    m.def(
        "synth_pool",
        [](const std::vector<std::tuple<std::size_t, double, std::pair<double, double>,
                                        std::pair<double, double>>>& spec,
           std::uint64_t seed) {
            std::vector<SynthStratum> strata;
            for (const auto& [size, rate, defect, correct] : spec) {
                strata.push_back(SynthStratum{size, rate, ScoreLaw{defect.first, defect.second},
                                              ScoreLaw{correct.first, correct.second}});
            }
            return synth_pool(strata, seed);
        },
        py::arg("spec"), py::arg("seed"),
        "spec: list of (size, defect_rate, (defect_lo, defect_hi), (correct_lo, correct_hi))");
    m.def(
        "synth_preset",
        [](const std::string& name, std::size_t n, std::uint64_t seed) {
            return synth_pool(preset_spec(name, n), seed);
        },
        py::arg("name"), py::arg("n"), py::arg("seed"));
    m.def("preset_names", &preset_names);

    m.def("build_categorical_strata", &build_categorical_strata);
    m.def("build_quantile_strata", &build_quantile_strata, py::arg("pool"), py::arg("feature"),
          py::arg("feature_bins"), py::arg("score_bins"));
    m.def("merge_small_strata", &merge_small_strata, py::arg("strat"), py::arg("pool"),
          py::arg("min_count"), py::arg("min_frac"));
    m.def("allocate_proportional", [](const Stratification& strat, std::size_t n) {
        return allocate_proportional(strat, n).counts;
    });

    m.def(
        "build_proposal",
        [](const Pool& pool, const std::string& family, double alpha, double floor) {
            return build_proposal(pool, ScoreTransform{transform_family_from_name(family), floor},
                                  alpha);
        },
        py::arg("pool"), py::arg("family"), py::arg("alpha"), py::arg("floor") = 1e-6);
    m.def("importance_weight", &importance_weight, py::arg("proposal"), py::arg("strat"),
          py::arg("pool"), py::arg("id"));
    m.def("restrict_to_stratum",
          [](const Proposal& prop, const Stratification& strat, std::size_t j) {
              if (j < 1) throw std::invalid_argument("stratum indices are 1-based");
              return restrict_to_stratum(prop, strat, j - 1);
          });

    m.def(
        "draw_plan",
        [](const std::string& design, const Pool& pool, std::size_t budget, std::uint64_t seed,
           const std::optional<Stratification>& strat, const std::optional<Proposal>& prop) {
            return draw_plan(make_spec(design, budget, strat, prop), pool, seed);
        },
        py::arg("design"), py::arg("pool"), py::arg("budget"), py::arg("seed"),
        py::arg("strat") = std::nullopt, py::arg("proposal") = std::nullopt);
    m.def(
        "estimate",
        [](const SamplePlan& plan, const std::map<std::int64_t, int>& labels, const Pool& pool) {
            return estimate(plan, labels, pool).value;
        },
        py::arg("plan"), py::arg("labels"), py::arg("pool"));
    m.def(
        "exact_estimator_mean",
        [](const std::string& design, const Pool& pool, std::size_t budget,
           const std::optional<Stratification>& strat, const std::optional<Proposal>& prop) {
            return exact_estimator_mean(make_spec(design, budget, strat, prop), pool);
        },
        py::arg("design"), py::arg("pool"), py::arg("budget"),
        py::arg("strat") = std::nullopt, py::arg("proposal") = std::nullopt);

    m.def("stratum_diagnostics",
          [](const Pool& pool, const Stratification& strat, const Proposal& prop) {
              return diag_to_dict(stratum_diagnostics(pool, strat, prop));
          });
    m.def(
        "theorem_report",
        [](const Pool& pool, const Stratification& strat, const Proposal& prop, std::size_t n) {
            StratumDiagnostics diag = stratum_diagnostics(pool, strat, prop);
            return report_to_dict(theorem_report(diag, allocate_proportional(strat, n), n));
        },
        py::arg("pool"), py::arg("strat"), py::arg("proposal"), py::arg("n"));

    m.def(
        "run_simulation",
        [](const Pool& pool, const std::string& config_json, std::size_t workers) {
            SimConfig config = parse_sim_config(config_json, "config");
            SimReport report = run_simulation(pool, config, workers);
            py::list cells;
            for (const SimCell& cell : report.cells) {
                py::dict row;
                row["design"] = design_kind_name(cell.design);
                row["n"] = cell.budget;
                row["M"] = cell.replications;
                row["mse"] = cell.mse;
                row["mse_se"] = cell.mse_se;
                row["analytic_var"] = cell.analytic_var;
                row["mean_estimate"] = cell.mean_estimate;
                if (cell.has_re && !cell.re_infinite) {
                    row["re_vs_rs"] = cell.re_vs_rs;
                    row["re_se"] = cell.re_se;
                }
                cells.append(row);
            }
            py::dict out;
            out["epsilon"] = report.epsilon;
            out["seed"] = report.seed;
            out["cells"] = cells;
            return out;
        },
        py::arg("pool"), py::arg("config_json"), py::arg("workers") = 1);

    m.def("derive_seed", &derive_seed, py::arg("master"), py::arg("tag"), py::arg("a"),
          py::arg("b"));
}
