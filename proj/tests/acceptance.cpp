// Acceptance gate: one self-contained check per shipped guarantee, one
// pass/fail line each, nonzero exit if anything fails. Tolerances are pinned
// in the checks themselves; where a check is statistical it runs a fixed seed
// and a fixed replication count, so the outcome is reproducible bit for bit.

#include <sys/wait.h>

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "enumeration.hpp"
#include "random_pools.hpp"
#include "sismon/config.hpp"
#include "sismon/designs.hpp"
#include "sismon/diagnostics.hpp"
#include "sismon/harness.hpp"
#include "sismon/pool.hpp"
#include "t1.hpp"

using namespace sismon;
namespace fs = std::filesystem;

namespace {

struct CheckFailure {
    std::string detail;
};

void require(bool ok, const std::string& detail) {
    if (!ok) throw CheckFailure{detail};
}

std::string fmt(double x) {
    std::ostringstream out;
    out.precision(17);
    out << x;
    return out.str();
}

int sign_class(double x, double tol) {
    if (std::fabs(x) <= tol) return 0;
    return x < 0.0 ? -1 : 1;
}

TransformFamily family_of(int id) {
    switch (id) {
        case 0: return TransformFamily::raw_score;
        case 1: return TransformFamily::one_minus_score;
        case 2: return TransformFamily::margin;
        default: return TransformFamily::binary_entropy;
    }
}

DesignSpec make_spec(DesignKind kind, std::size_t budget, const Pool& pool,
                     const Stratification& strat, double alpha, int family) {
    DesignSpec spec;
    spec.kind = kind;
    spec.budget = budget;
    if (design_is_stratified(kind)) spec.strat = strat;
    if (design_uses_proposal(kind))
        spec.proposal = build_proposal(pool, {family_of(family), 1e-6}, alpha);
    return spec;
}

const DesignKind kAllDesigns[] = {DesignKind::RS, DesignKind::SRS, DesignKind::IS,
                                  DesignKind::SIS};

// --- 1: closed-form estimator means ------------------------------------

void check_exact_means() {
    Pool t1 = make_t1();
    Stratification t1s = t1_strata(t1);
    for (DesignKind kind : kAllDesigns) {
        for (double alpha : {0.0, 0.5, 1.0}) {
            double mean = exact_estimator_mean(make_spec(kind, 3, t1, t1s, alpha, 0), t1);
            require(std::fabs(mean - 1.0 / 3.0) <= 1e-12,
                    design_kind_name(kind) + " alpha=" + fmt(alpha) + " mean=" + fmt(mean) +
                        " expected 1/3 on the reference pool");
        }
    }
    RandomStream rs(101);
    for (int trial = 0; trial < 40; ++trial) {
        Pool pool = make_random_pool(rs, 5, 30);
        Stratification strat = build_categorical_strata(pool, "g");
        double eps = true_defect_rate(pool);
        double alpha = std::vector<double>{0.0, 0.25, 0.5, 1.0}[trial % 4];
        int family = trial % 4;
        std::size_t budget = strat.stratum_count() + 3;
        for (DesignKind kind : kAllDesigns) {
            double mean =
                exact_estimator_mean(make_spec(kind, budget, pool, strat, alpha, family), pool);
            require(std::fabs(mean - eps) <= 1e-12,
                    "trial " + std::to_string(trial) + " " + design_kind_name(kind) +
                        ": |mean - eps| = " + fmt(std::fabs(mean - eps)));
        }
    }
}

// --- 2: full enumeration on tiny pools ----------------------------------

void check_enumeration() {
    RandomStream rs(202);
    int done = 0;
    while (done < 20) {
        std::size_t strata = 1 + static_cast<std::size_t>(rs.uniform() * 2.0);  // 1..2
        RandomPoolSpec pspec;
        std::size_t total = 0;
        for (std::size_t j = 0; j < strata; ++j) {
            std::size_t size = 1 + static_cast<std::size_t>(rs.uniform() * 4.0);  // 1..4
            pspec.sizes.push_back(size);
            pspec.defects.push_back(
                static_cast<std::size_t>(rs.uniform() * static_cast<double>(size + 1)));
            total += size;
        }
        if (total > 8 || total < 2) continue;
        Pool pool = make_pool_from_spec(pspec, rs);
        Stratification strat = build_categorical_strata(pool, "g");
        std::size_t P = strat.stratum_count();
        std::size_t n = P + static_cast<std::size_t>(rs.uniform() * (4.0 - double(P)));
        if (n < 2) n = 2;
        if (n > 3) n = 3;
        double alpha = std::vector<double>{0.0, 0.5, 1.0}[done % 3];
        int family = done % 4;

        Proposal prop = build_proposal(pool, {family_of(family), 1e-6}, alpha);
        StratumDiagnostics diag = stratum_diagnostics(pool, strat, prop);
        AllocationPlan alloc = allocate_proportional(strat, n);
        TheoremReport report = theorem_report(diag, alloc, n);

        std::vector<std::size_t> everyone(pool.size());
        for (std::size_t i = 0; i < pool.size(); ++i) everyone[i] = i;

        for (DesignKind kind : kAllDesigns) {
            std::string name = design_kind_name(kind);
            EnumResult oracle =
                design_is_stratified(kind)
                    ? enumerate_design(pool, name, strat.members(), alloc.counts, alpha, 1e-6,
                                       family)
                    : enumerate_design(pool, name, {everyone}, {n}, alpha, 1e-6, family);
            require(std::fabs(oracle.prob_total - 1.0) <= 1e-9,
                    "enumeration probabilities sum to " + fmt(oracle.prob_total));

            double lib_mean =
                exact_estimator_mean(make_spec(kind, n, pool, strat, alpha, family), pool);
            require(std::fabs(lib_mean - oracle.mean) <= 1e-12,
                    "pool " + std::to_string(done) + " " + name + " mean: library " +
                        fmt(lib_mean) + " vs enumerated " + fmt(oracle.mean));

            double lib_var = 0.0;
            switch (kind) {
                case DesignKind::RS: lib_var = report.var_rs; break;
                case DesignKind::SRS: lib_var = report.var_srs; break;
                case DesignKind::IS: lib_var = report.var_is; break;
                case DesignKind::SIS: lib_var = report.var_sis; break;
            }
            require(std::fabs(lib_var - oracle.variance) <= 1e-12,
                    "pool " + std::to_string(done) + " " + name + " variance: library " +
                        fmt(lib_var) + " vs enumerated " + fmt(oracle.variance));
        }
        ++done;
    }
}

// --- 3: seeded Monte-Carlo MSE vs exact variances ------------------------

void check_monte_carlo() {
    Pool pool = make_t1();
    SimConfig config = parse_sim_config(R"({
      "designs": ["RS", "SRS", "IS", "SIS"],
      "budgets": [3],
      "replications": 100000,
      "seed": 20260814,
      "strata": {"method": "categorical", "params": {"attr": "stratum"}, "min_count": 1},
      "proposal": {"family": "raw_score", "alpha": 1.0}
    })", "acceptance");
    SimReport report = run_simulation(pool, config, 8);
    require(report.cells.size() == 4, "expected 4 cells");
    for (const SimCell& cell : report.cells) {
        require(cell.replications == 100000, "replication count");
        double gap = std::fabs(cell.mse - cell.analytic_var);
        require(gap <= 3.0 * cell.mse_se,
                design_kind_name(cell.design) + ": |mse - exact| = " + fmt(gap) + " > 3*se = " +
                    fmt(3.0 * cell.mse_se));
        if (cell.design == DesignKind::SIS) {
            require(std::fabs(cell.analytic_var - 0.021604938271604937) <= 1e-12,
                    "exact stratified-weighted variance " + fmt(cell.analytic_var));
        }
    }
}

// --- 4: variance-gap sign law -------------------------------------------

void check_sign_law() {
    RandomStream rs(404);
    int agree = 0;
    const int trials = 200;
    for (int trial = 0; trial < trials; ++trial) {
        ExactAllocPool ep = make_exact_alloc_pool(rs);
        Stratification strat = build_categorical_strata(ep.pool, "g");
        Proposal prop = build_proposal(ep.pool, {TransformFamily::raw_score, 1e-6}, 1.0);
        StratumDiagnostics diag = stratum_diagnostics(ep.pool, strat, prop);
        AllocationPlan alloc = allocate_proportional(strat, ep.budget);
        require(alloc.counts == ep.alloc, "allocation not exactly proportional");
        TheoremReport report = theorem_report(diag, alloc, ep.budget);
        int lhs = sign_class(report.thm2_criterion, 1e-12);
        int rhs = sign_class(static_cast<double>(ep.budget) * (report.var_sis - report.var_srs),
                             1e-12);
        if (lhs == rhs) {
            ++agree;
        } else {
            require(false, "trial " + std::to_string(trial) + ": thm2 " +
                               fmt(report.thm2_criterion) + " vs n*(var_sis - var_srs) " +
                               fmt(static_cast<double>(ep.budget) *
                                   (report.var_sis - report.var_srs)));
        }
    }
    require(agree == trials, "agreement " + std::to_string(agree) + "/200");
}

// --- 5: exact degeneracies ------------------------------------------------

void check_degeneracies() {
    // A flat proposal (alpha = 0) reproduces uniform stratified sampling:
    // unit weights and equal variances.
    RandomStream rs(505);
    for (int trial = 0; trial < 10; ++trial) {
        Pool pool = trial == 0 ? make_t1() : make_random_pool(rs, 4, 20);
        std::string attr = trial == 0 ? "stratum" : "g";
        Stratification strat = build_categorical_strata(pool, attr);
        Proposal prop = build_proposal(pool, {TransformFamily::raw_score, 1e-6}, 0.0);
        for (std::size_t i = 0; i < pool.size(); ++i) {
            require(prop.global_weight(i) == 1.0, "alpha=0 global weight != 1");
            require(importance_weight(prop, strat, pool, pool.at(i).id) == 1.0,
                    "alpha=0 stratum weight != 1");
        }
        StratumDiagnostics diag = stratum_diagnostics(pool, strat, prop);
        std::size_t n = strat.stratum_count() + 2;
        AllocationPlan alloc = allocate_proportional(strat, n);
        TheoremReport report = theorem_report(diag, alloc, n);
        require(std::fabs(report.var_sis - report.var_srs) <= 1e-12,
                "alpha=0: |var_sis - var_srs| = " +
                    fmt(std::fabs(report.var_sis - report.var_srs)));
    }

    // A single stratum makes the stratified weighted design plain importance
    // sampling.
    for (int trial = 0; trial < 10; ++trial) {
        Pool pool = trial == 0 ? make_t1() : make_random_pool(rs, 3, 20);
        Stratification strat = Stratification::single(pool.size());
        double alpha = trial % 2 == 0 ? 1.0 : 0.5;
        Proposal prop = build_proposal(pool, {family_of(trial % 4), 1e-6}, alpha);
        StratumDiagnostics diag = stratum_diagnostics(pool, strat, prop);
        AllocationPlan alloc = allocate_proportional(strat, 4);
        TheoremReport report = theorem_report(diag, alloc, 4);
        require(std::fabs(report.var_is - report.var_sis) <= 1e-12,
                "P=1: |var_is - var_sis| = " + fmt(std::fabs(report.var_is - report.var_sis)));
    }
}

// --- 6: synthetic regimes -------------------------------------------------

void check_regimes() {
    auto run_preset = [](const std::string& preset) {
        Pool pool = synth_pool(preset_spec(preset, 10000), 1);
        SimConfig config = parse_sim_config(R"({
          "designs": ["RS", "SRS", "IS", "SIS"],
          "budgets": [100],
          "replications": 10000,
          "seed": 4242,
          "strata": {"method": "categorical", "params": {"attr": "stratum"}},
          "proposal": {"family": "raw_score", "alpha": 0.5}
        })", "acceptance");
        return run_simulation(pool, config, 8);
    };
    auto re_of = [](const SimReport& report, DesignKind kind) {
        for (const SimCell& cell : report.cells)
            if (cell.design == kind) {
                require(cell.has_re && !cell.re_infinite, "missing relative efficiency");
                return cell.re_vs_rs;
            }
        require(false, "cell not found");
        return 0.0;
    };

    SimReport aligned = run_preset("two-strata-aligned");
    double re_sis = re_of(aligned, DesignKind::SIS);
    double re_srs = re_of(aligned, DesignKind::SRS);
    require(re_sis >= 2.0,
            "aligned regime: stratified-weighted efficiency " + fmt(re_sis) + " < 2");
    require(re_sis >= re_srs, "aligned regime: re_sis " + fmt(re_sis) + " < re_srs " +
                                  fmt(re_srs));

    SimReport misaligned = run_preset("two-strata-misaligned");
    double re_is = re_of(misaligned, DesignKind::IS);
    double re_sis_mis = re_of(misaligned, DesignKind::SIS);
    require(re_is < 1.0,
            "misaligned regime: unstratified weighting should lose (re_is = " + fmt(re_is) +
                ")");
    require(re_sis_mis > 1.0,
            "misaligned regime: stratification should rescue weighting (re_sis = " +
                fmt(re_sis_mis) + ")");
}

// --- 7: byte-identical reports --------------------------------------------

std::string slurp(const fs::path& path) {
    std::ifstream in(path);
    std::stringstream body;
    body << in.rdbuf();
    return body.str();
}

void check_report_determinism() {
    fs::path dir = fs::temp_directory_path() / "sismon_acceptance";
    fs::create_directories(dir);
    fs::path pool_path = dir / "pool.csv";
    write_pool(make_t1(), pool_path);
    fs::path config_path = dir / "config.json";
    {
        std::ofstream out(config_path);
        out << R"({
          "designs": ["RS", "SRS", "IS", "SIS"],
          "budgets": [3, 5],
          "replications": 2000,
          "seed": 77,
          "strata": {"method": "categorical", "params": {"attr": "stratum"}, "min_count": 1},
          "proposal": {"family": "raw_score", "alpha": 1.0}
        })";
    }
    auto simulate = [&](const std::string& prefix, int workers) {
        std::string cmd = std::string(SISMON_CLI_PATH) + " simulate --pool " +
                          pool_path.string() + " --config " + config_path.string() + " --out " +
                          (dir / prefix).string() + " --workers " + std::to_string(workers) +
                          " > /dev/null 2>&1";
        int status = std::system(cmd.c_str());
        require(WIFEXITED(status) && WEXITSTATUS(status) == 0, "simulate run failed");
    };
    simulate("run_a", 1);
    simulate("run_b", 1);
    simulate("run_c", 8);
    for (const char* ext : {".csv", ".json"}) {
        std::string a = slurp(dir / ("run_a" + std::string(ext)));
        require(!a.empty(), std::string("empty report ") + ext);
        require(a == slurp(dir / ("run_b" + std::string(ext))),
                std::string("rerun differs for ") + ext);
        require(a == slurp(dir / ("run_c" + std::string(ext))),
                std::string("worker count changed bytes for ") + ext);
    }
}

struct Criterion {
    std::string name;
    std::function<void()> check;
    double time_limit_s;  // 0 = no limit
};

}  // namespace

int main() {
    std::vector<Criterion> criteria = {
        {"closed-form estimator means equal the pool defect rate (1e-12)", check_exact_means,
         1.0},
        {"exhaustive enumeration matches means and variances on tiny pools (1e-12)",
         check_enumeration, 10.0},
        {"seeded Monte-Carlo MSE matches the exact variances (3 SE at M=100000)",
         check_monte_carlo, 30.0},
        {"variance-gap sign law holds on 200 proportionally-allocated pools", check_sign_law,
         0.0},
        {"flat-proposal and single-stratum configurations collapse exactly (1e-12)",
         check_degeneracies, 0.0},
        {"synthetic regimes reproduce the expected efficiency ordering", check_regimes, 120.0},
        {"simulation reports are byte-identical across reruns and worker counts",
         check_report_determinism, 0.0},
    };

    int failures = 0;
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        const Criterion& c = criteria[i];
        auto start = std::chrono::steady_clock::now();
        std::string detail;
        bool pass = true;
        try {
            c.check();
        } catch (const CheckFailure& f) {
            pass = false;
            detail = f.detail;
        } catch (const std::exception& e) {
            pass = false;
            detail = std::string("exception: ") + e.what();
        }
        double seconds =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        if (pass && c.time_limit_s > 0.0 && seconds > c.time_limit_s) {
            pass = false;
            detail = "exceeded time limit " + fmt(c.time_limit_s) + "s";
        }
        std::ostringstream line;
        line << "[" << (i + 1) << "] " << c.name << ": " << (pass ? "PASS" : "FAIL");
        line.setf(std::ios::fixed);
        line.precision(2);
        line << " (" << seconds << "s)";
        if (!pass) line << " — " << detail;
        std::cout << line.str() << std::endl;
        if (!pass) ++failures;
    }
    if (failures == 0) {
        std::cout << "acceptance: all " << criteria.size() << " criteria passed" << std::endl;
        return 0;
    }
    std::cout << "acceptance: " << failures << " criteria FAILED" << std::endl;
    return 1;
}
