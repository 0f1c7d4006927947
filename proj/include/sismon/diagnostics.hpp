#pragma once

#include <cstddef>
#include <ostream>
#include <vector>

#include "sismon/designs.hpp"
#include "sismon/pool.hpp"
#include "sismon/proposal.hpp"
#include "sismon/strata.hpp"

namespace sismon {

// Exact per-stratum moments, computed by summation over the finite pool.
// Two second-moment variants are tracked: T_sis uses the within-stratum
// weight actually applied by the stratified estimator, T_is uses the global
// weight of the plain importance estimator.
struct StratumDiag {
    std::size_t stratum = 0;  // 0-based
    std::size_t size = 0;
    double w = 0.0;                 // population share
    double r = 0.0;                 // proposal mass share
    double pi = 0.0;                // defect rate within the stratum
    double V = 0.0;                 // pi * (1 - pi)
    double T_sis = 0.0;             // Var of z * within-stratum weight under q_j
    double T_is = 0.0;              // Var of z * global weight under q_j
    double delta = 0.0;             // T_sis - V
    double is_cond_mean = 0.0;      // E of z * global weight under q_j
    double is_second_moment = 0.0;  // E of (z * global weight)^2 under q_j
};

struct StratumDiagnostics {
    std::vector<StratumDiag> strata;
    double epsilon = 0.0;
};

StratumDiagnostics stratum_diagnostics(const Pool& pool, const Stratification& strat,
                                       const Proposal& prop);

// Gap criteria and exact estimator variances at a given allocation. The
// gap decomposition equals n * (Var_IS - Var_SIS) only when every stratum's
// proposal mass share matches its population share and the allocation is
// exactly proportional (n_j = n * w_j); the residual records the difference,
// and the exact variances are authoritative either way.
struct TheoremReport {
    double mismatch_term = 0.0;       // sum of (r_j - w_j) * T_j_is
    double inter_stratum_term = 0.0;  // variance of the conditional means
    double thm1_criterion = 0.0;      // mismatch + inter-stratum
    double thm2_criterion = 0.0;      // sum of w_j * delta_j
    double var_rs = 0.0;
    double var_srs = 0.0;
    double var_is = 0.0;
    double var_sis = 0.0;
    double epsilon = 0.0;
    std::size_t n = 0;
    std::vector<std::size_t> allocation;
    double decomposition_residual = 0.0;  // thm1 - n * (var_is - var_sis)
    bool decomposition_consistent = false;
};

TheoremReport theorem_report(const StratumDiagnostics& diag, const AllocationPlan& alloc,
                             std::size_t n);

// Variance of z * global weight under the unrestricted proposal; the exact
// variance of a single importance draw, usable without any stratification.
double global_proposal_variance(const Pool& pool, const Proposal& prop);

// Reference-only optimal proposal: uniform mass on defective instances. Not
// usable for sampling (zero mass off the defect set by construction).
std::vector<double> optimal_proposal_reference(const Pool& pool);

// Exact SRS variance for each candidate stratification at budget n, plus the
// index of the minimizer (ties toward the lower index). A reference scan,
// not an optimizer: labels are required.
struct SrsCandidateScan {
    std::size_t best = 0;
    std::vector<double> variances;
};

SrsCandidateScan scan_srs_candidates(const Pool& pool,
                                     const std::vector<Stratification>& candidates,
                                     std::size_t n);

// Per-stratum diagnostics as CSV rows (1-based stratum indices).
void write_stratum_csv(const StratumDiagnostics& diag, std::ostream& out);

}  // namespace sismon
