#include "sismon/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "sismon/errors.hpp"
#include "sismon/numeric.hpp"

namespace sismon {

namespace {

double z_of(const Pool& pool, std::size_t i) {
    const Instance& inst = pool.at(i);
    return inst.pred_label != *inst.true_label ? 1.0 : 0.0;
}

}  // namespace

StratumDiagnostics stratum_diagnostics(const Pool& pool, const Stratification& strat,
                                       const Proposal& prop) {
    if (!pool.oracle_complete()) throw data_error("diagnostics require oracle-complete pool");
    if (strat.pool_size() != pool.size()) throw data_error("stratification does not match pool");
    if (prop.size() != pool.size()) throw data_error("proposal does not match pool");

    StratumMasses masses = stratum_masses(prop, strat);
    StratumDiagnostics diag;
    diag.epsilon = true_defect_rate(pool);
    for (std::size_t j = 0; j < strat.stratum_count(); ++j) {
        const auto& members = strat.members()[j];
        StratumDiag d;
        d.stratum = j;
        d.size = members.size();
        d.w = strat.weight(j);
        d.r = masses.normalized[j];

        KahanSum z_sum;
        KahanSum sis_mean, sis_second;
        KahanSum is_mean, is_second;
        for (std::size_t i : members) {
            double z = z_of(pool, i);
            z_sum.add(z);
            double qj = prop.raw(i) / masses.raw[j];
            double r_sis = z * prop.stratum_weight(i, masses.raw[j], members.size());
            double r_is = z * prop.global_weight(i);
            sis_mean.add(qj * r_sis);
            sis_second.add(qj * r_sis * r_sis);
            is_mean.add(qj * r_is);
            is_second.add(qj * r_is * r_is);
        }
        d.pi = z_sum.value() / static_cast<double>(members.size());
        d.V = d.pi * (1.0 - d.pi);
        d.T_sis = std::max(0.0, sis_second.value() - sis_mean.value() * sis_mean.value());
        d.is_cond_mean = is_mean.value();
        d.is_second_moment = is_second.value();
        d.T_is = std::max(0.0, d.is_second_moment - d.is_cond_mean * d.is_cond_mean);
        d.delta = d.T_sis - d.V;
        diag.strata.push_back(d);
    }
    return diag;
}

TheoremReport theorem_report(const StratumDiagnostics& diag, const AllocationPlan& alloc,
                             std::size_t n) {
    if (alloc.counts.size() != diag.strata.size()) {
        throw std::invalid_argument("allocation has " + std::to_string(alloc.counts.size()) +
                                    " strata, diagnostics have " +
                                    std::to_string(diag.strata.size()));
    }
    if (alloc.total != n) {
        throw std::invalid_argument("allocation totals " + std::to_string(alloc.total) +
                                    " draws, expected " + std::to_string(n));
    }
    if (n < 1) throw std::invalid_argument("n must be >= 1");

    TheoremReport report;
    report.epsilon = diag.epsilon;
    report.n = n;
    report.allocation = alloc.counts;

    KahanSum mismatch, mean_r, thm2, var_sis, var_srs, second_moment;
    for (const StratumDiag& d : diag.strata) {
        mismatch.add((d.r - d.w) * d.T_is);
        mean_r.add(d.r * d.is_cond_mean);
        thm2.add(d.w * d.delta);
        second_moment.add(d.r * d.is_second_moment);
    }
    double mean = mean_r.value();
    KahanSum inter;
    for (const StratumDiag& d : diag.strata) {
        double gap = d.is_cond_mean - mean;
        inter.add(d.r * gap * gap);
    }
    for (std::size_t j = 0; j < diag.strata.size(); ++j) {
        const StratumDiag& d = diag.strata[j];
        double nj = static_cast<double>(alloc.counts[j]);
        var_sis.add(d.w * d.w / nj * d.T_sis);
        var_srs.add(d.w * d.w / nj * d.V);
    }

    report.mismatch_term = mismatch.value();
    report.inter_stratum_term = inter.value();
    report.thm1_criterion = report.mismatch_term + report.inter_stratum_term;
    report.thm2_criterion = thm2.value();
    report.var_sis = var_sis.value();
    report.var_srs = var_srs.value();
    double var_q = std::max(0.0, second_moment.value() - mean * mean);
    report.var_is = var_q / static_cast<double>(n);
    report.var_rs = report.epsilon * (1.0 - report.epsilon) / static_cast<double>(n);
    report.decomposition_residual =
        report.thm1_criterion - static_cast<double>(n) * (report.var_is - report.var_sis);
    report.decomposition_consistent = std::abs(report.decomposition_residual) <= 1e-9;
    return report;
}

double global_proposal_variance(const Pool& pool, const Proposal& prop) {
    if (!pool.oracle_complete()) throw data_error("diagnostics require oracle-complete pool");
    if (prop.size() != pool.size()) throw data_error("proposal does not match pool");
    KahanSum mean, second;
    for (std::size_t i = 0; i < pool.size(); ++i) {
        double r = z_of(pool, i) * prop.global_weight(i);
        mean.add(prop.mass(i) * r);
        second.add(prop.mass(i) * r * r);
    }
    return std::max(0.0, second.value() - mean.value() * mean.value());
}

std::vector<double> optimal_proposal_reference(const Pool& pool) {
    if (!pool.oracle_complete()) throw data_error("diagnostics require oracle-complete pool");
    std::size_t defects = 0;
    for (std::size_t i = 0; i < pool.size(); ++i) defects += z_of(pool, i) > 0.0 ? 1 : 0;
    if (defects == 0) {
        throw data_error("optimal proposal undefined: pool has no defects");
    }
    std::vector<double> mass(pool.size(), 0.0);
    for (std::size_t i = 0; i < pool.size(); ++i) {
        if (z_of(pool, i) > 0.0) mass[i] = 1.0 / static_cast<double>(defects);
    }
    return mass;
}

SrsCandidateScan scan_srs_candidates(const Pool& pool,
                                     const std::vector<Stratification>& candidates,
                                     std::size_t n) {
    if (!pool.oracle_complete()) throw data_error("diagnostics require oracle-complete pool");
    if (candidates.empty()) throw std::invalid_argument("no candidate stratifications");
    SrsCandidateScan scan;
    for (const Stratification& strat : candidates) {
        if (strat.pool_size() != pool.size()) {
            throw data_error("candidate stratification does not match pool");
        }
        AllocationPlan alloc = allocate_proportional(strat, n);
        KahanSum var;
        for (std::size_t j = 0; j < strat.stratum_count(); ++j) {
            const auto& members = strat.members()[j];
            KahanSum z_sum;
            for (std::size_t i : members) z_sum.add(z_of(pool, i));
            double pi = z_sum.value() / static_cast<double>(members.size());
            double w = strat.weight(j);
            var.add(w * w / static_cast<double>(alloc.counts[j]) * pi * (1.0 - pi));
        }
        scan.variances.push_back(var.value());
        if (scan.variances.back() < scan.variances[scan.best]) {
            scan.best = scan.variances.size() - 1;
        }
    }
    return scan;
}

void write_stratum_csv(const StratumDiagnostics& diag, std::ostream& out) {
    out << "stratum,size,w_j,r_j,pi_j,V_j,T_j_sis,T_j_is,delta_j\n";
    for (const StratumDiag& d : diag.strata) {
        out << d.stratum + 1 << ',' << d.size << ',' << format_double(d.w) << ','
            << format_double(d.r) << ',' << format_double(d.pi) << ',' << format_double(d.V)
            << ',' << format_double(d.T_sis) << ',' << format_double(d.T_is) << ','
            << format_double(d.delta) << '\n';
    }
}

}  // namespace sismon
