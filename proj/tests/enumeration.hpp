#pragma once

// Brute-force oracle: enumerates the full product space of draw outcomes for
// a design on a tiny pool, and accumulates the exact estimator mean and
// variance from first principles. Transforms, masses, and weights are all
// re-derived here on purpose — this header must not share arithmetic with the
// library so that agreement between the two is evidence, not tautology.

#include <cmath>
#include <functional>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

#include "sismon/pool.hpp"

struct EnumResult {
    double mean = 0.0;
    double variance = 0.0;
    double prob_total = 0.0;  // should be 1 up to rounding
};

namespace enum_detail {

inline double transform(double s, int family) {
    switch (family) {
        case 0: return s;                          // raw score
        case 1: return 1.0 - s;                    // one minus score
        case 2: return 0.5 - std::fabs(s - 0.5);   // margin
        case 3:                                    // binary entropy
            if (s <= 0.0 || s >= 1.0) return 0.0;
            return -(s * std::log(s) + (1.0 - s) * std::log(1.0 - s));
        default: throw std::logic_error("bad family id");
    }
}

}  // namespace enum_detail

// groups: member indices per stratum; for unstratified designs pass a single
// group covering the whole pool. alloc: draws per group (same length).
inline EnumResult enumerate_design(const sismon::Pool& pool, const std::string& design,
                                   const std::vector<std::vector<std::size_t>>& groups,
                                   const std::vector<std::size_t>& alloc, double alpha,
                                   double floor_value, int family) {
    if (groups.size() != alloc.size()) throw std::logic_error("groups/alloc mismatch");
    bool weighted = design == "IS" || design == "SIS";
    bool stratified = design == "SRS" || design == "SIS";
    const double N = static_cast<double>(pool.size());

    std::size_t total_members = 0;
    for (const auto& g : groups) total_members += g.size();
    if (total_members != pool.size()) throw std::logic_error("groups do not cover pool");

    // Unnormalized masses for the whole pool (used only by weighted designs).
    std::vector<double> u(pool.size(), 1.0);
    if (weighted) {
        for (std::size_t i = 0; i < pool.size(); ++i) {
            double t = enum_detail::transform(pool.at(i).score, family);
            u[i] = std::pow(t < floor_value ? floor_value : t, alpha);
        }
    }
    double u_all = 0.0;
    for (std::size_t i = 0; i < pool.size(); ++i) u_all += u[i];

    // Per-group draw distribution and per-member estimator contribution z*wt.
    struct Group {
        std::vector<double> prob;
        std::vector<double> contrib;
        double wfrac = 1.0;  // N_j / N for stratified designs, 1 otherwise
        std::size_t draws = 0;
    };
    std::vector<Group> cells(groups.size());
    for (std::size_t g = 0; g < groups.size(); ++g) {
        const auto& members = groups[g];
        if (members.empty()) throw std::logic_error("empty group");
        double u_group = 0.0;
        for (std::size_t m : members) u_group += u[m];
        const double nj = static_cast<double>(members.size());
        Group& cell = cells[g];
        cell.draws = alloc[g];
        cell.wfrac = stratified ? nj / N : 1.0;
        for (std::size_t m : members) {
            double q, wt;
            if (weighted) {
                double denom = stratified ? u_group : u_all;
                q = u[m] / denom;
                wt = stratified ? u_group / (nj * u[m]) : u_all / (N * u[m]);
            } else {
                q = stratified ? 1.0 / nj : 1.0 / N;
                wt = 1.0;
            }
            double z = pool.at(m).true_label.value() == pool.at(m).pred_label ? 0.0 : 1.0;
            cell.prob.push_back(q);
            cell.contrib.push_back(z * wt);
        }
    }

    // One slot per draw, in group order; recursion walks the product space.
    std::vector<std::size_t> slot_group;
    for (std::size_t g = 0; g < cells.size(); ++g)
        for (std::size_t k = 0; k < cells[g].draws; ++k) slot_group.push_back(g);

    long double e1 = 0.0L, e2 = 0.0L, ptotal = 0.0L;
    std::vector<double> group_sum(cells.size(), 0.0);

    auto leaf_estimate = [&]() {
        double est = 0.0;
        for (std::size_t g = 0; g < cells.size(); ++g)
            est += cells[g].wfrac * group_sum[g] / static_cast<double>(cells[g].draws);
        return est;
    };

    std::function<void(std::size_t, long double)> rec = [&](std::size_t depth, long double p) {
        if (depth == slot_group.size()) {
            long double est = leaf_estimate();
            ptotal += p;
            e1 += p * est;
            e2 += p * est * est;
            return;
        }
        Group& cell = cells[slot_group[depth]];
        for (std::size_t m = 0; m < cell.prob.size(); ++m) {
            if (cell.prob[m] == 0.0) continue;
            group_sum[slot_group[depth]] += cell.contrib[m];
            rec(depth + 1, p * static_cast<long double>(cell.prob[m]));
            group_sum[slot_group[depth]] -= cell.contrib[m];
        }
    };
    rec(0, 1.0L);

    EnumResult out;
    out.mean = static_cast<double>(e1);
    out.variance = static_cast<double>(e2 - e1 * e1);
    out.prob_total = static_cast<double>(ptotal);
    return out;
}
