#include "sismon/strata.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <stdexcept>

#include "sismon/csv.hpp"
#include "sismon/errors.hpp"
#include "sismon/numeric.hpp"

namespace sismon {

Stratification Stratification::from_assignment(std::vector<std::size_t> assignment) {
    if (assignment.empty()) throw std::invalid_argument("empty stratum assignment");
    std::size_t count = *std::max_element(assignment.begin(), assignment.end()) + 1;
    Stratification strat;
    strat.members_.resize(count);
    for (std::size_t i = 0; i < assignment.size(); ++i) {
        strat.members_[assignment[i]].push_back(i);
    }
    for (std::size_t j = 0; j < count; ++j) {
        if (strat.members_[j].empty()) {
            throw std::invalid_argument("stratum " + std::to_string(j + 1) + " is empty");
        }
    }
    strat.assignment_ = std::move(assignment);
    return strat;
}

Stratification Stratification::single(std::size_t pool_size) {
    return from_assignment(std::vector<std::size_t>(pool_size, 0));
}

double Stratification::weight(std::size_t j) const {
    return static_cast<double>(members_[j].size()) / static_cast<double>(assignment_.size());
}

Stratification build_categorical_strata(const Pool& pool, const std::string& attr) {
    std::vector<std::size_t> assignment(pool.size());
    if (attr == "pred_label") {
        std::map<int, std::size_t> order;
        for (const Instance& inst : pool.instances()) order.emplace(inst.pred_label, 0);
        std::size_t next = 0;
        for (auto& [value, idx] : order) idx = next++;
        for (std::size_t i = 0; i < pool.size(); ++i) {
            assignment[i] = order.at(pool.at(i).pred_label);
        }
        return Stratification::from_assignment(std::move(assignment));
    }
    const AttrColumn* col = pool.find_attr(attr);
    if (!col) throw data_error("stratification attribute '" + attr + "' not in pool");
    if (col->numeric) {
        std::map<double, std::size_t> order;
        for (double v : col->num) order.emplace(v, 0);
        std::size_t next = 0;
        for (auto& [value, idx] : order) idx = next++;
        for (std::size_t i = 0; i < pool.size(); ++i) assignment[i] = order.at(col->num[i]);
    } else {
        std::map<std::string, std::size_t> order;
        for (const std::string& v : col->raw) order.emplace(v, 0);
        std::size_t next = 0;
        for (auto& [value, idx] : order) idx = next++;
        for (std::size_t i = 0; i < pool.size(); ++i) assignment[i] = order.at(col->raw[i]);
    }
    return Stratification::from_assignment(std::move(assignment));
}

namespace {

// Nearest-rank quantile edges: for k = 1..bins-1 the edge is the
// ceil(k*m/bins)-th smallest value. Adjacent duplicate edges collapse.
std::vector<double> quantile_edges(std::vector<double> values, std::size_t bins) {
    std::sort(values.begin(), values.end());
    std::vector<double> edges;
    std::size_t m = values.size();
    for (std::size_t k = 1; k < bins; ++k) {
        std::size_t rank = (k * m + bins - 1) / bins;  // ceil(k*m/bins), >= 1
        double edge = values[rank - 1];
        if (edges.empty() || edge != edges.back()) edges.push_back(edge);
    }
    return edges;
}

// Right-closed intervals: bin(x) = number of edges strictly below x.
std::size_t bin_of(const std::vector<double>& edges, double x) {
    return static_cast<std::size_t>(
        std::lower_bound(edges.begin(), edges.end(), x) - edges.begin());
}

double median_of(std::vector<double> values) {
    std::sort(values.begin(), values.end());
    std::size_t m = values.size();
    return (values[(m - 1) / 2] + values[m / 2]) / 2.0;
}

}  // namespace

Stratification build_quantile_strata(const Pool& pool, const std::string& feature,
                                     std::size_t feature_bins, std::size_t score_bins) {
    if (feature_bins < 1 || score_bins < 1) {
        throw std::invalid_argument("bin counts must be >= 1");
    }
    std::vector<double> feature_values;
    if (feature == "score") {
        for (const Instance& inst : pool.instances()) feature_values.push_back(inst.score);
    } else if (feature.empty()) {
        if (feature_bins != 1) {
            throw data_error("feature required when feature_bins > 1");
        }
        feature_values.assign(pool.size(), 0.0);
    } else {
        const AttrColumn* col = pool.find_attr(feature);
        if (!col) throw data_error("feature '" + feature + "' not in pool");
        if (!col->numeric) throw data_error("feature '" + feature + "' is not numeric");
        feature_values = col->num;
    }

    std::vector<double> feature_edges = quantile_edges(feature_values, feature_bins);
    std::size_t fb_count = feature_edges.size() + 1;

    // Score quantile edges are computed within each feature bin.
    std::vector<std::vector<double>> scores_by_fb(fb_count);
    std::vector<std::size_t> fb_of(pool.size());
    for (std::size_t i = 0; i < pool.size(); ++i) {
        fb_of[i] = bin_of(feature_edges, feature_values[i]);
        scores_by_fb[fb_of[i]].push_back(pool.at(i).score);
    }
    std::vector<std::vector<double>> score_edges(fb_count);
    for (std::size_t fb = 0; fb < fb_count; ++fb) {
        if (!scores_by_fb[fb].empty()) {
            score_edges[fb] = quantile_edges(scores_by_fb[fb], score_bins);
        }
    }

    std::map<std::size_t, std::size_t> cell_to_stratum;  // (fb, sb) key -> stratum
    std::vector<std::size_t> cell_keys(pool.size());
    for (std::size_t i = 0; i < pool.size(); ++i) {
        std::size_t sb = bin_of(score_edges[fb_of[i]], pool.at(i).score);
        cell_keys[i] = fb_of[i] * score_bins + sb;
        cell_to_stratum.emplace(cell_keys[i], 0);
    }
    std::size_t next = 0;
    for (auto& [key, idx] : cell_to_stratum) idx = next++;

    std::vector<std::size_t> assignment(pool.size());
    for (std::size_t i = 0; i < pool.size(); ++i) assignment[i] = cell_to_stratum.at(cell_keys[i]);
    return Stratification::from_assignment(std::move(assignment));
}

Stratification merge_small_strata(const Stratification& strat, const Pool& pool,
                                  std::size_t min_count, double min_frac) {
    if (!(min_frac >= 0.0 && min_frac < 1.0)) {
        throw std::invalid_argument("min_frac must be in [0,1)");
    }
    std::size_t n = pool.size();
    if (strat.pool_size() != n) throw data_error("stratification does not match pool size");
    // The 1e-9 guard keeps thresholds like 0.005 * 200 from rounding up when
    // the product is exact in decimal but one ulp high in binary.
    auto frac_threshold = static_cast<std::size_t>(
        std::max(0.0, std::ceil(min_frac * static_cast<double>(n) - 1e-9)));
    std::size_t threshold = std::max(min_count, frac_threshold);

    std::vector<std::vector<std::size_t>> groups = strat.members();
    auto group_median = [&](const std::vector<std::size_t>& g) {
        std::vector<double> scores;
        scores.reserve(g.size());
        for (std::size_t i : g) scores.push_back(pool.at(i).score);
        return median_of(std::move(scores));
    };

    while (groups.size() > 1) {
        std::size_t tiny = groups.size();
        for (std::size_t j = 0; j < groups.size(); ++j) {
            if (groups[j].size() >= threshold) continue;
            if (tiny == groups.size() || groups[j].size() < groups[tiny].size()) tiny = j;
        }
        if (tiny == groups.size()) break;

        double tiny_median = group_median(groups[tiny]);
        std::size_t target = groups.size();
        double best_gap = 0.0;
        for (std::size_t j = 0; j < groups.size(); ++j) {
            if (j == tiny) continue;
            double gap = std::abs(group_median(groups[j]) - tiny_median);
            if (target == groups.size() || gap < best_gap) {
                target = j;
                best_gap = gap;
            }
        }
        groups[target].insert(groups[target].end(), groups[tiny].begin(), groups[tiny].end());
        groups.erase(groups.begin() + static_cast<std::ptrdiff_t>(tiny));
    }

    std::vector<std::size_t> assignment(n);
    for (std::size_t j = 0; j < groups.size(); ++j) {
        for (std::size_t i : groups[j]) assignment[i] = j;
    }
    return Stratification::from_assignment(std::move(assignment));
}

AllocationPlan allocate_proportional(const Stratification& strat, std::size_t n) {
    std::size_t p = strat.stratum_count();
    std::size_t pool_n = strat.pool_size();
    if (n < p) {
        throw std::invalid_argument("budget " + std::to_string(n) + " < " + std::to_string(p) +
                                    " strata: each stratum needs at least one draw");
    }
    // Integer arithmetic throughout: floor(n*w_j) = (n*N_j) div N and the
    // fractional parts compare as the remainders (n*N_j) mod N.
    AllocationPlan plan;
    plan.counts.resize(p);
    plan.total = n;
    std::vector<std::size_t> remainder(p);
    std::size_t assigned = 0;
    for (std::size_t j = 0; j < p; ++j) {
        std::size_t scaled = n * strat.size_of(j);
        plan.counts[j] = scaled / pool_n;
        remainder[j] = scaled % pool_n;
        assigned += plan.counts[j];
    }
    std::vector<std::size_t> order(p);
    for (std::size_t j = 0; j < p; ++j) order[j] = j;
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return remainder[a] > remainder[b]; });
    for (std::size_t k = 0; assigned < n; ++k) {
        ++plan.counts[order[k]];
        ++assigned;
    }
    // Repair pass: every stratum must receive at least one draw or its
    // per-stratum estimator is undefined.
    for (std::size_t j = 0; j < p; ++j) {
        while (plan.counts[j] == 0) {
            std::size_t donor = p;
            for (std::size_t k = 0; k < p; ++k) {
                if (donor == p || plan.counts[k] > plan.counts[donor]) donor = k;
            }
            --plan.counts[donor];
            ++plan.counts[j];
        }
    }
    return plan;
}

void write_stratification(const Stratification& strat, const Pool& pool,
                          const std::filesystem::path& path) {
    if (strat.pool_size() != pool.size()) throw data_error("stratification does not match pool");
    CsvFile out(path);
    out.row({"id", "stratum"});
    for (std::size_t i = 0; i < pool.size(); ++i) {
        out.row({std::to_string(pool.at(i).id), std::to_string(strat.stratum_of(i) + 1)});
    }
    out.close();
}

}  // namespace sismon
