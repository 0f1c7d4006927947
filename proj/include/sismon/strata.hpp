#pragma once

#include <cstddef>
#include <filesystem>
#include <string>
#include <vector>

#include "sismon/pool.hpp"

namespace sismon {

// Disjoint partition of a pool into P strata. Stratum indices are 0-based in
// the API; serialized files use 1-based indices.
class Stratification {
  public:
    // assignment[i] = stratum of pool position i; strata must be non-empty
    // and numbered contiguously from 0.
    static Stratification from_assignment(std::vector<std::size_t> assignment);
    static Stratification single(std::size_t pool_size);

    std::size_t stratum_count() const { return members_.size(); }
    std::size_t pool_size() const { return assignment_.size(); }

    std::size_t stratum_of(std::size_t pool_index) const { return assignment_[pool_index]; }
    std::size_t size_of(std::size_t j) const { return members_[j].size(); }
    double weight(std::size_t j) const;

    // Pool positions per stratum, each in ascending pool order.
    const std::vector<std::vector<std::size_t>>& members() const { return members_; }
    const std::vector<std::size_t>& assignment() const { return assignment_; }

  private:
    std::vector<std::size_t> assignment_;
    std::vector<std::vector<std::size_t>> members_;
};

// One stratum per distinct attribute value, ordered by value (numeric order
// for numeric columns, lexicographic otherwise). attr may be "pred_label".
Stratification build_categorical_strata(const Pool& pool, const std::string& attr);

// Nearest-rank quantile bins on a numeric feature, then score quantile bins
// within each feature bin. Duplicate quantile edges collapse; empty cells are
// dropped, so the result has at most feature_bins * score_bins strata.
// feature may be "score" or empty when feature_bins == 1.
Stratification build_quantile_strata(const Pool& pool, const std::string& feature,
                                     std::size_t feature_bins, std::size_t score_bins);

// Repeatedly merges every stratum smaller than max(min_count,
// ceil(min_frac * N)) into the surviving stratum with the closest median
// score. Smallest stratum first; all ties break toward the lower index.
Stratification merge_small_strata(const Stratification& strat, const Pool& pool,
                                  std::size_t min_count, double min_frac);

struct AllocationPlan {
    std::vector<std::size_t> counts;  // n_j, all >= 1
    std::size_t total = 0;            // n = sum of counts
};

// Largest-remainder proportional allocation of n draws, followed by a repair
// pass guaranteeing every stratum at least one draw. Requires n >= P.
AllocationPlan allocate_proportional(const Stratification& strat, std::size_t n);

// Audit dump: two-column CSV (id, stratum), 1-based stratum indices.
void write_stratification(const Stratification& strat, const Pool& pool,
                          const std::filesystem::path& path);

}  // namespace sismon
