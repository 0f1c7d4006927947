#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "sismon/config.hpp"
#include "sismon/designs.hpp"
#include "sismon/pool.hpp"

namespace sismon {

// One (design, budget) cell of the replication grid. Squared errors and
// estimates are kept per replication (in replication order) so jackknife
// standard errors need no second sampling pass.
struct SimCell {
    DesignKind design = DesignKind::RS;
    std::size_t budget = 0;
    std::size_t replications = 0;
    double mse = 0.0;
    double mse_se = 0.0;
    double analytic_var = 0.0;
    double mean_estimate = 0.0;
    double sd_estimate = 0.0;
    bool has_re = false;  // false when RS is not part of the grid
    double re_vs_rs = 0.0;
    double re_se = 0.0;
    bool re_infinite = false;
    std::vector<double> sq_errors;
    std::vector<double> estimates;
};

struct SimReport {
    std::uint64_t seed = 0;
    std::size_t pool_size = 0;
    double epsilon = 0.0;
    std::size_t replications = 0;
    std::string strata_desc = "none";
    std::size_t stratum_count = 0;  // 0 when unstratified
    std::string proposal_desc = "none";
    bool proposal_present = false;
    double alpha = 0.0;
    std::vector<SimCell> cells;  // budget-major, designs in config order
};

// Runs the full grid. Replication m of a cell draws from a seed derived from
// (master seed, design name, budget, m) alone, so results are independent of
// worker count, execution order, and the total replication count.
SimReport run_simulation(const Pool& pool, const SimConfig& config, std::size_t workers = 1);

struct RelativeEfficiency {
    double value = 0.0;
    double se = 0.0;
    bool infinite = false;  // target MSE was exactly 0
};

// MSE ratio reference/target with a delete-one jackknife standard error over
// the paired squared-error sequences.
RelativeEfficiency relative_efficiency(const SimCell& reference, const SimCell& target);

// Flat table, one row per cell:
// design,strata,proposal,alpha,n,M,mse,mse_se,analytic_var,re_vs_rs,re_se
void write_sim_report_csv(const SimReport& report, const std::filesystem::path& path);
void write_sim_report_json(const SimReport& report, const std::filesystem::path& path);

}  // namespace sismon
