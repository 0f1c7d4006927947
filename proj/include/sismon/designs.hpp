#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "sismon/pool.hpp"
#include "sismon/proposal.hpp"
#include "sismon/rng.hpp"
#include "sismon/strata.hpp"

namespace sismon {

enum class DesignKind { RS, SRS, IS, SIS };

DesignKind design_kind_from_name(const std::string& name);
std::string design_kind_name(DesignKind kind);

inline bool design_is_stratified(DesignKind kind) {
    return kind == DesignKind::SRS || kind == DesignKind::SIS;
}
inline bool design_uses_proposal(DesignKind kind) {
    return kind == DesignKind::IS || kind == DesignKind::SIS;
}

// A sampling design: RS (uniform over the pool), SRS (uniform within strata,
// proportional allocation), IS (global proposal), SIS (per-stratum restricted
// proposal, proportional allocation). All draws are i.i.d. with replacement.
struct DesignSpec {
    DesignKind kind = DesignKind::RS;
    std::size_t budget = 0;
    std::optional<Stratification> strat;  // required for SRS/SIS
    std::optional<Proposal> proposal;     // required for IS/SIS
};

struct Draw {
    std::int64_t id = 0;
    std::optional<std::size_t> stratum;  // 0-based; absent for RS/IS
    double weight = 1.0;
};

struct SamplePlan {
    DesignKind design = DesignKind::RS;
    std::uint64_t seed = 0;
    std::size_t pool_size = 0;
    std::vector<std::size_t> stratum_sizes;  // empty for RS/IS
    std::vector<Draw> draws;                 // stratified plans are stratum-major
};

// Reusable sampler: validates the DesignSpec against the pool once and prebuilds
// the categorical samplers, so the harness can draw many replications
// without reconstructing them. draw(seed) is a pure function of the seed.
class PlanSampler {
  public:
    PlanSampler(const DesignSpec& spec, const Pool& pool);

    SamplePlan draw(std::uint64_t seed) const;
    const AllocationPlan& allocation() const;  // stratified designs only

  private:
    // One categorical law to draw from: the whole pool for RS/IS, one
    // stratum for SRS/SIS.
    struct Cell {
        CdfSampler sampler;
        std::vector<std::size_t> member_index;  // category -> pool position
        std::vector<double> weights;            // per category
        std::size_t count = 0;                  // draws from this cell
        std::optional<std::size_t> stratum;     // 0-based
    };

    DesignKind kind_;
    std::size_t budget_ = 0;
    std::size_t pool_size_ = 0;
    std::vector<std::size_t> stratum_sizes_;
    std::optional<AllocationPlan> alloc_;
    std::vector<Cell> cells_;
    std::vector<std::int64_t> ids_;  // pool position -> id
};

SamplePlan draw_plan(const DesignSpec& spec, const Pool& pool, std::uint64_t seed);

struct StratumPartial {
    std::size_t stratum = 0;  // 0-based
    std::size_t draws = 0;
    double weight = 0.0;      // w_j
    double mean = 0.0;        // importance-weighted mean of z within the stratum
    double partial = 0.0;     // w_j * mean
};

struct Estimate {
    DesignKind design = DesignKind::RS;
    std::size_t n = 0;
    double value = 0.0;
    std::vector<StratumPartial> per_stratum;  // SRS/SIS only
};

Estimate estimate(const SamplePlan& plan, const std::map<std::int64_t, int>& labels,
                  const Pool& pool);

// Same estimator fed by the pool's own true labels (oracle-complete pools).
Estimate estimate(const SamplePlan& plan, const Pool& pool);

// Closed-form E over the draw distribution, summed over the finite pool; for
// every design and every floored proposal this equals the pool defect rate.
double exact_estimator_mean(const DesignSpec& spec, const Pool& pool);

// Plan serialization: CSV with metadata comments (design, seed, n, pool_size,
// stratum_sizes) and columns id,stratum,weight,draw_index. Stratum indices
// are 1-based in the file, draw_index counts from 1 in draw order.
void write_plan(const SamplePlan& plan, const std::filesystem::path& path);
SamplePlan read_plan(const std::filesystem::path& path);

void write_estimate(const Estimate& est, const std::filesystem::path& path);

}  // namespace sismon
