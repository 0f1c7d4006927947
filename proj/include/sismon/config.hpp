#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "sismon/designs.hpp"
#include "sismon/pool.hpp"
#include "sismon/proposal.hpp"
#include "sismon/strata.hpp"

namespace sismon {

struct StrataSpec {
    enum class Method { none, categorical, quantile };
    Method method = Method::none;
    std::string attr;     // categorical
    std::string feature;  // quantile; may be "score" or empty with one bin
    std::size_t feature_bins = 1;
    std::size_t score_bins = 1;
    std::size_t min_count = 3;
    double min_frac = 0.005;
};

struct ProposalConfig {
    bool present = false;
    TransformFamily family = TransformFamily::raw_score;
    double alpha = 0.0;
    double floor = 1e-6;
};

// Experiment grid. Parsed fail-closed: unknown or ill-typed fields are
// errors, never ignored.
struct SimConfig {
    std::string pool_path;  // optional; the CLI --pool flag takes precedence
    std::vector<DesignKind> designs;
    std::vector<std::size_t> budgets;
    std::size_t replications = 1000;
    std::uint64_t seed = 0;
    StrataSpec strata;
    ProposalConfig proposal;
};

SimConfig parse_sim_config(const std::string& json_text, const std::string& context);
SimConfig load_sim_config(const std::filesystem::path& path);

// Builds the configured stratification (with tiny-stratum merging applied)
// and proposal. Both return nothing when the config leaves them out.
std::optional<Stratification> build_strata_from_spec(const Pool& pool, const StrataSpec& spec);
std::optional<Proposal> build_proposal_from_spec(const Pool& pool, const ProposalConfig& spec);

std::string strata_spec_description(const StrataSpec& spec);

// Synthetic pool spec file: JSON array of {size, defect_rate,
// defect_scores: [lo,hi], correct_scores: [lo,hi]}.
std::vector<SynthStratum> load_synth_spec(const std::filesystem::path& path);

}  // namespace sismon
