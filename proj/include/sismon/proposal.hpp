#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "sismon/pool.hpp"
#include "sismon/strata.hpp"

namespace sismon {

enum class TransformFamily { raw_score, one_minus_score, margin, binary_entropy };

TransformFamily transform_family_from_name(const std::string& name);
std::string transform_family_name(TransformFamily family);

// Scalar transform applied to the instance score before exponentiation. The
// floor keeps every mass positive so uniform-within-stratum target laws stay
// absolutely continuous w.r.t. the proposal.
struct ScoreTransform {
    TransformFamily family = TransformFamily::raw_score;
    double floor = 1e-6;
};

double transformed_score(const ScoreTransform& transform, double score);

// Sampling masses q(x) proportional to max(transform(score), floor)^alpha.
// Raw (unnormalized) masses are retained because both importance-weight
// forms cancel the normalizer algebraically; computing them from raw masses
// keeps alpha = 0 weights exactly 1.
class Proposal {
  public:
    Proposal(const Pool& pool, const ScoreTransform& transform, double alpha);

    std::size_t size() const { return raw_.size(); }
    double alpha() const { return alpha_; }
    const ScoreTransform& transform() const { return transform_; }

    double raw(std::size_t i) const { return raw_[i]; }
    double raw_total() const { return raw_total_; }
    const std::vector<double>& raw_masses() const { return raw_; }

    // Normalized mass q(x_i); sums to 1 within 1e-12.
    double mass(std::size_t i) const { return raw_[i] / raw_total_; }

    // Global importance weight p(x)/q(x) = Z / (N * u(x)).
    double global_weight(std::size_t i) const;

    // Within-stratum importance weight p_j(x)/q_j(x) = U_j / (N_j * u(x)),
    // where U_j is the raw mass of the stratum containing x.
    double stratum_weight(std::size_t i, double stratum_raw_mass,
                          std::size_t stratum_size) const;

  private:
    std::vector<double> raw_;
    double raw_total_ = 0.0;
    double alpha_ = 0.0;
    ScoreTransform transform_;
};

Proposal build_proposal(const Pool& pool, const ScoreTransform& transform, double alpha);

// Raw and normalized per-stratum proposal mass (U_j and Q_j = r_j).
struct StratumMasses {
    std::vector<double> raw;
    std::vector<double> normalized;
};

StratumMasses stratum_masses(const Proposal& prop, const Stratification& strat);

// Conditional restriction q_j(x) = q(x)/Q_j over the members of stratum j,
// in member (pool) order; sums to 1 within 1e-12.
std::vector<double> restrict_to_stratum(const Proposal& prop, const Stratification& strat,
                                        std::size_t j);

// Importance weight for the stratum containing the given instance.
double importance_weight(const Proposal& prop, const Stratification& strat, const Pool& pool,
                         std::int64_t id);

// Audit dump: two-column CSV (id, q) of normalized masses.
void write_proposal(const Proposal& prop, const Pool& pool, const std::filesystem::path& path);

}  // namespace sismon
