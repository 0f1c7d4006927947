#include "sismon/proposal.hpp"

#include <cmath>
#include <stdexcept>

#include "sismon/csv.hpp"
#include "sismon/errors.hpp"
#include "sismon/numeric.hpp"

namespace sismon {

TransformFamily transform_family_from_name(const std::string& name) {
    if (name == "raw_score") return TransformFamily::raw_score;
    if (name == "one_minus_score") return TransformFamily::one_minus_score;
    if (name == "margin") return TransformFamily::margin;
    if (name == "binary_entropy") return TransformFamily::binary_entropy;
    throw std::invalid_argument(
        "unknown transform family '" + name +
        "' (available: raw_score, one_minus_score, margin, binary_entropy)");
}

std::string transform_family_name(TransformFamily family) {
    switch (family) {
        case TransformFamily::raw_score: return "raw_score";
        case TransformFamily::one_minus_score: return "one_minus_score";
        case TransformFamily::margin: return "margin";
        case TransformFamily::binary_entropy: return "binary_entropy";
    }
    throw std::logic_error("unreachable");
}

double transformed_score(const ScoreTransform& transform, double score) {
    double t = 0.0;
    switch (transform.family) {
        case TransformFamily::raw_score: t = score; break;
        case TransformFamily::one_minus_score: t = 1.0 - score; break;
        case TransformFamily::margin: t = 0.5 - std::abs(score - 0.5); break;
        case TransformFamily::binary_entropy:
            t = (score <= 0.0 || score >= 1.0)
                    ? 0.0
                    : -(score * std::log(score) + (1.0 - score) * std::log(1.0 - score));
            break;
    }
    return std::max(t, transform.floor);
}

Proposal::Proposal(const Pool& pool, const ScoreTransform& transform, double alpha)
    : alpha_(alpha), transform_(transform) {
    if (!(alpha >= 0.0) || !std::isfinite(alpha)) {
        throw std::invalid_argument("alpha must be finite and >= 0");
    }
    if (!(transform.floor > 0.0)) throw std::invalid_argument("transform floor must be > 0");
    raw_.reserve(pool.size());
    KahanSum total;
    for (const Instance& inst : pool.instances()) {
        double u = std::pow(transformed_score(transform, inst.score), alpha);
        raw_.push_back(u);
        total.add(u);
    }
    raw_total_ = total.value();
    if (!(raw_total_ > 0.0) || !std::isfinite(raw_total_)) {
        throw data_error("proposal mass is not positive and finite");
    }
}

double Proposal::global_weight(std::size_t i) const {
    return raw_total_ / (static_cast<double>(raw_.size()) * raw_[i]);
}

double Proposal::stratum_weight(std::size_t i, double stratum_raw_mass,
                                std::size_t stratum_size) const {
    return stratum_raw_mass / (static_cast<double>(stratum_size) * raw_[i]);
}

Proposal build_proposal(const Pool& pool, const ScoreTransform& transform, double alpha) {
    return Proposal(pool, transform, alpha);
}

StratumMasses stratum_masses(const Proposal& prop, const Stratification& strat) {
    if (prop.size() != strat.pool_size()) throw data_error("proposal does not match stratification");
    StratumMasses masses;
    masses.raw.reserve(strat.stratum_count());
    masses.normalized.reserve(strat.stratum_count());
    for (const auto& members : strat.members()) {
        KahanSum sum;
        for (std::size_t i : members) sum.add(prop.raw(i));
        masses.raw.push_back(sum.value());
        masses.normalized.push_back(sum.value() / prop.raw_total());
    }
    return masses;
}

std::vector<double> restrict_to_stratum(const Proposal& prop, const Stratification& strat,
                                        std::size_t j) {
    if (j >= strat.stratum_count()) throw std::invalid_argument("stratum index out of range");
    const auto& members = strat.members()[j];
    KahanSum sum;
    for (std::size_t i : members) sum.add(prop.raw(i));
    double stratum_raw = sum.value();
    std::vector<double> restricted;
    restricted.reserve(members.size());
    for (std::size_t i : members) restricted.push_back(prop.raw(i) / stratum_raw);
    return restricted;
}

double importance_weight(const Proposal& prop, const Stratification& strat, const Pool& pool,
                         std::int64_t id) {
    std::size_t i = pool.index_of(id);
    std::size_t j = strat.stratum_of(i);
    const auto& members = strat.members()[j];
    KahanSum sum;
    for (std::size_t k : members) sum.add(prop.raw(k));
    return prop.stratum_weight(i, sum.value(), members.size());
}

void write_proposal(const Proposal& prop, const Pool& pool, const std::filesystem::path& path) {
    if (prop.size() != pool.size()) throw data_error("proposal does not match pool");
    CsvFile out(path);
    out.row({"id", "q"});
    for (std::size_t i = 0; i < pool.size(); ++i) {
        out.row({std::to_string(pool.at(i).id), format_double(prop.mass(i))});
    }
    out.close();
}

}  // namespace sismon
