#include "sismon/designs.hpp"

#include <algorithm>
#include <stdexcept>

#include "json.hpp"

#include "sismon/csv.hpp"
#include "sismon/errors.hpp"
#include "sismon/numeric.hpp"

namespace sismon {

DesignKind design_kind_from_name(const std::string& name) {
    if (name == "RS") return DesignKind::RS;
    if (name == "SRS") return DesignKind::SRS;
    if (name == "IS") return DesignKind::IS;
    if (name == "SIS") return DesignKind::SIS;
    throw std::invalid_argument("unknown design '" + name + "' (available: RS, SRS, IS, SIS)");
}

std::string design_kind_name(DesignKind kind) {
    switch (kind) {
        case DesignKind::RS: return "RS";
        case DesignKind::SRS: return "SRS";
        case DesignKind::IS: return "IS";
        case DesignKind::SIS: return "SIS";
    }
    throw std::logic_error("unreachable");
}

namespace {

void validate_spec(const DesignSpec& spec, const Pool& pool) {
    if (spec.budget < 1) throw std::invalid_argument("budget must be >= 1");
    if (design_is_stratified(spec.kind)) {
        if (!spec.strat) {
            throw std::invalid_argument(design_kind_name(spec.kind) +
                                        " requires a stratification");
        }
        if (spec.strat->pool_size() != pool.size()) {
            throw data_error("stratification built for pool of size " +
                             std::to_string(spec.strat->pool_size()) + ", got " +
                             std::to_string(pool.size()));
        }
    }
    if (design_uses_proposal(spec.kind)) {
        if (!spec.proposal) {
            throw std::invalid_argument(design_kind_name(spec.kind) + " requires a proposal");
        }
        if (spec.proposal->size() != pool.size()) {
            throw data_error("proposal built for pool of size " +
                             std::to_string(spec.proposal->size()) + ", got " +
                             std::to_string(pool.size()));
        }
    }
}

}  // namespace

PlanSampler::PlanSampler(const DesignSpec& spec, const Pool& pool)
    : kind_(spec.kind), budget_(spec.budget), pool_size_(pool.size()) {
    validate_spec(spec, pool);
    ids_.reserve(pool.size());
    for (const Instance& inst : pool.instances()) ids_.push_back(inst.id);

    if (design_is_stratified(spec.kind)) {
        const Stratification& strat = *spec.strat;
        alloc_ = allocate_proportional(strat, spec.budget);
        StratumMasses masses;
        if (spec.kind == DesignKind::SIS) masses = stratum_masses(*spec.proposal, strat);
        for (std::size_t j = 0; j < strat.stratum_count(); ++j) {
            const auto& members = strat.members()[j];
            stratum_sizes_.push_back(members.size());
            std::vector<double> cell_masses;
            std::vector<double> weights;
            cell_masses.reserve(members.size());
            weights.reserve(members.size());
            for (std::size_t i : members) {
                if (spec.kind == DesignKind::SIS) {
                    cell_masses.push_back(spec.proposal->raw(i));
                    weights.push_back(
                        spec.proposal->stratum_weight(i, masses.raw[j], members.size()));
                } else {
                    cell_masses.push_back(1.0);
                    weights.push_back(1.0);
                }
            }
            cells_.push_back(Cell{CdfSampler(cell_masses), members, std::move(weights),
                                  alloc_->counts[j], j});
        }
    } else {
        std::vector<std::size_t> members(pool.size());
        for (std::size_t i = 0; i < pool.size(); ++i) members[i] = i;
        std::vector<double> cell_masses;
        std::vector<double> weights;
        cell_masses.reserve(pool.size());
        weights.reserve(pool.size());
        for (std::size_t i = 0; i < pool.size(); ++i) {
            if (spec.kind == DesignKind::IS) {
                cell_masses.push_back(spec.proposal->raw(i));
                weights.push_back(spec.proposal->global_weight(i));
            } else {
                cell_masses.push_back(1.0);
                weights.push_back(1.0);
            }
        }
        cells_.push_back(Cell{CdfSampler(cell_masses), std::move(members), std::move(weights),
                              spec.budget, std::nullopt});
    }
}

const AllocationPlan& PlanSampler::allocation() const {
    if (!alloc_) throw std::logic_error("allocation only defined for stratified designs");
    return *alloc_;
}

SamplePlan PlanSampler::draw(std::uint64_t seed) const {
    SamplePlan plan;
    plan.design = kind_;
    plan.seed = seed;
    plan.pool_size = pool_size_;
    plan.stratum_sizes = stratum_sizes_;
    plan.draws.reserve(budget_);
    RandomStream rs(seed);
    for (const Cell& cell : cells_) {
        for (std::size_t k = 0; k < cell.count; ++k) {
            std::size_t cat = cell.sampler.draw(rs);
            plan.draws.push_back(
                Draw{ids_[cell.member_index[cat]], cell.stratum, cell.weights[cat]});
        }
    }
    return plan;
}

SamplePlan draw_plan(const DesignSpec& spec, const Pool& pool, std::uint64_t seed) {
    return PlanSampler(spec, pool).draw(seed);
}

namespace {

// Shared estimator core; the two public overloads differ only in where the
// true label comes from, so an estimate from a round-tripped plan file
// reproduces the in-memory value bit-for-bit.
template <class ZFn>
Estimate estimate_impl(const SamplePlan& plan, const Pool& pool, ZFn&& z_of) {
    if (plan.draws.empty()) throw data_error("plan has no draws");
    if (plan.pool_size != pool.size()) {
        throw data_error("plan drawn from pool of size " + std::to_string(plan.pool_size) +
                         ", got " + std::to_string(pool.size()));
    }
    Estimate est;
    est.design = plan.design;
    est.n = plan.draws.size();

    if (design_is_stratified(plan.design)) {
        std::size_t p = plan.stratum_sizes.size();
        if (p == 0) throw data_error("stratified plan lacks stratum sizes");
        std::vector<double> sums(p, 0.0);
        std::vector<std::size_t> counts(p, 0);
        for (const Draw& d : plan.draws) {
            if (!d.stratum || *d.stratum >= p) {
                throw data_error("draw for id " + std::to_string(d.id) +
                                 " has no valid stratum");
            }
            if (!(d.weight > 0.0)) throw data_error("non-positive weight in plan");
            if (z_of(d.id)) sums[*d.stratum] += d.weight;
            ++counts[*d.stratum];
        }
        double value = 0.0;
        for (std::size_t j = 0; j < p; ++j) {
            if (counts[j] == 0) {
                throw data_error("plan has no draws for stratum " + std::to_string(j + 1));
            }
            double w = static_cast<double>(plan.stratum_sizes[j]) /
                       static_cast<double>(plan.pool_size);
            double mean = sums[j] / static_cast<double>(counts[j]);
            double partial = w * mean;
            value += partial;
            est.per_stratum.push_back(StratumPartial{j, counts[j], w, mean, partial});
        }
        est.value = value;
    } else {
        double sum = 0.0;
        for (const Draw& d : plan.draws) {
            if (!(d.weight > 0.0)) throw data_error("non-positive weight in plan");
            if (z_of(d.id)) sum += d.weight;
        }
        est.value = sum / static_cast<double>(plan.draws.size());
    }
    return est;
}

}  // namespace

Estimate estimate(const SamplePlan& plan, const std::map<std::int64_t, int>& labels,
                  const Pool& pool) {
    return estimate_impl(plan, pool, [&](std::int64_t id) {
        auto it = labels.find(id);
        if (it == labels.end()) throw data_error("label missing for id " + std::to_string(id));
        return pool.at(pool.index_of(id)).pred_label != it->second;
    });
}

Estimate estimate(const SamplePlan& plan, const Pool& pool) {
    if (!pool.oracle_complete()) {
        throw data_error("estimating against pool labels requires oracle-complete pool");
    }
    return estimate_impl(plan, pool, [&](std::int64_t id) {
        const Instance& inst = pool.at(pool.index_of(id));
        return inst.pred_label != *inst.true_label;
    });
}

double exact_estimator_mean(const DesignSpec& spec, const Pool& pool) {
    validate_spec(spec, pool);
    if (!pool.oracle_complete()) {
        throw data_error("exact estimator mean requires oracle-complete pool");
    }
    auto z = [&](std::size_t i) {
        return pool.at(i).pred_label != *pool.at(i).true_label ? 1.0 : 0.0;
    };

    switch (spec.kind) {
        case DesignKind::RS: {
            KahanSum sum;
            for (std::size_t i = 0; i < pool.size(); ++i) sum.add(z(i));
            return sum.value() / static_cast<double>(pool.size());
        }
        case DesignKind::IS: {
            const Proposal& prop = *spec.proposal;
            KahanSum sum;
            for (std::size_t i = 0; i < pool.size(); ++i) {
                sum.add(prop.mass(i) * z(i) * prop.global_weight(i));
            }
            return sum.value();
        }
        case DesignKind::SRS: {
            const Stratification& strat = *spec.strat;
            KahanSum outer;
            for (std::size_t j = 0; j < strat.stratum_count(); ++j) {
                const auto& members = strat.members()[j];
                KahanSum inner;
                for (std::size_t i : members) inner.add(z(i));
                outer.add(strat.weight(j) * (inner.value() / static_cast<double>(members.size())));
            }
            return outer.value();
        }
        case DesignKind::SIS: {
            const Stratification& strat = *spec.strat;
            const Proposal& prop = *spec.proposal;
            StratumMasses masses = stratum_masses(prop, strat);
            KahanSum outer;
            for (std::size_t j = 0; j < strat.stratum_count(); ++j) {
                const auto& members = strat.members()[j];
                KahanSum inner;
                for (std::size_t i : members) {
                    double qj = prop.raw(i) / masses.raw[j];
                    inner.add(qj * z(i) * prop.stratum_weight(i, masses.raw[j], members.size()));
                }
                outer.add(strat.weight(j) * inner.value());
            }
            return outer.value();
        }
    }
    throw std::logic_error("unreachable");
}

void write_plan(const SamplePlan& plan, const std::filesystem::path& path) {
    CsvFile out(path);
    out.comment("format", "sismon-plan-v1");
    out.comment("design", design_kind_name(plan.design));
    out.comment("seed", std::to_string(plan.seed));
    out.comment("n", std::to_string(plan.draws.size()));
    out.comment("pool_size", std::to_string(plan.pool_size));
    if (!plan.stratum_sizes.empty()) {
        std::string sizes;
        for (std::size_t j = 0; j < plan.stratum_sizes.size(); ++j) {
            if (j) sizes += ',';
            sizes += std::to_string(plan.stratum_sizes[j]);
        }
        out.comment("stratum_sizes", sizes);
    }
    out.row({"id", "stratum", "weight", "draw_index"});
    for (std::size_t k = 0; k < plan.draws.size(); ++k) {
        const Draw& d = plan.draws[k];
        out.row({std::to_string(d.id), d.stratum ? std::to_string(*d.stratum + 1) : "",
                 format_double(d.weight), std::to_string(k + 1)});
    }
    out.close();
}

SamplePlan read_plan(const std::filesystem::path& path) {
    CsvTable table = read_csv(path);
    if (table.meta("format").value_or("") != "sismon-plan-v1") {
        throw data_error(path.string() + ": not a sampling plan file");
    }
    auto require = [&](const char* key) {
        auto v = table.meta(key);
        if (!v) throw data_error(path.string() + ": missing metadata '" + std::string(key) + "'");
        return *v;
    };
    SamplePlan plan;
    plan.design = design_kind_from_name(require("design"));
    plan.seed = parse_uint64(require("seed"), path.string() + " seed");
    plan.pool_size =
        static_cast<std::size_t>(parse_int(require("pool_size"), path.string() + " pool_size"));
    if (auto sizes = table.meta("stratum_sizes")) {
        std::string_view rest = *sizes;
        while (!rest.empty()) {
            auto comma = rest.find(',');
            std::string_view tok = rest.substr(0, comma);
            plan.stratum_sizes.push_back(
                static_cast<std::size_t>(parse_int(tok, path.string() + " stratum_sizes")));
            rest = comma == std::string_view::npos ? std::string_view{} : rest.substr(comma + 1);
        }
    }
    std::size_t id_col = table.column("id");
    std::size_t stratum_col = table.column("stratum");
    std::size_t weight_col = table.column("weight");
    for (std::size_t r = 0; r < table.rows.size(); ++r) {
        std::string ctx = path.string() + " row " + std::to_string(r + 1);
        Draw d;
        d.id = parse_int(table.rows[r][id_col], ctx + " id");
        const std::string& stratum = table.rows[r][stratum_col];
        if (!stratum.empty()) {
            std::int64_t j = parse_int(stratum, ctx + " stratum");
            if (j < 1) throw data_error(ctx + ": stratum index must be >= 1");
            d.stratum = static_cast<std::size_t>(j - 1);
        }
        d.weight = parse_double(table.rows[r][weight_col], ctx + " weight");
        plan.draws.push_back(d);
    }
    std::size_t expected =
        static_cast<std::size_t>(parse_int(require("n"), path.string() + " n"));
    if (plan.draws.size() != expected) {
        throw data_error(path.string() + ": metadata lists n=" + std::to_string(expected) +
                         " but file has " + std::to_string(plan.draws.size()) + " draws");
    }
    return plan;
}

void write_estimate(const Estimate& est, const std::filesystem::path& path) {
    nlohmann::json doc;
    doc["design"] = design_kind_name(est.design);
    doc["n"] = est.n;
    doc["value"] = est.value;
    if (!est.per_stratum.empty()) {
        nlohmann::json rows = nlohmann::json::array();
        for (const StratumPartial& sp : est.per_stratum) {
            rows.push_back({{"stratum", sp.stratum + 1},
                            {"draws", sp.draws},
                            {"w_j", sp.weight},
                            {"mean", sp.mean},
                            {"partial", sp.partial}});
        }
        doc["per_stratum"] = std::move(rows);
    }
    std::ofstream out(path);
    if (!out) throw data_error("cannot write '" + path.string() + "'");
    out << doc.dump(2) << '\n';
    if (!out) throw data_error("error writing '" + path.string() + "'");
}

}  // namespace sismon
