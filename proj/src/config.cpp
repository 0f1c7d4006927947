#include "sismon/config.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include "json.hpp"

#include "sismon/errors.hpp"

namespace sismon {

namespace {

using nlohmann::json;

void check_keys(const json& obj, const std::string& where, const std::set<std::string>& allowed) {
    for (const auto& [key, value] : obj.items()) {
        if (!allowed.count(key)) {
            throw config_error(where + ": unknown field '" + key + "'");
        }
    }
}

double as_number(const json& v, const std::string& where) {
    if (!v.is_number()) throw config_error(where + ": expected a number");
    return v.get<double>();
}

std::size_t as_count(const json& v, const std::string& where) {
    if (!v.is_number_integer() || v.get<std::int64_t>() < 0) {
        throw config_error(where + ": expected a non-negative integer");
    }
    return v.get<std::size_t>();
}

std::string as_string(const json& v, const std::string& where) {
    if (!v.is_string()) throw config_error(where + ": expected a string");
    return v.get<std::string>();
}

json parse_json(const std::string& text, const std::string& context) {
    try {
        return json::parse(text);
    } catch (const json::parse_error& e) {
        throw config_error(context + ": " + e.what());
    }
}

std::string slurp(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw config_error("cannot open config '" + path.string() + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

StrataSpec parse_strata(const json& obj, const std::string& where) {
    check_keys(obj, where, {"method", "params", "min_count", "min_frac"});
    StrataSpec spec;
    std::string method = as_string(obj.at("method"), where + ".method");
    json params = obj.value("params", json::object());
    if (!params.is_object()) throw config_error(where + ".params: expected an object");
    if (method == "none") {
        spec.method = StrataSpec::Method::none;
        check_keys(params, where + ".params", {});
    } else if (method == "categorical") {
        spec.method = StrataSpec::Method::categorical;
        check_keys(params, where + ".params", {"attr"});
        if (!params.contains("attr")) throw config_error(where + ".params: missing 'attr'");
        spec.attr = as_string(params.at("attr"), where + ".params.attr");
    } else if (method == "quantile") {
        spec.method = StrataSpec::Method::quantile;
        check_keys(params, where + ".params", {"feature", "feature_bins", "score_bins"});
        if (params.contains("feature")) {
            spec.feature = as_string(params.at("feature"), where + ".params.feature");
        }
        if (params.contains("feature_bins")) {
            spec.feature_bins = as_count(params.at("feature_bins"), where + ".params.feature_bins");
        }
        if (params.contains("score_bins")) {
            spec.score_bins = as_count(params.at("score_bins"), where + ".params.score_bins");
        }
        if (spec.feature_bins < 1 || spec.score_bins < 1) {
            throw config_error(where + ".params: bin counts must be >= 1");
        }
        if (spec.feature.empty() && spec.feature_bins > 1) {
            throw config_error(where + ".params: 'feature' required when feature_bins > 1");
        }
    } else {
        throw config_error(where + ".method: unknown method '" + method +
                           "' (available: none, categorical, quantile)");
    }
    if (obj.contains("min_count")) {
        spec.min_count = as_count(obj.at("min_count"), where + ".min_count");
    }
    if (obj.contains("min_frac")) {
        spec.min_frac = as_number(obj.at("min_frac"), where + ".min_frac");
        if (!(spec.min_frac >= 0.0 && spec.min_frac < 1.0)) {
            throw config_error(where + ".min_frac: must be in [0,1)");
        }
    }
    return spec;
}

ProposalConfig parse_proposal(const json& obj, const std::string& where) {
    check_keys(obj, where, {"family", "alpha", "floor"});
    ProposalConfig spec;
    spec.present = true;
    if (!obj.contains("family")) throw config_error(where + ": missing 'family'");
    if (!obj.contains("alpha")) throw config_error(where + ": missing 'alpha'");
    try {
        spec.family = transform_family_from_name(as_string(obj.at("family"), where + ".family"));
    } catch (const std::invalid_argument& e) {
        throw config_error(where + ".family: " + e.what());
    }
    spec.alpha = as_number(obj.at("alpha"), where + ".alpha");
    if (!(spec.alpha >= 0.0)) throw config_error(where + ".alpha: must be >= 0");
    if (obj.contains("floor")) {
        spec.floor = as_number(obj.at("floor"), where + ".floor");
        if (!(spec.floor > 0.0)) throw config_error(where + ".floor: must be > 0");
    }
    return spec;
}

}  // namespace

SimConfig parse_sim_config(const std::string& json_text, const std::string& context) {
    json doc = parse_json(json_text, context);
    if (!doc.is_object()) throw config_error(context + ": expected a JSON object");
    check_keys(doc, context,
               {"pool", "designs", "budgets", "replications", "seed", "strata", "proposal"});

    SimConfig config;
    if (doc.contains("pool")) config.pool_path = as_string(doc.at("pool"), context + ".pool");

    if (!doc.contains("designs")) throw config_error(context + ": missing 'designs'");
    if (!doc.at("designs").is_array() || doc.at("designs").empty()) {
        throw config_error(context + ".designs: expected a non-empty array");
    }
    for (const json& d : doc.at("designs")) {
        DesignKind kind;
        try {
            kind = design_kind_from_name(as_string(d, context + ".designs[]"));
        } catch (const std::invalid_argument& e) {
            throw config_error(context + ".designs: " + e.what());
        }
        for (DesignKind seen : config.designs) {
            if (seen == kind) {
                throw config_error(context + ".designs: duplicate design '" +
                                   design_kind_name(kind) + "'");
            }
        }
        config.designs.push_back(kind);
    }

    if (!doc.contains("budgets")) throw config_error(context + ": missing 'budgets'");
    if (!doc.at("budgets").is_array() || doc.at("budgets").empty()) {
        throw config_error(context + ".budgets: expected a non-empty array");
    }
    for (const json& b : doc.at("budgets")) {
        std::size_t n = as_count(b, context + ".budgets[]");
        if (n < 1) throw config_error(context + ".budgets: budgets must be >= 1");
        for (std::size_t seen : config.budgets) {
            if (seen == n) {
                throw config_error(context + ".budgets: duplicate budget " + std::to_string(n));
            }
        }
        config.budgets.push_back(n);
    }

    if (doc.contains("replications")) {
        config.replications = as_count(doc.at("replications"), context + ".replications");
    }
    if (config.replications < 2) {
        throw config_error(context + ".replications: must be >= 2");
    }

    if (!doc.contains("seed")) throw config_error(context + ": missing 'seed'");
    if (!doc.at("seed").is_number_integer() || doc.at("seed").get<std::int64_t>() < 0) {
        throw config_error(context + ".seed: expected a non-negative integer");
    }
    config.seed = doc.at("seed").get<std::uint64_t>();

    if (doc.contains("strata")) {
        if (!doc.at("strata").is_object()) {
            throw config_error(context + ".strata: expected an object");
        }
        config.strata = parse_strata(doc.at("strata"), context + ".strata");
    }
    if (doc.contains("proposal")) {
        if (!doc.at("proposal").is_object()) {
            throw config_error(context + ".proposal: expected an object");
        }
        config.proposal = parse_proposal(doc.at("proposal"), context + ".proposal");
    }

    for (DesignKind kind : config.designs) {
        if (design_is_stratified(kind) && config.strata.method == StrataSpec::Method::none) {
            throw config_error(context + ": design " + design_kind_name(kind) +
                               " requires a strata method");
        }
        if (design_uses_proposal(kind) && !config.proposal.present) {
            throw config_error(context + ": design " + design_kind_name(kind) +
                               " requires a proposal");
        }
    }
    return config;
}

SimConfig load_sim_config(const std::filesystem::path& path) {
    return parse_sim_config(slurp(path), path.string());
}

std::optional<Stratification> build_strata_from_spec(const Pool& pool, const StrataSpec& spec) {
    std::optional<Stratification> strat;
    switch (spec.method) {
        case StrataSpec::Method::none: return std::nullopt;
        case StrataSpec::Method::categorical:
            strat = build_categorical_strata(pool, spec.attr);
            break;
        case StrataSpec::Method::quantile:
            strat = build_quantile_strata(pool, spec.feature, spec.feature_bins, spec.score_bins);
            break;
    }
    return merge_small_strata(*strat, pool, spec.min_count, spec.min_frac);
}

std::optional<Proposal> build_proposal_from_spec(const Pool& pool, const ProposalConfig& spec) {
    if (!spec.present) return std::nullopt;
    return build_proposal(pool, ScoreTransform{spec.family, spec.floor}, spec.alpha);
}

std::string strata_spec_description(const StrataSpec& spec) {
    switch (spec.method) {
        case StrataSpec::Method::none: return "none";
        case StrataSpec::Method::categorical: return "categorical:" + spec.attr;
        case StrataSpec::Method::quantile:
            return "quantile:" + (spec.feature.empty() ? std::string("-") : spec.feature) + ":" +
                   std::to_string(spec.feature_bins) + "x" + std::to_string(spec.score_bins);
    }
    return "none";
}

std::vector<SynthStratum> load_synth_spec(const std::filesystem::path& path) {
    json doc = parse_json(slurp(path), path.string());
    if (!doc.is_array() || doc.empty()) {
        throw config_error(path.string() + ": expected a non-empty JSON array of strata");
    }
    std::vector<SynthStratum> spec;
    for (std::size_t k = 0; k < doc.size(); ++k) {
        const json& entry = doc[k];
        std::string where = path.string() + "[" + std::to_string(k) + "]";
        if (!entry.is_object()) throw config_error(where + ": expected an object");
        check_keys(entry, where, {"size", "defect_rate", "defect_scores", "correct_scores"});
        SynthStratum st;
        if (!entry.contains("size") || !entry.contains("defect_rate")) {
            throw config_error(where + ": 'size' and 'defect_rate' are required");
        }
        st.size = as_count(entry.at("size"), where + ".size");
        if (st.size < 1) throw config_error(where + ".size: must be >= 1");
        st.defect_rate = as_number(entry.at("defect_rate"), where + ".defect_rate");
        if (!(st.defect_rate >= 0.0 && st.defect_rate <= 1.0)) {
            throw config_error(where + ".defect_rate: must be in [0,1]");
        }
        auto parse_law = [&](const char* key, ScoreLaw fallback) {
            if (!entry.contains(key)) return fallback;
            const json& law = entry.at(key);
            if (!law.is_array() || law.size() != 2) {
                throw config_error(where + "." + key + ": expected [lo, hi]");
            }
            ScoreLaw out{as_number(law[0], where + "." + key + "[0]"),
                         as_number(law[1], where + "." + key + "[1]")};
            if (!(out.lo >= 0.0 && out.lo <= out.hi && out.hi <= 1.0)) {
                throw config_error(where + "." + key + ": support must be inside [0,1]");
            }
            return out;
        };
        st.defect_scores = parse_law("defect_scores", ScoreLaw{0.0, 1.0});
        st.correct_scores = parse_law("correct_scores", ScoreLaw{0.0, 1.0});
        spec.push_back(st);
    }
    return spec;
}

}  // namespace sismon
