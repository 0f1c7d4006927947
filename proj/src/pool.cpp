#include "sismon/pool.hpp"

#include <cmath>
#include <set>

#include "sismon/csv.hpp"
#include "sismon/errors.hpp"
#include "sismon/numeric.hpp"
#include "sismon/rng.hpp"

namespace sismon {

Pool Pool::from_rows(std::vector<Instance> rows, std::map<std::string, AttrColumn> attrs) {
    if (rows.empty()) throw data_error("pool is empty");
    Pool pool;
    pool.index_.reserve(rows.size());
    std::size_t labeled = 0;
    for (std::size_t i = 0; i < rows.size(); ++i) {
        const Instance& r = rows[i];
        if (r.id < 0) throw data_error("negative id " + std::to_string(r.id));
        if (!pool.index_.emplace(r.id, i).second) {
            throw data_error("duplicate id " + std::to_string(r.id));
        }
        if (!(r.score >= 0.0 && r.score <= 1.0)) {
            throw data_error("id " + std::to_string(r.id) + ": score " +
                             format_double(r.score) + " outside [0,1]");
        }
        if (r.pred_label < 0) throw data_error("id " + std::to_string(r.id) + ": negative pred_label");
        if (r.true_label) {
            if (*r.true_label < 0) {
                throw data_error("id " + std::to_string(r.id) + ": negative true_label");
            }
            ++labeled;
        }
    }
    if (labeled != 0 && labeled != rows.size()) {
        throw data_error("true_label present on " + std::to_string(labeled) + " of " +
                         std::to_string(rows.size()) + " rows; must be all or none");
    }
    for (const auto& [name, col] : attrs) {
        if (col.raw.size() != rows.size()) {
            throw data_error("attribute '" + name + "' has " + std::to_string(col.raw.size()) +
                             " values for " + std::to_string(rows.size()) + " rows");
        }
        if (col.numeric && col.num.size() != rows.size()) {
            throw data_error("attribute '" + name + "' numeric view incomplete");
        }
    }
    pool.oracle_complete_ = labeled == rows.size();
    pool.rows_ = std::move(rows);
    pool.attrs_ = std::move(attrs);
    return pool;
}

std::size_t Pool::index_of(std::int64_t id) const {
    auto it = index_.find(id);
    if (it == index_.end()) throw data_error("id " + std::to_string(id) + " not in pool");
    return it->second;
}

const AttrColumn* Pool::find_attr(const std::string& name) const {
    auto it = attrs_.find(name);
    return it == attrs_.end() ? nullptr : &it->second;
}

namespace {

constexpr const char* kAttrPrefix = "attr_";

AttrColumn finish_attr_column(std::vector<std::string> raw) {
    AttrColumn col;
    col.numeric = true;
    col.num.reserve(raw.size());
    for (const std::string& cell : raw) {
        try {
            col.num.push_back(parse_double(cell, ""));
        } catch (const data_error&) {
            col.numeric = false;
            col.num.clear();
            break;
        }
    }
    col.raw = std::move(raw);
    return col;
}

int parse_label(std::string_view text, const std::string& context) {
    std::int64_t v = parse_int(text, context);
    if (v < 0 || v > INT32_MAX) throw data_error(context + ": label out of range");
    return static_cast<int>(v);
}

}  // namespace

Pool load_pool(const std::filesystem::path& path, const PoolSchema& schema) {
    CsvTable table = read_csv(path);
    std::size_t id_col = table.column(schema.id);
    std::size_t score_col = table.column(schema.score);
    std::size_t pred_col = table.column(schema.pred_label);
    auto true_col = table.find_column(schema.true_label);

    std::vector<std::pair<std::string, std::size_t>> attr_cols;
    for (std::size_t c = 0; c < table.header.size(); ++c) {
        const std::string& name = table.header[c];
        if (c == id_col || c == score_col || c == pred_col) continue;
        if (true_col && c == *true_col) continue;
        if (name.rfind(kAttrPrefix, 0) == 0) {
            attr_cols.emplace_back(name.substr(std::string(kAttrPrefix).size()), c);
        } else {
            throw data_error(path.string() + ": unrecognized column '" + name +
                             "' (attributes must be prefixed 'attr_')");
        }
    }

    std::vector<Instance> rows;
    rows.reserve(table.rows.size());
    std::map<std::string, std::vector<std::string>> attr_raw;
    for (const auto& [name, c] : attr_cols) attr_raw[name] = {};

    for (std::size_t r = 0; r < table.rows.size(); ++r) {
        const auto& fields = table.rows[r];
        std::string ctx = path.string() + " row " + std::to_string(r + 1);
        Instance inst;
        inst.id = parse_int(fields[id_col], ctx + " id");
        inst.score = parse_double(fields[score_col], ctx + " score");
        inst.pred_label = parse_label(fields[pred_col], ctx + " pred_label");
        if (true_col && !fields[*true_col].empty()) {
            inst.true_label = parse_label(fields[*true_col], ctx + " true_label");
        }
        rows.push_back(inst);
        for (const auto& [name, c] : attr_cols) attr_raw[name].push_back(fields[c]);
    }

    std::map<std::string, AttrColumn> attrs;
    for (auto& [name, raw] : attr_raw) attrs[name] = finish_attr_column(std::move(raw));
    return Pool::from_rows(std::move(rows), std::move(attrs));
}

void write_pool(const Pool& pool, const std::filesystem::path& path) {
    CsvFile out(path);
    std::vector<std::string> header = {"id", "score", "pred_label"};
    if (pool.oracle_complete()) header.push_back("true_label");
    for (const auto& [name, col] : pool.attrs()) header.push_back(std::string(kAttrPrefix) + name);
    out.row(header);
    for (std::size_t i = 0; i < pool.size(); ++i) {
        const Instance& inst = pool.at(i);
        std::vector<std::string> fields = {std::to_string(inst.id), format_double(inst.score),
                                           std::to_string(inst.pred_label)};
        if (pool.oracle_complete()) fields.push_back(std::to_string(*inst.true_label));
        for (const auto& [name, col] : pool.attrs()) {
            fields.push_back(col.numeric ? format_double(col.num[i]) : col.raw[i]);
        }
        out.row(fields);
    }
    out.close();
}

double true_defect_rate(const Pool& pool) {
    if (!pool.oracle_complete()) throw data_error("defect rate requires oracle-complete pool");
    KahanSum sum;
    for (const Instance& inst : pool.instances()) {
        sum.add(inst.pred_label != *inst.true_label ? 1.0 : 0.0);
    }
    return sum.value() / static_cast<double>(pool.size());
}

LabelOracle LabelOracle::from_pool(const Pool& pool) {
    if (!pool.oracle_complete()) throw data_error("label oracle requires oracle-complete pool");
    LabelOracle oracle;
    for (const Instance& inst : pool.instances()) oracle.table_[inst.id] = *inst.true_label;
    return oracle;
}

LabelOracle LabelOracle::from_table(std::map<std::int64_t, int> table) {
    LabelOracle oracle;
    oracle.table_ = std::move(table);
    return oracle;
}

LabelOracle LabelOracle::load(const std::filesystem::path& path) {
    CsvTable table = read_csv(path);
    std::size_t id_col = table.column("id");
    std::size_t label_col = table.column("true_label");
    std::map<std::int64_t, int> entries;
    for (std::size_t r = 0; r < table.rows.size(); ++r) {
        std::string ctx = path.string() + " row " + std::to_string(r + 1);
        std::int64_t id = parse_int(table.rows[r][id_col], ctx + " id");
        int label = parse_label(table.rows[r][label_col], ctx + " true_label");
        if (!entries.emplace(id, label).second) {
            throw data_error(path.string() + ": duplicate label for id " + std::to_string(id));
        }
    }
    return from_table(std::move(entries));
}

int LabelOracle::label(std::int64_t id) const {
    auto it = table_.find(id);
    if (it == table_.end()) {
        throw data_error("id " + std::to_string(id) + " not covered by label oracle");
    }
    return it->second;
}

std::map<std::int64_t, int> oracle_query(const LabelOracle& oracle,
                                         const std::vector<std::int64_t>& ids) {
    std::map<std::int64_t, int> out;
    for (std::int64_t id : ids) out[id] = oracle.label(id);
    return out;
}

namespace {

void check_law(const ScoreLaw& law, const std::string& what) {
    if (!(law.lo <= law.hi) || !(law.lo >= 0.0) || !(law.hi <= 1.0)) {
        throw std::invalid_argument(what + " support [" + format_double(law.lo) + "," +
                                    format_double(law.hi) + "] not inside [0,1]");
    }
}

}  // namespace

Pool synth_pool(const std::vector<SynthStratum>& spec, std::uint64_t seed) {
    if (spec.empty()) throw std::invalid_argument("synthetic pool spec is empty");
    for (const SynthStratum& st : spec) {
        if (st.size < 1) throw std::invalid_argument("stratum size must be >= 1");
        if (!(st.defect_rate >= 0.0 && st.defect_rate <= 1.0)) {
            throw std::invalid_argument("defect rate outside [0,1]");
        }
        check_law(st.defect_scores, "defect score law");
        check_law(st.correct_scores, "correct score law");
    }

    RandomStream rs(derive_seed(seed, "synth", 0, 0));
    std::vector<Instance> rows;
    AttrColumn stratum_col;
    stratum_col.numeric = true;
    std::int64_t next_id = 1;
    for (std::size_t k = 0; k < spec.size(); ++k) {
        const SynthStratum& st = spec[k];
        auto defects = static_cast<std::size_t>(
            std::llround(static_cast<double>(st.size) * st.defect_rate));
        for (std::size_t i = 0; i < st.size; ++i) {
            bool defect = i < defects;
            const ScoreLaw& law = defect ? st.defect_scores : st.correct_scores;
            Instance inst;
            inst.id = next_id++;
            inst.score = law.lo + rs.uniform() * (law.hi - law.lo);
            inst.pred_label = 0;
            inst.true_label = defect ? 1 : 0;
            rows.push_back(inst);
            stratum_col.num.push_back(static_cast<double>(k + 1));
            stratum_col.raw.push_back(std::to_string(k + 1));
        }
    }
    std::map<std::string, AttrColumn> attrs;
    attrs["stratum"] = std::move(stratum_col);
    return Pool::from_rows(std::move(rows), std::move(attrs));
}

std::vector<SynthStratum> preset_spec(const std::string& name, std::size_t total_size) {
    if (total_size < 2) throw std::invalid_argument("preset pools need at least 2 instances");
    ScoreLaw informative_defect{0.6, 0.9};
    ScoreLaw informative_correct{0.02, 0.15};
    std::size_t half = total_size / 2;
    if (name == "two-strata-aligned") {
        return {{half, 0.002, informative_defect, informative_correct},
                {total_size - half, 0.018, informative_defect, informative_correct}};
    }
    if (name == "two-strata-misaligned") {
        // High scores on the bulk of correct items, defects hidden at low
        // score: a proposal proportional to the score under-samples defects.
        std::size_t bulk = total_size * 19 / 20;
        if (bulk == total_size) --bulk;
        ScoreLaw low{0.03, 0.06};
        return {{bulk, 0.0, low, ScoreLaw{0.75, 0.95}}, {total_size - bulk, 0.2, low, low}};
    }
    if (name == "low-defect") {
        return {{half, 0.001, informative_defect, informative_correct},
                {total_size - half, 0.009, informative_defect, informative_correct}};
    }
    std::string known;
    for (const std::string& p : preset_names()) known += (known.empty() ? "" : ", ") + p;
    throw std::invalid_argument("unknown preset '" + name + "' (available: " + known + ")");
}

std::vector<std::string> preset_names() {
    return {"two-strata-aligned", "two-strata-misaligned", "low-defect"};
}

}  // namespace sismon
