#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

namespace sismon {

// One scored prediction.
struct Instance {
    std::int64_t id = 0;
    double score = 0.0;  // proxy score in [0,1]
    int pred_label = 0;
    std::optional<int> true_label;
};

// Per-pool attribute column. Raw string values are kept for round-trip
// serialization; num is the parsed view when every cell is numeric.
struct AttrColumn {
    bool numeric = false;
    std::vector<double> num;
    std::vector<std::string> raw;
};

// Immutable finite population of instances. Either every instance carries a
// true label (oracle-complete, required for simulation and diagnostics) or
// none does.
class Pool {
  public:
    static Pool from_rows(std::vector<Instance> rows,
                          std::map<std::string, AttrColumn> attrs = {});

    std::size_t size() const { return rows_.size(); }
    const Instance& at(std::size_t i) const { return rows_[i]; }
    const std::vector<Instance>& instances() const { return rows_; }

    std::size_t index_of(std::int64_t id) const;
    bool contains(std::int64_t id) const { return index_.count(id) != 0; }

    bool oracle_complete() const { return oracle_complete_; }

    const std::map<std::string, AttrColumn>& attrs() const { return attrs_; }
    const AttrColumn* find_attr(const std::string& name) const;

  private:
    Pool() = default;

    std::vector<Instance> rows_;
    std::map<std::string, AttrColumn> attrs_;
    std::unordered_map<std::int64_t, std::size_t> index_;
    bool oracle_complete_ = false;
};

// Column-name mapping for pool ingestion. Attribute columns are any columns
// named "attr_<name>" regardless of the mapping.
struct PoolSchema {
    std::string id = "id";
    std::string score = "score";
    std::string pred_label = "pred_label";
    std::string true_label = "true_label";
};

Pool load_pool(const std::filesystem::path& path, const PoolSchema& schema = {});
void write_pool(const Pool& pool, const std::filesystem::path& path);

// Finite-population defect rate: mean of 1{pred_label != true_label}.
double true_defect_rate(const Pool& pool);

// Answers true-label queries, either from a pool's own labels or from an
// external id-keyed table. Querying an uncovered id is an error, never a
// default.
class LabelOracle {
  public:
    static LabelOracle from_pool(const Pool& pool);
    static LabelOracle from_table(std::map<std::int64_t, int> table);
    static LabelOracle load(const std::filesystem::path& path);

    bool covers(std::int64_t id) const { return table_.count(id) != 0; }
    int label(std::int64_t id) const;
    std::size_t size() const { return table_.size(); }

  private:
    std::map<std::int64_t, int> table_;
};

std::map<std::int64_t, int> oracle_query(const LabelOracle& oracle,
                                         const std::vector<std::int64_t>& ids);

// Uniform score law on [lo, hi] with [lo, hi] inside [0, 1].
struct ScoreLaw {
    double lo = 0.0;
    double hi = 1.0;
};

struct SynthStratum {
    std::size_t size = 0;
    double defect_rate = 0.0;
    ScoreLaw defect_scores;   // scores of misclassified items
    ScoreLaw correct_scores;  // scores of correctly classified items
};

// Generates an oracle-complete pool with exactly round(size * defect_rate)
// defective items per stratum, so the overall defect rate is a known constant
// independent of the seed. The generating stratum index (1-based) is recorded
// in attribute "stratum".
Pool synth_pool(const std::vector<SynthStratum>& spec, std::uint64_t seed);

// Built-in synthetic regimes, parameterized by total pool size.
std::vector<SynthStratum> preset_spec(const std::string& name, std::size_t total_size);
std::vector<std::string> preset_names();

}  // namespace sismon
