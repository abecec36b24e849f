#pragma once

// Activation pruning search. Accuracy comes from a pluggable evaluator; this
// module ranks activations, builds the pruned variants and weighs accuracy
// against the HE parameters each variant needs.

#include "hegcn/costmodel.hpp"
#include "hegcn/model.hpp"

#include <json.hpp>

#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace hegcn {

/// Accuracy of a model variant, in [0, 1]. `pruned` lists the pruned
/// activation indices in ascending order.
class AccuracyEvaluator {
public:
    virtual ~AccuracyEvaluator() = default;
    virtual double evaluate(const ModelSpec& variant, const std::vector<std::size_t>& pruned) = 0;
};

/// Looks accuracies up in a table: {"baseline": a, "drop_one": {"i": a},
/// "pruned_sets": {"i,j": a}}. Single-index sets fall back to drop_one and the
/// empty set to baseline.
class TableEvaluator : public AccuracyEvaluator {
public:
    TableEvaluator() = default;
    static TableEvaluator from_json(const nlohmann::json& j);
    static TableEvaluator from_file(const std::string& path);

    void set(const std::vector<std::size_t>& pruned, double acc);
    double evaluate(const ModelSpec& variant, const std::vector<std::size_t>& pruned) override;

private:
    std::map<std::vector<std::size_t>, double> table_;
};

/// Runs `command` once per variant with the variant JSON on standard input
/// and reads {"accuracy": x} from its standard output.
class CommandEvaluator : public AccuracyEvaluator {
public:
    explicit CommandEvaluator(std::string command) : command_(std::move(command)) {}
    double evaluate(const ModelSpec& variant, const std::vector<std::size_t>& pruned) override;

private:
    std::string command_;
};

std::string variant_id(const std::vector<std::size_t>& pruned);

/// Activation indices ordered by descending drop-one accuracy; ties keep the
/// smaller index first.
std::vector<std::size_t> rank_activations(const ModelSpec& spec, AccuracyEvaluator& eval);

struct PruneResult {
    std::string id;
    std::vector<std::size_t> pruned;
    double accuracy = 0.0;
    int levels = 0;
    HeParams params;
};

struct PruneSearch {
    std::vector<std::size_t> ranking;
    std::vector<PruneResult> results;  // i = 0 .. max_prune
    std::size_t best = 0;              // index into results

    nlohmann::json to_json() const;
};

struct PruneOptions {
    int scale_bits = 33;
    int security_bits = 80;
    ParamsPolicy policy;
};

/// Variant i prunes the top-i ranked activations (the initial ranking is
/// kept throughout). The pick maximizes accuracy among the variants with the
/// smallest ring degree; remaining ties go to fewer pruned layers.
PruneSearch search(const ModelSpec& spec, AccuracyEvaluator& eval, std::size_t max_prune,
                   const PruneOptions& opts = {});

}  // namespace hegcn
