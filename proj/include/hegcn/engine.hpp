#pragma once

// Encrypted ST-GCN inference on the simulator. Every layer works on either
// packing; the operation schedules follow the HOC closed forms in costmodel.

#include "hegcn/adjacency.hpp"
#include "hegcn/he_sim.hpp"
#include "hegcn/model.hpp"
#include "hegcn/packing.hpp"
#include "hegcn/tensor.hpp"

#include <cstddef>
#include <string>
#include <vector>

namespace hegcn {

struct EncryptedFeatureMap {
    std::vector<SimCiphertext> cts;
    PackingLayout layout;

    int level() const { return cts.empty() ? 0 : cts.front().level; }
};

/// Classifier output. AMA: one ciphertext per class, score (b, s) at slot
/// b * frames. RowMajor: one ciphertext per (b, s), score at slot 0.
struct EncryptedScores {
    std::vector<SimCiphertext> cts;
    PackingLayout layout;
    std::size_t classes = 0;

    Matrix decrypt() const;  // batch x classes
    int level() const { return cts.empty() ? 0 : cts.front().level; }
};

EncryptedFeatureMap encrypt_input(Evaluator& ev, const GraphTensor& x, PackingKind kind);
GraphTensor decrypt_features(const EncryptedFeatureMap& fm);

/// Union of the valid elements over all channel pairs.
Matrix spatial_pattern(const MergedSpatialMatrix& m);

// Layer kernels. `threads` > 1 splits independent work over forked evaluators;
// the counts and the op log do not depend on it.

EncryptedFeatureMap ama_spatial(Evaluator& ev, const EncryptedFeatureMap& in,
                                const MergedSpatialMatrix& m,
                                const std::vector<PatternedSparseMatrix>& parts, unsigned threads = 1);
EncryptedFeatureMap rowmajor_spatial(Evaluator& ev, const EncryptedFeatureMap& in,
                                     const MergedSpatialMatrix& m, const std::vector<long>& diagonals,
                                     unsigned threads = 1);
/// Dispatches on the layout; decomposition or diagonals come from spatial_pattern(m).
EncryptedFeatureMap spatial_conv(Evaluator& ev, const EncryptedFeatureMap& in,
                                 const MergedSpatialMatrix& m, unsigned threads = 1);

EncryptedFeatureMap temporal_conv(Evaluator& ev, const EncryptedFeatureMap& in,
                                  const TemporalConvLayer& layer, unsigned threads = 1);
EncryptedFeatureMap poly_activation(Evaluator& ev, const EncryptedFeatureMap& in,
                                    const ActivationLayer& act, unsigned threads = 1);
EncryptedFeatureMap global_avg_pool(Evaluator& ev, const EncryptedFeatureMap& in, unsigned threads = 1);
EncryptedScores fully_connected(Evaluator& ev, const EncryptedFeatureMap& in,
                                const FullyConnectedLayer& layer, unsigned threads = 1);

struct LevelStep {
    std::string layer;
    int level_before = 0;
    int level_after = 0;
};

struct RunOptions {
    unsigned threads = 1;
    bool keep_log = false;
};

struct RunResult {
    Matrix scores;  // batch x classes
    PackingKind kind = PackingKind::Ama;
    HocCounter hoc;
    std::vector<LevelStep> levels;
    std::vector<OpRecord> log;
    int start_level = 0;
    int final_level = 0;

    int levels_consumed() const { return start_level - final_level; }
};

/// Levels a model needs at encryption time: its multiplicative depth plus the
/// base level that is never consumed (0 for an empty model).
int multiplicative_depth(const ModelSpec& model);
int required_levels(const ModelSpec& model);

/// Runs the whole model. Throws DepthBudgetError naming the first layer that
/// would run out of levels before any operation is evaluated.
RunResult run_model(const ModelSpec& model, const GraphTensor& x, PackingKind kind, const SimContext& ctx,
                    const RunOptions& opts = {});

/// Plain double-precision forward pass, computed straight from the per
/// partition normalized adjacencies and 1x1 weights (not from merged matrices).
Matrix plaintext_reference(const ModelSpec& model, const GraphTensor& x);

/// Plain forward pass of the feature extractor up to (excluding) layer `stop`.
GraphTensor plaintext_features(const ModelSpec& model, const GraphTensor& x, std::size_t stop);

/// Merged matrices for every spatial layer, keyed by layer position.
MergedSpatialMatrix merged_for(const ModelSpec& model, std::size_t layer_index);

}  // namespace hegcn
