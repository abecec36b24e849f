#pragma once

#include "hegcn/adjacency.hpp"

#include <cstddef>
#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <variant>
#include <vector>

namespace hegcn {

struct SpatialConvLayer {
    std::size_t out_channels = 0;
    std::vector<Matrix> weights;  // one C_in x C_out matrix per adjacency partition
    std::vector<double> bias;     // empty: none
    std::optional<BatchNorm> bn;
};

struct TemporalConvLayer {
    std::size_t out_channels = 0;
    std::size_t kernel = 1;  // odd
    std::size_t stride = 1;
    std::vector<double> weights;  // [out][in][tap]
    std::vector<double> bias;     // empty: none
    std::size_t in_channels = 0;

    double tap(std::size_t o, std::size_t c, std::size_t k) const {
        return weights[(o * in_channels + c) * kernel + k];
    }
    /// Per-channel filter (no cross-channel mixing) with the same taps everywhere.
    static TemporalConvLayer depthwise(std::size_t channels, const std::vector<double>& taps,
                                       std::size_t stride = 1);
};

/// a*x^2 + b*x + c; a pruned activation is the identity and costs nothing.
struct ActivationLayer {
    double a = 0.0, b = 1.0, c = 0.0;
    bool pruned = false;
};

struct GlobalAvgPoolLayer {};

struct FullyConnectedLayer {
    std::size_t classes = 0;
    Matrix weights;  // classes x C
    std::vector<double> bias;
};

using LayerOp = std::variant<SpatialConvLayer, TemporalConvLayer, ActivationLayer,
                             GlobalAvgPoolLayer, FullyConnectedLayer>;

struct Layer {
    std::string label;
    LayerOp op;
};

struct InputDims {
    std::size_t batch = 1, channels = 1, frames = 1, joints = 1;
};

/// Feature-map shape flowing between layers.
struct FeatureShape {
    std::size_t channels = 0;
    std::size_t frames = 0;  // valid frames
    std::size_t joints = 0;
    bool pooled = false;
    bool scores = false;
};

struct ModelSpec {
    InputDims input;
    AdjacencySet adjacency;
    std::vector<Layer> layers;

    /// Throws ShapeError when consecutive shapes do not compose.
    std::vector<FeatureShape> shapes() const;
    void validate() const { (void)shapes(); }

    std::size_t activation_count() const;
    /// Layer positions of the activation layers, in pipeline order.
    std::vector<std::size_t> activation_positions() const;
    /// Copy with the listed activations (indices into activation_positions()) pruned.
    ModelSpec with_pruned(const std::vector<std::size_t>& activation_ids) const;
    std::vector<std::size_t> pruned_activations() const;
};

/// Levels consumed by one layer.
int layer_depth(const LayerOp& op);
const char* layer_kind(const LayerOp& op);

/// Seeded random layers; consecutive calls draw from one stream.
class WeightInit {
public:
    explicit WeightInit(std::uint64_t seed) : rng_(seed) {}

    SpatialConvLayer spatial(std::size_t in, std::size_t out, std::size_t partitions, bool bias, bool bn);
    TemporalConvLayer temporal(std::size_t in, std::size_t out, std::size_t kernel, std::size_t stride, bool bias);
    ActivationLayer activation();
    FullyConnectedLayer fc(std::size_t in, std::size_t classes, bool bias);

private:
    double uniform(double scale);
    std::mt19937_64 rng_;
};

struct StgcnConfig {
    InputDims input{1, 3, 16, 25};
    std::vector<std::size_t> widths{64, 128, 128};
    std::vector<std::size_t> strides{1, 2, 1};
    std::size_t kernel = 9;
    std::size_t classes = 60;
    std::uint64_t seed = 1;
    bool with_bias = true;
    bool with_batchnorm = false;
    bool activation_after_spatial = true;
    bool activation_after_temporal = true;
    AdjacencySet adjacency = skeleton_standin();
};

/// Stack of ST-GCN blocks (spatial conv, activation, temporal conv,
/// activation) followed by global average pooling and a classifier, with
/// seeded random weights.
ModelSpec make_stgcn(const StgcnConfig& cfg);

}  // namespace hegcn
