#include "hegcn/model.hpp"

#include "hegcn/errors.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace hegcn {

TemporalConvLayer TemporalConvLayer::depthwise(std::size_t channels, const std::vector<double>& taps,
                                               std::size_t stride) {
    TemporalConvLayer t;
    t.in_channels = channels;
    t.out_channels = channels;
    t.kernel = taps.size();
    t.stride = stride;
    t.weights.assign(channels * channels * t.kernel, 0.0);
    for (std::size_t c = 0; c < channels; ++c)
        for (std::size_t k = 0; k < t.kernel; ++k) t.weights[(c * channels + c) * t.kernel + k] = taps[k];
    return t;
}

int layer_depth(const LayerOp& op) {
    return std::visit(
        [](const auto& l) -> int {
            using T = std::decay_t<decltype(l)>;
            if constexpr (std::is_same_v<T, ActivationLayer>) return l.pruned ? 0 : 2;
            else return 1;
        },
        op);
}

const char* layer_kind(const LayerOp& op) {
    switch (op.index()) {
        case 0: return "spatial_conv";
        case 1: return "temporal_conv";
        case 2: return "activation";
        case 3: return "global_avg_pool";
        default: return "fully_connected";
    }
}

namespace {

std::string where(const Layer& l) { return "layer '" + l.label + "': "; }

}  // namespace

std::vector<FeatureShape> ModelSpec::shapes() const {
    if (input.batch == 0 || input.channels == 0 || input.frames == 0 || input.joints == 0)
        throw ShapeError("model input dimensions must be positive");
    if (adjacency.joints != input.joints)
        throw ShapeError("adjacency has " + std::to_string(adjacency.joints) + " joints, input has " +
                         std::to_string(input.joints));
    std::vector<FeatureShape> out;
    FeatureShape s{input.channels, input.frames, input.joints, false, false};
    out.push_back(s);
    for (const auto& layer : layers) {
        if (s.scores) throw ShapeError(where(layer) + "nothing may follow the classifier");
        std::visit(
            [&](const auto& l) {
                using T = std::decay_t<decltype(l)>;
                if constexpr (std::is_same_v<T, SpatialConvLayer>) {
                    if (s.pooled) throw ShapeError(where(layer) + "spatial conv after pooling");
                    if (l.weights.size() != adjacency.partitions.size())
                        throw ShapeError(where(layer) + "one weight matrix per partition expected");
                    for (const auto& w : l.weights)
                        if (w.rows() != s.channels || w.cols() != l.out_channels)
                            throw ShapeError(where(layer) + "weight shape mismatch");
                    if (!l.bias.empty() && l.bias.size() != l.out_channels)
                        throw ShapeError(where(layer) + "bias length mismatch");
                    if (l.bn && (l.bn->gamma.size() != l.out_channels || l.bn->beta.size() != l.out_channels ||
                                 l.bn->mean.size() != l.out_channels || l.bn->var.size() != l.out_channels))
                        throw ShapeError(where(layer) + "batch-norm length mismatch");
                    s.channels = l.out_channels;
                } else if constexpr (std::is_same_v<T, TemporalConvLayer>) {
                    if (s.pooled) throw ShapeError(where(layer) + "temporal conv after pooling");
                    if (l.kernel % 2 == 0) throw ShapeError(where(layer) + "kernel size must be odd");
                    if (l.kernel > s.frames) throw ShapeError(where(layer) + "kernel longer than the sequence");
                    if (l.stride == 0) throw ShapeError(where(layer) + "stride must be positive");
                    if (l.in_channels != s.channels) throw ShapeError(where(layer) + "input channel mismatch");
                    if (l.weights.size() != l.out_channels * l.in_channels * l.kernel)
                        throw ShapeError(where(layer) + "weight count mismatch");
                    if (!l.bias.empty() && l.bias.size() != l.out_channels)
                        throw ShapeError(where(layer) + "bias length mismatch");
                    s.channels = l.out_channels;
                    s.frames = (s.frames + l.stride - 1) / l.stride;
                } else if constexpr (std::is_same_v<T, ActivationLayer>) {
                    if (!std::isfinite(l.a) || !std::isfinite(l.b) || !std::isfinite(l.c))
                        throw ShapeError(where(layer) + "non-finite coefficient");
                } else if constexpr (std::is_same_v<T, GlobalAvgPoolLayer>) {
                    if (s.pooled) throw ShapeError(where(layer) + "already pooled");
                    s.pooled = true;
                    s.frames = 1;
                    s.joints = 1;
                } else {
                    if (!s.pooled) throw ShapeError(where(layer) + "classifier needs pooled input");
                    if (l.weights.rows() != l.classes || l.weights.cols() != s.channels)
                        throw ShapeError(where(layer) + "weight shape mismatch");
                    if (!l.bias.empty() && l.bias.size() != l.classes)
                        throw ShapeError(where(layer) + "bias length mismatch");
                    s.channels = l.classes;
                    s.scores = true;
                }
            },
            layer.op);
        out.push_back(s);
    }
    return out;
}

std::size_t ModelSpec::activation_count() const { return activation_positions().size(); }

std::vector<std::size_t> ModelSpec::activation_positions() const {
    std::vector<std::size_t> pos;
    for (std::size_t i = 0; i < layers.size(); ++i)
        if (std::holds_alternative<ActivationLayer>(layers[i].op)) pos.push_back(i);
    return pos;
}

ModelSpec ModelSpec::with_pruned(const std::vector<std::size_t>& activation_ids) const {
    ModelSpec m = *this;
    auto pos = activation_positions();
    for (auto id : activation_ids) {
        if (id >= pos.size())
            throw ConfigError("activation index " + std::to_string(id) + " out of range (" +
                              std::to_string(pos.size()) + " activations)");
        std::get<ActivationLayer>(m.layers[pos[id]].op).pruned = true;
    }
    return m;
}

std::vector<std::size_t> ModelSpec::pruned_activations() const {
    std::vector<std::size_t> ids;
    auto pos = activation_positions();
    for (std::size_t i = 0; i < pos.size(); ++i)
        if (std::get<ActivationLayer>(layers[pos[i]].op).pruned) ids.push_back(i);
    return ids;
}

double WeightInit::uniform(double scale) { return std::uniform_real_distribution<double>(-scale, scale)(rng_); }

SpatialConvLayer WeightInit::spatial(std::size_t in, std::size_t out, std::size_t partitions, bool bias, bool bn) {
    SpatialConvLayer s;
    s.out_channels = out;
    const double ws = 1.0 / std::sqrt(static_cast<double>(in * partitions));
    for (std::size_t p = 0; p < partitions; ++p) {
        Matrix w(in, out);
        for (std::size_t i = 0; i < in; ++i)
            for (std::size_t k = 0; k < out; ++k) w(i, k) = uniform(ws);
        s.weights.push_back(std::move(w));
    }
    if (bias)
        for (std::size_t k = 0; k < out; ++k) s.bias.push_back(uniform(0.1));
    if (bn) {
        BatchNorm b;
        for (std::size_t k = 0; k < out; ++k) {
            b.gamma.push_back(1.0 + uniform(0.2));
            b.beta.push_back(uniform(0.1));
            b.mean.push_back(uniform(0.1));
            b.var.push_back(1.0 + uniform(0.5));
        }
        s.bn = std::move(b);
    }
    return s;
}

TemporalConvLayer WeightInit::temporal(std::size_t in, std::size_t out, std::size_t kernel, std::size_t stride,
                                       bool bias) {
    TemporalConvLayer t;
    t.in_channels = in;
    t.out_channels = out;
    t.kernel = kernel;
    t.stride = stride;
    const double wt = 1.0 / std::sqrt(static_cast<double>(in * kernel));
    t.weights.resize(out * in * kernel);
    for (auto& w : t.weights) w = uniform(wt);
    if (bias)
        for (std::size_t k = 0; k < out; ++k) t.bias.push_back(uniform(0.1));
    return t;
}

ActivationLayer WeightInit::activation() {
    ActivationLayer a;
    a.a = 0.1 + uniform(0.05);
    a.b = 1.0 + uniform(0.2);
    a.c = uniform(0.05);
    return a;
}

FullyConnectedLayer WeightInit::fc(std::size_t in, std::size_t classes, bool bias) {
    FullyConnectedLayer f;
    f.classes = classes;
    f.weights = Matrix(classes, in);
    const double wf = 1.0 / std::sqrt(static_cast<double>(in));
    for (std::size_t s = 0; s < classes; ++s)
        for (std::size_t k = 0; k < in; ++k) f.weights(s, k) = uniform(wf);
    if (bias)
        for (std::size_t s = 0; s < classes; ++s) f.bias.push_back(uniform(0.1));
    return f;
}

ModelSpec make_stgcn(const StgcnConfig& cfg) {
    if (cfg.widths.size() != cfg.strides.size())
        throw ConfigError("widths and strides must have the same length");
    ModelSpec m;
    m.input = cfg.input;
    m.adjacency = cfg.adjacency;
    WeightInit init(cfg.seed);
    const std::size_t parts = cfg.adjacency.partitions.size();
    std::size_t c = cfg.input.channels;
    for (std::size_t blk = 0; blk < cfg.widths.size(); ++blk) {
        const std::size_t o = cfg.widths[blk];
        const std::string prefix = "stgcn" + std::to_string(blk + 1) + ".";
        m.layers.push_back({prefix + "gcn", init.spatial(c, o, parts, cfg.with_bias, cfg.with_batchnorm)});
        if (cfg.activation_after_spatial) m.layers.push_back({prefix + "act1", init.activation()});
        m.layers.push_back({prefix + "tcn", init.temporal(o, o, cfg.kernel, cfg.strides[blk], cfg.with_bias)});
        if (cfg.activation_after_temporal) m.layers.push_back({prefix + "act2", init.activation()});
        c = o;
    }
    m.layers.push_back({"gap", GlobalAvgPoolLayer{}});
    m.layers.push_back({"fc", init.fc(c, cfg.classes, cfg.with_bias)});
    m.validate();
    return m;
}

}  // namespace hegcn
