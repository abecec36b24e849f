#include "hegcn/engine.hpp"
#include "hegcn/errors.hpp"

#include <cmath>

namespace hegcn {

namespace {

GraphTensor spatial(const ModelSpec& model, const SpatialConvLayer& l, const GraphTensor& x) {
    const auto adj = model.adjacency.normalized();
    const std::size_t B = x.batch(), C = x.channels(), T = x.frames(), J = x.joints();
    GraphTensor y(B, l.out_channels, T, J);
    for (std::size_t b = 0; b < B; ++b)
        for (std::size_t t = 0; t < T; ++t)
            for (std::size_t p = 0; p < adj.size(); ++p) {
                // X W_p for this frame, then aggregate neighbours with row k of N_p.
                Matrix xw(J, l.out_channels);
                for (std::size_t i = 0; i < J; ++i)
                    for (std::size_t c = 0; c < C; ++c) {
                        const double v = x(b, c, t, i);
                        if (v == 0.0) continue;
                        for (std::size_t o = 0; o < l.out_channels; ++o) xw(i, o) += v * l.weights[p](c, o);
                    }
                for (std::size_t k = 0; k < J; ++k)
                    for (std::size_t i = 0; i < J; ++i) {
                        const double n = adj[p](k, i);
                        if (n == 0.0) continue;
                        for (std::size_t o = 0; o < l.out_channels; ++o) y(b, o, t, k) += n * xw(i, o);
                    }
            }
    for (std::size_t b = 0; b < B; ++b)
        for (std::size_t o = 0; o < l.out_channels; ++o)
            for (std::size_t t = 0; t < T; ++t)
                for (std::size_t k = 0; k < J; ++k) {
                    double v = y(b, o, t, k) + (l.bias.empty() ? 0.0 : l.bias[o]);
                    if (l.bn) {
                        const auto& bn = *l.bn;
                        v = (v - bn.mean[o]) / std::sqrt(bn.var[o] + bn.eps) * bn.gamma[o] + bn.beta[o];
                    }
                    y(b, o, t, k) = v;
                }
    return y;
}

GraphTensor temporal(const TemporalConvLayer& l, const GraphTensor& x) {
    const std::size_t B = x.batch(), C = x.channels(), T = x.frames(), J = x.joints();
    const std::size_t Tout = (T + l.stride - 1) / l.stride;
    const long half = static_cast<long>(l.kernel / 2);
    GraphTensor y(B, l.out_channels, Tout, J);
    for (std::size_t b = 0; b < B; ++b)
        for (std::size_t o = 0; o < l.out_channels; ++o)
            for (std::size_t u = 0; u < Tout; ++u)
                for (std::size_t j = 0; j < J; ++j) {
                    double acc = l.bias.empty() ? 0.0 : l.bias[o];
                    for (std::size_t c = 0; c < C; ++c)
                        for (std::size_t k = 0; k < l.kernel; ++k) {
                            const long t = static_cast<long>(u * l.stride) + static_cast<long>(k) - half;
                            if (t < 0 || t >= static_cast<long>(T)) continue;
                            acc += l.tap(o, c, k) * x(b, c, static_cast<std::size_t>(t), j);
                        }
                    y(b, o, u, j) = acc;
                }
    return y;
}

GraphTensor pool(const GraphTensor& x) {
    GraphTensor y(x.batch(), x.channels(), 1, 1);
    const double n = static_cast<double>(x.frames() * x.joints());
    for (std::size_t b = 0; b < x.batch(); ++b)
        for (std::size_t c = 0; c < x.channels(); ++c) {
            double s = 0.0;
            for (std::size_t t = 0; t < x.frames(); ++t)
                for (std::size_t j = 0; j < x.joints(); ++j) s += x(b, c, t, j);
            y(b, c, 0, 0) = s / n;
        }
    return y;
}

}  // namespace

GraphTensor plaintext_features(const ModelSpec& model, const GraphTensor& x, std::size_t stop) {
    model.validate();
    GraphTensor h = x;
    for (std::size_t i = 0; i < stop && i < model.layers.size(); ++i) {
        const auto& op = model.layers[i].op;
        if (const auto* s = std::get_if<SpatialConvLayer>(&op)) {
            h = spatial(model, *s, h);
        } else if (const auto* t = std::get_if<TemporalConvLayer>(&op)) {
            h = temporal(*t, h);
        } else if (const auto* a = std::get_if<ActivationLayer>(&op)) {
            if (a->pruned) continue;
            for (auto& v : h.data()) v = a->a * v * v + a->b * v + a->c;
        } else if (std::holds_alternative<GlobalAvgPoolLayer>(op)) {
            h = pool(h);
        } else {
            throw ShapeError("plaintext_features: classifier reached");
        }
    }
    return h;
}

Matrix plaintext_reference(const ModelSpec& model, const GraphTensor& x) {
    if (model.layers.empty() || !std::holds_alternative<FullyConnectedLayer>(model.layers.back().op))
        throw ShapeError("model must end with a fully-connected layer");
    const GraphTensor h = plaintext_features(model, x, model.layers.size() - 1);
    const auto& fc = std::get<FullyConnectedLayer>(model.layers.back().op);
    Matrix s(h.batch(), fc.classes);
    for (std::size_t b = 0; b < h.batch(); ++b)
        for (std::size_t k = 0; k < fc.classes; ++k) {
            double acc = fc.bias.empty() ? 0.0 : fc.bias[k];
            for (std::size_t c = 0; c < h.channels(); ++c) acc += fc.weights(k, c) * h(b, c, 0, 0);
            s(b, k) = acc;
        }
    return s;
}

}  // namespace hegcn
