#include "hegcn/engine.hpp"

#include "hegcn/errors.hpp"

#include <algorithm>
#include <bit>
#include <exception>
#include <optional>
#include <thread>

namespace hegcn {

namespace {

// Runs fn(i, evaluator) for i in [0, n). Work is split into contiguous chunks,
// each on a forked evaluator; the forks are absorbed in chunk order so counts
// and the op log come out as in a serial run.
template <class Fn>
void parallel_for(Evaluator& ev, std::size_t n, unsigned threads, Fn&& fn) {
    if (threads <= 1 || n <= 1) {
        for (std::size_t i = 0; i < n; ++i) fn(i, ev);
        return;
    }
    const std::size_t workers = std::min<std::size_t>(threads, n);
    std::vector<Evaluator> forks;
    forks.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) forks.push_back(ev.fork());
    std::vector<std::exception_ptr> errors(workers);
    {
        std::vector<std::jthread> pool;
        for (std::size_t w = 0; w < workers; ++w)
            pool.emplace_back([&, w] {
                try {
                    for (std::size_t i = n * w / workers; i < n * (w + 1) / workers; ++i) fn(i, forks[w]);
                } catch (...) {
                    errors[w] = std::current_exception();
                }
            });
    }
    for (auto& e : errors)
        if (e) std::rethrow_exception(e);
    for (auto& f : forks) ev.absorb(std::move(f));
}

void accumulate(Evaluator& ev, std::optional<SimCiphertext>& acc, SimCiphertext term) {
    if (acc) ev.add_inplace(*acc, term);
    else acc = std::move(term);
}

SimCiphertext trivial_zero(std::size_t slots, int level) {
    SimCiphertext ct;
    ct.slots.assign(slots, 0.0);
    ct.level = level;
    return ct;
}

void require_level(const EncryptedFeatureMap& in, int needed, const char* what) {
    if (in.cts.empty()) throw ShapeError(std::string(what) + ": empty feature map");
    if (in.level() < needed)
        throw LevelError(std::string(what) + ": level " + std::to_string(in.level()) + " < " +
                         std::to_string(needed));
}

// In-block offsets of the occupied (b, t) positions.
std::vector<std::size_t> ama_offsets(const PackingLayout& l) {
    std::vector<std::size_t> offs;
    const std::size_t frames = l.pooled ? 1 : l.valid_frames;
    for (std::size_t b = 0; b < l.batch; ++b)
        for (std::size_t t = 0; t < frames; ++t) offs.push_back(l.block_offset(b, t));
    return offs;
}

// Slot mask of the occupied positions of an AMA ciphertext in `group`, scaled per channel.
template <class ValueOf>
std::vector<double> ama_channel_plain(const PackingLayout& l, std::size_t group,
                                      const std::vector<std::size_t>& offs, ValueOf value_of) {
    std::vector<double> pt(l.slot_count, 0.0);
    for (std::size_t blk = 0; blk < l.blocks(); ++blk) {
        const auto c = l.ama_channel(group, blk);
        if (!c) continue;
        const double v = value_of(*c);
        for (auto off : offs) pt[blk * l.pad + off] = v;
    }
    return pt;
}

std::vector<double> rm_valid_plain(const PackingLayout& l, double v) {
    std::vector<double> pt(l.slot_count, 0.0);
    const std::size_t frames = l.pooled ? 1 : l.valid_frames;
    const std::size_t joints = l.pooled ? 1 : l.joints;
    for (std::size_t t = 0; t < frames; ++t)
        for (std::size_t j = 0; j < joints; ++j) pt[l.rm_slot(t, j)] = v;
    return pt;
}

void check_unpooled(const EncryptedFeatureMap& in, const char* what) {
    if (in.layout.pooled) throw ShapeError(std::string(what) + ": feature map is already pooled");
    if (in.cts.size() != in.layout.ciphertext_count())
        throw ShapeError(std::string(what) + ": ciphertext count does not match the layout");
}

}  // namespace

Matrix EncryptedScores::decrypt() const {
    Matrix s(layout.batch, classes);
    for (std::size_t b = 0; b < layout.batch; ++b)
        for (std::size_t k = 0; k < classes; ++k)
            s(b, k) = layout.kind == PackingKind::Ama ? cts[k].slots[b * layout.frames]
                                                      : cts[b * classes + k].slots[0];
    return s;
}

EncryptedFeatureMap encrypt_input(Evaluator& ev, const GraphTensor& x, PackingKind kind) {
    auto packed = pack(x, kind, ev.context());
    return {std::move(packed.cts), packed.layout};
}

GraphTensor decrypt_features(const EncryptedFeatureMap& fm) { return unpack(fm.cts, fm.layout); }

Matrix spatial_pattern(const MergedSpatialMatrix& m) {
    Matrix p(m.joints, m.joints);
    for (const auto& blk : m.blocks)
        for (std::size_t i = 0; i < m.joints; ++i)
            for (std::size_t k = 0; k < m.joints; ++k)
                if (std::abs(blk(i, k)) > kZeroThreshold) p(i, k) = 1.0;
    return p;
}

EncryptedFeatureMap ama_spatial(Evaluator& ev, const EncryptedFeatureMap& in, const MergedSpatialMatrix& m,
                                const std::vector<PatternedSparseMatrix>& parts, unsigned threads) {
    const auto& li = in.layout;
    if (li.kind != PackingKind::Ama) throw ShapeError("ama_spatial: feature map is not AMA-packed");
    check_unpooled(in, "ama_spatial");
    if (m.in_channels != li.channels || m.joints != li.joints)
        throw ShapeError("ama_spatial: merged matrix does not match the layout");
    for (const auto& p : parts)
        if (p.size() != li.joints) throw ShapeError("ama_spatial: decomposition size mismatch");
    require_level(in, 1, "ama_spatial");

    const PackingLayout lo = li.with_channels(m.out_channels);
    const std::size_t blocks = li.blocks();
    const std::size_t ring = li.channel_ring;
    const auto offs = ama_offsets(li);

    EncryptedFeatureMap out{std::vector<SimCiphertext>(lo.ciphertext_count()), lo};
    const std::size_t go = lo.cts_per_joint, gi = li.cts_per_joint;
    parallel_for(ev, li.joints * go, threads, [&](std::size_t idx, Evaluator& e) {
        const std::size_t k = idx / go, g = idx % go;
        std::optional<SimCiphertext> acc;
        // Diagonal r pairs input block b with output block b - r; the partial
        // sums are then rotated by r blocks into place.
        for (std::size_t r = 0; r < ring; ++r) {
            std::optional<SimCiphertext> s;
            for (const auto& part : parts) {
                const auto& col = part.column(k);
                if (!col) continue;
                const std::size_t i = col->first;
                for (std::size_t q = 0; q < gi; ++q) {
                    std::vector<double> pt(li.slot_count, 0.0);
                    for (std::size_t blk = 0; blk < blocks; ++blk) {
                        const auto c = li.ama_channel(q, blk);
                        if (!c) continue;
                        const auto o = lo.ama_channel(g, (blk + blocks - r) % blocks);
                        if (!o) continue;
                        const double v = m.at(*c, *o)(i, k);
                        if (v == 0.0) continue;
                        for (auto off : offs) pt[blk * li.pad + off] = v;
                    }
                    accumulate(e, s, e.pmult(in.cts[li.ama_ct(i, q)], pt));
                }
            }
            if (!s) continue;
            if (r > 0) s = e.rotate(*s, static_cast<long>(r * li.pad));
            accumulate(e, acc, std::move(*s));
        }
        if (!acc) acc = trivial_zero(li.slot_count, in.level() - 1);
        if (m.has_bias())
            *acc = e.add_plain(*acc, ama_channel_plain(lo, g, offs, [&](std::size_t o) { return m.bias[o]; }));
        out.cts[lo.ama_ct(k, g)] = std::move(*acc);
    });
    return out;
}

EncryptedFeatureMap rowmajor_spatial(Evaluator& ev, const EncryptedFeatureMap& in, const MergedSpatialMatrix& m,
                                     const std::vector<long>& diagonals, unsigned threads) {
    const auto& li = in.layout;
    if (li.kind != PackingKind::RowMajor) throw ShapeError("rowmajor_spatial: feature map is not row-major");
    check_unpooled(in, "rowmajor_spatial");
    if (m.in_channels != li.channels || m.joints != li.joints)
        throw ShapeError("rowmajor_spatial: merged matrix does not match the layout");
    require_level(in, 1, "rowmajor_spatial");

    const PackingLayout lo = li.with_channels(m.out_channels);
    const long J = static_cast<long>(li.joints);
    EncryptedFeatureMap out{std::vector<SimCiphertext>(lo.ciphertext_count()), lo};
    std::vector<std::optional<SimCiphertext>> acc(m.out_channels);

    for (std::size_t b = 0; b < li.batch; ++b) {
        std::fill(acc.begin(), acc.end(), std::nullopt);
        for (std::size_t c = 0; c < li.channels; ++c) {
            const auto& ct = in.cts[li.rm_ct(b, c)];
            std::vector<SimCiphertext> rotated;
            rotated.reserve(diagonals.size());
            for (long d : diagonals) rotated.push_back(d == 0 ? ct : ev.rotate(ct, d));
            parallel_for(ev, m.out_channels, threads, [&](std::size_t o, Evaluator& e) {
                const Matrix& M = m.at(c, o);
                for (std::size_t di = 0; di < diagonals.size(); ++di) {
                    const long d = diagonals[di];
                    // Slot (t, k) of the rotated copy holds joint k + d of frame t.
                    std::vector<double> pt(li.slot_count, 0.0);
                    for (long k = std::max(0L, -d); k < std::min(J, J - d); ++k) {
                        const double v = M(static_cast<std::size_t>(k + d), static_cast<std::size_t>(k));
                        if (v == 0.0) continue;
                        for (std::size_t t = 0; t < li.valid_frames; ++t)
                            pt[li.rm_slot(t, static_cast<std::size_t>(k))] = v;
                    }
                    accumulate(e, acc[o], e.pmult(rotated[di], pt));
                }
            });
        }
        for (std::size_t o = 0; o < m.out_channels; ++o) {
            if (!acc[o]) acc[o] = trivial_zero(li.slot_count, in.level() - 1);
            if (m.has_bias()) acc[o] = ev.add_plain(*acc[o], rm_valid_plain(lo, m.bias[o]));
            out.cts[lo.rm_ct(b, o)] = std::move(*acc[o]);
        }
    }
    return out;
}

EncryptedFeatureMap spatial_conv(Evaluator& ev, const EncryptedFeatureMap& in, const MergedSpatialMatrix& m,
                                 unsigned threads) {
    const Matrix pattern = spatial_pattern(m);
    if (in.layout.kind == PackingKind::Ama) return ama_spatial(ev, in, m, decompose(pattern), threads);
    return rowmajor_spatial(ev, in, m, nonzero_diagonals(pattern), threads);
}

EncryptedFeatureMap temporal_conv(Evaluator& ev, const EncryptedFeatureMap& in, const TemporalConvLayer& layer,
                                  unsigned threads) {
    const auto& li = in.layout;
    check_unpooled(in, "temporal_conv");
    if (layer.kernel % 2 == 0) throw ShapeError("temporal_conv: kernel size must be odd");
    if (layer.kernel > li.valid_frames) throw ShapeError("temporal_conv: kernel longer than the sequence");
    if (layer.stride == 0) throw ShapeError("temporal_conv: stride must be positive");
    if (layer.in_channels != li.channels) throw ShapeError("temporal_conv: input channel mismatch");
    require_level(in, 1, "temporal_conv");

    PackingLayout lo = li.with_channels(layer.out_channels);
    lo.time_stride = li.time_stride * layer.stride;
    lo.valid_frames = (li.valid_frames + layer.stride - 1) / layer.stride;

    const long half = static_cast<long>(layer.kernel / 2);
    const long tin_valid = static_cast<long>(li.valid_frames);
    // Output frame u reads input frame u * stride + delta.
    auto source_ok = [&](std::size_t u, long delta) {
        const long t = static_cast<long>(u * layer.stride) + delta;
        return t >= 0 && t < tin_valid;
    };
    EncryptedFeatureMap out{std::vector<SimCiphertext>(lo.ciphertext_count()), lo};

    if (li.kind == PackingKind::Ama) {
        const std::size_t blocks = li.blocks(), ring = li.channel_ring;
        const std::size_t gi = li.cts_per_joint, go = lo.cts_per_joint;
        const auto offs_out = ama_offsets(lo);
        parallel_for(ev, li.joints, threads, [&](std::size_t j, Evaluator& e) {
            // Baby steps: K - 1 shifted copies per input ciphertext, shared by all outputs.
            std::vector<std::vector<SimCiphertext>> shifted(gi);
            for (std::size_t q = 0; q < gi; ++q)
                for (long delta = -half; delta <= half; ++delta) {
                    const auto& ct = in.cts[li.ama_ct(j, q)];
                    shifted[q].push_back(delta == 0 ? ct : e.rotate(ct, delta * static_cast<long>(li.time_stride)));
                }
            for (std::size_t g = 0; g < go; ++g) {
                std::optional<SimCiphertext> acc;
                for (std::size_t r = 0; r < ring; ++r) {
                    std::optional<SimCiphertext> s;
                    for (std::size_t q = 0; q < gi; ++q)
                        for (long delta = -half; delta <= half; ++delta) {
                            const std::size_t tap = static_cast<std::size_t>(delta + half);
                            std::vector<double> pt(li.slot_count, 0.0);
                            for (std::size_t blk = 0; blk < blocks; ++blk) {
                                const auto c = li.ama_channel(q, blk);
                                if (!c) continue;
                                const auto o = lo.ama_channel(g, (blk + blocks - r) % blocks);
                                if (!o) continue;
                                const double w = layer.tap(*o, *c, tap);
                                if (w == 0.0) continue;
                                for (std::size_t b = 0; b < lo.batch; ++b)
                                    for (std::size_t u = 0; u < lo.valid_frames; ++u)
                                        if (source_ok(u, delta)) pt[blk * li.pad + lo.block_offset(b, u)] = w;
                            }
                            accumulate(e, s, e.pmult(shifted[q][tap], pt));
                        }
                    if (r > 0) s = e.rotate(*s, static_cast<long>(r * li.pad));
                    accumulate(e, acc, std::move(*s));
                }
                if (!layer.bias.empty())
                    *acc = e.add_plain(*acc, ama_channel_plain(lo, g, offs_out,
                                                               [&](std::size_t o) { return layer.bias[o]; }));
                out.cts[lo.ama_ct(j, g)] = std::move(*acc);
            }
        });
        return out;
    }

    std::vector<std::optional<SimCiphertext>> acc(layer.out_channels);
    const long row = static_cast<long>(li.time_stride * li.joints);
    for (std::size_t b = 0; b < li.batch; ++b) {
        std::fill(acc.begin(), acc.end(), std::nullopt);
        for (std::size_t c = 0; c < li.channels; ++c) {
            const auto& ct = in.cts[li.rm_ct(b, c)];
            std::vector<SimCiphertext> shifted;
            for (long delta = -half; delta <= half; ++delta)
                shifted.push_back(delta == 0 ? ct : ev.rotate(ct, delta * row));
            parallel_for(ev, layer.out_channels, threads, [&](std::size_t o, Evaluator& e) {
                for (long delta = -half; delta <= half; ++delta) {
                    const std::size_t tap = static_cast<std::size_t>(delta + half);
                    std::vector<double> pt(li.slot_count, 0.0);
                    const double w = layer.tap(o, c, tap);
                    if (w != 0.0)
                        for (std::size_t u = 0; u < lo.valid_frames; ++u)
                            if (source_ok(u, delta))
                                for (std::size_t jj = 0; jj < lo.joints; ++jj) pt[lo.rm_slot(u, jj)] = w;
                    accumulate(e, acc[o], e.pmult(shifted[tap], pt));
                }
            });
        }
        for (std::size_t o = 0; o < layer.out_channels; ++o) {
            if (!layer.bias.empty()) acc[o] = ev.add_plain(*acc[o], rm_valid_plain(lo, layer.bias[o]));
            out.cts[lo.rm_ct(b, o)] = std::move(*acc[o]);
        }
    }
    return out;
}

EncryptedFeatureMap poly_activation(Evaluator& ev, const EncryptedFeatureMap& in, const ActivationLayer& act,
                                    unsigned threads) {
    if (act.pruned) return in;
    require_level(in, 2, "poly_activation");
    const auto& l = in.layout;
    // The constant term only lands on occupied slots so unused slots stay zero.
    std::vector<std::vector<double>> constant;
    if (l.kind == PackingKind::Ama) {
        const auto offs = ama_offsets(l);
        for (std::size_t g = 0; g < l.cts_per_joint; ++g)
            constant.push_back(ama_channel_plain(l, g, offs, [&](std::size_t) { return act.c; }));
    } else {
        constant.push_back(rm_valid_plain(l, act.c));
    }
    EncryptedFeatureMap out{std::vector<SimCiphertext>(in.cts.size()), l};
    parallel_for(ev, in.cts.size(), threads, [&](std::size_t i, Evaluator& e) {
        const auto& x = in.cts[i];
        const auto sq = e.cmult(x, x);
        const auto quad = e.pmult(sq, act.a);
        const auto lin = e.mod_switch(e.pmult(x, act.b), quad.level);
        const auto& cpt = l.kind == PackingKind::Ama ? constant[i % l.cts_per_joint] : constant[0];
        out.cts[i] = e.add_plain(e.add(quad, lin), cpt);
    });
    return out;
}

EncryptedFeatureMap global_avg_pool(Evaluator& ev, const EncryptedFeatureMap& in, unsigned threads) {
    const auto& li = in.layout;
    check_unpooled(in, "global_avg_pool");
    require_level(in, 1, "global_avg_pool");
    PackingLayout lo = li;
    lo.pooled = true;
    const double scale = 1.0 / static_cast<double>(li.valid_frames * li.joints);

    if (li.kind == PackingKind::Ama) {
        if (!std::has_single_bit(li.valid_frames))
            throw ShapeError("global_avg_pool: frame count " + std::to_string(li.valid_frames) +
                             " is not a power of two");
        const auto offs = ama_offsets(lo);
        EncryptedFeatureMap out{std::vector<SimCiphertext>(lo.ciphertext_count()), lo};
        parallel_for(ev, li.cts_per_joint, threads, [&](std::size_t g, Evaluator& e) {
            SimCiphertext acc = in.cts[li.ama_ct(0, g)];
            for (std::size_t j = 1; j < li.joints; ++j) e.add_inplace(acc, in.cts[li.ama_ct(j, g)]);
            for (std::size_t step = 1; step < li.valid_frames; step *= 2)
                e.add_inplace(acc, e.rotate(acc, static_cast<long>(step * li.time_stride)));
            out.cts[g] = e.pmult(acc, ama_channel_plain(lo, g, offs, [&](std::size_t) { return scale; }));
        });
        return out;
    }

    std::vector<double> mask(li.slot_count, 0.0);
    mask[0] = scale;
    EncryptedFeatureMap out{std::vector<SimCiphertext>(in.cts.size()), lo};
    parallel_for(ev, in.cts.size(), threads, [&](std::size_t i, Evaluator& e) {
        SimCiphertext acc = in.cts[i];
        for (std::size_t step = 1; step < li.slot_count; step *= 2)
            e.add_inplace(acc, e.rotate(acc, static_cast<long>(step)));
        out.cts[i] = e.pmult(acc, mask);
    });
    return out;
}

EncryptedScores fully_connected(Evaluator& ev, const EncryptedFeatureMap& in, const FullyConnectedLayer& layer,
                                unsigned threads) {
    const auto& l = in.layout;
    if (!l.pooled) throw ShapeError("fully_connected: feature map is not pooled");
    if (layer.weights.rows() != layer.classes || layer.weights.cols() != l.channels)
        throw ShapeError("fully_connected: weight shape does not match " + std::to_string(l.channels) +
                         " channels");
    if (!layer.bias.empty() && layer.bias.size() != layer.classes)
        throw ShapeError("fully_connected: bias length mismatch");
    require_level(in, 1, "fully_connected");

    EncryptedScores out;
    out.layout = l;
    out.classes = layer.classes;

    if (l.kind == PackingKind::Ama) {
        const auto offs = ama_offsets(l);
        out.cts.resize(layer.classes);
        parallel_for(ev, layer.classes, threads, [&](std::size_t s, Evaluator& e) {
            std::optional<SimCiphertext> acc;
            for (std::size_t g = 0; g < l.cts_per_joint; ++g)
                accumulate(e, acc,
                           e.pmult(in.cts[g], ama_channel_plain(l, g, offs, [&](std::size_t c) {
                                       return layer.weights(s, c);
                                   })));
            // Fold the channel ring; every block ends up holding the full sum.
            for (std::size_t step = 1; step < l.channel_ring; step *= 2)
                e.add_inplace(*acc, e.rotate(*acc, static_cast<long>(step * l.pad)));
            if (!layer.bias.empty()) {
                std::vector<double> pt(l.slot_count, 0.0);
                for (std::size_t blk = 0; blk < l.blocks(); ++blk)
                    for (auto off : offs) pt[blk * l.pad + off] = layer.bias[s];
                *acc = e.add_plain(*acc, pt);
            }
            out.cts[s] = std::move(*acc);
        });
        return out;
    }

    out.cts.resize(l.batch * layer.classes);
    parallel_for(ev, l.batch * layer.classes, threads, [&](std::size_t idx, Evaluator& e) {
        const std::size_t b = idx / layer.classes, s = idx % layer.classes;
        std::optional<SimCiphertext> acc;
        std::vector<double> pt(l.slot_count, 0.0);
        for (std::size_t c = 0; c < l.channels; ++c) {
            pt[0] = layer.weights(s, c);
            accumulate(e, acc, e.pmult(in.cts[l.rm_ct(b, c)], pt));
        }
        if (!layer.bias.empty()) {
            pt[0] = layer.bias[s];
            *acc = e.add_plain(*acc, pt);
        }
        out.cts[idx] = std::move(*acc);
    });
    return out;
}

int multiplicative_depth(const ModelSpec& model) {
    int d = 0;
    for (const auto& l : model.layers) d += layer_depth(l.op);
    return d;
}

int required_levels(const ModelSpec& model) { return model.layers.empty() ? 0 : multiplicative_depth(model) + 1; }

MergedSpatialMatrix merged_for(const ModelSpec& model, std::size_t layer_index) {
    const auto* s = std::get_if<SpatialConvLayer>(&model.layers.at(layer_index).op);
    if (!s) throw ShapeError("layer " + std::to_string(layer_index) + " is not a spatial convolution");
    return merge_spatial(model.adjacency, s->weights, s->bias, s->bn);
}

RunResult run_model(const ModelSpec& model, const GraphTensor& x, PackingKind kind, const SimContext& ctx,
                    const RunOptions& opts) {
    model.validate();
    if (x.batch() != model.input.batch || x.channels() != model.input.channels ||
        x.frames() != model.input.frames || x.joints() != model.input.joints)
        throw ShapeError("input tensor does not match the model input dimensions");
    if (model.layers.empty() || !std::holds_alternative<FullyConnectedLayer>(model.layers.back().op))
        throw ShapeError("model must end with a fully-connected layer");
    {
        int used = 0;
        for (const auto& l : model.layers) {
            used += layer_depth(l.op);
            if (used > ctx.max_level) throw DepthBudgetError(l.label, multiplicative_depth(model), ctx.max_level);
        }
    }

    Evaluator ev(ctx, opts.keep_log);
    ev.set_layer("input");
    RunResult res;
    res.kind = kind;
    EncryptedFeatureMap fm = encrypt_input(ev, x, kind);
    res.start_level = fm.level();
    std::optional<EncryptedScores> scores;

    for (std::size_t li = 0; li < model.layers.size(); ++li) {
        const auto& layer = model.layers[li];
        ev.set_layer(layer.label);
        const int before = fm.level();
        std::visit(
            [&](const auto& l) {
                using T = std::decay_t<decltype(l)>;
                if constexpr (std::is_same_v<T, SpatialConvLayer>)
                    fm = spatial_conv(ev, fm, merged_for(model, li), opts.threads);
                else if constexpr (std::is_same_v<T, TemporalConvLayer>)
                    fm = temporal_conv(ev, fm, l, opts.threads);
                else if constexpr (std::is_same_v<T, ActivationLayer>)
                    fm = poly_activation(ev, fm, l, opts.threads);
                else if constexpr (std::is_same_v<T, GlobalAvgPoolLayer>)
                    fm = global_avg_pool(ev, fm, opts.threads);
                else
                    scores = fully_connected(ev, fm, l, opts.threads);
            },
            layer.op);
        const int after = scores ? scores->level() : fm.level();
        res.levels.push_back({layer.label, before, after});
    }

    res.scores = scores->decrypt();
    res.final_level = scores->level();
    res.hoc = ev.counter();
    res.log = ev.log();
    return res;
}

}  // namespace hegcn
