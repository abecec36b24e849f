#include "hegcn/packing.hpp"

#include "hegcn/errors.hpp"

#include <bit>
#include <cmath>

namespace hegcn {

const char* to_string(PackingKind k) { return k == PackingKind::Ama ? "ama" : "rowmajor"; }

PackingLayout PackingLayout::ama(std::size_t batch, std::size_t channels, std::size_t frames,
                                 std::size_t joints, std::size_t slot_count) {
    if (batch == 0 || channels == 0 || frames == 0 || joints == 0)
        throw ShapeError("layout dims must be >= 1");
    if (!std::has_single_bit(slot_count)) throw ShapeError("slot_count must be a power of two");
    PackingLayout l;
    l.kind = PackingKind::Ama;
    l.slot_count = slot_count;
    l.batch = batch;
    l.frames = frames;
    l.valid_frames = frames;
    l.joints = joints;
    l.pad = std::bit_ceil(batch * frames);
    if (l.pad > slot_count)
        throw ShapeError("AMA block of " + std::to_string(l.pad) + " slots does not fit in " +
                         std::to_string(slot_count) + " slots");
    return l.with_channels(channels);
}

PackingLayout PackingLayout::row_major(std::size_t batch, std::size_t channels, std::size_t frames,
                                       std::size_t joints, std::size_t slot_count) {
    if (batch == 0 || channels == 0 || frames == 0 || joints == 0)
        throw ShapeError("layout dims must be >= 1");
    if (!std::has_single_bit(slot_count)) throw ShapeError("slot_count must be a power of two");
    if (frames * joints > slot_count)
        throw ShapeError("row-major feature map of " + std::to_string(frames * joints) +
                         " values does not fit in " + std::to_string(slot_count) + " slots");
    PackingLayout l;
    l.kind = PackingKind::RowMajor;
    l.slot_count = slot_count;
    l.batch = batch;
    l.channels = channels;
    l.frames = frames;
    l.valid_frames = frames;
    l.joints = joints;
    l.pad = std::bit_ceil(frames * joints);
    l.channels_per_ct = 1;
    l.channel_ring = 1;
    l.cts_per_joint = 0;
    return l;
}

PackingLayout PackingLayout::with_channels(std::size_t c) const {
    if (c == 0) throw ShapeError("channel count must be >= 1");
    PackingLayout l = *this;
    l.channels = c;
    if (kind == PackingKind::RowMajor) return l;
    const std::size_t w = blocks();
    l.channels_per_ct = std::min(w, c);
    l.channel_ring = l.channels_per_ct == w ? w : std::bit_ceil(l.channels_per_ct);
    l.cts_per_joint = (c + l.channels_per_ct - 1) / l.channels_per_ct;
    return l;
}

std::size_t PackingLayout::ciphertext_count() const {
    if (kind == PackingKind::RowMajor) return batch * channels;
    return pooled ? cts_per_joint : joints * cts_per_joint;
}

std::size_t PackingLayout::wasted_slots() const {
    if (kind == PackingKind::RowMajor) return slot_count - frames * joints;
    return slot_count - channels_per_ct * batch * frames;
}

std::optional<std::size_t> PackingLayout::ama_channel(std::size_t group, std::size_t block) const {
    const std::size_t in_ring = block % channel_ring;
    if (in_ring >= channels_per_ct) return std::nullopt;
    const std::size_t c = group * channels_per_ct + in_ring;
    if (c >= channels) return std::nullopt;
    return c;
}

nlohmann::json PackingLayout::to_json() const {
    return {{"kind", to_string(kind)},
            {"slot_count", slot_count},
            {"dims", {batch, channels, frames, joints}},
            {"time_stride", time_stride},
            {"valid_frames", valid_frames},
            {"pad", pad},
            {"channels_per_ct", channels_per_ct},
            {"channel_ring", channel_ring},
            {"cts_per_joint", cts_per_joint},
            {"replication", replication()},
            {"pooled", pooled},
            {"ciphertexts", ciphertext_count()},
            {"wasted_slots_per_ct", wasted_slots()}};
}

PackingLayout PackingLayout::from_json(const nlohmann::json& j) {
    const auto kind = j.at("kind").get<std::string>();
    const auto dims = j.at("dims").get<std::vector<std::size_t>>();
    if (dims.size() != 4) throw ConfigError("layout dims must have 4 entries");
    PackingLayout l = kind == "ama"
                          ? ama(dims[0], dims[1], dims[2], dims[3], j.at("slot_count"))
                          : row_major(dims[0], dims[1], dims[2], dims[3], j.at("slot_count"));
    l.time_stride = j.value("time_stride", std::size_t{1});
    l.valid_frames = j.value("valid_frames", l.frames);
    l.pooled = j.value("pooled", false);
    return l;
}

std::vector<std::vector<double>> ama_slot_vectors(const GraphTensor& x, const PackingLayout& l) {
    std::vector<std::vector<double>> out(l.ciphertext_count(),
                                         std::vector<double>(l.slot_count, 0.0));
    for (std::size_t j = 0; j < l.joints; ++j)
        for (std::size_t g = 0; g < l.cts_per_joint; ++g) {
            auto& v = out[l.ama_ct(j, g)];
            for (std::size_t blk = 0; blk < l.blocks(); ++blk) {
                const auto c = l.ama_channel(g, blk);
                if (!c) continue;
                for (std::size_t b = 0; b < l.batch; ++b)
                    for (std::size_t t = 0; t < l.valid_frames; ++t)
                        v[blk * l.pad + l.block_offset(b, t)] = x(b, *c, t, j);
            }
        }
    return out;
}

std::vector<std::vector<double>> rowmajor_slot_vectors(const GraphTensor& x,
                                                       const PackingLayout& l) {
    std::vector<std::vector<double>> out(l.ciphertext_count(),
                                         std::vector<double>(l.slot_count, 0.0));
    for (std::size_t b = 0; b < l.batch; ++b)
        for (std::size_t c = 0; c < l.channels; ++c)
            for (std::size_t t = 0; t < l.valid_frames; ++t)
                for (std::size_t j = 0; j < l.joints; ++j)
                    out[l.rm_ct(b, c)][l.rm_slot(t, j)] = x(b, c, t, j);
    return out;
}

namespace {

PackedTensor encrypt_all(std::vector<std::vector<double>> vecs, PackingLayout layout,
                         const SimContext& ctx) {
    Evaluator ev(ctx);
    PackedTensor p{{}, std::move(layout)};
    p.cts.reserve(vecs.size());
    for (const auto& v : vecs) p.cts.push_back(ev.encrypt(v));
    return p;
}

void check_count(std::span<const SimCiphertext> cts, const PackingLayout& l) {
    if (cts.size() != l.ciphertext_count())
        throw ShapeError("expected " + std::to_string(l.ciphertext_count()) +
                         " ciphertexts for layout, got " + std::to_string(cts.size()));
    for (const auto& ct : cts)
        if (ct.slots.size() != l.slot_count) throw ShapeError("ciphertext slot count mismatch");
}

}  // namespace

PackedTensor ama_pack(const GraphTensor& x, const SimContext& ctx) {
    auto layout = PackingLayout::ama(x.batch(), x.channels(), x.frames(), x.joints(), ctx.slot_count);
    return encrypt_all(ama_slot_vectors(x, layout), layout, ctx);
}

PackedTensor rowmajor_pack(const GraphTensor& x, const SimContext& ctx) {
    auto layout =
        PackingLayout::row_major(x.batch(), x.channels(), x.frames(), x.joints(), ctx.slot_count);
    return encrypt_all(rowmajor_slot_vectors(x, layout), layout, ctx);
}

PackedTensor pack(const GraphTensor& x, PackingKind kind, const SimContext& ctx) {
    return kind == PackingKind::Ama ? ama_pack(x, ctx) : rowmajor_pack(x, ctx);
}

GraphTensor ama_unpack(std::span<const SimCiphertext> cts, const PackingLayout& l) {
    if (l.kind != PackingKind::Ama) throw ShapeError("ama_unpack on a non-AMA layout");
    check_count(cts, l);
    const std::size_t frames = l.pooled ? 1 : l.valid_frames;
    const std::size_t joints = l.pooled ? 1 : l.joints;
    GraphTensor x(l.batch, l.channels, frames, joints);
    const std::size_t period = l.channel_ring * l.pad;
    for (const auto& ct : cts)
        for (std::size_t s = period; s < l.slot_count; ++s)
            if (std::abs(ct.slots[s] - ct.slots[s % period]) > kReplicaTolerance)
                throw ShapeError("replica divergence at slot " + std::to_string(s));
    for (std::size_t j = 0; j < joints; ++j)
        for (std::size_t g = 0; g < l.cts_per_joint; ++g) {
            const auto& v = cts[l.ama_ct(j, g)].slots;
            for (std::size_t blk = 0; blk < l.channel_ring; ++blk) {
                const auto c = l.ama_channel(g, blk);
                if (!c) continue;
                for (std::size_t b = 0; b < l.batch; ++b)
                    for (std::size_t t = 0; t < frames; ++t)
                        x(b, *c, t, j) = v[blk * l.pad + l.block_offset(b, t)];
            }
        }
    return x;
}

GraphTensor rowmajor_unpack(std::span<const SimCiphertext> cts, const PackingLayout& l) {
    if (l.kind != PackingKind::RowMajor) throw ShapeError("rowmajor_unpack on a non-row-major layout");
    check_count(cts, l);
    const std::size_t frames = l.pooled ? 1 : l.valid_frames;
    const std::size_t joints = l.pooled ? 1 : l.joints;
    GraphTensor x(l.batch, l.channels, frames, joints);
    for (std::size_t b = 0; b < l.batch; ++b)
        for (std::size_t c = 0; c < l.channels; ++c)
            for (std::size_t t = 0; t < frames; ++t)
                for (std::size_t j = 0; j < joints; ++j)
                    x(b, c, t, j) = cts[l.rm_ct(b, c)].slots[l.rm_slot(t, j)];
    return x;
}

GraphTensor unpack(std::span<const SimCiphertext> cts, const PackingLayout& l) {
    return l.kind == PackingKind::Ama ? ama_unpack(cts, l) : rowmajor_unpack(cts, l);
}

}  // namespace hegcn
