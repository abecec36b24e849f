#pragma once

// Slot layouts for graph tensors.
//
// AMA: one ciphertext group per joint. Inside a ciphertext the slot vector is
// cut into blocks of `pad` slots (pad = next power of two >= B*T); block c
// carries one channel, flattened batch-major (b outer, t inner). A ciphertext
// holds U channels; when fewer channels than blocks exist the channel set is
// repeated to fill every slot, so the vector is periodic with period
// channel_ring * pad.
//
// RowMajor: one ciphertext per (batch, channel), slot t*J + j.

#include "hegcn/he_sim.hpp"
#include "hegcn/tensor.hpp"

#include <json.hpp>

#include <cstddef>
#include <optional>
#include <vector>

namespace hegcn {

enum class PackingKind { Ama, RowMajor };

const char* to_string(PackingKind k);

struct PackingLayout {
    PackingKind kind = PackingKind::Ama;
    std::size_t slot_count = 0;
    std::size_t batch = 0;
    std::size_t channels = 0;
    std::size_t frames = 0;         // physical frame span per batch entry
    std::size_t joints = 0;
    std::size_t time_stride = 1;    // frames kept after strided temporal convolutions
    std::size_t valid_frames = 0;   // logical frame count
    std::size_t pad = 0;            // AMA: pow2 >= B*T; RowMajor: pow2 >= T*J
    std::size_t channels_per_ct = 0;  // U
    std::size_t channel_ring = 0;     // AMA: replication period in blocks
    std::size_t cts_per_joint = 0;    // AMA: ceil(C / U)
    bool pooled = false;              // joint and frame axes reduced to one value

    static PackingLayout ama(std::size_t batch, std::size_t channels, std::size_t frames,
                             std::size_t joints, std::size_t slot_count);
    static PackingLayout row_major(std::size_t batch, std::size_t channels, std::size_t frames,
                                   std::size_t joints, std::size_t slot_count);

    /// Same geometry (blocks, frames, stride) holding a different channel count.
    PackingLayout with_channels(std::size_t c) const;

    std::size_t blocks() const { return slot_count / pad; }
    std::size_t replication() const { return kind == PackingKind::Ama ? blocks() / channel_ring : 1; }
    std::size_t ciphertext_count() const;
    std::size_t wasted_slots() const;

    /// AMA: index of the ciphertext holding (joint, group); pooled layouts ignore the joint.
    std::size_t ama_ct(std::size_t joint, std::size_t group) const {
        return pooled ? group : joint * cts_per_joint + group;
    }
    /// AMA: channel stored in `block` of a group-`group` ciphertext, if any.
    std::optional<std::size_t> ama_channel(std::size_t group, std::size_t block) const;
    /// AMA: slot offset of (b, logical t) inside a block.
    std::size_t block_offset(std::size_t b, std::size_t t) const { return b * frames + t * time_stride; }

    std::size_t rm_ct(std::size_t b, std::size_t c) const { return b * channels + c; }
    std::size_t rm_slot(std::size_t t, std::size_t j) const { return t * time_stride * joints + j; }

    nlohmann::json to_json() const;
    static PackingLayout from_json(const nlohmann::json& j);

    friend bool operator==(const PackingLayout&, const PackingLayout&) = default;
};

struct PackedTensor {
    std::vector<SimCiphertext> cts;
    PackingLayout layout;
};

/// Plain slot vectors in AMA order, before encryption.
std::vector<std::vector<double>> ama_slot_vectors(const GraphTensor& x, const PackingLayout& layout);
std::vector<std::vector<double>> rowmajor_slot_vectors(const GraphTensor& x,
                                                       const PackingLayout& layout);

PackedTensor ama_pack(const GraphTensor& x, const SimContext& ctx);
PackedTensor rowmajor_pack(const GraphTensor& x, const SimContext& ctx);
PackedTensor pack(const GraphTensor& x, PackingKind kind, const SimContext& ctx);

inline constexpr double kReplicaTolerance = 1e-9;

/// Exact inverse of ama_pack on occupied slots. Replica blocks are checked
/// against the first copy; a mismatch beyond kReplicaTolerance throws.
GraphTensor ama_unpack(std::span<const SimCiphertext> cts, const PackingLayout& layout);
GraphTensor rowmajor_unpack(std::span<const SimCiphertext> cts, const PackingLayout& layout);
GraphTensor unpack(std::span<const SimCiphertext> cts, const PackingLayout& layout);

}  // namespace hegcn
