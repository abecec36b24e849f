#include "hegcn/errors.hpp"
#include "hegcn/packing.hpp"

#include <gtest/gtest.h>

#include <random>

using namespace hegcn;

namespace {

SimContext ctx(std::size_t slots) {
    SimContext c;
    c.slot_count = slots;
    c.max_level = 3;
    return c;
}

// Independent slot oracle: block of pad = bit_ceil(B*T) slots holds frames of all batches,
// channel c of group g sits in block (c - g*U) and its replicas every `ring` blocks.
std::vector<std::vector<double>> ama_oracle(const GraphTensor& x, std::size_t slots) {
    const std::size_t B = x.batch(), C = x.channels(), T = x.frames(), J = x.joints();
    std::size_t pad = 1;
    while (pad < B * T) pad *= 2;
    const std::size_t W = slots / pad, U = std::min(W, C);
    std::size_t ring = 1;
    while (ring < U) ring *= 2;
    if (U == W) ring = W;
    const std::size_t G = (C + U - 1) / U;
    std::vector<std::vector<double>> out(J * G, std::vector<double>(slots, 0.0));
    for (std::size_t j = 0; j < J; ++j)
        for (std::size_t g = 0; g < G; ++g)
            for (std::size_t blk = 0; blk < W; ++blk) {
                const std::size_t c = g * U + blk % ring;
                if (blk % ring >= U || c >= C) continue;
                for (std::size_t b = 0; b < B; ++b)
                    for (std::size_t t = 0; t < T; ++t) out[j * G + g][blk * pad + b * T + t] = x(b, c, t, j);
            }
    return out;
}

}  // namespace

TEST(Packing, AmaReplicatesSingleChannel) {
    GraphTensor x(1, 1, 2, 1, {5, 7});
    auto p = ama_pack(x, ctx(4));
    ASSERT_EQ(p.cts.size(), 1u);
    EXPECT_EQ(p.cts[0].slots, (std::vector<double>{5, 7, 5, 7}));
    EXPECT_EQ(p.cts[0].level, 3);
}

TEST(Packing, AmaPacksChannelsSideBySide) {
    GraphTensor x(1, 2, 2, 1, {1, 2, 3, 4});
    auto p = ama_pack(x, ctx(4));
    ASSERT_EQ(p.cts.size(), 1u);
    EXPECT_EQ(p.cts[0].slots, (std::vector<double>{1, 2, 3, 4}));
}

TEST(Packing, AmaPadsFramesToPowerOfTwo) {
    GraphTensor x(1, 1, 3, 1, {1, 2, 3});
    auto p = ama_pack(x, ctx(8));
    EXPECT_EQ(p.layout.pad, 4u);
    EXPECT_EQ(p.cts[0].slots, (std::vector<double>{1, 2, 3, 0, 1, 2, 3, 0}));
}

TEST(Packing, AmaMatchesOracleAndCounts) {
    std::mt19937_64 rng(1);
    for (auto [B, C, T, J, S] : std::vector<std::array<std::size_t, 5>>{
             {1, 3, 4, 2, 16}, {2, 5, 3, 3, 32}, {1, 64, 256, 25, 8192}, {3, 7, 5, 4, 64}, {1, 1, 1, 1, 1}}) {
        auto x = GraphTensor::random(B, C, T, J, rng);
        auto p = ama_pack(x, ctx(S));
        auto want = ama_oracle(x, S);
        ASSERT_EQ(p.cts.size(), want.size());
        for (std::size_t i = 0; i < want.size(); ++i) EXPECT_EQ(p.cts[i].slots, want[i]);
        const std::size_t U = p.layout.channels_per_ct;
        EXPECT_EQ(p.layout.ciphertext_count(), J * ((C + U - 1) / U));
        EXPECT_EQ(max_abs_diff(ama_unpack(p.cts, p.layout), x), 0.0);
    }
}

TEST(Packing, AmaRejectsOversizedBlock) {
    GraphTensor x(2, 1, 5, 1);
    EXPECT_THROW(ama_pack(x, ctx(8)), ShapeError);
}

TEST(Packing, ReplicaDivergenceIsDetected) {
    GraphTensor x(1, 1, 2, 1, {5, 7});
    auto p = ama_pack(x, ctx(4));
    p.cts[0].slots[3] += 1e-3;
    try {
        ama_unpack(p.cts, p.layout);
        FAIL() << "expected divergence error";
    } catch (const ShapeError& e) {
        EXPECT_NE(std::string(e.what()).find("replica divergence"), std::string::npos);
    }
    p.cts[0].slots[3] = 7 + 1e-12;
    EXPECT_NO_THROW(ama_unpack(p.cts, p.layout));
}

TEST(Packing, ZeroTensorRoundTrips) {
    GraphTensor z(2, 3, 4, 5);
    for (auto kind : {PackingKind::Ama, PackingKind::RowMajor}) {
        auto p = pack(z, kind, ctx(64));
        EXPECT_EQ(max_abs_diff(unpack(p.cts, p.layout), z), 0.0);
    }
}

TEST(Packing, RowMajorLayout) {
    GraphTensor x(1, 1, 2, 2, {1, 2, 3, 4});
    auto p = rowmajor_pack(x, ctx(8));
    ASSERT_EQ(p.cts.size(), 1u);
    EXPECT_EQ(p.cts[0].slots, (std::vector<double>{1, 2, 3, 4, 0, 0, 0, 0}));
    EXPECT_EQ(rowmajor_pack(GraphTensor(2, 3, 2, 2), ctx(8)).cts.size(), 6u);
}

TEST(Packing, RowMajorWastedSlots) {
    auto l = PackingLayout::row_major(1, 3, 256, 25, 8192);
    EXPECT_EQ(l.wasted_slots(), 1792u);
    EXPECT_THROW(PackingLayout::row_major(1, 1, 256, 25, 4096), ShapeError);
}

TEST(Packing, RoundTripRandomGrid) {
    std::mt19937_64 rng(99);
    for (std::size_t B : {1, 2, 3})
        for (std::size_t C : {1, 4, 9})
            for (std::size_t T : {1, 3, 8})
                for (std::size_t J : {1, 5})
                    for (auto kind : {PackingKind::Ama, PackingKind::RowMajor}) {
                        auto x = GraphTensor::random(B, C, T, J, rng);
                        auto p = pack(x, kind, ctx(64));
                        EXPECT_EQ(max_abs_diff(unpack(p.cts, p.layout), x), 0.0)
                            << B << ' ' << C << ' ' << T << ' ' << J;
                    }
}

TEST(Packing, MismatchedLayoutIsRejected) {
    GraphTensor x(1, 2, 2, 2);
    auto rm = rowmajor_pack(x, ctx(8));
    auto am = ama_pack(x, ctx(8));
    EXPECT_THROW(rowmajor_unpack(am.cts, am.layout), ShapeError);
    EXPECT_THROW(ama_unpack(rm.cts, rm.layout), ShapeError);
    auto short_cts = rm.cts;
    short_cts.pop_back();
    EXPECT_THROW(rowmajor_unpack(short_cts, rm.layout), ShapeError);
}

TEST(Packing, LayoutJsonRoundTrip) {
    auto l = PackingLayout::ama(2, 10, 6, 3, 256);
    EXPECT_EQ(PackingLayout::from_json(l.to_json()), l);
    auto r = PackingLayout::row_major(2, 3, 6, 3, 64);
    EXPECT_EQ(PackingLayout::from_json(r.to_json()), r);
}
