#include "hegcn/costmodel.hpp"
#include "hegcn/engine.hpp"
#include "hegcn/errors.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <random>

using namespace hegcn;

namespace {

ModelSpec small_stgcn(std::size_t batch, std::size_t frames = 32) {
    StgcnConfig cfg;
    cfg.input.frames = 32;
    cfg.input = {batch, 3, frames, 25};
    cfg.widths = {4, 8, 8};
    cfg.classes = 6;
    return make_stgcn(cfg);
}

}  // namespace

TEST(Costmodel, MatmulRowMajorExample) {
    auto h = matmul_hoc(PackingKind::RowMajor, 1, 64, 25);
    EXPECT_EQ(h.rot, 3072u);
    EXPECT_EQ(h.pmult, 200704u);
    EXPECT_EQ(h.add, 200640u);
}

TEST(Costmodel, MatmulAmaExample) {
    // B*C*(J/B-1) rotations; J*J*(BC/J)*C plaintext products, one fewer add per output than products
    auto h = matmul_hoc(PackingKind::Ama, 1, 64, 25);
    EXPECT_EQ(h.rot, 1536u);
    EXPECT_EQ(h.pmult, 25u * 25u * 64u * 64u / 25u);
    EXPECT_EQ(h.add, h.pmult - 64u);
}

TEST(Costmodel, MatmulOneJointPerBatchSlotHasNoRotations) {
    for (std::size_t J : {2, 4, 25}) EXPECT_EQ(matmul_hoc(PackingKind::Ama, J, 3, J).rot, 0u);
}

TEST(Costmodel, MatmulPMultRatioApproachesHalf) {
    for (std::size_t J : {4, 16, 64, 256}) {
        const double r = static_cast<double>(matmul_hoc(PackingKind::Ama, 1, 256, J).pmult) /
                         static_cast<double>(matmul_hoc(PackingKind::RowMajor, 1, 256, J).pmult);
        EXPECT_NEAR(r, 0.5, 1.0 / static_cast<double>(J));
    }
}

TEST(Costmodel, LayerFormulaExamples) {
    HocFormulaInput in;
    in.C = 64;
    in.U = 32;
    in.T = 256;
    in.J = 25;
    EXPECT_EQ(layer_hoc(PackingKind::Ama, LayerType::Gap, in).rot, 14u);
    in.N_a = 50;
    in.A = 5;
    EXPECT_EQ(layer_hoc(PackingKind::Ama, LayerType::Activation, in).cmult, 250u);
    in.C_s = 60;
    EXPECT_EQ(layer_hoc(PackingKind::RowMajor, LayerType::Fc, in).rot, 60u);
    EXPECT_EQ(layer_hoc(PackingKind::Ama, LayerType::Fc, in).pmult, 120u);
}

TEST(Costmodel, DeriveInputs) {
    auto in = HocFormulaInput::derive(1, 64, 64, 256, 25, 9, 8192, 3, 3, 6, 71, 19, 60);
    EXPECT_EQ(in.U, 32);
    EXPECT_EQ(in.N_a, 50);
    EXPECT_EQ(in.N_r, 64);
    EXPECT_EQ(in.R, 16384);
    auto b3 = HocFormulaInput::derive(3, 100, 100, 5, 7, 9, 256, 1, 1, 1, 1, 1, 1, 2);
    EXPECT_EQ(b3.U, 16);  // 256 / bit_ceil(15)
    EXPECT_EQ(b3.N_a, 7 * 7);
    EXPECT_EQ(b3.N_r, 600);
}

TEST(Costmodel, DepthExamples) {
    StgcnConfig cfg;
    cfg.input.frames = 32;
    auto m = make_stgcn(cfg);
    EXPECT_EQ(depth(m), 21);
    EXPECT_EQ(depth(m.with_pruned({2})), 19);
    EXPECT_EQ(depth(m.with_pruned({1, 4})), 17);
    EXPECT_EQ(depth(ModelSpec{}), 0);
    EXPECT_THROW(m.with_pruned({6}), ConfigError);
}

TEST(Costmodel, ParamsExamples) {
    auto p21 = select_params(21);
    EXPECT_EQ(p21.poly_degree, 1u << 15);
    EXPECT_EQ(p21.modulus_bits, 740);
    auto p19 = select_params(19);
    EXPECT_EQ(p19.poly_degree, 1u << 14);
    EXPECT_EQ(p19.modulus_bits, 680);
    auto p17 = select_params(17);
    EXPECT_EQ(p17.poly_degree, 1u << 14);
    EXPECT_EQ(p17.modulus_bits, 600);
    EXPECT_EQ(p17.slot_count(), 8192u);
    auto p1 = select_params(1, 33, 0);
    EXPECT_EQ(p1.poly_degree, 1u << 12);
    EXPECT_EQ(p1.modulus_bits, 109);
    EXPECT_EQ(p1.security_bits, 128);
}

TEST(Costmodel, ParamsErrors) {
    EXPECT_THROW(select_params(0), ParamsError);
    EXPECT_THROW(select_params(21, 33, 192), ParamsError);
    EXPECT_THROW(select_params(200), ParamsError);
    ParamsPolicy tiny;
    tiny.table.entries = {{12, 109, 180}};
    EXPECT_THROW(select_params(10, 33, 80, tiny), ParamsError);
}

TEST(Costmodel, ParamsMonotoneInLevels) {
    for (int target : {80, 128}) {
        HeParams prev{};
        for (int l = 1; l <= 50; ++l) {
            HeParams p;
            try {
                p = select_params(l, 33, target);
            } catch (const ParamsError&) {
                break;
            }
            EXPECT_GE(p.poly_degree, prev.poly_degree) << l;
            EXPECT_GE(p.modulus_bits, prev.modulus_bits) << l;
            EXPECT_GE(p.modulus_bits, l * 33);
            prev = p;
        }
    }
}

TEST(Costmodel, ScheduleEqualsMeasuredOnSmallModels) {
    std::mt19937_64 rng(21);
    for (std::size_t batch : {1, 2}) {
        auto m = small_stgcn(batch);
        auto x = GraphTensor::random(batch, 3, 32, 25, rng);
        for (auto kind : {PackingKind::Ama, PackingKind::RowMajor}) {
            SimContext ctx;
            ctx.slot_count = 2048;
            ctx.max_level = 20;
            auto res = run_model(m, x, kind, ctx);
            auto sched = schedule_hoc(m, kind, ctx.slot_count);
            auto rep = reconcile(res.hoc, sched);
            EXPECT_TRUE(rep.exact()) << rep.to_string();
            EXPECT_EQ(total_hoc(sched), res.hoc.total());
        }
    }
}

TEST(Costmodel, ReconcileFlagsMismatchedBatch) {
    auto m1 = small_stgcn(1);
    std::mt19937_64 rng(22);
    SimContext ctx;
    ctx.slot_count = 2048;
    ctx.max_level = 20;
    auto res = run_model(m1, GraphTensor::random(1, 3, 32, 25, rng), PackingKind::RowMajor, ctx);
    auto rep = reconcile(res.hoc, schedule_hoc(small_stgcn(2), PackingKind::RowMajor, ctx.slot_count));
    EXPECT_FALSE(rep.exact());
    bool any = false;
    for (const auto& r : rep.rows) any = any || !r.exact();
    EXPECT_TRUE(any);
}

TEST(Costmodel, ReconcileEmpty) {
    EXPECT_TRUE(reconcile(HocCounter{}, std::vector<LayerSchedule>{}).exact());
    EXPECT_TRUE(reconcile(std::map<std::string, HocCounts>{}, std::map<std::string, HocCounts>{}).exact());
}

TEST(Costmodel, AmortizedRotationsFallWithBatch) {
    // under-filled ciphertexts: larger batches reuse the same rotations
    double prev = 1e300;
    for (std::size_t b : {1, 2, 4, 8, 16}) {
        StgcnConfig cfg;
    cfg.input.frames = 32;
        cfg.input = {b, 3, 32, 25};
        cfg.widths = {16, 16, 16};
        auto m = make_stgcn(cfg);
        auto t = total_hoc(schedule_hoc(m, PackingKind::Ama, 8192));
        const double per = static_cast<double>(t.rot) / static_cast<double>(b);
        EXPECT_LT(per, prev) << b;
        prev = per;
    }
}

TEST(Costmodel, FrameworkTotalsPositiveAndOrdered) {
    auto in = HocFormulaInput::derive(1, 128, 64, 256, 25, 9, 8192, 3, 3, 5, 71, 19, 60);
    const auto chet = framework_hoc(Framework::Chet, in).total();
    const auto ours = framework_hoc(Framework::AmaPublished, in).total();
    EXPECT_GT(chet, ours);
    EXPECT_GT(framework_hoc(Framework::FastHear, in).total(), ours);
}
