#include "hegcn/errors.hpp"
#include "hegcn/he_sim.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <sstream>

using namespace hegcn;

namespace {

SimContext ctx4(int level = 5) {
    SimContext c;
    c.slot_count = 4;
    c.max_level = level;
    return c;
}

std::vector<double> v(std::initializer_list<double> x) { return x; }

}  // namespace

TEST(HeSim, EncryptPadsWithZerosAtMaxLevel) {
    Evaluator ev(ctx4());
    auto ct = ev.encrypt(v({1, 2, 3}));
    EXPECT_EQ(ct.slots, v({1, 2, 3, 0}));
    EXPECT_EQ(ct.level, 5);
    EXPECT_EQ(ev.encrypt(std::vector<double>{}).slots, v({0, 0, 0, 0}));
    EXPECT_THROW(ev.encrypt(v({1, 2, 3, 4, 5})), ShapeError);
}

TEST(HeSim, QuantizeRoundsToScaleGrid) {
    SimContext c = ctx4();
    c.quantize = true;
    Evaluator ev(c);
    const double step = std::ldexp(1.0, 33);
    EXPECT_EQ(ev.encrypt(v({0.1})).slots[0], std::round(0.1 * step) / step);
}

TEST(HeSim, ArithmeticMatchesSlotwiseOracle) {
    Evaluator ev(ctx4());
    auto a = ev.encrypt(v({1, 2, 3, 4}));
    auto b = ev.encrypt(v({3, 4, 5, 6}));
    EXPECT_EQ(ev.add(a, b).slots, v({4, 6, 8, 10}));
    EXPECT_EQ(ev.pmult(a, 2.0).slots, v({2, 4, 6, 8}));
    EXPECT_EQ(ev.pmult(a, v({1, 0, 1, 0})).slots, v({1, 0, 3, 0}));
    auto sq = ev.cmult(a, b);
    EXPECT_EQ(sq.slots, v({3, 8, 15, 24}));
    EXPECT_EQ(sq.level, 4);
    const auto& h = ev.counter().total();
    EXPECT_EQ(h.add, 1u);
    EXPECT_EQ(h.pmult, 2u);
    EXPECT_EQ(h.cmult, 1u);
    EXPECT_EQ(h.rescale, 3u);
}

TEST(HeSim, MultiplicationByOnesStillConsumesALevel) {
    Evaluator ev(ctx4(1));
    auto a = ev.encrypt(v({1, 2, 3, 4}));
    auto b = ev.pmult(a, v({1, 1, 1, 1}));
    EXPECT_EQ(b.slots, a.slots);
    EXPECT_EQ(b.level, 0);
    EXPECT_THROW(ev.pmult(b, 1.0), LevelError);
    EXPECT_THROW(ev.cmult(b, b), LevelError);
}

TEST(HeSim, LevelMismatchIsRejected) {
    Evaluator ev(ctx4());
    auto a = ev.encrypt(v({1, 2}));
    auto b = ev.pmult(a, 1.0);
    EXPECT_THROW(ev.add(a, b), LevelError);
    EXPECT_THROW(ev.cmult(a, b), LevelError);
    EXPECT_EQ(ev.add(ev.mod_switch(a, b.level), b).slots, v({2, 4, 0, 0}));
}

TEST(HeSim, RotateIsLeftCyclicShiftAndZeroIsFree) {
    Evaluator ev(ctx4());
    auto a = ev.encrypt(v({10, 20, 30, 40}));
    EXPECT_EQ(ev.rotate(a, 1).slots, v({20, 30, 40, 10}));
    EXPECT_EQ(ev.rotate(a, -1).slots, v({40, 10, 20, 30}));
    EXPECT_EQ(ev.counter().total().rot, 2u);
    EXPECT_EQ(ev.rotate(a, 0).slots, a.slots);
    EXPECT_EQ(ev.rotate(a, 8).slots, a.slots);
    EXPECT_EQ(ev.counter().total().rot, 2u);
    EXPECT_EQ(ev.rotate(ev.rotate(a, 3), 1).slots, a.slots);
}

TEST(HeSim, RotationCompositionSameValuesDifferentCost) {
    Evaluator ev(ctx4());
    auto a = ev.encrypt(v({1, 2, 3, 4}));
    auto two = ev.rotate(ev.rotate(a, 1), 2);
    const auto before = ev.counter().total().rot;
    auto one = ev.rotate(a, 3);
    EXPECT_EQ(two.slots, one.slots);
    EXPECT_EQ(before, 2u);
    EXPECT_EQ(ev.counter().total().rot, 3u);
}

TEST(HeSim, ModSwitchKeepsValuesAndCountsNothing) {
    Evaluator ev(ctx4());
    auto a = ev.encrypt(v({1, 2}));
    auto b = ev.mod_switch(a, 3);
    EXPECT_EQ(b.slots, a.slots);
    EXPECT_EQ(b.level, 3);
    EXPECT_EQ(ev.mod_switch(a, 5).level, 5);
    EXPECT_THROW(ev.mod_switch(a, 6), LevelError);
    EXPECT_EQ(ev.counter().total(), HocCounts{});
}

TEST(HeSim, PerLayerCountersSumToTotal) {
    Evaluator ev(ctx4());
    auto a = ev.encrypt(v({1, 2, 3, 4}));
    ev.set_layer("x");
    auto b = ev.rotate(a, 1);
    ev.set_layer("y");
    ev.add(a, b);
    ev.pmult(a, 3.0);
    HocCounts sum;
    for (const auto& [k, c] : ev.counter().per_layer()) sum += c;
    EXPECT_EQ(sum, ev.counter().total());
    EXPECT_EQ(ev.counter().layer("x").rot, 1u);
    EXPECT_EQ(ev.counter().layer("y").add, 1u);
}

TEST(HeSim, OpLogReplayReproducesCounters) {
    SimContext c = ctx4(8);
    Evaluator ev(c, true);
    std::mt19937_64 rng(4);
    auto x = ev.encrypt(v({1, 2, 3, 4}));
    for (int i = 0; i < 200; ++i) {
        ev.set_layer("L" + std::to_string(i % 3));
        switch (rng() % 5) {
            case 0: x = ev.rotate(x, static_cast<long>(rng() % 7) - 3); break;
            case 1: x = ev.add(x, x); break;
            case 2: x = ev.add_plain(x, v({1, 1, 1, 1})); break;
            case 3:
                if (x.level > 0) x = ev.pmult(x, 0.5);
                break;
            default:
                if (x.level > 0) x = ev.cmult(x, x);
        }
        if (x.level == 0) x = ev.encrypt(x.slots);
    }
    std::stringstream ss;
    write_op_log(ss, ev.log());
    const auto back = read_op_log(ss);
    EXPECT_EQ(back.size(), ev.log().size());
    EXPECT_EQ(replay(back), ev.counter());
}

TEST(HeSim, OpLogRecordsLevelsAndRotationAmount) {
    Evaluator ev(ctx4(), true);
    ev.set_layer("conv");
    auto a = ev.encrypt(v({1}));
    ev.pmult(ev.rotate(a, 2), 2.0);
    std::stringstream ss;
    write_op_log(ss, ev.log());
    std::string first, second;
    std::getline(ss, first);
    std::getline(ss, second);
    EXPECT_NE(first.find("\"rotation_amount\":2"), std::string::npos);
    EXPECT_NE(first.find("\"layer\":\"conv\""), std::string::npos);
    EXPECT_NE(second.find("\"level_before\":5"), std::string::npos);
    EXPECT_NE(second.find("\"level_after\":4"), std::string::npos);
}

TEST(HeSim, ForkAbsorbMergesCountsInOrder) {
    Evaluator ev(ctx4(), true);
    auto a = ev.encrypt(v({1, 2, 3, 4}));
    Evaluator f1 = ev.fork(), f2 = ev.fork();
    f1.rotate(a, 1);
    f2.add(a, a);
    f2.pmult(a, 2.0);
    ev.absorb(std::move(f1));
    ev.absorb(std::move(f2));
    EXPECT_EQ(ev.counter().total().rot, 1u);
    EXPECT_EQ(ev.counter().total().add, 1u);
    EXPECT_EQ(ev.counter().total().pmult, 1u);
    ASSERT_EQ(ev.log().size(), 4u);  // pmult also logs its rescale
    EXPECT_EQ(ev.log()[0].op, HeOp::Rot);
}

TEST(HeSim, QuantizedErrorStaysWithinScalePerDepth) {
    SimContext c;
    c.slot_count = 64;
    c.max_level = 6;
    c.quantize = true;
    Evaluator ev(c);
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    std::vector<double> x(64), w(64);
    for (auto& e : x) e = u(rng);
    for (auto& e : w) e = u(rng);
    auto ct = ev.encrypt(x);
    auto y = ev.pmult(ev.pmult(ct, w), w);
    const double tol = 3 * std::ldexp(1.0, 1 - 33);
    for (std::size_t i = 0; i < x.size(); ++i) EXPECT_NEAR(y.slots[i], x[i] * w[i] * w[i], tol);
}

TEST(HeSim, ContextValidation) {
    SimContext c;
    c.slot_count = 6;
    EXPECT_THROW(c.validate(), ShapeError);
    c.slot_count = 8;
    c.max_level = -1;
    EXPECT_THROW(c.validate(), std::exception);
}

TEST(HeSim, ParseOpNames) {
    for (auto op : {HeOp::Rot, HeOp::PMult, HeOp::CMult, HeOp::Add, HeOp::Rescale, HeOp::ModSwitch})
        EXPECT_EQ(parse_he_op(to_string(op)), op);
    EXPECT_FALSE(parse_he_op("nope"));
}
