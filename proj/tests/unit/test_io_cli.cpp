#include "hegcn/costmodel.hpp"
#include "hegcn/engine.hpp"
#include "hegcn/errors.hpp"
#include "hegcn/io.hpp"

#include <gtest/gtest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

using namespace hegcn;
namespace fs = std::filesystem;

namespace {

const std::string kData = HEGCN_DATA_DIR;

fs::path scratch(const std::string& name) {
    auto p = fs::temp_directory_path() / ("hegcn_test_" + name);
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
}

struct Run {
    int code = -1;
    std::string out;
};

Run cli(const std::string& args) {
    const std::string cmd = std::string(HEGCN_CLI) + " " + args + " 2>&1";
    Run r;
    FILE* p = popen(cmd.c_str(), "r");
    if (!p) return r;
    char buf[4096];
    std::size_t n;
    while ((n = fread(buf, 1, sizeof buf, p)) > 0) r.out.append(buf, n);
    const int st = pclose(p);
    r.code = WIFEXITED(st) ? WEXITSTATUS(st) : -1;
    return r;
}

std::string slurp(const fs::path& p) {
    std::ifstream f(p);
    std::stringstream ss;
    ss << f.rdbuf();
    return ss.str();
}

}  // namespace

TEST(Io, TensorRoundTrip) {
    std::mt19937_64 rng(1);
    auto x = GraphTensor::random(2, 3, 4, 5, rng);
    auto p = scratch("tensor") / "x.bin";
    write_tensor(p.string(), x);
    auto y = read_tensor(p.string());
    EXPECT_TRUE(y.same_shape(x));
    EXPECT_EQ(y.data(), x.data());
    EXPECT_THROW(read_tensor((p.parent_path() / "missing.bin").string()), ConfigError);
}

TEST(Io, AdjacencyRoundTrip) {
    auto a = skeleton_standin();
    auto b = adjacency_from_json(adjacency_to_json(a));
    EXPECT_EQ(b.joints, a.joints);
    EXPECT_EQ(b.partitions, a.partitions);
    auto chain = read_adjacency(kData + "/adjacency/chain5.json");
    EXPECT_EQ(chain.joints, 5u);
    EXPECT_EQ(valid_elements(chain.structure()), 13u);
}

TEST(Io, ModelPresetAndWeightsRoundTrip) {
    auto m = load_model(kData + "/models/tiny.json");
    EXPECT_EQ(m.input.channels, 8u);
    EXPECT_EQ(m.layers.size(), 3u * 4u + 2u);
    auto dir = scratch("weights");
    save_weights(m, dir.string());
    auto j = model_to_json(m);
    j["weights"] = (dir / "weights.json").string();
    auto back = model_from_json(j, kData + "/models");
    std::mt19937_64 rng(2);
    auto x = GraphTensor::random(1, 8, 16, 5, rng);
    EXPECT_EQ(plaintext_reference(back, x), plaintext_reference(m, x));
}

TEST(Io, ExplicitLayerList) {
    nlohmann::json j = {
        {"input", {{"B", 1}, {"C", 2}, {"T", 4}, {"J", 5}}},
        {"adjacency", kData + "/adjacency/chain5.json"},
        {"seed", 3},
        {"layers",
         {{{"type", "spatial_conv"}, {"out", 3}},
          {{"type", "activation"}},
          {{"type", "temporal_conv"}, {"kernel", 3}, {"stride", 2}},
          {{"type", "gap"}},
          {{"type", "fc"}, {"classes", 2}}}}};
    auto m = model_from_json(j);
    auto shapes = m.shapes();
    EXPECT_EQ(shapes.back().channels, 2u);
    EXPECT_EQ(depth(m), 7);
    j["layers"][2]["kernel"] = 4;
    EXPECT_THROW(model_from_json(j), ConfigError);
    j["layers"][2]["type"] = "bogus";
    EXPECT_THROW(model_from_json(j), ConfigError);
}

TEST(Io, PrunedListInModelFile) {
    auto m = load_model(kData + "/models/stgcn64_1ap.json");
    EXPECT_EQ(m.pruned_activations(), std::vector<std::size_t>{0});
    EXPECT_EQ(depth(m), 19);
}

TEST(Cli, ParamsExamples) {
    auto r = cli("params --levels 21");
    EXPECT_EQ(r.code, 0) << r.out;
    EXPECT_NE(r.out.find("32768"), std::string::npos);
    EXPECT_NE(r.out.find("740"), std::string::npos);
    r = cli("params --levels 19");
    EXPECT_NE(r.out.find("16384"), std::string::npos);
    EXPECT_NE(r.out.find("680"), std::string::npos);
    EXPECT_EQ(cli("params --levels 21 --security-bits 256").code, 4);
    EXPECT_EQ(cli("params --levels 300").code, 4);
}

TEST(Cli, MissingFileAndBadArgsExitTwo) {
    EXPECT_EQ(cli("infer --model /nonexistent.json").code, 2);
    EXPECT_EQ(cli("frobnicate").code, 2);
    EXPECT_EQ(cli("prune --model " + kData + "/models/tiny.json --stub /nonexistent.json").code, 2);
}

TEST(Cli, DepthBudgetExitThree) {
    auto r = cli("infer --model " + kData + "/models/tiny.json --seed 1 --levels 5");
    EXPECT_EQ(r.code, 3) << r.out;
    EXPECT_NE(r.out.find("stgcn1"), std::string::npos);
}

TEST(Cli, InferIsDeterministicAndEquivalent) {
    auto a = scratch("infer_a"), b = scratch("infer_b");
    const std::string base = "infer --model " + kData + "/models/tiny.json --seed 5 --format both --out ";
    ASSERT_EQ(cli(base + a.string()).code, 0);
    ASSERT_EQ(cli(base + b.string()).code, 0);
    EXPECT_EQ(slurp(a / "scores.json"), slurp(b / "scores.json"));
    EXPECT_EQ(slurp(a / "hoc.csv"), slurp(b / "hoc.csv"));
    auto j = nlohmann::json::parse(slurp(a / "scores.json"));
    ASSERT_TRUE(j.contains("equivalence"));
    EXPECT_TRUE(fs::exists(a / "levels.json"));
    EXPECT_NE(slurp(a / "hoc.csv").find("layer,op,format,count"), std::string::npos);
}

TEST(Cli, PruneStubSelectsOneActivation) {
    auto d = scratch("prune");
    auto r = cli("prune --model " + kData + "/models/stgcn64.json --stub " + kData +
                 "/stubs/ablation_ap.json --max-prune 2 --out " + d.string());
    ASSERT_EQ(r.code, 0) << r.out;
    EXPECT_NE(r.out.find("selected: ap-0"), std::string::npos) << r.out;
    auto j = nlohmann::json::parse(slurp(d / "prune.json"));
    EXPECT_TRUE(j.contains("best"));
    r = cli("prune --model " + kData + "/models/stgcn64.json --stub " + kData + "/stubs/ablation_ap.json --max-prune 0");
    EXPECT_NE(r.out.find("selected: baseline"), std::string::npos) << r.out;
}

TEST(Cli, CompareAndHoc) {
    auto r = cli("compare --model " + kData + "/models/tiny.json");
    EXPECT_EQ(r.code, 0) << r.out;
    r = cli("hoc --model " + kData + "/models/tiny.json --format both");
    EXPECT_EQ(r.code, 0) << r.out;
    EXPECT_NE(r.out.find("layer,op,format,count"), std::string::npos);
    r = cli("pack --dims 1,3,256,25 --format rowmajor");
    EXPECT_EQ(r.code, 0) << r.out;
    EXPECT_NE(r.out.find("1792"), std::string::npos) << r.out;
}
