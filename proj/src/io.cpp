#include "hegcn/io.hpp"

#include "hegcn/errors.hpp"

#include <bit>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

namespace hegcn {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

static_assert(std::endian::native == std::endian::little, "tensor files assume a little-endian host");

std::string resolve(const std::string& base, const std::string& p) {
    const fs::path path(p);
    return path.is_absolute() ? p : (fs::path(base) / path).string();
}

template <class T>
T field(const json& j, const char* key, const std::string& where) {
    if (!j.contains(key)) throw ConfigError(where + ": missing \"" + key + "\"");
    try {
        return j.at(key).get<T>();
    } catch (const json::exception& e) {
        throw ConfigError(where + ": bad \"" + key + "\": " + e.what());
    }
}

// Named views of every weight tensor, shared by save and apply.
struct TensorRef {
    std::string name;
    std::vector<std::size_t> shape;
    std::function<std::vector<double>()> get;
    std::function<void(const std::vector<double>&)> set;
};

std::vector<TensorRef> weight_tensors(ModelSpec& m) {
    std::vector<TensorRef> refs;
    auto vec = [&](const std::string& name, std::vector<double>& v, std::size_t n) {
        refs.push_back({name, {n}, [&v] { return v; }, [&v](const std::vector<double>& x) { v = x; }});
    };
    auto mat = [&](const std::string& name, Matrix& mtx) {
        refs.push_back({name,
                        {mtx.rows(), mtx.cols()},
                        [&mtx] { return mtx.data(); },
                        [&mtx](const std::vector<double>& x) {
                            for (std::size_t r = 0; r < mtx.rows(); ++r)
                                for (std::size_t c = 0; c < mtx.cols(); ++c) mtx(r, c) = x[r * mtx.cols() + c];
                        }});
    };
    for (auto& layer : m.layers) {
        const std::string& l = layer.label;
        if (auto* s = std::get_if<SpatialConvLayer>(&layer.op)) {
            for (std::size_t p = 0; p < s->weights.size(); ++p) mat(l + ".weight." + std::to_string(p), s->weights[p]);
            vec(l + ".bias", s->bias, s->out_channels);
            if (!s->bn) s->bn.emplace();
            auto& bn = *s->bn;
            vec(l + ".bn.gamma", bn.gamma, s->out_channels);
            vec(l + ".bn.beta", bn.beta, s->out_channels);
            vec(l + ".bn.mean", bn.mean, s->out_channels);
            vec(l + ".bn.var", bn.var, s->out_channels);
        } else if (auto* t = std::get_if<TemporalConvLayer>(&layer.op)) {
            refs.push_back({l + ".weight",
                            {t->out_channels, t->in_channels, t->kernel},
                            [t] { return t->weights; },
                            [t](const std::vector<double>& x) { t->weights = x; }});
            vec(l + ".bias", t->bias, t->out_channels);
        } else if (auto* a = std::get_if<ActivationLayer>(&layer.op)) {
            refs.push_back({l + ".coef", {3}, [a] { return std::vector<double>{a->a, a->b, a->c}; },
                            [a](const std::vector<double>& x) {
                                a->a = x[0];
                                a->b = x[1];
                                a->c = x[2];
                            }});
        } else if (auto* f = std::get_if<FullyConnectedLayer>(&layer.op)) {
            mat(l + ".weight", f->weights);
            vec(l + ".bias", f->bias, f->classes);
        }
    }
    return refs;
}

// Batch-norm slots exist only to be addressable; drop the ones left empty.
void drop_empty_bn(ModelSpec& m) {
    for (auto& layer : m.layers)
        if (auto* s = std::get_if<SpatialConvLayer>(&layer.op))
            if (s->bn && s->bn->gamma.empty()) s->bn.reset();
}

}  // namespace

json read_json_file(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw ConfigError("cannot open " + path);
    try {
        return json::parse(f);
    } catch (const json::exception& e) {
        throw ConfigError(path + ": " + e.what());
    }
}

void write_json_file(const std::string& path, const json& j) {
    std::ofstream f(path);
    if (!f) throw ConfigError("cannot write " + path);
    f << j.dump(2) << '\n';
}

void write_tensor(const std::string& path, const GraphTensor& x) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw ConfigError("cannot write " + path);
    const json header = {{"dims", {x.batch(), x.channels(), x.frames(), x.joints()}},
                         {"dtype", "f64"},
                         {"order", "bctj"}};
    f << header.dump() << '\n';
    f.write(reinterpret_cast<const char*>(x.data().data()), static_cast<std::streamsize>(x.size() * sizeof(double)));
}

GraphTensor read_tensor(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw ConfigError("cannot open " + path);
    std::string line;
    std::getline(f, line);
    json h;
    try {
        h = json::parse(line);
    } catch (const json::exception& e) {
        throw ConfigError(path + ": bad tensor header: " + e.what());
    }
    if (h.value("dtype", "") != "f64" || h.value("order", "") != "bctj")
        throw ConfigError(path + ": expected dtype f64 and order bctj");
    const auto dims = field<std::vector<std::size_t>>(h, "dims", path);
    if (dims.size() != 4) throw ConfigError(path + ": dims must have 4 entries");
    const std::size_t n = dims[0] * dims[1] * dims[2] * dims[3];
    std::vector<double> data(n);
    f.read(reinterpret_cast<char*>(data.data()), static_cast<std::streamsize>(n * sizeof(double)));
    if (static_cast<std::size_t>(f.gcount()) != n * sizeof(double)) throw ConfigError(path + ": truncated tensor data");
    try {
        return GraphTensor(dims[0], dims[1], dims[2], dims[3], std::move(data));
    } catch (const std::exception& e) {
        throw ConfigError(path + ": " + e.what());
    }
}

AdjacencySet adjacency_from_json(const json& j) {
    const std::string where = "adjacency";
    AdjacencySet a;
    a.joints = field<std::size_t>(j, "J", where);
    if (a.joints == 0) throw ConfigError("adjacency: J must be positive");
    const bool directed = j.value("directed", false);
    if (!j.contains("partitions") || !j["partitions"].is_array() || j["partitions"].empty())
        throw ConfigError("adjacency: \"partitions\" must be a non-empty array");
    for (const auto& p : j["partitions"]) {
        Matrix m(a.joints, a.joints);
        if (p.contains("matrix")) {
            const auto rows = field<std::vector<std::vector<double>>>(p, "matrix", where);
            if (rows.size() != a.joints) throw ConfigError("adjacency: matrix must be J x J");
            for (std::size_t r = 0; r < a.joints; ++r) {
                if (rows[r].size() != a.joints) throw ConfigError("adjacency: matrix must be J x J");
                for (std::size_t c = 0; c < a.joints; ++c) m(r, c) = rows[r][c];
            }
        } else {
            for (const auto& e : field<std::vector<std::vector<std::size_t>>>(p, "edges", where)) {
                if (e.size() != 2 || e[0] >= a.joints || e[1] >= a.joints)
                    throw ConfigError("adjacency: edge out of range");
                m(e[0], e[1]) = 1.0;
                if (!directed) m(e[1], e[0]) = 1.0;
            }
        }
        a.partitions.push_back(std::move(m));
    }
    return a;
}

json adjacency_to_json(const AdjacencySet& a) {
    json parts = json::array();
    for (const auto& p : a.partitions) {
        json rows = json::array();
        for (std::size_t r = 0; r < p.rows(); ++r) {
            json row = json::array();
            for (std::size_t c = 0; c < p.cols(); ++c) row.push_back(p(r, c));
            rows.push_back(row);
        }
        parts.push_back({{"matrix", rows}});
    }
    return {{"J", a.joints}, {"partitions", parts}};
}

AdjacencySet read_adjacency(const std::string& path) {
    if (fs::path(path).extension() != ".csv") return adjacency_from_json(read_json_file(path));
    std::ifstream f(path);
    if (!f) throw ConfigError("cannot open " + path);
    std::vector<std::vector<double>> rows;
    std::string line;
    while (std::getline(f, line)) {
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        std::vector<double> row;
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) {
            try {
                row.push_back(std::stod(cell));
            } catch (const std::exception&) {
                throw ConfigError(path + ": bad number '" + cell + "'");
            }
        }
        rows.push_back(std::move(row));
    }
    AdjacencySet a;
    a.joints = rows.size();
    Matrix m(a.joints, a.joints);
    for (std::size_t r = 0; r < a.joints; ++r) {
        if (rows[r].size() != a.joints) throw ConfigError(path + ": matrix must be square");
        for (std::size_t c = 0; c < a.joints; ++c) m(r, c) = rows[r][c];
    }
    if (a.joints == 0) throw ConfigError(path + ": empty matrix");
    a.partitions.push_back(std::move(m));
    return a;
}

ModelSpec model_from_json(const json& j, const std::string& base_dir) {
    const std::string where = "model";
    if (!j.is_object()) throw ConfigError("model: expected a JSON object");
    const json& jin = j.contains("input") ? j["input"] : throw ConfigError("model: missing \"input\"");
    InputDims in{field<std::size_t>(jin, "B", "model input"), field<std::size_t>(jin, "C", "model input"),
                 field<std::size_t>(jin, "T", "model input"), field<std::size_t>(jin, "J", "model input")};

    AdjacencySet adj;
    const json a = j.value("adjacency", json("standin"));
    if (a.is_string() && a.get<std::string>() == "standin") adj = skeleton_standin();
    else if (a.is_string()) adj = read_adjacency(resolve(base_dir, a.get<std::string>()));
    else adj = adjacency_from_json(a);

    const auto seed = j.value("seed", std::uint64_t{1});
    ModelSpec m;
    try {
        if (j.value("preset", "") == "stgcn") {
            StgcnConfig cfg;
            cfg.input = in;
            cfg.adjacency = adj;
            cfg.seed = seed;
            cfg.widths = j.value("widths", cfg.widths);
            cfg.strides = j.value("strides", std::vector<std::size_t>(cfg.widths.size(), 1));
            cfg.kernel = j.value("kernel", cfg.kernel);
            cfg.classes = j.value("classes", cfg.classes);
            cfg.with_bias = j.value("bias", cfg.with_bias);
            cfg.with_batchnorm = j.value("batchnorm", cfg.with_batchnorm);
            m = make_stgcn(cfg);
        } else if (j.contains("layers")) {
            m.input = in;
            m.adjacency = adj;
            WeightInit init(seed);
            std::size_t c = in.channels;
            std::size_t idx = 0;
            for (const auto& jl : j["layers"]) {
                const std::string type = field<std::string>(jl, "type", "layer " + std::to_string(idx));
                std::string label = jl.value("label", type + std::to_string(idx));
                ++idx;
                if (type == "spatial_conv") {
                    const auto o = field<std::size_t>(jl, "out", label);
                    m.layers.push_back({label, init.spatial(c, o, adj.partitions.size(), jl.value("bias", true),
                                                            jl.value("batchnorm", false))});
                    c = o;
                } else if (type == "temporal_conv") {
                    const auto o = jl.value("out", c);
                    m.layers.push_back({label, init.temporal(c, o, jl.value("kernel", std::size_t{9}),
                                                             jl.value("stride", std::size_t{1}), jl.value("bias", true))});
                    c = o;
                } else if (type == "activation") {
                    ActivationLayer act = init.activation();
                    act.a = jl.value("a", act.a);
                    act.b = jl.value("b", act.b);
                    act.c = jl.value("c", act.c);
                    act.pruned = jl.value("pruned", false);
                    m.layers.push_back({label, act});
                } else if (type == "gap" || type == "global_avg_pool") {
                    m.layers.push_back({label, GlobalAvgPoolLayer{}});
                } else if (type == "fc" || type == "fully_connected") {
                    const auto k = field<std::size_t>(jl, "classes", label);
                    m.layers.push_back({label, init.fc(c, k, jl.value("bias", true))});
                    c = k;
                } else {
                    throw ConfigError("unknown layer type '" + type + "'");
                }
            }
        } else {
            throw ConfigError("model: needs \"preset\" or \"layers\"");
        }
        if (j.contains("pruned")) m = m.with_pruned(j["pruned"].get<std::vector<std::size_t>>());
    } catch (const json::exception& e) {
        throw ConfigError(std::string("model: ") + e.what());
    }
    if (j.contains("weights")) apply_weights(m, resolve(base_dir, j["weights"].get<std::string>()));
    try {
        m.validate();
    } catch (const ShapeError& e) {
        throw ConfigError(std::string("model: ") + e.what());
    }
    return m;
}

ModelSpec load_model(const std::string& path) {
    return model_from_json(read_json_file(path), fs::path(path).parent_path().string());
}

json model_to_json(const ModelSpec& m) {
    json layers = json::array();
    for (const auto& layer : m.layers) {
        json jl = {{"label", layer.label}};
        std::visit(
            [&](const auto& l) {
                using T = std::decay_t<decltype(l)>;
                if constexpr (std::is_same_v<T, SpatialConvLayer>) {
                    jl["type"] = "spatial_conv";
                    jl["out"] = l.out_channels;
                    jl["bias"] = !l.bias.empty();
                    jl["batchnorm"] = l.bn.has_value();
                } else if constexpr (std::is_same_v<T, TemporalConvLayer>) {
                    jl["type"] = "temporal_conv";
                    jl["out"] = l.out_channels;
                    jl["kernel"] = l.kernel;
                    jl["stride"] = l.stride;
                    jl["bias"] = !l.bias.empty();
                } else if constexpr (std::is_same_v<T, ActivationLayer>) {
                    jl["type"] = "activation";
                    jl["a"] = l.a;
                    jl["b"] = l.b;
                    jl["c"] = l.c;
                    jl["pruned"] = l.pruned;
                } else if constexpr (std::is_same_v<T, GlobalAvgPoolLayer>) {
                    jl["type"] = "gap";
                } else {
                    jl["type"] = "fc";
                    jl["classes"] = l.classes;
                    jl["bias"] = !l.bias.empty();
                }
            },
            layer.op);
        layers.push_back(std::move(jl));
    }
    return {{"input", {{"B", m.input.batch}, {"C", m.input.channels}, {"T", m.input.frames}, {"J", m.input.joints}}},
            {"adjacency", adjacency_to_json(m.adjacency)},
            {"layers", layers}};
}

void save_weights(const ModelSpec& model, const std::string& dir, const std::string& stem) {
    ModelSpec m = model;
    const auto refs = weight_tensors(m);
    const std::string blob = stem + ".bin";
    std::ofstream f(resolve(dir, blob), std::ios::binary);
    if (!f) throw ConfigError("cannot write " + resolve(dir, blob));
    json tensors = json::array();
    std::size_t offset = 0;
    for (const auto& r : refs) {
        const auto v = r.get();
        if (v.empty()) continue;
        auto shape = r.shape;
        tensors.push_back({{"name", r.name}, {"shape", shape}, {"offset", offset}});
        f.write(reinterpret_cast<const char*>(v.data()), static_cast<std::streamsize>(v.size() * sizeof(double)));
        offset += v.size();
    }
    write_json_file(resolve(dir, stem + ".json"), {{"blob", blob}, {"dtype", "f64"}, {"tensors", tensors}});
}

void apply_weights(ModelSpec& m, const std::string& manifest_path) {
    const json man = read_json_file(manifest_path);
    const std::string base = fs::path(manifest_path).parent_path().string();
    const std::string blob_path = resolve(base, field<std::string>(man, "blob", manifest_path));
    std::ifstream f(blob_path, std::ios::binary | std::ios::ate);
    if (!f) throw ConfigError("cannot open " + blob_path);
    const auto bytes = static_cast<std::size_t>(f.tellg());
    std::vector<double> blob(bytes / sizeof(double));
    f.seekg(0);
    f.read(reinterpret_cast<char*>(blob.data()), static_cast<std::streamsize>(blob.size() * sizeof(double)));

    auto refs = weight_tensors(m);
    std::map<std::string, TensorRef*> by_name;
    for (auto& r : refs) by_name[r.name] = &r;
    for (const auto& t : field<json>(man, "tensors", manifest_path)) {
        const auto name = field<std::string>(t, "name", manifest_path);
        const auto shape = field<std::vector<std::size_t>>(t, "shape", name);
        const auto offset = field<std::size_t>(t, "offset", name);
        auto it = by_name.find(name);
        if (it == by_name.end()) throw ConfigError(manifest_path + ": unknown tensor '" + name + "'");
        if (shape != it->second->shape) throw ConfigError(manifest_path + ": shape mismatch for '" + name + "'");
        std::size_t n = 1;
        for (auto d : shape) n *= d;
        if (offset + n > blob.size()) throw ConfigError(manifest_path + ": tensor '" + name + "' past end of blob");
        it->second->set(std::vector<double>(blob.begin() + static_cast<long>(offset),
                                            blob.begin() + static_cast<long>(offset + n)));
    }
    drop_empty_bn(m);
}

json merged_to_json(const MergedSpatialMatrix& m) {
    json blocks = json::array();
    for (std::size_t c = 0; c < m.in_channels; ++c)
        for (std::size_t o = 0; o < m.out_channels; ++o)
            blocks.push_back({{"in", c}, {"out", o}, {"matrix", m.at(c, o).data()}});
    return {{"in_channels", m.in_channels},
            {"out_channels", m.out_channels},
            {"joints", m.joints},
            {"bias", m.bias},
            {"blocks", blocks}};
}

}  // namespace hegcn
