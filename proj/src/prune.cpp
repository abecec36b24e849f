#include "hegcn/prune.hpp"

#include "hegcn/errors.hpp"
#include "hegcn/io.hpp"

#include <unistd.h>

#include <algorithm>
#include <array>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <numeric>
#include <sstream>

namespace hegcn {

namespace {

std::vector<std::size_t> parse_index_list(const std::string& s) {
    std::vector<std::size_t> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ','))
        if (!item.empty()) {
            std::size_t pos = 0;
            const unsigned long v = std::stoul(item, &pos);
            if (pos != item.size()) throw ConfigError("bad activation index '" + item + "'");
            out.push_back(v);
        }
    std::sort(out.begin(), out.end());
    return out;
}

double checked_accuracy(double a, const std::string& id) {
    if (!(a >= 0.0 && a <= 1.0)) throw ConfigError("variant " + id + ": accuracy " + std::to_string(a) + " outside [0,1]");
    return a;
}

}  // namespace

std::string variant_id(const std::vector<std::size_t>& pruned) {
    if (pruned.empty()) return "baseline";
    std::string s = "ap";
    for (std::size_t i = 0; i < pruned.size(); ++i) s += (i ? "," : "-") + std::to_string(pruned[i]);
    return s;
}

TableEvaluator TableEvaluator::from_json(const nlohmann::json& j) {
    TableEvaluator t;
    try {
        if (!j.is_object()) throw ConfigError("accuracy table must be a JSON object");
        if (j.contains("baseline")) t.set({}, j.at("baseline").get<double>());
        if (j.contains("drop_one"))
            for (const auto& [k, v] : j.at("drop_one").items()) t.set(parse_index_list(k), v.get<double>());
        if (j.contains("pruned_sets"))
            for (const auto& [k, v] : j.at("pruned_sets").items()) t.set(parse_index_list(k), v.get<double>());
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("accuracy table: ") + e.what());
    } catch (const std::logic_error& e) {
        throw ConfigError(std::string("accuracy table: ") + e.what());
    }
    return t;
}

TableEvaluator TableEvaluator::from_file(const std::string& path) { return from_json(read_json_file(path)); }

void TableEvaluator::set(const std::vector<std::size_t>& pruned, double acc) {
    auto key = pruned;
    std::sort(key.begin(), key.end());
    table_[key] = checked_accuracy(acc, variant_id(key));
}

double TableEvaluator::evaluate(const ModelSpec&, const std::vector<std::size_t>& pruned) {
    auto key = pruned;
    std::sort(key.begin(), key.end());
    auto it = table_.find(key);
    if (it == table_.end()) throw ConfigError("variant " + variant_id(key) + ": no accuracy in table");
    return it->second;
}

double CommandEvaluator::evaluate(const ModelSpec& variant, const std::vector<std::size_t>& pruned) {
    const std::string id = variant_id(pruned);
    char path[] = "/tmp/hegcn-variant-XXXXXX";
    const int fd = mkstemp(path);
    if (fd < 0) throw ConfigError("variant " + id + ": cannot create temporary file");
    close(fd);
    {
        nlohmann::json j = model_to_json(variant);
        j["variant"] = id;
        j["pruned"] = pruned;
        std::ofstream f(path);
        f << j.dump() << '\n';
    }
    std::string output;
    int status = -1;
    if (FILE* p = popen((command_ + " < " + path).c_str(), "r")) {
        std::array<char, 4096> buf;
        std::size_t n;
        while ((n = fread(buf.data(), 1, buf.size(), p)) > 0) output.append(buf.data(), n);
        status = pclose(p);
    }
    std::remove(path);
    if (status != 0) throw ConfigError("variant " + id + ": evaluator command failed (status " + std::to_string(status) + ")");
    try {
        return checked_accuracy(nlohmann::json::parse(output).at("accuracy").get<double>(), id);
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError("variant " + id + ": bad evaluator output: " + e.what());
    }
}

std::vector<std::size_t> rank_activations(const ModelSpec& spec, AccuracyEvaluator& eval) {
    const std::size_t m = spec.activation_count();
    if (m == 0) throw ConfigError("model has no activation layers");
    std::vector<double> acc(m);
    for (std::size_t i = 0; i < m; ++i) acc[i] = eval.evaluate(spec.with_pruned({i}), {i});
    std::vector<std::size_t> order(m);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) { return acc[a] > acc[b]; });
    return order;
}

nlohmann::json PruneSearch::to_json() const {
    nlohmann::json j;
    j["ranking"] = ranking;
    j["results"] = nlohmann::json::array();
    for (const auto& r : results)
        j["results"].push_back({{"id", r.id},
                                {"pruned", r.pruned},
                                {"accuracy", r.accuracy},
                                {"levels", r.levels},
                                {"poly_degree", r.params.poly_degree},
                                {"modulus_bits", r.params.modulus_bits},
                                {"security_bits", r.params.security_bits}});
    j["best"] = results.at(best).id;
    return j;
}

PruneSearch search(const ModelSpec& spec, AccuracyEvaluator& eval, std::size_t max_prune, const PruneOptions& opts) {
    const std::size_t m = spec.activation_count();
    if (max_prune > m)
        throw ConfigError("max_prune " + std::to_string(max_prune) + " exceeds " + std::to_string(m) + " activations");
    if (spec.pruned_activations().size() != 0) throw ConfigError("baseline model already has pruned activations");
    PruneSearch out;
    out.ranking = max_prune == 0 ? std::vector<std::size_t>{} : rank_activations(spec, eval);
    for (std::size_t i = 0; i <= max_prune; ++i) {
        std::vector<std::size_t> pruned(out.ranking.begin(), out.ranking.begin() + static_cast<long>(i));
        std::sort(pruned.begin(), pruned.end());
        const ModelSpec variant = spec.with_pruned(pruned);
        PruneResult r;
        r.id = variant_id(pruned);
        r.pruned = pruned;
        r.accuracy = eval.evaluate(variant, pruned);
        r.levels = depth(variant);
        r.params = select_params(r.levels, opts.scale_bits, opts.security_bits, opts.policy);
        out.results.push_back(std::move(r));
    }
    const auto& res = out.results;
    std::size_t best = 0;
    for (std::size_t i = 1; i < res.size(); ++i) {
        const auto &a = res[i], &b = res[best];
        if (a.params.poly_degree < b.params.poly_degree ||
            (a.params.poly_degree == b.params.poly_degree && a.accuracy > b.accuracy))
            best = i;
    }
    out.best = best;
    return out;
}

}  // namespace hegcn
