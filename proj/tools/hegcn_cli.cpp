// hegcn: encrypted ST-GCN inference on the HE simulator, HOC reports,
// parameter selection and activation-pruning search.

#include "hegcn/costmodel.hpp"
#include "hegcn/engine.hpp"
#include "hegcn/errors.hpp"
#include "hegcn/io.hpp"
#include "hegcn/prune.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <optional>
#include <random>
#include <sstream>

using namespace hegcn;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitDepth = 3;
constexpr int kExitParams = 4;

struct Options {
    std::string model;
    std::string input;
    std::optional<std::uint64_t> seed;
    std::string format = "ama";
    std::optional<std::size_t> batch;
    std::optional<int> levels;
    int security_bits = 80;
    std::optional<std::size_t> poly_degree;
    std::size_t max_prune = 2;
    std::string stub;
    std::string evaluator;
    std::string out;
    std::string formula = "schedule";
    bool measure = false;
    bool sweep = false;
    std::string dims;
};

unsigned thread_count() {
    if (const char* v = std::getenv("HEGCN_THREADS")) {
        const long n = std::strtol(v, nullptr, 10);
        if (n > 0) return static_cast<unsigned>(n);
    }
    return 1;
}

std::vector<PackingKind> formats(const std::string& f) {
    if (f == "ama") return {PackingKind::Ama};
    if (f == "rowmajor") return {PackingKind::RowMajor};
    if (f == "both") return {PackingKind::Ama, PackingKind::RowMajor};
    throw ConfigError("unknown format '" + f + "'");
}

ModelSpec model_of(const Options& o) {
    if (o.model.empty()) throw ConfigError("--model is required");
    ModelSpec m = load_model(o.model);
    if (o.batch) {
        if (*o.batch == 0) throw ConfigError("--batch must be positive");
        m.input.batch = *o.batch;
    }
    return m;
}

GraphTensor input_of(const Options& o, const ModelSpec& m) {
    if (!o.input.empty() && o.seed) throw ConfigError("--input and --seed are exclusive");
    if (!o.input.empty()) return read_tensor(o.input);
    std::mt19937_64 rng(o.seed.value_or(1));
    return GraphTensor::random(m.input.batch, m.input.channels, m.input.frames, m.input.joints, rng);
}

HeParams params_for(const Options& o, int levels) {
    HeParams p = select_params(levels, 33, o.security_bits);
    if (o.poly_degree) {
        if (!std::has_single_bit(*o.poly_degree) || *o.poly_degree < 2)
            throw ConfigError("--poly-degree must be a power of two");
        p.poly_degree = *o.poly_degree;
    }
    return p;
}

fs::path out_dir(const Options& o) {
    fs::path d = o.out.empty() ? fs::path(".") : fs::path(o.out);
    fs::create_directories(d);
    return d;
}

json params_json(const HeParams& p) {
    return {{"poly_degree", p.poly_degree}, {"log_n", std::bit_width(p.poly_degree) - 1},
            {"modulus_bits", p.modulus_bits}, {"scale_bits", p.scale_bits},
            {"levels", p.levels},           {"security_bits", p.security_bits},
            {"slot_count", p.slot_count()}};
}

json matrix_json(const Matrix& m) {
    json rows = json::array();
    for (std::size_t r = 0; r < m.rows(); ++r) {
        json row = json::array();
        for (std::size_t c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
        rows.push_back(row);
    }
    return rows;
}

void write_hoc_rows(std::ostream& os, const std::string& format, const std::vector<std::pair<std::string, HocCounts>>& rows) {
    for (const auto& [label, h] : rows) {
        os << label << ",rot," << format << ',' << h.rot << '\n';
        os << label << ",pmult," << format << ',' << h.pmult << '\n';
        os << label << ",cmult," << format << ',' << h.cmult << '\n';
        os << label << ",add," << format << ',' << h.add << '\n';
        os << label << ",rescale," << format << ',' << h.rescale << '\n';
    }
}

std::vector<std::pair<std::string, HocCounts>> rows_of(const std::vector<LayerSchedule>& s) {
    std::vector<std::pair<std::string, HocCounts>> rows;
    for (const auto& l : s) rows.emplace_back(l.label, l.hoc);
    rows.emplace_back("total", total_hoc(s));
    return rows;
}

int cmd_infer(const Options& o) {
    const ModelSpec m = model_of(o);
    const GraphTensor x = input_of(o, m);
    const int required = depth(m);
    const int levels = o.levels.value_or(required);
    const HeParams p = params_for(o, std::max(levels, 1));
    SimContext ctx;
    ctx.slot_count = p.slot_count();
    ctx.max_level = levels - 1;
    ctx.scale_bits = p.scale_bits;

    const fs::path dir = out_dir(o);
    const Matrix reference = plaintext_reference(m, x);
    json scores = json::object(), level_trace = json::object();
    std::ofstream hoc(dir / "hoc.csv");
    hoc << "layer,op,format,count\n";
    std::optional<Matrix> first;
    double cross = 0.0;
    for (auto kind : formats(o.format)) {
        RunOptions ro;
        ro.threads = thread_count();
        const RunResult r = run_model(m, x, kind, ctx, ro);
        double err = 0.0;
        for (std::size_t b = 0; b < reference.rows(); ++b)
            for (std::size_t k = 0; k < reference.cols(); ++k)
                err = std::max(err, std::abs(r.scores(b, k) - reference(b, k)));
        scores[to_string(kind)] = {{"scores", matrix_json(r.scores)}, {"max_abs_error_vs_plaintext", err}};
        std::vector<std::pair<std::string, HocCounts>> rows;
        for (const auto& step : r.levels) rows.emplace_back(step.layer, r.hoc.layer(step.layer));
        rows.emplace_back("total", r.hoc.total());
        write_hoc_rows(hoc, to_string(kind), rows);
        json trace = json::array();
        for (const auto& s : r.levels)
            trace.push_back({{"layer", s.layer}, {"level_before", s.level_before}, {"level_after", s.level_after}});
        level_trace[to_string(kind)] = {{"trace", trace}, {"consumed", r.levels_consumed()}};
        if (first) {
            for (std::size_t b = 0; b < first->rows(); ++b)
                for (std::size_t k = 0; k < first->cols(); ++k)
                    cross = std::max(cross, std::abs((*first)(b, k) - r.scores(b, k)));
        } else {
            first = r.scores;
        }
        std::cout << to_string(kind) << ": total HOC " << r.hoc.total().total() << " (" << r.hoc.total()
                  << "), max |error| vs plaintext " << err << '\n';
    }
    if (o.format == "both") {
        scores["equivalence"] = {{"max_abs_diff", cross}, {"within_1e-9", cross <= 1e-9}};
        std::cout << "ama vs rowmajor max |diff| " << cross << '\n';
    }
    write_json_file((dir / "scores.json").string(), scores);
    write_json_file((dir / "levels.json").string(), {{"required_levels", required},
                                                     {"multiplicative_depth", multiplicative_depth(m)},
                                                     {"params", params_json(p)},
                                                     {"formats", level_trace}});
    return 0;
}

int cmd_params(const Options& o) {
    int levels = 0;
    if (o.levels) levels = *o.levels;
    else if (!o.model.empty()) levels = depth(model_of(o));
    else throw ConfigError("params needs --levels or --model");
    const HeParams p = select_params(levels, 33, o.security_bits);
    std::cout << params_json(p).dump(2) << '\n';
    return 0;
}

std::size_t slots_for(const Options& o, const ModelSpec& m) {
    return params_for(o, std::max(depth(m), 1)).slot_count();
}

int cmd_hoc(const Options& o) {
    const ModelSpec m = model_of(o);
    const std::size_t slots = slots_for(o, m);
    std::ostringstream csv;
    csv << "layer,op,format,count\n";
    for (auto kind : formats(o.format)) {
        if (o.formula == "published") {
            const auto in = formula_input(m, slots);
            std::vector<std::pair<std::string, HocCounts>> rows;
            for (auto t : {LayerType::SpatialConv, LayerType::TemporalConv, LayerType::Gap, LayerType::Fc,
                           LayerType::Activation})
                rows.emplace_back(to_string(t), layer_hoc(kind, t, in));
            write_hoc_rows(csv, to_string(kind), rows);
        } else if (o.measure) {
            SimContext ctx;
            ctx.slot_count = slots;
            ctx.max_level = depth(m) - 1;
            RunOptions ro;
            ro.threads = thread_count();
            const auto x = input_of(o, m);
            const RunResult r = run_model(m, x, kind, ctx, ro);
            std::vector<std::pair<std::string, HocCounts>> rows;
            for (const auto& step : r.levels) rows.emplace_back(step.layer, r.hoc.layer(step.layer));
            rows.emplace_back("total", r.hoc.total());
            write_hoc_rows(csv, to_string(kind), rows);
        } else if (o.formula == "schedule") {
            write_hoc_rows(csv, to_string(kind), rows_of(schedule_hoc(m, kind, slots)));
        } else {
            throw ConfigError("unknown formula '" + o.formula + "'");
        }
    }
    if (o.out.empty()) std::cout << csv.str();
    else {
        fs::path p(o.out);
        if (p.has_parent_path()) fs::create_directories(p.parent_path());
        std::ofstream(p) << csv.str();
    }
    return 0;
}

std::string pct(double v) {
    std::ostringstream s;
    s << std::fixed << std::setprecision(1) << v * 100.0 << '%';
    return s.str();
}

int cmd_compare(const Options& o) {
    const ModelSpec m = model_of(o);
    const std::size_t slots = slots_for(o, m);
    const auto in = formula_input(m, slots);
    const HocCounts ama = total_hoc(schedule_hoc(m, PackingKind::Ama, slots));
    const HocCounts rm = total_hoc(schedule_hoc(m, PackingKind::RowMajor, slots));
    const HocCounts chet = framework_hoc(Framework::Chet, in);
    const HocCounts fhear = framework_hoc(Framework::FastHear, in);
    const HocCounts published = framework_hoc(Framework::AmaPublished, in);

    json rep;
    auto row = [&](const std::string& name, const HocCounts& h) {
        std::cout << std::left << std::setw(26) << name << std::right << std::setw(10) << h.rot << std::setw(10)
                  << h.cmult << std::setw(12) << h.pmult << std::setw(12) << h.add << std::setw(12) << h.total()
                  << '\n';
        rep["rows"][name] = {{"rot", h.rot}, {"cmult", h.cmult}, {"pmult", h.pmult}, {"add", h.add}, {"total", h.total()}};
    };
    std::cout << "slots " << slots << ", U " << in.U << ", N_a " << in.N_a << ", N_r " << in.N_r << ", V " << in.V
              << ", D " << in.D << ", K " << in.K << ", A " << in.A << '\n';
    std::cout << std::left << std::setw(26) << "method" << std::right << std::setw(10) << "Rot" << std::setw(10)
              << "CMult" << std::setw(12) << "PMult" << std::setw(12) << "Add" << std::setw(12) << "Total" << '\n';
    row("AMA (schedule)", ama);
    row("row-major (schedule)", rm);
    row("CHET (closed form)", chet);
    row("Fast-HEAR (closed form)", fhear);
    row("AMA (published form)", published);
    auto reduction = [](const HocCounts& a, const HocCounts& b) {
        return 1.0 - static_cast<double>(a.total()) / static_cast<double>(b.total());
    };
    const double pa = static_cast<double>(ama.pmult + ama.add), pr = static_cast<double>(rm.pmult + rm.add);
    std::cout << "AMA vs row-major total reduction: " << pct(reduction(ama, rm)) << '\n'
              << "AMA vs CHET total reduction: " << pct(reduction(ama, chet)) << '\n'
              << "AMA vs Fast-HEAR total reduction: " << pct(reduction(ama, fhear)) << '\n'
              << "AMA/row-major PMult+Add: " << pa / pr << '\n';
    rep["reduction_vs_rowmajor"] = reduction(ama, rm);
    rep["reduction_vs_chet"] = reduction(ama, chet);
    rep["reduction_vs_fast_hear"] = reduction(ama, fhear);
    rep["pmult_add_ratio"] = pa / pr;

    if (o.sweep) {
        std::cout << "\nbatch  AMA/sample  row-major/sample\n";
        for (std::size_t b : {1, 2, 4, 8, 16}) {
            ModelSpec mb = m;
            mb.input.batch = b;
            try {
                const double a = static_cast<double>(total_hoc(schedule_hoc(mb, PackingKind::Ama, slots)).total()) / b;
                const double r =
                    static_cast<double>(total_hoc(schedule_hoc(mb, PackingKind::RowMajor, slots)).total()) / b;
                std::cout << std::setw(5) << b << std::setw(12) << a << std::setw(18) << r << '\n';
                rep["sweep"].push_back({{"batch", b}, {"ama_per_sample", a}, {"rowmajor_per_sample", r}});
            } catch (const ShapeError& e) {
                std::cout << std::setw(5) << b << "  does not fit: " << e.what() << '\n';
            }
        }
    }
    if (!o.out.empty()) write_json_file((out_dir(o) / "compare.json").string(), rep);
    return 0;
}

int cmd_prune(const Options& o) {
    const ModelSpec m = model_of(o);
    std::unique_ptr<AccuracyEvaluator> eval;
    if (!o.stub.empty() == !o.evaluator.empty()) throw ConfigError("prune needs exactly one of --stub or --evaluator");
    if (!o.stub.empty()) eval = std::make_unique<TableEvaluator>(TableEvaluator::from_file(o.stub));
    else eval = std::make_unique<CommandEvaluator>(o.evaluator);
    PruneOptions po;
    po.security_bits = o.security_bits;
    const PruneSearch s = search(m, *eval, o.max_prune, po);
    for (const auto& r : s.results)
        std::cout << std::left << std::setw(16) << r.id << " acc " << std::fixed << std::setprecision(4) << r.accuracy
                  << "  levels " << r.levels << "  N 2^" << std::bit_width(r.params.poly_degree) - 1 << "  Q "
                  << r.params.modulus_bits << '\n';
    std::cout << "selected: " << s.results[s.best].id << '\n';
    if (!o.out.empty()) write_json_file((out_dir(o) / "prune.json").string(), s.to_json());
    return 0;
}

int cmd_pack(const Options& o) {
    GraphTensor x;
    if (!o.input.empty()) {
        x = read_tensor(o.input);
    } else {
        std::vector<std::size_t> d;
        std::stringstream ss(o.dims);
        std::string item;
        while (std::getline(ss, item, ',')) d.push_back(std::stoul(item));
        if (d.size() != 4) throw ConfigError("--dims expects B,C,T,J");
        std::mt19937_64 rng(o.seed.value_or(1));
        x = GraphTensor::random(d[0], d[1], d[2], d[3], rng);
    }
    SimContext ctx;
    ctx.slot_count = o.poly_degree ? *o.poly_degree / 2 : 8192;
    json rep = json::object();
    for (auto kind : formats(o.format)) {
        const auto packed = pack(x, kind, ctx);
        const auto back = unpack(packed.cts, packed.layout);
        rep[to_string(kind)] = packed.layout.to_json();
        rep[to_string(kind)]["roundtrip_max_abs_diff"] = max_abs_diff(x, back);
    }
    std::cout << rep.dump(2) << '\n';
    if (!o.out.empty()) write_json_file((out_dir(o) / "layout.json").string(), rep);
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Encrypted ST-GCN inference on a leveled-HE simulator"};
    app.require_subcommand(1);
    Options o;

    auto common = [&](CLI::App* c) {
        c->add_option("--model", o.model, "model JSON");
        c->add_option("--batch", o.batch, "override the model batch size");
        c->add_option("--security-bits", o.security_bits, "security target (80 or 128)");
        c->add_option("--poly-degree", o.poly_degree, "override the ring degree N");
        c->add_option("--out", o.out, "output directory (hoc: CSV file)");
    };
    auto input = [&](CLI::App* c) {
        c->add_option("--input", o.input, "input tensor file");
        c->add_option("--seed", o.seed, "seed for a random input");
        c->add_option("--format", o.format, "ama, rowmajor or both");
    };

    auto* infer = app.add_subcommand("infer", "run encrypted inference");
    common(infer);
    input(infer);
    infer->add_option("--levels", o.levels, "modulus chain length (default: model depth)");

    auto* compare = app.add_subcommand("compare", "compare AMA, row-major and published HOC rows");
    common(compare);
    compare->add_flag("--sweep", o.sweep, "amortized HOC over batch sizes 1..16");

    auto* params = app.add_subcommand("params", "select HE parameters");
    common(params);
    params->add_option("--levels", o.levels, "levels to support");

    auto* prune = app.add_subcommand("prune", "activation pruning search");
    common(prune);
    prune->add_option("--max-prune", o.max_prune, "largest number of pruned activations");
    prune->add_option("--stub", o.stub, "accuracy table JSON");
    prune->add_option("--evaluator", o.evaluator, "command scoring a variant read from stdin");

    auto* hoc = app.add_subcommand("hoc", "per-layer HOC as CSV (layer,op,format,count)");
    common(hoc);
    input(hoc);
    hoc->add_option("--formula", o.formula, "schedule (exact per layer) or published (closed forms)");
    hoc->add_flag("--measure", o.measure, "run the engine and report measured counters");

    auto* packc = app.add_subcommand("pack", "show the packing layout of a tensor");
    common(packc);
    input(packc);
    packc->add_option("--dims", o.dims, "B,C,T,J of a random tensor");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitConfig;
    }

    try {
        if (*infer) return cmd_infer(o);
        if (*compare) return cmd_compare(o);
        if (*params) return cmd_params(o);
        if (*prune) return cmd_prune(o);
        if (*hoc) return cmd_hoc(o);
        if (*packc) return cmd_pack(o);
    } catch (const DepthBudgetError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitDepth;
    } catch (const LevelError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitDepth;
    } catch (const ParamsError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitParams;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitConfig;
    }
    return kExitConfig;
}
