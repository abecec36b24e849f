#include "hegcn/costmodel.hpp"

#include "hegcn/adjacency.hpp"
#include "hegcn/engine.hpp"
#include "hegcn/errors.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <iomanip>
#include <set>
#include <sstream>

namespace hegcn {

namespace {

std::uint64_t whole(double v) { return v <= 0.0 ? 0 : static_cast<std::uint64_t>(std::llround(v)); }

HocCounts counts(double rot, double pmult, double cmult, double add) {
    HocCounts c;
    c.rot = whole(rot);
    c.pmult = whole(pmult);
    c.cmult = whole(cmult);
    c.add = whole(add);
    c.rescale = c.pmult + c.cmult;
    return c;
}

std::uint64_t log2u(std::size_t v) { return static_cast<std::uint64_t>(std::bit_width(v) - 1); }

}  // namespace

HocFormulaInput HocFormulaInput::derive(double B, double C, double O, double T, double J, double K,
                                        std::size_t slot_count, double S_p, double T_e, double A, double V,
                                        double D, double C_s, double samples) {
    HocFormulaInput in;
    in.B = B;
    in.C = C;
    in.O = O;
    in.T = T;
    in.J = J;
    in.K = K;
    in.S_p = S_p;
    in.T_e = T_e;
    in.A = A;
    in.V = V;
    in.D = D;
    in.C_s = C_s;
    in.samples = samples;
    const auto block = std::bit_ceil(static_cast<std::size_t>(B * T));
    in.U = std::floor(static_cast<double>(slot_count) / static_cast<double>(block));
    in.N_a = J * std::ceil(C / in.U);
    in.N_r = B * C * samples;
    in.R = 2.0 * static_cast<double>(slot_count);
    return in;
}

HocFormulaInput formula_input(const ModelSpec& model, std::size_t slot_count, double samples) {
    model.validate();
    std::size_t widest = model.input.channels, narrowest = 0, K = 1, sp = 0, te = 0, acts = 0, classes = 0;
    for (const auto& l : model.layers) {
        if (const auto* s = std::get_if<SpatialConvLayer>(&l.op)) {
            ++sp;
            widest = std::max(widest, s->out_channels);
            narrowest = narrowest == 0 ? s->out_channels : std::min(narrowest, s->out_channels);
        } else if (const auto* t = std::get_if<TemporalConvLayer>(&l.op)) {
            ++te;
            K = t->kernel;
            widest = std::max(widest, t->out_channels);
            narrowest = narrowest == 0 ? t->out_channels : std::min(narrowest, t->out_channels);
        } else if (const auto* a = std::get_if<ActivationLayer>(&l.op)) {
            if (!a->pruned) ++acts;
        } else if (const auto* f = std::get_if<FullyConnectedLayer>(&l.op)) {
            classes = f->classes;
        }
    }
    const Matrix pattern = model.adjacency.structure();
    auto d = [](auto v) { return static_cast<double>(v); };
    return HocFormulaInput::derive(d(model.input.batch), d(widest), d(narrowest ? narrowest : widest),
                                   d(model.input.frames), d(model.input.joints), d(K), slot_count, d(sp), d(te),
                                   d(acts), d(valid_elements(pattern)), d(nonzero_diagonals(pattern).size()),
                                   d(classes), samples);
}

MatmulHoc matmul_hoc(PackingKind kind, std::size_t B, std::size_t C, std::size_t J) {
    MatmulHoc h;
    if (kind == PackingKind::RowMajor) {
        h.rot = B * C * (2 * J - 2);
        h.pmult = B * C * (2 * J - 1) * C;
        h.add = h.pmult - B * C;
        return h;
    }
    if (B * C >= J) {
        // J * J * (BC / J) * C == J * B * C * C and B * C * (J / B - 1) == C * J - B * C.
        h.rot = B < J ? C * J - B * C : 0;
        h.pmult = J * B * C * C;
        h.add = h.pmult - B * C;
    } else {
        h.rot = J * (C - 1);
        h.pmult = J * J * C;
        h.add = h.pmult - J;
    }
    return h;
}

const char* to_string(LayerType t) {
    switch (t) {
        case LayerType::SpatialConv: return "S-Conv";
        case LayerType::TemporalConv: return "T-Conv";
        case LayerType::Gap: return "GAP";
        case LayerType::Fc: return "FC";
        default: return "Activation";
    }
}

LayerType layer_type(const LayerOp& op) {
    switch (op.index()) {
        case 0: return LayerType::SpatialConv;
        case 1: return LayerType::TemporalConv;
        case 2: return LayerType::Activation;
        case 3: return LayerType::Gap;
        default: return LayerType::Fc;
    }
}

HocCounts layer_hoc(PackingKind kind, LayerType type, const HocFormulaInput& in) {
    const double J = in.J, O = in.O, U = in.U, K = in.K, Na = in.N_a, Nr = in.N_r;
    const double Sp = in.S_p, Te = in.T_e, A = in.A, C = in.C, Cs = in.C_s, N = in.samples;
    if (kind == PackingKind::Ama) {
        switch (type) {
            case LayerType::SpatialConv:
                return counts(J * (Sp + 1) * (O / U) * (U - 1), Na * (in.V / J) * O * Sp, 0,
                              (Na * (in.V / J) * O - Na) * Sp);
            case LayerType::TemporalConv:
                return counts(Na * (K - 1) * (Te + 1) + J * (U - 1) * (O / U) * Sp, Na * O * K * (Te + 1), 0,
                              (Na * O * K - Na) * (Te + 1));
            case LayerType::Gap: return counts(C / U * std::log2(in.T / 2), 0, 0, C / U * (J - 1));
            case LayerType::Fc: return counts(C / U * Cs, C / U * Cs, 0, C / U * Cs);
            case LayerType::Activation: return counts(0, 2 * Na * A, Na * A, 2 * Na * A);
        }
    }
    switch (type) {
        case LayerType::SpatialConv:
            return counts(Nr * (in.D - 1) * Sp, Nr * in.D * C * (Sp + 1), 0, (Nr * O * K - Nr) * (Sp + 1));
        case LayerType::TemporalConv:
            return counts(Nr * (K - 1) * (Te + 1), Nr * K * O * (Te + 1), 0, (Nr * K * O - Nr) * (Te + 1));
        case LayerType::Gap:
            return counts(Nr / N * std::log2(in.R / 2), 0, 0, Nr / N + Nr / N * std::log2(in.R / 2));
        case LayerType::Fc: return counts(Cs, Nr / N * Cs, 0, Nr / N * Cs);
        case LayerType::Activation: return counts(0, Nr * 2 * A, Nr * A, Nr * A);
    }
    return {};
}

const char* to_string(Framework f) {
    switch (f) {
        case Framework::Chet: return "CHET";
        case Framework::FastHear: return "Fast-HEAR";
        default: return "AMA-published";
    }
}

HocCounts framework_hoc(Framework f, const HocFormulaInput& in) {
    const double J = in.J, O = in.O, U = in.U, K = in.K, Na = in.N_a, Nr = in.N_r, D = in.D;
    const double Sp = in.S_p, Te = in.T_e, A = in.A, C = in.C, Cs = in.C_s, N = in.samples;
    const double logR = std::log2(in.R / 2);
    switch (f) {
        case Framework::Chet:
            return counts(Nr * (D - 1) * (Sp + 1) + Nr * (K - 1) * (Te + 2) + Nr * logR + Cs,
                          Nr * D * O * (Sp + 2) + Nr * K * O * (Te + 4) + Nr * 2 * A * 2 + Nr / N * Cs, Nr * A * 2,
                          (Nr * D * O - Nr) * (Sp + 2) + (Nr * K * O - Nr) * (Te + 4) + Nr * A * 2 + Nr / N +
                              Nr / 2 * logR + Nr / N * Cs);
        case Framework::FastHear:
            return counts(Nr * (D - 1) * Sp + Nr * (K - 1) * (Te + 1) + Nr / N * logR + Cs,
                          Nr * D * O * (Sp + 1) + Nr * K * O * (Te + 1) + Nr * 2 * (A + 3) + Nr / N * Cs,
                          Nr * (A + 3),
                          (Nr * O * K - Nr) * (Sp + 1) + (Nr * K * O - Nr) * (Te + 1) + Nr * (A + 3) + Nr / N +
                              Nr / N * logR + Cs * Nr / N);
        case Framework::AmaPublished:
            return counts(J * (Sp + 1 + Te) * (O / U) * (U - 1) + Na * (K - 1) * (Te + 1) + C / U * std::log2(in.T / 2) +
                              C / U * Cs,
                          Na * (in.V / J) * O * Sp + Na * O * K * (Te + 1) + C / U * Cs + 2 * Na * A, Na * A,
                          (Na * (in.V / J) * O - Na) * Sp + (Na * O * K - Na) * (Te + 1) + C / U * (J - 1) +
                              C / U * Cs + 2 * Na * A);
    }
    return {};
}

std::vector<LayerSchedule> schedule_hoc(const ModelSpec& model, PackingKind kind, std::size_t slot_count) {
    model.validate();
    const auto& in = model.input;
    PackingLayout l = kind == PackingKind::Ama
                          ? PackingLayout::ama(in.batch, in.channels, in.frames, in.joints, slot_count)
                          : PackingLayout::row_major(in.batch, in.channels, in.frames, in.joints, slot_count);
    const Matrix pattern = model.adjacency.structure();
    std::vector<std::uint64_t> col_count(in.joints, 0);
    for (std::size_t i = 0; i < in.joints; ++i)
        for (std::size_t k = 0; k < in.joints; ++k)
            if (std::abs(pattern(i, k)) > kZeroThreshold) ++col_count[k];
    const std::uint64_t V = valid_elements(pattern);
    const std::uint64_t cols = static_cast<std::uint64_t>(std::count_if(col_count.begin(), col_count.end(),
                                                                        [](auto n) { return n > 0; }));
    const auto diags = nonzero_diagonals(pattern);
    const std::uint64_t D = diags.size();
    const std::uint64_t Drot = D - static_cast<std::uint64_t>(std::count(diags.begin(), diags.end(), 0L));

    std::vector<LayerSchedule> out;
    for (const auto& layer : model.layers) {
        LayerSchedule s{layer.label, layer_type(layer.op), {}};
        HocCounts& h = s.hoc;
        const std::uint64_t B = l.batch, C = l.channels, J = l.joints;
        std::visit(
            [&](const auto& op) {
                using T = std::decay_t<decltype(op)>;
                if constexpr (std::is_same_v<T, SpatialConvLayer>) {
                    const PackingLayout lo = l.with_channels(op.out_channels);
                    const std::uint64_t O = op.out_channels, bias = op.bias.empty() ? 0 : 1;
                    if (kind == PackingKind::Ama) {
                        const std::uint64_t gi = l.cts_per_joint, go = lo.cts_per_joint, ring = l.channel_ring;
                        h.rot = cols * go * (ring - 1);
                        h.pmult = go * ring * gi * V;
                        h.add = go * (ring * gi * V - cols) + bias * J * go;
                    } else {
                        h.rot = B * C * Drot;
                        h.pmult = B * O * C * D;
                        h.add = B * O * (C * D - 1) + bias * B * O;
                    }
                    l = lo;
                } else if constexpr (std::is_same_v<T, TemporalConvLayer>) {
                    PackingLayout lo = l.with_channels(op.out_channels);
                    lo.time_stride = l.time_stride * op.stride;
                    lo.valid_frames = (l.valid_frames + op.stride - 1) / op.stride;
                    const std::uint64_t O = op.out_channels, K = op.kernel, bias = op.bias.empty() ? 0 : 1;
                    if (kind == PackingKind::Ama) {
                        const std::uint64_t gi = l.cts_per_joint, go = lo.cts_per_joint, ring = l.channel_ring;
                        h.rot = J * gi * (K - 1) + J * go * (ring - 1);
                        h.pmult = J * go * ring * gi * K;
                        h.add = J * go * (ring * gi * K - 1) + bias * J * go;
                    } else {
                        h.rot = B * C * (K - 1);
                        h.pmult = B * O * C * K;
                        h.add = B * O * (C * K - 1) + bias * B * O;
                    }
                    l = lo;
                } else if constexpr (std::is_same_v<T, ActivationLayer>) {
                    if (!op.pruned) {
                        const std::uint64_t n = l.ciphertext_count();
                        h.pmult = 2 * n;
                        h.cmult = n;
                        h.add = 2 * n;
                    }
                } else if constexpr (std::is_same_v<T, GlobalAvgPoolLayer>) {
                    if (kind == PackingKind::Ama) {
                        const std::uint64_t g = l.cts_per_joint, steps = log2u(l.valid_frames);
                        h.rot = g * steps;
                        h.add = g * (J - 1) + g * steps;
                        h.pmult = g;
                    } else {
                        const std::uint64_t n = B * C, steps = log2u(l.slot_count);
                        h.rot = n * steps;
                        h.add = n * steps;
                        h.pmult = n;
                    }
                    l.pooled = true;
                } else {
                    const std::uint64_t Cs = op.classes, bias = op.bias.empty() ? 0 : 1;
                    if (kind == PackingKind::Ama) {
                        const std::uint64_t g = l.cts_per_joint, steps = log2u(l.channel_ring);
                        h.pmult = Cs * g;
                        h.rot = Cs * steps;
                        h.add = Cs * (g - 1 + steps + bias);
                    } else {
                        h.pmult = B * Cs * C;
                        h.add = B * Cs * (C - 1 + bias);
                    }
                }
            },
            layer.op);
        h.rescale = h.pmult + h.cmult;
        out.push_back(std::move(s));
    }
    return out;
}

HocCounts total_hoc(const std::vector<LayerSchedule>& s) {
    HocCounts t;
    for (const auto& l : s) t += l.hoc;
    return t;
}

int depth(const ModelSpec& model) { return required_levels(model); }

SecurityTable SecurityTable::standard() {
    return {{{12, 109, 180}, {13, 218, 360}, {14, 438, 700}, {15, 881, 1400}, {16, 1761, 2800}}};
}

int SecurityTable::max_q(int log_n, int target_bits) const {
    for (const auto& e : entries)
        if (e.log_n == log_n) return target_bits <= 80 ? e.max_q_80 : e.max_q_128;
    return 0;
}

HeParams select_params(int levels, int scale_bits, int security_target, const ParamsPolicy& policy) {
    if (levels < 1) throw ParamsError("levels must be >= 1");
    if (scale_bits < 1) throw ParamsError("scale bits must be >= 1");
    if (security_target > 128)
        throw ParamsError("no security table column for " + std::to_string(security_target) + "-bit security");
    const int needed = levels * scale_bits + policy.margin_bits;
    int q = needed;
    for (int p : policy.q_presets)
        if (p >= needed) {
            q = p;
            break;
        }
    auto entries = policy.table.entries;
    std::sort(entries.begin(), entries.end(), [](const auto& a, const auto& b) { return a.log_n < b.log_n; });
    for (const auto& e : entries) {
        if (policy.table.max_q(e.log_n, security_target) < q) continue;
        HeParams p;
        p.poly_degree = std::size_t{1} << e.log_n;
        p.modulus_bits = q;
        p.scale_bits = scale_bits;
        p.levels = levels;
        p.security_bits = e.max_q_128 >= q ? 128 : 80;
        return p;
    }
    throw ParamsError("no ring degree supports Q=" + std::to_string(q) + " bits at " +
                      std::to_string(security_target) + "-bit security");
}

bool ReconcileReport::exact() const {
    return std::all_of(rows.begin(), rows.end(), [](const auto& r) { return r.exact(); });
}

std::string ReconcileReport::to_string() const {
    std::ostringstream os;
    os << std::left << std::setw(18) << "layer" << std::right << std::setw(10) << "dRot" << std::setw(10)
       << "dPMult" << std::setw(10) << "dCMult" << std::setw(10) << "dAdd" << '\n';
    for (const auto& r : rows)
        os << std::left << std::setw(18) << r.label << std::right << std::setw(10) << r.d_rot << std::setw(10)
           << r.d_pmult << std::setw(10) << r.d_cmult << std::setw(10) << r.d_add << '\n';
    return os.str();
}

ReconcileReport reconcile(const std::map<std::string, HocCounts>& measured,
                          const std::map<std::string, HocCounts>& analytic) {
    std::set<std::string> labels;
    for (const auto& [k, v] : measured) labels.insert(k);
    for (const auto& [k, v] : analytic) labels.insert(k);
    ReconcileReport rep;
    auto get = [](const auto& m, const std::string& k) {
        auto it = m.find(k);
        return it == m.end() ? HocCounts{} : it->second;
    };
    auto diff = [](std::uint64_t a, std::uint64_t b) {
        return static_cast<std::int64_t>(a) - static_cast<std::int64_t>(b);
    };
    for (const auto& k : labels) {
        ReconcileRow r{k, get(measured, k), get(analytic, k)};
        r.d_rot = diff(r.measured.rot, r.analytic.rot);
        r.d_pmult = diff(r.measured.pmult, r.analytic.pmult);
        r.d_cmult = diff(r.measured.cmult, r.analytic.cmult);
        r.d_add = diff(r.measured.add, r.analytic.add);
        rep.rows.push_back(std::move(r));
    }
    return rep;
}

ReconcileReport reconcile(const HocCounter& measured, const std::vector<LayerSchedule>& analytic) {
    std::map<std::string, HocCounts> a;
    for (const auto& l : analytic) a[l.label] += l.hoc;
    return reconcile(measured.per_layer(), a);
}

}  // namespace hegcn
