#pragma once

// Analytic HOC formulas, depth and HE parameter selection.
//
// Two formulations coexist. The published closed forms (layer_hoc,
// framework_hoc) are evaluated verbatim from aggregate model parameters. The
// schedule formulation (schedule_hoc) gives exact per-layer counts of the
// engine's operation schedules, derived layer by layer from the model and the
// packing geometry; measured counters must equal it.

#include "hegcn/he_sim.hpp"
#include "hegcn/model.hpp"
#include "hegcn/packing.hpp"

#include <cstddef>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace hegcn {

/// Aggregate parameters of the published formulas. Doubles because V/J and
/// similar ratios need not be integral.
struct HocFormulaInput {
    double B = 1, C = 0, O = 0, T = 0, J = 0, K = 9, U = 1;
    double N_a = 0, N_r = 0;
    double S_p = 0, T_e = 0, A = 0;
    double V = 0, D = 0, C_s = 0;
    double R = 0;        // polynomial degree
    double samples = 1;  // N

    /// Fills U, N_a, N_r and R from the packing geometry:
    /// U = slots / (B * pad), pad = bit_ceil(B * T) / B.
    static HocFormulaInput derive(double B, double C, double O, double T, double J, double K,
                                  std::size_t slot_count, double S_p, double T_e, double A, double V,
                                  double D, double C_s, double samples = 1);
};

/// Aggregate parameters read off a model: C is the widest layer, O the
/// narrowest output width, K the temporal kernel, S_p/T_e/A the layer counts
/// (pruned activations excluded), V and D from the adjacency pattern.
HocFormulaInput formula_input(const ModelSpec& model, std::size_t slot_count, double samples = 1);

struct MatmulHoc {
    std::uint64_t rot = 0, pmult = 0, add = 0;
    friend bool operator==(const MatmulHoc&, const MatmulHoc&) = default;
};

/// Single merged spatial multiplication of a dense J x J matrix over B x C
/// channels (C in, C out, no bias). RowMajor: Rot B*C*(2J-2), PMult
/// B*C*(2J-1)*C, Add PMult - B*C. AMA: Rot B*C*(J/B-1), PMult J*J*(BC/J)*C,
/// Add PMult - B*C. When C < J/B only C blocks carry distinct channels, so U
/// drops to C and the per-joint ciphertext count is clamped to 1.
MatmulHoc matmul_hoc(PackingKind kind, std::size_t B, std::size_t C, std::size_t J);

enum class LayerType { SpatialConv, TemporalConv, Gap, Fc, Activation };
const char* to_string(LayerType t);
LayerType layer_type(const LayerOp& op);

/// Published per-layer-type breakdown, verbatim (aggregated over S_p, T_e, A).
HocCounts layer_hoc(PackingKind kind, LayerType type, const HocFormulaInput& in);

enum class Framework { Chet, FastHear, AmaPublished };
const char* to_string(Framework f);
/// Published model-level totals, verbatim.
HocCounts framework_hoc(Framework f, const HocFormulaInput& in);

struct LayerSchedule {
    std::string label;
    LayerType type = LayerType::SpatialConv;
    HocCounts hoc;
};

/// Exact per-layer counts of run_model's schedule for this model, format and
/// slot count (no evaluation, pure arithmetic over the layouts).
std::vector<LayerSchedule> schedule_hoc(const ModelSpec& model, PackingKind kind, std::size_t slot_count);
HocCounts total_hoc(const std::vector<LayerSchedule>& s);

/// Levels the model needs at encryption: multiplicative depth plus the
/// retained base level; 0 for an empty model.
int depth(const ModelSpec& model);

struct SecurityEntry {
    int log_n = 0;
    int max_q_128 = 0;
    int max_q_80 = 0;
};

/// Largest modulus (bits) per ring degree at each security target.
struct SecurityTable {
    std::vector<SecurityEntry> entries;

    static SecurityTable standard();
    /// Max Q for `log_n` at the given target column (128 or 80).
    int max_q(int log_n, int target_bits) const;
};

struct ParamsPolicy {
    int margin_bits = 33;  // special prime on top of L scaled moduli
    std::vector<int> q_presets{109, 218, 438, 600, 680, 740, 881, 1761};
    SecurityTable table = SecurityTable::standard();
};

struct HeParams {
    std::size_t poly_degree = 0;
    int modulus_bits = 0;
    int scale_bits = 33;
    int levels = 0;
    int security_bits = 0;

    std::size_t slot_count() const { return poly_degree / 2; }
};

/// Q = smallest preset covering L * scale_bits + margin; N = smallest degree
/// whose max Q at the security target admits Q. Throws ParamsError.
HeParams select_params(int levels, int scale_bits = 33, int security_target = 80,
                       const ParamsPolicy& policy = {});

struct ReconcileRow {
    std::string label;
    HocCounts measured;
    HocCounts analytic;
    std::int64_t d_rot = 0, d_pmult = 0, d_cmult = 0, d_add = 0;

    bool exact() const { return d_rot == 0 && d_pmult == 0 && d_cmult == 0 && d_add == 0; }
};

struct ReconcileReport {
    std::vector<ReconcileRow> rows;

    bool exact() const;
    std::string to_string() const;
};

/// Signed per-layer differences (measured - analytic) over the union of labels.
ReconcileReport reconcile(const HocCounter& measured, const std::vector<LayerSchedule>& analytic);
ReconcileReport reconcile(const std::map<std::string, HocCounts>& measured,
                          const std::map<std::string, HocCounts>& analytic);

}  // namespace hegcn
