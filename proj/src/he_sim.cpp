#include "hegcn/he_sim.hpp"

#include "hegcn/errors.hpp"

#include <json.hpp>

#include <algorithm>
#include <atomic>
#include <bit>
#include <cmath>
#include <istream>
#include <ostream>

namespace hegcn {

namespace {

std::uint64_t next_id() {
    static std::atomic<std::uint64_t> counter{1};
    return counter.fetch_add(1, std::memory_order_relaxed);
}

}  // namespace

void SimContext::validate() const {
    if (slot_count == 0 || !std::has_single_bit(slot_count))
        throw ShapeError("slot_count must be a power of two, got " + std::to_string(slot_count));
    if (max_level < 0) throw ShapeError("max_level must be non-negative");
    if (scale_bits <= 0 || scale_bits > 60) throw ShapeError("scale_bits out of range");
}

double SimContext::round_to_scale(double v) const {
    const double scale = std::ldexp(1.0, scale_bits);
    return std::round(v * scale) / scale;
}

const char* to_string(HeOp op) {
    switch (op) {
        case HeOp::Rot: return "rot";
        case HeOp::PMult: return "pmult";
        case HeOp::CMult: return "cmult";
        case HeOp::Add: return "add";
        case HeOp::Rescale: return "rescale";
        case HeOp::ModSwitch: return "mod_switch";
    }
    return "?";
}

std::optional<HeOp> parse_he_op(std::string_view name) {
    for (HeOp op : {HeOp::Rot, HeOp::PMult, HeOp::CMult, HeOp::Add, HeOp::Rescale, HeOp::ModSwitch})
        if (name == to_string(op)) return op;
    return std::nullopt;
}

HocCounts& HocCounts::operator+=(const HocCounts& o) {
    rot += o.rot;
    pmult += o.pmult;
    cmult += o.cmult;
    add += o.add;
    rescale += o.rescale;
    return *this;
}

std::ostream& operator<<(std::ostream& os, const HocCounts& c) {
    return os << "{rot=" << c.rot << ", pmult=" << c.pmult << ", cmult=" << c.cmult
              << ", add=" << c.add << ", rescale=" << c.rescale << "}";
}

namespace {

void bump(HocCounts& c, HeOp op, std::uint64_t n) {
    switch (op) {
        case HeOp::Rot: c.rot += n; break;
        case HeOp::PMult: c.pmult += n; break;
        case HeOp::CMult: c.cmult += n; break;
        case HeOp::Add: c.add += n; break;
        case HeOp::Rescale: c.rescale += n; break;
        case HeOp::ModSwitch: break;
    }
}

}  // namespace

void HocCounter::record(const std::string& layer, HeOp op, std::uint64_t n) {
    if (op == HeOp::ModSwitch) return;
    bump(total_, op, n);
    bump(per_layer_[layer], op, n);
}

void HocCounter::merge(const HocCounter& other) {
    total_ += other.total_;
    for (const auto& [label, counts] : other.per_layer_) per_layer_[label] += counts;
}

HocCounts HocCounter::layer(const std::string& label) const {
    auto it = per_layer_.find(label);
    return it == per_layer_.end() ? HocCounts{} : it->second;
}

void write_op_log(std::ostream& os, std::span<const OpRecord> log) {
    for (const auto& r : log) {
        nlohmann::ordered_json j;
        j["op"] = to_string(r.op);
        j["layer"] = r.layer;
        j["level_before"] = r.level_before;
        j["level_after"] = r.level_after;
        if (r.rotation) j["rotation_amount"] = *r.rotation;
        os << j.dump() << '\n';
    }
}

std::vector<OpRecord> read_op_log(std::istream& is) {
    std::vector<OpRecord> out;
    std::string line;
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        auto j = nlohmann::json::parse(line);
        auto op = parse_he_op(j.at("op").get<std::string>());
        if (!op) throw ConfigError("unknown op in log: " + line);
        OpRecord r{*op, j.at("layer").get<std::string>(), j.at("level_before").get<int>(),
                   j.at("level_after").get<int>(), std::nullopt};
        if (j.contains("rotation_amount")) r.rotation = j["rotation_amount"].get<long>();
        out.push_back(std::move(r));
    }
    return out;
}

HocCounter replay(std::span<const OpRecord> log) {
    HocCounter c;
    for (const auto& r : log) c.record(r.layer, r.op);
    return c;
}

Evaluator::Evaluator(SimContext ctx, bool keep_log) : ctx_(ctx), keep_log_(keep_log) {
    ctx_.validate();
}

void Evaluator::note(HeOp op, int before, int after, std::optional<long> rot) {
    counter_.record(layer_, op);
    if (keep_log_) log_.push_back({op, layer_, before, after, rot});
}

void Evaluator::check_slots(std::size_t n) const {
    if (n != ctx_.slot_count)
        throw ShapeError("slot vector length " + std::to_string(n) + " != slot_count " +
                         std::to_string(ctx_.slot_count));
}

void Evaluator::quantize_inplace(std::vector<double>& v) const {
    if (!ctx_.quantize) return;
    for (double& x : v) x = ctx_.round_to_scale(x);
}

SimCiphertext Evaluator::encrypt(std::span<const double> values) const {
    return encrypt_at(values, ctx_.max_level);
}

SimCiphertext Evaluator::encrypt_at(std::span<const double> values, int level) const {
    if (values.size() > ctx_.slot_count)
        throw ShapeError("cannot encrypt " + std::to_string(values.size()) + " values into " +
                         std::to_string(ctx_.slot_count) + " slots");
    if (level < 0 || level > ctx_.max_level) throw LevelError("encryption level out of range");
    SimCiphertext ct;
    ct.slots.assign(ctx_.slot_count, 0.0);
    std::copy(values.begin(), values.end(), ct.slots.begin());
    quantize_inplace(ct.slots);
    ct.level = level;
    ct.id = next_id();
    return ct;
}

SimCiphertext Evaluator::add(const SimCiphertext& a, const SimCiphertext& b) {
    SimCiphertext out = a;
    add_inplace(out, b);
    out.id = next_id();
    return out;
}

void Evaluator::add_inplace(SimCiphertext& acc, const SimCiphertext& x) {
    if (acc.level != x.level)
        throw LevelError("level mismatch: " + std::to_string(acc.level) + " vs " +
                         std::to_string(x.level));
    check_slots(acc.slots.size());
    check_slots(x.slots.size());
    for (std::size_t i = 0; i < acc.slots.size(); ++i) acc.slots[i] += x.slots[i];
    note(HeOp::Add, acc.level, acc.level);
}

SimCiphertext Evaluator::add_plain(const SimCiphertext& ct, std::span<const double> pt) {
    if (pt.size() > ctx_.slot_count) throw ShapeError("plaintext longer than slot_count");
    SimCiphertext out = ct;
    for (std::size_t i = 0; i < pt.size(); ++i)
        out.slots[i] += ctx_.quantize ? ctx_.round_to_scale(pt[i]) : pt[i];
    out.id = next_id();
    note(HeOp::Add, ct.level, ct.level);
    return out;
}

SimCiphertext Evaluator::pmult(const SimCiphertext& ct, std::span<const double> pt) {
    if (ct.level < 1) throw LevelError("level exhausted: pmult needs level >= 1");
    if (pt.size() > ctx_.slot_count) throw ShapeError("plaintext longer than slot_count");
    SimCiphertext out;
    out.slots.assign(ctx_.slot_count, 0.0);
    for (std::size_t i = 0; i < pt.size(); ++i) {
        const double w = ctx_.quantize ? ctx_.round_to_scale(pt[i]) : pt[i];
        out.slots[i] = ct.slots[i] * w;
    }
    quantize_inplace(out.slots);
    out.level = ct.level - 1;
    out.id = next_id();
    note(HeOp::PMult, ct.level, out.level);
    note(HeOp::Rescale, ct.level, out.level);
    return out;
}

SimCiphertext Evaluator::pmult(const SimCiphertext& ct, double scalar) {
    std::vector<double> pt(ctx_.slot_count, scalar);
    return pmult(ct, pt);
}

SimCiphertext Evaluator::cmult(const SimCiphertext& a, const SimCiphertext& b) {
    if (a.level != b.level)
        throw LevelError("level mismatch: " + std::to_string(a.level) + " vs " +
                         std::to_string(b.level));
    if (a.level < 1) throw LevelError("level exhausted: cmult needs level >= 1");
    SimCiphertext out;
    out.slots.resize(ctx_.slot_count);
    for (std::size_t i = 0; i < out.slots.size(); ++i) out.slots[i] = a.slots[i] * b.slots[i];
    quantize_inplace(out.slots);
    out.level = a.level - 1;
    out.id = next_id();
    note(HeOp::CMult, a.level, out.level);
    note(HeOp::Rescale, a.level, out.level);
    return out;
}

SimCiphertext Evaluator::rotate(const SimCiphertext& ct, long k) {
    const long n = static_cast<long>(ct.slots.size());
    const long shift = ((k % n) + n) % n;
    SimCiphertext out;
    out.level = ct.level;
    out.id = next_id();
    if (shift == 0) {
        out.slots = ct.slots;
        return out;
    }
    out.slots.resize(ct.slots.size());
    std::rotate_copy(ct.slots.begin(), ct.slots.begin() + shift, ct.slots.end(), out.slots.begin());
    note(HeOp::Rot, ct.level, ct.level, k);
    return out;
}

SimCiphertext Evaluator::mod_switch(const SimCiphertext& ct, int target_level) {
    if (target_level > ct.level)
        throw LevelError("mod_switch target " + std::to_string(target_level) +
                         " above current level " + std::to_string(ct.level));
    if (target_level < 0) throw LevelError("mod_switch target below zero");
    SimCiphertext out = ct;
    out.level = target_level;
    out.id = next_id();
    if (target_level != ct.level && keep_log_)
        log_.push_back({HeOp::ModSwitch, layer_, ct.level, target_level, std::nullopt});
    return out;
}

Evaluator Evaluator::fork() const {
    Evaluator child(ctx_, keep_log_);
    child.layer_ = layer_;
    return child;
}

void Evaluator::absorb(Evaluator&& child) {
    counter_.merge(child.counter_);
    if (keep_log_)
        log_.insert(log_.end(), std::make_move_iterator(child.log_.begin()),
                    std::make_move_iterator(child.log_.end()));
}

}  // namespace hegcn
