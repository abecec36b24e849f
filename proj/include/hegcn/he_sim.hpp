#pragma once

// Semantics-only simulator of a leveled CKKS-style scheme. Ciphertexts are
// plain slot vectors carrying a level; every operation is counted so encrypted
// schedules can be costed in homomorphic operations (HOC).

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace hegcn {

struct SimContext {
    std::size_t slot_count = 4096;  // N/2
    int max_level = 0;
    int scale_bits = 33;
    bool quantize = false;  // round to the 2^-scale_bits grid like fixed-point encoding

    void validate() const;
    double round_to_scale(double v) const;
};

struct SimCiphertext {
    std::vector<double> slots;
    int level = 0;
    std::uint64_t id = 0;
};

enum class HeOp { Rot, PMult, CMult, Add, Rescale, ModSwitch };

const char* to_string(HeOp op);
std::optional<HeOp> parse_he_op(std::string_view name);

/// The five HOC counters.
struct HocCounts {
    std::uint64_t rot = 0;
    std::uint64_t pmult = 0;
    std::uint64_t cmult = 0;
    std::uint64_t add = 0;
    std::uint64_t rescale = 0;

    /// Rot + PMult + CMult + Add; rescales ride along with multiplications.
    std::uint64_t total() const { return rot + pmult + cmult + add; }

    HocCounts& operator+=(const HocCounts& o);
    friend HocCounts operator+(HocCounts a, const HocCounts& b) { return a += b; }
    friend bool operator==(const HocCounts&, const HocCounts&) = default;
};

std::ostream& operator<<(std::ostream& os, const HocCounts& c);

class HocCounter {
public:
    void record(const std::string& layer, HeOp op, std::uint64_t n = 1);
    void merge(const HocCounter& other);

    const HocCounts& total() const { return total_; }
    const std::map<std::string, HocCounts>& per_layer() const { return per_layer_; }
    HocCounts layer(const std::string& label) const;

    friend bool operator==(const HocCounter&, const HocCounter&) = default;

private:
    HocCounts total_;
    std::map<std::string, HocCounts> per_layer_;
};

struct OpRecord {
    HeOp op = HeOp::Add;
    std::string layer;
    int level_before = 0;
    int level_after = 0;
    std::optional<long> rotation;
};

void write_op_log(std::ostream& os, std::span<const OpRecord> log);
std::vector<OpRecord> read_op_log(std::istream& is);
HocCounter replay(std::span<const OpRecord> log);

/// Executes homomorphic operations on simulated ciphertexts and accounts for
/// them. Not thread-safe; use fork()/absorb() to evaluate independent work on
/// several threads and merge the counters deterministically.
class Evaluator {
public:
    explicit Evaluator(SimContext ctx, bool keep_log = false);

    const SimContext& context() const { return ctx_; }
    std::size_t slot_count() const { return ctx_.slot_count; }

    void set_layer(std::string label) { layer_ = std::move(label); }
    const std::string& layer() const { return layer_; }

    SimCiphertext encrypt(std::span<const double> values) const;
    SimCiphertext encrypt_at(std::span<const double> values, int level) const;
    std::vector<double> decrypt(const SimCiphertext& ct) const { return ct.slots; }

    SimCiphertext add(const SimCiphertext& a, const SimCiphertext& b);
    /// acc += x, counted as one Add.
    void add_inplace(SimCiphertext& acc, const SimCiphertext& x);
    /// Ciphertext-plaintext addition; counted as Add, consumes no level.
    SimCiphertext add_plain(const SimCiphertext& ct, std::span<const double> pt);
    SimCiphertext pmult(const SimCiphertext& ct, std::span<const double> pt);
    SimCiphertext pmult(const SimCiphertext& ct, double scalar);
    SimCiphertext cmult(const SimCiphertext& a, const SimCiphertext& b);
    SimCiphertext rotate(const SimCiphertext& ct, long k);
    SimCiphertext mod_switch(const SimCiphertext& ct, int target_level);

    Evaluator fork() const;
    void absorb(Evaluator&& child);

    const HocCounter& counter() const { return counter_; }
    const std::vector<OpRecord>& log() const { return log_; }
    bool keeps_log() const { return keep_log_; }

private:
    void note(HeOp op, int before, int after, std::optional<long> rot = std::nullopt);
    void check_slots(std::size_t n) const;
    void quantize_inplace(std::vector<double>& v) const;

    SimContext ctx_;
    bool keep_log_;
    std::string layer_ = "default";
    HocCounter counter_;
    std::vector<OpRecord> log_;
};

}  // namespace hegcn
