#pragma once

// Graph adjacency handling for the spatial convolution: normalization,
// folding of the 1x1 convolution and batch-norm into per-channel-pair J x J
// matrices, and decomposition into matrices with at most one nonzero per
// column.

#include <cstddef>
#include <optional>
#include <span>
#include <utility>
#include <vector>

namespace hegcn {

class Matrix {
public:
    Matrix() = default;
    Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
        : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

    static Matrix identity(std::size_t n);

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }
    double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
    double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }
    const std::vector<double>& data() const { return data_; }

    Matrix transposed() const;
    Matrix& operator+=(const Matrix& o);
    friend bool operator==(const Matrix&, const Matrix&) = default;

private:
    std::size_t rows_ = 0, cols_ = 0;
    std::vector<double> data_;
};

/// |a| above this counts as a valid (structural) element.
inline constexpr double kZeroThreshold = 1e-12;

/// D^{-1/2} (A + I) D^{-1/2}, D the row-degree matrix of A + I.
Matrix normalize(const Matrix& adj);

/// Raw 0/1 adjacency per partition (self-loops are added by normalize).
struct AdjacencySet {
    std::size_t joints = 0;
    std::vector<Matrix> partitions;

    std::vector<Matrix> normalized() const;
    /// 0/1 pattern of the merged spatial matrix, oriented (input joint, output joint).
    Matrix structure() const;
};

/// Reconstructed 25-joint skeleton-like graph: joint numbering follows the
/// NTU RGB+D convention, but branching bones are cut so no joint has more than
/// two neighbours (at most three nonzeros per column with the self-loop), and
/// two bridging edges connect the resulting chains. Its merged pattern has 19
/// nonzero diagonals. It is a stand-in, not the dataset graph.
AdjacencySet skeleton_standin();
std::vector<std::pair<std::size_t, std::size_t>> skeleton_standin_edges();

struct BatchNorm {
    std::vector<double> gamma, beta, mean, var;
    double eps = 1e-5;

    double scale(std::size_t c) const;
    double shift(std::size_t c) const;
};

/// Per (input channel, output channel) J x J matrix. Entry (i, k) is the weight
/// with which input joint i feeds output joint k, so output column k of the
/// product is sum_i M(i, k) * x_i.
struct MergedSpatialMatrix {
    std::size_t in_channels = 0;
    std::size_t out_channels = 0;
    std::size_t joints = 0;
    std::vector<Matrix> blocks;  // in_channels * out_channels, input-major
    std::vector<double> bias;    // empty: no bias term

    const Matrix& at(std::size_t c_in, std::size_t c_out) const {
        return blocks[c_in * out_channels + c_out];
    }
    Matrix& at(std::size_t c_in, std::size_t c_out) { return blocks[c_in * out_channels + c_out]; }
    bool has_bias() const { return !bias.empty(); }
};

/// weights[p] is the C_in x C_out 1x1 convolution of partition p.
MergedSpatialMatrix merge_spatial(const AdjacencySet& adjs, std::span<const Matrix> weights,
                                  std::span<const double> bias = {},
                                  const std::optional<BatchNorm>& bn = std::nullopt);

/// J x J matrix with at most one entry per column.
class PatternedSparseMatrix {
public:
    explicit PatternedSparseMatrix(std::size_t n) : entries_(n) {}

    std::size_t size() const { return entries_.size(); }
    const std::optional<std::pair<std::size_t, double>>& column(std::size_t k) const {
        return entries_[k];
    }
    void set(std::size_t row, std::size_t col, double v);
    std::size_t nonzeros() const;
    Matrix dense() const;

private:
    std::vector<std::optional<std::pair<std::size_t, double>>> entries_;
};

/// Splits M into sum_i A_i. Column k's valid entries, by ascending row, go to
/// A_1, A_2, ... so the number of terms equals the largest column count.
std::vector<PatternedSparseMatrix> decompose(const Matrix& m, double threshold = kZeroThreshold);

std::size_t max_column_nonzeros(const Matrix& m, double threshold = kZeroThreshold);
std::size_t valid_elements(const Matrix& m, double threshold = kZeroThreshold);
/// Offsets d = i - k (row minus column) of diagonals holding a valid element.
std::vector<long> nonzero_diagonals(const Matrix& m, double threshold = kZeroThreshold);

}  // namespace hegcn
