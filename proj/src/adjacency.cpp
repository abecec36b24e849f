#include "hegcn/adjacency.hpp"

#include "hegcn/errors.hpp"

#include <cmath>
#include <set>

namespace hegcn {

Matrix Matrix::identity(std::size_t n) {
    Matrix m(n, n);
    for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
    return m;
}

Matrix Matrix::transposed() const {
    Matrix t(cols_, rows_);
    for (std::size_t r = 0; r < rows_; ++r)
        for (std::size_t c = 0; c < cols_; ++c) t(c, r) = (*this)(r, c);
    return t;
}

Matrix& Matrix::operator+=(const Matrix& o) {
    if (rows_ != o.rows_ || cols_ != o.cols_) throw ShapeError("matrix add: shape mismatch");
    for (std::size_t i = 0; i < data_.size(); ++i) data_[i] += o.data_[i];
    return *this;
}

Matrix normalize(const Matrix& adj) {
    if (adj.rows() != adj.cols()) throw ShapeError("adjacency must be square");
    const std::size_t n = adj.rows();
    Matrix a = adj;
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j)
            if (a(i, j) < 0.0) throw ShapeError("adjacency must be nonnegative");
        a(i, i) += 1.0;
    }
    std::vector<double> inv_sqrt(n);
    for (std::size_t i = 0; i < n; ++i) {
        double deg = 0.0;
        for (std::size_t j = 0; j < n; ++j) deg += a(i, j);
        inv_sqrt[i] = 1.0 / std::sqrt(deg);  // deg >= 1 thanks to the self-loop
    }
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) a(i, j) *= inv_sqrt[i] * inv_sqrt[j];
    return a;
}

std::vector<Matrix> AdjacencySet::normalized() const {
    std::vector<Matrix> out;
    out.reserve(partitions.size());
    for (const auto& p : partitions) {
        if (p.rows() != joints || p.cols() != joints)
            throw ShapeError("partition is not " + std::to_string(joints) + "x" +
                             std::to_string(joints));
        out.push_back(normalize(p));
    }
    return out;
}

Matrix AdjacencySet::structure() const {
    Matrix s(joints, joints);
    for (const auto& n : normalized())
        for (std::size_t k = 0; k < joints; ++k)
            for (std::size_t i = 0; i < joints; ++i)
                if (std::abs(n(k, i)) > kZeroThreshold) s(i, k) = 1.0;
    return s;
}

std::vector<std::pair<std::size_t, std::size_t>> skeleton_standin_edges() {
    return {{1, 20},  {2, 20},  {3, 2},   {5, 4},   {6, 5},   {7, 6},   {9, 8},   {10, 9},
            {11, 10}, {12, 0},  {13, 12}, {14, 13}, {15, 14}, {16, 0},  {17, 16}, {18, 17},
            {19, 18}, {21, 22}, {22, 7},  {23, 24}, {24, 11}, {1, 4},   {15, 19}};
}

AdjacencySet skeleton_standin() {
    AdjacencySet s;
    s.joints = 25;
    Matrix a(25, 25);
    for (auto [i, j] : skeleton_standin_edges()) {
        a(i, j) = 1.0;
        a(j, i) = 1.0;
    }
    s.partitions.push_back(std::move(a));
    return s;
}

double BatchNorm::scale(std::size_t c) const { return gamma.at(c) / std::sqrt(var.at(c) + eps); }
double BatchNorm::shift(std::size_t c) const { return beta.at(c) - scale(c) * mean.at(c); }

MergedSpatialMatrix merge_spatial(const AdjacencySet& adjs, std::span<const Matrix> weights,
                                  std::span<const double> bias, const std::optional<BatchNorm>& bn) {
    if (weights.size() != adjs.partitions.size())
        throw ShapeError("need one weight matrix per partition");
    if (weights.empty()) throw ShapeError("no partitions");
    const std::size_t cin = weights[0].rows(), cout = weights[0].cols(), n = adjs.joints;
    for (const auto& w : weights)
        if (w.rows() != cin || w.cols() != cout) throw ShapeError("weight dims differ across partitions");
    if (!bias.empty() && bias.size() != cout) throw ShapeError("bias length != output channels");
    if (bn && (bn->gamma.size() != cout || bn->beta.size() != cout || bn->mean.size() != cout ||
               bn->var.size() != cout))
        throw ShapeError("batch-norm parameter length != output channels");

    const auto norms = adjs.normalized();
    MergedSpatialMatrix m;
    m.in_channels = cin;
    m.out_channels = cout;
    m.joints = n;
    m.blocks.assign(cin * cout, Matrix(n, n));
    for (std::size_t c = 0; c < cin; ++c)
        for (std::size_t o = 0; o < cout; ++o) {
            Matrix& blk = m.at(c, o);
            const double s = bn ? bn->scale(o) : 1.0;
            for (std::size_t p = 0; p < norms.size(); ++p) {
                const double w = weights[p](c, o) * s;
                for (std::size_t k = 0; k < n; ++k)
                    for (std::size_t i = 0; i < n; ++i) blk(i, k) += w * norms[p](k, i);
            }
        }
    if (!bias.empty() || bn) {
        m.bias.assign(cout, 0.0);
        for (std::size_t o = 0; o < cout; ++o) {
            const double b = bias.empty() ? 0.0 : bias[o];
            m.bias[o] = bn ? bn->scale(o) * b + bn->shift(o) : b;
        }
    }
    return m;
}

void PatternedSparseMatrix::set(std::size_t row, std::size_t col, double v) {
    if (row >= entries_.size() || col >= entries_.size()) throw ShapeError("index out of range");
    if (entries_[col]) throw ShapeError("column already holds an entry");
    entries_[col] = std::make_pair(row, v);
}

std::size_t PatternedSparseMatrix::nonzeros() const {
    std::size_t n = 0;
    for (const auto& e : entries_) n += e.has_value();
    return n;
}

Matrix PatternedSparseMatrix::dense() const {
    Matrix m(size(), size());
    for (std::size_t k = 0; k < size(); ++k)
        if (entries_[k]) m(entries_[k]->first, k) = entries_[k]->second;
    return m;
}

std::vector<PatternedSparseMatrix> decompose(const Matrix& m, double threshold) {
    if (m.rows() != m.cols()) throw ShapeError("decompose expects a square matrix");
    const std::size_t n = m.rows();
    std::vector<PatternedSparseMatrix> parts;
    for (std::size_t k = 0; k < n; ++k) {
        std::size_t slot = 0;
        for (std::size_t i = 0; i < n; ++i) {
            if (std::abs(m(i, k)) <= threshold) continue;
            if (slot == parts.size()) parts.emplace_back(n);
            parts[slot++].set(i, k, m(i, k));
        }
    }
    return parts;
}

std::size_t max_column_nonzeros(const Matrix& m, double threshold) {
    std::size_t best = 0;
    for (std::size_t k = 0; k < m.cols(); ++k) {
        std::size_t cnt = 0;
        for (std::size_t i = 0; i < m.rows(); ++i) cnt += std::abs(m(i, k)) > threshold;
        best = std::max(best, cnt);
    }
    return best;
}

std::size_t valid_elements(const Matrix& m, double threshold) {
    std::size_t cnt = 0;
    for (double v : m.data()) cnt += std::abs(v) > threshold;
    return cnt;
}

std::vector<long> nonzero_diagonals(const Matrix& m, double threshold) {
    std::set<long> d;
    for (std::size_t i = 0; i < m.rows(); ++i)
        for (std::size_t k = 0; k < m.cols(); ++k)
            if (std::abs(m(i, k)) > threshold) d.insert(static_cast<long>(i) - static_cast<long>(k));
    return {d.begin(), d.end()};
}

}  // namespace hegcn
