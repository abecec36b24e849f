#pragma once

#include <cstddef>
#include <random>
#include <vector>

namespace hegcn {

/// Dense (batch, channel, frame, joint) tensor, row-major in that order.
class GraphTensor {
public:
    GraphTensor() = default;
    GraphTensor(std::size_t batch, std::size_t channels, std::size_t frames, std::size_t joints);
    GraphTensor(std::size_t batch, std::size_t channels, std::size_t frames, std::size_t joints,
                std::vector<double> data);

    static GraphTensor random(std::size_t batch, std::size_t channels, std::size_t frames,
                              std::size_t joints, std::mt19937_64& rng, double lo = -1.0,
                              double hi = 1.0);

    std::size_t batch() const { return b_; }
    std::size_t channels() const { return c_; }
    std::size_t frames() const { return t_; }
    std::size_t joints() const { return j_; }
    std::size_t size() const { return data_.size(); }

    double& operator()(std::size_t b, std::size_t c, std::size_t t, std::size_t j) {
        return data_[index(b, c, t, j)];
    }
    double operator()(std::size_t b, std::size_t c, std::size_t t, std::size_t j) const {
        return data_[index(b, c, t, j)];
    }

    const std::vector<double>& data() const { return data_; }
    std::vector<double>& data() { return data_; }

    bool same_shape(const GraphTensor& o) const {
        return b_ == o.b_ && c_ == o.c_ && t_ == o.t_ && j_ == o.j_;
    }

private:
    std::size_t index(std::size_t b, std::size_t c, std::size_t t, std::size_t j) const {
        return ((b * c_ + c) * t_ + t) * j_ + j;
    }

    std::size_t b_ = 0, c_ = 0, t_ = 0, j_ = 0;
    std::vector<double> data_;
};

double max_abs_diff(const GraphTensor& a, const GraphTensor& b);

}  // namespace hegcn
