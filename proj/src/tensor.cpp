#include "hegcn/tensor.hpp"

#include "hegcn/errors.hpp"

#include <cmath>

namespace hegcn {

GraphTensor::GraphTensor(std::size_t batch, std::size_t channels, std::size_t frames,
                         std::size_t joints)
    : GraphTensor(batch, channels, frames, joints,
                  std::vector<double>(batch * channels * frames * joints, 0.0)) {}

GraphTensor::GraphTensor(std::size_t batch, std::size_t channels, std::size_t frames,
                         std::size_t joints, std::vector<double> data)
    : b_(batch), c_(channels), t_(frames), j_(joints), data_(std::move(data)) {
    if (b_ == 0 || c_ == 0 || t_ == 0 || j_ == 0) throw ShapeError("tensor dims must be >= 1");
    if (data_.size() != b_ * c_ * t_ * j_) throw ShapeError("tensor data size does not match dims");
    for (double v : data_)
        if (!std::isfinite(v)) throw ShapeError("tensor values must be finite");
}

GraphTensor GraphTensor::random(std::size_t batch, std::size_t channels, std::size_t frames,
                                std::size_t joints, std::mt19937_64& rng, double lo, double hi) {
    std::uniform_real_distribution<double> dist(lo, hi);
    std::vector<double> v(batch * channels * frames * joints);
    for (double& x : v) x = dist(rng);
    return GraphTensor(batch, channels, frames, joints, std::move(v));
}

double max_abs_diff(const GraphTensor& a, const GraphTensor& b) {
    if (!a.same_shape(b)) throw ShapeError("max_abs_diff: shape mismatch");
    double m = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a.data()[i] - b.data()[i]));
    return m;
}

}  // namespace hegcn
