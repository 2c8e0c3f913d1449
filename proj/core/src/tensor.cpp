#include "frugal/tensor.hpp"

#include <cmath>
#include <numeric>
#include <stdexcept>

namespace frugal {

namespace {

std::size_t checked_numel(const std::vector<int>& shape) {
    if (shape.empty()) {
        throw std::invalid_argument("tensor: empty shape");
    }
    std::size_t n = 1;
    for (int d : shape) {
        if (d <= 0) {
            throw std::invalid_argument("tensor: nonpositive dimension " + std::to_string(d));
        }
        n *= static_cast<std::size_t>(d);
    }
    return n;
}

}  // namespace

Tensor::Tensor(std::vector<int> shape) : shape_(std::move(shape)) {
    data_.assign(checked_numel(shape_), 0.0);
}

Tensor::Tensor(std::initializer_list<int> shape) : Tensor(std::vector<int>(shape)) {}

Tensor Tensor::full(std::vector<int> shape, double value) {
    Tensor t(std::move(shape));
    t.fill(value);
    return t;
}

int Tensor::dim(int axis) const {
    if (axis < 0 || axis >= ndim()) {
        throw std::invalid_argument("tensor: axis " + std::to_string(axis) + " out of range");
    }
    return shape_[static_cast<std::size_t>(axis)];
}

void Tensor::fill(double value) {
    std::fill(data_.begin(), data_.end(), value);
}

Tensor Tensor::reshape(std::vector<int> new_shape) const {
    std::size_t n = checked_numel(new_shape);
    if (n != numel()) {
        throw std::invalid_argument("tensor: reshape from " + shape_str() + " changes element count");
    }
    Tensor out(std::move(new_shape));
    out.data_ = data_;
    return out;
}

bool Tensor::all_finite() const {
    for (double v : data_) {
        if (!std::isfinite(v)) return false;
    }
    return true;
}

std::string Tensor::shape_str() const {
    std::string s = "[";
    for (std::size_t i = 0; i < shape_.size(); ++i) {
        if (i) s += ",";
        s += std::to_string(shape_[i]);
    }
    return s + "]";
}

double l1_norm(const Tensor& t) {
    double acc = 0.0;
    const double* p = t.data();
    for (std::size_t i = 0; i < t.numel(); ++i) acc += std::fabs(p[i]);
    return acc;
}

double l2_norm(const Tensor& t) {
    double acc = 0.0;
    const double* p = t.data();
    for (std::size_t i = 0; i < t.numel(); ++i) acc += p[i] * p[i];
    return std::sqrt(acc);
}

double l1_norm_channel(const Tensor& t, int batch, int channel) {
    if (t.ndim() != 4) {
        throw std::invalid_argument("l1_norm_channel: want rank-4 tensor, got " + t.shape_str());
    }
    const int h = t.dim(2), w = t.dim(3);
    const double* p = t.data() + t.idx4(batch, channel, 0, 0);
    double acc = 0.0;
    for (int i = 0; i < h * w; ++i) acc += std::fabs(p[i]);
    return acc;
}

}  // namespace frugal
