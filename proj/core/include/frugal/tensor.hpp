#pragma once

#include <cstddef>
#include <initializer_list>
#include <string>
#include <vector>

namespace frugal {

// Dense row-major double tensor. Axis order for activations and error maps
// is (batch, channel, row, col); conv weights are (out_ch, in_ch, kh, kw).
// Treated as a value type: layers hand them around by const reference and
// never mutate inputs in place.
class Tensor {
public:
    Tensor() = default;
    explicit Tensor(std::vector<int> shape);
    Tensor(std::initializer_list<int> shape);

    static Tensor zeros(std::vector<int> shape) { return Tensor(std::move(shape)); }
    static Tensor full(std::vector<int> shape, double value);

    const std::vector<int>& shape() const { return shape_; }
    int dim(int axis) const;
    int ndim() const { return static_cast<int>(shape_.size()); }
    std::size_t numel() const { return data_.size(); }

    double* data() { return data_.data(); }
    const double* data() const { return data_.data(); }

    double& operator[](std::size_t i) { return data_[i]; }
    double operator[](std::size_t i) const { return data_[i]; }

    // linear index helpers for the common ranks
    double& operator()(int i0) { return data_[static_cast<std::size_t>(i0)]; }
    double operator()(int i0) const { return data_[static_cast<std::size_t>(i0)]; }
    double& operator()(int i0, int i1) { return data_[idx2(i0, i1)]; }
    double operator()(int i0, int i1) const { return data_[idx2(i0, i1)]; }
    double& operator()(int i0, int i1, int i2, int i3) { return data_[idx4(i0, i1, i2, i3)]; }
    double operator()(int i0, int i1, int i2, int i3) const { return data_[idx4(i0, i1, i2, i3)]; }

    std::size_t idx2(int i0, int i1) const {
        return static_cast<std::size_t>(i0) * shape_[1] + i1;
    }
    std::size_t idx4(int i0, int i1, int i2, int i3) const {
        return ((static_cast<std::size_t>(i0) * shape_[1] + i1) * shape_[2] + i2) * shape_[3] + i3;
    }

    void fill(double value);

    // same element count, new shape; data is shared layout-wise (copy)
    Tensor reshape(std::vector<int> new_shape) const;

    bool same_shape(const Tensor& other) const { return shape_ == other.shape_; }
    bool all_finite() const;

    std::string shape_str() const;

private:
    std::vector<int> shape_;
    std::vector<double> data_;
};

// reductions used by the pruning scores and tests
double l1_norm(const Tensor& t);
double l2_norm(const Tensor& t);

// l1 over one channel slab of a (batch, channel, h, w) tensor
double l1_norm_channel(const Tensor& t, int batch, int channel);

}  // namespace frugal
