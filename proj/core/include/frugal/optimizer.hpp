#pragma once

#include <vector>

#include "frugal/tensor.hpp"

namespace frugal {

struct SgdConfig {
    double lr = 0.01;
    double momentum = 0.0;
    double weight_decay = 0.0;
};

// one tensor update: v <- mu*v + (g + lambda*w); w <- w - lr*v
void sgd_step(Tensor& w, const Tensor& g, Tensor& v, const SgdConfig& cfg);

class SgdMomentum {
public:
    SgdMomentum(const std::vector<Tensor*>& params, SgdConfig cfg);

    void step(const std::vector<Tensor*>& params, const std::vector<Tensor*>& grads);

    double lr() const { return cfg_.lr; }
    void set_lr(double lr) { cfg_.lr = lr; }

private:
    std::vector<Tensor> velocity_;
    SgdConfig cfg_;
};

}  // namespace frugal
