#include "frugal/optimizer.hpp"

#include <stdexcept>

namespace frugal {

void sgd_step(Tensor& w, const Tensor& g, Tensor& v, const SgdConfig& cfg) {
    if (w.numel() != g.numel() || w.numel() != v.numel()) {
        throw std::invalid_argument("sgd_step: parameter/gradient/velocity size mismatch");
    }
    double* wd = w.data();
    const double* gd = g.data();
    double* vd = v.data();
    const long n = w.numel();
    for (long i = 0; i < n; ++i) {
        const double update = gd[i] + cfg.weight_decay * wd[i];
        vd[i] = cfg.momentum * vd[i] + update;
        wd[i] -= cfg.lr * vd[i];
    }
}

SgdMomentum::SgdMomentum(const std::vector<Tensor*>& params, SgdConfig cfg) : cfg_(cfg) {
    velocity_.reserve(params.size());
    for (const Tensor* p : params) {
        Tensor v(p->shape());
        v.fill(0.0);
        velocity_.push_back(std::move(v));
    }
}

void SgdMomentum::step(const std::vector<Tensor*>& params, const std::vector<Tensor*>& grads) {
    if (params.size() != velocity_.size() || grads.size() != velocity_.size()) {
        throw std::invalid_argument("SgdMomentum::step: tensor list does not match construction");
    }
    for (size_t i = 0; i < params.size(); ++i) {
        sgd_step(*params[i], *grads[i], velocity_[i], cfg_);
    }
}

}  // namespace frugal
