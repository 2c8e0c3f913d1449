#include "frugal/emp.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace frugal {

int kept_count(double alpha, int n) {
    if (!(alpha > 0.0) || alpha > 1.0) {
        throw std::invalid_argument("emp: alpha must be in (0,1]");
    }
    int k = static_cast<int>(std::lround(alpha * n));
    if (k < 1) k = 1;
    if (k > n) k = n;
    return k;
}

namespace {

double l1_slab(const double* p, int count) {
    double acc = 0.0;
    for (int i = 0; i < count; ++i) acc += std::fabs(p[i]);
    return acc;
}

}  // namespace

double channel_score(const Tensor& weights, int j, const Tensor& delta, int instance,
                     const PruneConfig& cfg) {
    const int kernel_elems = weights.dim(1) * weights.dim(2) * weights.dim(3);
    const int map_elems = delta.dim(2) * delta.dim(3);
    double wterm = l1_slab(weights.data() + weights.idx4(j, 0, 0, 0), kernel_elems);
    double dterm = l1_slab(delta.data() + delta.idx4(instance, j, 0, 0), map_elems);
    if (cfg.normalize) {
        wterm /= kernel_elems;
        dterm /= map_elems;
    }
    return cfg.gamma1 * wterm + cfg.gamma2 * dterm;
}

std::vector<double> batch_scores(const Tensor& weights, const Tensor& delta,
                                 const PruneConfig& cfg) {
    const int m = delta.dim(0);
    const int n = delta.dim(1);
    if (m < 1) {
        throw std::invalid_argument("emp: empty batch");
    }
    if (weights.dim(0) != n) {
        throw std::invalid_argument("emp: weight/delta channel mismatch");
    }
    std::vector<double> s(static_cast<std::size_t>(n), 0.0);
    for (int i = 0; i < m; ++i) {
        for (int j = 0; j < n; ++j) {
            s[static_cast<std::size_t>(j)] += channel_score(weights, j, delta, i, cfg);
        }
    }
    return s;
}

PruneDecision select_channels(const std::vector<double>& scores, double alpha) {
    const int n = static_cast<int>(scores.size());
    if (n < 1) {
        throw std::invalid_argument("emp: no channels to select from");
    }
    for (double s : scores) {
        if (!std::isfinite(s)) {
            throw std::invalid_argument("emp: non-finite channel score");
        }
    }
    const int k = kept_count(alpha, n);

    std::vector<int> order(static_cast<std::size_t>(n));
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
        // descending score; equal scores keep the lower index first
        if (scores[static_cast<std::size_t>(a)] != scores[static_cast<std::size_t>(b)]) {
            return scores[static_cast<std::size_t>(a)] > scores[static_cast<std::size_t>(b)];
        }
        return a < b;
    });

    PruneDecision d;
    d.n_total = n;
    d.scores = scores;
    d.keep.assign(order.begin(), order.begin() + k);
    std::sort(d.keep.begin(), d.keep.end());
    return d;
}

Tensor pruned_backward(ConvLayer& layer, const Tensor& delta_out, const PruneDecision& decision,
                       FlopCounter* ledger, bool need_dx, const std::vector<int>* rows) {
    if (decision.n_total != layer.out_channels()) {
        throw std::invalid_argument("emp: decision does not belong to layer " + layer.name());
    }
    const int m = rows ? static_cast<int>(rows->size()) : delta_out.dim(0);
    const int n_kept = static_cast<int>(decision.keep.size());
    const bool full = n_kept == layer.out_channels();
    const ChannelMask* mask = full ? nullptr : &decision.keep;

    layer.backward_weights(delta_out, mask, rows);
    Tensor din;
    if (need_dx) {
        din = layer.backward_error(delta_out, mask, rows);
    }

    if (ledger) {
        ConvDims d = dims_of(layer);
        std::uint64_t wg = flops_weight_grad(d, n_kept) * static_cast<std::uint64_t>(m);
        std::uint64_t ep =
            need_dx ? flops_error_prop(d, n_kept) * static_cast<std::uint64_t>(m) : 0;
        ledger->weightgrad_main += wg;
        ledger->weightgrad_conv += wg;
        ledger->errorprop_main += ep;
        ledger->errorprop_conv += ep;
    }
    return din;
}

PruneDecision decide(const ConvLayer& layer, const Tensor& delta_out, const PruneConfig& cfg,
                     FlopCounter* ledger) {
    PruneDecision d = select_channels(batch_scores(layer.weights(), delta_out, cfg), cfg.alpha);
    if (ledger) {
        ledger->selection_overhead += flops_selection_overhead(dims_of(layer), delta_out.dim(0));
    }
    return d;
}

}  // namespace frugal
