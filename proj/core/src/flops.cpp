#include "frugal/flops.hpp"

#include <cmath>
#include <stdexcept>

namespace frugal {

namespace {

std::uint64_t u(int v) { return static_cast<std::uint64_t>(v); }

}  // namespace

ConvDims dims_of(const ConvLayer& layer) {
    Shape3 in = layer.in_shape();
    Shape3 out = layer.out_shape();
    return ConvDims{in.h, in.w, out.h, out.w, in.c, out.c, layer.kh(), layer.kw()};
}

std::uint64_t flops_conv_forward(const ConvDims& d) {
    return u(d.out_h) * u(d.out_w) * u(d.n) * u(d.c) * u(d.kh) * u(d.kw);
}

std::uint64_t flops_error_prop(const ConvDims& d, int n_kept) {
    if (n_kept < 1 || n_kept > d.n) {
        throw std::invalid_argument("flops_error_prop: kept channels out of range");
    }
    return u(d.in_h) * u(d.in_w) * u(d.c) * u(n_kept) * u(d.kh) * u(d.kw);
}

std::uint64_t flops_weight_grad(const ConvDims& d, int n_kept) {
    if (n_kept < 1 || n_kept > d.n) {
        throw std::invalid_argument("flops_weight_grad: kept channels out of range");
    }
    return u(d.out_h) * u(d.out_w) * u(d.c) * u(n_kept) * u(d.kh) * u(d.kw);
}

std::uint64_t flops_selection_overhead(const ConvDims& d, int batch) {
    if (d.n <= 0) return 0;
    std::uint64_t weight_norms = u(d.n) * u(d.c) * u(d.kh) * u(d.kw);
    std::uint64_t map_norms = u(batch) * u(d.n) * u(d.out_h) * u(d.out_w);
    std::uint64_t sort_cost =
        static_cast<std::uint64_t>(std::llround(d.n * std::log2(static_cast<double>(d.n))));
    return weight_norms + map_norms + sort_cost;
}

std::vector<LayerCost> network_costs(const Network& net) {
    std::vector<LayerCost> out;
    bool first = true;
    for (const Layer* l : net.layers()) {
        LayerCost c{l, false, 0, 0, 0, 0};
        if (auto* cv = dynamic_cast<const ConvLayer*>(l)) {
            ConvDims d = dims_of(*cv);
            c.conv = true;
            c.channels = d.n;
            c.fwd = flops_conv_forward(d);
            c.ep = first ? 0 : flops_error_prop(d, d.n);
            c.wg = flops_weight_grad(d, d.n);
        } else if (auto* f = dynamic_cast<const FcLayer*>(l)) {
            std::uint64_t mm = u(f->in_features()) * u(f->out_features());
            c.fwd = mm;
            c.ep = first ? 0 : mm;
            c.wg = mm;
        } else if (dynamic_cast<const ReluLayer*>(l)) {
            Shape3 s = l->out_shape();
            std::uint64_t numel = u(s.c) * u(s.h) * u(s.w);
            c.fwd = numel;
            c.ep = first ? 0 : numel;
        } else if (dynamic_cast<const MaxPoolLayer*>(l)) {
            Shape3 s = l->out_shape();
            c.fwd = u(s.c) * u(s.h) * u(s.w);
            c.ep = 0;
        } else {
            throw std::logic_error("network_costs: unknown layer kind");
        }
        out.push_back(c);
        first = false;
    }
    return out;
}

NetCost total_costs(const Network& net) {
    NetCost t;
    for (const LayerCost& c : network_costs(net)) {
        t.fwd += c.fwd;
        t.ep += c.ep;
        t.wg += c.wg;
        if (c.conv) {
            t.ep_conv += c.ep;
            t.wg_conv += c.wg;
        }
    }
    return t;
}

std::uint64_t flops_smce_forward(int num_classes) {
    return 4ull * u(num_classes);
}

std::uint64_t flops_smce_backward(int num_classes) {
    return u(num_classes);
}

}  // namespace frugal
