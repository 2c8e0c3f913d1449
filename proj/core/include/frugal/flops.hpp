#pragma once

#include <cstdint>
#include <vector>

#include "frugal/network.hpp"

namespace frugal {

// Exact FLOP accounting, 1 multiply-accumulate = 1 FLOP. Counts are analytic
// per-layer formulas (not instrumented loops) so equal work always produces
// equal integers; every field is a running total for one training run.
struct FlopCounter {
    std::uint64_t forward_main = 0;       // main-net forward of trained instances
    std::uint64_t errorprop_main = 0;     // main-net delta propagation
    std::uint64_t weightgrad_main = 0;    // main-net weight/bias gradients
    std::uint64_t filter_forward = 0;     // filter inference over the stream
    std::uint64_t filter_train = 0;       // filter backward + sampled-instance main forwards
    std::uint64_t selection_overhead = 0; // channel scoring + sort

    // conv-only portions of errorprop_main / weightgrad_main, for exactness
    // checks against the alpha-scaled baseline
    std::uint64_t errorprop_conv = 0;
    std::uint64_t weightgrad_conv = 0;

    std::uint64_t total() const {
        return forward_main + errorprop_main + weightgrad_main + filter_forward +
               filter_train + selection_overhead;
    }
};

struct ConvDims {
    int in_h, in_w;
    int out_h, out_w;
    int c;   // input channels
    int n;   // output channels
    int kh, kw;
};

ConvDims dims_of(const ConvLayer& layer);

// forward cost of one instance: every output element sums c*kh*kw products
std::uint64_t flops_conv_forward(const ConvDims& d);

// error propagation with n_kept channels: W_in*H_in*c*n_kept*kh*kw
std::uint64_t flops_error_prop(const ConvDims& d, int n_kept);

// weight gradients with n_kept channels: W_out*H_out*c*n_kept*kh*kw
std::uint64_t flops_weight_grad(const ConvDims& d, int n_kept);

// per-batch scoring cost: l1 over weights (n*c*kh*kw) + l1 over the batch's
// error-map channels (m*n*W_out*H_out) + sort (n*log2 n, rounded)
std::uint64_t flops_selection_overhead(const ConvDims& d, int batch);

// per-instance analytic cost of one layer (forward / errorprop / weightgrad
// at full width); non-conv layers use fixed conventions: fc = in*out for all
// three phases, relu = numel forward and backward, maxpool = out-numel
// forward and zero backward (pure routing)
struct LayerCost {
    const Layer* layer;
    bool conv;
    int channels;  // conv output channels, else 0
    std::uint64_t fwd;
    std::uint64_t ep;  // full-width; already 0 for the first layer (its
                       // input-side delta is never computed)
    std::uint64_t wg;
};

std::vector<LayerCost> network_costs(const Network& net);

// whole-net per-instance totals; smce head cost for K classes is added by
// the trainer (4K forward, K backward per instance)
struct NetCost {
    std::uint64_t fwd = 0;
    std::uint64_t ep = 0;
    std::uint64_t wg = 0;
    std::uint64_t ep_conv = 0;
    std::uint64_t wg_conv = 0;
    std::uint64_t backward() const { return ep + wg; }
    std::uint64_t train() const { return fwd + ep + wg; }
};

NetCost total_costs(const Network& net);

std::uint64_t flops_smce_forward(int num_classes);
std::uint64_t flops_smce_backward(int num_classes);

}  // namespace frugal
