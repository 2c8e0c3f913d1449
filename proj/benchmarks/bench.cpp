// Microbenchmarks for the hot paths: conv forward/backward, the masked
// backward at several keep counts, channel selection, and filter inference.
// Each benchmark also reports the analytic cost as a flops/s counter so the
// measured wall time can be compared against the ledger's unit prices.

#include <benchmark/benchmark.h>

#include <cstdint>
#include <vector>

#include "frugal/emp.hpp"
#include "frugal/flops.hpp"
#include "frugal/layers.hpp"
#include "frugal/network.hpp"
#include "frugal/rng.hpp"
#include "frugal/tensor.hpp"

namespace {

using namespace frugal;

constexpr int kBatch = 64;

// LeNet's second conv block, the layer the channel pruning targets
ConvLayer make_conv() {
    ConvLayer conv({6, 14, 14}, 16, 5, 5, 1, 0);
    Rng rng(1234);
    conv.init_params(rng);
    return conv;
}

void BM_ConvForward(benchmark::State& state) {
    ConvLayer conv = make_conv();
    Tensor x({kBatch, 6, 14, 14});
    Rng rng(5);
    rng.fill_normal(x, 0.0, 1.0);
    for (auto _ : state) {
        Tensor y = conv.forward(x, false);
        benchmark::DoNotOptimize(y.data());
    }
    const double per_iter = static_cast<double>(kBatch) *
                            static_cast<double>(flops_conv_forward(dims_of(conv)));
    state.counters["flops"] =
        benchmark::Counter(per_iter * static_cast<double>(state.iterations()),
                           benchmark::Counter::kIsRate);
}
BENCHMARK(BM_ConvForward);

void BM_ConvBackward(benchmark::State& state) {
    ConvLayer conv = make_conv();
    Rng rng(6);
    Tensor x({kBatch, 6, 14, 14});
    rng.fill_normal(x, 0.0, 1.0);
    Tensor dout({kBatch, 16, 10, 10});
    rng.fill_normal(dout, 0.0, 1.0);
    conv.forward(x, true);
    for (auto _ : state) {
        conv.zero_grads();
        Tensor dx = conv.backward(dout, true);
        benchmark::DoNotOptimize(dx.data());
    }
    const ConvDims d = dims_of(conv);
    const double per_iter =
        static_cast<double>(kBatch) *
        static_cast<double>(flops_error_prop(d, 16) + flops_weight_grad(d, 16));
    state.counters["flops"] =
        benchmark::Counter(per_iter * static_cast<double>(state.iterations()),
                           benchmark::Counter::kIsRate);
}
BENCHMARK(BM_ConvBackward);

// keep 4, 8, 12, then all 16 of the output channels; the last point should
// track BM_ConvBackward plus the masked bookkeeping
void BM_PrunedBackward(benchmark::State& state) {
    ConvLayer conv = make_conv();
    Rng rng(7);
    Tensor x({kBatch, 6, 14, 14});
    rng.fill_normal(x, 0.0, 1.0);
    Tensor dout({kBatch, 16, 10, 10});
    rng.fill_normal(dout, 0.0, 1.0);
    conv.forward(x, true);

    PruneDecision decision;
    decision.n_total = 16;
    for (int j = 0; j < static_cast<int>(state.range(0)); ++j) decision.keep.push_back(j);

    for (auto _ : state) {
        conv.zero_grads();
        Tensor dx = pruned_backward(conv, dout, decision, nullptr, true);
        benchmark::DoNotOptimize(dx.data());
    }
    const ConvDims d = dims_of(conv);
    const int kept = static_cast<int>(state.range(0));
    const double per_iter =
        static_cast<double>(kBatch) *
        static_cast<double>(flops_error_prop(d, kept) + flops_weight_grad(d, kept));
    state.counters["flops"] =
        benchmark::Counter(per_iter * static_cast<double>(state.iterations()),
                           benchmark::Counter::kIsRate);
}
BENCHMARK(BM_PrunedBackward)->DenseRange(4, 16, 4);

void BM_ChannelSelection(benchmark::State& state) {
    ConvLayer conv = make_conv();
    Rng rng(8);
    Tensor dout({kBatch, 16, 10, 10});
    rng.fill_normal(dout, 0.0, 1.0);
    PruneConfig cfg;
    cfg.alpha = 0.7;
    for (auto _ : state) {
        PruneDecision d = decide(conv, dout, cfg, nullptr);
        benchmark::DoNotOptimize(d.keep.data());
    }
    const double per_iter =
        static_cast<double>(flops_selection_overhead(dims_of(conv), kBatch));
    state.counters["flops"] =
        benchmark::Counter(per_iter * static_cast<double>(state.iterations()),
                           benchmark::Counter::kIsRate);
}
BENCHMARK(BM_ChannelSelection);

// the per-batch cost the filter adds in front of the main network
void BM_FilterInference(benchmark::State& state) {
    Rng rng(9);
    Network filter = make_filter_net(rng, 28, 28);
    Tensor x({kBatch, 1, 28, 28});
    rng.fill_normal(x, 0.0, 1.0);
    for (auto _ : state) {
        Tensor logits = filter.forward(x, false);
        benchmark::DoNotOptimize(logits.data());
    }
    const NetCost c = total_costs(filter);
    const double per_iter =
        static_cast<double>(kBatch) * static_cast<double>(c.fwd + flops_smce_forward(2));
    state.counters["flops"] =
        benchmark::Counter(per_iter * static_cast<double>(state.iterations()),
                           benchmark::Counter::kIsRate);
}
BENCHMARK(BM_FilterInference);

void BM_SmceHead(benchmark::State& state) {
    Rng rng(10);
    Tensor logits({kBatch, 10});
    rng.fill_normal(logits, 0.0, 1.0);
    std::vector<int> labels(kBatch);
    for (int i = 0; i < kBatch; ++i) labels[i] = i % 10;
    for (auto _ : state) {
        SmceResult r = softmax_cross_entropy(logits, labels);
        benchmark::DoNotOptimize(r.losses.data());
    }
}
BENCHMARK(BM_SmceHead);

}  // namespace

BENCHMARK_MAIN();
