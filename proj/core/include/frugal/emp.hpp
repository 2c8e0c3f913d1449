#pragma once

#include <vector>

#include "frugal/flops.hpp"
#include "frugal/layers.hpp"

namespace frugal {

// Error map pruning: per mini-batch, score the channels of a conv layer's
// output-side error map, keep the top fraction, and run the backward pass
// only over the kept channels.
struct PruneConfig {
    double alpha = 0.7;       // kept fraction, n_kept = max(1, round(alpha*n))
    double gamma1 = 1.0;      // weight-norm term
    double gamma2 = 1.0;      // error-map-norm term
    bool normalize = true;    // divide each l1 term by its element count;
                              // false gives the raw-norm score
};

struct PruneDecision {
    std::vector<int> keep;        // kept channel indices, sorted ascending
    std::vector<double> scores;   // batch score S_j for every channel
    int n_total = 0;
};

int kept_count(double alpha, int n);

// s_j for one instance: gamma1 * l1(W_j) + gamma2 * l1(delta_j), each term
// divided by its element count when normalized
double channel_score(const Tensor& weights, int j, const Tensor& delta, int instance,
                     const PruneConfig& cfg);

// S_j = sum over the batch of per-instance scores
std::vector<double> batch_scores(const Tensor& weights, const Tensor& delta,
                                 const PruneConfig& cfg);

// keep the top-n' channels by S_j; ties keep the lower index first
PruneDecision select_channels(const std::vector<double>& scores, double alpha);

// masked backward for one conv layer: weight/bias gradients over kept
// channels only (pruned rows stay exactly zero) plus, when need_dx, the
// kept-channel error propagation. Charges the ledger with the n'-scaled
// analytic counts; scoring cost is charged where the decision is made.
Tensor pruned_backward(ConvLayer& layer, const Tensor& delta_out, const PruneDecision& decision,
                       FlopCounter* ledger, bool need_dx, const std::vector<int>* rows = nullptr);

// score + select in one step, charging selection overhead for the batch
PruneDecision decide(const ConvLayer& layer, const Tensor& delta_out, const PruneConfig& cfg,
                     FlopCounter* ledger);

}  // namespace frugal
