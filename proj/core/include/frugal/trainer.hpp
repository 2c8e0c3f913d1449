#pragma once

#include <string>
#include <vector>

#include "frugal/config.hpp"
#include "frugal/data.hpp"
#include "frugal/emp.hpp"
#include "frugal/flops.hpp"
#include "frugal/network.hpp"

namespace frugal {

struct EvalResult {
    double accuracy = 0.0;
    double mean_loss = 0.0;
    std::vector<std::vector<long>> confusion;  // [true][predicted]
};

EvalResult evaluate(Network& net, const Dataset& test, int batch);

struct TrainResult {
    FlopCounter ledger;

    // instance accounting; warm-up instances count as preserved
    long arrivals = 0;
    long preserved = 0;
    long sampled = 0;
    long dropped = 0;
    long labeled = 0;
    long wrong = 0;

    // per-instance prices of the main network, cross-entropy head included
    std::uint64_t price_fwd = 0;
    std::uint64_t price_bwd = 0;
    std::uint64_t price_conv_bwd = 0;

    // analytic cost of training every arrival in full, same instance stream
    std::uint64_t baseline_flops = 0;

    double final_accuracy = 0.0;
    double final_test_loss = 0.0;
    double last_train_loss = 0.0;
    std::vector<double> epoch_accuracy;

    double reduction_inclusive() const;  // counts filter + selection spend
    double reduction_exclusive() const;  // main-network spend only
};

// One full training run driven by the config. When out_dir is non-empty it
// receives metrics.csv (per batch), epochs.csv (per epoch), config.txt, and
// checkpoint.bin; all four are byte-deterministic for a given config. Progress
// goes to stdout when verbose.
TrainResult train_run(const Config& cfg, const Dataset& train, const Dataset& test,
                      const std::string& out_dir, bool verbose);

// backward pass over all layers with optional channel pruning on conv error
// maps; delta is the loss gradient at the logits, m the instance count it
// covers. Charges everything except the smce-head backward, which the caller
// prices where the delta is built.
void backward_with_pruning(Network& net, const std::vector<LayerCost>& costs, Tensor delta, int m,
                           bool emp_on, const PruneConfig& pcfg, FlopCounter& ledger);

}  // namespace frugal
