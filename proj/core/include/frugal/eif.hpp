#pragma once

#include <functional>
#include <optional>
#include <vector>

#include "frugal/flops.hpp"
#include "frugal/network.hpp"
#include "frugal/optimizer.hpp"
#include "frugal/tensor.hpp"

// Early instance filtering.
//
// A small companion network looks at each incoming instance and predicts
// whether the main network's loss on it would land above or below a moving
// threshold T_l. Instances predicted high are preserved and receive a full
// training step. Instances predicted low are dropped, except for a few
// uncertain ones that are sampled so the filter keeps receiving labels from
// regions where it is unsure. The filter itself is trained online from the
// losses observed on preserved and sampled instances; no separate label
// source exists.
//
// T_l adapts so that the fraction of instances that are predicted high and
// confirmed high tracks a configured target rate. The confirmation ratio is
// measured over disjoint windows of several batches; after each window the
// threshold is nudged up (to admit fewer instances) or down.

namespace frugal {

struct FilterConfig {
    double r_set = 0.3;     // target rate of confirmed-high instances
    double alpha1 = 1.1;    // threshold scale when the measured rate is at or above target
    double alpha2 = 0.9;    // threshold scale when the measured rate is below target
    int window_batches = 5; // batches per measurement window
    double entropy_t = 0.5; // sampling fires above this prediction entropy, in nats
    double t_init = -1.0;   // initial T_l; negative means ln(num_classes) of the main task
    bool adapt = true;      // false freezes T_l (used to demonstrate why adaptation matters)
    bool balanced = true;   // false trains the filter with uniform instance weights instead
};

enum class Role { kPreserved, kSampled, kDropped };

struct InstanceVerdict {
    Role role = Role::kDropped;
    bool pred_high = false;
    double p_high = 0.0;
    double entropy = 0.0;
    bool has_label = false; // true once a real loss was observed for this instance
    bool label_high = false;
    double loss = 0.0;      // valid only when has_label
};

// Outcome of filtering one batch. Index lists partition [0, m).
struct BatchVerdict {
    std::vector<InstanceVerdict> items;
    std::vector<int> preserved;
    std::vector<int> sampled;
    std::vector<int> dropped;
    int wrong_predictions = 0; // among labeled instances, pred_high != label_high
    int labeled = 0;
};

struct FilterState {
    double t_loss = 0.0;
    long batches_seen = 0;
    // current window, cleared after each threshold decision
    long window_records = 0;
    long window_true_high = 0;
    double last_r_th = -1.0;   // most recent window measurement, negative until one exists
    long threshold_updates = 0;
};

struct Prediction {
    Tensor probs;                 // [m, 2], column 0 is the high-loss class
    std::vector<double> p_high;
    std::vector<double> entropy;
    std::vector<bool> pred_high;  // p_high >= 0.5
};

double binary_entropy(double p);

// Runs the filter network on a batch of instances. With record=true the
// activations stay cached so a subsequent backward pass can train on them.
Prediction predict(Network& filter, const Tensor& batch, bool record);

inline bool label_loss(double loss, double t_loss) { return loss >= t_loss; }

// Confirmed-high ratio of the current window, or empty while the window is
// still filling.
std::optional<double> true_high_ratio(const FilterState& state, long window_capacity);

// Multiplicative threshold update, applied once per full window.
void update_threshold(FilterState& state, double r_th, const FilterConfig& cfg);

// Indices predicted low whose prediction entropy strictly exceeds the
// sampling threshold.
std::vector<int> uncertainty_sample(const std::vector<bool>& pred_high,
                                    const std::vector<double>& entropy, double entropy_t);

struct WeightedLoss {
    double loss = 0.0;            // sum of w_hat_i * L_i over the labeled rows
    std::vector<double> weights;  // normalized w_hat, aligned with `rows`
};

double raw_weight(bool label_high, double r_set);

// Class-balanced filter loss over the labeled subset of a batch. Rows labeled
// high get raw weight 1/r_set, rows labeled low 1/(1 - r_set); the weights
// are then normalized to sum to one across the labeled rows.
WeightedLoss filter_loss(const Tensor& probs, const std::vector<int>& rows,
                         const std::vector<bool>& label_high, double r_set);

// Owns the filter network, its optimizer, and the threshold state, and keeps
// the energy ledger up to date for everything the filter itself does.
class InstanceFilter {
public:
    InstanceFilter(Network filter, FilterConfig cfg, int num_main_classes, SgdConfig opt);

    // Phase one: predict on a batch and split it into preserved / sampled /
    // dropped. Leaves the filter's activations cached for finish_batch.
    BatchVerdict begin_batch(const Tensor& batch, FlopCounter* ledger);

    // Phase two: consume the main-network losses observed for the preserved
    // and sampled rows (aligned with the verdict's index lists), train the
    // filter one step on the labeled rows, and advance the window. The cost
    // of producing sampled losses is charged by the caller, which knows the
    // main network's prices.
    void finish_batch(BatchVerdict& verdict, const std::vector<double>& preserved_losses,
                      const std::vector<double>& sampled_losses, FlopCounter* ledger);

    // Warm-up: every instance in the batch has an observed loss. Trains the
    // filter on the full batch and feeds the window exactly like the
    // filtered path.
    BatchVerdict warmup_batch(const Tensor& batch, const std::vector<double>& losses,
                              FlopCounter* ledger);

    // Convenience for harnesses where losses come from a closed-form source
    // rather than a real main network.
    BatchVerdict process_batch(const Tensor& batch, const std::function<double(int)>& loss_fn,
                               FlopCounter* ledger);

    FilterState& state() { return state_; }
    const FilterState& state() const { return state_; }
    const FilterConfig& config() const { return cfg_; }
    Network& net() { return filter_; }
    void set_lr(double lr) { opt_.set_lr(lr); }
    long window_capacity(int batch_size) const {
        return static_cast<long>(cfg_.window_batches) * batch_size;
    }

    // Per-instance prices of the filter network itself.
    long long forward_cost() const { return fwd_cost_; }
    long long backward_cost() const { return bwd_cost_; }

private:
    void train_on_rows(const Prediction& pred, const std::vector<int>& rows,
                       const std::vector<bool>& labels, FlopCounter* ledger);
    void push_window(const BatchVerdict& verdict, int batch_size);

    Network filter_;
    FilterConfig cfg_;
    FilterState state_;
    SgdMomentum opt_;
    Prediction pending_;
    bool has_pending_ = false;
    long long fwd_cost_ = 0;
    long long bwd_cost_ = 0;
};

}  // namespace frugal
