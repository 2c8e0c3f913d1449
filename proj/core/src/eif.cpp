#include "frugal/eif.hpp"

#include <cmath>
#include <stdexcept>

namespace frugal {

double binary_entropy(double p) {
    if (p < 0.0 || p > 1.0) {
        throw std::invalid_argument("binary_entropy: p outside [0, 1]");
    }
    double h = 0.0;
    if (p > 0.0) h -= p * std::log(p);
    if (p < 1.0) h -= (1.0 - p) * std::log(1.0 - p);
    return h;
}

Prediction predict(Network& filter, const Tensor& batch, bool record) {
    Tensor logits = filter.forward(batch, record);
    if (logits.ndim() != 2 || logits.dim(1) != 2) {
        throw std::invalid_argument("predict: filter network must emit two logits per instance");
    }
    const int m = logits.dim(0);
    // softmax through the shared head so prediction and training see the
    // exact same probabilities
    std::vector<int> dummy(static_cast<size_t>(m), 0);
    SmceResult sm = softmax_cross_entropy(logits, dummy);

    Prediction out;
    out.probs = std::move(sm.probs);
    out.p_high.resize(static_cast<size_t>(m));
    out.entropy.resize(static_cast<size_t>(m));
    out.pred_high.resize(static_cast<size_t>(m));
    for (int i = 0; i < m; ++i) {
        const double p = out.probs(i, 0);
        out.p_high[static_cast<size_t>(i)] = p;
        out.entropy[static_cast<size_t>(i)] = binary_entropy(p);
        out.pred_high[static_cast<size_t>(i)] = p >= 0.5;
    }
    return out;
}

std::optional<double> true_high_ratio(const FilterState& state, long window_capacity) {
    if (window_capacity <= 0) {
        throw std::invalid_argument("true_high_ratio: window capacity must be positive");
    }
    if (state.window_records < window_capacity) {
        return std::nullopt;
    }
    return static_cast<double>(state.window_true_high) / static_cast<double>(state.window_records);
}

void update_threshold(FilterState& state, double r_th, const FilterConfig& cfg) {
    state.t_loss *= (r_th >= cfg.r_set) ? cfg.alpha1 : cfg.alpha2;
    ++state.threshold_updates;
}

std::vector<int> uncertainty_sample(const std::vector<bool>& pred_high,
                                    const std::vector<double>& entropy, double entropy_t) {
    if (pred_high.size() != entropy.size()) {
        throw std::invalid_argument("uncertainty_sample: size mismatch");
    }
    std::vector<int> picked;
    for (size_t i = 0; i < pred_high.size(); ++i) {
        if (!pred_high[i] && entropy[i] > entropy_t) {
            picked.push_back(static_cast<int>(i));
        }
    }
    return picked;
}

double raw_weight(bool label_high, double r_set) {
    if (r_set <= 0.0 || r_set >= 1.0) {
        throw std::invalid_argument("raw_weight: r_set must lie strictly inside (0, 1)");
    }
    return label_high ? 1.0 / r_set : 1.0 / (1.0 - r_set);
}

WeightedLoss filter_loss(const Tensor& probs, const std::vector<int>& rows,
                         const std::vector<bool>& label_high, double r_set) {
    if (rows.size() != label_high.size()) {
        throw std::invalid_argument("filter_loss: rows and labels must align");
    }
    WeightedLoss out;
    if (rows.empty()) {
        return out;
    }
    out.weights.resize(rows.size());
    double wsum = 0.0;
    for (size_t k = 0; k < rows.size(); ++k) {
        out.weights[k] = raw_weight(label_high[k], r_set);
        wsum += out.weights[k];
    }
    for (size_t k = 0; k < rows.size(); ++k) {
        out.weights[k] /= wsum;
        const int cls = label_high[k] ? 0 : 1;
        const double p = std::max(probs(rows[k], cls), 1e-300);
        out.loss += out.weights[k] * -std::log(p);
    }
    return out;
}

InstanceFilter::InstanceFilter(Network filter, FilterConfig cfg, int num_main_classes,
                               SgdConfig opt)
    : filter_(std::move(filter)), cfg_(cfg), opt_(filter_.params(), opt) {
    if (num_main_classes < 2) {
        throw std::invalid_argument("InstanceFilter: main task needs at least two classes");
    }
    state_.t_loss =
        cfg_.t_init < 0.0 ? std::log(static_cast<double>(num_main_classes)) : cfg_.t_init;

    const NetCost costs = total_costs(filter_);
    fwd_cost_ = costs.fwd + flops_smce_forward(2);
    bwd_cost_ = costs.ep + costs.wg + flops_smce_backward(2);
}

BatchVerdict InstanceFilter::begin_batch(const Tensor& batch, FlopCounter* ledger) {
    const int m = batch.dim(0);
    pending_ = predict(filter_, batch, /*record=*/true);
    has_pending_ = true;
    if (ledger != nullptr) {
        ledger->filter_forward += static_cast<long long>(m) * fwd_cost_;
    }

    BatchVerdict v;
    v.items.resize(static_cast<size_t>(m));
    std::vector<int> sampled = uncertainty_sample(pending_.pred_high, pending_.entropy,
                                                  cfg_.entropy_t);
    size_t next_sample = 0;
    for (int i = 0; i < m; ++i) {
        InstanceVerdict& it = v.items[static_cast<size_t>(i)];
        it.pred_high = pending_.pred_high[static_cast<size_t>(i)];
        it.p_high = pending_.p_high[static_cast<size_t>(i)];
        it.entropy = pending_.entropy[static_cast<size_t>(i)];
        if (it.pred_high) {
            it.role = Role::kPreserved;
            v.preserved.push_back(i);
        } else if (next_sample < sampled.size() && sampled[next_sample] == i) {
            it.role = Role::kSampled;
            v.sampled.push_back(i);
            ++next_sample;
        } else {
            it.role = Role::kDropped;
            v.dropped.push_back(i);
        }
    }
    return v;
}

void InstanceFilter::finish_batch(BatchVerdict& verdict,
                                  const std::vector<double>& preserved_losses,
                                  const std::vector<double>& sampled_losses,
                                  FlopCounter* ledger) {
    if (!has_pending_) {
        throw std::logic_error("finish_batch: no batch in flight");
    }
    if (preserved_losses.size() != verdict.preserved.size() ||
        sampled_losses.size() != verdict.sampled.size()) {
        throw std::invalid_argument("finish_batch: loss vectors must align with the verdict");
    }
    has_pending_ = false;

    std::vector<int> rows;
    std::vector<bool> labels;
    rows.reserve(preserved_losses.size() + sampled_losses.size());
    labels.reserve(rows.capacity());
    auto attach = [&](const std::vector<int>& idx, const std::vector<double>& losses) {
        for (size_t k = 0; k < idx.size(); ++k) {
            InstanceVerdict& it = verdict.items[static_cast<size_t>(idx[k])];
            it.has_label = true;
            it.loss = losses[k];
            it.label_high = label_loss(losses[k], state_.t_loss);
            rows.push_back(idx[k]);
            labels.push_back(it.label_high);
        }
    };
    attach(verdict.preserved, preserved_losses);
    attach(verdict.sampled, sampled_losses);

    verdict.labeled = static_cast<int>(rows.size());
    verdict.wrong_predictions = 0;
    for (const InstanceVerdict& it : verdict.items) {
        if (it.has_label && it.pred_high != it.label_high) {
            ++verdict.wrong_predictions;
        }
    }

    train_on_rows(pending_, rows, labels, ledger);
    push_window(verdict, static_cast<int>(verdict.items.size()));
}

BatchVerdict InstanceFilter::warmup_batch(const Tensor& batch, const std::vector<double>& losses,
                                          FlopCounter* ledger) {
    const int m = batch.dim(0);
    if (losses.size() != static_cast<size_t>(m)) {
        throw std::invalid_argument("warmup_batch: need one loss per instance");
    }
    Prediction pred = predict(filter_, batch, /*record=*/true);
    if (ledger != nullptr) {
        ledger->filter_forward += static_cast<long long>(m) * fwd_cost_;
    }

    // every instance went through the main network, so all are preserved and
    // all carry labels
    BatchVerdict v;
    v.items.resize(static_cast<size_t>(m));
    std::vector<int> rows(static_cast<size_t>(m));
    std::vector<bool> labels(static_cast<size_t>(m));
    for (int i = 0; i < m; ++i) {
        InstanceVerdict& it = v.items[static_cast<size_t>(i)];
        it.role = Role::kPreserved;
        it.pred_high = pred.pred_high[static_cast<size_t>(i)];
        it.p_high = pred.p_high[static_cast<size_t>(i)];
        it.entropy = pred.entropy[static_cast<size_t>(i)];
        it.has_label = true;
        it.loss = losses[static_cast<size_t>(i)];
        it.label_high = label_loss(it.loss, state_.t_loss);
        v.preserved.push_back(i);
        rows[static_cast<size_t>(i)] = i;
        labels[static_cast<size_t>(i)] = it.label_high;
        if (it.pred_high != it.label_high) {
            ++v.wrong_predictions;
        }
    }
    v.labeled = m;

    train_on_rows(pred, rows, labels, ledger);
    push_window(v, m);
    return v;
}

BatchVerdict InstanceFilter::process_batch(const Tensor& batch,
                                           const std::function<double(int)>& loss_fn,
                                           FlopCounter* ledger) {
    BatchVerdict v = begin_batch(batch, ledger);
    std::vector<double> preserved_losses;
    preserved_losses.reserve(v.preserved.size());
    for (int i : v.preserved) {
        preserved_losses.push_back(loss_fn(i));
    }
    std::vector<double> sampled_losses;
    sampled_losses.reserve(v.sampled.size());
    for (int i : v.sampled) {
        sampled_losses.push_back(loss_fn(i));
    }
    finish_batch(v, preserved_losses, sampled_losses, ledger);
    return v;
}

void InstanceFilter::train_on_rows(const Prediction& pred, const std::vector<int>& rows,
                                   const std::vector<bool>& labels, FlopCounter* ledger) {
    if (rows.empty()) {
        return;
    }
    const int m = pred.probs.dim(0);
    std::vector<double> row_weights;
    if (cfg_.balanced) {
        row_weights = filter_loss(pred.probs, rows, labels, cfg_.r_set).weights;
    } else {
        row_weights.assign(rows.size(), 1.0 / static_cast<double>(rows.size()));
    }

    std::vector<double> weights(static_cast<size_t>(m), 0.0);
    std::vector<int> full_labels(static_cast<size_t>(m), 0);
    for (size_t k = 0; k < rows.size(); ++k) {
        weights[static_cast<size_t>(rows[k])] = row_weights[k];
        full_labels[static_cast<size_t>(rows[k])] = labels[k] ? 0 : 1;
    }
    Tensor delta = smce_backward(pred.probs, full_labels, weights);
    filter_.zero_grads();
    filter_.backward(delta, &rows);
    opt_.step(filter_.params(), filter_.grads());
    if (ledger != nullptr) {
        ledger->filter_train += static_cast<long long>(rows.size()) * bwd_cost_;
    }
}

void InstanceFilter::push_window(const BatchVerdict& verdict, int batch_size) {
    ++state_.batches_seen;
    state_.window_records += batch_size;
    for (const InstanceVerdict& it : verdict.items) {
        if (it.pred_high && it.has_label && it.label_high) {
            ++state_.window_true_high;
        }
    }
    const long cap = window_capacity(batch_size);
    std::optional<double> r = true_high_ratio(state_, cap);
    if (r.has_value()) {
        state_.last_r_th = *r;
        if (cfg_.adapt) {
            update_threshold(state_, *r, cfg_);
        }
        state_.window_records = 0;
        state_.window_true_high = 0;
    }
}

}  // namespace frugal
