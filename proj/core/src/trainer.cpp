#include "frugal/trainer.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <memory>
#include <numeric>
#include <stdexcept>

#include "frugal/checkpoint.hpp"
#include "frugal/eif.hpp"
#include "frugal/metrics.hpp"
#include "frugal/optimizer.hpp"

namespace frugal {

double TrainResult::reduction_inclusive() const {
    if (baseline_flops == 0) return 0.0;
    return 1.0 - static_cast<double>(ledger.total()) / static_cast<double>(baseline_flops);
}

double TrainResult::reduction_exclusive() const {
    if (baseline_flops == 0) return 0.0;
    const std::uint64_t main_spend =
        ledger.forward_main + ledger.errorprop_main + ledger.weightgrad_main;
    return 1.0 - static_cast<double>(main_spend) / static_cast<double>(baseline_flops);
}

EvalResult evaluate(Network& net, const Dataset& test, int batch) {
    const int n = test.size();
    const int k = test.num_classes;
    EvalResult res;
    res.confusion.assign(static_cast<size_t>(k), std::vector<long>(static_cast<size_t>(k), 0));
    if (n == 0) return res;

    std::vector<int> order(static_cast<size_t>(n));
    std::iota(order.begin(), order.end(), 0);

    long correct = 0;
    double loss_sum = 0.0;
    for (int start = 0; start < n; start += batch) {
        const int m = std::min(batch, n - start);
        Batch b = take_batch(test, order, static_cast<size_t>(start), m);
        Tensor logits = net.forward(b.x, /*record=*/false);
        SmceResult sm = softmax_cross_entropy(logits, b.y);
        for (int i = 0; i < m; ++i) {
            loss_sum += sm.losses(i);
            int best = 0;
            for (int c = 1; c < k; ++c) {
                if (sm.probs(i, c) > sm.probs(i, best)) best = c;
            }
            if (best == b.y[static_cast<size_t>(i)]) ++correct;
            ++res.confusion[static_cast<size_t>(b.y[static_cast<size_t>(i)])]
                           [static_cast<size_t>(best)];
        }
    }
    res.accuracy = static_cast<double>(correct) / n;
    res.mean_loss = loss_sum / n;
    return res;
}

void backward_with_pruning(Network& net, const std::vector<LayerCost>& costs, Tensor delta, int m,
                           bool emp_on, const PruneConfig& pcfg, FlopCounter& ledger) {
    const std::uint64_t um = static_cast<std::uint64_t>(m);
    std::vector<Layer*> layers = net.layers();
    for (int i = static_cast<int>(layers.size()) - 1; i >= 0; --i) {
        const bool need_dx = i > 0;
        auto* conv = dynamic_cast<ConvLayer*>(layers[static_cast<size_t>(i)]);
        if (conv != nullptr) {
            PruneDecision decision;
            if (emp_on) {
                decision = decide(*conv, delta, pcfg, &ledger);
            } else {
                decision.n_total = dims_of(*conv).n;
                decision.keep.resize(static_cast<size_t>(decision.n_total));
                std::iota(decision.keep.begin(), decision.keep.end(), 0);
            }
            delta = pruned_backward(*conv, delta, decision, &ledger, need_dx);
        } else {
            delta = layers[static_cast<size_t>(i)]->backward(delta, need_dx);
            ledger.errorprop_main += um * costs[static_cast<size_t>(i)].ep;
            ledger.weightgrad_main += um * costs[static_cast<size_t>(i)].wg;
        }
    }
}

namespace {

struct BatchStats {
    int preserved = 0;
    int sampled = 0;
    int dropped = 0;
    int labeled = 0;
    int wrong = 0;
    double loss = 0.0;  // mean loss over instances that got a main forward
};

}  // namespace

TrainResult train_run(const Config& cfg, const Dataset& train, const Dataset& test,
                      const std::string& out_dir, bool verbose) {
    if (cfg.batch <= 0) throw std::invalid_argument("train_run: batch must be positive");
    if (cfg.epochs < 0 || cfg.warmup_epochs < 0) {
        throw std::invalid_argument("train_run: epoch counts must be non-negative");
    }
    if (cfg.warmup_epochs > 0 && !cfg.eif) {
        throw std::invalid_argument("train_run: warm-up only applies when the filter is enabled");
    }
    const int k = train.num_classes;
    const int h = train.images.dim(2);
    const int w = train.images.dim(3);

    Rng root(cfg.seed);
    Rng net_rng = root.fork(1);
    Network main = make_lenet(net_rng, h, w, k);
    SgdMomentum opt(main.params(), {cfg.lr, cfg.momentum, cfg.weight_decay});

    std::unique_ptr<InstanceFilter> filter;
    if (cfg.eif) {
        Rng filter_rng = root.fork(2);
        FilterConfig fc;
        fc.r_set = cfg.r_set;
        fc.alpha1 = cfg.alpha1;
        fc.alpha2 = cfg.alpha2;
        fc.window_batches = cfg.window_batches;
        fc.entropy_t = cfg.entropy_t;
        fc.t_init = cfg.t_init;
        fc.adapt = cfg.eif_adapt;
        fc.balanced = cfg.eif_balanced;
        filter = std::make_unique<InstanceFilter>(make_filter_net(filter_rng, h, w), fc, k,
                                                  SgdConfig{cfg.filter_lr, cfg.filter_momentum, 0.0});
    }

    const std::vector<LayerCost> costs = network_costs(main);
    const NetCost totals = total_costs(main);
    PruneConfig pcfg;
    pcfg.alpha = cfg.emp_alpha;
    pcfg.gamma1 = cfg.gamma1;
    pcfg.gamma2 = cfg.gamma2;
    pcfg.normalize = cfg.emp_normalize;

    TrainResult res;
    res.price_fwd = totals.fwd + flops_smce_forward(k);
    res.price_bwd = totals.ep + totals.wg + flops_smce_backward(k);
    res.price_conv_bwd = totals.ep_conv + totals.wg_conv;

    std::unique_ptr<MetricsWriter> batch_log;
    std::unique_ptr<MetricsWriter> epoch_log;
    if (!out_dir.empty()) {
        std::filesystem::create_directories(out_dir);
        batch_log = std::make_unique<MetricsWriter>(
            out_dir + "/metrics.csv",
            std::vector<std::string>{"epoch", "batch", "warmup", "m", "preserved", "sampled",
                                     "dropped", "labeled", "wrong", "t_loss", "r_th", "loss",
                                     "flops_total"});
        epoch_log = std::make_unique<MetricsWriter>(
            out_dir + "/epochs.csv",
            std::vector<std::string>{"epoch", "test_accuracy", "test_loss", "train_loss",
                                     "forward_main", "errorprop_main", "weightgrad_main",
                                     "filter_forward", "filter_train", "selection_overhead",
                                     "flops_total"});
        std::FILE* cf = std::fopen((out_dir + "/config.txt").c_str(), "wb");
        if (cf == nullptr) throw std::runtime_error("train_run: cannot write config echo");
        const std::string dump = dump_config(cfg);
        std::fwrite(dump.data(), 1, dump.size(), cf);
        std::fclose(cf);
    }

    const int total_epochs = cfg.warmup_epochs + cfg.epochs;
    const int n_train = train.size();
    std::vector<int> order(static_cast<size_t>(n_train));
    std::iota(order.begin(), order.end(), 0);

    const std::vector<double> nothing;
    for (int epoch = 0; epoch < total_epochs; ++epoch) {
        const bool warm = epoch < cfg.warmup_epochs;
        Rng perm_rng = root.fork(100 + static_cast<uint64_t>(epoch));
        perm_rng.shuffle(order);

        double epoch_loss = 0.0;
        long epoch_loss_batches = 0;
        const int batches = n_train / cfg.batch;  // incomplete tail is skipped
        for (int bi = 0; bi < batches; ++bi) {
            Batch b = take_batch(train, order, static_cast<size_t>(bi) * cfg.batch, cfg.batch);
            const int m = cfg.batch;
            res.arrivals += m;
            BatchStats st;

            if (!cfg.eif) {
                // no filter: every instance is trained on
                Tensor logits = main.forward(b.x, /*record=*/true);
                SmceResult sm = softmax_cross_entropy(logits, b.y);
                res.ledger.forward_main += static_cast<std::uint64_t>(m) * res.price_fwd;
                double lsum = 0.0;
                for (int i = 0; i < m; ++i) lsum += sm.losses(i);
                st.loss = lsum / m;
                st.preserved = m;

                const std::vector<double> mean_w(static_cast<size_t>(m), 1.0 / m);
                Tensor delta = smce_backward(sm.probs, b.y, mean_w);
                res.ledger.errorprop_main +=
                    static_cast<std::uint64_t>(m) * flops_smce_backward(k);
                main.zero_grads();
                backward_with_pruning(main, costs, std::move(delta), m, cfg.emp, pcfg,
                                      res.ledger);
                opt.step(main.params(), main.grads());
            } else if (warm) {
                Tensor logits = main.forward(b.x, /*record=*/true);
                SmceResult sm = softmax_cross_entropy(logits, b.y);
                res.ledger.forward_main += static_cast<std::uint64_t>(m) * res.price_fwd;
                std::vector<double> losses(static_cast<size_t>(m));
                double lsum = 0.0;
                for (int i = 0; i < m; ++i) {
                    losses[static_cast<size_t>(i)] = sm.losses(i);
                    lsum += sm.losses(i);
                }
                st.loss = lsum / m;
                st.preserved = m;

                BatchVerdict v = filter->warmup_batch(b.x, losses, &res.ledger);
                st.labeled = v.labeled;
                st.wrong = v.wrong_predictions;

                const std::vector<double> mean_w(static_cast<size_t>(m), 1.0 / m);
                Tensor delta = smce_backward(sm.probs, b.y, mean_w);
                res.ledger.errorprop_main +=
                    static_cast<std::uint64_t>(m) * flops_smce_backward(k);
                main.zero_grads();
                backward_with_pruning(main, costs, std::move(delta), m, cfg.emp, pcfg,
                                      res.ledger);
                opt.step(main.params(), main.grads());
            } else {
                BatchVerdict v = filter->begin_batch(b.x, &res.ledger);
                st.preserved = static_cast<int>(v.preserved.size());
                st.sampled = static_cast<int>(v.sampled.size());
                st.dropped = static_cast<int>(v.dropped.size());

                SmceResult smp;
                std::vector<int> yp;
                std::vector<double> preserved_losses(v.preserved.size());
                if (!v.preserved.empty()) {
                    Tensor xp = gather_rows(b.x, v.preserved);
                    yp.reserve(v.preserved.size());
                    for (int i : v.preserved) yp.push_back(b.y[static_cast<size_t>(i)]);
                    Tensor logits = main.forward(xp, /*record=*/true);
                    smp = softmax_cross_entropy(logits, yp);
                    res.ledger.forward_main +=
                        static_cast<std::uint64_t>(v.preserved.size()) * res.price_fwd;
                    double lsum = 0.0;
                    for (size_t i = 0; i < v.preserved.size(); ++i) {
                        preserved_losses[i] = smp.losses(static_cast<int>(i));
                        lsum += preserved_losses[i];
                    }
                    st.loss = lsum / static_cast<double>(v.preserved.size());
                }

                // sampled instances only feed the filter labels; their main
                // forward is an overhead of the selection machinery
                std::vector<double> sampled_losses(v.sampled.size());
                if (!v.sampled.empty()) {
                    Tensor xs = gather_rows(b.x, v.sampled);
                    std::vector<int> ys;
                    ys.reserve(v.sampled.size());
                    for (int i : v.sampled) ys.push_back(b.y[static_cast<size_t>(i)]);
                    Tensor logits = main.forward(xs, /*record=*/false);
                    SmceResult sms = softmax_cross_entropy(logits, ys);
                    res.ledger.filter_train +=
                        static_cast<std::uint64_t>(v.sampled.size()) * res.price_fwd;
                    for (size_t i = 0; i < v.sampled.size(); ++i) {
                        sampled_losses[i] = sms.losses(static_cast<int>(i));
                    }
                }

                filter->finish_batch(v, preserved_losses, sampled_losses, &res.ledger);
                st.labeled = v.labeled;
                st.wrong = v.wrong_predictions;

                if (!v.preserved.empty()) {
                    const int p = static_cast<int>(v.preserved.size());
                    const std::vector<double> mean_w(static_cast<size_t>(p), 1.0 / p);
                    Tensor delta = smce_backward(smp.probs, yp, mean_w);
                    res.ledger.errorprop_main +=
                        static_cast<std::uint64_t>(p) * flops_smce_backward(k);
                    main.zero_grads();
                    backward_with_pruning(main, costs, std::move(delta), p, cfg.emp, pcfg,
                                          res.ledger);
                    opt.step(main.params(), main.grads());
                }
            }

            res.preserved += st.preserved;
            res.sampled += st.sampled;
            res.dropped += st.dropped;
            res.labeled += st.labeled;
            res.wrong += st.wrong;
            if (st.preserved > 0) {
                epoch_loss += st.loss;
                ++epoch_loss_batches;
            }

            if (batch_log && (bi % cfg.log_every == 0 || bi == batches - 1)) {
                const double t_loss = filter ? filter->state().t_loss : 0.0;
                const double r_th = filter ? filter->state().last_r_th : -1.0;
                batch_log->row({static_cast<long long>(epoch), static_cast<long long>(bi),
                                static_cast<long long>(warm ? 1 : 0), static_cast<long long>(m),
                                static_cast<long long>(st.preserved),
                                static_cast<long long>(st.sampled),
                                static_cast<long long>(st.dropped),
                                static_cast<long long>(st.labeled),
                                static_cast<long long>(st.wrong), t_loss, r_th, st.loss,
                                static_cast<long long>(res.ledger.total())});
            }
        }

        EvalResult ev = evaluate(main, test, cfg.batch);
        res.final_accuracy = ev.accuracy;
        res.final_test_loss = ev.mean_loss;
        res.last_train_loss = epoch_loss_batches > 0 ? epoch_loss / epoch_loss_batches : 0.0;
        res.epoch_accuracy.push_back(ev.accuracy);
        if (epoch_log) {
            epoch_log->row({static_cast<long long>(epoch), ev.accuracy, ev.mean_loss,
                            res.last_train_loss,
                            static_cast<long long>(res.ledger.forward_main),
                            static_cast<long long>(res.ledger.errorprop_main),
                            static_cast<long long>(res.ledger.weightgrad_main),
                            static_cast<long long>(res.ledger.filter_forward),
                            static_cast<long long>(res.ledger.filter_train),
                            static_cast<long long>(res.ledger.selection_overhead),
                            static_cast<long long>(res.ledger.total())});
        }
        if (verbose) {
            std::printf("epoch %d%s  test_acc %.4f  test_loss %.4f  train_loss %.4f\n", epoch,
                        warm ? " (warm-up)" : "", ev.accuracy, ev.mean_loss, res.last_train_loss);
            std::fflush(stdout);
        }
    }

    res.baseline_flops =
        static_cast<std::uint64_t>(res.arrivals) * (res.price_fwd + res.price_bwd);

    if (!out_dir.empty()) {
        save_checkpoint(out_dir + "/checkpoint.bin", main);
    }
    return res;
}

}  // namespace frugal
