// Command line front end: train, eval, gradcheck, flops, export-plotdata,
// and make-data. Exit codes: 0 on success, 1 for bad invocations and
// config or IO problems, 2 when a numerical check fails.

#include <cinttypes>
#include <cstdio>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "frugal/checkpoint.hpp"
#include "frugal/config.hpp"
#include "frugal/data.hpp"
#include "frugal/eif.hpp"
#include "frugal/flops.hpp"
#include "frugal/gradcheck.hpp"
#include "frugal/metrics.hpp"
#include "frugal/network.hpp"
#include "frugal/synth.hpp"
#include "frugal/trainer.hpp"

namespace {

using namespace frugal;

constexpr int kOk = 0;
constexpr int kUsage = 1;
constexpr int kNumerical = 2;

std::string split_path(const std::string& dir, const std::string& split, const std::string& kind) {
    const std::string base = dir + "/digits-" + split + "-" + kind + ".idx";
    if (std::filesystem::exists(base)) return base;
    if (std::filesystem::exists(base + ".gz")) return base + ".gz";
    throw DataError("no " + split + " " + kind + " file under " + dir +
                    " (expected " + base + "[.gz]); run `frugal make-data` first");
}

Dataset load_split(const std::string& dir, const std::string& split, int num_classes) {
    return make_dataset(load_idx(split_path(dir, split, "images")),
                        load_idx(split_path(dir, split, "labels")), num_classes);
}

// options shared by every command that builds a Config
struct ConfigCli {
    std::string config_file;
    std::vector<std::string> sets;

    Config resolve() const {
        Config cfg = config_file.empty() ? Config{} : load_config(config_file);
        apply_overrides(cfg, sets);
        return cfg;
    }

    void attach(CLI::App* cmd) {
        cmd->add_option("--config", config_file, "config file of key = value lines")
            ->check(CLI::ExistingFile);
        cmd->add_option("--set", sets, "override one config key, e.g. --set eif.r_set=0.4")
            ->type_name("KEY=VALUE");
    }
};

int cmd_train(const ConfigCli& cc) {
    const Config cfg = cc.resolve();
    Dataset train = load_split(cfg.data_dir, "train", 10);
    const Dataset test = load_split(cfg.data_dir, "test", 10);
    if (cfg.per_class > 0) {
        train = stratified_subset(train, cfg.per_class, cfg.seed);
    }
    std::printf("training on %d instances, testing on %d\n", train.size(), test.size());

    const TrainResult r = train_run(cfg, train, test, cfg.out_dir, /*verbose=*/true);

    std::printf("\narrivals %ld  preserved %ld  sampled %ld  dropped %ld\n", r.arrivals,
                r.preserved, r.sampled, r.dropped);
    std::printf("final test accuracy %.4f\n", r.final_accuracy);
    std::printf("flops: forward_main %" PRIu64 "  errorprop_main %" PRIu64
                "  weightgrad_main %" PRIu64 "\n",
                r.ledger.forward_main, r.ledger.errorprop_main, r.ledger.weightgrad_main);
    std::printf("       filter_forward %" PRIu64 "  filter_train %" PRIu64
                "  selection_overhead %" PRIu64 "\n",
                r.ledger.filter_forward, r.ledger.filter_train, r.ledger.selection_overhead);
    std::printf("       total %" PRIu64 "  full-training baseline %" PRIu64 "\n",
                r.ledger.total(), r.baseline_flops);
    std::printf("reduction: %.2f%% inclusive, %.2f%% exclusive of overheads\n",
                100.0 * r.reduction_inclusive(), 100.0 * r.reduction_exclusive());
    std::printf("run artifacts in %s\n", cfg.out_dir.c_str());
    return kOk;
}

int cmd_eval(const ConfigCli& cc, const std::string& checkpoint) {
    const Config cfg = cc.resolve();
    const Dataset test = load_split(cfg.data_dir, "test", 10);
    Rng rng(cfg.seed);
    Network net = make_lenet(rng, test.images.dim(2), test.images.dim(3), test.num_classes);
    load_checkpoint(checkpoint, net);
    const EvalResult ev = evaluate(net, test, cfg.batch);
    std::printf("accuracy %.4f  mean loss %.4f\n", ev.accuracy, ev.mean_loss);
    std::printf("confusion (rows true, cols predicted):\n");
    for (size_t t = 0; t < ev.confusion.size(); ++t) {
        for (size_t p = 0; p < ev.confusion[t].size(); ++p) {
            std::printf("%6ld", ev.confusion[t][p]);
        }
        std::printf("\n");
    }
    return kOk;
}

int cmd_gradcheck(uint64_t seed, int max_checks, double h, double tolerance) {
    const std::vector<SuiteEntry> suite = gradcheck_suite(seed, max_checks, h);
    long total = 0;
    bool ok = true;
    for (const SuiteEntry& e : suite) {
        const bool pass = e.result.max_rel_err < tolerance;
        std::printf("%-14s max rel err %.3e  (%ld entries)%s\n", e.name.c_str(),
                    e.result.max_rel_err, e.result.checked, pass ? "" : "  FAIL");
        if (!pass) {
            std::printf("%-14s worst %s: analytic %.6e vs numeric %.6e\n", "",
                        e.result.worst_entry.c_str(), e.result.worst_analytic,
                        e.result.worst_numeric);
            ok = false;
        }
        total += e.result.checked;
    }
    if (!ok) {
        std::printf("FAIL: above tolerance %.1e\n", tolerance);
        return kNumerical;
    }
    std::printf("OK: %ld entries all below tolerance %.1e\n", total, tolerance);
    return kOk;
}

void print_cost_table(const char* title, Network& net, int num_classes) {
    std::printf("%s\n", title);
    std::printf("  %-8s %12s %12s %12s\n", "layer", "forward", "errorprop", "weightgrad");
    for (const LayerCost& lc : network_costs(net)) {
        std::printf("  %-8s %12" PRIu64 " %12" PRIu64 " %12" PRIu64 "\n",
                    lc.layer->name().c_str(), lc.fwd, lc.ep, lc.wg);
    }
    const NetCost t = total_costs(net);
    std::printf("  %-8s %12" PRIu64 " %12" PRIu64 " %12" PRIu64 "   (+ head: %" PRIu64
                " fwd, %" PRIu64 " back)\n",
                "total", t.fwd, t.ep, t.wg, flops_smce_forward(num_classes),
                flops_smce_backward(num_classes));
}

int cmd_flops(const ConfigCli& cc, int height, int width, int classes) {
    const Config cfg = cc.resolve();
    Rng rng(cfg.seed);
    Rng main_rng = rng.fork(1);
    Network main = make_lenet(main_rng, height, width, classes);
    print_cost_table("main network, per instance:", main, classes);

    const NetCost mt = total_costs(main);
    const std::uint64_t fwd = mt.fwd + flops_smce_forward(classes);
    const std::uint64_t bwd = mt.ep + mt.wg + flops_smce_backward(classes);
    std::printf("\nper-instance training cost: %" PRIu64 " (forward %" PRIu64 ", backward %" PRIu64
                ")\n",
                fwd + bwd, fwd, bwd);

    Rng filter_rng = rng.fork(2);
    Network filter = make_filter_net(filter_rng, height, width);
    print_cost_table("\nfilter network, per instance:", filter, 2);
    const NetCost ft = total_costs(filter);
    const std::uint64_t ffwd = ft.fwd + flops_smce_forward(2);
    std::printf("\nfilter inference per instance: %" PRIu64 " (%.2f%% of a main training "
                "instance)\n",
                ffwd, 100.0 * static_cast<double>(ffwd) / static_cast<double>(fwd + bwd));

    std::printf("\nselection overhead per mini-batch of %d:\n", cfg.batch);
    for (const LayerCost& lc : network_costs(main)) {
        if (!lc.conv) continue;
        const auto* conv = dynamic_cast<const ConvLayer*>(lc.layer);
        std::printf("  %-8s %12" PRIu64 "\n", lc.layer->name().c_str(),
                    flops_selection_overhead(dims_of(*conv), cfg.batch));
    }

    const double r = cfg.r_set;
    const double a = cfg.emp_alpha;
    const double conv_share = static_cast<double>(mt.ep_conv + mt.wg_conv) /
                              static_cast<double>(bwd);
    const double projected =
        r * (static_cast<double>(fwd) + static_cast<double>(bwd) * (1.0 - conv_share * (1.0 - a))) /
        static_cast<double>(fwd + bwd);
    std::printf("\nprojected main-network spend at r_set=%.2f, alpha=%.2f: %.1f%% of baseline\n",
                r, a, 100.0 * projected);
    return kOk;
}

int cmd_export(const std::string& run_dir) {
    const MetricsTable batches = read_metrics(run_dir + "/metrics.csv");
    const MetricsTable epochs = read_metrics(run_dir + "/epochs.csv");

    const int c_epoch = batches.column("epoch");
    const int c_batch = batches.column("batch");
    const int c_m = batches.column("m");
    const int c_pres = batches.column("preserved");
    const int c_t = batches.column("t_loss");
    const int c_rth = batches.column("r_th");
    if (c_epoch < 0 || c_batch < 0 || c_m < 0 || c_pres < 0 || c_t < 0 || c_rth < 0) {
        throw std::runtime_error("metrics.csv is missing expected columns");
    }

    {
        MetricsWriter w(run_dir + "/plot_filter.csv",
                        {"epoch", "batch", "t_loss", "r_th", "preserved_fraction"});
        for (const auto& row : batches.rows) {
            w.row({static_cast<long long>(row[static_cast<size_t>(c_epoch)]),
                   static_cast<long long>(row[static_cast<size_t>(c_batch)]),
                   row[static_cast<size_t>(c_t)], row[static_cast<size_t>(c_rth)],
                   row[static_cast<size_t>(c_pres)] / row[static_cast<size_t>(c_m)]});
        }
    }
    {
        std::vector<std::string> cols = epochs.columns;
        MetricsWriter w(run_dir + "/plot_epochs.csv", cols);
        for (const auto& row : epochs.rows) {
            std::vector<MetricCell> cells;
            cells.reserve(row.size());
            for (double v : row) cells.push_back(v);
            w.row(cells);
        }
    }
    std::printf("wrote %s/plot_filter.csv and %s/plot_epochs.csv\n", run_dir.c_str(),
                run_dir.c_str());
    return kOk;
}

int cmd_make_data(const std::string& out_dir, int train_per_class, int test_per_class,
                  uint64_t seed) {
    std::filesystem::create_directories(out_dir);
    DigitSetConfig tc;
    tc.per_class = train_per_class;
    tc.seed = seed;
    const DigitSet train = render_digit_set(tc);
    save_idx(out_dir + "/digits-train-images.idx.gz", train.images);
    save_idx(out_dir + "/digits-train-labels.idx.gz", train.labels);

    DigitSetConfig ec;
    ec.per_class = test_per_class;
    ec.seed = seed + 1;
    const DigitSet test = render_digit_set(ec);
    save_idx(out_dir + "/digits-test-images.idx.gz", test.images);
    save_idx(out_dir + "/digits-test-labels.idx.gz", test.labels);

    std::printf("wrote %d train and %d test instances under %s\n", train_per_class * 10,
                test_per_class * 10, out_dir.c_str());
    return kOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"frugal: filtered and pruned CNN training with an exact FLOP ledger"};
    app.require_subcommand(1);

    ConfigCli train_cc;
    CLI::App* train_cmd = app.add_subcommand("train", "run one training configuration");
    train_cc.attach(train_cmd);

    ConfigCli eval_cc;
    std::string eval_checkpoint;
    CLI::App* eval_cmd = app.add_subcommand("eval", "evaluate a checkpoint on the test split");
    eval_cc.attach(eval_cmd);
    eval_cmd->add_option("--checkpoint", eval_checkpoint, "checkpoint file")
        ->required()
        ->check(CLI::ExistingFile);

    uint64_t gc_seed = 1;
    int gc_max = 120;
    double gc_h = 1e-6;
    double gc_tol = 1e-4;
    CLI::App* gc_cmd =
        app.add_subcommand("gradcheck", "compare analytic gradients with central differences");
    gc_cmd->add_option("--seed", gc_seed, "rng seed");
    gc_cmd->add_option("--max-per-tensor", gc_max, "entries checked per tensor");
    gc_cmd->add_option("--step", gc_h, "finite-difference step");
    gc_cmd->add_option("--tolerance", gc_tol, "max relative error accepted");

    ConfigCli flops_cc;
    int fl_h = 28;
    int fl_w = 28;
    int fl_k = 10;
    CLI::App* flops_cmd = app.add_subcommand("flops", "print the analytic cost tables");
    flops_cc.attach(flops_cmd);
    flops_cmd->add_option("--height", fl_h, "input rows");
    flops_cmd->add_option("--width", fl_w, "input cols");
    flops_cmd->add_option("--classes", fl_k, "main-task classes");

    std::string export_run;
    CLI::App* export_cmd =
        app.add_subcommand("export-plotdata", "derive plot-ready tables from a run directory");
    export_cmd->add_option("--run", export_run, "run directory with metrics.csv and epochs.csv")
        ->required();

    std::string md_out = "data";
    int md_train = 1000;
    int md_test = 1000;
    uint64_t md_seed = 11;
    CLI::App* md_cmd = app.add_subcommand("make-data", "render the digit corpus to IDX files");
    md_cmd->add_option("--out", md_out, "output directory");
    md_cmd->add_option("--train-per-class", md_train, "train instances per class");
    md_cmd->add_option("--test-per-class", md_test, "test instances per class");
    md_cmd->add_option("--seed", md_seed, "render seed (test split uses seed+1)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? kOk : kUsage;
    }

    try {
        if (train_cmd->parsed()) return cmd_train(train_cc);
        if (eval_cmd->parsed()) return cmd_eval(eval_cc, eval_checkpoint);
        if (gc_cmd->parsed()) return cmd_gradcheck(gc_seed, gc_max, gc_h, gc_tol);
        if (flops_cmd->parsed()) return cmd_flops(flops_cc, fl_h, fl_w, fl_k);
        if (export_cmd->parsed()) return cmd_export(export_run);
        if (md_cmd->parsed()) return cmd_make_data(md_out, md_train, md_test, md_seed);
    } catch (const ConfigError& e) {
        std::fprintf(stderr, "config error: %s\n", e.what());
        return kUsage;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kUsage;
    }
    return kUsage;
}
