#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace frugal {

class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Every knob of a run, with working defaults. File and command line both
// address fields by the dotted key listed next to each field; unknown keys
// are an error, not a warning.
struct Config {
    // run
    uint64_t seed = 1;              // run.seed
    std::string data_dir = "data";  // run.data_dir
    std::string out_dir = "out";    // run.out_dir
    int log_every = 50;             // run.log_every

    // train
    int epochs = 5;                 // train.epochs
    int warmup_epochs = 1;          // train.warmup_epochs
    int batch = 64;                 // train.batch
    double lr = 0.02;               // train.lr
    double momentum = 0.9;          // train.momentum
    double weight_decay = 0.0;      // train.weight_decay
    int per_class = 1000;           // train.per_class, 0 keeps the full set

    // eif
    bool eif = true;                // eif.enabled
    double r_set = 0.3;             // eif.r_set
    double alpha1 = 1.1;            // eif.alpha1
    double alpha2 = 0.9;            // eif.alpha2
    int window_batches = 5;         // eif.window_batches
    double entropy_t = 0.5;         // eif.entropy_t
    double t_init = -1.0;           // eif.t_init, negative means ln(num_classes)
    bool eif_adapt = true;          // eif.adapt
    bool eif_balanced = true;       // eif.balanced
    double filter_lr = 0.05;        // eif.filter_lr
    double filter_momentum = 0.9;   // eif.filter_momentum

    // emp
    bool emp = true;                // emp.enabled
    double emp_alpha = 0.7;         // emp.alpha
    double gamma1 = 1.0;            // emp.gamma1
    double gamma2 = 1.0;            // emp.gamma2
    bool emp_normalize = true;      // emp.normalize
};

// Applies one key/value pair. Throws ConfigError for unknown keys or values
// that do not parse as the field's type.
void apply_kv(Config& cfg, const std::string& key, const std::string& value);

// Reads a file of `key = value` lines; '#' starts a comment, blank lines are
// skipped.
Config load_config(const std::string& path);

// Applies "key=value" strings, e.g. collected from the command line.
void apply_overrides(Config& cfg, const std::vector<std::string>& pairs);

// Serializes every field back to file syntax, keys in a stable order.
std::string dump_config(const Config& cfg);

bool parse_bool(const std::string& value);

}  // namespace frugal
