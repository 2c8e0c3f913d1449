#pragma once

#include <cstdint>
#include <vector>

#include "frugal/data.hpp"
#include "frugal/rng.hpp"
#include "frugal/tensor.hpp"

namespace frugal {

// ---------------------------------------------------------------------------
// rendered digit corpus
// ---------------------------------------------------------------------------

// Deterministic stand-in for a handwritten-digit corpus: each class is a
// fixed
// stroke template drawn with per-sample affine jitter, stroke thickness,
// brightness, blur, and pixel noise. The output is byte-identical for a
// given config.
struct DigitSetConfig {
    int per_class = 1000;
    uint64_t seed = 1;
    int h = 28;
    int w = 28;
};

struct DigitSet {
    IdxData images;  // [n, h, w] unsigned bytes
    IdxData labels;  // [n]
};

DigitSet render_digit_set(const DigitSetConfig& cfg);

// ---------------------------------------------------------------------------
// difficulty-graded stream
// ---------------------------------------------------------------------------

// Instance stream with a closed-form loss oracle, for exercising the filter
// without a real main network. Every instance carries a difficulty d: hard
// instances draw d from [0.5, 1), easy ones from [0, 0.5). The image shows a
// two-class pattern whose contrast falls and whose noise rises with d, so a
// small network can read the difficulty off the pixels. The oracle loss is
// d scaled by a slow exponential decay in the number of instances seen,
// imitating a main network that keeps improving.
//
// Batches are composition-controlled: the hard/easy split is exact and the
// difficulties are stratified within each group, so the count of instances
// above any fixed difficulty barely varies between batches.
struct StreamConfig {
    int batch = 128;
    int h = 14;
    int w = 14;
    double hard_fraction = 0.45;
    double noise = 0.08;       // base pixel noise amplitude
    double loss_scale = 3.2;   // oracle loss at d = 1, t = 0
    double tau = 20000.0;      // decay constant, in instances
    double loss_jitter = 0.05; // relative jitter on the oracle loss
    uint64_t seed = 7;
};

struct StreamBatch {
    Tensor x;                        // [m, 1, h, w]
    std::vector<double> difficulty;  // [m]
    std::vector<double> losses;      // [m], oracle loss at emission time
    std::vector<int> labels;         // [m], pattern class, 0 or 1
};

class SyntheticStream {
public:
    explicit SyntheticStream(StreamConfig cfg);

    StreamBatch next();

    long instances_seen() const { return seen_; }
    // oracle decay factor at the current position in the stream
    double decay() const;

private:
    StreamConfig cfg_;
    Rng rng_;
    long seen_ = 0;
};

}  // namespace frugal
