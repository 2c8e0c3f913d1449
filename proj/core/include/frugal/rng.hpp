#pragma once

#include <cstdint>
#include <vector>

#include "frugal/tensor.hpp"

namespace frugal {

// Counter-based generator (splitmix64 over a Weyl sequence). Every draw is a
// pure function of (seed, counter), so runs are bit-reproducible across
// platforms; none of the platform <random> distributions are used anywhere.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : seed_(seed), counter_(0) {}

    std::uint64_t next_u64();

    // uniform in [0, 1), 53-bit mantissa
    double next_double();

    // uniform integer in [0, n), n > 0
    std::uint64_t next_below(std::uint64_t n);

    // standard Box-Muller; each call consumes two uniforms
    double next_normal(double mean, double stddev);

    void fill_normal(Tensor& t, double mean, double stddev);
    void fill_uniform(Tensor& t, double lo, double hi);

    // Fisher-Yates, in place
    template <typename T>
    void shuffle(std::vector<T>& v) {
        for (std::size_t i = v.size(); i > 1; --i) {
            std::size_t j = static_cast<std::size_t>(next_below(i));
            std::swap(v[i - 1], v[j]);
        }
    }

    // independent child stream; same (seed, tag) always yields the same child
    Rng fork(std::uint64_t tag) const;

    std::uint64_t seed() const { return seed_; }

private:
    std::uint64_t seed_;
    std::uint64_t counter_;
};

}  // namespace frugal
