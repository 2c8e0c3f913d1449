#include "frugal/rng.hpp"

#include <cmath>
#include <stdexcept>

namespace frugal {

namespace {

constexpr std::uint64_t kWeyl = 0x9E3779B97F4A7C15ull;

std::uint64_t mix64(std::uint64_t z) {
    z ^= z >> 30;
    z *= 0xBF58476D1CE4E5B9ull;
    z ^= z >> 27;
    z *= 0x94D049BB133111EBull;
    z ^= z >> 31;
    return z;
}

}  // namespace

std::uint64_t Rng::next_u64() {
    ++counter_;
    return mix64(seed_ + counter_ * kWeyl);
}

double Rng::next_double() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

std::uint64_t Rng::next_below(std::uint64_t n) {
    if (n == 0) {
        throw std::invalid_argument("rng: next_below(0)");
    }
    // fixed-point multiply; bias is < 2^-64 * n, irrelevant at our scales
    return static_cast<std::uint64_t>(
        (static_cast<unsigned __int128>(next_u64()) * n) >> 64);
}

double Rng::next_normal(double mean, double stddev) {
    if (stddev == 0.0) return mean;
    // u1 in (0,1] so the log is finite
    double u1 = 1.0 - next_double();
    double u2 = next_double();
    double r = std::sqrt(-2.0 * std::log(u1));
    return mean + stddev * r * std::cos(2.0 * M_PI * u2);
}

void Rng::fill_normal(Tensor& t, double mean, double stddev) {
    double* p = t.data();
    for (std::size_t i = 0; i < t.numel(); ++i) p[i] = next_normal(mean, stddev);
}

void Rng::fill_uniform(Tensor& t, double lo, double hi) {
    double* p = t.data();
    for (std::size_t i = 0; i < t.numel(); ++i) p[i] = lo + (hi - lo) * next_double();
}

Rng Rng::fork(std::uint64_t tag) const {
    return Rng(mix64(seed_ ^ mix64(tag + kWeyl)));
}

}  // namespace frugal
