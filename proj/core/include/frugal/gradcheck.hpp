#pragma once

#include <functional>
#include <string>
#include <vector>

#include "frugal/network.hpp"
#include "frugal/rng.hpp"
#include "frugal/tensor.hpp"

namespace frugal {

struct GradCheckResult {
    double max_rel_err = 0.0;
    double worst_analytic = 0.0;
    double worst_numeric = 0.0;
    std::string worst_entry;
    long checked = 0;

    void absorb(const GradCheckResult& other);
};

// relative disagreement with a floor so near-zero gradients do not blow up
double rel_err(double a, double b);

// Central-difference check of `analytic` against the scalar closure: entries
// of `target` are nudged by +/- h and the closure re-evaluated. Checks every
// entry when the tensor is small, otherwise a seeded sample of max_checks.
GradCheckResult gradcheck_tensor(Tensor& target, const Tensor& analytic,
                                 const std::function<double()>& scalar, int max_checks, double h,
                                 Rng& rng, const std::string& tag);

// Checks every parameter tensor of the network against the mean
// cross-entropy loss on one batch. Analytic gradients are produced by a
// single backward pass before any nudging starts.
GradCheckResult gradcheck_network(Network& net, const Tensor& x, const std::vector<int>& labels,
                                  int max_per_tensor, double h, Rng& rng);

struct SuiteEntry {
    std::string name;
    GradCheckResult result;
};

// One finite-difference sweep per layer type, plus a smooth composite network
// of two convolutions and a fully connected head. Piecewise-linear layers are
// probed away from their kinks so the central differences stay meaningful;
// convolutions are covered at stride 1 and 2 with and without padding.
std::vector<SuiteEntry> gradcheck_suite(std::uint64_t seed, int max_checks, double h);

}  // namespace frugal
