#include "frugal/gradcheck.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace frugal {

void GradCheckResult::absorb(const GradCheckResult& other) {
    checked += other.checked;
    if (other.max_rel_err > max_rel_err) {
        max_rel_err = other.max_rel_err;
        worst_analytic = other.worst_analytic;
        worst_numeric = other.worst_numeric;
        worst_entry = other.worst_entry;
    }
}

double rel_err(double a, double b) {
    const double denom = std::max({std::fabs(a), std::fabs(b), 1e-6});
    return std::fabs(a - b) / denom;
}

GradCheckResult gradcheck_tensor(Tensor& target, const Tensor& analytic,
                                 const std::function<double()>& scalar, int max_checks, double h,
                                 Rng& rng, const std::string& tag) {
    if (target.numel() != analytic.numel()) {
        throw std::invalid_argument("gradcheck_tensor: analytic shape mismatch for " + tag);
    }
    std::vector<long> picks;
    if (target.numel() <= static_cast<std::size_t>(max_checks)) {
        picks.resize(static_cast<size_t>(target.numel()));
        std::iota(picks.begin(), picks.end(), 0L);
    } else {
        for (int k = 0; k < max_checks; ++k) {
            picks.push_back(static_cast<long>(rng.next_below(static_cast<uint64_t>(target.numel()))));
        }
        std::sort(picks.begin(), picks.end());
        picks.erase(std::unique(picks.begin(), picks.end()), picks.end());
    }

    GradCheckResult res;
    double* data = target.data();
    for (long i : picks) {
        const double keep = data[i];
        data[i] = keep + h;
        const double up = scalar();
        data[i] = keep - h;
        const double down = scalar();
        data[i] = keep;

        const double numeric = (up - down) / (2.0 * h);
        const double a = analytic.data()[i];
        const double e = rel_err(a, numeric);
        ++res.checked;
        if (e > res.max_rel_err) {
            res.max_rel_err = e;
            res.worst_analytic = a;
            res.worst_numeric = numeric;
            res.worst_entry = tag + "[" + std::to_string(i) + "]";
        }
    }
    return res;
}

namespace {

double dot_all(const Tensor& a, const Tensor& b) {
    double s = 0.0;
    for (std::size_t k = 0; k < a.numel(); ++k) s += a[k] * b[k];
    return s;
}

// J = <dout, layer(x)> with a fixed random dout is linear in the inputs and
// parameters, so the only finite-difference error left is roundoff.
GradCheckResult check_conv(int stride, int pad, std::uint64_t seed, int max_checks, double h) {
    const Shape3 in{2, 6, 6};
    ConvLayer conv(in, 3, 3, 3, stride, pad);
    Rng rng(seed);
    conv.init_params(rng);
    rng.fill_normal(conv.bias(), 0.0, 0.5);
    Tensor x({2, in.c, in.h, in.w});
    rng.fill_normal(x, 0.0, 1.0);
    const Shape3 o = conv.out_shape();
    Tensor dout({2, o.c, o.h, o.w});
    rng.fill_normal(dout, 0.0, 1.0);

    conv.forward(x, true);
    Tensor din = conv.backward_error(dout, nullptr);
    conv.zero_grads();
    conv.backward_weights(dout, nullptr);

    auto fn = [&] { return dot_all(conv.forward(x, false), dout); };
    Rng pick(seed + 101);
    GradCheckResult res = gradcheck_tensor(x, din, fn, max_checks, h, pick, "x");
    res.absorb(gradcheck_tensor(conv.weights(), conv.weight_grads(), fn, max_checks, h, pick, "w"));
    res.absorb(gradcheck_tensor(conv.bias(), conv.bias_grads(), fn, max_checks, h, pick, "b"));
    return res;
}

GradCheckResult check_fc(std::uint64_t seed, int max_checks, double h) {
    FcLayer fc({3, 2, 2}, 5);
    Rng rng(seed);
    fc.init_params(rng);
    rng.fill_normal(fc.bias(), 0.0, 0.5);
    Tensor x({3, 3, 2, 2});
    rng.fill_normal(x, 0.0, 1.0);
    Tensor dout({3, 5, 1, 1});
    rng.fill_normal(dout, 0.0, 1.0);

    fc.forward(x, true);
    Tensor din = fc.backward(dout, true);
    auto fn = [&] { return dot_all(fc.forward(x, false), dout); };
    Rng pick(seed + 101);
    GradCheckResult res = gradcheck_tensor(x, din, fn, max_checks, h, pick, "x");
    res.absorb(gradcheck_tensor(fc.weights(), *fc.grad_tensors()[0], fn, max_checks, h, pick, "w"));
    res.absorb(gradcheck_tensor(fc.bias(), *fc.grad_tensors()[1], fn, max_checks, h, pick, "b"));
    return res;
}

GradCheckResult check_relu(std::uint64_t seed, int max_checks, double h) {
    ReluLayer relu({2, 4, 4});
    Rng rng(seed);
    Tensor x({2, 2, 4, 4});
    rng.fill_normal(x, 0.0, 1.0);
    // keep every entry clear of zero so no nudge crosses the kink
    for (std::size_t k = 0; k < x.numel(); ++k) {
        if (std::fabs(x[k]) < 0.2) x[k] = x[k] < 0.0 ? x[k] - 0.2 : x[k] + 0.2;
    }
    Tensor dout(x.shape());
    rng.fill_normal(dout, 0.0, 1.0);

    relu.forward(x, true);
    Tensor din = relu.backward(dout, true);
    auto fn = [&] { return dot_all(relu.forward(x, false), dout); };
    Rng pick(seed + 101);
    return gradcheck_tensor(x, din, fn, max_checks, h, pick, "x");
}

GradCheckResult check_maxpool(std::uint64_t seed, int max_checks, double h) {
    MaxPoolLayer pool({2, 4, 4}, 2, 2);
    Tensor x({2, 2, 4, 4});
    // distinct values spaced far beyond h so no nudge flips an argmax
    for (std::size_t k = 0; k < x.numel(); ++k) {
        x[k] = 0.1 * static_cast<double>(k % 37) + 1e-3 * static_cast<double>(k);
    }
    Tensor dout({2, 2, 2, 2});
    Rng rng(seed);
    rng.fill_normal(dout, 0.0, 1.0);

    pool.forward(x, true);
    Tensor din = pool.backward(dout, true);
    auto fn = [&] { return dot_all(pool.forward(x, false), dout); };
    Rng pick(seed + 101);
    return gradcheck_tensor(x, din, fn, max_checks, h, pick, "x");
}

GradCheckResult check_smce(std::uint64_t seed, int max_checks, double h) {
    const int m = 4, K = 6;
    Tensor logits({m, K});
    Rng rng(seed);
    rng.fill_normal(logits, 0.0, 2.0);
    const std::vector<int> labels{5, 0, 2, 3};
    const std::vector<double> weights{0.4, 0.3, 0.2, 0.1};

    SmceResult r = softmax_cross_entropy(logits, labels);
    Tensor delta = smce_backward(r.probs, labels, weights);
    auto fn = [&] {
        SmceResult s = softmax_cross_entropy(logits, labels);
        double sum = 0.0;
        for (int i = 0; i < m; ++i) sum += weights[static_cast<std::size_t>(i)] * s.losses(i);
        return sum;
    };
    Rng pick(seed + 101);
    return gradcheck_tensor(logits, delta, fn, max_checks, h, pick, "z");
}

GradCheckResult check_composite(std::uint64_t seed, int max_checks, double h) {
    Rng rng(seed);
    Network net;
    auto c1 = std::make_unique<ConvLayer>(Shape3{1, 8, 8}, 3, 3, 3, 1, 0);
    c1->set_name("c1");
    c1->init_params(rng);
    net.add(std::move(c1));
    auto c2 = std::make_unique<ConvLayer>(Shape3{3, 6, 6}, 4, 3, 3, 2, 1);
    c2->set_name("c2");
    c2->init_params(rng);
    net.add(std::move(c2));
    auto f = std::make_unique<FcLayer>(Shape3{4, 3, 3}, 5);
    f->set_name("f");
    f->init_params(rng);
    net.add(std::move(f));

    Tensor x({3, 1, 8, 8});
    rng.fill_normal(x, 0.0, 1.0);
    const std::vector<int> labels{0, 2, 4};
    Rng pick(seed + 101);
    return gradcheck_network(net, x, labels, max_checks, h, pick);
}

}  // namespace

std::vector<SuiteEntry> gradcheck_suite(std::uint64_t seed, int max_checks, double h) {
    std::vector<SuiteEntry> out;
    out.push_back({"conv-s1-p0", check_conv(1, 0, seed + 1, max_checks, h)});
    out.push_back({"conv-s1-p1", check_conv(1, 1, seed + 2, max_checks, h)});
    out.push_back({"conv-s2-p0", check_conv(2, 0, seed + 3, max_checks, h)});
    out.push_back({"conv-s2-p1", check_conv(2, 1, seed + 4, max_checks, h)});
    out.push_back({"fc", check_fc(seed + 5, max_checks, h)});
    out.push_back({"relu", check_relu(seed + 6, max_checks, h)});
    out.push_back({"maxpool", check_maxpool(seed + 7, max_checks, h)});
    out.push_back({"softmax-ce", check_smce(seed + 8, max_checks, h)});
    out.push_back({"conv-conv-fc", check_composite(seed + 9, max_checks, h)});
    return out;
}

GradCheckResult gradcheck_network(Network& net, const Tensor& x, const std::vector<int>& labels,
                                  int max_per_tensor, double h, Rng& rng) {
    const int m = x.dim(0);
    const std::vector<double> mean_w(static_cast<size_t>(m), 1.0 / m);

    // analytic pass
    Tensor logits = net.forward(x, /*record=*/true);
    SmceResult sm = softmax_cross_entropy(logits, labels);
    net.zero_grads();
    net.backward(smce_backward(sm.probs, labels, mean_w));

    auto scalar = [&]() {
        Tensor l = net.forward(x, /*record=*/false);
        SmceResult s = softmax_cross_entropy(l, labels);
        double sum = 0.0;
        for (int i = 0; i < m; ++i) sum += s.losses(i);
        return sum / m;
    };

    GradCheckResult total;
    std::vector<Tensor*> params = net.params();
    std::vector<Tensor*> grads = net.grads();
    const std::vector<std::string> names = net.param_names();
    for (size_t t = 0; t < params.size(); ++t) {
        total.absorb(
            gradcheck_tensor(*params[t], *grads[t], scalar, max_per_tensor, h, rng, names[t]));
    }
    return total;
}

}  // namespace frugal
