#include <doctest.h>

#include <cmath>
#include <cstdint>
#include <limits>
#include <set>
#include <stdexcept>
#include <vector>

#include "frugal/rng.hpp"
#include "frugal/tensor.hpp"

using namespace frugal;

TEST_SUITE("tensor") {

TEST_CASE("construction zero-fills and tracks shape") {
    Tensor t({2, 3, 4, 5});
    CHECK(t.ndim() == 4);
    CHECK(t.dim(0) == 2);
    CHECK(t.dim(3) == 5);
    CHECK(t.numel() == 120);
    for (std::size_t k = 0; k < t.numel(); ++k) CHECK(t[k] == 0.0);
}

TEST_CASE("index helpers address row-major layout") {
    Tensor t({2, 3, 4, 5});
    t(1, 2, 3, 4) = 7.0;
    CHECK(t[t.numel() - 1] == 7.0);
    Tensor u({3, 4});
    u(2, 3) = -1.0;
    CHECK(u[11] == -1.0);
    CHECK(u.idx2(1, 0) == 4);
    CHECK(t.idx4(0, 1, 0, 0) == 20);
}

TEST_CASE("l1 norm examples") {
    Tensor ones({2, 3, 3});
    ones.fill(1.0);
    CHECK(l1_norm(ones) == doctest::Approx(18.0).epsilon(1e-15));

    Tensor v({3});
    v[0] = 0.5;
    v[1] = -0.5;
    v[2] = 2.0;
    CHECK(l1_norm(v) == doctest::Approx(3.0).epsilon(1e-15));

    Tensor z({4, 4});
    CHECK(l1_norm(z) == 0.0);
}

TEST_CASE("l2 norm of a 3-4 right triangle vector is 5") {
    Tensor v({2});
    v[0] = 3.0;
    v[1] = 4.0;
    CHECK(l2_norm(v) == doctest::Approx(5.0).epsilon(1e-15));
}

TEST_CASE("norms scale homogeneously") {
    Tensor v({17});
    Rng rng(2);
    rng.fill_normal(v, 0.0, 1.0);
    const double l1 = l1_norm(v);
    const double l2 = l2_norm(v);
    for (std::size_t k = 0; k < v.numel(); ++k) v[k] *= -2.5;
    CHECK(l1_norm(v) == doctest::Approx(2.5 * l1).epsilon(1e-12));
    CHECK(l2_norm(v) == doctest::Approx(2.5 * l2).epsilon(1e-12));
}

TEST_CASE("norms match an elementwise reference") {
    Tensor v({40});
    Rng rng(9);
    rng.fill_uniform(v, -3.0, 3.0);
    double s1 = 0.0, s2 = 0.0;
    for (std::size_t k = 0; k < v.numel(); ++k) {
        s1 += std::fabs(v[k]);
        s2 += v[k] * v[k];
    }
    CHECK(l1_norm(v) == doctest::Approx(s1).epsilon(1e-13));
    CHECK(l2_norm(v) == doctest::Approx(std::sqrt(s2)).epsilon(1e-13));
}

TEST_CASE("channel l1 sums one slab only") {
    Tensor t({2, 3, 2, 2});
    t.fill(1.0);
    for (int y = 0; y < 2; ++y)
        for (int x = 0; x < 2; ++x) t(1, 2, y, x) = -4.0;
    CHECK(l1_norm_channel(t, 0, 0) == doctest::Approx(4.0));
    CHECK(l1_norm_channel(t, 1, 2) == doctest::Approx(16.0));
    CHECK(l1_norm_channel(t, 1, 1) == doctest::Approx(4.0));
}

TEST_CASE("reshape keeps data and rejects bad element counts") {
    Tensor t({2, 6});
    for (std::size_t k = 0; k < 12; ++k) t[k] = static_cast<double>(k);
    Tensor r = t.reshape({3, 4});
    CHECK(r.ndim() == 2);
    CHECK(r.dim(0) == 3);
    for (std::size_t k = 0; k < 12; ++k) CHECK(r[k] == static_cast<double>(k));
    CHECK_THROWS_AS(t.reshape({5, 2}), std::invalid_argument);
}

TEST_CASE("full and fill") {
    Tensor t = Tensor::full({2, 2}, 3.5);
    for (std::size_t k = 0; k < 4; ++k) CHECK(t[k] == 3.5);
    t.fill(-1.0);
    for (std::size_t k = 0; k < 4; ++k) CHECK(t[k] == -1.0);
}

TEST_CASE("all_finite flags nan and inf") {
    Tensor t({3});
    CHECK(t.all_finite());
    t[1] = std::nan("");
    CHECK_FALSE(t.all_finite());
    t[1] = 0.0;
    t[2] = std::numeric_limits<double>::infinity();
    CHECK_FALSE(t.all_finite());
}

}  // TEST_SUITE

TEST_SUITE("rng") {

TEST_CASE("same seed gives the same stream") {
    Rng a(42), b(42);
    for (int k = 0; k < 100; ++k) CHECK(a.next_u64() == b.next_u64());
}

TEST_CASE("different seeds give different streams") {
    Rng a(42), b(43);
    int same = 0;
    for (int k = 0; k < 64; ++k) same += a.next_u64() == b.next_u64() ? 1 : 0;
    CHECK(same == 0);
}

TEST_CASE("next_double stays in the unit interval") {
    Rng rng(7);
    for (int k = 0; k < 10000; ++k) {
        const double u = rng.next_double();
        CHECK(u >= 0.0);
        CHECK(u < 1.0);
    }
}

TEST_CASE("next_below respects the bound and hits every residue") {
    Rng rng(11);
    std::set<std::uint64_t> seen;
    for (int k = 0; k < 1000; ++k) {
        const std::uint64_t v = rng.next_below(7);
        CHECK(v < 7);
        seen.insert(v);
    }
    CHECK(seen.size() == 7);
}

TEST_CASE("zero stddev collapses the normal to its mean") {
    Rng rng(5);
    for (int k = 0; k < 10; ++k) CHECK(rng.next_normal(2.5, 0.0) == 2.5);
}

TEST_CASE("normal sample statistics") {
    Rng rng(123);
    const int n = 100000;
    double sum = 0.0, sq = 0.0;
    for (int k = 0; k < n; ++k) {
        const double v = rng.next_normal(1.0, 2.0);
        sum += v;
        sq += v * v;
    }
    const double mean = sum / n;
    const double var = sq / n - mean * mean;
    CHECK(mean == doctest::Approx(1.0).epsilon(0.02));
    CHECK(std::sqrt(var) == doctest::Approx(2.0).epsilon(0.02));
}

TEST_CASE("uniform sample statistics") {
    Rng rng(321);
    const int n = 100000;
    Tensor t({n});
    rng.fill_uniform(t, -1.0, 3.0);
    double sum = 0.0;
    for (std::size_t k = 0; k < t.numel(); ++k) {
        CHECK(t[k] >= -1.0);
        CHECK(t[k] < 3.0);
        sum += t[k];
    }
    CHECK(sum / n == doctest::Approx(1.0).epsilon(0.02));
}

TEST_CASE("forks are deterministic and independent of parent position") {
    Rng parent(99);
    Rng c1 = parent.fork(3);
    parent.next_u64();
    parent.next_u64();
    Rng c2 = parent.fork(3);
    for (int k = 0; k < 16; ++k) CHECK(c1.next_u64() == c2.next_u64());

    Rng other = parent.fork(4);
    int same = 0;
    Rng c3 = parent.fork(3);
    for (int k = 0; k < 64; ++k) same += other.next_u64() == c3.next_u64() ? 1 : 0;
    CHECK(same == 0);
}

TEST_CASE("shuffle is a seeded permutation") {
    std::vector<int> v{0, 1, 2, 3, 4, 5, 6, 7, 8, 9};
    Rng a(14);
    a.shuffle(v);
    std::vector<int> w{0, 1, 2, 3, 4, 5, 6, 7, 8, 9};
    Rng b(14);
    b.shuffle(w);
    CHECK(v == w);
    std::set<int> seen(v.begin(), v.end());
    CHECK(seen.size() == 10);
}

}  // TEST_SUITE
