#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "sdde/rng.hpp"
#include "sdde/stats.hpp"

#include <cmath>

using namespace sdde;

TEST_CASE("wilson interval basics") {
    const WilsonInterval w = wilson_interval(0, 100);
    CHECK(w.estimate == 0.0);
    CHECK(w.lower == 0.0);
    CHECK(w.upper > 0.0);

    const WilsonInterval one = wilson_interval(1, 10000);
    CHECK(one.lower > 0.0);  // a single success already lifts the lower limit

    const WilsonInterval half = wilson_interval(5000, 10000);
    CHECK(half.lower == doctest::Approx(0.5 - 1.96 * 0.005).epsilon(1e-2));
}

TEST_CASE("kolmogorov tail landmarks") {
    // Q(1.628) ~ 0.01, the 1% critical point
    CHECK(kolmogorov_tail(1.627) > 0.0099);
    CHECK(kolmogorov_tail(1.630) < 0.0102);
    CHECK(kolmogorov_tail(0.0) == 1.0);
    CHECK(kolmogorov_tail(3.0) < 1e-6);
}

TEST_CASE("ks statistic against the true law is small") {
    Rng rng = make_rng(7, Stream::Probe, 0);
    std::vector<double> xs(20000);
    for (auto& x : xs) x = uniform01(rng);
    const double d = ks_statistic(xs, [](double t) { return std::min(1.0, std::max(0.0, t)); });
    CHECK(ks_pvalue(d, static_cast<long>(xs.size())) > 0.01);
}

TEST_CASE("ks detects the wrong law") {
    Rng rng = make_rng(7, Stream::Probe, 1);
    std::vector<double> xs(5000);
    for (auto& x : xs) x = uniform01(rng) * 0.9;  // compressed support
    const double d = ks_statistic(xs, [](double t) { return std::min(1.0, std::max(0.0, t)); });
    CHECK(ks_pvalue(d, static_cast<long>(xs.size())) < 1e-6);
}

TEST_CASE("poisson sampler mean and chunked regime") {
    Rng rng = make_rng(11, Stream::Probe, 2);
    const double mean = 50.0;  // exercises the chunk splitting
    const long n = 20000;
    double acc = 0.0;
    for (long i = 0; i < n; ++i) acc += static_cast<double>(poisson_sample(rng, mean));
    const double sample_mean = acc / static_cast<double>(n);
    CHECK(std::abs(sample_mean - mean) < 3.0 * std::sqrt(mean / static_cast<double>(n)));
}

TEST_CASE("generator derivation is deterministic and stream-separated") {
    Rng a1 = make_rng(42, Stream::SmallJumps, 3);
    Rng a2 = make_rng(42, Stream::SmallJumps, 3);
    Rng b = make_rng(42, Stream::LargeJumps, 3);
    CHECK(a1() == a2());
    Rng a3 = make_rng(42, Stream::SmallJumps, 3);
    CHECK(a3() != b());  // different streams diverge immediately (with overwhelming probability)
}
