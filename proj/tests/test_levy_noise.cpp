#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "sdde/levy_noise.hpp"
#include "sdde/quadrature.hpp"
#include "sdde/stats.hpp"

#include <cmath>

using namespace sdde;

namespace {

Vector v1(double x) {
    Vector v(1);
    v[0] = x;
    return v;
}

LevyMeasureModel unit_atoms() { return LevyMeasureModel::symmetric_atoms(1, {{v1(1.0), 0.7}}); }
LevyMeasureModel small_atoms() { return LevyMeasureModel::symmetric_atoms(1, {{v1(0.2), 3.0}}); }

// quadrature of the radial density over {lo < |z| <= hi} in dyadic pieces,
// independent of the closed-form implementation path
double radial_quadrature_mass(double c, double alpha, double lo, double hi) {
    auto f = [&](double s) { return 2.0 * c * std::pow(s, -1.0 - alpha); };
    double sum = 0.0;
    double a = lo;
    while (a < hi) {
        const double b = std::min(hi, 2.0 * a);
        sum += integrate(f, a, b);
        a = b;
    }
    return sum;
}

}  // namespace

TEST_CASE("tail mass of atom models") {
    CHECK(mass_above(unit_atoms(), 0.5) == doctest::Approx(1.4).epsilon(1e-14));
    CHECK(mass_above(unit_atoms(), 2.0) == 0.0);
}

TEST_CASE("tail mass of the radial density against quadrature") {
    const LevyMeasureModel m = LevyMeasureModel::radial_density(1.0, 1.5);
    const double closed = mass_above(m, 0.1);
    CHECK(closed == doctest::Approx(2.0 * std::pow(0.1, -1.5) / 1.5).epsilon(1e-13));
    // quadrature oracle with the tail cut where it is below 1e-13
    const double big = std::pow(2.0 / (1.5 * 1e-13), 1.0 / 1.5);
    const double oracle = radial_quadrature_mass(1.0, 1.5, 0.1, big);
    CHECK(std::abs(closed - oracle) < 1e-6 * closed);
}

TEST_CASE("small-jump second moments") {
    CHECK(small_jump_second_moment(unit_atoms(), 0.5) == 0.0);
    CHECK(small_jump_second_moment(small_atoms(), 0.5) == doctest::Approx(0.24).epsilon(1e-14));
    const LevyMeasureModel m = LevyMeasureModel::radial_density(1.0, 1.5);
    const double closed = small_jump_second_moment(m, 0.1);
    CHECK(closed == doctest::Approx(2.0 * std::pow(0.1, 0.5) / 0.5).epsilon(1e-13));
    const double oracle =
        integrate_dyadic_to_zero([](double s) { return 2.0 * s * s * std::pow(s, -2.5); }, 0.1);
    CHECK(std::abs(closed - oracle) < 1e-8);
}

TEST_CASE("compound poisson masses agree with profile quadrature") {
    MarkRadialProfile prof;
    prof.kind = MarkRadialProfile::Kind::Exponential;
    prof.parameter = 2.0;
    const LevyMeasureModel m = LevyMeasureModel::compound_poisson(1, 3.0, prof);
    const double direct = mass_above(m, 0.5);
    const double oracle =
        3.0 * integrate([&](double s) { return prof.density(s); }, 0.5, 60.0 / prof.parameter);
    CHECK(std::abs(direct - oracle) < 1e-8);
    const double m2 = small_jump_second_moment(m, 0.5);
    const double m2_closed =
        3.0 * integrate([&](double s) { return s * s * prof.density(s); }, 0.0, 0.5);
    CHECK(std::abs(m2 - m2_closed) < 1e-10);
}

TEST_CASE("tail masses are monotone and moments finite") {
    const LevyMeasureModel models[] = {unit_atoms(), small_atoms(),
                                       LevyMeasureModel::radial_density(0.7, 1.2, 3.0)};
    Rng rng = make_rng(5, Stream::Probe, 0);
    for (const auto& m : models) {
        for (int i = 0; i < 200; ++i) {
            double a = 0.01 + 3.0 * uniform01(rng);
            double b = 0.01 + 3.0 * uniform01(rng);
            if (a > b) std::swap(a, b);
            CHECK(mass_above(m, a) >= mass_above(m, b));
            CHECK(small_jump_second_moment(m, a) <= small_jump_second_moment(m, b));
            CHECK(std::isfinite(small_jump_second_moment(m, b)));
        }
    }
}

TEST_CASE("large-jump stream: empty at zero rate, ordered otherwise") {
    Rng rng = make_rng(9, Stream::LargeJumps, 0);
    CHECK(sample_large_jumps(unit_atoms(), 2.0, 10.0, rng).empty());
    const auto events = sample_large_jumps(unit_atoms(), 0.5, 50.0, rng);
    CHECK(events.size() > 10);
    for (std::size_t i = 0; i + 1 < events.size(); ++i)
        CHECK(events[i].time < events[i + 1].time);
}

TEST_CASE("first inter-arrival mean matches the exponential law") {
    const long n = 100000;
    double acc = 0.0, acc2 = 0.0;
    for (long i = 0; i < n; ++i) {
        Rng rng = make_rng(1234, Stream::LargeJumps, static_cast<std::uint64_t>(i));
        const auto ev = sample_large_jumps(unit_atoms(), 0.5, 40.0, rng);
        REQUIRE(!ev.empty());
        acc += ev.front().time;
        acc2 += ev.front().time * ev.front().time;
    }
    const double mean = acc / n;
    const double se = std::sqrt((acc2 / n - mean * mean) / n);
    CHECK(std::abs(mean - 1.0 / 1.4) <= 3.0 * se);
}

TEST_CASE("mark signs are balanced") {
    Rng rng = make_rng(77, Stream::LargeJumps, 1);
    const long n = 100000;
    long plus = 0;
    for (long i = 0; i < n; ++i)
        if (sample_mark_above(unit_atoms(), 0.5, rng)[0] > 0.0) ++plus;
    const double frac = static_cast<double>(plus) / n;
    const double se = std::sqrt(0.25 / n);
    CHECK(std::abs(frac - 0.5) <= 3.0 * se);
}

TEST_CASE("inter-arrival law passes a KS test across seeded runs") {
    const long n = 10000;
    std::vector<double> taus(n);
    for (long i = 0; i < n; ++i) {
        Rng rng = make_rng(4321, Stream::LargeJumps, static_cast<std::uint64_t>(i));
        taus[static_cast<std::size_t>(i)] =
            sample_large_jumps(unit_atoms(), 0.5, 40.0, rng).front().time;
    }
    const double d = ks_statistic(taus, [](double t) { return 1.0 - std::exp(-1.4 * t); });
    CHECK(ks_pvalue(d, n) > 0.01);
}

TEST_CASE("mirrored atom model produces the bitwise-identical stream") {
    const auto pos = LevyMeasureModel::symmetric_atoms(1, {{v1(0.4), 1.0}, {v1(1.3), 0.5}});
    const auto neg = LevyMeasureModel::symmetric_atoms(1, {{v1(-0.4), 1.0}, {v1(-1.3), 0.5}});
    Rng a = make_rng(10, Stream::LargeJumps, 0);
    Rng b = make_rng(10, Stream::LargeJumps, 0);
    const auto ea = sample_large_jumps(pos, 0.3, 20.0, a);
    const auto eb = sample_large_jumps(neg, 0.3, 20.0, b);
    REQUIRE(ea.size() == eb.size());
    for (std::size_t i = 0; i < ea.size(); ++i) {
        CHECK(ea[i].time == eb[i].time);
        CHECK(ea[i].mark[0] == eb[i].mark[0]);
    }
}

TEST_CASE("small-jump increments: empty band, symmetry, second moment") {
    Rng rng = make_rng(6, Stream::SmallJumps, 0);
    const Vector zero_inc = sample_small_jump_increment(unit_atoms(), 0.01, 0.5, 1.0, rng);
    CHECK(zero_inc.norm() == 0.0);  // atoms at |z| = 1 sit outside the band

    const long n = 100000;
    double acc = 0.0, acc2 = 0.0, acc_sq = 0.0, acc_sq2 = 0.0;
    for (long i = 0; i < n; ++i) {
        Rng r = make_rng(88, Stream::SmallJumps, static_cast<std::uint64_t>(i));
        const Vector inc = sample_small_jump_increment(small_atoms(), 0.01, 0.5, 1.0, r);
        acc += inc[0];
        acc2 += inc[0] * inc[0];
        const double sq = inc.squaredNorm();
        acc_sq += sq;
        acc_sq2 += sq * sq;
    }
    const double mean = acc / n;
    const double se_mean = std::sqrt((acc2 / n - mean * mean) / n);
    CHECK(std::abs(mean) <= 3.0 * se_mean);

    const double mean_sq = acc_sq / n;
    const double se_sq = std::sqrt((acc_sq2 / n - mean_sq * mean_sq) / n);
    const double band_m2 = band_second_moment(small_atoms(), 0.01, 0.5);
    CHECK(band_m2 == doctest::Approx(0.24).epsilon(1e-14));
    CHECK(std::abs(mean_sq - band_m2) <= 3.0 * se_sq);
}

TEST_CASE("argument errors") {
    Rng rng = make_rng(1, Stream::SmallJumps, 0);
    CHECK_THROWS_AS(sample_small_jump_increment(unit_atoms(), 0.5, 0.5, 1.0, rng),
                    std::invalid_argument);
    CHECK_THROWS_AS(mass_above(unit_atoms(), 0.0), std::invalid_argument);
    CHECK_THROWS_AS(LevyMeasureModel::symmetric_atoms(1, {{v1(0.0), 1.0}}), std::invalid_argument);
    CHECK_THROWS_AS(LevyMeasureModel::radial_density(1.0, 2.5), std::invalid_argument);
}
