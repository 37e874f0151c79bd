#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "sdde/probes.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>

using namespace sdde;

namespace {

Vector v1(double x) {
    Vector v(1);
    v[0] = x;
    return v;
}

LevyMeasureModel small_atoms() {
    return LevyMeasureModel::symmetric_atoms(1, {{v1(0.2), 3.0}});
}

LevyMeasureModel mixed_atoms() {
    return LevyMeasureModel::symmetric_atoms(1, {{v1(0.2), 3.0}, {v1(1.5), 0.15}});
}

ProbeContext quiet_ctx(std::uint64_t seed, int threads = 2) {
    ProbeContext ctx;
    ctx.seed = seed;
    ctx.threads = threads;
    ctx.write_files = false;
    return ctx;
}

}  // namespace

TEST_CASE("report verdicts must reference known keys") {
    ProbeReport rep("demo", 1, 10);
    rep.add_estimate("a", 1.0);
    CHECK_THROWS_AS(rep.add_verdict("v", true, "missing", "", 0.0), std::logic_error);
    CHECK_THROWS_AS(rep.add_verdict("v", true, "a", "missing_ref", std::nullopt),
                    std::logic_error);
    CHECK_THROWS_AS(rep.add_verdict("v", true, "a", "", std::nullopt), std::logic_error);
    rep.add_theoretical("t", 2.0, "somewhere");
    rep.add_verdict("v", true, "a", "t", std::nullopt);
    CHECK(rep.all_pass());
}

TEST_CASE("decay probe on the contracting linear system") {
    const DriftSpec f = DriftSpec::linear(-1.0, 1);
    const HistorySegment xi = HistorySegment::constant(0.5, v1(1.0), -1.0);
    IntegratorOptions opts;
    opts.dt = 1e-3;
    const ProbeReport rep = decay_probe(f, xi, {10.0, 20.0}, opts, {}, quiet_ctx(1));
    CHECK(rep.verdict("decay_to_zero"));
    CHECK(rep.verdict("uniform_bounded"));
    CHECK(rep.verdict("shift_inequality"));
    CHECK(rep.estimate("norm_at_20") < 1e-3);
}

TEST_CASE("decay probe on frozen systems") {
    const DriftSpec f = DriftSpec::zero(1);
    IntegratorOptions opts;
    opts.dt = 1e-2;
    // a frozen path holding a nonzero value keeps norm |X(T)| forever:
    // bounded, but decay is impossible
    const HistorySegment one = HistorySegment::constant(1.0, v1(1.0), -1.0);
    const ProbeReport held = decay_probe(f, one, {5.0, 20.0}, opts, {}, quiet_ctx(2));
    CHECK_FALSE(held.verdict("decay_to_zero"));
    CHECK(held.verdict("uniform_bounded"));
    CHECK(held.estimate("sup_abs_at_20") == 1.0);
    CHECK(held.estimate("norm_at_20") == doctest::Approx(1.0).epsilon(1e-12));
    // with a zero head the history's contribution fades by the weight alone
    std::vector<std::pair<double, Vector>> rows{{-1.0, v1(std::exp(1.0))}, {0.0, v1(0.0)}};
    const HistorySegment fading(1.0, rows, v1(std::exp(1.0)));
    const ProbeReport faded = decay_probe(f, fading, {5.0, 20.0}, opts, {}, quiet_ctx(2));
    CHECK(faded.verdict("decay_to_zero"));
    CHECK(faded.verdict("uniform_bounded"));
}

TEST_CASE("decay probe on the cubic example: bounded, not decaying to zero") {
    const DriftSpec f = DriftSpec::cubic_example(DelayMeasure::atom(-0.3));
    const HistorySegment xi = HistorySegment::constant(1.0, v1(0.2), -1.0);
    IntegratorOptions opts;
    opts.dt = 1e-3;
    const ProbeReport rep = decay_probe(f, xi, {10.0, 50.0, 100.0}, opts, {}, quiet_ctx(3));
    CHECK(rep.verdict("uniform_bounded"));
    CHECK(rep.verdict("shift_inequality"));
    CHECK_FALSE(rep.verdict("decay_to_zero"));  // settles at the nonzero equilibrium
    CHECK(rep.estimate("norm_at_100") == doctest::Approx(0.5).epsilon(1e-3));
}

TEST_CASE("convergence probe: eps below the jump support gives exact zeros") {
    const DriftSpec f = DriftSpec::cubic_example(DelayMeasure::atom(-0.3));
    const HistorySegment xi = HistorySegment::constant(1.0, v1(0.5), -1.0);
    IntegratorOptions opts;
    opts.dt = 1e-3;
    const ConvergenceResult res = convergence_probe(f, xi, small_atoms(), {0.1}, 1e-4, 1.0, opts,
                                                    0.25, 0.5, 50, quiet_ctx(4));
    CHECK(res.estimates[0] == 0.0);
    CHECK(res.report.all_pass());
    CHECK(res.report.flags().count("warning_low_trials") == 1);
}

TEST_CASE("convergence probe stays below the moment bound for the driftless system") {
    const DriftSpec f = DriftSpec::zero(1);
    const HistorySegment xi = HistorySegment::constant(1.0, v1(0.0), -1.0);
    IntegratorOptions opts;
    opts.dt = 1e-3;
    const ConvergenceResult res = convergence_probe(f, xi, small_atoms(), {0.5}, 5e-3, 1.0, opts,
                                                    0.25, 0.5, 2000, quiet_ctx(5));
    const double expected_bound =
        std::exp(-0.5) * 2.0 * std::pow(0.24 * (std::exp(2.0) - 1.0) / 2.0, 0.25);
    CHECK(res.bounds[0] == doctest::Approx(expected_bound).epsilon(1e-12));
    CHECK(res.estimates[0] > 0.0);
    CHECK(res.estimates[0] <= res.bounds[0]);
    CHECK(res.report.verdict("within_bound_eps_0.5"));
}

TEST_CASE("convergence probe ladder is exactly monotone under shared jumps") {
    const DriftSpec f = DriftSpec::cubic_example(DelayMeasure::atom(-0.3));
    const HistorySegment xi = HistorySegment::constant(1.0, v1(0.5), -1.0);
    IntegratorOptions opts;
    opts.dt = 1e-3;
    const ConvergenceResult res = convergence_probe(f, xi, small_atoms(), {0.5, 0.25, 0.1}, 1e-3,
                                                    1.0, opts, 0.25, 0.5, 500, quiet_ctx(6));
    CHECK(res.report.verdict("ladder_monotone"));
    CHECK(res.report.verdict("bound_monotone"));
    // the band (delta, 0.5] and (delta, 0.25] hold the same atoms: estimates equal
    CHECK(res.estimates[0] == res.estimates[1]);
    CHECK(res.estimates[2] == 0.0);  // no atoms at or below 0.1
}

TEST_CASE("first-jump probe validates the exponential law") {
    const ProbeReport rep =
        first_jump_probe(LevyMeasureModel::symmetric_atoms(1, {{v1(1.0), 0.7}}), 0.5, 10000,
                         quiet_ctx(7));
    CHECK(rep.theory("rate") == doctest::Approx(1.4).epsilon(1e-14));
    CHECK(rep.verdict("ks_p_above_0.01"));
    CHECK(rep.verdict("all_samples_positive_finite"));
    CHECK(rep.verdict("scaled_mean_within_3se"));
}

TEST_CASE("first-jump probe rejects a zero rate") {
    CHECK_THROWS_AS(first_jump_probe(small_atoms(), 2.0, 10000, quiet_ctx(8)),
                    std::invalid_argument);
}

TEST_CASE("irreducibility probe: deterministic contraction reaches any ball") {
    MarkRadialProfile prof;
    const auto no_noise = LevyMeasureModel::compound_poisson(1, 0.0, prof);
    const DriftSpec f = DriftSpec::linear(-1.0, 1);
    const HistorySegment xi = HistorySegment::constant(1.0, v1(1.0), -1.0);
    IntegratorOptions opts;
    opts.dt = 2e-3;
    IrreducibilityParams params;
    params.bound_search_trials = 1000;
    const ProbeReport rep =
        irreducibility_probe(f, {xi}, no_noise, {1.0}, 8.0, opts, 1e-3, 1000, params, quiet_ctx(9));
    CHECK(rep.estimate("p_hat_xi0_kappa_1") == 1.0);
    CHECK(rep.verdict("positive_xi0_kappa_1"));
    CHECK(rep.verdict("kappa_monotone_xi0"));
}

TEST_CASE("irreducibility probe: zero drift with symmetric noise stays accessible") {
    const DriftSpec f = DriftSpec::zero(1);
    const HistorySegment xi = HistorySegment::constant(1.0, v1(0.0), -1.0);
    IntegratorOptions opts;
    opts.dt = 2e-3;
    IrreducibilityParams params;
    params.eps_grid = {1.0, 0.5};
    params.bound_search_trials = 200;
    const ProbeReport rep = irreducibility_probe(f, {xi}, small_atoms(), {0.25, 0.5}, 1.0, opts,
                                                 1e-3, 1000, params, quiet_ctx(10));
    CHECK(rep.estimate("p_hat_xi0_kappa_0.5") > 0.0);
    CHECK(rep.verdict("positive_xi0_kappa_0.5"));
    // exact nesting: smaller kappa cannot have more hits
    CHECK(rep.estimate("p_hat_xi0_kappa_0.25") <= rep.estimate("p_hat_xi0_kappa_0.5"));
    CHECK(rep.verdict("kappa_monotone_xi0"));
    CHECK(rep.theory("bound_strict_xi0_kappa_0.5") > 0.0);
    CHECK(rep.theory("bound_strict_xi0_kappa_0.5") <= 0.5);
}

TEST_CASE("irreducibility probe flags kappa below the deterministic baseline") {
    const DriftSpec f = DriftSpec::cubic_example(DelayMeasure::atom(-0.3));
    const HistorySegment xi = HistorySegment::constant(1.0, v1(0.5), -1.0);
    IntegratorOptions opts;
    opts.dt = 2e-3;
    IrreducibilityParams params;
    params.eps_grid = {1.0};
    params.bound_search_trials = 200;
    const ProbeReport rep = irreducibility_probe(f, {xi}, mixed_atoms(), {0.1, 1.0}, 2.0, opts,
                                                 1e-3, 1000, params, quiet_ctx(11));
    CHECK(rep.flags().count("report_only_xi0_kappa_0.1") == 1);
    CHECK(rep.verdicts().count("positive_xi0_kappa_0.1") == 0);  // reported, not asserted
    CHECK(rep.verdicts().count("positive_xi0_kappa_1") == 1);
}

TEST_CASE("resolvent probe endpoints") {
    MarkRadialProfile prof;
    const auto no_noise = LevyMeasureModel::compound_poisson(1, 0.0, prof);
    const DriftSpec f = DriftSpec::linear(-1.0, 1);
    const HistorySegment xi = HistorySegment::constant(1.0, v1(0.5), -1.0);
    IntegratorOptions opts;
    opts.dt = 2e-3;
    // huge neighborhood: the estimate approaches 1 - e^{-lambda Tmax}
    const ProbeReport big =
        resolvent_probe(f, xi, no_noise, 100.0, 1.0, 8.0, 0.1, opts, 1e-3, 50, quiet_ctx(12));
    CHECK(resolvent_estimate(big) ==
          doctest::Approx(1.0 - std::exp(-8.0)).epsilon(1e-3));
    // unreachable neighborhood: exactly zero
    const ProbeReport tiny =
        resolvent_probe(f, xi, no_noise, 1e-12, 1.0, 8.0, 0.1, opts, 1e-3, 50, quiet_ctx(13));
    CHECK(resolvent_estimate(tiny) == 0.0);
}

TEST_CASE("resolvent probe on the cubic example excludes zero") {
    const DriftSpec f = DriftSpec::cubic_example(DelayMeasure::atom(-0.3));
    const HistorySegment xi = HistorySegment::constant(1.0, v1(0.5), -1.0);
    IntegratorOptions opts;
    opts.dt = 2e-3;
    const ProbeReport rep =
        resolvent_probe(f, xi, mixed_atoms(), 1.0, 1.0, 6.0, 0.1, opts, 1e-3, 400, quiet_ctx(14));
    CHECK(resolvent_estimate(rep) > 0.0);
    CHECK(rep.verdict("ci_excludes_zero"));
}

TEST_CASE("probe reports are bitwise reproducible and thread-count independent") {
    const DriftSpec f = DriftSpec::zero(1);
    const HistorySegment xi = HistorySegment::constant(1.0, v1(0.0), -1.0);
    IntegratorOptions opts;
    opts.dt = 2e-3;
    IrreducibilityParams params;
    params.eps_grid = {1.0};
    params.bound_search_trials = 200;
    const ProbeReport serial = irreducibility_probe(f, {xi}, small_atoms(), {0.5}, 1.0, opts,
                                                    1e-3, 1000, params, quiet_ctx(15, 1));
    const ProbeReport threaded = irreducibility_probe(f, {xi}, small_atoms(), {0.5}, 1.0, opts,
                                                      1e-3, 1000, params, quiet_ctx(15, 2));
    CHECK(serial.to_json().dump() == threaded.to_json().dump());
    const ProbeReport again = irreducibility_probe(f, {xi}, small_atoms(), {0.5}, 1.0, opts, 1e-3,
                                                   1000, params, quiet_ctx(15, 2));
    CHECK(again.to_json().dump() == threaded.to_json().dump());
}

TEST_CASE("report files land in the output directory") {
    const auto dir = std::filesystem::temp_directory_path() / "sdde_probe_files_test";
    std::filesystem::remove_all(dir);
    ProbeContext ctx;
    ctx.seed = 16;
    ctx.threads = 2;
    ctx.out_dir = dir;
    ctx.write_files = true;
    first_jump_probe(LevyMeasureModel::symmetric_atoms(1, {{v1(1.0), 0.7}}), 0.5, 1000, ctx);
    CHECK(std::filesystem::exists(dir / "first_jump_report.json"));
    CHECK(std::filesystem::exists(dir / "first_jump_trials.csv"));
    std::ifstream is(dir / "first_jump_report.json");
    nlohmann::json j;
    is >> j;
    CHECK(j["schema_version"].get<int>() == 1);
    CHECK(j["probe"].get<std::string>() == "first_jump");
    std::filesystem::remove_all(dir);
}
