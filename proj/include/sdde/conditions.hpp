#pragma once

#include "sdde/common.hpp"
#include "sdde/dynamics.hpp"
#include "sdde/levy_noise.hpp"
#include "sdde/memory_state.hpp"

#include <json.hpp>

#include <cstdint>
#include <string>

namespace sdde {

/// Constants of the one-sided dissipativity inequality
///   2 <phi(0)-psi(0), f(phi)-f(psi)>
///     <= K1 int H(phi, psi) d mu1 - K2 H(phi(0), psi(0))
///      + lambda1 int |phi-psi|^2 d mu2 - lambda2 |phi(0)-psi(0)|^2
/// together with the growth data of H.
struct DissipativityConstants {
    double lambda1 = 0.0;
    double lambda2 = 0.0;
    double K1 = 0.0;
    double K2 = 0.0;
    double q1 = 1.0;
    double q2 = 1.0;
    double growth_K = 1.0;  // H(x, y) <= growth_K (|x|^q1 + |y|^q2)
    double r = 1.0;
    BivariateMap H = example_H();
    DelayMeasure mu1 = DelayMeasure::atom(0.0);
    DelayMeasure mu2 = DelayMeasure::atom(0.0);

    /// H(x,y) = |x-y|^2 (2|x|^2 + 2<x,y> + 2|y|^2); homogeneous of degree 4,
    /// H(x,y) <= 12 (|x|^4 + |y|^4).
    static BivariateMap example_H();
};

/// Slack values of the moment conditions. Pass requires both slacks
/// nonnegative and both measures to carry the needed exponential moments.
struct ConditionReport {
    double slack1 = 0.0;           // lambda2 - 2r - lambda1 mu2^(2r)
    double slack2 = 0.0;           // K2 - K1 mu1^(2r)
    double mu1_moment_2r = 0.0;
    double mu2_moment_2r = 0.0;
    double mu1_required_kappa = 0.0;  // (2 v q1) r
    bool mu1_in_class = false;        // mu1 in M_{(2 v q1) r}
    bool mu2_in_class = false;        // mu2 in M_{2r}
    bool pass = false;
    std::string failure_reason;

    nlohmann::json to_json() const;
};

ConditionReport check_dissipativity_constants(const DissipativityConstants& c);

/// Randomized two-sided evaluation of the dissipativity inequality on
/// segment pairs drawn from the norm ball; counts violations beyond the
/// tolerance and keeps the worst witness.
struct ViolationReport {
    long trials = 0;
    long violations = 0;
    double worst_margin = -std::numeric_limits<double>::infinity();  // max LHS - RHS
    double tolerance = 1e-9;
    nlohmann::json worst_witness;  // segment dumps of the worst pair

    nlohmann::json to_json() const;
};

ViolationReport sample_dissipativity(const DriftSpec& spec, const DissipativityConstants& c,
                                     const RandomSegmentParams& sampler, long n,
                                     std::uint64_t seed, int threads = 1);

/// Max over sampled pairs in the ball of |f(phi)-f(psi)|^2 / ||phi-psi||_r^2;
/// a lower estimate of the local Lipschitz constant c_k. Pairs with
/// ||phi-psi||_r below 1e-12 are skipped.
double sample_local_lipschitz(const DriftSpec& spec, double ball_radius, long n,
                              std::uint64_t seed, double fading_rate, int dimension = 1);

/// Conservative accessibility bound (1/2) e^{-nu(|z|>eps) T}: the probability
/// that no jump above eps occurs before T, times the 1/2 floor on the
/// truncated-vs-limit closeness event.
double irreducibility_lower_bound(const LevyMeasureModel& levy, double eps, double T);

}  // namespace sdde
