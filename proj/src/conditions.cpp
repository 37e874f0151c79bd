#include "sdde/conditions.hpp"

#include "sdde/parallel.hpp"
#include "sdde/rng.hpp"

#include <cmath>
#include <mutex>
#include <sstream>

namespace sdde {

BivariateMap DissipativityConstants::example_H() {
    return BivariateMap::homogeneous(
        [](const Vector& x, const Vector& y) {
            // grouped so that swapping the arguments is bitwise neutral
            const double d2 = (x - y).squaredNorm();
            return d2 * (2.0 * ((x.squaredNorm() + y.squaredNorm()) + x.dot(y)));
        },
        4.0);
}

nlohmann::json ConditionReport::to_json() const {
    return nlohmann::json{{"slack1", slack1},
                          {"slack2", slack2},
                          {"mu1_moment_2r", mu1_moment_2r},
                          {"mu2_moment_2r", mu2_moment_2r},
                          {"mu1_required_kappa", mu1_required_kappa},
                          {"mu1_in_class", mu1_in_class},
                          {"mu2_in_class", mu2_in_class},
                          {"pass", pass},
                          {"failure_reason", failure_reason}};
}

ConditionReport check_dissipativity_constants(const DissipativityConstants& c) {
    ConditionReport rep;
    const double two_r = 2.0 * c.r;
    rep.mu1_moment_2r = exp_moment(c.mu1, two_r);
    rep.mu2_moment_2r = exp_moment(c.mu2, two_r);
    rep.mu1_required_kappa = std::max(2.0, c.q1) * c.r;
    rep.mu1_in_class = in_M_kappa(c.mu1, rep.mu1_required_kappa);
    rep.mu2_in_class = in_M_kappa(c.mu2, two_r);
    // lambda1 = 0 removes the mu2 term entirely, so an infinite moment
    // cannot poison the slack through 0 * inf
    rep.slack1 = c.lambda2 - two_r - (c.lambda1 == 0.0 ? 0.0 : c.lambda1 * rep.mu2_moment_2r);
    rep.slack2 = c.K2 - (c.K1 == 0.0 ? 0.0 : c.K1 * rep.mu1_moment_2r);

    std::ostringstream why;
    if (!(rep.slack1 >= 0.0)) why << "slack1 negative (" << rep.slack1 << "); ";
    if (!(rep.slack2 >= 0.0)) why << "slack2 negative (" << rep.slack2 << "); ";
    if (!rep.mu1_in_class)
        why << "mu1 lacks the exponential moment at kappa = " << rep.mu1_required_kappa << "; ";
    if (!rep.mu2_in_class) why << "mu2 lacks the exponential moment at kappa = " << two_r << "; ";
    rep.failure_reason = why.str();
    rep.pass = rep.failure_reason.empty();
    return rep;
}

nlohmann::json ViolationReport::to_json() const {
    return nlohmann::json{{"trials", trials},
                          {"violations", violations},
                          {"worst_margin", worst_margin},
                          {"tolerance", tolerance},
                          {"worst_witness", worst_witness}};
}

namespace {

nlohmann::json segment_to_json(const HistorySegment& s) {
    nlohmann::json nodes = nlohmann::json::array();
    for (std::size_t i = 0; i < s.node_count(); ++i) {
        const SegmentNode n = s.node(i);
        nlohmann::json jn{{"theta", n.theta}};
        jn["value"] = std::vector<double>(n.value.data(), n.value.data() + n.value.size());
        if (n.pre) jn["pre"] = std::vector<double>(n.pre->data(), n.pre->data() + n.pre->size());
        nodes.push_back(std::move(jn));
    }
    const Vector v = s.tail_coefficient();
    return nlohmann::json{{"fading_rate", s.fading_rate()},
                          {"theta_min", s.theta_min()},
                          {"tail_coefficient", std::vector<double>(v.data(), v.data() + v.size())},
                          {"nodes", std::move(nodes)}};
}

double distance_squared(const Vector& x, const Vector& y) { return (x - y).squaredNorm(); }

}  // namespace

ViolationReport sample_dissipativity(const DriftSpec& spec, const DissipativityConstants& c,
                                     const RandomSegmentParams& sampler, long n,
                                     std::uint64_t seed, int threads) {
    if (n < 1) throw std::invalid_argument("trial count must be at least 1");
    ViolationReport rep;
    rep.trials = n;

    const BivariateMap dist2 = BivariateMap::homogeneous(distance_squared, 2.0);

    std::vector<double> margins(static_cast<std::size_t>(n));
    parallel_for(n, threads, [&](long i) {
        Rng rng = make_rng(seed, Stream::Conditions, static_cast<std::uint64_t>(i));
        auto [phi, psi] = random_segment_pair(rng, sampler);
        const Vector fphi = evaluate_drift(spec, phi);
        const Vector fpsi = evaluate_drift(spec, psi);
        const Vector dh = phi.head() - psi.head();
        const double lhs = 2.0 * dh.dot(fphi - fpsi);
        double rhs = -c.lambda2 * dh.squaredNorm() - c.K2 * c.H(phi.head(), psi.head());
        if (c.K1 != 0.0) rhs += c.K1 * delay_integral_pair(phi, psi, c.mu1, c.H);
        if (c.lambda1 != 0.0) rhs += c.lambda1 * delay_integral_pair(phi, psi, c.mu2, dist2);
        margins[static_cast<std::size_t>(i)] = lhs - rhs;
    });

    long worst_index = -1;
    for (long i = 0; i < n; ++i) {
        const double m = margins[static_cast<std::size_t>(i)];
        if (m > rep.tolerance) ++rep.violations;
        if (m > rep.worst_margin) {
            rep.worst_margin = m;
            worst_index = i;
        }
    }
    if (worst_index >= 0 && rep.violations > 0) {
        Rng rng = make_rng(seed, Stream::Conditions, static_cast<std::uint64_t>(worst_index));
        auto [phi, psi] = random_segment_pair(rng, sampler);
        rep.worst_witness = nlohmann::json{{"phi", segment_to_json(phi)},
                                           {"psi", segment_to_json(psi)},
                                           {"margin", rep.worst_margin}};
    }
    return rep;
}

double sample_local_lipschitz(const DriftSpec& spec, double ball_radius, long n,
                              std::uint64_t seed, double fading_rate, int dimension) {
    if (!(ball_radius > 0.0)) throw std::invalid_argument("ball radius must be positive");
    RandomSegmentParams params;
    params.dimension = dimension;
    params.fading_rate = fading_rate;
    params.norm_ball = ball_radius;
    double best = 0.0;
    Rng rng = make_rng(seed, Stream::Conditions, 0);
    for (long i = 0; i < n; ++i) {
        auto [phi, psi] = random_segment_pair(rng, params);
        const double dn = fading_norm(segment_sub(phi, psi));
        if (dn < 1e-12) continue;
        const double fd = (evaluate_drift(spec, phi) - evaluate_drift(spec, psi)).squaredNorm();
        best = std::max(best, fd / (dn * dn));
    }
    return best;
}

double irreducibility_lower_bound(const LevyMeasureModel& levy, double eps, double T) {
    if (!(eps > 0.0 && T > 0.0)) throw std::invalid_argument("eps and T must be positive");
    return 0.5 * std::exp(-mass_above(levy, eps) * T);
}

}  // namespace sdde
