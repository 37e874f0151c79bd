#pragma once

#include "sdde/common.hpp"
#include "sdde/rng.hpp"

#include <deque>
#include <functional>
#include <optional>
#include <ostream>
#include <span>
#include <utility>
#include <vector>

namespace sdde {

/// One grid node of a history segment. `value` is the right-continuous
/// value; `pre` is the left limit when a jump lives at this node.
struct SegmentNode {
    double theta = 0.0;
    Vector value;
    std::optional<Vector> pre;
    const Vector& left() const { return pre ? *pre : value; }
    bool is_jump() const { return pre.has_value(); }
};

/// One sample of a path being appended to a segment: time offset s in
/// [0, dt], the value from that instant on, and optionally the left limit
/// when the path jumps at s.
struct PathSample {
    double s = 0.0;
    Vector value;
    std::optional<Vector> pre;
};

/// A finite representation of a fading-memory history on (-inf, 0]:
/// a piecewise-linear grid on [theta_min, 0] (cadlag; jump nodes carry
/// both one-sided values) continued for theta < theta_min by the
/// exponential tail phi(theta) = e^{-r theta} v.
///
/// Internally nodes carry an absolute clock so that advancing the segment
/// is O(appended nodes): the tail anchor value at theta_min is invariant
/// under shifts and old nodes are folded into the tail once their weighted
/// deviation from it is below fold_tolerance.
class HistorySegment {
public:
    static constexpr double fold_tolerance = 1e-12;

    /// Builds a segment from initial data: a continuous grid on
    /// [theta_min, 0] plus the tail anchor (the value the tail takes at
    /// theta_min). The grid must start at theta_min, end at 0, and match
    /// the anchor at theta_min to within fold_tolerance.
    HistorySegment(double fading_rate, std::vector<std::pair<double, Vector>> grid,
                   Vector tail_anchor);

    /// Constant value c on [theta_min, 0], tail continuing exponentially.
    static HistorySegment constant(double fading_rate, const Vector& c, double theta_min);
    /// phi(theta) = e^{-r theta} v everywhere (grid degenerates to {0}).
    static HistorySegment pure_tail(double fading_rate, const Vector& v);
    /// Full-control factory: nodes may carry jump sides. Same validation as
    /// the grid constructor, with left limits checked against the anchor.
    static HistorySegment from_nodes(double fading_rate, std::vector<SegmentNode> nodes,
                                     Vector tail_anchor);

    double fading_rate() const { return r_; }
    int dimension() const { return static_cast<int>(nodes_.back().value.size()); }
    double theta_min() const { return u_min_ - shift_; }
    std::size_t node_count() const { return nodes_.size(); }
    SegmentNode node(std::size_t i) const;
    const Vector& head() const { return nodes_.back().value; }

    /// Tail coefficient v of phi(theta) = e^{-r theta} v below theta_min.
    Vector tail_coefficient() const;
    /// Value the tail takes at theta_min (shift-invariant anchor).
    const Vector& tail_anchor() const { return tail_anchor_; }

    /// Right-continuous evaluation at theta <= 0.
    Vector value(double theta) const;
    void value_into(double theta, Vector& out) const;

    /// Advances the segment by dt, appending the path given on [0, dt].
    /// The sample at s = 0 must match the current head (or declare a jump
    /// through its `pre` field); a mismatch raises ConsistencyError.
    void append(std::span<const PathSample> path, double dt);

    /// Records an instantaneous jump at theta = 0 (head becomes a double node).
    void add_jump(const Vector& z);

private:
    HistorySegment() = default;
    void fold_left();
    void validate_initial() const;

    double r_ = 1.0;
    double shift_ = 0.0;  // theta = u - shift_ for stored clocks u
    double u_min_ = 0.0;
    Vector tail_anchor_;

    struct ClockNode {
        double u;
        Vector value;
        std::optional<Vector> pre;
        const Vector& left() const { return pre ? *pre : value; }
    };
    std::deque<ClockNode> nodes_;

    friend double fading_norm_at_rate(const HistorySegment&, double);
};

/// Functional form of HistorySegment::append.
HistorySegment shift_append(HistorySegment segment, std::span<const PathSample> path, double dt);
/// Functional form of HistorySegment::add_jump.
HistorySegment with_jump(HistorySegment segment, const Vector& z);

/// Weighted sup-norm sup_{theta <= 0} e^{r theta} |phi(theta)|, evaluated
/// exactly: the tail contributes |v| and each linear piece is maximized in
/// closed form.
double fading_norm(const HistorySegment& segment);

/// Same norm with the weight rate replaced by `rate` >= the segment's own
/// fading rate (the segment embeds into every slower-fading space).
double fading_norm_at_rate(const HistorySegment& segment, double rate);

/// log of the maximum of e^{r u} |a + (u - ua) * slope| over u in [ua, ub],
/// where the linear piece interpolates va at ua and vb at ub. Exposed for
/// the integrators' running-sup bookkeeping; exact (closed-form roots).
double weighted_piece_log_max(double r, double ua, double ub, const Vector& va, const Vector& vb);

/// A probability measure on (-inf, 0]: a finite mixture of atoms at
/// theta0 <= 0 and exponential densities lambda e^{lambda theta}.
class DelayMeasure {
public:
    struct Component {
        enum class Kind { Atom, Exponential };
        Kind kind = Kind::Atom;
        double weight = 1.0;
        double theta0 = 0.0;  // Atom
        double lambda = 1.0;  // Exponential
    };

    static DelayMeasure atom(double theta0);
    static DelayMeasure exponential(double lambda);
    static DelayMeasure mixture(std::vector<Component> components);

    const std::vector<Component>& components() const { return components_; }

private:
    DelayMeasure() = default;
    std::vector<Component> components_;
};

/// mu^(kappa) = integral of e^{-kappa theta} d mu; +infinity when any
/// exponential component has lambda <= kappa (infinity is a value here).
double exp_moment(const DelayMeasure& measure, double kappa);

/// True iff exp_moment is finite.
bool in_M_kappa(const DelayMeasure& measure, double kappa);

/// A pointwise map R^n -> R^n with enough structure to integrate its
/// composition with a history tail: either a componentwise polynomial
/// (closed-form tail) or an opaque callable with a declared growth degree
/// (|g(x)| <= C (1 + |x|^degree)), integrated by substitution.
class PointwiseMap {
public:
    static PointwiseMap polynomial(std::vector<double> coeffs);  // sum_j c_j x^j componentwise
    static PointwiseMap identity();
    static PointwiseMap power(int k);
    static PointwiseMap opaque(std::function<Vector(const Vector&)> fn, double growth_degree);

    Vector operator()(const Vector& x) const;
    double growth_degree() const { return growth_degree_; }
    bool is_polynomial() const { return polynomial_; }
    const std::vector<double>& coeffs() const { return coeffs_; }

private:
    PointwiseMap() = default;
    bool polynomial_ = false;
    std::vector<double> coeffs_;
    std::function<Vector(const Vector&)> fn_;
    double growth_degree_ = 0.0;
};

/// Scalar map of a pair of states, used by the dissipativity machinery.
/// Positively homogeneous maps (H(ax, ay) = a^degree H(x, y)) admit
/// closed-form tail integration.
class BivariateMap {
public:
    static BivariateMap homogeneous(std::function<double(const Vector&, const Vector&)> fn,
                                    double degree);
    static BivariateMap opaque(std::function<double(const Vector&, const Vector&)> fn,
                               double growth_degree);

    double operator()(const Vector& x, const Vector& y) const { return fn_(x, y); }
    double growth_degree() const { return growth_degree_; }
    bool is_homogeneous() const { return homogeneous_; }

private:
    std::function<double(const Vector&, const Vector&)> fn_;
    double growth_degree_ = 0.0;
    bool homogeneous_ = false;
};

/// integral of g(phi(theta)) d mu(theta): atoms evaluated exactly,
/// exponential components by adaptive quadrature split at grid nodes with
/// the tail handled through the segment's closed form. Raises
/// DivergenceError naming the offending component when an exponential rate
/// cannot dominate the tail growth.
Vector delay_integral(const HistorySegment& segment, const DelayMeasure& measure,
                      const PointwiseMap& g);

/// integral of g(phi(theta), psi(theta)) d mu(theta) for a pair of
/// segments sharing the fading rate.
double delay_integral_pair(const HistorySegment& phi, const HistorySegment& psi,
                           const DelayMeasure& measure, const BivariateMap& g);

/// Parameters of the randomized-segment generator used by the statistical
/// checkers: random piecewise-linear grids with a continuously matched
/// tail, scaled into the target norm ball.
struct RandomSegmentParams {
    int dimension = 1;
    double fading_rate = 1.0;
    double norm_ball = 1.0;
    int min_nodes = 2;
    int max_nodes = 40;
    double theta_min_lo = -6.0;
    double theta_min_hi = -1.0;
    bool scale_uniform = true;  // norm ~ U(0, ball]; false pins norm = ball
};

HistorySegment random_segment(Rng& rng, const RandomSegmentParams& params);

/// Pair sharing theta_min and rate so that differences stay representable.
std::pair<HistorySegment, HistorySegment> random_segment_pair(Rng& rng,
                                                              const RandomSegmentParams& params);

/// Linear combinations; both operands must share fading rate and theta_min.
HistorySegment segment_scale(const HistorySegment& s, double a);
HistorySegment segment_add(const HistorySegment& a, const HistorySegment& b);
HistorySegment segment_sub(const HistorySegment& a, const HistorySegment& b);

/// CSV debug dump: a tail-coefficient header line then theta,value rows.
void write_segment_csv(const HistorySegment& segment, std::ostream& os);

}  // namespace sdde
