#include "sdde/memory_state.hpp"

#include "sdde/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>
#include <stdexcept>

namespace sdde {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double junction_tol(const Vector& reference) {
    return 1e-9 * std::max(1.0, reference.norm());
}

bool bitwise_equal(const Vector& a, const Vector& b) {
    if (a.size() != b.size()) return false;
    for (Eigen::Index i = 0; i < a.size(); ++i)
        if (a[i] != b[i]) return false;
    return true;
}

}  // namespace

HistorySegment::HistorySegment(double fading_rate, std::vector<std::pair<double, Vector>> grid,
                               Vector tail_anchor) {
    if (!(fading_rate > 0.0)) throw std::invalid_argument("fading rate must be positive");
    if (grid.empty()) throw std::invalid_argument("segment grid must not be empty");
    r_ = fading_rate;
    tail_anchor_ = std::move(tail_anchor);
    for (auto& [theta, v] : grid) {
        if (v.size() != tail_anchor_.size()) throw std::invalid_argument("segment value dimension mismatch");
        if (!all_finite(v)) throw std::invalid_argument("segment values must be finite");
        nodes_.push_back({theta, std::move(v), std::nullopt});
    }
    for (std::size_t i = 0; i + 1 < nodes_.size(); ++i)
        if (!(nodes_[i].u < nodes_[i + 1].u))
            throw std::invalid_argument("segment grid times must be strictly increasing");
    if (nodes_.back().u != 0.0) throw std::invalid_argument("segment grid must end at theta = 0");
    if (nodes_.front().u > 0.0) throw std::invalid_argument("theta_min must be nonpositive");
    shift_ = 0.0;
    u_min_ = nodes_.front().u;
    validate_initial();
}

void HistorySegment::validate_initial() const {
    const double dev = (nodes_.front().left() - tail_anchor_).norm();
    if (dev > fold_tolerance * std::max(1.0, tail_anchor_.norm()))
        throw ConsistencyError("grid value at theta_min does not match the tail");
}

HistorySegment HistorySegment::constant(double fading_rate, const Vector& c, double theta_min) {
    if (!(theta_min < 0.0)) throw std::invalid_argument("theta_min must be negative for a constant segment");
    std::vector<std::pair<double, Vector>> grid;
    grid.emplace_back(theta_min, c);
    grid.emplace_back(0.0, c);
    return HistorySegment(fading_rate, std::move(grid), c);
}

HistorySegment HistorySegment::pure_tail(double fading_rate, const Vector& v) {
    std::vector<std::pair<double, Vector>> grid;
    grid.emplace_back(0.0, v);
    return HistorySegment(fading_rate, std::move(grid), v);
}

HistorySegment HistorySegment::from_nodes(double fading_rate, std::vector<SegmentNode> nodes,
                                          Vector tail_anchor) {
    if (!(fading_rate > 0.0)) throw std::invalid_argument("fading rate must be positive");
    if (nodes.empty()) throw std::invalid_argument("segment grid must not be empty");
    HistorySegment s;
    s.r_ = fading_rate;
    s.tail_anchor_ = std::move(tail_anchor);
    for (auto& n : nodes) {
        if (n.value.size() != s.tail_anchor_.size())
            throw std::invalid_argument("segment value dimension mismatch");
        if (!all_finite(n.value) || (n.pre && !all_finite(*n.pre)))
            throw std::invalid_argument("segment values must be finite");
        s.nodes_.push_back({n.theta, std::move(n.value), std::move(n.pre)});
    }
    for (std::size_t i = 0; i + 1 < s.nodes_.size(); ++i)
        if (!(s.nodes_[i].u < s.nodes_[i + 1].u))
            throw std::invalid_argument("segment grid times must be strictly increasing");
    if (s.nodes_.back().u != 0.0) throw std::invalid_argument("segment grid must end at theta = 0");
    s.shift_ = 0.0;
    s.u_min_ = s.nodes_.front().u;
    s.validate_initial();
    return s;
}

SegmentNode HistorySegment::node(std::size_t i) const {
    const ClockNode& n = nodes_.at(i);
    return SegmentNode{n.u - shift_, n.value, n.pre};
}

Vector HistorySegment::tail_coefficient() const {
    return std::exp(r_ * theta_min()) * tail_anchor_;
}

void HistorySegment::value_into(double theta, Vector& out) const {
    if (theta > 0.0) throw std::invalid_argument("history evaluation requires theta <= 0");
    const double u = theta + shift_;
    if (u < u_min_) {
        out = std::exp(-r_ * (u - u_min_)) * tail_anchor_;
        return;
    }
    auto it = std::upper_bound(nodes_.begin(), nodes_.end(), u,
                               [](double val, const ClockNode& n) { return val < n.u; });
    const std::size_t hi = static_cast<std::size_t>(it - nodes_.begin());
    if (hi == nodes_.size()) {
        out = nodes_.back().value;
        return;
    }
    const ClockNode& a = nodes_[hi - 1];
    const ClockNode& b = nodes_[hi];
    if (u == a.u) {
        out = a.value;
        return;
    }
    const double w = (u - a.u) / (b.u - a.u);
    out = (1.0 - w) * a.value + w * b.left();
}

Vector HistorySegment::value(double theta) const {
    Vector out(tail_anchor_.size());
    value_into(theta, out);
    return out;
}

void HistorySegment::add_jump(const Vector& z) {
    ClockNode& back = nodes_.back();
    if (!back.pre) back.pre = back.value;
    back.value = back.value + z;
    if (!all_finite(back.value)) throw ConsistencyError("jump produced a non-finite value");
}

void HistorySegment::append(std::span<const PathSample> path, double dt) {
    if (dt < 0.0) throw std::invalid_argument("append window must be nonnegative");
    if (path.empty()) {
        if (dt == 0.0) return;
        throw ConsistencyError("nonempty window requires path samples");
    }
    if (path.front().s != 0.0)
        throw ConsistencyError("path must start at s = 0");
    if (path.back().s != dt)
        throw ConsistencyError("path must end at s = dt");
    for (std::size_t i = 0; i + 1 < path.size(); ++i)
        if (!(path[i].s < path[i + 1].s))
            throw ConsistencyError("path sample times must be strictly increasing");

    const Vector& head_value = nodes_.back().value;
    const PathSample& first = path.front();
    const Vector& junction = first.pre ? *first.pre : first.value;
    if ((junction - head_value).norm() > junction_tol(head_value))
        throw ConsistencyError("path junction does not match the segment head");
    if (first.pre) {
        if (nodes_.back().pre)
            throw ConsistencyError("two jumps declared at the same instant");
        nodes_.back().pre = nodes_.back().value;
        nodes_.back().value = first.value;
    }
    if (dt == 0.0) return;

    const double base = shift_;  // clock of the old head
    shift_ += dt;
    for (std::size_t i = 1; i < path.size(); ++i) {
        const PathSample& p = path[i];
        if (!all_finite(p.value) || (p.pre && !all_finite(*p.pre)))
            throw ConsistencyError("path values must be finite");
        ClockNode node{base + p.s, p.value, p.pre};
        // drop an interior node when three consecutive values coincide exactly
        if (nodes_.size() >= 2) {
            const ClockNode& prev = nodes_.back();
            const ClockNode& prev2 = nodes_[nodes_.size() - 2];
            if (!prev.pre && !node.pre && !prev2.pre && bitwise_equal(prev.value, node.value) &&
                bitwise_equal(prev2.value, node.value))
                nodes_.pop_back();
        }
        nodes_.push_back(std::move(node));
    }
    fold_left();
}

void HistorySegment::fold_left() {
    while (nodes_.size() >= 2) {
        const ClockNode& f = nodes_.front();
        const ClockNode& s = nodes_[1];
        const double th1 = f.u - shift_;
        const double th2 = s.u - shift_;
        const double w1 = std::exp(r_ * th1);
        const double w2 = std::exp(r_ * th2);
        double dev1 = w1 * (f.value - tail_anchor_).norm();
        if (f.pre) dev1 = std::max(dev1, w1 * (*f.pre - tail_anchor_).norm());
        const double dth = th2 - th1;
        const Vector anchor2 = std::exp(-r_ * dth) * tail_anchor_;
        const double dev2 = w2 * (s.left() - anchor2).norm();
        // interior mismatch of the linear piece against the exponential tail
        const double bulge = w1 * tail_anchor_.norm() * (r_ * dth) * (r_ * dth) / 8.0;
        if (dev1 < 0.25 * fold_tolerance && dev2 < 0.25 * fold_tolerance &&
            bulge < 0.5 * fold_tolerance) {
            tail_anchor_ = anchor2;
            nodes_.pop_front();
            u_min_ = nodes_.front().u;
        } else {
            break;
        }
    }
    u_min_ = nodes_.front().u;
}

HistorySegment shift_append(HistorySegment segment, std::span<const PathSample> path, double dt) {
    segment.append(path, dt);
    return segment;
}

HistorySegment with_jump(HistorySegment segment, const Vector& z) {
    segment.add_jump(z);
    return segment;
}

double weighted_piece_log_max(double r, double ua, double ub, const Vector& va, const Vector& vb) {
    const double na = va.norm();
    const double nb = vb.norm();
    const double h = ub - ua;
    if (!(h > 0.0)) return r * ua + std::log(std::max(na, nb));
    // local coordinates tau in [0, h]; piece value va + tau * slope
    const Vector slope = (vb - va) / h;
    const double A = va.squaredNorm();
    const double B = va.dot(slope);
    const double C = slope.squaredNorm();
    auto log_g = [&](double tau) {
        const double q = A + 2.0 * B * tau + C * tau * tau;
        return q <= 0.0 ? -kInf : r * tau + 0.5 * std::log(q);
    };
    double best = std::max(log_g(0.0), log_g(h));
    // stationary points of e^{2 r tau} (A + 2 B tau + C tau^2)
    const double a2 = r * C;
    const double a1 = 2.0 * r * B + C;
    const double a0 = r * A + B;
    if (a2 != 0.0) {
        const double disc = a1 * a1 - 4.0 * a2 * a0;
        if (disc >= 0.0) {
            const double sq = std::sqrt(disc);
            for (const double root : {(-a1 - sq) / (2.0 * a2), (-a1 + sq) / (2.0 * a2)})
                if (root > 0.0 && root < h) best = std::max(best, log_g(root));
        }
    } else if (a1 != 0.0) {
        const double root = -a0 / a1;
        if (root > 0.0 && root < h) best = std::max(best, log_g(root));
    }
    return r * ua + best;
}

double fading_norm_at_rate(const HistorySegment& seg, double rate) {
    const double r = seg.fading_rate();
    if (!(rate > 0.0)) throw std::invalid_argument("norm rate must be positive");
    const double theta_min = seg.theta_min();
    const double anchor_norm = seg.tail_anchor().norm();
    double best;
    if (rate >= r) {
        // tail weight e^{(rate - r) theta} peaks at theta_min
        best = anchor_norm == 0.0 ? 0.0 : anchor_norm * std::exp(rate * theta_min);
    } else {
        if (anchor_norm > 0.0) return kInf;
        best = 0.0;
    }
    double log_best = best > 0.0 ? std::log(best) : -kInf;
    const std::size_t n = seg.node_count();
    for (std::size_t i = 0; i < n; ++i) {
        const SegmentNode a = seg.node(i);
        const double la = a.value.norm();
        if (la > 0.0) log_best = std::max(log_best, rate * a.theta + std::log(la));
        if (a.pre) {
            const double lp = a.pre->norm();
            if (lp > 0.0) log_best = std::max(log_best, rate * a.theta + std::log(lp));
        }
        if (i + 1 < n) {
            const SegmentNode b = seg.node(i + 1);
            log_best = std::max(log_best,
                                weighted_piece_log_max(rate, a.theta, b.theta, a.value, b.left()));
        }
    }
    return std::isinf(log_best) && log_best < 0.0 ? 0.0 : std::exp(log_best);
}

double fading_norm(const HistorySegment& seg) { return fading_norm_at_rate(seg, seg.fading_rate()); }

// ---------------------------------------------------------------------------
// DelayMeasure

DelayMeasure DelayMeasure::atom(double theta0) {
    Component c;
    c.kind = Component::Kind::Atom;
    c.weight = 1.0;
    c.theta0 = theta0;
    return mixture({c});
}

DelayMeasure DelayMeasure::exponential(double lambda) {
    Component c;
    c.kind = Component::Kind::Exponential;
    c.weight = 1.0;
    c.lambda = lambda;
    return mixture({c});
}

DelayMeasure DelayMeasure::mixture(std::vector<Component> components) {
    if (components.empty()) throw std::invalid_argument("delay measure needs at least one component");
    double total = 0.0;
    for (const auto& c : components) {
        if (!(c.weight > 0.0)) throw std::invalid_argument("component weights must be positive");
        if (c.kind == Component::Kind::Atom && c.theta0 > 0.0)
            throw std::invalid_argument("atoms must sit at theta <= 0");
        if (c.kind == Component::Kind::Exponential && !(c.lambda > 0.0))
            throw std::invalid_argument("exponential rates must be positive");
        total += c.weight;
    }
    if (std::abs(total - 1.0) > 1e-12)
        throw std::invalid_argument("delay measure weights must sum to 1");
    DelayMeasure m;
    m.components_ = std::move(components);
    return m;
}

double exp_moment(const DelayMeasure& measure, double kappa) {
    if (!(kappa > 0.0)) throw std::invalid_argument("kappa must be positive");
    double sum = 0.0;
    for (const auto& c : measure.components()) {
        if (c.kind == DelayMeasure::Component::Kind::Atom) {
            sum += c.weight * std::exp(-kappa * c.theta0);
        } else {
            if (c.lambda <= kappa) return kInf;
            sum += c.weight * c.lambda / (c.lambda - kappa);
        }
    }
    return sum;
}

bool in_M_kappa(const DelayMeasure& measure, double kappa) {
    return std::isfinite(exp_moment(measure, kappa));
}

// ---------------------------------------------------------------------------
// Pointwise maps

PointwiseMap PointwiseMap::polynomial(std::vector<double> coeffs) {
    PointwiseMap m;
    m.polynomial_ = true;
    while (coeffs.size() > 1 && coeffs.back() == 0.0) coeffs.pop_back();
    m.growth_degree_ = static_cast<double>(coeffs.size() - 1);
    m.coeffs_ = std::move(coeffs);
    return m;
}

PointwiseMap PointwiseMap::identity() { return polynomial({0.0, 1.0}); }

PointwiseMap PointwiseMap::power(int k) {
    std::vector<double> c(static_cast<std::size_t>(k) + 1, 0.0);
    c.back() = 1.0;
    return polynomial(std::move(c));
}

PointwiseMap PointwiseMap::opaque(std::function<Vector(const Vector&)> fn, double growth_degree) {
    PointwiseMap m;
    m.polynomial_ = false;
    m.fn_ = std::move(fn);
    m.growth_degree_ = growth_degree;
    return m;
}

Vector PointwiseMap::operator()(const Vector& x) const {
    if (!polynomial_) return fn_(x);
    Vector acc = Vector::Constant(x.size(), coeffs_.back());
    for (std::size_t j = coeffs_.size() - 1; j-- > 0;)
        acc = (acc.array() * x.array() + coeffs_[j]).matrix();
    return acc;
}

BivariateMap BivariateMap::homogeneous(std::function<double(const Vector&, const Vector&)> fn,
                                       double degree) {
    BivariateMap m;
    m.fn_ = std::move(fn);
    m.growth_degree_ = degree;
    m.homogeneous_ = true;
    return m;
}

BivariateMap BivariateMap::opaque(std::function<double(const Vector&, const Vector&)> fn,
                                  double growth_degree) {
    BivariateMap m;
    m.fn_ = std::move(fn);
    m.growth_degree_ = growth_degree;
    m.homogeneous_ = false;
    return m;
}

// ---------------------------------------------------------------------------
// Delay integrals

namespace {

// grid nodes of one or two segments within (lo, 0), strictly sorted
std::vector<double> split_points(std::initializer_list<const HistorySegment*> segs, double lo) {
    std::set<double> pts;
    for (const HistorySegment* s : segs) {
        for (std::size_t i = 0; i < s->node_count(); ++i) {
            const double th = s->node(i).theta;
            if (th > lo && th < 0.0) pts.insert(th);
        }
        if (s->theta_min() > lo && s->theta_min() < 0.0) pts.insert(s->theta_min());
    }
    return {pts.begin(), pts.end()};
}

// adaptive quadrature of a scalar integrand over [lo, 0] split at grid nodes
double grid_quadrature(const std::function<double(double)>& f, double lo,
                       const std::vector<double>& splits) {
    double sum = 0.0;
    double a = lo;
    for (double b : splits) {
        sum += integrate(f, a, b);
        a = b;
    }
    sum += integrate(f, a, 0.0);
    return sum;
}

void require_tail_dominated(double lambda, double q_eff, double r, std::size_t index) {
    if (lambda <= q_eff * r)
        throw DivergenceError("delay integral diverges: exponential component " +
                              std::to_string(index) + " has rate " + std::to_string(lambda) +
                              " <= growth " + std::to_string(q_eff) + " x " + std::to_string(r));
}

}  // namespace

Vector delay_integral(const HistorySegment& segment, const DelayMeasure& measure,
                      const PointwiseMap& g) {
    const double r = segment.fading_rate();
    const Vector probe = g(segment.head());
    const Eigen::Index out_dim = probe.size();
    Vector result = Vector::Zero(out_dim);
    const double theta_min = segment.theta_min();
    const Vector& anchor = segment.tail_anchor();
    const bool tail_zero = anchor.norm() == 0.0;
    std::vector<double> splits;
    bool have_splits = false;
    Vector buf(segment.dimension());

    for (std::size_t ci = 0; ci < measure.components().size(); ++ci) {
        const auto& c = measure.components()[ci];
        if (c.kind == DelayMeasure::Component::Kind::Atom) {
            segment.value_into(c.theta0, buf);
            result += c.weight * g(buf);
            continue;
        }
        const double lambda = c.lambda;
        const double q_eff = tail_zero ? 0.0 : g.growth_degree();
        require_tail_dominated(lambda, q_eff, r, ci);
        if (!have_splits) {
            splits = split_points({&segment}, theta_min);
            have_splits = true;
        }
        // grid part, componentwise
        for (Eigen::Index k = 0; k < out_dim; ++k) {
            auto f = [&](double theta) {
                segment.value_into(theta, buf);
                return lambda * std::exp(lambda * theta) * g(buf)[k];
            };
            result[k] += c.weight * grid_quadrature(f, theta_min, splits);
        }
        // tail part
        if (g.is_polynomial()) {
            const double scale = std::exp(lambda * theta_min);
            if (tail_zero) {
                if (!g.coeffs().empty() && g.coeffs()[0] != 0.0)
                    result.array() += c.weight * g.coeffs()[0] * scale;
            } else {
                Vector powers = Vector::Ones(anchor.size());
                for (std::size_t j = 0; j < g.coeffs().size(); ++j) {
                    const double cj = g.coeffs()[j];
                    if (cj != 0.0) {
                        const double denom = lambda - static_cast<double>(j) * r;
                        result += c.weight * cj * (lambda / denom) * scale * powers;
                    }
                    powers = powers.cwiseProduct(anchor);
                }
            }
        } else {
            const double scale = lambda * std::exp(lambda * theta_min);
            for (Eigen::Index k = 0; k < out_dim; ++k) {
                auto f = [&](double s) {
                    const Vector x = std::pow(s, -r) * anchor;
                    return std::pow(s, lambda - 1.0) * g(x)[k];
                };
                result[k] += c.weight * scale * integrate_dyadic_to_zero(f, 1.0);
            }
        }
    }
    return result;
}

double delay_integral_pair(const HistorySegment& phi, const HistorySegment& psi,
                           const DelayMeasure& measure, const BivariateMap& g) {
    if (phi.fading_rate() != psi.fading_rate())
        throw std::invalid_argument("pair integral requires matching fading rates");
    const double r = phi.fading_rate();
    const double theta_tail = std::min(phi.theta_min(), psi.theta_min());
    const bool tails_zero = phi.tail_anchor().norm() == 0.0 && psi.tail_anchor().norm() == 0.0;
    double result = 0.0;
    std::vector<double> splits;
    bool have_splits = false;
    Vector bx(phi.dimension()), by(psi.dimension());

    for (std::size_t ci = 0; ci < measure.components().size(); ++ci) {
        const auto& c = measure.components()[ci];
        if (c.kind == DelayMeasure::Component::Kind::Atom) {
            phi.value_into(c.theta0, bx);
            psi.value_into(c.theta0, by);
            result += c.weight * g(bx, by);
            continue;
        }
        const double lambda = c.lambda;
        const double q_eff = tails_zero ? 0.0 : g.growth_degree();
        require_tail_dominated(lambda, q_eff, r, ci);
        if (!have_splits) {
            splits = split_points({&phi, &psi}, theta_tail);
            have_splits = true;
        }
        auto f = [&](double theta) {
            phi.value_into(theta, bx);
            psi.value_into(theta, by);
            return lambda * std::exp(lambda * theta) * g(bx, by);
        };
        result += c.weight * grid_quadrature(f, theta_tail, splits);
        // tail: below theta_tail both histories follow their exponential form,
        // so phi(theta) = e^{-r (theta - theta_tail)} phi(theta_tail)
        if (tails_zero) {
            // H(0, 0) contributes nothing
        } else if (g.is_homogeneous()) {
            phi.value_into(theta_tail, bx);
            psi.value_into(theta_tail, by);
            const double K = g(bx, by);
            const double denom = lambda - g.growth_degree() * r;
            result += c.weight * K * (lambda / denom) * std::exp(lambda * theta_tail);
        } else {
            const double scale = lambda * std::exp(lambda * theta_tail);
            auto ft = [&](double s) {
                phi.value_into(theta_tail + std::log(s), bx);
                psi.value_into(theta_tail + std::log(s), by);
                return std::pow(s, lambda - 1.0) * g(bx, by);
            };
            result += c.weight * scale * integrate_dyadic_to_zero(ft, 1.0);
        }
    }
    return result;
}

// ---------------------------------------------------------------------------
// Randomized segments and arithmetic

HistorySegment random_segment(Rng& rng, const RandomSegmentParams& p) {
    const double theta_min =
        p.theta_min_lo + (p.theta_min_hi - p.theta_min_lo) * uniform01(rng);
    const int span = p.max_nodes - p.min_nodes + 1;
    const int count = p.min_nodes + static_cast<int>(uniform01(rng) * span) % span;
    std::vector<double> thetas{theta_min, 0.0};
    for (int i = 0; i < count - 2; ++i) thetas.push_back(theta_min * uniform01(rng));
    std::sort(thetas.begin(), thetas.end());
    thetas.erase(std::unique(thetas.begin(), thetas.end()), thetas.end());
    std::vector<std::pair<double, Vector>> grid;
    grid.reserve(thetas.size());
    for (double th : thetas) {
        Vector v(p.dimension);
        for (int d = 0; d < p.dimension; ++d) v[d] = normal_sample(rng);
        grid.emplace_back(th, std::move(v));
    }
    Vector anchor = grid.front().second;
    HistorySegment seg(p.fading_rate, grid, anchor);
    const double norm = fading_norm(seg);
    if (norm > 0.0) {
        const double target = p.norm_ball * (p.scale_uniform ? uniform01(rng) : 1.0);
        return segment_scale(seg, target / norm);
    }
    return seg;
}

std::pair<HistorySegment, HistorySegment> random_segment_pair(Rng& rng,
                                                              const RandomSegmentParams& p) {
    RandomSegmentParams q = p;
    const double theta_min =
        p.theta_min_lo + (p.theta_min_hi - p.theta_min_lo) * uniform01(rng);
    q.theta_min_lo = q.theta_min_hi = theta_min;
    HistorySegment a = random_segment(rng, q);
    HistorySegment b = random_segment(rng, q);
    return {std::move(a), std::move(b)};
}

namespace {

HistorySegment combine(const HistorySegment& a, const HistorySegment& b, double ca, double cb) {
    if (a.fading_rate() != b.fading_rate())
        throw std::invalid_argument("segment arithmetic requires matching fading rates");
    if (a.theta_min() != b.theta_min())
        throw std::invalid_argument("segment arithmetic requires matching theta_min");
    std::set<double> thetas;
    for (std::size_t i = 0; i < a.node_count(); ++i) thetas.insert(a.node(i).theta);
    for (std::size_t i = 0; i < b.node_count(); ++i) thetas.insert(b.node(i).theta);

    auto eval_sides = [](const HistorySegment& s, double th, Vector& left, Vector& right) {
        right = s.value(th);
        left = right;
        for (std::size_t i = 0; i < s.node_count(); ++i) {
            const SegmentNode n = s.node(i);
            if (n.theta == th) {
                left = n.left();
                right = n.value;
                return;
            }
        }
    };

    std::vector<SegmentNode> nodes;
    Vector la(a.dimension()), ra(a.dimension()), lb(b.dimension()), rb(b.dimension());
    for (double th : thetas) {
        eval_sides(a, th, la, ra);
        eval_sides(b, th, lb, rb);
        SegmentNode n;
        n.theta = th;
        n.value = ca * ra + cb * rb;
        Vector left = ca * la + cb * lb;
        if ((left - n.value).norm() > 0.0) n.pre = std::move(left);
        nodes.push_back(std::move(n));
    }
    Vector anchor = ca * a.tail_anchor() + cb * b.tail_anchor();
    return HistorySegment::from_nodes(a.fading_rate(), std::move(nodes), std::move(anchor));
}

}  // namespace

HistorySegment segment_scale(const HistorySegment& s, double factor) {
    std::vector<SegmentNode> nodes;
    for (std::size_t i = 0; i < s.node_count(); ++i) {
        SegmentNode n = s.node(i);
        n.value *= factor;
        if (n.pre) *n.pre *= factor;
        nodes.push_back(std::move(n));
    }
    return HistorySegment::from_nodes(s.fading_rate(), std::move(nodes), factor * s.tail_anchor());
}

HistorySegment segment_add(const HistorySegment& a, const HistorySegment& b) {
    return combine(a, b, 1.0, 1.0);
}

HistorySegment segment_sub(const HistorySegment& a, const HistorySegment& b) {
    return combine(a, b, 1.0, -1.0);
}

void write_segment_csv(const HistorySegment& segment, std::ostream& os) {
    os.precision(17);
    os << "# tail_coefficient";
    const Vector v = segment.tail_coefficient();
    for (Eigen::Index i = 0; i < v.size(); ++i) os << ',' << v[i];
    os << '\n' << "theta";
    for (int i = 0; i < segment.dimension(); ++i) os << ",x" << i;
    os << '\n';
    for (std::size_t i = 0; i < segment.node_count(); ++i) {
        const SegmentNode n = segment.node(i);
        if (n.pre) {
            os << n.theta;
            for (Eigen::Index k = 0; k < n.pre->size(); ++k) os << ',' << (*n.pre)[k];
            os << '\n';
        }
        os << n.theta;
        for (Eigen::Index k = 0; k < n.value.size(); ++k) os << ',' << n.value[k];
        os << '\n';
    }
}

}  // namespace sdde
