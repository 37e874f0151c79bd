#include "sdde/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace sdde {

DriftSpec DriftSpec::zero(int dimension) {
    DriftSpec s;
    s.dimension_ = dimension;
    s.local_polynomial_ = true;
    s.local_coeffs_ = {0.0};
    return s;
}

DriftSpec DriftSpec::linear(double a, int dimension) {
    DriftSpec s;
    s.dimension_ = dimension;
    s.local_polynomial_ = true;
    s.local_coeffs_ = {0.0, a};
    return s;
}

DriftSpec DriftSpec::cubic_example(DelayMeasure mu1) {
    DriftSpec s;
    s.dimension_ = 1;
    s.local_polynomial_ = true;
    s.local_coeffs_ = {1.0, -2.0, 0.0, -2.0};
    s.delay_parts_.push_back({PointwiseMap::power(2), std::move(mu1)});
    return s;
}

DriftSpec DriftSpec::custom(std::vector<double> local_coeffs, std::vector<DelayPart> delay_parts) {
    if (local_coeffs.empty()) local_coeffs = {0.0};
    DriftSpec s;
    s.dimension_ = 1;
    s.local_polynomial_ = true;
    s.local_coeffs_ = std::move(local_coeffs);
    s.delay_parts_ = std::move(delay_parts);
    return s;
}

Vector DriftSpec::local(const Vector& head) const {
    if (local_polynomial_) {
        Vector acc = Vector::Constant(head.size(), local_coeffs_.back());
        for (std::size_t j = local_coeffs_.size() - 1; j-- > 0;)
            acc = (acc.array() * head.array() + local_coeffs_[j]).matrix();
        return acc;
    }
    return local_fn_(head);
}

std::vector<std::string> DriftSpec::moment_issues(double fading_rate) const {
    std::vector<std::string> issues;
    for (std::size_t i = 0; i < delay_parts_.size(); ++i) {
        const auto& part = delay_parts_[i];
        const double kappa = part.map.growth_degree() * fading_rate;
        if (kappa > 0.0 && !in_M_kappa(part.measure, kappa))
            issues.push_back("delay part " + std::to_string(i) +
                             ": measure lacks the exponential moment at kappa = " +
                             std::to_string(kappa));
    }
    return issues;
}

Vector evaluate_drift(const DriftSpec& spec, const HistorySegment& segment) {
    Vector f = spec.local(segment.head());
    for (const auto& part : spec.delay_parts())
        f += delay_integral(segment, part.measure, part.map);
    return f;
}

// ---------------------------------------------------------------------------

RunningNorm::RunningNorm(double fading_rate, double xi_norm)
    : r_(fading_rate),
      log_sup_(xi_norm > 0.0 ? std::log(xi_norm) : -std::numeric_limits<double>::infinity()) {}

void RunningNorm::absorb_piece(double t_from, double t_to, const Vector& v_from,
                               const Vector& v_to) {
    log_sup_ = std::max(log_sup_, weighted_piece_log_max(r_, t_from, t_to, v_from, v_to));
}

void RunningNorm::absorb_point(double t, const Vector& v) {
    const double n = v.norm();
    if (n > 0.0) log_sup_ = std::max(log_sup_, r_ * t + std::log(n));
}

double RunningNorm::norm_at(double t) const {
    return std::isinf(log_sup_) && log_sup_ < 0.0 ? 0.0 : std::exp(log_sup_ - r_ * t);
}

double TrajectoryRecord::running_sup_abs() const {
    double s = 0.0;
    for (const auto& x : states) s = std::max(s, x.norm());
    std::size_t i = 0;
    for (const auto& j : jump_log) {
        while (i < times.size() && times[i] < j.time) ++i;
        if (i < times.size() && times[i] == j.time) s = std::max(s, (states[i] - j.mark).norm());
    }
    return s;
}

TrajectoryStepper::TrajectoryStepper(const DriftSpec& spec, HistorySegment xi,
                                     const IntegratorOptions& options,
                                     TrajectoryRecord::Meta meta)
    : spec_(spec),
      segment_(std::move(xi)),
      options_(options),
      running_(segment_.fading_rate(), fading_norm(segment_)),
      t_(0.0) {
    record_.meta = meta;
    record_.meta.fading_rate = segment_.fading_rate();
    record_.times.push_back(0.0);
    record_.states.push_back(segment_.head());
    record_.segment_norms.push_back(running_.norm_at(0.0));
    path_.resize(2);
}

void TrajectoryStepper::step(double h, const Vector* increment) {
    const Vector x_old = segment_.head();
    Vector drift = evaluate_drift(spec_, segment_);
    Vector x_new = x_old + h * drift;
    if (increment) x_new += *increment;
    if (options_.scheme == Scheme::Heun) {
        // corrector drift on the predictor segment; the jump increment is
        // applied once, after the drift average
        HistorySegment predictor = segment_;
        path_[0] = {0.0, x_old, std::nullopt};
        path_[1] = {h, x_new, std::nullopt};
        predictor.append(std::span<const PathSample>(path_.data(), 2), h);
        const Vector drift2 = evaluate_drift(spec_, predictor);
        x_new = x_old + 0.5 * h * (drift + drift2);
        if (increment) x_new += *increment;
    }
    if (!all_finite(x_new) || x_new.norm() > options_.blow_up_bound)
        throw BlowUpError(t_ + h, options_.blow_up_bound);
    path_[0] = {0.0, x_old, std::nullopt};
    path_[1] = {h, x_new, std::nullopt};
    segment_.append(std::span<const PathSample>(path_.data(), 2), h);
    running_.absorb_piece(t_, t_ + h, x_old, x_new);
    t_ += h;
    record_.times.push_back(t_);
    record_.states.push_back(x_new);
    record_.segment_norms.push_back(running_.norm_at(t_));
}

void TrajectoryStepper::apply_jump(const Vector& mark) {
    segment_.add_jump(mark);
    const Vector& post = segment_.head();
    if (!all_finite(post) || post.norm() > options_.blow_up_bound)
        throw BlowUpError(t_, options_.blow_up_bound);
    running_.absorb_point(t_, post);
    record_.jump_log.push_back({t_, mark});
    record_.states.back() = post;
    record_.segment_norms.back() = running_.norm_at(t_);
}

TrajectoryRecord TrajectoryStepper::finish() && { return std::move(record_); }

TrajectoryRecord integrate_with_jump_schedule(const DriftSpec& spec, const HistorySegment& xi,
                                              const LevyMeasureModel* levy, double delta,
                                              double band_eps, std::span<const JumpEvent> schedule,
                                              double horizon, const IntegratorOptions& options,
                                              Rng& rng_small, TrajectoryRecord::Meta meta) {
    if (!(horizon > 0.0)) throw std::invalid_argument("horizon must be positive");
    if (!(options.dt > 0.0)) throw std::invalid_argument("dt must be positive");
    for (std::size_t i = 0; i + 1 < schedule.size(); ++i)
        if (!(schedule[i].time < schedule[i + 1].time))
            throw std::invalid_argument("jump schedule must be strictly increasing in time");

    const bool band_active = levy != nullptr && band_mass(*levy, delta, band_eps) > 0.0;
    meta.dt = options.dt;
    meta.scheme = options.scheme;
    meta.horizon = horizon;
    meta.delta = delta;
    TrajectoryStepper stepper(spec, xi, options, meta);

    Vector increment = Vector::Zero(xi.dimension());
    std::vector<Vector> marks;
    long k = 0;
    std::size_t ji = 0;
    double t = 0.0;
    while (t < horizon) {
        const double t_regular = static_cast<double>(k + 1) * options.dt;
        double target = std::min(t_regular, horizon);
        bool jump_now = false;
        if (ji < schedule.size() && schedule[ji].time > t && schedule[ji].time <= target) {
            target = schedule[ji].time;
            jump_now = true;
        }
        const double h = target - t;
        const Vector* inc = nullptr;
        if (band_active) {
            marks.clear();
            sample_band_marks(*levy, delta, band_eps, h, rng_small, marks);
            increment.setZero();
            for (const auto& m : marks) increment += m;
            inc = &increment;
        }
        stepper.step(h, inc);
        if (target == t_regular) ++k;
        if (jump_now) {
            stepper.apply_jump(schedule[ji].mark);
            ++ji;
        }
        t = target;
    }
    return std::move(stepper).finish();
}

TrajectoryRecord integrate_deterministic(const DriftSpec& spec, const HistorySegment& xi,
                                         double horizon, const IntegratorOptions& options) {
    Rng unused = make_rng(0, Stream::SmallJumps, 0);
    TrajectoryRecord::Meta meta;
    return integrate_with_jump_schedule(spec, xi, nullptr, 0.0, 0.0, {}, horizon, options, unused,
                                        meta);
}

TrajectoryRecord integrate_truncated(const DriftSpec& spec, const HistorySegment& xi,
                                     const LevyMeasureModel& levy, double eps, double delta,
                                     double horizon, const IntegratorOptions& options,
                                     SeedKey seeds) {
    if (!(delta > 0.0 && delta < eps)) throw std::invalid_argument("require 0 < delta < eps");
    if (!(eps <= 1.0)) throw std::invalid_argument("truncation level eps must be <= 1");
    Rng rng_small = make_rng(seeds.seed, Stream::SmallJumps, seeds.trial);
    TrajectoryRecord::Meta meta;
    meta.seed = seeds.seed;
    meta.trial = seeds.trial;
    meta.eps = eps;
    return integrate_with_jump_schedule(spec, xi, &levy, delta, eps, {}, horizon, options,
                                        rng_small, meta);
}

TrajectoryRecord integrate_full(const DriftSpec& spec, const HistorySegment& xi,
                                const LevyMeasureModel& levy, double delta, double horizon,
                                const IntegratorOptions& options, SeedKey seeds) {
    if (!(delta > 0.0 && delta < 1.0)) throw std::invalid_argument("require 0 < delta < 1");
    Rng rng_large = make_rng(seeds.seed, Stream::LargeJumps, seeds.trial);
    Rng rng_small = make_rng(seeds.seed, Stream::SmallJumps, seeds.trial);
    std::vector<JumpEvent> schedule;
    if (mass_above(levy, 1.0) > 0.0) schedule = sample_large_jumps(levy, 1.0, horizon, rng_large);
    TrajectoryRecord::Meta meta;
    meta.seed = seeds.seed;
    meta.trial = seeds.trial;
    meta.eps = 1.0;
    return integrate_with_jump_schedule(spec, xi, &levy, delta, 1.0, schedule, horizon, options,
                                        rng_small, meta);
}

HistorySegment segment_from_record(const HistorySegment& xi, const TrajectoryRecord& record) {
    std::vector<PathSample> path;
    path.reserve(record.times.size());
    std::size_t ji = 0;
    for (std::size_t i = 0; i < record.times.size(); ++i) {
        PathSample p;
        p.s = record.times[i];
        p.value = record.states[i];
        while (ji < record.jump_log.size() && record.jump_log[ji].time < record.times[i]) ++ji;
        if (ji < record.jump_log.size() && record.jump_log[ji].time == record.times[i]) {
            p.pre = record.states[i] - record.jump_log[ji].mark;
            ++ji;
        }
        path.push_back(std::move(p));
    }
    HistorySegment out = xi;
    out.append(path, record.times.back());
    return out;
}

void write_trajectory_csv(const TrajectoryRecord& record, std::ostream& os) {
    os.precision(17);
    os << "t";
    const int dim = record.states.empty() ? 0 : static_cast<int>(record.states.front().size());
    for (int i = 0; i < dim; ++i) os << ",x" << i;
    os << ",segment_norm,jump\n";
    std::size_t ji = 0;
    for (std::size_t i = 0; i < record.times.size(); ++i) {
        bool jumped = false;
        while (ji < record.jump_log.size() && record.jump_log[ji].time < record.times[i]) ++ji;
        if (ji < record.jump_log.size() && record.jump_log[ji].time == record.times[i]) jumped = true;
        os << record.times[i];
        for (int k = 0; k < dim; ++k) os << ',' << record.states[i][k];
        os << ',' << record.segment_norms[i] << ',' << (jumped ? 1 : 0) << '\n';
    }
}

}  // namespace sdde
