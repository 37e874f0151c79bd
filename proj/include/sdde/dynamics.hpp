#pragma once

#include "sdde/common.hpp"
#include "sdde/levy_noise.hpp"
#include "sdde/memory_state.hpp"
#include "sdde/rng.hpp"

#include <cstdint>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <vector>

namespace sdde {

/// A delay functional f: histories -> R^n composed of a pointwise part
/// applied to phi(0) and distributed-delay integral parts.
class DriftSpec {
public:
    struct DelayPart {
        PointwiseMap map;
        DelayMeasure measure;
    };

    static DriftSpec zero(int dimension);
    /// f(phi) = a * phi(0) (any dimension).
    static DriftSpec linear(double a, int dimension);
    /// f(phi) = 1 - 2 phi(0) - 2 phi(0)^3 + integral of phi^2 d mu1 (1-D).
    static DriftSpec cubic_example(DelayMeasure mu1);
    /// 1-D polynomial local part plus polynomial delay parts.
    static DriftSpec custom(std::vector<double> local_coeffs, std::vector<DelayPart> delay_parts);

    int dimension() const { return dimension_; }
    const std::vector<DelayPart>& delay_parts() const { return delay_parts_; }

    Vector local(const Vector& head) const;
    /// Checks the declared moment conditions against a fading rate; returns
    /// human-readable issues (empty when every delay integral converges).
    std::vector<std::string> moment_issues(double fading_rate) const;

private:
    DriftSpec() = default;
    int dimension_ = 1;
    bool local_polynomial_ = false;
    std::vector<double> local_coeffs_;
    std::function<Vector(const Vector&)> local_fn_;
    std::vector<DelayPart> delay_parts_;
};

/// f(phi) for a history segment; delay parts evaluated by delay_integral.
Vector evaluate_drift(const DriftSpec& spec, const HistorySegment& segment);

enum class Scheme { Euler, Heun };

struct IntegratorOptions {
    double dt = 1e-3;
    Scheme scheme = Scheme::Euler;
    double blow_up_bound = 1e8;
};

/// Seed material for one trajectory; the integrators derive independent
/// small-jump and large-jump substreams from it.
struct SeedKey {
    std::uint64_t seed = 0;
    std::uint64_t trial = 0;
};

struct TrajectoryRecord {
    struct AppliedJump {
        double time;
        Vector mark;
    };
    struct Meta {
        std::uint64_t seed = 0;
        std::uint64_t trial = 0;
        double dt = 0.0;
        double eps = 0.0;    // 0 when no small-jump band was active
        double delta = 0.0;
        Scheme scheme = Scheme::Euler;
        double fading_rate = 0.0;
        double horizon = 0.0;
    };

    std::vector<double> times;           // 0 = t_0 < ... < t_K = T, jump times inserted exactly
    std::vector<Vector> states;          // post-jump values at times[k]
    std::vector<double> segment_norms;   // ||x_{t_k}||_r
    std::vector<AppliedJump> jump_log;
    Meta meta;

    /// sup over [0, T] of |x(t)| (piecewise-linear paths peak at nodes).
    double running_sup_abs() const;
};

/// Deterministic delay equation dX = f(X_t) dt by explicit Euler (default)
/// or Heun; raises BlowUpError past options.blow_up_bound.
TrajectoryRecord integrate_deterministic(const DriftSpec& spec, const HistorySegment& xi,
                                         double horizon, const IntegratorOptions& options);

/// Adds the truncated small-jump noise: per step the summed marks of the
/// band { delta < |z| <= eps }. The band compensator vanishes by symmetry.
TrajectoryRecord integrate_truncated(const DriftSpec& spec, const HistorySegment& xi,
                                     const LevyMeasureModel& levy, double eps, double delta,
                                     double horizon, const IntegratorOptions& options,
                                     SeedKey seeds);

/// Full dynamics by interlacing: jumps with |z| > 1 are sampled on their own
/// substream and applied as instantaneous state jumps at exact times; between
/// them the eps = 1 truncated dynamics runs on the small-jump substream.
TrajectoryRecord integrate_full(const DriftSpec& spec, const HistorySegment& xi,
                                const LevyMeasureModel& levy, double delta, double horizon,
                                const IntegratorOptions& options, SeedKey seeds);

/// Interlacing core with an explicit jump schedule (test hook). `levy` may be
/// null for a jump-schedule-only drive; band (delta, band_eps] small jumps are
/// drawn from rng_small when a model is given.
TrajectoryRecord integrate_with_jump_schedule(const DriftSpec& spec, const HistorySegment& xi,
                                              const LevyMeasureModel* levy, double delta,
                                              double band_eps, std::span<const JumpEvent> schedule,
                                              double horizon, const IntegratorOptions& options,
                                              Rng& rng_small, TrajectoryRecord::Meta meta);

/// Rebuilds the history segment at the record's final time from the initial
/// data and the recorded path.
HistorySegment segment_from_record(const HistorySegment& xi, const TrajectoryRecord& record);

/// CSV export: t, state components, segment norm, jump flag.
void write_trajectory_csv(const TrajectoryRecord& record, std::ostream& os);

/// Running weighted supremum S(t) = sup_{0 <= u <= t} e^{r u} |x(u)| kept in
/// log space, so segment norms are ||x_t||_r = e^{-r t} max(S(t), ||xi||_r)
/// without re-scanning the history. Exact for piecewise-linear paths.
class RunningNorm {
public:
    RunningNorm(double fading_rate, double xi_norm);
    void absorb_piece(double t_from, double t_to, const Vector& v_from, const Vector& v_to);
    void absorb_point(double t, const Vector& v);
    double norm_at(double t) const;

private:
    double r_;
    double log_sup_;
};

/// Advances one trajectory step by step: Euler or Heun drift step plus an
/// optional additive jump increment per step, instantaneous jumps between
/// steps, history kept by shift_append, segment norms by RunningNorm. The
/// probes drive several steppers in lockstep off a shared mark stream.
class TrajectoryStepper {
public:
    TrajectoryStepper(const DriftSpec& spec, HistorySegment xi, const IntegratorOptions& options,
                      TrajectoryRecord::Meta meta);

    double time() const { return t_; }
    const HistorySegment& segment() const { return segment_; }
    const Vector& state() const { return segment_.head(); }
    double norm_now() const { return running_.norm_at(t_); }

    void step(double h, const Vector* increment);
    void apply_jump(const Vector& mark);
    TrajectoryRecord finish() &&;

private:
    const DriftSpec& spec_;
    HistorySegment segment_;
    IntegratorOptions options_;
    RunningNorm running_;
    double t_;
    TrajectoryRecord record_;
    std::vector<PathSample> path_;
};

}  // namespace sdde
