#include "sdde/levy_noise.hpp"

#include "sdde/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace sdde {

double MarkRadialProfile::cdf(double s) const {
    if (s <= 0.0) return 0.0;
    switch (kind) {
        case Kind::Exponential:
            return 1.0 - std::exp(-parameter * s);
        case Kind::Uniform:
            return std::min(1.0, s / parameter);
    }
    return 0.0;
}

double MarkRadialProfile::inv_cdf(double u) const {
    switch (kind) {
        case Kind::Exponential:
            return -std::log1p(-u) / parameter;
        case Kind::Uniform:
            return u * parameter;
    }
    return 0.0;
}

double MarkRadialProfile::density(double s) const {
    if (s <= 0.0) return 0.0;
    switch (kind) {
        case Kind::Exponential:
            return parameter * std::exp(-parameter * s);
        case Kind::Uniform:
            return s <= parameter ? 1.0 / parameter : 0.0;
    }
    return 0.0;
}

namespace {

bool lex_less(const Vector& a, const Vector& b) {
    for (Eigen::Index i = 0; i < a.size(); ++i) {
        if (a[i] < b[i]) return true;
        if (a[i] > b[i]) return false;
    }
    return false;
}

}  // namespace

LevyMeasureModel LevyMeasureModel::symmetric_atoms(int dimension,
                                                   std::vector<std::pair<Vector, double>> half_atoms) {
    LevyMeasureModel m;
    m.kind_ = Kind::SymmetricAtoms;
    m.dimension_ = dimension;
    for (auto& [z, mass] : half_atoms) {
        if (z.size() != dimension) throw std::invalid_argument("atom dimension mismatch");
        if (z.norm() == 0.0) throw std::invalid_argument("atom at the origin is not allowed");
        if (!(mass > 0.0)) throw std::invalid_argument("atom mass must be positive");
        m.atoms_.emplace_back(z, mass);
        m.atoms_.emplace_back(-z, mass);
    }
    // Canonical order makes the sampler independent of how the caller listed
    // the representatives; the mirrored model is therefore bitwise identical.
    std::sort(m.atoms_.begin(), m.atoms_.end(),
              [](const auto& a, const auto& b) { return lex_less(a.first, b.first); });
    for (std::size_t i = 0; i + 1 < m.atoms_.size(); ++i)
        if (!lex_less(m.atoms_[i].first, m.atoms_[i + 1].first))
            throw std::invalid_argument("duplicate atom location (listed both halves?)");
    return m;
}

LevyMeasureModel LevyMeasureModel::radial_density(double c, double alpha, double outer_cutoff) {
    if (!(c > 0.0)) throw std::invalid_argument("radial density scale must be positive");
    if (!(alpha > 0.0 && alpha < 2.0)) throw std::invalid_argument("radial exponent must be in (0,2)");
    if (!(outer_cutoff > 0.0)) throw std::invalid_argument("outer cutoff must be positive");
    LevyMeasureModel m;
    m.kind_ = Kind::RadialDensity;
    m.dimension_ = 1;
    m.radial_c_ = c;
    m.radial_alpha_ = alpha;
    m.outer_cutoff_ = outer_cutoff;
    return m;
}

LevyMeasureModel LevyMeasureModel::compound_poisson(int dimension, double total_mass,
                                                    MarkRadialProfile profile) {
    if (!(total_mass >= 0.0)) throw std::invalid_argument("total mass must be nonnegative");
    if (!(profile.parameter > 0.0)) throw std::invalid_argument("mark profile parameter must be positive");
    LevyMeasureModel m;
    m.kind_ = Kind::CompoundPoisson;
    m.dimension_ = dimension;
    m.total_mass_ = total_mass;
    m.profile_ = profile;
    return m;
}

double LevyMeasureModel::support_radius() const {
    switch (kind_) {
        case Kind::SymmetricAtoms: {
            double r = 0.0;
            for (const auto& [z, mass] : atoms_) r = std::max(r, z.norm());
            return r;
        }
        case Kind::RadialDensity:
            return outer_cutoff_;
        case Kind::CompoundPoisson:
            return profile_.kind == MarkRadialProfile::Kind::Uniform
                       ? profile_.parameter
                       : std::numeric_limits<double>::infinity();
    }
    return 0.0;
}

double band_mass(const LevyMeasureModel& model, double lo, double hi) {
    if (!(lo >= 0.0) || !(hi > lo)) {
        if (hi == lo) return 0.0;
        throw std::invalid_argument("band bounds must satisfy 0 <= lo < hi");
    }
    switch (model.kind()) {
        case LevyMeasureModel::Kind::SymmetricAtoms: {
            double s = 0.0;
            for (const auto& [z, mass] : model.atoms()) {
                const double r = z.norm();
                if (r > lo && r <= hi) s += mass;
            }
            return s;
        }
        case LevyMeasureModel::Kind::RadialDensity: {
            const double a = model.radial_alpha();
            const double c = model.radial_c();
            const double h = std::min(hi, model.outer_cutoff());
            if (h <= lo) return 0.0;
            if (lo == 0.0) return std::numeric_limits<double>::infinity();
            const double hi_term = std::isinf(h) ? 0.0 : std::pow(h, -a);
            return 2.0 * c * (std::pow(lo, -a) - hi_term) / a;
        }
        case LevyMeasureModel::Kind::CompoundPoisson: {
            const double h = std::isinf(hi) ? model.support_radius() : hi;
            const double upper = std::isinf(h) ? 1.0 : model.mark_profile().cdf(h);
            return model.total_mass() * (upper - model.mark_profile().cdf(lo));
        }
    }
    return 0.0;
}

double mass_above(const LevyMeasureModel& model, double eps) {
    if (!(eps > 0.0)) throw std::invalid_argument("eps must be positive");
    return band_mass(model, eps, std::numeric_limits<double>::infinity());
}

double band_second_moment(const LevyMeasureModel& model, double lo, double hi) {
    if (hi <= lo) return 0.0;
    switch (model.kind()) {
        case LevyMeasureModel::Kind::SymmetricAtoms: {
            double s = 0.0;
            for (const auto& [z, mass] : model.atoms()) {
                const double r = z.norm();
                if (r > lo && r <= hi) s += mass * r * r;
            }
            return s;
        }
        case LevyMeasureModel::Kind::RadialDensity: {
            const double a = model.radial_alpha();
            const double c = model.radial_c();
            const double h = std::min(hi, model.outer_cutoff());
            if (h <= lo || std::isinf(h)) {
                if (std::isinf(h))
                    throw std::invalid_argument("second moment over an unbounded band is infinite");
                return 0.0;
            }
            return 2.0 * c * (std::pow(h, 2.0 - a) - std::pow(lo, 2.0 - a)) / (2.0 - a);
        }
        case LevyMeasureModel::Kind::CompoundPoisson: {
            const double h = std::min(hi, model.support_radius());
            if (h <= lo) return 0.0;
            const auto& prof = model.mark_profile();
            const double lambda = model.total_mass();
            auto integrand = [&](double s) { return s * s * prof.density(s); };
            if (std::isinf(h)) {
                // exponential profile: split at a point where the tail is analytically tiny
                const double cut = 60.0 / prof.parameter;
                return lambda * integrate(integrand, std::max(lo, 0.0), cut);
            }
            return lambda * integrate(integrand, lo, h);
        }
    }
    return 0.0;
}

double small_jump_second_moment(const LevyMeasureModel& model, double eps) {
    if (!(eps > 0.0)) throw std::invalid_argument("eps must be positive");
    return band_second_moment(model, 0.0, eps);
}

namespace {

// Mark from the normalized restriction of the measure to { lo < |z| <= hi }.
// Draw order is fixed (selection first, then sign/direction) so that sign
// flips cannot perturb event times.
Vector sample_band_mark(const LevyMeasureModel& model, double lo, double hi, Rng& rng) {
    switch (model.kind()) {
        case LevyMeasureModel::Kind::SymmetricAtoms: {
            double total = 0.0;
            for (const auto& [z, mass] : model.atoms()) {
                const double r = z.norm();
                if (r > lo && r <= hi) total += mass;
            }
            double u = uniform01(rng) * total;
            for (const auto& [z, mass] : model.atoms()) {
                const double r = z.norm();
                if (r > lo && r <= hi) {
                    u -= mass;
                    if (u <= 0.0) return z;
                }
            }
            for (auto it = model.atoms().rbegin(); it != model.atoms().rend(); ++it) {
                const double r = it->first.norm();
                if (r > lo && r <= hi) return it->first;
            }
            throw std::logic_error("empty band in mark sampler");
        }
        case LevyMeasureModel::Kind::RadialDensity: {
            const double a = model.radial_alpha();
            const double h = std::min(hi, model.outer_cutoff());
            // inverse CDF of the radial tail restricted to (lo, h]
            const double plo = std::pow(lo, -a);
            const double phi = std::isinf(h) ? 0.0 : std::pow(h, -a);
            const double u = uniform01(rng);
            const double radius = std::pow(plo - u * (plo - phi), -1.0 / a);
            const double sign = uniform01(rng) < 0.5 ? -1.0 : 1.0;
            Vector z(1);
            z[0] = sign * radius;
            return z;
        }
        case LevyMeasureModel::Kind::CompoundPoisson: {
            const auto& prof = model.mark_profile();
            const double h = std::min(hi, model.support_radius());
            const double Flo = prof.cdf(lo);
            const double Fhi = std::isinf(h) ? 1.0 : prof.cdf(h);
            const double u = uniform01(rng);
            const double radius = prof.inv_cdf(Flo + u * (Fhi - Flo));
            if (model.dimension() == 1) {
                const double sign = uniform01(rng) < 0.5 ? -1.0 : 1.0;
                Vector z(1);
                z[0] = sign * radius;
                return z;
            }
            Vector dir(model.dimension());
            do {
                for (Eigen::Index i = 0; i < dir.size(); ++i) dir[i] = normal_sample(rng);
            } while (dir.norm() == 0.0);
            return (radius / dir.norm()) * dir;
        }
    }
    throw std::logic_error("unreachable");
}

}  // namespace

Vector sample_mark_above(const LevyMeasureModel& model, double eps, Rng& rng) {
    return sample_band_mark(model, eps, std::numeric_limits<double>::infinity(), rng);
}

std::vector<JumpEvent> sample_large_jumps(const LevyMeasureModel& model, double eps,
                                          double horizon, Rng& rng) {
    if (!(horizon > 0.0)) throw std::invalid_argument("horizon must be positive");
    const double rate = mass_above(model, eps);
    std::vector<JumpEvent> events;
    if (rate <= 0.0) return events;
    double t = 0.0;
    while (true) {
        t += exponential_sample(rng, rate);
        if (t > horizon) break;
        events.push_back({t, sample_mark_above(model, eps, rng)});
    }
    return events;
}

void sample_band_marks(const LevyMeasureModel& model, double lo, double hi, double dt,
                       Rng& rng, std::vector<Vector>& out) {
    const double rate = band_mass(model, lo, hi);
    if (!std::isfinite(rate))
        throw std::invalid_argument("band has infinite mass; raise the inner cutoff");
    if (rate <= 0.0 || dt <= 0.0) return;
    const long count = poisson_sample(rng, rate * dt);
    for (long i = 0; i < count; ++i) out.push_back(sample_band_mark(model, lo, hi, rng));
}

Vector sample_small_jump_increment(const LevyMeasureModel& model, double delta, double eps,
                                   double dt, Rng& rng) {
    if (!(delta < eps)) throw std::invalid_argument("inner cutoff delta must be below eps");
    if (!(delta > 0.0)) throw std::invalid_argument("delta must be positive");
    if (!(dt > 0.0)) throw std::invalid_argument("dt must be positive");
    Vector sum = Vector::Zero(model.dimension());
    std::vector<Vector> marks;
    sample_band_marks(model, delta, eps, dt, rng, marks);
    for (const auto& m : marks) sum += m;
    return sum;
}

}  // namespace sdde
