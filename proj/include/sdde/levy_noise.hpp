#pragma once

#include "sdde/common.hpp"
#include "sdde/rng.hpp"

#include <limits>
#include <optional>
#include <utility>
#include <vector>

namespace sdde {

/// One jump of a marked point process. Streams returned by
/// sample_large_jumps are strictly time-ordered.
struct JumpEvent {
    double time = 0.0;
    Vector mark;
};

/// Radial profile of the mark distribution for compound-Poisson models.
/// Marks are isotropic: radius from the profile, direction uniform on the
/// sphere (a sign in one dimension), which makes the measure symmetric by
/// construction.
struct MarkRadialProfile {
    enum class Kind { Exponential, Uniform };
    Kind kind = Kind::Exponential;
    double parameter = 1.0;  // rate for Exponential, radius bound for Uniform

    double cdf(double s) const;
    double inv_cdf(double u) const;
    double density(double s) const;
};

/// A symmetric sigma-finite jump intensity on R^n with analytic or
/// quadrature access to tail masses and truncated second moments.
///
/// Kinds:
///  - symmetric atoms: finite list of (z_i, mass_i) closed under z -> -z;
///    construction takes one representative per pair and mirrors it.
///  - radial density: c |z|^(-1-alpha) on 0 < |z| <= R in one dimension,
///    alpha in (0, 2), R in (0, inf].
///  - compound Poisson: total mass with an isotropic sampleable mark density.
class LevyMeasureModel {
public:
    enum class Kind { SymmetricAtoms, RadialDensity, CompoundPoisson };

    /// Atoms are given for one half only (each listed z must be nonzero) and
    /// are mirrored automatically, which encodes symmetry structurally.
    static LevyMeasureModel symmetric_atoms(int dimension,
                                            std::vector<std::pair<Vector, double>> half_atoms);
    static LevyMeasureModel radial_density(double c, double alpha,
                                           double outer_cutoff = std::numeric_limits<double>::infinity());
    static LevyMeasureModel compound_poisson(int dimension, double total_mass,
                                             MarkRadialProfile profile);

    Kind kind() const { return kind_; }
    int dimension() const { return dimension_; }

    /// Largest |z| carrying mass; +inf for uncut radial densities.
    double support_radius() const;

    const std::vector<std::pair<Vector, double>>& atoms() const { return atoms_; }
    double radial_c() const { return radial_c_; }
    double radial_alpha() const { return radial_alpha_; }
    double outer_cutoff() const { return outer_cutoff_; }
    double total_mass() const { return total_mass_; }
    const MarkRadialProfile& mark_profile() const { return profile_; }

private:
    LevyMeasureModel() = default;
    Kind kind_ = Kind::SymmetricAtoms;
    int dimension_ = 1;
    std::vector<std::pair<Vector, double>> atoms_;  // full mirrored list, canonical order
    double radial_c_ = 0.0;
    double radial_alpha_ = 1.0;
    double outer_cutoff_ = std::numeric_limits<double>::infinity();
    double total_mass_ = 0.0;
    MarkRadialProfile profile_;
};

/// nu({ |z| > eps }); finite for every eps > 0.
double mass_above(const LevyMeasureModel& model, double eps);

/// nu({ lo < |z| <= hi }).
double band_mass(const LevyMeasureModel& model, double lo, double hi);

/// Integral of |z|^2 over { 0 < |z| <= eps }.
double small_jump_second_moment(const LevyMeasureModel& model, double eps);

/// Integral of |z|^2 over { lo < |z| <= hi }.
double band_second_moment(const LevyMeasureModel& model, double lo, double hi);

/// Poisson stream of the jumps with |z| > eps on [0, horizon]: exponential
/// inter-arrivals at rate mass_above(model, eps), marks i.i.d. from the
/// normalized restriction of nu. Deterministic given the generator state.
std::vector<JumpEvent> sample_large_jumps(const LevyMeasureModel& model, double eps,
                                          double horizon, Rng& rng);

/// One mark from nu restricted to { |z| > eps }, normalized.
Vector sample_mark_above(const LevyMeasureModel& model, double eps, Rng& rng);

/// Marks of the jumps falling in the band { lo < |z| <= hi } during a window
/// of length dt (Poisson count at rate band_mass * dt). Appends to `out`.
void sample_band_marks(const LevyMeasureModel& model, double lo, double hi, double dt,
                       Rng& rng, std::vector<Vector>& out);

/// Sum of the band marks over a window of length dt. Under symmetry the
/// compensating drift of any band is exactly the zero vector, so no
/// compensator term is subtracted here.
Vector sample_small_jump_increment(const LevyMeasureModel& model, double delta, double eps,
                                   double dt, Rng& rng);

}  // namespace sdde
