#pragma once

/// \file
/// \brief Closed-form solutions, dispersion relations, the plane-wave
/// calibration of the unknown constants in each wave-equation template, and
/// the residual oracle that audits candidates against any family.

#include <algorithm>
#include <cmath>
#include <concepts>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "wavelab/core.hpp"
#include "wavelab/discrete_ops.hpp"
#include "wavelab/equations.hpp"
#include "wavelab/plane_wave.hpp"

namespace wavelab {

// ---------------------------------------------------------------------------
// Dispersion

struct DispersionResult {
    Family family;
    double k = 0.0;
    double omega = 0.0;
    double phase_velocity = 0.0;
    double group_velocity = 0.0;
};

namespace detail {

/// Speed of the non-dispersive families at fixed E: psi_tt = v^2 psi_xx.
inline double fixed_energy_speed(const EquationSpec& spec) {
    const auto& k = spec.constants();
    switch (spec.family()) {
        case Family::NewTD: {
            const double e = spec.energy();
            if (!(e > 0.0))
                throw EllipticRegime("new_td dispersion needs E > 0 (plane waves are evanescent otherwise)");
            return e / std::sqrt(2.0 * k.m0() * e);
        }
        case Family::RelNewTD: {
            const double e = spec.energy();
            const double e0 = k.rest_energy();
            return e * k.c() / std::sqrt(e * e - e0 * e0);
        }
        case Family::EmTimeDepP: {
            if (!spec.em().is_uniform())
                throw ValidationError("em_time_dep_p dispersion needs uniform A and Phi", "equation.em");
            const double e = spec.energy();
            const double e0 = k.rest_energy();
            const double phi = spec.em().phi_at(0);
            const double b = em_bracket(k, spec.momentum(), spec.em().a_at(0), phi, e);
            const double kappa = spec.momentum().norm2() * b * b / std::pow(e0 * (e - k.e() * phi), 2);
            if (!(kappa > 0.0))
                throw EllipticRegime("em_time_dep_p has a vanishing time coefficient (p = 0 or bracket = 0)");
            return 1.0 / std::sqrt(kappa);
        }
        default:
            throw ValidationError("no fixed-energy wave speed for this family", "equation.family");
    }
}

}  // namespace detail

/// Non-negative frequency of a plane wave exp(i(kx - wt)) in a free
/// (V = 0, uniform EM) background.
inline DispersionResult dispersion(const EquationSpec& spec, double k) {
    const Family f = spec.family();
    if (!is_time_dependent(f))
        throw ValidationError("dispersion needs a time-dependent family", "equation.family");
    if ((f == Family::SchrodingerTD || f == Family::NewTD) && !is_free(spec.potential()))
        throw ValidationError("dispersion is defined for the free potential only", "equation.potential");
    const auto& c = spec.constants();
    DispersionResult r{f, k};
    switch (f) {
        case Family::SchrodingerTD:
            r.omega = c.hbar() * k * k / (2.0 * c.m0());
            r.group_velocity = c.hbar() * k / c.m0();
            r.phase_velocity = k != 0.0 ? r.omega / k : 0.0;
            break;
        case Family::KleinGordon: {
            const double rest = c.m0() * c.c() * c.c() / c.hbar();
            r.omega = std::sqrt(c.c() * c.c() * k * k + rest * rest);
            r.group_velocity = c.c() * c.c() * k / r.omega;
            r.phase_velocity = k != 0.0 ? r.omega / k : std::numeric_limits<double>::infinity();
            break;
        }
        default: {
            const double v = detail::fixed_energy_speed(spec);
            r.omega = v * std::abs(k);
            r.group_velocity = k < 0.0 ? -v : v;
            r.phase_velocity = k != 0.0 ? r.omega / k : v;
        }
    }
    return r;
}

inline PlaneWave plane_wave(const DispersionResult& d, cplx amplitude = {1.0, 0.0}) {
    return PlaneWave{amplitude, d.k, d.omega};
}

// ---------------------------------------------------------------------------
// Separable solutions

enum class FrequencyMode { PaperLiteral, Rederived };

/// Temporal frequency of the separable solution psi(x) f(t).
///
/// PaperLiteral reproduces the printed frequency (2m/(E hbar) for NewTD).
/// Rederived follows the separation identity with C = -2m/hbar^2, which
/// gives f'' = -(E/hbar)^2 f. Both modes give E/hbar for RelNewTD.
inline double separable_frequency(const EquationSpec& spec, FrequencyMode mode) {
    const auto& k = spec.constants();
    const double e = spec.energy();
    if (e == 0.0) throw ValidationError("separable frequency needs E != 0", "equation.energy");
    switch (spec.family()) {
        case Family::NewTD:
            return mode == FrequencyMode::PaperLiteral ? 2.0 * k.m0() / (e * k.hbar()) : e / k.hbar();
        case Family::RelNewTD:
            return e / k.hbar();
        default:
            throw ValidationError("separable frequency is defined for new_td and rel_new_td", "equation.family");
    }
}

/// spatial(x) * (a exp(+i w t) + b exp(-i w t)).
struct SeparableSolution {
    ComplexField spatial;
    double omega = 0.0;
    cplx a{0.0, 0.0};
    cplx b{1.0, 0.0};

    /// A single stationary phase exp(-i w t).
    static SeparableSolution stationary(ComplexField spatial, double omega) {
        return SeparableSolution{std::move(spatial), omega, cplx{}, cplx{1.0, 0.0}};
    }

    cplx temporal(double t) const {
        return a * std::exp(cplx{0.0, omega * t}) + b * std::exp(cplx{0.0, -omega * t});
    }
    cplx temporal_dt(double t) const {
        const cplx iw{0.0, omega};
        return iw * a * std::exp(cplx{0.0, omega * t}) - iw * b * std::exp(cplx{0.0, -omega * t});
    }
    cplx temporal_dtt(double t) const { return -omega * omega * temporal(t); }
};

// ---------------------------------------------------------------------------
// Residual oracle

template <class C>
concept SpaceTimeCandidate = requires(const C& c, double t) {
    { c.grid() } -> std::convertible_to<Grid1D>;
    { c.sample(t) } -> std::same_as<FieldSample>;
};

/// Plane wave with every derivative taken analytically.
class PlaneWaveCandidate {
public:
    PlaneWaveCandidate(PlaneWave wave, Grid1D grid) : wave_(wave), grid_(grid) {}

    const Grid1D& grid() const { return grid_; }

    FieldSample sample(double t) const {
        FieldSample s;
        s.t = t;
        const std::size_t n = grid_.size();
        s.psi.resize(n);
        s.psi_t.resize(n);
        s.psi_tt.resize(n);
        s.psi_xx.resize(n);
        for (std::size_t i = 0; i < n; ++i) {
            const double x = grid_.x(i);
            s.psi[i] = wave_(x, t);
            s.psi_t[i] = wave_.d_t(x, t);
            s.psi_tt[i] = wave_.d_tt(x, t);
            s.psi_xx[i] = wave_.d_xx(x, t);
        }
        return s;
    }

private:
    PlaneWave wave_;
    Grid1D grid_;
};

/// Sampled spatial factor (discrete Laplacian) times closed-form temporal
/// factor (analytic time derivatives).
class SeparableCandidate {
public:
    explicit SeparableCandidate(SeparableSolution s)
        : sol_(std::move(s)), lap_(apply_laplacian(sol_.spatial)) {}

    const Grid1D& grid() const { return sol_.spatial.grid(); }

    FieldSample sample(double t) const {
        FieldSample s;
        s.t = t;
        const cplx f = sol_.temporal(t), ft = sol_.temporal_dt(t), ftt = sol_.temporal_dtt(t);
        const std::size_t n = sol_.spatial.size();
        s.psi.resize(n);
        s.psi_t.resize(n);
        s.psi_tt.resize(n);
        s.psi_xx.resize(n);
        for (std::size_t i = 0; i < n; ++i) {
            const cplx u = sol_.spatial[i];
            s.psi[i] = u * f;
            s.psi_t[i] = u * ft;
            s.psi_tt[i] = u * ftt;
            s.psi_xx[i] = lap_[i] * f;
        }
        return s;
    }

private:
    SeparableSolution sol_;
    ComplexField lap_;
};

/// Uniformly spaced samples in time; derivatives by second-order centred
/// differences, so only interior times can be evaluated.
class SampledSeries {
public:
    SampledSeries(std::vector<double> times, std::vector<ComplexField> fields)
        : times_(std::move(times)), fields_(std::move(fields)) {
        if (times_.size() != fields_.size()) throw ValidationError("time and field counts differ");
        if (times_.size() < 3)
            throw ValidationError("numerical time derivatives need at least 3 time samples", "residual.times");
        h_ = times_[1] - times_[0];
        if (!(h_ > 0.0)) throw ValidationError("sample times must increase", "residual.times");
        for (std::size_t i = 1; i < times_.size(); ++i) {
            if (std::abs((times_[i] - times_[i - 1]) - h_) > 1e-9 * h_)
                throw ValidationError("sample times must be uniformly spaced", "residual.times");
            if (!(fields_[i].grid() == fields_[0].grid()))
                throw ValidationError("sampled fields live on different grids");
        }
    }

    const Grid1D& grid() const { return fields_.front().grid(); }

    std::vector<double> interior_times() const { return {times_.begin() + 1, times_.end() - 1}; }

    FieldSample sample(double t) const {
        std::size_t i = 1;
        double best = INFINITY;
        for (std::size_t j = 1; j + 1 < times_.size(); ++j) {
            if (std::abs(times_[j] - t) < best) {
                best = std::abs(times_[j] - t);
                i = j;
            }
        }
        if (best > 1e-9 * std::max(1.0, std::abs(t)))
            throw ValidationError("residual time is not an interior sample time", "residual.times");
        const auto& fm = fields_[i - 1];
        const auto& f0 = fields_[i];
        const auto& fp = fields_[i + 1];
        FieldSample s;
        s.t = times_[i];
        const std::size_t n = f0.size();
        s.psi.assign(f0.values().begin(), f0.values().end());
        s.psi_t.resize(n);
        s.psi_tt.resize(n);
        for (std::size_t k = 0; k < n; ++k) {
            s.psi_t[k] = (fp[k] - fm[k]) / (2.0 * h_);
            s.psi_tt[k] = (fp[k] - 2.0 * f0[k] + fm[k]) / (h_ * h_);
        }
        s.psi_xx = LaplacianStencil(f0.grid()).apply<cplx>(f0.values());
        return s;
    }

private:
    std::vector<double> times_;
    std::vector<ComplexField> fields_;
    double h_ = 0.0;
};

/// Max over `times` of |LHS| / |candidate| (trapezoid L2 norms). On
/// Dirichlet grids the wall nodes are excluded from |LHS|.
template <SpaceTimeCandidate C>
double residual(const EquationSpec& spec, const C& candidate, std::span<const double> times) {
    if (times.empty()) throw ValidationError("residual needs at least one time point", "residual.times");
    const Grid1D grid = candidate.grid();
    EquationResidual lhs(spec, grid);
    const auto [lo, hi] = grid.active_range();
    double worst = 0.0;
    for (double t : times) {
        const FieldSample s = candidate.sample(t);
        const auto r = lhs(s);
        double num = 0.0;
        for (std::size_t i = lo; i < hi; ++i) num += grid.weight(i) * std::norm(r[i]);
        const double den = norm2(grid, s.psi);
        const double rel = den > 0.0 ? std::sqrt(num / den) : std::sqrt(num);
        worst = std::max(worst, rel);
    }
    return worst;
}

template <SpaceTimeCandidate C>
double residual(const EquationSpec& spec, const C& candidate, std::initializer_list<double> times) {
    return residual(spec, candidate, std::span<const double>(times.begin(), times.size()));
}

// ---------------------------------------------------------------------------
// Constant calibration

/// Wave-equation templates carrying one unknown constant X.
enum class CalibrationFamily {
    Helmholtz,            ///< psi_xx + X (w/c)^2 psi = 0,  X = n^2
    OpticalWave,          ///< psi_xx - X / c^2 psi_tt = 0, X = n^2
    StationaryMatter,     ///< psi_xx + X m (E - V) psi = 0
    TimeDependentMatter,  ///< psi_xx + X m (E - V) psi_tt = 0
    EmStationary,         ///< psi_xx + X b^2 psi = 0
    EmTimeDependent,      ///< psi_xx + X b^2 psi_tt = 0
};

inline const char* to_string(CalibrationFamily f) {
    switch (f) {
        case CalibrationFamily::Helmholtz: return "helmholtz";
        case CalibrationFamily::OpticalWave: return "optical_wave";
        case CalibrationFamily::StationaryMatter: return "stationary_matter";
        case CalibrationFamily::TimeDependentMatter: return "time_dependent_matter";
        case CalibrationFamily::EmStationary: return "em_stationary";
        case CalibrationFamily::EmTimeDependent: return "em_time_dependent";
    }
    return "unknown";
}

/// Accepts the template names above and the equation families they calibrate.
inline std::optional<CalibrationFamily> calibration_family_from_string(const std::string& s) {
    for (auto f : {CalibrationFamily::Helmholtz, CalibrationFamily::OpticalWave, CalibrationFamily::StationaryMatter,
                   CalibrationFamily::TimeDependentMatter, CalibrationFamily::EmStationary,
                   CalibrationFamily::EmTimeDependent})
        if (s == to_string(f)) return f;
    if (s == "schrodinger_stationary") return CalibrationFamily::StationaryMatter;
    if (s == "new_td") return CalibrationFamily::TimeDependentMatter;
    if (s == "em_stationary_p") return CalibrationFamily::EmStationary;
    if (s == "em_time_dep_p") return CalibrationFamily::EmTimeDependent;
    return std::nullopt;
}

struct CalibrationInput {
    PhysicalConstants constants;
    double energy = 0.0;      ///< total energy E of the trial particle
    Vec3 momentum;            ///< kinetic momentum p
    double potential = 0.0;   ///< constant V (matter templates)
    Vec3 vector_potential;    ///< A (EM templates)
    double phi = 0.0;         ///< Phi (EM templates)
};

struct CalibrationReport {
    CalibrationFamily family;
    double computed = 0.0;
    std::string computed_expression;
    std::optional<double> printed;
    std::string printed_expression;
    bool match = false;
};

namespace detail {

/// Template left-hand side at (x, t) = (0, 0) for a given constant.
inline cplx calibration_lhs(CalibrationFamily f, double constant, const PlaneWave& w, const CalibrationInput& in) {
    const auto& k = in.constants;
    const cplx psi = w(0.0, 0.0), psi_tt = w.d_tt(0.0, 0.0), psi_xx = w.d_xx(0.0, 0.0);
    const double b = em_bracket(k, in.momentum, in.vector_potential, in.phi, in.energy);
    switch (f) {
        case CalibrationFamily::Helmholtz: return psi_xx + constant * std::pow(w.omega / k.c(), 2) * psi;
        case CalibrationFamily::OpticalWave: return psi_xx - constant / (k.c() * k.c()) * psi_tt;
        case CalibrationFamily::StationaryMatter: return psi_xx + constant * k.m0() * (in.energy - in.potential) * psi;
        case CalibrationFamily::TimeDependentMatter:
            return psi_xx + constant * k.m0() * (in.energy - in.potential) * psi_tt;
        case CalibrationFamily::EmStationary: return psi_xx + constant * b * b * psi;
        case CalibrationFamily::EmTimeDependent: return psi_xx + constant * b * b * psi_tt;
    }
    return {};
}

inline bool close(double a, double b, double rel) {
    return std::abs(a - b) <= rel * std::max({std::abs(a), std::abs(b), std::numeric_limits<double>::min()});
}

inline void check_trial(CalibrationFamily f, const PlaneWave& w, const CalibrationInput& in) {
    const auto& k = in.constants;
    if (f == CalibrationFamily::Helmholtz || f == CalibrationFamily::OpticalWave) return;
    const double p = in.momentum.norm();
    if (!close(std::abs(w.k) * k.hbar(), p, 1e-10))
        throw ValidationError("trial wavenumber must equal |p|/hbar", "calibrate.momentum");
    if (!close(w.omega * k.hbar(), in.energy, 1e-10))
        throw ValidationError("trial frequency must equal E/hbar", "calibrate.energy");
    if (f == CalibrationFamily::StationaryMatter || f == CalibrationFamily::TimeDependentMatter) {
        if (!close(in.energy - in.potential, p * p / (2.0 * k.m0()), 1e-10))
            throw ValidationError("trial violates the free-particle relation E - V = p^2/2m", "calibrate.energy");
    } else {
        const double e0 = k.rest_energy();
        const double kinetic = std::sqrt(k.c() * k.c() * p * p + e0 * e0);
        if (!close(in.energy - k.e() * in.phi, kinetic, 1e-10))
            throw ValidationError("trial violates E = sqrt(c^2 p^2 + E0^2) + e Phi", "calibrate.energy");
    }
}

}  // namespace detail

/// Value of the constant as printed alongside each template.
inline std::optional<double> printed_constant(CalibrationFamily f, const CalibrationInput& in,
                                              std::string* expression = nullptr) {
    const auto& k = in.constants;
    const double e0 = k.rest_energy();
    auto say = [&](const char* s) {
        if (expression) *expression = s;
    };
    switch (f) {
        case CalibrationFamily::StationaryMatter:
            say("2/hbar^2");
            return 2.0 / (k.hbar() * k.hbar());
        case CalibrationFamily::TimeDependentMatter:
            say("-2/E");
            return -2.0 / in.energy;
        case CalibrationFamily::EmStationary:
            say("p^2/(E0^2 hbar^2)");
            return in.momentum.norm2() / (e0 * e0 * k.hbar() * k.hbar());
        case CalibrationFamily::EmTimeDependent: {
            say("-p^2/(E0^2 (E - e Phi)^2)");
            const double d = e0 * (in.energy - k.e() * in.phi);
            return -in.momentum.norm2() / (d * d);
        }
        default:
            say("");
            return std::nullopt;
    }
}

inline const char* computed_expression(CalibrationFamily f) {
    switch (f) {
        case CalibrationFamily::Helmholtz: return "k^2 c^2 / w^2";
        case CalibrationFamily::OpticalWave: return "k^2 c^2 / w^2";
        case CalibrationFamily::StationaryMatter: return "2/hbar^2";
        case CalibrationFamily::TimeDependentMatter: return "-2/E^2";
        case CalibrationFamily::EmStationary: return "p^2/(hbar^2 b^2)";
        case CalibrationFamily::EmTimeDependent: return "-p^2/(b^2 E^2)";
    }
    return "";
}

/// The constant that makes the trial plane wave an exact solution of the
/// template. The condition a X + c = 0 is linear in X; a and c are read off
/// the template's own left-hand side evaluated at X = 0 and X = 1.
inline CalibrationReport calibrate_constant(CalibrationFamily f, const PlaneWave& trial, const CalibrationInput& in) {
    detail::check_trial(f, trial, in);
    if (trial.k == 0.0)
        throw NumericalError("degenerate calibration: a k = 0 trial wave cannot fix the constant");
    const cplx c0 = detail::calibration_lhs(f, 0.0, trial, in);
    const cplx a = detail::calibration_lhs(f, 1.0, trial, in) - c0;
    if (std::abs(a) == 0.0)
        throw NumericalError(std::string("degenerate calibration for ") + to_string(f) +
                             ": the constant's coefficient vanishes for this trial");
    CalibrationReport r;
    r.family = f;
    r.computed = (-c0 / a).real();
    r.computed_expression = computed_expression(f);
    r.printed = printed_constant(f, in, &r.printed_expression);
    r.match = r.printed && detail::close(r.computed, *r.printed, 1e-12);
    return r;
}

/// Left-hand side of the template at (0, 0) with a given constant; zero iff
/// the trial solves it.
inline double calibration_residual(CalibrationFamily f, double constant, const PlaneWave& trial,
                                   const CalibrationInput& in) {
    return std::abs(detail::calibration_lhs(f, constant, trial, in));
}

}  // namespace wavelab
