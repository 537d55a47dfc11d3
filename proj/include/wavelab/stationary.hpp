#pragma once

/// \file
/// \brief Eigensolvers for the time-independent equations and residuals of
/// the time-independent EM-coupled equation.

#include <cmath>
#include <vector>

#include "wavelab/core.hpp"
#include "wavelab/discrete_ops.hpp"
#include "wavelab/plane_wave.hpp"
#include "wavelab/tridiagonal.hpp"

namespace wavelab {

struct SpectrumResult {
    struct Level {
        double value;
        std::size_t multiplicity;
    };

    Family family = Family::SchrodingerStationary;
    /// Ascending. E for the Schrodinger family, E^2 for the relativistic one.
    std::vector<double> eigenvalues;
    /// Positive energy of each state (E, or +sqrt(E^2)).
    std::vector<double> energies;
    /// Unit trapezoid norm on the solve grid.
    std::vector<ComplexField> eigenvectors;
    /// Distinct levels after degeneracy merging, strictly ascending.
    std::vector<Level> levels;
    double merge_tolerance = 0.0;

    std::size_t size() const noexcept { return eigenvalues.size(); }
    const Grid1D& grid() const { return eigenvectors.at(0).grid(); }
};

namespace detail {

/// Matrix alpha*I + beta*(-L) + diag(v) restricted to the active nodes.
inline banded::SymmetricTridiagonal shifted_negative_laplacian(const Grid1D& grid, double alpha, double beta,
                                                               const std::vector<double>& v) {
    const auto [lo, hi] = grid.active_range();
    const std::size_t m = hi - lo;
    const double inv_dx2 = 1.0 / (grid.dx() * grid.dx());
    banded::SymmetricTridiagonal a;
    a.cyclic = grid.periodic();
    a.diag.resize(m);
    for (std::size_t i = 0; i < m; ++i) a.diag[i] = alpha + 2.0 * beta * inv_dx2 + v[lo + i];
    a.off.assign(a.cyclic ? m : m - 1, -beta * inv_dx2);
    return a;
}

inline SpectrumResult finish_spectrum(Family family, const Grid1D& grid, const banded::SymmetricTridiagonal& a,
                                      banded::EigenPairs pairs) {
    SpectrumResult r;
    r.family = family;
    const auto [glo, ghi] = a.gershgorin();
    r.merge_tolerance = 1e-9 * (ghi - glo);

    // Degeneracy merge: runs of eigenvalues within tolerance share their mean.
    std::vector<double>& ev = pairs.values;
    for (std::size_t i = 0; i < ev.size();) {
        std::size_t j = i + 1;
        while (j < ev.size() && ev[j] - ev[i] <= r.merge_tolerance) ++j;
        double mean = 0.0;
        for (std::size_t k = i; k < j; ++k) mean += ev[k];
        mean /= static_cast<double>(j - i);
        for (std::size_t k = i; k < j; ++k) ev[k] = mean;
        r.levels.push_back({mean, j - i});
        i = j;
    }
    r.eigenvalues = ev;

    const auto [lo, hi] = grid.active_range();
    const double scale = 1.0 / std::sqrt(grid.dx());
    for (std::size_t s = 0; s < pairs.vectors.size(); ++s) {
        std::vector<cplx> v(grid.size(), cplx{});
        for (std::size_t i = lo; i < hi; ++i) v[i] = pairs.vectors[s][i - lo] * scale;
        r.eigenvectors.emplace_back(grid, std::move(v));
    }
    return r;
}

inline void check_state_count(const Grid1D& grid, std::size_t n_states) {
    if (n_states == 0) throw ValidationError("n_states must be positive", "eigensolve.n_states");
    if (n_states + 2 > grid.size())
        throw ValidationError("n_states must not exceed n_points - 2", "eigensolve.n_states");
}

}  // namespace detail

/// Lowest n_states eigenpairs of -(hbar^2/2m) L + diag(V).
inline SpectrumResult solve_schrodinger_stationary(const EquationSpec& spec, const Grid1D& grid,
                                                   std::size_t n_states) {
    if (spec.family() != Family::SchrodingerStationary && spec.family() != Family::SchrodingerTD &&
        spec.family() != Family::NewTD)
        throw ValidationError("solve_schrodinger_stationary needs a non-relativistic family", "equation.family");
    detail::check_state_count(grid, n_states);
    const auto& k = spec.constants();
    const auto v = sample_potential(spec.potential(), grid);
    const double kinetic = k.hbar() * k.hbar() / (2.0 * k.m0());
    auto a = detail::shifted_negative_laplacian(grid, 0.0, kinetic, v);
    SpectrumResult r = detail::finish_spectrum(Family::SchrodingerStationary, grid, a,
                                               banded::lowest_eigenpairs(a, n_states));
    r.energies = r.eigenvalues;
    return r;
}

/// Lowest n_states eigenpairs of E0^2 - c^2 hbar^2 L. Eigenvalues are E^2.
inline SpectrumResult solve_relativistic_stationary(const EquationSpec& spec, const Grid1D& grid,
                                                    std::size_t n_states) {
    if (spec.family() != Family::RelStationary && spec.family() != Family::RelNewTD &&
        spec.family() != Family::KleinGordon)
        throw ValidationError("solve_relativistic_stationary needs a relativistic family", "equation.family");
    detail::check_state_count(grid, n_states);
    const auto& k = spec.constants();
    const double e0 = k.rest_energy();
    const double ch = k.c() * k.hbar();
    auto a = detail::shifted_negative_laplacian(grid, e0 * e0, ch * ch, std::vector<double>(grid.size(), 0.0));
    SpectrumResult r =
        detail::finish_spectrum(Family::RelStationary, grid, a, banded::lowest_eigenpairs(a, n_states));
    r.energies.reserve(r.size());
    for (double e2 : r.eigenvalues) r.energies.push_back(std::sqrt(std::max(e2, 0.0)));
    return r;
}

// ---------------------------------------------------------------------------
// Time-independent EM-coupled equation

enum class EmForm {
    CNumberMomentum,  ///< p kept as the c-number momentum
    Operator,         ///< p -> -i hbar grad, uniform potentials only
};

namespace detail {

inline void check_em_spec(const EquationSpec& spec) {
    if (spec.family() != Family::EmStationaryP)
        throw ValidationError("em_stationary_residual needs family em_stationary_p", "equation.family");
}

/// Scalar bracket of the operator form: grad.A vanishes for uniform A.
inline double operator_form_bracket(const EquationSpec& spec) {
    const auto& k = spec.constants();
    const double e0 = k.rest_energy();
    const double phi = spec.em().phi_at(0);
    return -e0 - (spec.energy() - k.e() * phi) * k.e() * phi / e0;
}

inline double active_norm(const Grid1D& grid, const std::vector<cplx>& lhs) {
    const auto [lo, hi] = grid.active_range();
    double s = 0.0;
    for (std::size_t i = lo; i < hi; ++i) s += grid.weight(i) * std::norm(lhs[i]);
    return std::sqrt(s);
}

}  // namespace detail

/// Discrete L2 norm of the left-hand side of the time-independent
/// EM-coupled equation for a sampled psi (second-difference Laplacian).
inline double em_stationary_residual(const EquationSpec& spec, const ComplexField& psi, EmForm form) {
    detail::check_em_spec(spec);
    const Grid1D& grid = psi.grid();
    const auto& k = spec.constants();
    const double e0 = k.rest_energy();
    LaplacianStencil lap(grid);
    const auto lpsi = lap.apply<cplx>(psi.values());
    std::vector<cplx> lhs(grid.size());

    if (form == EmForm::CNumberMomentum) {
        spec.em().check_grid(grid);
        const Vec3 p = spec.momentum();
        const double pref = p.norm2() / (e0 * e0 * k.hbar() * k.hbar());
        for (std::size_t i = 0; i < grid.size(); ++i) {
            const double b = em_bracket(k, p, spec.em().a_at(i), spec.em().phi_at(i), spec.energy());
            lhs[i] = lpsi[i] + pref * b * b * psi[i];
        }
    } else {
        if (!spec.em().is_uniform())
            throw ValidationError("operator form is defined only for uniform A and Phi", "equation.em");
        const double b = detail::operator_form_bracket(spec);
        std::vector<cplx> inner_term(grid.size());
        for (std::size_t i = 0; i < grid.size(); ++i) inner_term[i] = b * b * psi[i];
        const auto outer = lap.apply<cplx>(inner_term);
        for (std::size_t i = 0; i < grid.size(); ++i) lhs[i] = lpsi[i] - outer[i] / (e0 * e0);
    }
    return detail::active_norm(grid, lhs);
}

/// Same residual for a closed-form plane wave, with analytic second
/// derivatives, sampled on the nodes of `grid` at t = 0.
inline double em_stationary_residual(const EquationSpec& spec, const PlaneWave& wave, const Grid1D& grid,
                                     EmForm form) {
    detail::check_em_spec(spec);
    const auto& k = spec.constants();
    const double e0 = k.rest_energy();
    std::vector<cplx> lhs(grid.size());
    if (form == EmForm::CNumberMomentum) {
        spec.em().check_grid(grid);
        const Vec3 p = spec.momentum();
        const double pref = p.norm2() / (e0 * e0 * k.hbar() * k.hbar());
        for (std::size_t i = 0; i < grid.size(); ++i) {
            const double x = grid.x(i);
            const double b = em_bracket(k, p, spec.em().a_at(i), spec.em().phi_at(i), spec.energy());
            lhs[i] = wave.d_xx(x, 0.0) + pref * b * b * wave(x, 0.0);
        }
    } else {
        if (!spec.em().is_uniform())
            throw ValidationError("operator form is defined only for uniform A and Phi", "equation.em");
        const double b = detail::operator_form_bracket(spec);
        for (std::size_t i = 0; i < grid.size(); ++i) {
            const double x = grid.x(i);
            lhs[i] = wave.d_xx(x, 0.0) - b * b * wave.d_xx(x, 0.0) / (e0 * e0);
        }
    }
    double s = 0.0;
    for (std::size_t i = 0; i < grid.size(); ++i) s += grid.weight(i) * std::norm(lhs[i]);
    return std::sqrt(s);
}

}  // namespace wavelab
