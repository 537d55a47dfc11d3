#pragma once

/// \file
/// \brief Per-family coefficients and the pointwise left-hand side of each
/// governing equation, shared by the residual oracle and the integrators.

#include <algorithm>
#include <cmath>
#include <span>
#include <string>
#include <vector>

#include "wavelab/core.hpp"

namespace wavelab {

/// Second-order families written as  L psi - mass2 psi - kappa(x) psi_tt = 0.
struct WaveCoefficients {
    std::vector<double> kappa;
    double mass2 = 0.0;
};

/// Raw coefficients; kappa may be non-positive (NewTD where V >= E, or a
/// vanishing EM bracket). Callers decide how to treat such points.
inline WaveCoefficients wave_coefficients(const EquationSpec& spec, const Grid1D& grid) {
    const auto& k = spec.constants();
    const std::size_t n = grid.size();
    WaveCoefficients w;
    w.kappa.assign(n, 0.0);
    switch (spec.family()) {
        case Family::NewTD: {
            const double e = spec.energy();
            const auto v = sample_potential(spec.potential(), grid);
            for (std::size_t i = 0; i < n; ++i) w.kappa[i] = 2.0 * k.m0() * (e - v[i]) / (e * e);
            break;
        }
        case Family::RelNewTD: {
            const double e = spec.energy();
            const double e0 = k.rest_energy();
            std::fill(w.kappa.begin(), w.kappa.end(), (e * e - e0 * e0) / (e * e * k.c() * k.c()));
            break;
        }
        case Family::KleinGordon: {
            std::fill(w.kappa.begin(), w.kappa.end(), 1.0 / (k.c() * k.c()));
            const double mu = k.m0() * k.c() / k.hbar();
            w.mass2 = mu * mu;
            break;
        }
        case Family::EmTimeDepP: {
            spec.em().check_grid(grid);
            const double e = spec.energy();
            const double e0 = k.rest_energy();
            const Vec3 p = spec.momentum();
            for (std::size_t i = 0; i < n; ++i) {
                const double phi = spec.em().phi_at(i);
                const double b = em_bracket(k, p, spec.em().a_at(i), phi, e);
                const double denom = e0 * (e - k.e() * phi);
                w.kappa[i] = p.norm2() * b * b / (denom * denom);
            }
            break;
        }
        default:
            throw ValidationError(std::string("family ") + to_string(spec.family()) +
                                      " is not second order in time",
                                  "equation.family");
    }
    return w;
}

/// A candidate's value and derivatives on every grid node at one time.
struct FieldSample {
    double t = 0.0;
    std::vector<cplx> psi;
    std::vector<cplx> psi_t;
    std::vector<cplx> psi_tt;
    std::vector<cplx> psi_xx;
};

/// Pointwise left-hand side of the family's equation.
class EquationResidual {
public:
    EquationResidual(const EquationSpec& spec, const Grid1D& grid) : spec_(spec), grid_(grid) {
        const auto& k = spec.constants();
        switch (spec.family()) {
            case Family::SchrodingerStationary:
            case Family::SchrodingerTD:
                potential_ = sample_potential(spec.potential(), grid);
                break;
            case Family::EmStationaryP: {
                spec.em().check_grid(grid);
                const double e0 = k.rest_energy();
                const Vec3 p = spec.momentum();
                const double pref = p.norm2() / (e0 * e0 * k.hbar() * k.hbar());
                potential_.resize(grid.size());
                for (std::size_t i = 0; i < grid.size(); ++i) {
                    const double b = em_bracket(k, p, spec.em().a_at(i), spec.em().phi_at(i), spec.energy());
                    potential_[i] = pref * b * b;
                }
                break;
            }
            case Family::RelStationary:
                break;
            default:
                wave_ = wave_coefficients(spec, grid);
        }
    }

    std::vector<cplx> operator()(const FieldSample& s) const {
        const auto& k = spec_.constants();
        const std::size_t n = grid_.size();
        std::vector<cplx> out(n);
        switch (spec_.family()) {
            case Family::SchrodingerStationary: {
                const double kin = k.hbar() * k.hbar() / (2.0 * k.m0());
                const double e = spec_.energy();
                for (std::size_t i = 0; i < n; ++i) out[i] = -kin * s.psi_xx[i] + (potential_[i] - e) * s.psi[i];
                break;
            }
            case Family::SchrodingerTD: {
                const double kin = k.hbar() * k.hbar() / (2.0 * k.m0());
                const cplx ih{0.0, k.hbar()};
                for (std::size_t i = 0; i < n; ++i)
                    out[i] = -kin * s.psi_xx[i] + potential_[i] * s.psi[i] - ih * s.psi_t[i];
                break;
            }
            case Family::RelStationary: {
                const double e0 = k.rest_energy();
                const double ch2 = std::pow(k.c() * k.hbar(), 2);
                const double e = spec_.energy();
                for (std::size_t i = 0; i < n; ++i) out[i] = (e0 * e0 - e * e) * s.psi[i] - ch2 * s.psi_xx[i];
                break;
            }
            case Family::EmStationaryP:
                for (std::size_t i = 0; i < n; ++i) out[i] = s.psi_xx[i] + potential_[i] * s.psi[i];
                break;
            default:
                for (std::size_t i = 0; i < n; ++i)
                    out[i] = s.psi_xx[i] - wave_.mass2 * s.psi[i] - wave_.kappa[i] * s.psi_tt[i];
        }
        return out;
    }

private:
    EquationSpec spec_;
    Grid1D grid_;
    std::vector<double> potential_;
    WaveCoefficients wave_;
};

}  // namespace wavelab
