#pragma once

#include <cmath>
#include <numbers>

#include "wavelab/core.hpp"

namespace wavelab {

/// amplitude * exp(i (k x - omega t)), optionally with the 3-D momentum
/// normalisation (2 pi hbar)^(-3/2).
struct PlaneWave {
    cplx amplitude{1.0, 0.0};
    double k = 0.0;
    double omega = 0.0;
    bool momentum_normalized = false;
    double hbar = 1.0;

    /// The free-particle wave exp(i (p x - E t) / hbar).
    static PlaneWave from_momentum_energy(double p, double energy, double hbar, bool normalized = false) {
        return PlaneWave{cplx{1.0, 0.0}, p / hbar, energy / hbar, normalized, hbar};
    }

    cplx prefactor() const {
        if (!momentum_normalized) return amplitude;
        return amplitude * std::pow(2.0 * std::numbers::pi * hbar, -1.5);
    }

    cplx operator()(double x, double t) const { return prefactor() * std::exp(cplx{0.0, k * x - omega * t}); }

    cplx d_t(double x, double t) const { return cplx{0.0, -omega} * (*this)(x, t); }
    cplx d_tt(double x, double t) const { return -omega * omega * (*this)(x, t); }
    cplx d_xx(double x, double t) const { return -k * k * (*this)(x, t); }
};

}  // namespace wavelab
