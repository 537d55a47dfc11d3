#pragma once

/// \file
/// \brief Relativistic charged particle in fixed potentials A, Phi:
/// Lagrangian, canonical momentum and its inversion, total energy, and the
/// gamma*L invariant that enters the EM-coupled wave equations.

#include <cmath>
#include <sstream>

#include "wavelab/core.hpp"

namespace wavelab {

/// Unit system plus the potentials at the particle's position.
struct ParticleContext {
    PhysicalConstants constants;
    Vec3 a;
    double phi = 0.0;
};

/// 1/sqrt(1 - u^2/c^2); rejects |u| >= c.
inline double lorentz_gamma(const Vec3& u, const PhysicalConstants& k) {
    const double beta2 = u.norm2() / (k.c() * k.c());
    if (!(beta2 < 1.0)) {
        std::ostringstream os;
        os << "speed |u| = " << u.norm() << " is not below c = " << k.c();
        throw ValidationError(os.str(), "kinematics.velocity");
    }
    return 1.0 / std::sqrt(1.0 - beta2);
}

/// L = -m0 c^2 / gamma + (e/c) u.A - e Phi.
inline double lagrangian(const Vec3& u, const ParticleContext& ctx) {
    const auto& k = ctx.constants;
    const double g = lorentz_gamma(u, k);
    return -k.rest_energy() / g + k.e() / k.c() * u.dot(ctx.a) - k.e() * ctx.phi;
}

/// P = gamma m0 u + (e/c) A.
inline Vec3 canonical_momentum(const Vec3& u, const ParticleContext& ctx) {
    const auto& k = ctx.constants;
    const double g = lorentz_gamma(u, k);
    return u * (g * k.m0()) + ctx.a * (k.e() / k.c());
}

/// Kinetic momentum p = P - (e/c) A.
inline Vec3 kinetic_momentum(const Vec3& P, const ParticleContext& ctx) {
    return P - ctx.a * (ctx.constants.e() / ctx.constants.c());
}

/// u = (c P - e A) / sqrt((P - eA/c)^2 + m0^2 c^2). Always subluminal.
inline Vec3 velocity_from_momentum(const Vec3& P, const ParticleContext& ctx) {
    const auto& k = ctx.constants;
    const Vec3 p = kinetic_momentum(P, ctx);
    const double mc = k.m0() * k.c();
    return p * (k.c() / std::sqrt(p.norm2() + mc * mc));
}

inline double gamma_from_momentum(const Vec3& P, const ParticleContext& ctx) {
    const auto& k = ctx.constants;
    const double mc = k.m0() * k.c();
    return std::sqrt(kinetic_momentum(P, ctx).norm2() + mc * mc) / mc;
}

/// E = sqrt((cP - eA)^2 + m0^2 c^4) + e Phi.
inline double total_energy(const Vec3& P, const ParticleContext& ctx) {
    const auto& k = ctx.constants;
    const double cp2 = k.c() * k.c() * kinetic_momentum(P, ctx).norm2();
    const double e0 = k.rest_energy();
    return std::sqrt(cp2 + e0 * e0) + k.e() * ctx.phi;
}

/// gamma L = -m0 c^2 + (e c / E0) p.A - ((E - e Phi) / E0) e Phi, with the
/// kinetic momentum p and the energy E supplied independently.
inline double gamma_L(const Vec3& p, const ParticleContext& ctx, double energy) {
    return em_bracket(ctx.constants, p, ctx.a, ctx.phi, energy);
}

}  // namespace wavelab
