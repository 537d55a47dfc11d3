#pragma once

/// \file
/// \brief Time integration: Crank-Nicolson for the Schrodinger equation and a
/// velocity-Verlet (leapfrog) stepper for the families that are second order
/// in time.

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numbers>
#include <optional>
#include <sstream>
#include <string>
#include <variant>
#include <vector>

#include "wavelab/core.hpp"
#include "wavelab/discrete_ops.hpp"
#include "wavelab/equations.hpp"
#include "wavelab/tridiagonal.hpp"

namespace wavelab {

struct EvolutionState {
    ComplexField psi;
    /// Absent for the first-order Schrodinger family.
    std::optional<ComplexField> psi_dot;
    double t = 0.0;
    std::size_t step_index = 0;
};

/// Treatment of points where the time coefficient kappa(x) is not positive.
enum class EllipticPolicy {
    Reject,  ///< throw EllipticRegime naming the offending intervals
    Clamp,   ///< replace kappa by kappa_min at those points
};

inline constexpr double kappa_min = 1e-12;

struct StepperConfig {
    double dt = 0.0;
    double t_end = 0.0;
    double cfl_safety = 0.9;
    std::size_t snapshot_stride = 1;
    EllipticPolicy elliptic = EllipticPolicy::Reject;

    void validate() const {
        if (!(dt > 0.0) || !std::isfinite(dt)) throw ValidationError("dt must be positive", "stepper.dt");
        if (!(t_end >= 0.0) || !std::isfinite(t_end)) throw ValidationError("t_end must be >= 0", "stepper.t_end");
        if (!(cfl_safety > 0.0 && cfl_safety <= 1.0))
            throw ValidationError("cfl_safety must lie in (0, 1]", "stepper.cfl_safety");
        if (snapshot_stride == 0) throw ValidationError("snapshot_stride must be positive", "stepper.snapshot_stride");
    }
};

struct InitialData {
    struct Stationary {
        double omega;
    };
    struct Zero {};

    ComplexField psi0;
    std::variant<Zero, Stationary, ComplexField> psi_dot0 = Zero{};

    static InitialData at_rest(ComplexField psi0) { return {std::move(psi0), Zero{}}; }
    /// psi_dot0 = -i omega psi0.
    static InitialData stationary(ComplexField psi0, double omega) {
        if (!std::isfinite(omega)) throw ValidationError("stationary initial data needs a finite omega", "initial.omega");
        return {std::move(psi0), Stationary{omega}};
    }
    static InitialData with_velocity(ComplexField psi0, ComplexField psi_dot0) {
        if (!(psi_dot0.grid() == psi0.grid()))
            throw ValidationError("psi_dot0 and psi0 live on different grids", "initial.psi_dot0");
        return {std::move(psi0), std::move(psi_dot0)};
    }

    ComplexField velocity() const {
        const Grid1D& g = psi0.grid();
        if (std::holds_alternative<Zero>(psi_dot0)) return ComplexField(g);
        if (const auto* s = std::get_if<Stationary>(&psi_dot0)) {
            std::vector<cplx> v(g.size());
            for (std::size_t i = 0; i < v.size(); ++i) v[i] = cplx{0.0, -s->omega} * psi0[i];
            return ComplexField(g, std::move(v));
        }
        return std::get<ComplexField>(psi_dot0);
    }
};

// ---------------------------------------------------------------------------
// Crank-Nicolson

/// Prefactored (1 + i dt H / 2hbar) psi' = (1 - i dt H / 2hbar) psi with
/// H = -(hbar^2/2m) L + V on the active nodes.
class CrankNicolsonStepper {
public:
    CrankNicolsonStepper(const EquationSpec& spec, const Grid1D& grid, double dt)
        : grid_(grid), dt_(dt), lap_(grid) {
        if (spec.family() != Family::SchrodingerTD)
            throw ValidationError("Crank-Nicolson stepping needs family schrodinger_td", "equation.family");
        if (!(dt > 0.0)) throw ValidationError("dt must be positive", "stepper.dt");
        const auto& k = spec.constants();
        kinetic_ = k.hbar() * k.hbar() / (2.0 * k.m0());
        v_ = sample_potential(spec.potential(), grid);
        const auto [lo, hi] = grid.active_range();
        lo_ = lo;
        hi_ = hi;
        tau_ = cplx{0.0, dt / (2.0 * k.hbar())};
        const double inv_dx2 = 1.0 / (grid.dx() * grid.dx());
        std::vector<cplx> diag(hi - lo);
        for (std::size_t i = lo; i < hi; ++i) diag[i - lo] = 1.0 + tau_ * (2.0 * kinetic_ * inv_dx2 + v_[i]);
        solver_.emplace(std::move(diag), tau_ * (-kinetic_ * inv_dx2), grid.periodic());
        rhs_.resize(hi - lo);
    }

    double dt() const noexcept { return dt_; }
    const Grid1D& grid() const noexcept { return grid_; }

    /// H psi on every node (zero at Dirichlet walls).
    std::vector<cplx> apply_hamiltonian(std::span<const cplx> psi) const {
        auto h = lap_.apply<cplx>(psi);
        for (std::size_t i = 0; i < h.size(); ++i) h[i] = -kinetic_ * h[i] + v_[i] * psi[i];
        for (std::size_t i = 0; i < lo_; ++i) h[i] = 0.0;
        for (std::size_t i = hi_; i < h.size(); ++i) h[i] = 0.0;
        return h;
    }

    void advance(std::vector<cplx>& psi) {
        const auto h = apply_hamiltonian(psi);
        for (std::size_t i = lo_; i < hi_; ++i) rhs_[i - lo_] = psi[i] - tau_ * h[i];
        solver_->solve(rhs_);
        for (std::size_t i = lo_; i < hi_; ++i) psi[i] = rhs_[i - lo_];
    }

    /// <psi, H psi>.
    double energy(std::span<const cplx> psi) const { return inner(grid_, psi, apply_hamiltonian(psi)).real(); }

private:
    Grid1D grid_;
    double dt_;
    LaplacianStencil lap_;
    double kinetic_ = 0.0;
    std::vector<double> v_;
    std::size_t lo_ = 0, hi_ = 0;
    cplx tau_;
    std::optional<banded::ComplexTridiagonalSolver> solver_;
    std::vector<cplx> rhs_;
};

inline EvolutionState step_schrodinger_cn(const EquationSpec& spec, const EvolutionState& state, double dt) {
    CrankNicolsonStepper stepper(spec, state.psi.grid(), dt);
    std::vector<cplx> psi = state.psi.data();
    stepper.advance(psi);
    return {ComplexField(state.psi.grid(), std::move(psi)), std::nullopt, state.t + dt, state.step_index + 1};
}

// ---------------------------------------------------------------------------
// Second-order families

namespace detail {

/// "[a, b], [c, d]" for the maximal runs of flagged nodes.
inline std::string describe_intervals(const Grid1D& grid, const std::vector<bool>& flagged) {
    std::ostringstream os;
    bool first = true;
    for (std::size_t i = 0; i < flagged.size();) {
        if (!flagged[i]) {
            ++i;
            continue;
        }
        std::size_t j = i;
        while (j + 1 < flagged.size() && flagged[j + 1]) ++j;
        os << (first ? "" : ", ") << "[" << grid.x(i) << ", " << grid.x(j) << "]";
        first = false;
        i = j + 1;
    }
    return os.str();
}

}  // namespace detail

/// Velocity-Verlet form of the central-difference scheme
///   psi^{n+1} = 2 psi^n - psi^{n-1} + dt^2 kappa^{-1} (L - mass2) psi^n,
/// whose first step is the Taylor-2 start from psi_dot0.
class SecondOrderStepper {
public:
    SecondOrderStepper(const EquationSpec& spec, const Grid1D& grid, EllipticPolicy policy = EllipticPolicy::Reject)
        : spec_(spec), grid_(grid), lap_(grid) {
        if (!is_second_order_in_time(spec.family()))
            throw ValidationError(std::string("family ") + to_string(spec.family()) + " is not second order in time",
                                  "equation.family");
        if (spec.family() == Family::EmTimeDepP && !spec.em().is_uniform())
            throw ValidationError("em_time_dep_p stepping needs uniform A and Phi", "equation.em");
        coeff_ = wave_coefficients(spec, grid);
        std::vector<bool> bad(grid.size(), false);
        bool any = false;
        const auto [lo, hi] = grid.active_range();
        lo_ = lo;
        hi_ = hi;
        for (std::size_t i = lo; i < hi; ++i)
            if (!(coeff_.kappa[i] > kappa_min)) bad[i] = any = true;
        if (any) {
            const std::string where = detail::describe_intervals(grid, bad);
            if (policy == EllipticPolicy::Reject || spec.family() != Family::NewTD) {
                const char* why = spec.family() == Family::NewTD ? "V(x) >= E" : "the time coefficient vanishes";
                throw EllipticRegime(std::string(to_string(spec.family())) + ": " + why + " on x in " + where);
            }
            for (std::size_t i = lo; i < hi; ++i)
                if (bad[i]) coeff_.kappa[i] = kappa_min;
            clamped_ = where;
        }
        double kmin = std::numeric_limits<double>::infinity();
        for (std::size_t i = lo; i < hi; ++i) kmin = std::min(kmin, coeff_.kappa[i]);
        v_max_ = 1.0 / std::sqrt(kmin);
    }

    const Grid1D& grid() const noexcept { return grid_; }
    const WaveCoefficients& coefficients() const noexcept { return coeff_; }
    /// Intervals that were clamped, empty if none.
    const std::string& clamped_intervals() const noexcept { return clamped_; }
    double max_wave_speed() const noexcept { return v_max_; }

    /// Largest dt allowed at a given safety factor. The mass term tightens
    /// the bound by 1/sqrt(1 + mass2 dx^2 / 4).
    double max_stable_dt(double safety = 1.0) const {
        const double dx = grid_.dx();
        return safety * dx / v_max_ / std::sqrt(1.0 + coeff_.mass2 * dx * dx / 4.0);
    }

    void check_cfl(double dt, double safety) const {
        const double limit = max_stable_dt(safety);
        if (dt > limit * (1.0 + 1e-12)) {
            std::ostringstream os;
            os.precision(6);
            os << "dt = " << dt << " exceeds the CFL limit " << limit << " (safety " << safety
               << ", v_max = " << v_max_ << ", dx = " << grid_.dx() << ")";
            throw CflViolation(os.str());
        }
    }

    /// kappa^{-1} (L - mass2) psi, zero at Dirichlet walls.
    void acceleration(std::span<const cplx> psi, std::vector<cplx>& out) const {
        out.resize(psi.size());
        lap_.apply<cplx>(psi, out);
        for (std::size_t i = 0; i < lo_; ++i) out[i] = 0.0;
        for (std::size_t i = lo_; i < hi_; ++i) out[i] = (out[i] - coeff_.mass2 * psi[i]) / coeff_.kappa[i];
        for (std::size_t i = hi_; i < out.size(); ++i) out[i] = 0.0;
    }

    void advance(std::vector<cplx>& psi, std::vector<cplx>& vel, double dt) {
        acceleration(psi, acc_);
        const double h = 0.5 * dt;
        for (std::size_t i = lo_; i < hi_; ++i) {
            vel[i] += h * acc_[i];
            psi[i] += dt * vel[i];
        }
        acceleration(psi, acc_);
        for (std::size_t i = lo_; i < hi_; ++i) vel[i] += h * acc_[i];
    }

    /// Discrete energy sum w kappa |v|^2 + <psi, (mass2 - L) psi>
    /// - (dt^2/4) sum w kappa |a|^2, conserved exactly by the scheme.
    double energy(std::span<const cplx> psi, std::span<const cplx> vel, double dt) const {
        std::vector<cplx> a;
        acceleration(psi, a);
        double kin = 0.0, corr = 0.0, pot = 0.0;
        for (std::size_t i = lo_; i < hi_; ++i) {
            const double w = grid_.weight(i);
            kin += w * coeff_.kappa[i] * std::norm(vel[i]);
            corr += w * coeff_.kappa[i] * std::norm(a[i]);
            // (mass2 - L) psi = -kappa a
            pot += w * (std::conj(psi[i]) * (-coeff_.kappa[i] * a[i])).real();
        }
        return kin + pot - 0.25 * dt * dt * corr;
    }

private:
    EquationSpec spec_;
    Grid1D grid_;
    LaplacianStencil lap_;
    WaveCoefficients coeff_;
    std::size_t lo_ = 0, hi_ = 0;
    double v_max_ = 0.0;
    std::string clamped_;
    std::vector<cplx> acc_;
};

inline EvolutionState step_second_order(const EquationSpec& spec, const EvolutionState& state, double dt,
                                        double cfl_safety = 0.9, EllipticPolicy policy = EllipticPolicy::Reject) {
    if (!state.psi_dot) throw ValidationError("second-order stepping needs psi_dot", "initial.psi_dot0");
    if (!(dt > 0.0)) throw ValidationError("dt must be positive", "stepper.dt");
    SecondOrderStepper stepper(spec, state.psi.grid(), policy);
    stepper.check_cfl(dt, cfl_safety);
    std::vector<cplx> psi = state.psi.data();
    std::vector<cplx> vel = state.psi_dot->data();
    stepper.advance(psi, vel, dt);
    const Grid1D& g = state.psi.grid();
    return {ComplexField(g, std::move(psi)), ComplexField(g, std::move(vel)), state.t + dt, state.step_index + 1};
}

/// psi_dot0 that launches every Fourier mode of psi0 with positive
/// frequency, psi_dot = -i Omega(-d^2/dx^2) psi, where Omega is the exact
/// dispersion of the semi-discrete scheme. Needs a uniform kappa. The
/// transform treats the active nodes as one period.
inline ComplexField positive_frequency_velocity(const EquationSpec& spec, const ComplexField& psi0) {
    const Grid1D& grid = psi0.grid();
    const auto coeff = wave_coefficients(spec, grid);
    const auto [lo, hi] = grid.active_range();
    const double kappa = coeff.kappa[lo];
    for (std::size_t i = lo; i < hi; ++i)
        if (std::abs(coeff.kappa[i] - kappa) > 1e-14 * std::abs(kappa))
            throw ValidationError("positive-frequency launch needs a uniform time coefficient", "initial.psi_dot0");
    if (!(kappa > 0.0)) throw EllipticRegime("positive-frequency launch needs kappa > 0");
    const std::size_t m = hi - lo;
    const double dx = grid.dx();
    const double two_pi = 2.0 * std::numbers::pi;
    std::vector<cplx> twiddle(m);
    for (std::size_t j = 0; j < m; ++j) twiddle[j] = std::exp(cplx{0.0, -two_pi * static_cast<double>(j) / m});

    std::vector<cplx> spectrum(m);
    for (std::size_t q = 0; q < m; ++q) {
        cplx s{};
        std::size_t idx = 0;
        for (std::size_t j = 0; j < m; ++j) {
            s += psi0[lo + j] * twiddle[idx];
            idx += q;
            if (idx >= m) idx -= m;
        }
        const double sn = std::sin(std::numbers::pi * static_cast<double>(q) / m);
        const double symbol = 4.0 * sn * sn / (dx * dx);
        spectrum[q] = cplx{0.0, -std::sqrt((symbol + coeff.mass2) / kappa)} * s / static_cast<double>(m);
    }
    std::vector<cplx> vel(grid.size(), cplx{});
    for (std::size_t j = 0; j < m; ++j) {
        cplx s{};
        std::size_t idx = 0;
        for (std::size_t q = 0; q < m; ++q) {
            s += spectrum[q] * std::conj(twiddle[idx]);
            idx += j;
            if (idx >= m) idx -= m;
        }
        vel[lo + j] = s;
    }
    return ComplexField(grid, std::move(vel));
}

// ---------------------------------------------------------------------------
// Driver

struct Snapshot {
    std::size_t step_index = 0;
    double t = 0.0;
    ComplexField psi;
    std::optional<ComplexField> psi_dot;
    double norm = 0.0;
    /// <psi, H psi> for Schrodinger, the conserved discrete energy otherwise.
    double energy = 0.0;
};

using SnapshotSink = std::function<void(Snapshot&&)>;

namespace detail {

struct StepPlan {
    std::size_t full_steps = 0;
    double last_dt = 0.0;  ///< 0 when t_end is a multiple of dt
};

inline StepPlan plan_steps(double dt, double t_end) {
    StepPlan p;
    const double ratio = t_end / dt;
    p.full_steps = static_cast<std::size_t>(std::floor(ratio + 1e-9));
    const double rest = t_end - static_cast<double>(p.full_steps) * dt;
    if (rest > 1e-12 * std::max(t_end, dt)) p.last_dt = rest;
    return p;
}

}  // namespace detail

/// Integrate from t = 0 to t_end, emitting the initial state, every
/// snapshot_stride-th step, and the final state.
inline void evolve(const EquationSpec& spec, const InitialData& initial, const StepperConfig& config,
                   const SnapshotSink& sink) {
    config.validate();
    const Grid1D& grid = initial.psi0.grid();
    const auto plan = detail::plan_steps(config.dt, config.t_end);
    const std::size_t total = plan.full_steps + (plan.last_dt > 0.0 ? 1 : 0);
    std::vector<cplx> psi = initial.psi0.data();

    auto emit = [&](std::size_t step, double t, const std::vector<cplx>* vel, double energy) {
        Snapshot s{step, t, ComplexField(grid, psi), std::nullopt};
        if (vel) s.psi_dot = ComplexField(grid, *vel);
        s.norm = norm(s.psi);
        s.energy = energy;
        sink(std::move(s));
    };
    auto wanted = [&](std::size_t step) { return step % config.snapshot_stride == 0 || step == total; };
    auto time_at = [&](std::size_t step) {
        return step <= plan.full_steps ? static_cast<double>(step) * config.dt : config.t_end;
    };

    if (spec.family() == Family::SchrodingerTD) {
        CrankNicolsonStepper cn(spec, grid, config.dt);
        std::optional<CrankNicolsonStepper> tail;
        if (plan.last_dt > 0.0) tail.emplace(spec, grid, plan.last_dt);
        emit(0, 0.0, nullptr, cn.energy(psi));
        for (std::size_t step = 1; step <= total; ++step) {
            (step <= plan.full_steps ? cn : *tail).advance(psi);
            if (wanted(step)) emit(step, time_at(step), nullptr, cn.energy(psi));
        }
        return;
    }

    SecondOrderStepper so(spec, grid, config.elliptic);
    so.check_cfl(config.dt, config.cfl_safety);
    std::vector<cplx> vel = initial.velocity().data();
    const auto [lo, hi] = grid.active_range();
    for (std::size_t i = 0; i < lo; ++i) vel[i] = 0.0;
    for (std::size_t i = hi; i < vel.size(); ++i) vel[i] = 0.0;
    emit(0, 0.0, &vel, so.energy(psi, vel, config.dt));
    for (std::size_t step = 1; step <= total; ++step) {
        so.advance(psi, vel, step <= plan.full_steps ? config.dt : plan.last_dt);
        if (wanted(step)) emit(step, time_at(step), &vel, so.energy(psi, vel, config.dt));
    }
}

inline std::vector<Snapshot> evolve(const EquationSpec& spec, const InitialData& initial,
                                    const StepperConfig& config) {
    std::vector<Snapshot> out;
    evolve(spec, initial, config, [&](Snapshot&& s) { out.push_back(std::move(s)); });
    return out;
}

}  // namespace wavelab
