#pragma once

/// \file
/// \brief Shared vocabulary: physical constants, uniform 1-D grids, complex
/// fields, potentials and the equation-family taxonomy.

#include <cmath>
#include <complex>
#include <cstddef>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <variant>
#include <vector>

namespace wavelab {

using cplx = std::complex<double>;

// ---------------------------------------------------------------------------
// Errors
//
// Three families, matching how a caller is expected to react: bad input,
// a numerical failure during compute, or an I/O problem.

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class ValidationError : public Error {
public:
    explicit ValidationError(const std::string& msg, std::string key = {})
        : Error(msg), key_(std::move(key)) {}
    const std::string& key() const noexcept { return key_; }

private:
    std::string key_;
};

class NumericalError : public Error {
public:
    using Error::Error;
};

class CflViolation : public NumericalError {
public:
    using NumericalError::NumericalError;
};

class NonConvergence : public NumericalError {
public:
    NonConvergence(const std::string& msg, std::size_t index)
        : NumericalError(msg), index_(index) {}
    std::size_t index() const noexcept { return index_; }

private:
    std::size_t index_;
};

class SingularSystem : public NumericalError {
public:
    using NumericalError::NumericalError;
};

/// Raised when a family's second-time-derivative coefficient is not
/// positive, i.e. the equation stops being a wave equation.
class EllipticRegime : public NumericalError {
public:
    using NumericalError::NumericalError;
};

class IoError : public Error {
public:
    using Error::Error;
};

// ---------------------------------------------------------------------------

struct Vec3 {
    double x = 0.0;
    double y = 0.0;
    double z = 0.0;

    constexpr Vec3 operator+(const Vec3& o) const { return {x + o.x, y + o.y, z + o.z}; }
    constexpr Vec3 operator-(const Vec3& o) const { return {x - o.x, y - o.y, z - o.z}; }
    constexpr Vec3 operator*(double s) const { return {x * s, y * s, z * s}; }
    constexpr Vec3 operator/(double s) const { return {x / s, y / s, z / s}; }
    constexpr bool operator==(const Vec3&) const = default;

    constexpr double dot(const Vec3& o) const { return x * o.x + y * o.y + z * o.z; }
    constexpr double norm2() const { return dot(*this); }
    double norm() const { return std::sqrt(norm2()); }
};

constexpr Vec3 operator*(double s, const Vec3& v) { return v * s; }

/// Unit system every formula reads from. Natural units by default.
class PhysicalConstants {
public:
    PhysicalConstants() = default;
    PhysicalConstants(double hbar, double c, double m0, double e)
        : hbar_(hbar), c_(c), m0_(m0), e_(e) {
        if (!(hbar > 0.0) || !std::isfinite(hbar))
            throw ValidationError("hbar must be a positive finite number", "constants.hbar");
        if (!(c > 0.0) || !std::isfinite(c))
            throw ValidationError("c must be a positive finite number", "constants.c");
        if (!(m0 > 0.0) || !std::isfinite(m0))
            throw ValidationError("m0 must be a positive finite number", "constants.m0");
        if (!std::isfinite(e))
            throw ValidationError("e must be finite", "constants.e");
    }

    double hbar() const noexcept { return hbar_; }
    double c() const noexcept { return c_; }
    double m0() const noexcept { return m0_; }
    double e() const noexcept { return e_; }

    /// Rest energy m0 c^2.
    double rest_energy() const noexcept { return m0_ * c_ * c_; }

    bool operator==(const PhysicalConstants&) const = default;

private:
    double hbar_ = 1.0;
    double c_ = 1.0;
    double m0_ = 1.0;
    double e_ = 1.0;
};

enum class Boundary { Dirichlet, Periodic };

inline const char* to_string(Boundary b) {
    return b == Boundary::Dirichlet ? "dirichlet" : "periodic";
}

/// Uniform grid. Dirichlet grids include both end points (held at zero);
/// periodic grids exclude x_max, which is identified with x_min.
class Grid1D {
public:
    Grid1D(double x_min, double x_max, std::size_t n_points, Boundary boundary)
        : x_min_(x_min), x_max_(x_max), n_(n_points), boundary_(boundary) {
        if (!std::isfinite(x_min) || !std::isfinite(x_max) || !(x_max > x_min))
            throw ValidationError("degenerate domain: x_max must exceed x_min", "grid.x_max");
        if (n_points < 3)
            throw ValidationError("degenerate domain: n_points must be at least 3", "grid.n_points");
        dx_ = boundary == Boundary::Dirichlet ? (x_max - x_min) / static_cast<double>(n_points - 1)
                                              : (x_max - x_min) / static_cast<double>(n_points);
    }

    double x_min() const noexcept { return x_min_; }
    double x_max() const noexcept { return x_max_; }
    std::size_t size() const noexcept { return n_; }
    Boundary boundary() const noexcept { return boundary_; }
    bool periodic() const noexcept { return boundary_ == Boundary::Periodic; }
    double dx() const noexcept { return dx_; }
    double length() const noexcept { return x_max_ - x_min_; }

    double x(std::size_t i) const noexcept { return x_min_ + static_cast<double>(i) * dx_; }

    std::vector<double> coordinates() const {
        std::vector<double> xs(n_);
        for (std::size_t i = 0; i < n_; ++i) xs[i] = x(i);
        return xs;
    }

    /// Trapezoid weight of node i. Periodic grids weight every node by dx.
    double weight(std::size_t i) const noexcept {
        if (!periodic() && (i == 0 || i + 1 == n_)) return 0.5 * dx_;
        return dx_;
    }

    /// First and one-past-last index of the nodes that carry unknowns.
    std::pair<std::size_t, std::size_t> active_range() const noexcept {
        return periodic() ? std::pair<std::size_t, std::size_t>{0, n_}
                          : std::pair<std::size_t, std::size_t>{1, n_ - 1};
    }

    bool operator==(const Grid1D&) const = default;

private:
    double x_min_;
    double x_max_;
    std::size_t n_;
    Boundary boundary_;
    double dx_ = 0.0;
};

inline Grid1D make_grid(double x_min, double x_max, std::size_t n, Boundary boundary) {
    return Grid1D(x_min, x_max, n, boundary);
}

/// Complex samples over a grid. Entries are always finite.
class ComplexField {
public:
    explicit ComplexField(const Grid1D& grid) : grid_(grid), values_(grid.size()) {}

    ComplexField(const Grid1D& grid, std::vector<cplx> values)
        : grid_(grid), values_(std::move(values)) {
        if (values_.size() != grid_.size())
            throw ValidationError("field length " + std::to_string(values_.size()) +
                                  " does not match grid size " + std::to_string(grid_.size()));
        for (std::size_t i = 0; i < values_.size(); ++i) {
            if (!std::isfinite(values_[i].real()) || !std::isfinite(values_[i].imag()))
                throw NumericalError("non-finite field value at index " + std::to_string(i));
        }
    }

    template <class F>
    static ComplexField from_function(const Grid1D& grid, F&& f) {
        std::vector<cplx> v(grid.size());
        for (std::size_t i = 0; i < v.size(); ++i) v[i] = f(grid.x(i));
        return ComplexField(grid, std::move(v));
    }

    const Grid1D& grid() const noexcept { return grid_; }
    std::size_t size() const noexcept { return values_.size(); }
    std::span<const cplx> values() const noexcept { return values_; }
    const std::vector<cplx>& data() const noexcept { return values_; }
    cplx operator[](std::size_t i) const { return values_[i]; }

private:
    Grid1D grid_;
    std::vector<cplx> values_;
};

// ---------------------------------------------------------------------------
// Potentials

namespace potential {
struct Free {};
/// Walls are the Dirichlet boundary; V = 0 inside.
struct InfiniteWell {};
/// V = k x^2 / 2.
struct Harmonic {
    double k_spring = 1.0;
};
/// V = v0 for x >= x_step, 0 otherwise.
struct Step {
    double v0 = 0.0;
    double x_step = 0.0;
};
/// V = v0 on [x_left, x_right], 0 elsewhere.
struct Barrier {
    double v0 = 0.0;
    double x_left = 0.0;
    double x_right = 0.0;
};
struct Tabulated {
    std::vector<double> values;
};
}  // namespace potential

using Potential = std::variant<potential::Free, potential::InfiniteWell, potential::Harmonic,
                               potential::Step, potential::Barrier, potential::Tabulated>;

inline std::vector<double> sample_potential(const Potential& pot, const Grid1D& grid) {
    std::vector<double> v(grid.size(), 0.0);
    std::visit(
        [&](const auto& p) {
            using P = std::decay_t<decltype(p)>;
            if constexpr (std::is_same_v<P, potential::InfiniteWell>) {
                if (grid.periodic())
                    throw ValidationError("infinite well requires a Dirichlet grid", "grid.boundary");
            } else if constexpr (std::is_same_v<P, potential::Harmonic>) {
                for (std::size_t i = 0; i < v.size(); ++i) v[i] = 0.5 * p.k_spring * grid.x(i) * grid.x(i);
            } else if constexpr (std::is_same_v<P, potential::Step>) {
                for (std::size_t i = 0; i < v.size(); ++i) v[i] = grid.x(i) >= p.x_step ? p.v0 : 0.0;
            } else if constexpr (std::is_same_v<P, potential::Barrier>) {
                for (std::size_t i = 0; i < v.size(); ++i) {
                    const double x = grid.x(i);
                    v[i] = (x >= p.x_left && x <= p.x_right) ? p.v0 : 0.0;
                }
            } else if constexpr (std::is_same_v<P, potential::Tabulated>) {
                if (p.values.size() != grid.size())
                    throw ValidationError("tabulated potential has " + std::to_string(p.values.size()) +
                                              " values, grid has " + std::to_string(grid.size()),
                                          "equation.potential.values");
                v = p.values;
            }
        },
        pot);
    return v;
}

inline bool is_free(const Potential& pot) {
    return std::holds_alternative<potential::Free>(pot) ||
           std::holds_alternative<potential::InfiniteWell>(pot);
}

/// Electromagnetic potentials: either one uniform (A, Phi) pair or one pair
/// per grid node.
class EmPotentials {
public:
    EmPotentials() = default;

    static EmPotentials uniform(Vec3 a, double phi) {
        EmPotentials p;
        p.a_ = {a};
        p.phi_ = {phi};
        return p;
    }

    static EmPotentials sampled(std::vector<Vec3> a, std::vector<double> phi) {
        if (a.empty() || a.size() != phi.size())
            throw ValidationError("sampled EM potentials need equal, non-empty A and Phi tables", "equation.em");
        EmPotentials p;
        p.a_ = std::move(a);
        p.phi_ = std::move(phi);
        return p;
    }

    bool is_uniform() const noexcept { return a_.size() == 1; }
    std::size_t size() const noexcept { return a_.size(); }

    Vec3 a_at(std::size_t i) const { return is_uniform() ? a_[0] : a_.at(i); }
    double phi_at(std::size_t i) const { return is_uniform() ? phi_[0] : phi_.at(i); }
    const std::vector<double>& phi_values() const noexcept { return phi_; }

    void check_grid(const Grid1D& grid) const {
        if (!is_uniform() && a_.size() != grid.size())
            throw ValidationError("sampled EM potentials do not match grid size", "equation.em");
    }

private:
    std::vector<Vec3> a_{Vec3{}};
    std::vector<double> phi_{0.0};
};

// ---------------------------------------------------------------------------
// Equation families

enum class Family {
    SchrodingerStationary,  ///< [-hbar^2/2m d2/dx2 + V] psi = E psi
    SchrodingerTD,          ///< i hbar psi_t = [-hbar^2/2m d2/dx2 + V] psi
    NewTD,                  ///< psi_xx - 2m(E-V)/E^2 psi_tt = 0
    RelStationary,          ///< [E0^2 - c^2 hbar^2 d2/dx2] psi = E^2 psi
    RelNewTD,               ///< psi_xx - (E^2-E0^2)/(E^2 c^2) psi_tt = 0
    KleinGordon,            ///< psi_xx - (m0 c/hbar)^2 psi - psi_tt / c^2 = 0
    EmStationaryP,          ///< psi_xx + p^2/(E0^2 hbar^2) b^2 psi = 0
    EmTimeDepP,             ///< psi_xx - p^2/(E0^2 (E-e Phi)^2) b^2 psi_tt = 0
};

inline const char* to_string(Family f) {
    switch (f) {
        case Family::SchrodingerStationary: return "schrodinger_stationary";
        case Family::SchrodingerTD: return "schrodinger_td";
        case Family::NewTD: return "new_td";
        case Family::RelStationary: return "rel_stationary";
        case Family::RelNewTD: return "rel_new_td";
        case Family::KleinGordon: return "klein_gordon";
        case Family::EmStationaryP: return "em_stationary_p";
        case Family::EmTimeDepP: return "em_time_dep_p";
    }
    return "unknown";
}

inline std::optional<Family> family_from_string(const std::string& s) {
    for (Family f : {Family::SchrodingerStationary, Family::SchrodingerTD, Family::NewTD,
                     Family::RelStationary, Family::RelNewTD, Family::KleinGordon,
                     Family::EmStationaryP, Family::EmTimeDepP}) {
        if (s == to_string(f)) return f;
    }
    return std::nullopt;
}

inline bool is_time_dependent(Family f) {
    return f == Family::SchrodingerTD || f == Family::NewTD || f == Family::RelNewTD ||
           f == Family::KleinGordon || f == Family::EmTimeDepP;
}

inline bool is_second_order_in_time(Family f) {
    return is_time_dependent(f) && f != Family::SchrodingerTD;
}

inline bool is_em(Family f) { return f == Family::EmStationaryP || f == Family::EmTimeDepP; }

/// The squared bracket of the EM families,
/// b = -E0 + (e c / E0) p.A - (E - e Phi) e Phi / E0.
inline double em_bracket(const PhysicalConstants& k, const Vec3& p, const Vec3& a, double phi,
                         double energy) {
    const double e0 = k.rest_energy();
    const double e = k.e();
    return -e0 + (e * k.c() / e0) * p.dot(a) - (energy - e * phi) * e * phi / e0;
}

struct EquationParams {
    std::optional<double> energy;  ///< c-number total energy E
    Potential potential = potential::Free{};
    EmPotentials em;
    Vec3 momentum;  ///< c-number kinetic momentum p
};

/// A validated equation family together with its parameters.
class EquationSpec {
public:
    EquationSpec(Family family, PhysicalConstants constants, EquationParams params)
        : family_(family), constants_(constants), params_(std::move(params)) {
        validate();
    }

    static EquationSpec schrodinger_stationary(PhysicalConstants k, Potential v,
                                               std::optional<double> energy = std::nullopt) {
        return {Family::SchrodingerStationary, k, EquationParams{energy, std::move(v), {}, {}}};
    }
    static EquationSpec schrodinger_td(PhysicalConstants k, Potential v) {
        return {Family::SchrodingerTD, k, EquationParams{std::nullopt, std::move(v), {}, {}}};
    }
    static EquationSpec new_td(PhysicalConstants k, Potential v, double energy) {
        return {Family::NewTD, k, EquationParams{energy, std::move(v), {}, {}}};
    }
    static EquationSpec rel_stationary(PhysicalConstants k, std::optional<double> energy = std::nullopt) {
        return {Family::RelStationary, k, EquationParams{energy, potential::Free{}, {}, {}}};
    }
    static EquationSpec rel_new_td(PhysicalConstants k, double energy) {
        return {Family::RelNewTD, k, EquationParams{energy, potential::Free{}, {}, {}}};
    }
    static EquationSpec klein_gordon(PhysicalConstants k) {
        return {Family::KleinGordon, k, EquationParams{}};
    }
    static EquationSpec em_stationary(PhysicalConstants k, EmPotentials em, Vec3 p, double energy) {
        return {Family::EmStationaryP, k, EquationParams{energy, potential::Free{}, std::move(em), p}};
    }
    static EquationSpec em_time_dep(PhysicalConstants k, EmPotentials em, Vec3 p, double energy) {
        return {Family::EmTimeDepP, k, EquationParams{energy, potential::Free{}, std::move(em), p}};
    }

    Family family() const noexcept { return family_; }
    const PhysicalConstants& constants() const noexcept { return constants_; }
    const EquationParams& params() const noexcept { return params_; }
    const Potential& potential() const noexcept { return params_.potential; }
    const EmPotentials& em() const noexcept { return params_.em; }
    const Vec3& momentum() const noexcept { return params_.momentum; }
    bool has_energy() const noexcept { return params_.energy.has_value(); }

    double energy() const {
        if (!params_.energy)
            throw ValidationError(std::string("family ") + to_string(family_) + " needs an energy E",
                                  "equation.energy");
        return *params_.energy;
    }

    /// Copy with E replaced; re-validated.
    EquationSpec with_energy(double e) const {
        EquationParams p = params_;
        p.energy = e;
        return {family_, constants_, std::move(p)};
    }

private:
    void validate() const {
        const auto& e = params_.energy;
        if (e && !std::isfinite(*e)) throw ValidationError("energy must be finite", "equation.energy");
        switch (family_) {
            case Family::NewTD:
                if (!e) throw ValidationError("new_td requires the c-number energy E", "equation.energy");
                if (*e == 0.0)
                    throw ValidationError("new_td requires E != 0 (E is a denominator)", "equation.energy");
                break;
            case Family::RelNewTD:
                if (!e) throw ValidationError("rel_new_td requires the c-number energy E", "equation.energy");
                if (!(*e > constants_.rest_energy()))
                    throw EllipticRegime("rel_new_td requires E > E0 = m0 c^2 for wave character (E = " +
                                         std::to_string(*e) + ")");
                break;
            case Family::EmStationaryP:
                if (!e) throw ValidationError("em_stationary_p requires the energy E", "equation.energy");
                break;
            case Family::EmTimeDepP: {
                if (!e) throw ValidationError("em_time_dep_p requires the energy E", "equation.energy");
                for (double phi : params_.em.phi_values()) {
                    if (*e == constants_.e() * phi)
                        throw ValidationError("em_time_dep_p requires E != e*Phi everywhere", "equation.energy");
                }
                break;
            }
            default:
                break;
        }
    }

    Family family_;
    PhysicalConstants constants_;
    EquationParams params_;
};

}  // namespace wavelab
