#pragma once

/// \file
/// \brief Second-order central Laplacian in banded form and the trapezoid
/// quadrature used for every inner product in the library.

#include <span>
#include <vector>

#include "wavelab/core.hpp"

namespace wavelab {

/// 1/dx^2 [1, -2, 1], tridiagonal on Dirichlet grids (boundary nodes are
/// treated as zero and produce zero output) and circulant on periodic ones.
class LaplacianStencil {
public:
    explicit LaplacianStencil(const Grid1D& grid) : grid_(grid), inv_dx2_(1.0 / (grid.dx() * grid.dx())) {}

    const Grid1D& grid() const noexcept { return grid_; }
    double off_diagonal() const noexcept { return inv_dx2_; }
    double diagonal() const noexcept { return -2.0 * inv_dx2_; }

    /// out = L in. Spans must have grid size; out must not alias in.
    template <class T>
    void apply(std::span<const T> in, std::span<T> out) const {
        const std::size_t n = grid_.size();
        if (in.size() != n || out.size() != n)
            throw ValidationError("Laplacian operand does not match grid size");
        if (grid_.periodic()) {
            out[0] = (in[n - 1] - 2.0 * in[0] + in[1]) * inv_dx2_;
            for (std::size_t i = 1; i + 1 < n; ++i) out[i] = (in[i - 1] - 2.0 * in[i] + in[i + 1]) * inv_dx2_;
            out[n - 1] = (in[n - 2] - 2.0 * in[n - 1] + in[0]) * inv_dx2_;
        } else {
            out[0] = T{};
            out[n - 1] = T{};
            if (n == 3) {
                out[1] = -2.0 * in[1] * inv_dx2_;
                return;
            }
            out[1] = (-2.0 * in[1] + in[2]) * inv_dx2_;
            for (std::size_t i = 2; i + 2 < n; ++i) out[i] = (in[i - 1] - 2.0 * in[i] + in[i + 1]) * inv_dx2_;
            out[n - 2] = (in[n - 3] - 2.0 * in[n - 2]) * inv_dx2_;
        }
    }

    template <class T>
    std::vector<T> apply(std::span<const T> in) const {
        std::vector<T> out(in.size());
        apply(in, std::span<T>(out));
        return out;
    }

private:
    Grid1D grid_;
    double inv_dx2_;
};

inline ComplexField apply_laplacian(const LaplacianStencil& stencil, const ComplexField& f) {
    if (!(f.grid() == stencil.grid())) throw ValidationError("field grid does not match stencil grid");
    return ComplexField(f.grid(), stencil.apply<cplx>(f.values()));
}

inline ComplexField apply_laplacian(const ComplexField& f) {
    return apply_laplacian(LaplacianStencil(f.grid()), f);
}

// ---------------------------------------------------------------------------
// Quadrature

/// <u, v> = sum w_i conj(u_i) v_i with trapezoid weights.
inline cplx inner(const Grid1D& grid, std::span<const cplx> u, std::span<const cplx> v) {
    cplx s{};
    for (std::size_t i = 0; i < u.size(); ++i) s += grid.weight(i) * std::conj(u[i]) * v[i];
    return s;
}

inline double inner(const Grid1D& grid, std::span<const double> u, std::span<const double> v) {
    double s = 0.0;
    for (std::size_t i = 0; i < u.size(); ++i) s += grid.weight(i) * u[i] * v[i];
    return s;
}

inline cplx inner(const ComplexField& u, const ComplexField& v) {
    if (!(u.grid() == v.grid())) throw ValidationError("inner product of fields on different grids");
    return inner(u.grid(), u.values(), v.values());
}

inline double norm2(const Grid1D& grid, std::span<const cplx> u) {
    double s = 0.0;
    for (std::size_t i = 0; i < u.size(); ++i) s += grid.weight(i) * std::norm(u[i]);
    return s;
}

inline double norm(const Grid1D& grid, std::span<const cplx> u) { return std::sqrt(norm2(grid, u)); }
inline double norm(const ComplexField& f) { return norm(f.grid(), f.values()); }

/// Midpoint-rule variant, kept only to measure the quadrature sensitivity of
/// derived quantities.
inline cplx inner_midpoint(const Grid1D& grid, std::span<const cplx> u, std::span<const cplx> v) {
    const std::size_t n = u.size();
    if (grid.periodic()) return inner(grid, u, v);
    cplx s{};
    for (std::size_t i = 0; i + 1 < n; ++i)
        s += grid.dx() * std::conj(0.5 * (u[i] + u[i + 1])) * (0.5 * (v[i] + v[i + 1]));
    return s;
}

}  // namespace wavelab
