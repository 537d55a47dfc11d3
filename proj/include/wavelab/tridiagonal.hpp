#pragma once

/// \file
/// \brief Banded linear algebra: a symmetric (optionally cyclic) tridiagonal
/// eigensolver built from Sturm-count bisection plus inverse iteration, and a
/// prefactored complex (optionally cyclic) tridiagonal linear solver.

#include <algorithm>
#include <cfloat>
#include <cmath>
#include <complex>
#include <random>
#include <span>
#include <vector>

#include "wavelab/core.hpp"

namespace wavelab::banded {

/// Real symmetric tridiagonal matrix. When cyclic, off[n-1] couples rows
/// n-1 and 0; otherwise off has n-1 entries.
struct SymmetricTridiagonal {
    std::vector<double> diag;
    std::vector<double> off;
    bool cyclic = false;

    std::size_t size() const noexcept { return diag.size(); }

    void multiply(std::span<const double> x, std::span<double> y) const {
        const std::size_t n = size();
        for (std::size_t i = 0; i < n; ++i) y[i] = diag[i] * x[i];
        for (std::size_t i = 0; i + 1 < n; ++i) {
            y[i] += off[i] * x[i + 1];
            y[i + 1] += off[i] * x[i];
        }
        if (cyclic) {
            y[n - 1] += off[n - 1] * x[0];
            y[0] += off[n - 1] * x[n - 1];
        }
    }

    /// Gershgorin enclosure of the spectrum.
    std::pair<double, double> gershgorin() const {
        const std::size_t n = size();
        double lo = INFINITY;
        double hi = -INFINITY;
        for (std::size_t i = 0; i < n; ++i) {
            double r = 0.0;
            if (i + 1 < n || cyclic) r += std::abs(off[i % off.size()]);
            if (i > 0) r += std::abs(off[i - 1]);
            else if (cyclic) r += std::abs(off[n - 1]);
            lo = std::min(lo, diag[i] - r);
            hi = std::max(hi, diag[i] + r);
        }
        return {lo, hi};
    }

    double norm_bound() const {
        auto [lo, hi] = gershgorin();
        return std::max(std::abs(lo), std::abs(hi));
    }
};

namespace detail {

inline double pivot_floor(const SymmetricTridiagonal& a) {
    double m = 1.0;
    for (double b : a.off) m = std::max(m, b * b);
    return DBL_MIN * m;
}

inline double guard(double q, double pivmin) {
    return std::abs(q) < pivmin ? -pivmin : q;
}

/// LDL^T factorisation of (A - sigma I) without pivoting. For cyclic
/// matrices L has an extra dense last row (the border).
struct BorderedLdl {
    std::vector<double> d;       // pivots
    std::vector<double> l;       // L(i+1, i)
    std::vector<double> border;  // L(n-1, i), cyclic only

    BorderedLdl(const SymmetricTridiagonal& a, double sigma, double pivmin) {
        const std::size_t n = a.size();
        d.assign(n, 0.0);
        l.assign(n, 0.0);
        if (!a.cyclic || n < 3) {
            double q = a.diag[0] - sigma;
            for (std::size_t i = 0; i + 1 < n; ++i) {
                d[i] = guard(q, pivmin);
                l[i] = a.off[i] / d[i];
                q = (a.diag[i + 1] - sigma) - l[i] * a.off[i];
            }
            d[n - 1] = guard(q, pivmin);
            return;
        }
        border.assign(n, 0.0);
        double cur = a.diag[0] - sigma;
        double w = a.off[n - 1];
        double last = a.diag[n - 1] - sigma;
        for (std::size_t i = 0; i + 2 < n; ++i) {
            d[i] = guard(cur, pivmin);
            l[i] = a.off[i] / d[i];
            border[i] = w / d[i];
            const double next = (a.diag[i + 1] - sigma) - l[i] * a.off[i];
            const double wnext = (i + 2 == n - 1 ? a.off[n - 2] : 0.0) - l[i] * w;
            last -= border[i] * w;
            cur = next;
            w = wnext;
        }
        d[n - 2] = guard(cur, pivmin);
        border[n - 2] = w / d[n - 2];
        last -= border[n - 2] * w;
        d[n - 1] = guard(last, pivmin);
    }

    std::size_t negative_count() const {
        return static_cast<std::size_t>(std::count_if(d.begin(), d.end(), [](double v) { return v < 0.0; }));
    }
};

inline double dot(std::span<const double> a, std::span<const double> b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

inline void normalize(std::span<double> v) {
    const double nrm = std::sqrt(dot(v, v));
    for (double& x : v) x /= nrm;
}

}  // namespace detail

/// Number of eigenvalues of A strictly below sigma (Sylvester inertia).
inline std::size_t count_below(const SymmetricTridiagonal& a, double sigma) {
    return detail::BorderedLdl(a, sigma, detail::pivot_floor(a)).negative_count();
}

/// The `count` smallest eigenvalues, ascending, by bisection on the
/// inertia count. Each is resolved to machine precision.
inline std::vector<double> lowest_eigenvalues(const SymmetricTridiagonal& a, std::size_t count) {
    auto [glo, ghi] = a.gershgorin();
    const double pad = 1e-12 * std::max(1.0, std::max(std::abs(glo), std::abs(ghi)));
    glo -= pad;
    ghi += pad;
    std::vector<double> out;
    out.reserve(count);
    double lo_hint = glo;
    for (std::size_t j = 0; j < count; ++j) {
        double lo = lo_hint;
        double hi = ghi;
        for (int it = 0; it < 400; ++it) {
            const double mid = 0.5 * (lo + hi);
            if (mid <= lo || mid >= hi) break;
            if (count_below(a, mid) > j) hi = mid;
            else lo = mid;
        }
        out.push_back(0.5 * (lo + hi));
        lo_hint = lo;
    }
    return out;
}

namespace detail {

/// Real banded LU with partial pivoting (the unblocked dgbtrf scheme).
/// Stores kl sub-diagonals and kl + ku super-diagonals to absorb fill.
class BandedLu {
public:
    BandedLu(std::size_t n, std::size_t kl, std::size_t ku)
        : n_(n), kl_(kl), ku_(ku), width_(2 * kl + ku + 1), band_(n * width_, 0.0), mult_(n * kl, 0.0), piv_(n) {}

    double& at(std::size_t i, std::size_t j) { return band_[i * width_ + (j + kl_ - i)]; }
    double at(std::size_t i, std::size_t j) const { return band_[i * width_ + (j + kl_ - i)]; }

    /// Factorise in place. Exactly zero pivots are replaced by `tiny`.
    void factor(double tiny) {
        for (std::size_t c = 0; c < n_; ++c) {
            const std::size_t rmax = std::min(n_ - 1, c + kl_);
            const std::size_t jmax = std::min(n_ - 1, c + kl_ + ku_);
            std::size_t p = c;
            for (std::size_t r = c + 1; r <= rmax; ++r)
                if (std::abs(at(r, c)) > std::abs(at(p, c))) p = r;
            piv_[c] = p;
            if (p != c)
                for (std::size_t j = c; j <= jmax; ++j) std::swap(at(c, j), at(p, j));
            if (std::abs(at(c, c)) < tiny) at(c, c) = tiny;
            for (std::size_t r = c + 1; r <= rmax; ++r) {
                const double m = at(r, c) / at(c, c);
                mult_[c * kl_ + (r - c - 1)] = m;
                at(r, c) = 0.0;
                if (m == 0.0) continue;
                for (std::size_t j = c + 1; j <= jmax; ++j) at(r, j) -= m * at(c, j);
            }
        }
    }

    void solve(std::span<double> b) const {
        for (std::size_t c = 0; c < n_; ++c) {
            std::swap(b[c], b[piv_[c]]);
            const std::size_t rmax = std::min(n_ - 1, c + kl_);
            for (std::size_t r = c + 1; r <= rmax; ++r) b[r] -= mult_[c * kl_ + (r - c - 1)] * b[c];
        }
        for (std::size_t c = n_; c-- > 0;) {
            const std::size_t jmax = std::min(n_ - 1, c + kl_ + ku_);
            double s = b[c];
            for (std::size_t j = c + 1; j <= jmax; ++j) s -= at(c, j) * b[j];
            b[c] = s / at(c, c);
        }
    }

private:
    std::size_t n_, kl_, ku_, width_;
    std::vector<double> band_;
    std::vector<double> mult_;
    std::vector<std::size_t> piv_;
};

/// Shifted solver for (A - sigma I). Cyclic matrices are reordered
/// 0, n-1, 1, n-2, ... which turns them into a bandwidth-2 matrix.
class ShiftedSolver {
public:
    ShiftedSolver(const SymmetricTridiagonal& a, double sigma, double tiny)
        : perm_(a.size()), work_(a.size()),
          lu_(a.size(), a.cyclic ? 2 : 1, a.cyclic ? 2 : 1) {
        const std::size_t n = a.size();
        if (a.cyclic) {
            for (std::size_t k = 0; k < n; ++k) perm_[k] = (2 * k < n) ? 2 * k : 2 * (n - 1 - k) + 1;
        } else {
            for (std::size_t k = 0; k < n; ++k) perm_[k] = k;
        }
        auto put = [&](std::size_t i, std::size_t j, double v) { lu_.at(perm_[i], perm_[j]) += v; };
        for (std::size_t i = 0; i < n; ++i) put(i, i, a.diag[i] - sigma);
        for (std::size_t i = 0; i + 1 < n; ++i) {
            put(i, i + 1, a.off[i]);
            put(i + 1, i, a.off[i]);
        }
        if (a.cyclic) {
            put(0, n - 1, a.off[n - 1]);
            put(n - 1, 0, a.off[n - 1]);
        }
        lu_.factor(tiny);
    }

    void solve(std::span<double> x) const {
        for (std::size_t k = 0; k < x.size(); ++k) work_[perm_[k]] = x[k];
        lu_.solve(work_);
        for (std::size_t k = 0; k < x.size(); ++k) x[k] = work_[perm_[k]];
    }

private:
    std::vector<std::size_t> perm_;
    mutable std::vector<double> work_;
    BandedLu lu_;
};

/// Cyclic Jacobi on a small dense symmetric matrix; returns eigenvalues and
/// writes eigenvectors as columns of v.
inline std::vector<double> small_symmetric_eigen(std::vector<std::vector<double>> m,
                                                 std::vector<std::vector<double>>& v) {
    const std::size_t n = m.size();
    v.assign(n, std::vector<double>(n, 0.0));
    for (std::size_t i = 0; i < n; ++i) v[i][i] = 1.0;
    for (int sweep = 0; sweep < 64; ++sweep) {
        double off = 0.0, diag = 0.0;
        for (std::size_t p = 0; p < n; ++p) {
            diag += m[p][p] * m[p][p];
            for (std::size_t q = p + 1; q < n; ++q) off += m[p][q] * m[p][q];
        }
        if (off <= 1e-32 * diag || off == 0.0) break;
        for (std::size_t p = 0; p < n; ++p) {
            for (std::size_t q = p + 1; q < n; ++q) {
                if (m[p][q] == 0.0) continue;
                const double theta = (m[q][q] - m[p][p]) / (2.0 * m[p][q]);
                const double t = (theta >= 0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
                const double c = 1.0 / std::sqrt(t * t + 1.0);
                const double s = t * c;
                for (std::size_t k = 0; k < n; ++k) {
                    const double a = m[k][p], b = m[k][q];
                    m[k][p] = c * a - s * b;
                    m[k][q] = s * a + c * b;
                }
                for (std::size_t k = 0; k < n; ++k) {
                    const double a = m[p][k], b = m[q][k];
                    m[p][k] = c * a - s * b;
                    m[q][k] = s * a + c * b;
                }
                for (std::size_t k = 0; k < n; ++k) {
                    const double a = v[k][p], b = v[k][q];
                    v[k][p] = c * a - s * b;
                    v[k][q] = s * a + c * b;
                }
            }
        }
    }
    std::vector<double> ev(n);
    for (std::size_t i = 0; i < n; ++i) ev[i] = m[i][i];
    return ev;
}

}  // namespace detail

struct EigenPairs {
    std::vector<double> values;
    std::vector<std::vector<double>> vectors;  // Euclidean unit norm
};

/// Lowest `count` eigenpairs.
///
/// Bisection brackets each eigenvalue; inverse iteration (banded LU with
/// partial pivoting) produces the vectors, re-orthogonalised against earlier
/// vectors whose eigenvalues lie within 1e-3 |A|, the clustering rule of
/// LAPACK's stein. A final Rayleigh-Ritz pass over each cluster fixes the
/// eigenvalues to working accuracy. Start vectors come from a fixed-seed
/// generator, so results are reproducible.
inline EigenPairs lowest_eigenpairs(const SymmetricTridiagonal& a, std::size_t count) {
    const std::size_t n = a.size();
    if (count > n) throw ValidationError("requested more eigenpairs than the matrix dimension");
    EigenPairs out;
    std::vector<double> guesses = lowest_eigenvalues(a, count);
    const double anorm = std::max(a.norm_bound(), DBL_MIN);
    const double cluster = 1e-3 * anorm;
    const double tiny = DBL_EPSILON * anorm;
    std::mt19937_64 rng(0x5eed2a7eULL);
    std::uniform_real_distribution<double> uni(-1.0, 1.0);

    for (std::size_t j = 0; j < count; ++j) {
        const double lambda = guesses[j];
        detail::ShiftedSolver solver(a, lambda, tiny);
        std::vector<double> x(n);
        for (double& v : x) v = uni(rng);

        auto orthogonalize = [&] {
            for (int pass = 0; pass < 2; ++pass) {
                for (std::size_t k = 0; k < j; ++k) {
                    if (std::abs(guesses[k] - lambda) > cluster) continue;
                    const double c = detail::dot(x, out.vectors[k]);
                    for (std::size_t i = 0; i < n; ++i) x[i] -= c * out.vectors[k][i];
                }
            }
        };
        orthogonalize();
        detail::normalize(x);
        for (int it = 0; it < 3; ++it) {
            solver.solve(x);
            orthogonalize();
            detail::normalize(x);
        }
        out.vectors.push_back(std::move(x));
    }

    // Rayleigh-Ritz over runs of close eigenvalues.
    out.values.assign(count, 0.0);
    std::vector<double> ax(n);
    for (std::size_t i = 0; i < count;) {
        std::size_t j = i + 1;
        while (j < count && guesses[j] - guesses[j - 1] <= 1e-6 * anorm) ++j;
        const std::size_t k = j - i;
        std::vector<std::vector<double>> g(k, std::vector<double>(k, 0.0));
        std::vector<std::vector<double>> avs;
        for (std::size_t p = 0; p < k; ++p) {
            a.multiply(out.vectors[i + p], ax);
            avs.push_back(ax);
        }
        for (std::size_t p = 0; p < k; ++p)
            for (std::size_t q = 0; q < k; ++q) g[p][q] = detail::dot(out.vectors[i + p], avs[q]);
        for (std::size_t p = 0; p < k; ++p)
            for (std::size_t q = p + 1; q < k; ++q) g[p][q] = g[q][p] = 0.5 * (g[p][q] + g[q][p]);
        std::vector<std::vector<double>> rot;
        auto ritz = detail::small_symmetric_eigen(g, rot);
        std::vector<std::size_t> order(k);
        for (std::size_t p = 0; p < k; ++p) order[p] = p;
        std::sort(order.begin(), order.end(), [&](std::size_t l, std::size_t r) { return ritz[l] < ritz[r]; });
        std::vector<std::vector<double>> rotated(k, std::vector<double>(n, 0.0));
        for (std::size_t p = 0; p < k; ++p) {
            for (std::size_t q = 0; q < k; ++q) {
                const double w = rot[q][order[p]];
                for (std::size_t t = 0; t < n; ++t) rotated[p][t] += w * out.vectors[i + q][t];
            }
            detail::normalize(rotated[p]);
            out.values[i + p] = ritz[order[p]];
        }
        for (std::size_t p = 0; p < k; ++p) out.vectors[i + p] = std::move(rotated[p]);
        i = j;
    }

    for (std::size_t j = 0; j < count; ++j) {
        auto& x = out.vectors[j];
        a.multiply(x, ax);
        double r2 = 0.0;
        for (std::size_t i = 0; i < n; ++i) r2 += (ax[i] - out.values[j] * x[i]) * (ax[i] - out.values[j] * x[i]);
        if (!(std::sqrt(r2) <= 1e-10 * anorm))
            throw NonConvergence("inverse iteration did not converge for eigenpair " + std::to_string(j), j);
        // Sign convention: first significant component positive.
        for (double v : x) {
            if (std::abs(v) > 1e-8) {
                if (v < 0.0)
                    for (double& y : x) y = -y;
                break;
            }
        }
    }
    return out;
}

// ---------------------------------------------------------------------------

/// Prefactored solver for a complex tridiagonal system with constant
/// off-diagonal `off` and diagonal `diag`; cyclic systems use the
/// Sherman-Morrison correction on top of the Thomas sweep.
class ComplexTridiagonalSolver {
public:
    ComplexTridiagonalSolver(std::vector<cplx> diag, cplx off, bool cyclic)
        : n_(diag.size()), off_(off), cyclic_(cyclic && diag.size() >= 3) {
        if (n_ == 0) throw ValidationError("empty tridiagonal system");
        if (cyclic_) {
            gamma_ = -diag[0];
            diag[0] -= gamma_;
            diag[n_ - 1] -= off_ * off_ / gamma_;
        }
        factor(diag);
        if (cyclic_) {
            z_.assign(n_, cplx{});
            z_[0] = gamma_;
            z_[n_ - 1] = off_;
            sweep(z_);
            denom_ = 1.0 + z_[0] + off_ / gamma_ * z_[n_ - 1];
            if (std::abs(denom_) < 1e-300) throw SingularSystem("cyclic tridiagonal correction is singular");
        }
    }

    std::size_t size() const noexcept { return n_; }

    void solve(std::span<cplx> x) const {
        sweep(x);
        if (cyclic_) {
            const cplx f = (x[0] + off_ / gamma_ * x[n_ - 1]) / denom_;
            for (std::size_t i = 0; i < n_; ++i) x[i] -= f * z_[i];
        }
    }

private:
    void factor(const std::vector<cplx>& diag) {
        cprime_.assign(n_, cplx{});
        inv_denom_.assign(n_, cplx{});
        cplx den = diag[0];
        for (std::size_t i = 0; i < n_; ++i) {
            if (i > 0) den = diag[i] - off_ * cprime_[i - 1];
            if (std::abs(den) < 1e-300)
                throw SingularSystem("zero pivot in tridiagonal solve at row " + std::to_string(i));
            inv_denom_[i] = 1.0 / den;
            cprime_[i] = off_ * inv_denom_[i];
        }
    }

    void sweep(std::span<cplx> x) const {
        x[0] *= inv_denom_[0];
        for (std::size_t i = 1; i < n_; ++i) x[i] = (x[i] - off_ * x[i - 1]) * inv_denom_[i];
        for (std::size_t i = n_ - 1; i-- > 0;) x[i] -= cprime_[i] * x[i + 1];
    }

    std::size_t n_;
    cplx off_;
    bool cyclic_;
    cplx gamma_{};
    cplx denom_{1.0};
    std::vector<cplx> cprime_;
    std::vector<cplx> inv_denom_;
    std::vector<cplx> z_;
};

}  // namespace wavelab::banded
