#pragma once

/// \file
/// \brief Post-processing of evolution output: stationary-basis populations,
/// packet moments, and run-to-run divergence.

#include <algorithm>
#include <cmath>
#include <optional>
#include <span>
#include <vector>

#include "wavelab/core.hpp"
#include "wavelab/discrete_ops.hpp"
#include "wavelab/evolution.hpp"
#include "wavelab/stationary.hpp"

namespace wavelab {

/// P_n(t) = |<phi_n, psi(t)>|^2.
struct PopulationSeries {
    std::vector<double> times;
    /// populations[j][n] at times[j].
    std::vector<std::vector<double>> populations;

    std::size_t n_states() const noexcept { return populations.empty() ? 0 : populations.front().size(); }

    std::vector<double> of_state(std::size_t n) const {
        std::vector<double> out;
        out.reserve(populations.size());
        for (const auto& row : populations) out.push_back(row.at(n));
        return out;
    }

    /// max over t of |P_n(t) - P_n(0)|.
    double max_deviation(std::size_t n) const {
        double worst = 0.0;
        for (const auto& row : populations) worst = std::max(worst, std::abs(row.at(n) - populations.front().at(n)));
        return worst;
    }
};

inline std::vector<double> populations_of(const ComplexField& psi, const SpectrumResult& basis) {
    if (basis.size() == 0) throw ValidationError("population basis is empty", "observables.basis");
    if (!(psi.grid() == basis.grid())) throw ValidationError("snapshot and basis grids differ", "observables.basis");
    std::vector<double> p;
    p.reserve(basis.size());
    for (const auto& phi : basis.eigenvectors) p.push_back(std::norm(inner(phi, psi)));
    return p;
}

inline PopulationSeries populations(std::span<const Snapshot> snapshots, const SpectrumResult& basis) {
    PopulationSeries s;
    for (const auto& snap : snapshots) {
        s.times.push_back(snap.t);
        s.populations.push_back(populations_of(snap.psi, basis));
    }
    return s;
}

struct PacketStats {
    std::vector<double> times;
    std::vector<double> centroid;
    std::vector<double> width;
    std::vector<double> norm;

    /// width(t_end) / width(0) - 1.
    double width_growth() const {
        if (width.empty()) return 0.0;
        return width.back() / width.front() - 1.0;
    }
};

struct Moments {
    double centroid = 0.0;
    double width = 0.0;
    double norm = 0.0;
};

inline Moments moments(const ComplexField& psi) {
    const Grid1D& g = psi.grid();
    double m0 = 0.0, m1 = 0.0;
    for (std::size_t i = 0; i < psi.size(); ++i) {
        const double w = g.weight(i) * std::norm(psi[i]);
        m0 += w;
        m1 += w * g.x(i);
    }
    if (!(m0 > 0.0)) return {};
    const double mean = m1 / m0;
    double var = 0.0;
    for (std::size_t i = 0; i < psi.size(); ++i) {
        const double d = g.x(i) - mean;
        var += g.weight(i) * std::norm(psi[i]) * d * d;
    }
    return {mean, std::sqrt(var / m0), std::sqrt(m0)};
}

inline PacketStats packet_stats(std::span<const Snapshot> snapshots) {
    PacketStats s;
    for (const auto& snap : snapshots) {
        const Moments m = moments(snap.psi);
        s.times.push_back(snap.t);
        s.centroid.push_back(m.centroid);
        s.width.push_back(m.width);
        s.norm.push_back(m.norm);
    }
    return s;
}

struct DivergenceReport {
    std::size_t matched_times = 0;
    double max_l2_distance = 0.0;
    double time_of_max_l2 = 0.0;
    double max_centroid_distance = 0.0;
    /// |growth_a - growth_b| at the final matched time.
    double width_growth_divergence = 0.0;
    /// max over t and n of |P_n^a - P_n^b|; present when a basis was given.
    std::optional<double> max_population_distance;
};

/// Symmetric in its two runs: swapping them gives bit-identical reports.
inline DivergenceReport compare_runs(std::span<const Snapshot> a, std::span<const Snapshot> b,
                                     const SpectrumResult* basis = nullptr) {
    if (a.size() != b.size())
        throw ValidationError("runs have different snapshot counts", "compare.times");
    if (a.empty()) throw ValidationError("runs have no snapshots", "compare.times");
    DivergenceReport r;
    r.matched_times = a.size();
    if (basis) r.max_population_distance = 0.0;
    const Moments a0 = moments(a.front().psi), b0 = moments(b.front().psi);
    for (std::size_t j = 0; j < a.size(); ++j) {
        const auto& sa = a[j];
        const auto& sb = b[j];
        if (std::abs(sa.t - sb.t) > 1e-12 * std::max(1.0, std::abs(sa.t)))
            throw ValidationError("snapshot times differ between runs", "compare.times");
        if (!(sa.psi.grid() == sb.psi.grid())) throw ValidationError("runs use different grids", "compare.grid");
        double d2 = 0.0;
        const Grid1D& g = sa.psi.grid();
        for (std::size_t i = 0; i < sa.psi.size(); ++i) d2 += g.weight(i) * std::norm(sa.psi[i] - sb.psi[i]);
        const double d = std::sqrt(d2);
        if (d > r.max_l2_distance) {
            r.max_l2_distance = d;
            r.time_of_max_l2 = sa.t;
        }
        const Moments ma = moments(sa.psi), mb = moments(sb.psi);
        r.max_centroid_distance = std::max(r.max_centroid_distance, std::abs(ma.centroid - mb.centroid));
        if (j + 1 == a.size()) {
            const double ga = a0.width > 0.0 ? ma.width / a0.width - 1.0 : 0.0;
            const double gb = b0.width > 0.0 ? mb.width / b0.width - 1.0 : 0.0;
            r.width_growth_divergence = std::abs(ga - gb);
        }
        if (basis) {
            const auto pa = populations_of(sa.psi, *basis);
            const auto pb = populations_of(sb.psi, *basis);
            for (std::size_t n = 0; n < pa.size(); ++n)
                *r.max_population_distance = std::max(*r.max_population_distance, std::abs(pa[n] - pb[n]));
        }
    }
    return r;
}

}  // namespace wavelab
