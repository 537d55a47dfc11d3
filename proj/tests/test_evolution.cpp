#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "wavelab/analytic.hpp"
#include "wavelab/evolution.hpp"
#include "wavelab/stationary.hpp"

using namespace wavelab;

namespace {

const PhysicalConstants natural{};
constexpr double pi = std::numbers::pi;

ComplexField gaussian(const Grid1D& g, double x0, double sigma, double k0) {
    return ComplexField::from_function(g, [=](double x) {
        const double u = (x - x0) / sigma;
        return std::exp(-0.25 * u * u) * std::exp(cplx{0.0, k0 * x});
    });
}

double distance(const ComplexField& a, const ComplexField& b) {
    std::vector<cplx> d(a.size());
    for (std::size_t i = 0; i < d.size(); ++i) d[i] = a[i] - b[i];
    return norm(a.grid(), d);
}

ComplexField rotated(const ComplexField& f, double phase) {
    std::vector<cplx> v(f.size());
    for (std::size_t i = 0; i < v.size(); ++i) v[i] = f[i] * std::exp(cplx{0.0, -phase});
    return ComplexField(f.grid(), std::move(v));
}

// Width of |psi|^2 as an independent check of the driver output.
double width(const ComplexField& f) {
    double m0 = 0.0, m1 = 0.0, m2 = 0.0;
    for (std::size_t i = 0; i < f.size(); ++i) {
        const double w = f.grid().weight(i) * std::norm(f[i]);
        const double x = f.grid().x(i);
        m0 += w;
        m1 += w * x;
        m2 += w * x * x;
    }
    m1 /= m0;
    return std::sqrt(m2 / m0 - m1 * m1);
}

double order(double e1, double e2, double e3) {
    return 0.5 * (std::log2(e1 / e2) + std::log2(e2 / e3));
}

}  // namespace

// --- Crank-Nicolson -------------------------------------------------------

TEST(CrankNicolson, StationaryStateReturnsAfterOnePeriod) {
    auto grid = make_grid(0.0, pi, 401, Boundary::Dirichlet);
    auto stat = solve_schrodinger_stationary(EquationSpec::schrodinger_stationary(natural, potential::InfiniteWell{}),
                                             grid, 1);
    auto spec = EquationSpec::schrodinger_td(natural, potential::InfiniteWell{});
    const double period = 2.0 * pi / stat.eigenvalues[0];
    StepperConfig cfg{period / 1000.0, period, 0.9, 1000};
    auto snaps = evolve(spec, InitialData::at_rest(stat.eigenvectors[0]), cfg);
    ASSERT_EQ(snaps.size(), 2u);
    const double fidelity = std::norm(inner(stat.eigenvectors[0], snaps.back().psi));
    EXPECT_GT(fidelity, 1.0 - 1e-6);
    EXPECT_NEAR(snaps.back().t, period, 1e-12);
}

TEST(CrankNicolson, ZeroFieldStaysZero) {
    auto grid = make_grid(-5.0, 5.0, 101, Boundary::Periodic);
    auto spec = EquationSpec::schrodinger_td(natural, potential::Harmonic{1.0});
    EvolutionState s{ComplexField(grid), std::nullopt, 0.0, 0};
    auto next = step_schrodinger_cn(spec, s, 0.01);
    for (cplx v : next.psi.values()) EXPECT_EQ(v, cplx{});
    EXPECT_EQ(next.step_index, 1u);
}

TEST(CrankNicolson, NormConservedOverTenThousandSteps) {
    for (Boundary b : {Boundary::Dirichlet, Boundary::Periodic}) {
        auto grid = make_grid(-10.0, 10.0, 256, b);
        auto spec = EquationSpec::schrodinger_td(natural, potential::Barrier{2.0, 1.0, 2.0});
        auto psi0 = gaussian(grid, -3.0, 1.0, 2.0);
        StepperConfig cfg{0.001, 10.0, 0.9, 10000};
        auto snaps = evolve(spec, InitialData::at_rest(psi0), cfg);
        ASSERT_EQ(snaps.back().step_index, 10000u);
        EXPECT_LT(std::abs(snaps.back().norm / snaps.front().norm - 1.0), 1e-10);
        EXPECT_LT(std::abs(snaps.back().energy / snaps.front().energy - 1.0), 1e-9);
    }
}

TEST(CrankNicolson, SecondOrderInTime) {
    auto grid = make_grid(0.0, pi, 201, Boundary::Dirichlet);
    auto stat = solve_schrodinger_stationary(EquationSpec::schrodinger_stationary(natural, potential::InfiniteWell{}),
                                             grid, 3);
    auto spec = EquationSpec::schrodinger_td(natural, potential::InfiniteWell{});
    const double t_end = 1.0;
    auto error = [&](double dt) {
        auto snaps = evolve(spec, InitialData::at_rest(stat.eigenvectors[2]), {dt, t_end, 0.9, 1u << 30});
        return distance(snaps.back().psi, rotated(stat.eigenvectors[2], stat.eigenvalues[2] * t_end));
    };
    const double p = order(error(0.02), error(0.01), error(0.005));
    EXPECT_NEAR(p, 2.0, 0.1);
}

TEST(CrankNicolson, FreeGaussianSpreading) {
    auto grid = make_grid(-30.0, 30.0, 3001, Boundary::Dirichlet);
    auto spec = EquationSpec::schrodinger_td(natural, potential::Free{});
    auto snaps = evolve(spec, InitialData::at_rest(gaussian(grid, 0.0, 1.0, 0.0)), {0.002, 2.0, 0.9, 1000});
    // sigma(t) = sigma0 sqrt(1 + (hbar t / (2 m sigma0^2))^2).
    EXPECT_NEAR(width(snaps.front().psi), 1.0, 1e-6);
    EXPECT_NEAR(width(snaps.back().psi) / std::sqrt(2.0), 1.0, 0.01);
}

TEST(CrankNicolson, ResidualOfOutputIsTruncationSized) {
    auto grid = make_grid(-10.0, 10.0, 201, Boundary::Periodic);
    auto spec = EquationSpec::schrodinger_td(natural, potential::Harmonic{1.0});
    auto run = [&](double dt) {
        auto snaps = evolve(spec, InitialData::at_rest(gaussian(grid, 1.0, 1.0, 0.0)), {dt, 2.0 * dt, 0.9, 1});
        SampledSeries s({0.0, dt, 2.0 * dt}, {snaps[0].psi, snaps[1].psi, snaps[2].psi});
        return residual(spec, s, std::span<const double>(s.interior_times()));
    };
    const double r1 = run(0.01), r2 = run(0.005);
    EXPECT_LT(r1, 1e-2);
    EXPECT_NEAR(std::log2(r1 / r2), 2.0, 0.2);
}

// --- second-order families ------------------------------------------------

TEST(SecondOrder, RelNewTdStationaryStateOrderTwo) {
    auto grid = make_grid(0.0, 4.0, 201, Boundary::Dirichlet);
    auto rel = solve_relativistic_stationary(EquationSpec::rel_stationary(natural), grid, 2);
    const double e = rel.energies[1];
    ASSERT_GT(e, 1.0);
    auto spec = EquationSpec::rel_new_td(natural, e);
    const double omega = separable_frequency(spec, FrequencyMode::Rederived);
    const double t_end = 2.0;
    auto error = [&](double dt) {
        auto snaps = evolve(spec, InitialData::stationary(rel.eigenvectors[1], omega), {dt, t_end, 0.9, 1u << 30});
        return distance(snaps.back().psi, rotated(rel.eigenvectors[1], omega * t_end));
    };
    const double e1 = error(0.01), e2 = error(0.005), e3 = error(0.0025);
    EXPECT_NEAR(order(e1, e2, e3), 2.0, 0.1);
    EXPECT_LT(e3, 1e-4);
}

TEST(SecondOrder, KleinGordonRestModeRotatesAtRestFrequency) {
    PhysicalConstants k(1.0, 2.0, 0.5, 1.0);
    auto grid = make_grid(0.0, 1.0, 50, Boundary::Periodic);
    auto spec = EquationSpec::klein_gordon(k);
    const double omega = k.rest_energy() / k.hbar();
    ComplexField uniform(grid, std::vector<cplx>(grid.size(), cplx{1.0, 0.0}));
    const double dt = 1e-3;
    auto snaps = evolve(spec, InitialData::stationary(uniform, omega), {dt, 1.0, 0.9, 1000});
    const auto& psi = snaps.back().psi;
    // Leapfrog phase error per step: omega_num = (2/dt) asin(omega dt / 2).
    const double omega_num = 2.0 / dt * std::asin(omega * dt / 2.0);
    for (cplx v : psi.values()) EXPECT_NEAR(std::abs(v - psi[0]), 0.0, 1e-12);
    EXPECT_NEAR(std::arg(psi[0]), std::remainder(-omega * 1.0, 2 * pi), 1e-5);
    EXPECT_NEAR(std::abs(psi[0]), 1.0, 1e-5);
    EXPECT_NEAR(omega_num, omega, 1e-5);
}

TEST(SecondOrder, ConvergesInSpaceAndTimeToContinuumPlaneWave) {
    auto spec = EquationSpec::klein_gordon(natural);
    const double k = 2.0, omega = std::sqrt(k * k + 1.0), t_end = 1.0;
    auto error = [&](std::size_t n) {
        auto grid = make_grid(0.0, 2.0 * pi, n, Boundary::Periodic);
        auto exact = [&](double t) {
            return ComplexField::from_function(grid, [&](double x) { return std::exp(cplx{0.0, k * x - omega * t}); });
        };
        auto init = InitialData::stationary(exact(0.0), omega);
        auto snaps = evolve(spec, init, {0.25 * grid.dx(), t_end, 0.9, 1u << 30});
        return distance(snaps.back().psi, exact(snaps.back().t));
    };
    EXPECT_NEAR(order(error(64), error(128), error(256)), 2.0, 0.1);
}

TEST(SecondOrder, EnergyConservedAndReversible) {
    auto grid = make_grid(-20.0, 20.0, 801, Boundary::Dirichlet);
    std::vector<EquationSpec> specs{
        EquationSpec::klein_gordon(natural),
        EquationSpec::new_td(natural, potential::Step{0.5, 5.0}, 2.0),
        EquationSpec::rel_new_td(natural, 2.0),
        EquationSpec::em_time_dep(natural, EmPotentials::uniform({0.2, 0.0, 0.0}, 0.1), {1.0, 0.0, 0.0}, 2.0),
    };
    for (const auto& spec : specs) {
        SecondOrderStepper probe(spec, grid);
        const double dt = probe.max_stable_dt(0.9);
        const std::size_t n = 2000;
        StepperConfig cfg{dt, dt * n, 0.9, 100};
        auto psi0 = gaussian(grid, -5.0, 1.5, 1.5);
        auto init = spec.family() == Family::NewTD
                        ? InitialData::at_rest(psi0)
                        : InitialData::with_velocity(psi0, positive_frequency_velocity(spec, psi0));
        auto snaps = evolve(spec, init, cfg);
        ASSERT_EQ(snaps.back().step_index, n);
        double drift = 0.0;
        for (const auto& s : snaps) drift = std::max(drift, std::abs(s.energy / snaps.front().energy - 1.0));
        EXPECT_LT(drift, 1e-10) << to_string(spec.family());

        std::vector<cplx> back_v(snaps.back().psi_dot->data());
        for (auto& v : back_v) v = -v;
        auto rev = evolve(spec, InitialData::with_velocity(snaps.back().psi, ComplexField(grid, back_v)), cfg);
        EXPECT_LT(distance(rev.back().psi, psi0) / norm(psi0), 1e-8) << to_string(spec.family());
    }
}

TEST(SecondOrder, OutputSatisfiesDiscreteResidual) {
    auto grid = make_grid(0.0, 10.0, 200, Boundary::Periodic);
    auto spec = EquationSpec::klein_gordon(natural);
    auto psi0 = gaussian(grid, 5.0, 1.0, 1.0);
    const double dt = 0.02;
    auto snaps = evolve(spec, InitialData::at_rest(psi0), {dt, 10 * dt, 0.9, 1});
    std::vector<double> t;
    std::vector<ComplexField> f;
    for (const auto& s : snaps) {
        t.push_back(s.t);
        f.push_back(s.psi);
    }
    SampledSeries series(t, f);
    EXPECT_LT(residual(spec, series, std::span<const double>(series.interior_times())), 1e-9);
}

TEST(SecondOrder, CflViolationRejected) {
    auto grid = make_grid(0.0, 1.0, 101, Boundary::Periodic);
    auto spec = EquationSpec::klein_gordon(natural);
    SecondOrderStepper s(spec, grid);
    // mass correction: dx / sqrt(1 + dx^2/4)
    const double dx = grid.dx();
    EXPECT_NEAR(s.max_stable_dt(), dx / std::sqrt(1.0 + dx * dx / 4.0), 1e-15);
    ComplexField psi0(grid);
    EXPECT_THROW(evolve(spec, InitialData::at_rest(psi0), {0.95 * dx, 1.0, 0.9, 1}), CflViolation);
    EXPECT_NO_THROW(evolve(spec, InitialData::at_rest(psi0), {0.89 * dx, 0.1, 0.9, 1}));
    EvolutionState st{psi0, psi0, 0.0, 0};
    EXPECT_THROW(step_second_order(spec, st, 0.02), CflViolation);
}

TEST(SecondOrder, NewTdWaveSpeed) {
    auto grid = make_grid(0.0, 10.0, 101, Boundary::Dirichlet);
    // v = E / sqrt(2 m (E - V)); the slowest kappa is at V = 0.
    SecondOrderStepper s(EquationSpec::new_td(natural, potential::Step{1.5, 5.0}, 2.0), grid);
    EXPECT_NEAR(s.max_wave_speed(), 2.0 / std::sqrt(2.0 * 0.5), 1e-12);
}

TEST(SecondOrder, EllipticRegionRejectedWithInterval) {
    auto grid = make_grid(0.0, 10.0, 101, Boundary::Dirichlet);
    auto spec = EquationSpec::new_td(natural, potential::Barrier{3.0, 4.0, 6.0}, 2.0);
    try {
        SecondOrderStepper s(spec, grid);
        FAIL() << "expected EllipticRegime";
    } catch (const EllipticRegime& e) {
        EXPECT_NE(std::string(e.what()).find("[4, 6]"), std::string::npos) << e.what();
    }
    SecondOrderStepper clamped(spec, grid, EllipticPolicy::Clamp);
    EXPECT_EQ(clamped.clamped_intervals(), "[4, 6]");
    EXPECT_NEAR(clamped.max_wave_speed(), 1e6, 1e-3);
    EXPECT_THROW(SecondOrderStepper(EquationSpec::new_td(natural, potential::Free{}, -1.0), grid), EllipticRegime);
}

TEST(SecondOrder, EmNeedsUniformFields) {
    auto grid = make_grid(0.0, 1.0, 3, Boundary::Periodic);
    auto em = EmPotentials::sampled({{}, {}, {}}, {0.0, 0.1, 0.2});
    EXPECT_THROW(SecondOrderStepper(EquationSpec::em_time_dep(natural, em, {1.0, 0, 0}, 3.0), grid),
                 ValidationError);
    EXPECT_THROW(SecondOrderStepper(EquationSpec::schrodinger_td(natural, potential::Free{}), grid),
                 ValidationError);
}

// --- driver ---------------------------------------------------------------

TEST(Evolve, ZeroDurationGivesInitialSnapshot) {
    auto grid = make_grid(0.0, 1.0, 11, Boundary::Periodic);
    auto psi0 = gaussian(grid, 0.5, 0.1, 0.0);
    for (auto spec : {EquationSpec::schrodinger_td(natural, potential::Free{}), EquationSpec::klein_gordon(natural)}) {
        auto snaps = evolve(spec, InitialData::at_rest(psi0), {0.01, 0.0, 0.9, 1});
        ASSERT_EQ(snaps.size(), 1u);
        EXPECT_EQ(snaps[0].psi.data(), psi0.data());
        EXPECT_EQ(snaps[0].t, 0.0);
    }
}

TEST(Evolve, StrideAndFinalSnapshot) {
    auto grid = make_grid(0.0, 1.0, 11, Boundary::Periodic);
    auto psi0 = gaussian(grid, 0.5, 0.1, 0.0);
    auto snaps = evolve(EquationSpec::klein_gordon(natural), InitialData::at_rest(psi0), {0.01, 0.105, 0.9, 4});
    std::vector<std::size_t> idx;
    for (const auto& s : snaps) idx.push_back(s.step_index);
    EXPECT_EQ(idx, (std::vector<std::size_t>{0, 4, 8, 11}));
    EXPECT_NEAR(snaps.back().t, 0.105, 1e-15);
}

TEST(Evolve, ConfigValidation) {
    auto grid = make_grid(0.0, 1.0, 11, Boundary::Periodic);
    ComplexField psi0(grid);
    auto spec = EquationSpec::schrodinger_td(natural, potential::Free{});
    EXPECT_THROW(evolve(spec, InitialData::at_rest(psi0), {0.0, 1.0, 0.9, 1}), ValidationError);
    EXPECT_THROW(evolve(spec, InitialData::at_rest(psi0), {0.1, 1.0, 1.5, 1}), ValidationError);
    EXPECT_THROW(evolve(spec, InitialData::at_rest(psi0), {0.1, 1.0, 0.9, 0}), ValidationError);
    EXPECT_THROW(InitialData::stationary(psi0, INFINITY), ValidationError);
}

TEST(PositiveFrequency, PlaneWaveGetsDiscreteFrequency) {
    auto grid = make_grid(0.0, 2.0 * pi, 64, Boundary::Periodic);
    auto spec = EquationSpec::klein_gordon(natural);
    auto psi = ComplexField::from_function(grid, [](double x) { return std::exp(cplx{0.0, -3.0 * x}); });
    auto v = positive_frequency_velocity(spec, psi);
    const double s = std::sin(3.0 * grid.dx() / 2.0);
    const double omega = std::sqrt(4.0 * s * s / (grid.dx() * grid.dx()) + 1.0);
    for (std::size_t i = 0; i < grid.size(); ++i) EXPECT_NEAR(std::abs(v[i] - cplx{0.0, -omega} * psi[i]), 0.0, 1e-12);
}
