#include "commands.hpp"

#include <chrono>
#include <ctime>
#include <exception>
#include <future>
#include <ostream>
#include <random>
#include <thread>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>
#include <yaml-cpp/yaml.h>

#include "output.hpp"

namespace wavelab::cli {

using nlohmann::json;

namespace {

const Grid1D& require_grid(const Scenario& s) {
    if (!s.grid) throw ValidationError("this command needs a grid section", "grid");
    return *s.grid;
}

const EquationSpec& require_equation(const Scenario& s) {
    if (!s.equation) throw ValidationError("this command needs an equation section", "equation");
    return *s.equation;
}

json header(const Scenario& s, const std::string& command) {
    return {{"scenario", s.name}, {"scenario_sha256", s.sha256}, {"command", command}};
}

std::string dump(const json& j) { return j.dump(2) + "\n"; }

/// Spectrum of the stationary operator that shares the family's spatial part.
SpectrumResult stationary_spectrum(const EquationSpec& spec, const Grid1D& grid, std::size_t n) {
    switch (spec.family()) {
        case Family::SchrodingerStationary:
        case Family::SchrodingerTD:
        case Family::NewTD:
            return solve_schrodinger_stationary(spec, grid, n);
        case Family::RelStationary:
        case Family::RelNewTD:
        case Family::KleinGordon:
            return solve_relativistic_stationary(spec, grid, n);
        default:
            throw ValidationError("no eigensolver for the EM-coupled families", "equation.family");
    }
}

ComplexField build_psi0(const Scenario& s, const Grid1D& grid, const EquationSpec& spec) {
    const Psi0Spec& p = *s.psi0;
    switch (p.kind) {
        case Psi0Spec::Kind::Gaussian:
            return ComplexField::from_function(grid, [&](double x) {
                const double u = (x - p.x0) / p.sigma;
                return p.amplitude * std::exp(-0.25 * u * u) * std::exp(cplx{0.0, p.k0 * x});
            });
        case Psi0Spec::Kind::PlaneWave:
            return ComplexField::from_function(grid,
                                               [&](double x) { return p.amplitude * std::exp(cplx{0.0, p.k0 * x}); });
        case Psi0Spec::Kind::Eigenstates: {
            std::size_t need = 0;
            for (const auto& [idx, c] : p.states) need = std::max(need, idx + 1);
            const auto basis = stationary_spectrum(spec, grid, need);
            std::vector<cplx> v(grid.size(), cplx{});
            for (const auto& [idx, c] : p.states)
                for (std::size_t i = 0; i < v.size(); ++i) v[i] += p.amplitude * c * basis.eigenvectors[idx][i];
            return ComplexField(grid, std::move(v));
        }
    }
    throw ValidationError("unsupported psi0", "initial.psi0");
}

InitialData build_initial(const Scenario& s, const Grid1D& grid, const EquationSpec& spec) {
    if (!s.psi0) throw ValidationError("this command needs initial data", "initial");
    ComplexField psi0 = build_psi0(s, grid, spec);
    switch (s.velocity.kind) {
        case VelocitySpec::Kind::Zero:
            return InitialData::at_rest(std::move(psi0));
        case VelocitySpec::Kind::Stationary: {
            const double omega = s.velocity.omega ? *s.velocity.omega : separable_frequency(spec, *s.velocity.mode);
            return InitialData::stationary(std::move(psi0), omega);
        }
        case VelocitySpec::Kind::PositiveFrequency: {
            auto v = positive_frequency_velocity(spec, psi0);
            return InitialData::with_velocity(std::move(psi0), std::move(v));
        }
    }
    throw ValidationError("unsupported psi_dot0", "initial.psi_dot0");
}

std::string snapshot_csv(const Scenario& s, const Snapshot& snap) {
    CsvTable t(s.name, s.sha256, {"x", "re", "im", "abs2"});
    const Grid1D& g = snap.psi.grid();
    for (std::size_t i = 0; i < g.size(); ++i) {
        const cplx v = snap.psi[i];
        t.row(std::vector<double>{g.x(i), v.real(), v.imag(), std::norm(v)});
    }
    return t.str();
}

struct EvolutionOutcome {
    std::vector<Snapshot> kept;
    json summary;
};

/// One evolution with snapshot formatting and staging on a writer thread fed
/// through a bounded queue, so stepping never waits on the filesystem.
EvolutionOutcome run_evolution(const Scenario& s, OutputSet& out, bool keep) {
    const Grid1D& grid = require_grid(s);
    const EquationSpec& spec = require_equation(s);
    if (!is_time_dependent(spec.family()))
        throw ValidationError("evolve needs a time-dependent family", "equation.family");
    if (!s.stepper) throw ValidationError("this command needs a stepper section", "stepper");
    const StepperConfig& cfg = *s.stepper;
    const InitialData init = build_initial(s, grid, spec);
    std::optional<SpectrumResult> basis;
    if (s.outputs.population_states > 0) basis = stationary_spectrum(spec, grid, s.outputs.population_states);

    CsvTable diag(s.name, s.sha256, {"step", "t", "norm", "energy"});
    std::vector<std::string> pop_cols{"step", "t"};
    for (std::size_t n = 0; n < s.outputs.population_states; ++n) pop_cols.push_back("P_" + std::to_string(n));
    CsvTable pops(s.name, s.sha256, pop_cols);
    CsvTable packet(s.name, s.sha256, {"step", "t", "centroid", "width", "norm"});

    EvolutionOutcome result;
    double norm0 = 0.0, energy0 = 0.0, norm_drift = 0.0, energy_drift = 0.0;
    std::vector<double> pop0, pop_dev(s.outputs.population_states, 0.0);
    Moments first{}, last{};
    double t_last = 0.0;
    std::size_t count = 0, last_step = 0;

    BoundedQueue<Snapshot> queue(8);
    std::exception_ptr writer_error;
    std::thread writer([&] {
        try {
            while (auto snap = queue.pop()) {
                const Snapshot& sn = *snap;
                if (count == 0) {
                    norm0 = sn.norm;
                    energy0 = sn.energy;
                }
                norm_drift = std::max(norm_drift, norm0 > 0.0 ? std::abs(sn.norm / norm0 - 1.0) : 0.0);
                energy_drift = std::max(energy_drift, energy0 != 0.0 ? std::abs(sn.energy / energy0 - 1.0)
                                                                     : std::abs(sn.energy));
                diag.row(std::vector<double>{static_cast<double>(sn.step_index), sn.t, sn.norm, sn.energy});
                if (basis) {
                    auto p = populations_of(sn.psi, *basis);
                    if (count == 0) pop0 = p;
                    for (std::size_t n = 0; n < p.size(); ++n) pop_dev[n] = std::max(pop_dev[n], std::abs(p[n] - pop0[n]));
                    std::vector<double> row{static_cast<double>(sn.step_index), sn.t};
                    row.insert(row.end(), p.begin(), p.end());
                    pops.row(row);
                }
                const Moments m = moments(sn.psi);
                if (count == 0) first = m;
                last = m;
                t_last = sn.t;
                last_step = sn.step_index;
                packet.row(std::vector<double>{static_cast<double>(sn.step_index), sn.t, m.centroid, m.width, m.norm});
                if (s.outputs.snapshots)
                    out.stage(s.name + "_" + std::to_string(sn.step_index) + ".csv", snapshot_csv(s, sn));
                ++count;
                if (keep) result.kept.push_back(std::move(*snap));
            }
        } catch (...) {
            writer_error = std::current_exception();
            queue.close();
        }
    });

    try {
        evolve(spec, init, cfg, [&](Snapshot&& sn) { queue.push(std::move(sn)); });
    } catch (...) {
        queue.close();
        writer.join();
        throw;
    }
    queue.close();
    writer.join();
    if (writer_error) std::rethrow_exception(writer_error);

    out.stage(s.name + "_diagnostics.csv", diag.str());
    if (basis) out.stage(s.name + "_populations.csv", pops.str());
    if (s.outputs.packet_stats) out.stage(s.name + "_packet.csv", packet.str());

    json j;
    j["family"] = to_string(spec.family());
    j["snapshots"] = count;
    j["final_step"] = last_step;
    j["final_t"] = t_last;
    j["dt"] = cfg.dt;
    j["max_norm_drift"] = norm_drift;
    j["max_energy_drift"] = energy_drift;
    j["initial_width"] = first.width;
    j["final_width"] = last.width;
    j["width_growth"] = first.width > 0.0 ? last.width / first.width - 1.0 : 0.0;
    j["centroid_speed"] = t_last > 0.0 ? (last.centroid - first.centroid) / t_last : 0.0;
    if (basis) j["max_population_deviation"] = pop_dev;
    result.summary = std::move(j);
    return result;
}

// --- subcommands ------------------------------------------------------------

void cmd_eigensolve(const Scenario& s, OutputSet& out, json& summary) {
    const Grid1D& grid = require_grid(s);
    const auto r = stationary_spectrum(require_equation(s), grid, s.n_states);
    CsvTable spectrum(s.name, s.sha256, {"index", "eigenvalue", "energy"});
    for (std::size_t i = 0; i < r.size(); ++i)
        spectrum.row(std::vector<double>{static_cast<double>(i), r.eigenvalues[i], r.energies[i]});
    std::vector<std::string> cols{"x"};
    for (std::size_t i = 0; i < r.size(); ++i) cols.push_back("phi_" + std::to_string(i));
    CsvTable vectors(s.name, s.sha256, cols);
    for (std::size_t k = 0; k < grid.size(); ++k) {
        std::vector<double> row{grid.x(k)};
        for (const auto& v : r.eigenvectors) row.push_back(v[k].real());
        vectors.row(row);
    }
    out.stage(s.name + "_spectrum.csv", spectrum.str());
    out.stage(s.name + "_eigenvectors.csv", vectors.str());
    summary["eigenvalues"] = r.eigenvalues;
    summary["energies"] = r.energies;
    json levels = json::array();
    for (const auto& l : r.levels) levels.push_back({{"value", l.value}, {"multiplicity", l.multiplicity}});
    summary["levels"] = levels;
}

void cmd_evolve(const Scenario& s, OutputSet& out, json& summary) {
    summary.update(run_evolution(s, out, false).summary);
}

void cmd_dispersion(const Scenario& s, const RunOptions& opt, OutputSet& out, json& summary) {
    const EquationSpec& spec = require_equation(s);
    std::vector<double> ks = s.dispersion.k;
    std::mt19937_64 rng(opt.seed);
    std::uniform_real_distribution<double> dist(-s.dispersion.k_max, s.dispersion.k_max);
    for (std::size_t i = 0; i < s.dispersion.random_k; ++i) ks.push_back(dist(rng));
    if (ks.empty()) throw ValidationError("give dispersion.k or dispersion.random_k", "dispersion");
    const Grid1D grid = s.grid ? *s.grid : make_grid(0.0, 1.0, 16, Boundary::Periodic);
    CsvTable t(s.name, s.sha256, {"k", "omega", "phase_velocity", "group_velocity", "residual"});
    double worst = 0.0;
    for (double k : ks) {
        const auto d = dispersion(spec, k);
        const double r = residual(spec, PlaneWaveCandidate(plane_wave(d), grid), {0.0, 1.0});
        worst = std::max(worst, r);
        t.row(std::vector<double>{d.k, d.omega, d.phase_velocity, d.group_velocity, r});
    }
    out.stage(s.name + "_dispersion.csv", t.str());
    summary["family"] = to_string(spec.family());
    summary["n_k"] = ks.size();
    summary["seed"] = opt.seed;
    summary["max_residual"] = worst;
}

const char* mode_name(FrequencyMode m) { return m == FrequencyMode::Rederived ? "rederived" : "paper_literal"; }

struct FrequencyRow {
    std::string mode;
    double energy, omega, residual;
};

/// Stationary state of the grid/potential under the family's stationary
/// operator, launched as a separable solution at each requested frequency.
std::vector<FrequencyRow> frequency_rows(const Scenario& s, const EquationSpec& base, const Grid1D& grid) {
    const auto stat = stationary_spectrum(base, grid, s.residual.state_index + 1);
    const double e = stat.energies[s.residual.state_index];
    const auto& phi = stat.eigenvectors[s.residual.state_index];
    std::vector<FrequencyRow> rows;
    auto add = [&](const EquationSpec& spec, const std::string& mode, double omega) {
        SeparableCandidate c(SeparableSolution::stationary(phi, omega));
        rows.push_back({mode, e, omega, residual(spec, c, std::span<const double>(s.residual.times))});
    };
    switch (base.family()) {
        case Family::NewTD:
        case Family::RelNewTD: {
            const auto spec = base.with_energy(e);
            for (auto m : s.residual.modes) add(spec, mode_name(m), separable_frequency(spec, m));
            break;
        }
        case Family::SchrodingerTD:
        case Family::KleinGordon:
            add(base, "standard", e / base.constants().hbar());
            break;
        default:
            throw ValidationError("residual audit needs new_td, rel_new_td, schrodinger_td or klein_gordon",
                                  "equation.family");
    }
    return rows;
}

void cmd_residual(const Scenario& s, OutputSet& out, json& summary) {
    const auto rows = frequency_rows(s, require_equation(s), require_grid(s));
    CsvTable t(s.name, s.sha256, {"mode", "energy", "omega", "residual"});
    json jr = json::array();
    for (const auto& r : rows) {
        t.row({r.mode, format_double(r.energy), format_double(r.omega), format_double(r.residual)});
        jr.push_back({{"mode", r.mode}, {"energy", r.energy}, {"omega", r.omega}, {"residual", r.residual}});
    }
    out.stage(s.name + "_residual.csv", t.str());
    summary["family"] = to_string(require_equation(s).family());
    summary["state_index"] = s.residual.state_index;
    summary["results"] = jr;
}

void cmd_calibrate(const Scenario& s, OutputSet& out, json& summary) {
    const CalibrateSpec c = s.calibrate ? *s.calibrate : CalibrateSpec{};
    const auto& k = s.constants;
    std::vector<CalibrationFamily> families;
    if (c.family) families.push_back(*c.family);
    else
        families = {CalibrationFamily::Helmholtz,    CalibrationFamily::OpticalWave,
                    CalibrationFamily::StationaryMatter, CalibrationFamily::TimeDependentMatter,
                    CalibrationFamily::EmStationary, CalibrationFamily::EmTimeDependent};

    CsvTable t(s.name, s.sha256,
               {"template", "computed", "computed_expression", "printed", "printed_expression", "match"});
    json reports = json::array();
    std::string md = "# Calibration audit: " + s.name + "\n\nscenario_sha256: " + s.sha256 +
                     "\n\n| template | computed | expression | printed | expression | match |\n"
                     "|---|---|---|---|---|---|\n";
    for (auto f : families) {
        CalibrationInput in;
        in.constants = k;
        in.momentum = c.momentum;
        in.vector_potential = c.a;
        in.phi = c.phi;
        in.potential = c.potential;
        PlaneWave w;
        const double p = c.momentum.norm();
        if (f == CalibrationFamily::Helmholtz || f == CalibrationFamily::OpticalWave) {
            w = PlaneWave{cplx{1.0, 0.0}, c.k, c.omega};
        } else if (f == CalibrationFamily::StationaryMatter || f == CalibrationFamily::TimeDependentMatter) {
            in.energy = c.potential + p * p / (2.0 * k.m0());
            w = PlaneWave::from_momentum_energy(p, in.energy, k.hbar());
        } else {
            const double e0 = k.rest_energy();
            in.energy = std::sqrt(k.c() * k.c() * p * p + e0 * e0) + k.e() * c.phi;
            w = PlaneWave::from_momentum_energy(p, in.energy, k.hbar());
        }
        const auto r = calibrate_constant(f, w, in);
        const std::string printed = r.printed ? format_double(*r.printed) : "";
        const std::string match = r.printed ? (r.match ? "match" : "mismatch") : "n/a";
        t.row({to_string(f), format_double(r.computed), r.computed_expression, printed, r.printed_expression, match});
        json jr{{"template", to_string(f)},
                {"trial_energy", in.energy},
                {"computed", r.computed},
                {"computed_expression", r.computed_expression},
                {"printed_expression", r.printed_expression},
                {"match", match}};
        jr["printed"] = r.printed ? json(*r.printed) : json(nullptr);
        reports.push_back(jr);
        md += "| " + std::string(to_string(f)) + " | " + format_double(r.computed) + " | " + r.computed_expression +
              " | " + (printed.empty() ? "-" : printed) + " | " +
              (r.printed_expression.empty() ? "-" : r.printed_expression) + " | " + match + " |\n";
    }
    out.stage(s.name + "_calibration.csv", t.str());
    summary["calibration"] = reports;

    // Separable-frequency audit on the scenario grid, when there is one.
    if (s.grid) {
        EquationSpec base = s.equation && s.equation->family() == Family::NewTD
                                ? *s.equation
                                : EquationSpec::new_td(k,
                                                       s.grid->periodic() ? Potential{potential::Free{}}
                                                                          : Potential{potential::InfiniteWell{}},
                                                       1.0);
        const auto rows = frequency_rows(s, base, *s.grid);
        CsvTable ft(s.name, s.sha256, {"mode", "energy", "omega", "residual"});
        json jf = json::array();
        md += "\n## Separable frequency (new_td)\n\n| mode | E | omega | residual |\n|---|---|---|---|\n";
        for (const auto& r : rows) {
            ft.row({r.mode, format_double(r.energy), format_double(r.omega), format_double(r.residual)});
            jf.push_back({{"mode", r.mode}, {"energy", r.energy}, {"omega", r.omega}, {"residual", r.residual}});
            md += "| " + r.mode + " | " + format_double(r.energy) + " | " + format_double(r.omega) + " | " +
                  format_double(r.residual) + " |\n";
        }
        out.stage(s.name + "_frequency_audit.csv", ft.str());
        summary["frequency_audit"] = jf;
    }
    out.stage(s.name + "_audit.md", md);
}

void cmd_kinematics(const Scenario& s, OutputSet& out, json& summary) {
    if (!s.kinematics) throw ValidationError("this command needs a kinematics section", "kinematics");
    const auto& kin = *s.kinematics;
    const ParticleContext ctx{s.constants, kin.a, kin.phi};
    Vec3 P, u;
    if (kin.velocity) {
        u = *kin.velocity;
        P = canonical_momentum(u, ctx);
    } else {
        P = *kin.momentum;
        u = velocity_from_momentum(P, ctx);
    }
    const Vec3 p = kinetic_momentum(P, ctx);
    const double gamma = gamma_from_momentum(P, ctx);
    const double energy = total_energy(P, ctx);
    const double e_for_gl = kin.energy ? *kin.energy : energy;
    const double L = lagrangian(u, ctx);
    const double gl = gamma_L(p, ctx, e_for_gl);
    CsvTable t(s.name, s.sha256,
               {"u_x", "u_y", "u_z", "P_x", "P_y", "P_z", "p_x", "p_y", "p_z", "gamma", "lagrangian", "total_energy",
                "gamma_L"});
    t.row(std::vector<double>{u.x, u.y, u.z, P.x, P.y, P.z, p.x, p.y, p.z, gamma, L, energy, gl});
    out.stage(s.name + "_kinematics.csv", t.str());
    summary["velocity"] = {u.x, u.y, u.z};
    summary["canonical_momentum"] = {P.x, P.y, P.z};
    summary["kinetic_momentum"] = {p.x, p.y, p.z};
    summary["gamma"] = gamma;
    summary["lagrangian"] = L;
    summary["total_energy"] = energy;
    summary["gamma_L"] = gl;
}

void cmd_compare(const Scenario& s, OutputSet& out, json& summary) {
    if (s.compare.size() != 2) throw ValidationError("this command needs a compare section with a and b", "compare");
    const Scenario& a = s.compare[0];
    const Scenario& b = s.compare[1];
    if (a.name == b.name) throw ValidationError("sub-scenario names must differ", "compare");
    auto fa = std::async(std::launch::async, [&] { return run_evolution(a, out, true); });
    auto fb = std::async(std::launch::async, [&] { return run_evolution(b, out, true); });
    std::exception_ptr err;
    EvolutionOutcome ra, rb;
    try {
        ra = fa.get();
    } catch (...) {
        err = std::current_exception();
    }
    try {
        rb = fb.get();
    } catch (...) {
        if (!err) err = std::current_exception();
    }
    if (err) std::rethrow_exception(err);

    std::optional<SpectrumResult> basis;
    if (s.outputs.population_states > 0)
        basis = stationary_spectrum(require_equation(a), require_grid(a), s.outputs.population_states);
    const auto rep = compare_runs(ra.kept, rb.kept, basis ? &*basis : nullptr);

    CsvTable t(s.name, s.sha256, {"t", "l2_distance", "centroid_a", "centroid_b", "width_a", "width_b"});
    for (std::size_t j = 0; j < ra.kept.size(); ++j) {
        const auto& sa = ra.kept[j];
        const auto& sb = rb.kept[j];
        double d2 = 0.0;
        const Grid1D& g = sa.psi.grid();
        for (std::size_t i = 0; i < g.size(); ++i) d2 += g.weight(i) * std::norm(sa.psi[i] - sb.psi[i]);
        const Moments ma = moments(sa.psi), mb = moments(sb.psi);
        t.row(std::vector<double>{sa.t, std::sqrt(d2), ma.centroid, mb.centroid, ma.width, mb.width});
    }
    out.stage(s.name + "_compare.csv", t.str());
    summary["a"] = ra.summary;
    summary["a"]["name"] = a.name;
    summary["b"] = rb.summary;
    summary["b"]["name"] = b.name;
    json d{{"matched_times", rep.matched_times},
           {"max_l2_distance", rep.max_l2_distance},
           {"time_of_max_l2", rep.time_of_max_l2},
           {"max_centroid_distance", rep.max_centroid_distance},
           {"width_growth_divergence", rep.width_growth_divergence}};
    if (rep.max_population_distance) d["max_population_distance"] = *rep.max_population_distance;
    summary["divergence"] = d;
}

std::string utc_now() {
    const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&now, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

struct Failure {
    int code;
    std::string kind;
    std::string key;
};

Failure classify(const std::exception& e) {
    if (const auto* v = dynamic_cast<const ValidationError*>(&e)) return {1, "validation", v->key()};
    if (dynamic_cast<const CflViolation*>(&e)) return {2, "cfl_violation", {}};
    if (dynamic_cast<const NonConvergence*>(&e)) return {2, "non_convergence", {}};
    if (dynamic_cast<const SingularSystem*>(&e)) return {2, "singular_system", {}};
    if (dynamic_cast<const EllipticRegime*>(&e)) return {2, "elliptic_regime", {}};
    if (dynamic_cast<const NumericalError*>(&e)) return {2, "numerical", {}};
    if (dynamic_cast<const IoError*>(&e)) return {3, "io", {}};
    if (dynamic_cast<const std::filesystem::filesystem_error*>(&e)) return {3, "io", {}};
    if (dynamic_cast<const YAML::Exception*>(&e)) return {1, "validation", "scenario"};
    return {2, "internal", {}};
}

}  // namespace

const std::vector<std::string>& subcommands() {
    static const std::vector<std::string> names{"eigensolve", "evolve",    "dispersion", "residual",
                                                "calibrate",  "kinematics", "compare"};
    return names;
}

std::vector<std::string> run_command(const std::string& sub, const Scenario& s, const RunOptions& opt) {
    const auto start = std::chrono::steady_clock::now();
    const std::string started = utc_now();
    OutputSet out(opt.out_dir);
    json summary = header(s, sub);
    if (sub == "eigensolve") cmd_eigensolve(s, out, summary);
    else if (sub == "evolve") cmd_evolve(s, out, summary);
    else if (sub == "dispersion") cmd_dispersion(s, opt, out, summary);
    else if (sub == "residual") cmd_residual(s, out, summary);
    else if (sub == "calibrate") cmd_calibrate(s, out, summary);
    else if (sub == "kinematics") cmd_kinematics(s, out, summary);
    else if (sub == "compare") cmd_compare(s, out, summary);
    else throw ValidationError("unknown subcommand " + sub, "command");
    out.stage(s.name + "_summary.json", dump(summary));

    const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    json meta{{"scenario", s.name},
              {"scenario_sha256", s.sha256},
              {"command", sub},
              {"seed", opt.seed},
              {"wavelab_version", version},
              {"started_utc", started},
              {"wall_seconds", wall}};
    out.stage(s.name + "_run.json", dump(meta));
    out.commit();
    return out.committed();
}

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"wavelab: wave-equation solvers, calibration audits and kinematics"};
    app.set_version_flag("--version", std::string("wavelab ") + version);
    std::string command, scenario_path, out_dir = ".";
    RunOptions opt;
    app.add_option("command", command, "Subcommand")->required()->check(CLI::IsMember(subcommands()));
    app.add_option("scenario", scenario_path, "Scenario YAML file")->required();
    app.add_option("--out-dir", out_dir, "Output directory")->envname("WAVELAB_OUT_DIR");
    app.add_option("--seed", opt.seed, "Seed for randomized scenarios");
    app.add_flag("--quiet", opt.quiet, "Suppress progress output");

    auto diagnostic = [&](int code, const std::string& kind, const std::string& message, const std::string& key) {
        json d{{"level", "error"}, {"exit_code", code}, {"kind", kind}, {"message", message}};
        if (!key.empty()) d["key"] = key;
        if (!command.empty()) d["command"] = command;
        if (!scenario_path.empty()) d["scenario_file"] = scenario_path;
        err << d.dump() << std::endl;
        return code;
    };

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForVersion&) {
        out << "wavelab " << version << "\n";
        return 0;
    } catch (const CLI::Success&) {
        out << app.help();
        return 0;
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) {
            out << app.help();
            return 0;
        }
        return diagnostic(1, "usage", e.what(), "command");
    }

    try {
        opt.out_dir = out_dir;
        const Scenario s = load_scenario(scenario_path);
        const auto files = run_command(command, s, opt);
        if (!opt.quiet) {
            out << command << " " << s.name << ": wrote " << files.size() << " files to " << opt.out_dir.string()
                << "\n";
        }
        return 0;
    } catch (const std::exception& e) {
        const Failure f = classify(e);
        return diagnostic(f.code, f.kind, e.what(), f.key);
    }
}

}  // namespace wavelab::cli
