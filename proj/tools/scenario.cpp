#include "scenario.hpp"

#include <algorithm>
#include <cctype>
#include <cstdlib>
#include <fstream>
#include <numbers>
#include <sstream>

#include "output.hpp"

namespace wavelab::cli {

namespace {

std::string join(const std::string& path, const std::string& key) { return path.empty() ? key : path + "." + key; }

std::string trim(std::string s) {
    auto ws = [](unsigned char c) { return std::isspace(c) != 0; };
    s.erase(s.begin(), std::find_if_not(s.begin(), s.end(), ws));
    s.erase(std::find_if_not(s.rbegin(), s.rend(), ws).base(), s.end());
    return s;
}

void check_map(const YAML::Node& node, const std::string& path, std::initializer_list<const char*> allowed) {
    if (!node.IsMap()) throw ValidationError("expected a mapping", path);
    for (const auto& kv : node) {
        const auto key = kv.first.as<std::string>();
        if (std::none_of(allowed.begin(), allowed.end(), [&](const char* a) { return key == a; }))
            throw ValidationError("unknown key", join(path, key));
    }
}

double number(const YAML::Node& node, const std::string& key) {
    if (!node.IsScalar()) throw ValidationError("expected a number", key);
    return parse_number(node.Scalar(), key);
}

double number_or(const YAML::Node& parent, const char* name, const std::string& path, double fallback) {
    const auto n = parent[name];
    return n ? number(n, join(path, name)) : fallback;
}

std::size_t count(const YAML::Node& node, const std::string& key) {
    const double v = number(node, key);
    if (v < 0.0 || v != std::floor(v) || v > 1e12) throw ValidationError("expected a non-negative integer", key);
    return static_cast<std::size_t>(v);
}

bool flag(const YAML::Node& node, const std::string& key) {
    try {
        return node.as<bool>();
    } catch (const YAML::Exception&) {
        throw ValidationError("expected true or false", key);
    }
}

std::string text(const YAML::Node& node, const std::string& key) {
    if (!node.IsScalar()) throw ValidationError("expected a string", key);
    return node.Scalar();
}

Vec3 vec3(const YAML::Node& node, const std::string& key) {
    if (node.IsScalar()) return {number(node, key), 0.0, 0.0};
    if (!node.IsSequence() || node.size() != 3) throw ValidationError("expected a number or a 3-vector", key);
    return {number(node[0], key + "[0]"), number(node[1], key + "[1]"), number(node[2], key + "[2]")};
}

cplx complex_value(const YAML::Node& node, const std::string& key) {
    if (node.IsScalar()) return {number(node, key), 0.0};
    if (!node.IsSequence() || node.size() != 2) throw ValidationError("expected a number or [re, im]", key);
    return {number(node[0], key + "[0]"), number(node[1], key + "[1]")};
}

std::vector<double> numbers(const YAML::Node& node, const std::string& key) {
    if (!node.IsSequence()) throw ValidationError("expected a list of numbers", key);
    std::vector<double> out;
    for (std::size_t i = 0; i < node.size(); ++i) out.push_back(number(node[i], key + "[" + std::to_string(i) + "]"));
    return out;
}

PhysicalConstants parse_constants(const YAML::Node& n) {
    if (!n) return {};
    check_map(n, "constants", {"hbar", "c", "m0", "e"});
    return {number_or(n, "hbar", "constants", 1.0), number_or(n, "c", "constants", 1.0),
            number_or(n, "m0", "constants", 1.0), number_or(n, "e", "constants", 1.0)};
}

Grid1D parse_grid(const YAML::Node& n) {
    check_map(n, "grid", {"x_min", "x_max", "n_points", "boundary"});
    for (const char* k : {"x_min", "x_max", "n_points"})
        if (!n[k]) throw ValidationError("missing required key", join("grid", k));
    Boundary b = Boundary::Dirichlet;
    if (n["boundary"]) {
        const auto s = text(n["boundary"], "grid.boundary");
        if (s == "periodic") b = Boundary::Periodic;
        else if (s != "dirichlet") throw ValidationError("must be dirichlet or periodic", "grid.boundary");
    }
    try {
        return make_grid(number(n["x_min"], "grid.x_min"), number(n["x_max"], "grid.x_max"),
                         count(n["n_points"], "grid.n_points"), b);
    } catch (const ValidationError& e) {
        throw ValidationError(e.what(), e.key().empty() ? "grid" : e.key());
    }
}

Potential parse_potential(const YAML::Node& n, const std::string& path) {
    if (!n) return potential::Free{};
    if (n.IsScalar()) {
        const auto s = n.Scalar();
        if (s == "free") return potential::Free{};
        if (s == "infinite_well") return potential::InfiniteWell{};
        throw ValidationError("unknown potential (free, infinite_well, harmonic, step, barrier, tabulated)", path);
    }
    check_map(n, path, {"type", "k_spring", "v0", "x_step", "x_left", "x_right", "values"});
    if (!n["type"]) throw ValidationError("missing required key", join(path, "type"));
    const auto type = text(n["type"], join(path, "type"));
    if (type == "free") return potential::Free{};
    if (type == "infinite_well") return potential::InfiniteWell{};
    if (type == "harmonic") return potential::Harmonic{number_or(n, "k_spring", path, 1.0)};
    if (type == "step") return potential::Step{number_or(n, "v0", path, 0.0), number_or(n, "x_step", path, 0.0)};
    if (type == "barrier")
        return potential::Barrier{number_or(n, "v0", path, 0.0), number_or(n, "x_left", path, 0.0),
                                  number_or(n, "x_right", path, 0.0)};
    if (type == "tabulated") {
        if (!n["values"]) throw ValidationError("missing required key", join(path, "values"));
        return potential::Tabulated{numbers(n["values"], join(path, "values"))};
    }
    throw ValidationError("unknown potential type", join(path, "type"));
}

EquationSpec parse_equation(const YAML::Node& n, const PhysicalConstants& k) {
    check_map(n, "equation", {"family", "energy", "potential", "em", "momentum"});
    if (!n["family"]) throw ValidationError("missing required key", "equation.family");
    const auto fam = family_from_string(text(n["family"], "equation.family"));
    if (!fam) throw ValidationError("unknown family", "equation.family");
    EquationParams p;
    if (n["energy"]) p.energy = number(n["energy"], "equation.energy");
    p.potential = parse_potential(n["potential"], "equation.potential");
    if (const auto em = n["em"]) {
        check_map(em, "equation.em", {"A", "phi"});
        p.em = EmPotentials::uniform(em["A"] ? vec3(em["A"], "equation.em.A") : Vec3{},
                                     number_or(em, "phi", "equation.em", 0.0));
    }
    if (n["momentum"]) p.momentum = vec3(n["momentum"], "equation.momentum");
    try {
        return EquationSpec(*fam, k, std::move(p));
    } catch (const ValidationError& e) {
        throw ValidationError(e.what(), e.key().empty() ? "equation" : e.key());
    }
}

Psi0Spec parse_psi0(const YAML::Node& n) {
    const std::string path = "initial.psi0";
    check_map(n, path, {"type", "x0", "sigma", "k0", "amplitude", "states"});
    Psi0Spec s;
    const auto type = n["type"] ? text(n["type"], join(path, "type")) : std::string("gaussian");
    if (n["amplitude"]) s.amplitude = complex_value(n["amplitude"], join(path, "amplitude"));
    s.x0 = number_or(n, "x0", path, 0.0);
    s.sigma = number_or(n, "sigma", path, 1.0);
    s.k0 = number_or(n, "k0", path, 0.0);
    if (type == "gaussian") {
        s.kind = Psi0Spec::Kind::Gaussian;
        if (!(s.sigma > 0.0)) throw ValidationError("must be positive", join(path, "sigma"));
    } else if (type == "plane_wave") {
        s.kind = Psi0Spec::Kind::PlaneWave;
    } else if (type == "eigenstates") {
        s.kind = Psi0Spec::Kind::Eigenstates;
        const auto st = n["states"];
        const std::string sp = join(path, "states");
        if (!st || !st.IsSequence() || st.size() == 0) throw ValidationError("expected a non-empty list", sp);
        for (std::size_t i = 0; i < st.size(); ++i) {
            const std::string item = sp + "[" + std::to_string(i) + "]";
            check_map(st[i], item, {"index", "coeff"});
            if (!st[i]["index"]) throw ValidationError("missing required key", join(item, "index"));
            s.states.emplace_back(count(st[i]["index"], join(item, "index")),
                                  st[i]["coeff"] ? complex_value(st[i]["coeff"], join(item, "coeff")) : cplx{1.0});
        }
    } else {
        throw ValidationError("must be gaussian, plane_wave or eigenstates", join(path, "type"));
    }
    return s;
}

std::optional<FrequencyMode> frequency_mode(const std::string& s) {
    if (s == "rederived") return FrequencyMode::Rederived;
    if (s == "paper_literal") return FrequencyMode::PaperLiteral;
    return std::nullopt;
}

VelocitySpec parse_velocity(const YAML::Node& n) {
    const std::string path = "initial.psi_dot0";
    VelocitySpec v;
    if (!n) return v;
    check_map(n, path, {"type", "omega"});
    const auto type = n["type"] ? text(n["type"], join(path, "type")) : std::string("zero");
    if (type == "zero") {
        v.kind = VelocitySpec::Kind::Zero;
    } else if (type == "positive_frequency") {
        v.kind = VelocitySpec::Kind::PositiveFrequency;
    } else if (type == "stationary") {
        v.kind = VelocitySpec::Kind::Stationary;
        if (!n["omega"]) throw ValidationError("stationary launch needs omega (number, rederived or paper_literal)",
                                               join(path, "omega"));
        const auto s = text(n["omega"], join(path, "omega"));
        if (auto m = frequency_mode(s)) v.mode = m;
        else v.omega = parse_number(s, join(path, "omega"));
        if (v.omega && !std::isfinite(*v.omega)) throw ValidationError("must be finite", join(path, "omega"));
    } else {
        throw ValidationError("must be zero, stationary or positive_frequency", join(path, "type"));
    }
    return v;
}

StepperConfig parse_stepper(const YAML::Node& n) {
    check_map(n, "stepper", {"dt", "t_end", "cfl_safety", "snapshot_stride", "elliptic_policy"});
    StepperConfig c;
    if (!n["dt"]) throw ValidationError("missing required key", "stepper.dt");
    if (!n["t_end"]) throw ValidationError("missing required key", "stepper.t_end");
    c.dt = number(n["dt"], "stepper.dt");
    c.t_end = number(n["t_end"], "stepper.t_end");
    c.cfl_safety = number_or(n, "cfl_safety", "stepper", 0.9);
    if (n["snapshot_stride"]) c.snapshot_stride = count(n["snapshot_stride"], "stepper.snapshot_stride");
    if (n["elliptic_policy"]) {
        const auto s = text(n["elliptic_policy"], "stepper.elliptic_policy");
        if (s == "clamp") c.elliptic = EllipticPolicy::Clamp;
        else if (s != "reject") throw ValidationError("must be reject or clamp", "stepper.elliptic_policy");
    }
    c.validate();
    return c;
}

OutputsSpec parse_outputs(const YAML::Node& n) {
    OutputsSpec o;
    if (!n) return o;
    check_map(n, "outputs", {"snapshots", "populations", "packet_stats"});
    if (n["snapshots"]) o.snapshots = flag(n["snapshots"], "outputs.snapshots");
    if (n["populations"]) o.population_states = count(n["populations"], "outputs.populations");
    if (n["packet_stats"]) o.packet_stats = flag(n["packet_stats"], "outputs.packet_stats");
    return o;
}

DispersionSpec parse_dispersion(const YAML::Node& n) {
    DispersionSpec d;
    if (!n) return d;
    check_map(n, "dispersion", {"k", "random_k", "k_max"});
    if (n["k"]) d.k = numbers(n["k"], "dispersion.k");
    if (n["random_k"]) d.random_k = count(n["random_k"], "dispersion.random_k");
    d.k_max = number_or(n, "k_max", "dispersion", 5.0);
    if (!(d.k_max > 0.0)) throw ValidationError("must be positive", "dispersion.k_max");
    return d;
}

ResidualSpec parse_residual(const YAML::Node& n) {
    ResidualSpec r;
    if (!n) return r;
    check_map(n, "residual", {"state_index", "modes", "times"});
    if (n["state_index"]) r.state_index = count(n["state_index"], "residual.state_index");
    if (n["times"]) {
        r.times = numbers(n["times"], "residual.times");
        if (r.times.empty()) throw ValidationError("needs at least one time", "residual.times");
    }
    if (n["modes"]) {
        if (!n["modes"].IsSequence()) throw ValidationError("expected a list", "residual.modes");
        r.modes.clear();
        for (std::size_t i = 0; i < n["modes"].size(); ++i) {
            const auto key = "residual.modes[" + std::to_string(i) + "]";
            auto m = frequency_mode(text(n["modes"][i], key));
            if (!m) throw ValidationError("must be rederived or paper_literal", key);
            r.modes.push_back(*m);
        }
    }
    return r;
}

CalibrateSpec parse_calibrate(const YAML::Node& n) {
    CalibrateSpec c;
    if (!n || n.IsNull()) return c;
    check_map(n, "calibrate", {"family", "momentum", "potential", "A", "phi", "omega", "k"});
    if (n["family"]) {
        const auto s = text(n["family"], "calibrate.family");
        c.family = calibration_family_from_string(s);
        if (!c.family) throw ValidationError("unknown calibration template", "calibrate.family");
    }
    if (n["momentum"]) c.momentum = vec3(n["momentum"], "calibrate.momentum");
    c.potential = number_or(n, "potential", "calibrate", 0.0);
    if (n["A"]) c.a = vec3(n["A"], "calibrate.A");
    c.phi = number_or(n, "phi", "calibrate", 0.0);
    c.omega = number_or(n, "omega", "calibrate", 1.0);
    c.k = number_or(n, "k", "calibrate", 1.0);
    return c;
}

KinematicsSpec parse_kinematics(const YAML::Node& n) {
    check_map(n, "kinematics", {"velocity", "momentum", "A", "phi", "energy"});
    KinematicsSpec k;
    if (n["velocity"]) k.velocity = vec3(n["velocity"], "kinematics.velocity");
    if (n["momentum"]) k.momentum = vec3(n["momentum"], "kinematics.momentum");
    if (k.velocity.has_value() == k.momentum.has_value())
        throw ValidationError("give exactly one of velocity or momentum", "kinematics");
    if (n["A"]) k.a = vec3(n["A"], "kinematics.A");
    k.phi = number_or(n, "phi", "kinematics", 0.0);
    if (n["energy"]) k.energy = number(n["energy"], "kinematics.energy");
    return k;
}

}  // namespace

double parse_number(const std::string& raw, const std::string& key) {
    const std::string s = trim(raw);
    if (s.empty()) throw ValidationError("expected a number", key);
    double value = 1.0;
    char op = '*';
    std::size_t pos = 0;
    while (pos <= s.size()) {
        const std::size_t next = s.find_first_of("*/", pos);
        const std::string tok = trim(s.substr(pos, next == std::string::npos ? std::string::npos : next - pos));
        double f;
        if (tok == "pi") {
            f = std::numbers::pi;
        } else if (tok == "-pi") {
            f = -std::numbers::pi;
        } else {
            char* end = nullptr;
            f = std::strtod(tok.c_str(), &end);
            if (tok.empty() || end != tok.c_str() + tok.size()) throw ValidationError("expected a number", key);
        }
        value = op == '*' ? value * f : value / f;
        if (next == std::string::npos) break;
        op = s[next];
        pos = next + 1;
    }
    if (!std::isfinite(value)) throw ValidationError("number must be finite", key);
    return value;
}

YAML::Node merge_nodes(const YAML::Node& base, const YAML::Node& override_node) {
    if (!override_node) return YAML::Clone(base);
    if (!base || !base.IsMap() || !override_node.IsMap()) return YAML::Clone(override_node);
    YAML::Node out = YAML::Clone(base);
    for (const auto& kv : override_node) {
        const auto key = kv.first.as<std::string>();
        out[key] = merge_nodes(base[key], kv.second);
    }
    return out;
}

Scenario parse_scenario(const YAML::Node& root, const std::string& sha256) {
    check_map(root, "", {"name", "constants", "grid", "equation", "eigensolve", "initial", "stepper", "outputs",
                         "dispersion", "residual", "calibrate", "kinematics", "compare"});
    Scenario s;
    s.sha256 = sha256;
    if (!root["name"]) throw ValidationError("missing required key", "name");
    s.name = text(root["name"], "name");
    if (s.name.empty() || s.name.find_first_of("/\\ ") != std::string::npos)
        throw ValidationError("must be non-empty without spaces or slashes", "name");
    try {
        s.constants = parse_constants(root["constants"]);
    } catch (const ValidationError& e) {
        throw ValidationError(e.what(), e.key().empty() ? "constants" : e.key());
    }
    if (root["grid"]) s.grid = parse_grid(root["grid"]);
    if (root["equation"]) s.equation = parse_equation(root["equation"], s.constants);
    if (const auto e = root["eigensolve"]) {
        check_map(e, "eigensolve", {"n_states"});
        if (e["n_states"]) s.n_states = count(e["n_states"], "eigensolve.n_states");
        if (s.n_states == 0) throw ValidationError("must be positive", "eigensolve.n_states");
    }
    if (const auto i = root["initial"]) {
        check_map(i, "initial", {"psi0", "psi_dot0"});
        if (!i["psi0"]) throw ValidationError("missing required key", "initial.psi0");
        s.psi0 = parse_psi0(i["psi0"]);
        s.velocity = parse_velocity(i["psi_dot0"]);
    }
    if (root["stepper"]) s.stepper = parse_stepper(root["stepper"]);
    s.outputs = parse_outputs(root["outputs"]);
    s.dispersion = parse_dispersion(root["dispersion"]);
    s.residual = parse_residual(root["residual"]);
    if (root["calibrate"]) s.calibrate = parse_calibrate(root["calibrate"]);
    if (root["kinematics"]) s.kinematics = parse_kinematics(root["kinematics"]);
    if (const auto c = root["compare"]) {
        check_map(c, "compare", {"a", "b"});
        if (!c["a"] || !c["b"]) throw ValidationError("needs both a and b", "compare");
        YAML::Node base = YAML::Clone(root);
        base.remove("compare");
        for (const char* side : {"a", "b"}) {
            YAML::Node merged = merge_nodes(base, c[side]);
            if (!c[side]["name"]) merged["name"] = s.name + "_" + side;
            try {
                s.compare.push_back(parse_scenario(merged, sha256));
            } catch (const ValidationError& e) {
                throw ValidationError(e.what(), std::string("compare.") + side + "." + e.key());
            }
        }
    }
    return s;
}

Scenario load_scenario(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot read scenario file " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    const std::string content = buf.str();
    YAML::Node root;
    try {
        root = YAML::Load(content);
    } catch (const YAML::Exception& e) {
        throw ValidationError(std::string("scenario file does not parse: ") + e.what(), "scenario");
    }
    if (!root.IsMap()) throw ValidationError("scenario file must be a mapping", "scenario");
    return parse_scenario(root, sha256_hex(content));
}

}  // namespace wavelab::cli
