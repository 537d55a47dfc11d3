#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <yaml-cpp/yaml.h>

#include "wavelab/wavelab.hpp"

namespace wavelab::cli {

struct Psi0Spec {
    enum class Kind { Gaussian, Eigenstates, PlaneWave };
    Kind kind = Kind::Gaussian;
    double x0 = 0.0;
    double sigma = 1.0;
    double k0 = 0.0;
    cplx amplitude{1.0, 0.0};
    /// (state index, coefficient) pairs for Kind::Eigenstates.
    std::vector<std::pair<std::size_t, cplx>> states;
};

struct VelocitySpec {
    enum class Kind { Zero, Stationary, PositiveFrequency };
    Kind kind = Kind::Zero;
    std::optional<double> omega;
    std::optional<FrequencyMode> mode;
};

struct OutputsSpec {
    bool snapshots = true;
    std::size_t population_states = 0;
    bool packet_stats = false;
};

struct DispersionSpec {
    std::vector<double> k;
    std::size_t random_k = 0;
    double k_max = 5.0;
};

struct ResidualSpec {
    std::size_t state_index = 0;
    std::vector<FrequencyMode> modes{FrequencyMode::Rederived, FrequencyMode::PaperLiteral};
    std::vector<double> times{0.0, 0.5, 1.0};
};

struct CalibrateSpec {
    std::optional<CalibrationFamily> family;
    Vec3 momentum{1.0, 0.0, 0.0};
    double potential = 0.0;
    Vec3 a;
    double phi = 0.0;
    /// Optical templates only; matter/EM trials derive E from the momentum.
    double omega = 1.0;
    double k = 1.0;
};

struct KinematicsSpec {
    std::optional<Vec3> velocity;
    std::optional<Vec3> momentum;
    Vec3 a;
    double phi = 0.0;
    std::optional<double> energy;
};

/// A fully validated run description.
struct Scenario {
    std::string name;
    std::string sha256;
    PhysicalConstants constants;
    std::optional<Grid1D> grid;
    std::optional<EquationSpec> equation;
    std::size_t n_states = 5;
    std::optional<Psi0Spec> psi0;
    VelocitySpec velocity;
    std::optional<StepperConfig> stepper;
    OutputsSpec outputs;
    DispersionSpec dispersion;
    ResidualSpec residual;
    std::optional<CalibrateSpec> calibrate;
    std::optional<KinematicsSpec> kinematics;
    /// Sub-scenarios of `compare`, already merged with the top level.
    std::vector<Scenario> compare;
};

/// Accepts plain numbers and products/quotients with `pi`, e.g. "2*pi", "pi/4".
double parse_number(const std::string& text, const std::string& key);

Scenario parse_scenario(const YAML::Node& root, const std::string& sha256);

/// Reads, hashes and parses a scenario file.
Scenario load_scenario(const std::filesystem::path& path);

/// Deep merge: maps are merged key by key, everything else is replaced.
YAML::Node merge_nodes(const YAML::Node& base, const YAML::Node& override_node);

}  // namespace wavelab::cli
