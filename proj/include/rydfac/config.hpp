#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "rydfac/drive.hpp"
#include "rydfac/lattice.hpp"

namespace rydfac {

// Run configuration as read from YAML. Unset optionals mean "auto".

struct GeometryConfig {
    std::string kind = "chain";  // chain | square
    std::size_t n = 0;           // chain
    std::size_t width = 0;       // square
    std::size_t height = 0;
    double spacing_um = 0.0;
    std::optional<double> v_nn_mhz;
    std::optional<double> c6;        // MHz um^6
    std::string cutoff = "auto";     // auto | nn_only | nn_plus_nnn | radius
    double cutoff_radius_um = 0.0;
};

struct DriveConfig {
    std::string kind = "rap";  // rap | rabi
    double omega0_mhz = 0.0;
    double t0_us = 0.0;  // rap only
    std::optional<double> delta0_mhz;
    std::optional<double> amplitude_mhz;
    std::optional<double> beta_mhz;
    std::size_t n_steps = 1;
    std::string first_driven_group = "a";
    bool reverse_sweep = false;
    double d_delta0_mhz = 0.0;
    double d_omega0_mhz = 0.0;
};

struct DisorderConfig {
    double sigma_um = 0.0;
    std::size_t realizations = 1;
};

struct SolverConfig {
    std::string method = "full_me";  // full_me | mf_qmc | mf_me
    std::optional<double> dt_us;
    std::optional<double> t_final_us;
    std::size_t trajectories = 1;
    bool record_jumps = false;
};

struct OutputConfig {
    std::string directory = "out";
    std::optional<std::size_t> stride;  // integrator steps per sample
    std::size_t samples_per_step = 20;
};

struct ScanConfig {
    std::size_t site = 1;
    double frac_min = -0.05;
    double frac_max = 0.05;
    std::size_t n_delta = 21;
    std::size_t n_omega = 21;
};

struct RunConfig {
    std::string name;
    GeometryConfig geometry;
    DriveConfig drive;
    double gamma_mhz = 0.0;
    DisorderConfig disorder;
    SolverConfig solver;
    std::uint64_t seed = 0;
    std::string initial = "center";  // bitstring | center | vacuum
    OutputConfig outputs;
    std::optional<ScanConfig> scan;
    std::vector<std::string> warnings;
};

RunConfig parse_config(std::string_view yaml_text);
RunConfig load_config(const std::filesystem::path& path);
std::string emit_config(const RunConfig& c);

/// Everything a run needs, with every auto field filled in.
struct ResolvedRun {
    RunConfig config;  // autos replaced by their values
    Geometry geometry;
    Drive drive;
    double dt_us = 0.0;
    double t_final_us = 0.0;
    std::size_t stride = 1;
};

/// Resolves autos and validates. Throws InvalidConfig naming the field, or
/// ResourceRefusal when the exact solver cannot hold the requested size.
ResolvedRun resolve(const RunConfig& c);

std::vector<std::string> preset_names();
/// Throws InvalidConfig("preset") for unknown names.
RunConfig preset(std::string_view name);

}  // namespace rydfac
