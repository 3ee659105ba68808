#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "rydfac/drive.hpp"
#include "rydfac/lattice.hpp"
#include "rydfac/run_result.hpp"
#include "rydfac/state.hpp"

namespace rydfac {

struct EvolveSpec {
    double t_final_us = 0.0;
    double dt_us = 0.0;
    std::size_t output_stride = 1;  // integrator steps per recorded sample
    double gamma_mhz = 0.0;         // Rydberg decay rate, cyclic

    /// Throws InvalidConfig unless dt divides both t_final and the drive step,
    /// and (RAP) dt <= T0 / 2000.
    void validate(const Drive& drive) const;
};

/// Integrator steps per drive step used when dt is left to the solver.
/// RAP: max(10000, step * omega_max / 0.025 rounded up to a multiple of 100) where omega_max is the
/// largest of the sweep ceiling, peak Rabi frequency and pair shift (angular).
/// Rabi: 5000.
std::size_t default_substeps(const Geometry& g, const Drive& drive);
double default_dt(const Geometry& g, const Drive& drive);

/// H(t) = sum_j Omega_j/2 sx_j - Delta/2 sum_j sz_j + sum_pairs V_ij n_i n_j in
/// rad/us, applied matrix-free over bit patterns.
class Hamiltonian {
public:
    Hamiltonian(const Geometry& g, Drive drive);

    struct Coefficients {
        double delta = 0.0;               // rad/us
        std::vector<double> half_omega;   // Omega_j / 2 per site, rad/us
    };

    std::size_t n_sites() const noexcept { return n_sites_; }
    std::size_t dim() const noexcept { return std::size_t{1} << n_sites_; }
    const Drive& drive() const noexcept { return drive_; }

    void coefficients(double t_us, std::size_t step, Coefficients& c) const;
    Coefficients coefficients(double t_us) const;

    /// E_a = -Delta/2 (2 n(a) - N) + sum_pairs V n_i n_j for every basis state.
    void diagonal(double delta, std::span<double> out) const;

    std::span<const double> interaction() const noexcept { return interaction_; }
    std::span<const std::uint8_t> excitations() const noexcept { return excitations_; }

    /// out = H(t) in; sizes must be 2^N.
    void apply(double t_us, std::span<const cplx> in, std::span<cplx> out) const;
    void apply(const Coefficients& c, std::span<const cplx> in, std::span<cplx> out) const;

private:
    std::size_t n_sites_;
    Drive drive_;
    std::vector<double> interaction_;
    std::vector<std::uint8_t> excitations_;
};

/// Integrates the Lindblad equation with jump operators sqrt(Gamma) sigma^-_j
/// (or the Schroedinger equation when Gamma = 0 and the initial state is pure)
/// with fixed-step RK4.
RunResult evolve(const Geometry& g, const Drive& drive, const EvolveSpec& spec, const ManyBodyState& initial);

struct DressedLevels {
    double delta_mhz = 0.0;
    std::array<double, 4> energies_mhz{};  // ascending
};

/// Eigenvalues of the two-site Hamiltonian at fixed drive (Omega_0, Omega_1) over a detuning grid.
std::vector<DressedLevels> dressed_spectrum(const Geometry& g, std::pair<double, double> omega_mhz,
                                            std::span<const double> delta_grid_mhz);

struct DisorderAverage {
    RunResult mean;  // std_errors hold the standard error over realizations
    std::vector<std::vector<double>> final_populations;  // per realization
};

DisorderAverage disorder_average(const Geometry& g, const DisorderSpec& disorder, const Drive& drive,
                                 const EvolveSpec& spec, const ManyBodyState& initial, std::size_t threads = 1);

}  // namespace rydfac
