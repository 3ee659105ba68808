#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

#include "rydfac/drive.hpp"
#include "rydfac/lattice.hpp"
#include "rydfac/run_result.hpp"
#include "rydfac/state.hpp"

namespace rydfac {

/// Gutzwiller product state: one (c0, c1) pair per site.
struct SiteAmplitude {
    cplx c0{1.0, 0.0};
    cplx c1{0.0, 0.0};
};

struct SiteEnsemble {
    std::vector<SiteAmplitude> sites;
    double t_us = 0.0;

    static SiteEnsemble product(std::string_view bits);
    std::vector<double> populations() const;  // |c1_j|^2
    double max_norm_error() const;
};

struct TrajectorySpec {
    std::size_t n_trajectories = 1;
    std::uint64_t base_seed = 0;
    double dt_us = 0.0;
    bool record_jumps = false;
    std::size_t output_stride = 1;

    /// dt must divide the drive step and t_final, and keep the summed jump
    /// probability per step (Gamma N dt, worst case) below 0.01.
    void validate(const Drive& drive, std::size_t n_sites, double gamma_mhz, double t_final_us) const;
};

/// Delta_j - sum_k V_jk <n_k> over the pair neighbours of j, in MHz.
double effective_detuning(const Geometry& g, std::span<const double> populations, double delta_mhz, std::size_t site);
double effective_detuning(std::size_t site, const SiteEnsemble& e, const Geometry& g, const Drive& d, double t_us);

/// Keys the per-site uniforms of one step: (base_seed, trajectory, site) picks
/// the stream, the step counter picks the draw.
struct JumpStream {
    std::uint64_t base_seed = 0;
    std::size_t trajectory = 0;
    std::uint64_t step = 0;

    double uniform(std::size_t site) const;
};

/// Probability that site j jumps during one step of length dt: Gamma |c1_j|^2 dt.
double jump_probability(const SiteAmplitude& s, double gamma_mhz, double dt_us);

/// One quantum-jump step of every site: RK4 under the non-Hermitian mean-field
/// Hamiltonian with neighbour populations frozen at the step start, a Bernoulli
/// jump draw per site, then per-site renormalisation. Returns the number of jumps.
std::size_t step_trajectory(SiteEnsemble& e, const Geometry& g, const Drive& drive, double gamma_mhz, double dt_us,
                            const JumpStream& stream, std::vector<JumpRecord>* jumps = nullptr);

/// Ensemble-averaged MF-QMC. populations hold the mean, std_errors the
/// standard error of the mean. Independent of the thread count.
RunResult run_ensemble(const Geometry& g, const Drive& drive, double gamma_mhz, const TrajectorySpec& spec,
                       std::string_view initial, double t_final_us, std::size_t threads = 1);

/// Single trajectory with its own jump log, for inspection.
RunResult run_trajectory(const Geometry& g, const Drive& drive, double gamma_mhz, const TrajectorySpec& spec,
                         std::string_view initial, double t_final_us, std::size_t trajectory);

/// Mean-field master equation: one 2x2 density matrix per site, decay as a
/// Lindblad term, no jumps.
RunResult run_mfme(const Geometry& g, const Drive& drive, double gamma_mhz, std::string_view initial,
                   double t_final_us, double dt_us, std::size_t output_stride = 1);

}  // namespace rydfac
