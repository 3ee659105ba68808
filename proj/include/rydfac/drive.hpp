#pragma once

#include <cstddef>
#include <iosfwd>
#include <span>
#include <variant>
#include <vector>

#include "rydfac/lattice.hpp"

namespace rydfac {

/// Drive groups. In 1D, odd indices are group A and even indices group B; in
/// 2D the checkerboard parity (row + col) plays the role of the index. Group A
/// holds site 1, the partner of a seed on site 0, and is driven in the first
/// half-cycle by default.
enum class SiteGroup { a, b };

constexpr SiteGroup other(SiteGroup g) noexcept { return g == SiteGroup::a ? SiteGroup::b : SiteGroup::a; }

std::vector<SiteGroup> assign_groups(const Geometry& g);

/// Allen-Eberly sweep: sech Rabi pulses on alternating groups with a global
/// tanh detuning ramp of half-range `amplitude_mhz` about `delta0_mhz`.
struct RapSchedule {
    double omega0_mhz = 0.0;
    double t0_us = 0.0;          // full cycle, two half-cycle steps
    double delta0_mhz = 0.0;     // ramp centre
    double amplitude_mhz = 0.0;  // ramp half-range
    double beta_mhz = 0.0;       // informational; see amplitude_from_beta
    std::size_t n_steps = 1;     // half-cycles
    std::vector<SiteGroup> groups;
    double delta_error_mhz = 0.0;
    double omega_error_mhz = 0.0;
    SiteGroup first_driven = SiteGroup::a;
    bool reverse_sweep = false;  // ramp down in the first half-cycle, up in the second

    void validate() const;
};

/// Half-range of the detuning sweep, beta^2 T0 / (8 pi), with beta taken in MHz.
double amplitude_from_beta(double beta_mhz, double t0_us);

/// Resonant square pi pulses on alternating groups at fixed detuning.
struct RabiSchedule {
    double omega0_mhz = 0.0;
    double delta0_mhz = 0.0;
    double step_duration_us = 0.0;  // 1 / (2 omega0): a pi pulse at the nominal Rabi frequency
    std::size_t n_steps = 1;
    std::vector<SiteGroup> groups;
    double delta_error_mhz = 0.0;
    double omega_error_mhz = 0.0;
    SiteGroup first_driven = SiteGroup::a;

    void validate() const;
};

double rabi_step_duration(double omega0_mhz);

double rap_omega(const RapSchedule& s, std::size_t site, double t_us);
double rap_group_omega(const RapSchedule& s, SiteGroup group, double t_us, std::size_t step);
double rap_delta(const RapSchedule& s, double t_us, std::size_t step);
double rap_delta(const RapSchedule& s, double t_us);

struct DriveSample {
    double omega_mhz = 0.0;
    double delta_mhz = 0.0;
};

DriveSample rabi_drive(const RabiSchedule& s, std::size_t site, double t_us);
double rabi_group_omega(const RabiSchedule& s, SiteGroup group, std::size_t step);

/// Either schedule behind one interface. Values are cyclic MHz.
class Drive {
public:
    Drive(RapSchedule s);
    Drive(RabiSchedule s);

    bool is_rap() const noexcept { return std::holds_alternative<RapSchedule>(schedule_); }
    const RapSchedule& rap() const { return std::get<RapSchedule>(schedule_); }
    const RabiSchedule& rabi() const { return std::get<RabiSchedule>(schedule_); }

    double delta_mhz(double t_us) const;
    double omega_mhz(std::size_t site, double t_us) const;
    double group_omega_mhz(SiteGroup group, double t_us) const;

    /// Step (half-cycle) containing t.
    std::size_t step_index(double t_us) const;
    /// Values using the formulas of step `step` even when t sits on its edge.
    /// Integrators pass the step of the interval midpoint so that no RK stage
    /// straddles a pulse switch.
    double delta_mhz(double t_us, std::size_t step) const;
    double group_omega_mhz(SiteGroup group, double t_us, std::size_t step) const;

    std::span<const SiteGroup> groups() const noexcept;
    std::size_t n_sites() const noexcept { return groups().size(); }
    std::size_t n_steps() const noexcept;
    /// Duration of one step (half-cycle); the cycle T0 is twice this.
    double step_duration_us() const noexcept;
    double cycle_us() const noexcept { return 2.0 * step_duration_us(); }
    double total_duration_us() const noexcept { return static_cast<double>(n_steps()) * step_duration_us(); }

    /// Copy with additive errors on the detuning centre and Rabi frequency.
    Drive with_errors(double delta_error_mhz, double omega_error_mhz) const;
    Drive with_steps(std::size_t n_steps) const;

private:
    std::variant<RapSchedule, RabiSchedule> schedule_;
};

/// Samples (t_us, delta_mhz, omega_groupA_mhz, omega_groupB_mhz) on times.
void write_drive_csv(std::ostream& os, const Drive& drive, std::span<const double> times_us);

}  // namespace rydfac
