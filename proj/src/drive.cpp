#include "rydfac/drive.hpp"

#include <cmath>
#include <numbers>
#include <ostream>
#include <stdexcept>

#include <fmt/format.h>

#include "rydfac/errors.hpp"

namespace rydfac {
namespace {

std::size_t step_of(double t_us, double step_us) {
    if (t_us < 0.0) throw std::invalid_argument("drive evaluated at negative time");
    return static_cast<std::size_t>(std::floor(t_us / step_us));
}

double sech(double x) { return 1.0 / std::cosh(x); }

SiteGroup group_of(std::span<const SiteGroup> groups, std::size_t site) {
    if (site >= groups.size()) throw std::invalid_argument("drive: unknown site " + std::to_string(site));
    return groups[site];
}

// Pulse phase within the half-cycle: pi (t' - centre) / (T0 / 8), centre at
// T0/4 (first half) or 3 T0/4 (second half) of the current cycle.
double pulse_phase(const RapSchedule& s, double t_us, std::size_t step) {
    const double cycle_start = static_cast<double>(step / 2) * s.t0_us;
    const double centre = (step % 2 == 0 ? 0.25 : 0.75) * s.t0_us;
    return std::numbers::pi * (t_us - cycle_start - centre) / (s.t0_us / 8.0);
}

}  // namespace

std::vector<SiteGroup> assign_groups(const Geometry& g) {
    std::vector<SiteGroup> out(g.size());
    for (std::size_t s = 0; s < g.size(); ++s) {
        const std::size_t parity = g.dimension() == 1 ? s % 2 : (g.row(s) + g.col(s)) % 2;
        out[s] = parity == 1 ? SiteGroup::a : SiteGroup::b;
    }
    return out;
}

void RapSchedule::validate() const {
    if (!(t0_us > 0.0)) throw InvalidConfig("drive.t0_us", "cycle time must be positive");
    if (!(amplitude_mhz >= 0.0)) throw InvalidConfig("drive.amplitude_mhz", "must be non-negative");
    if (!(delta0_mhz - amplitude_mhz > 0.0))
        throw InvalidConfig("drive.amplitude_mhz", "sweep would cross zero detuning (delta0 - amplitude <= 0)");
    if (n_steps == 0) throw InvalidConfig("drive.n_steps", "need at least one step");
    if (groups.empty()) throw InvalidConfig("drive", "no sites assigned to groups");
}

double amplitude_from_beta(double beta_mhz, double t0_us) {
    return beta_mhz * beta_mhz * t0_us / (8.0 * std::numbers::pi);
}

void RabiSchedule::validate() const {
    if (!(omega0_mhz > 0.0)) throw InvalidConfig("drive.omega0_mhz", "Rabi frequency must be positive");
    if (!(step_duration_us > 0.0)) throw InvalidConfig("drive.step_duration_us", "must be positive");
    if (n_steps == 0) throw InvalidConfig("drive.n_steps", "need at least one step");
    if (groups.empty()) throw InvalidConfig("drive", "no sites assigned to groups");
}

double rabi_step_duration(double omega0_mhz) { return 1.0 / (2.0 * omega0_mhz); }

double rap_group_omega(const RapSchedule& s, SiteGroup group, double t_us, std::size_t step) {
    const SiteGroup driven = step % 2 == 0 ? s.first_driven : other(s.first_driven);
    if (group != driven) return 0.0;
    return (s.omega0_mhz + s.omega_error_mhz) * sech(pulse_phase(s, t_us, step));
}

double rap_omega(const RapSchedule& s, std::size_t site, double t_us) {
    return rap_group_omega(s, group_of(s.groups, site), t_us, step_of(t_us, 0.5 * s.t0_us));
}

double rap_delta(const RapSchedule& s, double t_us, std::size_t step) {
    // Up-sweep in the first half-cycle, down-sweep in the second (or the reverse).
    const bool up = (step % 2 == 0) != s.reverse_sweep;
    const double ramp = s.amplitude_mhz * std::tanh(pulse_phase(s, t_us, step));
    return s.delta0_mhz + s.delta_error_mhz + (up ? ramp : -ramp);
}

double rap_delta(const RapSchedule& s, double t_us) { return rap_delta(s, t_us, step_of(t_us, 0.5 * s.t0_us)); }

double rabi_group_omega(const RabiSchedule& s, SiteGroup group, std::size_t step) {
    const SiteGroup driven = step % 2 == 0 ? s.first_driven : other(s.first_driven);
    return group == driven ? s.omega0_mhz + s.omega_error_mhz : 0.0;
}

DriveSample rabi_drive(const RabiSchedule& s, std::size_t site, double t_us) {
    const SiteGroup g = group_of(s.groups, site);
    return {rabi_group_omega(s, g, step_of(t_us, s.step_duration_us)), s.delta0_mhz + s.delta_error_mhz};
}

Drive::Drive(RapSchedule s) : schedule_(std::move(s)) { rap().validate(); }
Drive::Drive(RabiSchedule s) : schedule_(std::move(s)) { rabi().validate(); }

std::size_t Drive::step_index(double t_us) const { return step_of(t_us, step_duration_us()); }

double Drive::delta_mhz(double t_us) const { return delta_mhz(t_us, step_index(t_us)); }

double Drive::delta_mhz(double t_us, std::size_t step) const {
    if (is_rap()) return rap_delta(rap(), t_us, step);
    return rabi().delta0_mhz + rabi().delta_error_mhz;
}

double Drive::omega_mhz(std::size_t site, double t_us) const {
    return group_omega_mhz(group_of(groups(), site), t_us);
}

double Drive::group_omega_mhz(SiteGroup group, double t_us) const {
    return group_omega_mhz(group, t_us, step_index(t_us));
}

double Drive::group_omega_mhz(SiteGroup group, double t_us, std::size_t step) const {
    return is_rap() ? rap_group_omega(rap(), group, t_us, step) : rabi_group_omega(rabi(), group, step);
}

std::span<const SiteGroup> Drive::groups() const noexcept {
    return is_rap() ? std::span<const SiteGroup>(rap().groups) : std::span<const SiteGroup>(rabi().groups);
}

std::size_t Drive::n_steps() const noexcept { return is_rap() ? rap().n_steps : rabi().n_steps; }

double Drive::step_duration_us() const noexcept {
    return is_rap() ? 0.5 * rap().t0_us : rabi().step_duration_us;
}

Drive Drive::with_errors(double delta_error_mhz, double omega_error_mhz) const {
    return std::visit(
        [&](auto s) {
            s.delta_error_mhz = delta_error_mhz;
            s.omega_error_mhz = omega_error_mhz;
            return Drive(std::move(s));
        },
        schedule_);
}

Drive Drive::with_steps(std::size_t n_steps) const {
    return std::visit(
        [&](auto s) {
            s.n_steps = n_steps;
            return Drive(std::move(s));
        },
        schedule_);
}

void write_drive_csv(std::ostream& os, const Drive& drive, std::span<const double> times_us) {
    os << "t_us,delta_mhz,omega_groupA_mhz,omega_groupB_mhz\n";
    for (double t : times_us)
        os << fmt::format("{:.12g},{:.12g},{:.12g},{:.12g}\n", t, drive.delta_mhz(t),
                          drive.group_omega_mhz(SiteGroup::a, t), drive.group_omega_mhz(SiteGroup::b, t));
}

}  // namespace rydfac
