#include "rydfac/mfqmc.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include <fmt/format.h>

#include "rydfac/errors.hpp"
#include "rydfac/parallel.hpp"
#include "rydfac/rng.hpp"
#include "rydfac/units.hpp"

namespace rydfac {
namespace {

constexpr std::size_t chunk_size = 16;
constexpr double abort_norm_error = 1e-6;

std::size_t whole_steps(double total, double dt, const char* field) {
    const double ratio = total / dt;
    const double rounded = std::round(ratio);
    if (rounded < 1.0 || std::abs(ratio - rounded) > 1e-6 * std::max(1.0, rounded))
        throw InvalidConfig(field, "must be a whole number of integrator steps");
    return static_cast<std::size_t>(rounded);
}

// i w z for real w, without a general complex multiply.
inline cplx times_i(double w, cplx z) { return {-w * z.imag(), w * z.real()}; }

struct DriveValues {
    double delta = 0.0;  // rad/us
    double half_omega_a = 0.0;
    double half_omega_b = 0.0;
};

DriveValues drive_values(const Drive& d, double t, std::size_t step) {
    return {to_angular(d.delta_mhz(t, step)), 0.5 * to_angular(d.group_omega_mhz(SiteGroup::a, t, step)),
            0.5 * to_angular(d.group_omega_mhz(SiteGroup::b, t, step))};
}

// Angular mean-field shifts sum_k V_jk <n_k>.
void mean_field_shifts(const Geometry& g, std::span<const double> pops, std::span<double> shift) {
    for (std::size_t j = 0; j < g.size(); ++j) {
        double s = 0.0;
        for (const Neighbor& nb : g.neighbors(j)) s += nb.v_mhz * pops[nb.site];
        shift[j] = to_angular(s);
    }
}

// d/dt (c0, c1) = -i H (c0, c1), H = [[D/2, w], [w, -D/2 - i G/2]].
inline SiteAmplitude amplitude_rhs(const SiteAmplitude& s, double detuning, double w, double half_gamma) {
    const double hd = 0.5 * detuning;
    SiteAmplitude out;
    out.c0 = times_i(-hd, s.c0) + times_i(-w, s.c1);
    out.c1 = times_i(-w, s.c0) + times_i(hd, s.c1) - half_gamma * s.c1;
    return out;
}

inline SiteAmplitude axpy(const SiteAmplitude& y, double h, const SiteAmplitude& k) {
    return {y.c0 + h * k.c0, y.c1 + h * k.c1};
}

// Per-site density matrix: r00, r11 real, r01 complex.
struct SiteDensity {
    double r00 = 1.0;
    double r11 = 0.0;
    cplx r01{0.0, 0.0};
};

inline SiteDensity density_rhs(const SiteDensity& r, double detuning, double w, double gamma) {
    SiteDensity out;
    out.r00 = -2.0 * w * r.r01.imag() + gamma * r.r11;
    out.r11 = 2.0 * w * r.r01.imag() - gamma * r.r11;
    out.r01 = times_i(-detuning, r.r01) + cplx(0.0, -w * (r.r11 - r.r00)) - 0.5 * gamma * r.r01;
    return out;
}

inline SiteDensity axpy(const SiteDensity& y, double h, const SiteDensity& k) {
    return {y.r00 + h * k.r00, y.r11 + h * k.r11, y.r01 + h * k.r01};
}

// Running mean and sum of squared deviations (Welford within a chunk, Chan's
// rule across chunks). Identical samples give exactly zero spread.
struct Accumulator {
    std::vector<double> mean;  // [sample * n_sites + site]
    std::vector<double> m2;
    std::size_t count = 0;

    void add(std::size_t i, double x) {
        const double n = static_cast<double>(count + 1);
        const double delta = x - mean[i];
        mean[i] += delta / n;
        m2[i] += delta * (x - mean[i]);
    }

    void merge(const Accumulator& o) {
        const double na = static_cast<double>(count), nb = static_cast<double>(o.count);
        const double n = na + nb;
        for (std::size_t i = 0; i < mean.size(); ++i) {
            const double delta = o.mean[i] - mean[i];
            mean[i] += delta * nb / n;
            m2[i] += o.m2[i] + delta * delta * na * nb / n;
        }
        count += o.count;
    }
};

// Pairwise reduction over chunk index ranges; fixed shape for a fixed chunk count.
Accumulator reduce_pairwise(std::vector<Accumulator>& parts, std::size_t lo, std::size_t hi) {
    if (hi - lo == 1) return parts[lo];
    const std::size_t mid = lo + (hi - lo) / 2;
    Accumulator left = reduce_pairwise(parts, lo, mid);
    left.merge(reduce_pairwise(parts, mid, hi));
    return left;
}

struct TrajectoryRecord {
    std::vector<double> times;
    std::vector<std::vector<double>> pops;
    std::vector<JumpRecord> jumps;
    double max_norm_error = 0.0;
};

TrajectoryRecord simulate_trajectory(const Geometry& g, const Drive& drive, double gamma_mhz, const TrajectorySpec& spec,
                                     std::string_view initial, std::size_t n_total, std::size_t trajectory) {
    SiteEnsemble e = SiteEnsemble::product(initial);
    TrajectoryRecord rec;
    auto record = [&](std::size_t k) {
        rec.times.push_back(static_cast<double>(k) * spec.dt_us);
        rec.pops.push_back(e.populations());
    };
    record(0);
    for (std::size_t k = 0; k < n_total; ++k) {
        e.t_us = static_cast<double>(k) * spec.dt_us;
        const JumpStream stream{spec.base_seed, trajectory, k};
        try {
            step_trajectory(e, g, drive, gamma_mhz, spec.dt_us, stream, spec.record_jumps ? &rec.jumps : nullptr);
        } catch (const NumericalInstability& err) {
            throw NumericalInstability(err.time_us(), fmt::format("trajectory {}: {}", trajectory, err.what()));
        }
        rec.max_norm_error = std::max(rec.max_norm_error, e.max_norm_error());
        if ((k + 1) % spec.output_stride == 0 || k + 1 == n_total) record(k + 1);
    }
    for (JumpRecord& j : rec.jumps) j.trajectory = trajectory;
    return rec;
}

void update_population_range(InvariantResiduals& res, std::span<const double> pops) {
    for (double p : pops) {
        res.min_population = std::min(res.min_population, p);
        res.max_population = std::max(res.max_population, p);
    }
}

}  // namespace

SiteEnsemble SiteEnsemble::product(std::string_view bits) {
    validate_bitstring(bits);
    SiteEnsemble e;
    e.sites.resize(bits.size());
    for (std::size_t j = 0; j < bits.size(); ++j)
        if (bits[j] == '1') e.sites[j] = {cplx{0.0, 0.0}, cplx{1.0, 0.0}};
    return e;
}

std::vector<double> SiteEnsemble::populations() const {
    std::vector<double> p(sites.size());
    for (std::size_t j = 0; j < sites.size(); ++j) p[j] = std::norm(sites[j].c1);
    return p;
}

double SiteEnsemble::max_norm_error() const {
    double worst = 0.0;
    for (const SiteAmplitude& s : sites) worst = std::max(worst, std::abs(std::norm(s.c0) + std::norm(s.c1) - 1.0));
    return worst;
}

void TrajectorySpec::validate(const Drive& drive, std::size_t n_sites, double gamma_mhz, double t_final_us) const {
    if (n_trajectories == 0) throw InvalidConfig("solver.trajectories", "need at least one trajectory");
    if (!(dt_us > 0.0)) throw InvalidConfig("solver.dt_us", "time step must be positive");
    if (output_stride == 0) throw InvalidConfig("outputs.stride", "stride must be at least 1");
    if (!(gamma_mhz >= 0.0)) throw InvalidConfig("decay.gamma_mhz", "decay rate must be non-negative");
    if (!(t_final_us > 0.0)) throw InvalidConfig("solver.t_final_us", "final time must be positive");
    whole_steps(t_final_us, dt_us, "solver.dt_us");
    whole_steps(drive.step_duration_us(), dt_us, "solver.dt_us");
    if (to_angular(gamma_mhz) * static_cast<double>(n_sites) * dt_us >= 0.01)
        throw InvalidConfig("solver.dt_us", "jump probability per step too large; reduce dt");
}

double effective_detuning(const Geometry& g, std::span<const double> populations, double delta_mhz, std::size_t site) {
    if (populations.size() != g.size()) throw std::invalid_argument("effective_detuning: population count mismatch");
    double shift = 0.0;
    for (const Neighbor& nb : g.neighbors(site)) shift += nb.v_mhz * populations[nb.site];
    return delta_mhz - shift;
}

double effective_detuning(std::size_t site, const SiteEnsemble& e, const Geometry& g, const Drive& d, double t_us) {
    return effective_detuning(g, e.populations(), d.delta_mhz(t_us), site);
}

double JumpStream::uniform(std::size_t site) const {
    return rng::uniform01(rng::stream_key(base_seed, rng::Domain::jumps, {trajectory, site}), step);
}

double jump_probability(const SiteAmplitude& s, double gamma_mhz, double dt_us) {
    return to_angular(gamma_mhz) * std::norm(s.c1) * dt_us;
}

std::size_t step_trajectory(SiteEnsemble& e, const Geometry& g, const Drive& drive, double gamma_mhz, double dt_us,
                            const JumpStream& stream, std::vector<JumpRecord>* jumps) {
    const std::size_t n = e.sites.size();
    if (n != g.size()) throw std::invalid_argument("step_trajectory: ensemble and geometry disagree on site count");
    const double t = e.t_us;
    const double gamma = to_angular(gamma_mhz);
    const std::size_t segment = drive.step_index(t + 0.5 * dt_us);
    const DriveValues v0 = drive_values(drive, t, segment);
    const DriveValues vm = drive_values(drive, t + 0.5 * dt_us, segment);
    const DriveValues v1 = drive_values(drive, t + dt_us, segment);

    const std::vector<double> pops = e.populations();
    std::vector<double> shift(n);
    mean_field_shifts(g, pops, shift);
    const auto groups = drive.groups();

    std::size_t n_jumps = 0;
    for (std::size_t j = 0; j < n; ++j) {
        const bool in_a = groups[j] == SiteGroup::a;
        const double w0 = in_a ? v0.half_omega_a : v0.half_omega_b;
        const double wm = in_a ? vm.half_omega_a : vm.half_omega_b;
        const double w1 = in_a ? v1.half_omega_a : v1.half_omega_b;
        const SiteAmplitude y = e.sites[j];
        const SiteAmplitude k1 = amplitude_rhs(y, v0.delta - shift[j], w0, 0.5 * gamma);
        const SiteAmplitude k2 = amplitude_rhs(axpy(y, 0.5 * dt_us, k1), vm.delta - shift[j], wm, 0.5 * gamma);
        const SiteAmplitude k3 = amplitude_rhs(axpy(y, 0.5 * dt_us, k2), vm.delta - shift[j], wm, 0.5 * gamma);
        const SiteAmplitude k4 = amplitude_rhs(axpy(y, dt_us, k3), v1.delta - shift[j], w1, 0.5 * gamma);
        SiteAmplitude next{y.c0 + (dt_us / 6.0) * (k1.c0 + 2.0 * k2.c0 + 2.0 * k3.c0 + k4.c0),
                           y.c1 + (dt_us / 6.0) * (k1.c1 + 2.0 * k2.c1 + 2.0 * k3.c1 + k4.c1)};

        const double p_jump = gamma * pops[j] * dt_us;
        if (p_jump > 0.0 && stream.uniform(j) < p_jump) {
            next = {cplx{1.0, 0.0}, cplx{0.0, 0.0}};
            ++n_jumps;
            if (jumps) jumps->push_back({stream.trajectory, t + dt_us, j});
        } else {
            const double norm = std::sqrt(std::norm(next.c0) + std::norm(next.c1));
            if (!std::isfinite(norm) || norm == 0.0) throw NumericalInstability(t, fmt::format("site {} lost its norm", j));
            next.c0 /= norm;
            next.c1 /= norm;
        }
        e.sites[j] = next;
    }
    e.t_us = t + dt_us;
    const double err = e.max_norm_error();
    if (err > abort_norm_error) throw NumericalInstability(e.t_us, fmt::format("site norm error {:.3e}", err));
    return n_jumps;
}

RunResult run_ensemble(const Geometry& g, const Drive& drive, double gamma_mhz, const TrajectorySpec& spec,
                       std::string_view initial, double t_final_us, std::size_t threads) {
    if (initial.size() != g.size()) throw InvalidConfig("initial", "bitstring length must equal the site count");
    if (drive.n_sites() != g.size()) throw std::invalid_argument("run_ensemble: drive and geometry disagree on site count");
    spec.validate(drive, g.size(), gamma_mhz, t_final_us);
    const std::size_t n_total = whole_steps(t_final_us, spec.dt_us, "solver.dt_us");
    const std::size_t n_chunks = (spec.n_trajectories + chunk_size - 1) / chunk_size;
    const std::size_t n_sites = g.size();

    std::vector<Accumulator> parts(n_chunks);
    std::vector<std::vector<JumpRecord>> chunk_jumps(n_chunks);
    std::vector<double> chunk_norm_error(n_chunks, 0.0);
    std::vector<InvariantResiduals> chunk_range(n_chunks);
    std::vector<double> times;
    std::vector<std::vector<double>> times_per_chunk(n_chunks);

    parallel_for(n_chunks, threads, [&](std::size_t c) {
        const std::size_t first = c * chunk_size;
        const std::size_t last = std::min(spec.n_trajectories, first + chunk_size);
        Accumulator acc;
        InvariantResiduals range;
        range.min_population = 1.0;
        range.max_population = 0.0;
        for (std::size_t traj = first; traj < last; ++traj) {
            TrajectoryRecord rec = simulate_trajectory(g, drive, gamma_mhz, spec, initial, n_total, traj);
            if (acc.mean.empty()) {
                acc.mean.assign(rec.times.size() * n_sites, 0.0);
                acc.m2.assign(rec.times.size() * n_sites, 0.0);
                times_per_chunk[c] = rec.times;
            }
            for (std::size_t s = 0; s < rec.pops.size(); ++s) {
                update_population_range(range, rec.pops[s]);
                for (std::size_t j = 0; j < n_sites; ++j) acc.add(s * n_sites + j, rec.pops[s][j]);
            }
            ++acc.count;
            chunk_norm_error[c] = std::max(chunk_norm_error[c], rec.max_norm_error);
            chunk_jumps[c].insert(chunk_jumps[c].end(), rec.jumps.begin(), rec.jumps.end());
        }
        parts[c] = std::move(acc);
        chunk_range[c] = range;
    });

    const Accumulator total = reduce_pairwise(parts, 0, n_chunks);
    const double count = static_cast<double>(total.count);
    RunResult result;
    result.variant = "mf_qmc";
    result.initial = std::string(initial);
    result.times_us = times_per_chunk.front();
    const std::size_t n_samples = result.times_us.size();
    result.populations.assign(n_samples, std::vector<double>(n_sites));
    result.std_errors.assign(n_samples, std::vector<double>(n_sites));
    for (std::size_t s = 0; s < n_samples; ++s) {
        for (std::size_t j = 0; j < n_sites; ++j) {
            const double var = total.count > 1 ? total.m2[s * n_sites + j] / (count - 1.0) : 0.0;
            result.populations[s][j] = total.mean[s * n_sites + j];
            result.std_errors[s][j] = std::sqrt(var / count);
        }
    }
    result.residuals.min_population = 1.0;
    result.residuals.max_population = 0.0;
    for (std::size_t c = 0; c < n_chunks; ++c) {
        result.residuals.max_trace_error = std::max(result.residuals.max_trace_error, chunk_norm_error[c]);
        result.residuals.min_population = std::min(result.residuals.min_population, chunk_range[c].min_population);
        result.residuals.max_population = std::max(result.residuals.max_population, chunk_range[c].max_population);
        result.jumps.insert(result.jumps.end(), chunk_jumps[c].begin(), chunk_jumps[c].end());
    }
    return result;
}

RunResult run_trajectory(const Geometry& g, const Drive& drive, double gamma_mhz, const TrajectorySpec& spec,
                         std::string_view initial, double t_final_us, std::size_t trajectory) {
    if (initial.size() != g.size()) throw InvalidConfig("initial", "bitstring length must equal the site count");
    spec.validate(drive, g.size(), gamma_mhz, t_final_us);
    const std::size_t n_total = whole_steps(t_final_us, spec.dt_us, "solver.dt_us");
    TrajectorySpec logged = spec;
    logged.record_jumps = true;
    TrajectoryRecord rec = simulate_trajectory(g, drive, gamma_mhz, logged, initial, n_total, trajectory);
    RunResult result;
    result.variant = "mf_qmc";
    result.initial = std::string(initial);
    result.times_us = std::move(rec.times);
    result.populations = std::move(rec.pops);
    result.jumps = std::move(rec.jumps);
    result.residuals.max_trace_error = rec.max_norm_error;
    result.residuals.min_population = 1.0;
    for (const auto& p : result.populations) update_population_range(result.residuals, p);
    return result;
}

RunResult run_mfme(const Geometry& g, const Drive& drive, double gamma_mhz, std::string_view initial,
                   double t_final_us, double dt_us, std::size_t output_stride) {
    if (initial.size() != g.size()) throw InvalidConfig("initial", "bitstring length must equal the site count");
    if (drive.n_sites() != g.size()) throw std::invalid_argument("run_mfme: drive and geometry disagree on site count");
    TrajectorySpec check;
    check.dt_us = dt_us;
    check.output_stride = output_stride;
    check.validate(drive, 0, gamma_mhz, t_final_us);
    const std::size_t n_total = whole_steps(t_final_us, dt_us, "solver.dt_us");
    const std::size_t n = g.size();
    const double gamma = to_angular(gamma_mhz);
    const auto groups = drive.groups();

    validate_bitstring(initial);
    if (initial.size() != n) throw InvalidConfig("initial", "bitstring length must equal the site count");
    std::vector<SiteDensity> rho(n);
    for (std::size_t j = 0; j < n; ++j)
        if (initial[j] == '1') rho[j] = {0.0, 1.0, cplx{0.0, 0.0}};

    RunResult result;
    result.variant = "mf_me";
    result.initial = std::string(initial);
    result.residuals.min_population = 1.0;
    std::vector<double> pops(n), shift(n);
    auto record = [&](std::size_t k) {
        const double t = static_cast<double>(k) * dt_us;
        for (std::size_t j = 0; j < n; ++j) {
            pops[j] = rho[j].r11;
            const double trace_error = std::abs(rho[j].r00 + rho[j].r11 - 1.0);
            if (!std::isfinite(trace_error) || trace_error > abort_norm_error)
                throw NumericalInstability(t, fmt::format("site {} trace error {:.3e}", j, trace_error));
            result.residuals.max_trace_error = std::max(result.residuals.max_trace_error, trace_error);
        }
        update_population_range(result.residuals, pops);
        result.times_us.push_back(t);
        result.populations.push_back(pops);
    };

    record(0);
    for (std::size_t k = 0; k < n_total; ++k) {
        const double t = static_cast<double>(k) * dt_us;
        const std::size_t segment = drive.step_index(t + 0.5 * dt_us);
        const DriveValues v0 = drive_values(drive, t, segment);
        const DriveValues vm = drive_values(drive, t + 0.5 * dt_us, segment);
        const DriveValues v1 = drive_values(drive, t + dt_us, segment);
        for (std::size_t j = 0; j < n; ++j) pops[j] = rho[j].r11;
        mean_field_shifts(g, pops, shift);
        for (std::size_t j = 0; j < n; ++j) {
            const bool in_a = groups[j] == SiteGroup::a;
            const double w0 = in_a ? v0.half_omega_a : v0.half_omega_b;
            const double wm = in_a ? vm.half_omega_a : vm.half_omega_b;
            const double w1 = in_a ? v1.half_omega_a : v1.half_omega_b;
            const SiteDensity y = rho[j];
            const SiteDensity k1 = density_rhs(y, v0.delta - shift[j], w0, gamma);
            const SiteDensity k2 = density_rhs(axpy(y, 0.5 * dt_us, k1), vm.delta - shift[j], wm, gamma);
            const SiteDensity k3 = density_rhs(axpy(y, 0.5 * dt_us, k2), vm.delta - shift[j], wm, gamma);
            const SiteDensity k4 = density_rhs(axpy(y, dt_us, k3), v1.delta - shift[j], w1, gamma);
            rho[j] = {y.r00 + (dt_us / 6.0) * (k1.r00 + 2.0 * k2.r00 + 2.0 * k3.r00 + k4.r00),
                      y.r11 + (dt_us / 6.0) * (k1.r11 + 2.0 * k2.r11 + 2.0 * k3.r11 + k4.r11),
                      y.r01 + (dt_us / 6.0) * (k1.r01 + 2.0 * k2.r01 + 2.0 * k3.r01 + k4.r01)};
        }
        if ((k + 1) % output_stride == 0 || k + 1 == n_total) record(k + 1);
    }
    return result;
}

}  // namespace rydfac
