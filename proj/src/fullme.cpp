#include "rydfac/fullme.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>
#include <fmt/format.h>

#include "rydfac/errors.hpp"
#include "rydfac/parallel.hpp"
#include "rydfac/units.hpp"

namespace rydfac {
namespace {

// Tolerances past which integration is aborted as unstable. Acceptance
// tolerances are tighter and checked against the recorded residuals.
constexpr double abort_trace_error = 1e-6;
constexpr double abort_hermiticity_error = 1e-6;
constexpr std::size_t eigenvalue_check_max_sites = 10;

std::size_t checked_ratio(double numerator, double denominator, const char* field, const char* what) {
    const double ratio = numerator / denominator;
    const double rounded = std::round(ratio);
    if (rounded < 1.0 || std::abs(ratio - rounded) > 1e-6 * std::max(1.0, rounded))
        throw InvalidConfig(field, what);
    return static_cast<std::size_t>(rounded);
}

// Interleaved (re, im) views keep the hot loops free of checked complex multiplies.
double* as_doubles(std::span<cplx> v) { return reinterpret_cast<double*>(v.data()); }

// out = -i H psi
void schroedinger_rhs(const Hamiltonian& h, const Hamiltonian::Coefficients& c, std::span<const double> energy,
                      const double* __restrict psi, double* __restrict out) {
    const std::size_t dim = h.dim();
    for (std::size_t a = 0; a < dim; ++a) {
        // -i E (x + iy) = E y - i E x
        out[2 * a] = energy[a] * psi[2 * a + 1];
        out[2 * a + 1] = -energy[a] * psi[2 * a];
    }
    for (std::size_t j = 0; j < h.n_sites(); ++j) {
        const double w = c.half_omega[j];
        if (w == 0.0) continue;
        const std::size_t bit = std::size_t{1} << j;
        for (std::size_t a = 0; a < dim; ++a) {
            const std::size_t f = a ^ bit;
            out[2 * a] += w * psi[2 * f + 1];
            out[2 * a + 1] -= w * psi[2 * f];
        }
    }
}

// out = -i [H, rho] + Gamma sum_j (s-_j rho s+_j - 1/2 {n_j, rho}), row-major rho.
// rho is Hermitian, so only b >= a is computed and the lower triangle mirrored.
void lindblad_rhs(const Hamiltonian& h, const Hamiltonian::Coefficients& c, std::span<const double> energy,
                  double gamma, const double* __restrict rho, double* __restrict out) {
    const std::size_t dim = h.dim();
    const std::size_t n = h.n_sites();
    const std::span<const std::uint8_t> nexc = h.excitations();
    for (std::size_t a = 0; a < dim; ++a) {
        const double* __restrict ra = rho + 2 * a * dim;
        double* __restrict oa = out + 2 * a * dim;
        const double ea = energy[a];
        const double na = nexc[a];
        for (std::size_t b = a; b < dim; ++b) {
            const double decay = -0.5 * gamma * (na + nexc[b]);
            const double phase = energy[b] - ea;
            const double x = ra[2 * b];
            const double y = ra[2 * b + 1];
            oa[2 * b] = x * decay - y * phase;
            oa[2 * b + 1] = x * phase + y * decay;
        }
        for (std::size_t j = 0; j < n; ++j) {
            const double w = c.half_omega[j];
            if (w == 0.0) continue;
            const std::size_t half = std::size_t{1} << j;
            // -i w rho_{a^j, b}
            const double* __restrict rf = rho + 2 * (a ^ half) * dim;
            for (std::size_t b = a; b < dim; ++b) {
                oa[2 * b] += w * rf[2 * b + 1];
                oa[2 * b + 1] -= w * rf[2 * b];
            }
            // +i w rho_{a, b^j}
            for (std::size_t blk = a & ~(2 * half - 1); blk < dim; blk += 2 * half) {
                for (std::size_t k = blk; k < blk + half; ++k) {
                    const std::size_t hi = k + half;
                    if (k >= a) {
                        oa[2 * k] -= w * ra[2 * hi + 1];
                        oa[2 * k + 1] += w * ra[2 * hi];
                    }
                    if (hi >= a) {
                        oa[2 * hi] -= w * ra[2 * k + 1];
                        oa[2 * hi + 1] += w * ra[2 * k];
                    }
                }
            }
        }
        if (gamma == 0.0) continue;
        for (std::size_t j = 0; j < n; ++j) {
            const std::size_t half = std::size_t{1} << j;
            if (a & half) continue;
            // Gamma rho_{a|j, b|j} for b with bit j clear
            const double* __restrict rs = rho + 2 * (a | half) * dim;
            for (std::size_t blk = a & ~(2 * half - 1); blk < dim; blk += 2 * half) {
                for (std::size_t k = std::max(blk, a); k < blk + half; ++k) {
                    oa[2 * k] += gamma * rs[2 * (k + half)];
                    oa[2 * k + 1] += gamma * rs[2 * (k + half) + 1];
                }
            }
        }
    }
    for (std::size_t a = 0; a < dim; ++a) {
        out[2 * (a * dim + a) + 1] = 0.0;
        for (std::size_t b = a + 1; b < dim; ++b) {
            out[2 * (b * dim + a)] = out[2 * (a * dim + b)];
            out[2 * (b * dim + a) + 1] = -out[2 * (a * dim + b) + 1];
        }
    }
}

// Classical RK4 on a flat real vector, drive formulas fixed to the step that
// contains the interval midpoint.
class Rk4 {
public:
    explicit Rk4(std::size_t len) : k_(len), acc_(len), tmp_(len) {}

    template <typename Rhs>
    void step(std::vector<double>& y, double t, double dt, Rhs&& rhs) {
        const std::size_t len = y.size();
        rhs(t, y.data(), k_.data());
        for (std::size_t i = 0; i < len; ++i) {
            acc_[i] = y[i] + (dt / 6.0) * k_[i];
            tmp_[i] = y[i] + (0.5 * dt) * k_[i];
        }
        rhs(t + 0.5 * dt, tmp_.data(), k_.data());
        for (std::size_t i = 0; i < len; ++i) {
            acc_[i] += (dt / 3.0) * k_[i];
            tmp_[i] = y[i] + (0.5 * dt) * k_[i];
        }
        rhs(t + 0.5 * dt, tmp_.data(), k_.data());
        for (std::size_t i = 0; i < len; ++i) {
            acc_[i] += (dt / 3.0) * k_[i];
            tmp_[i] = y[i] + dt * k_[i];
        }
        rhs(t + dt, tmp_.data(), k_.data());
        for (std::size_t i = 0; i < len; ++i) y[i] = acc_[i] + (dt / 6.0) * k_[i];
    }

private:
    std::vector<double> k_, acc_, tmp_;
};

}  // namespace

void EvolveSpec::validate(const Drive& drive) const {
    if (!(dt_us > 0.0)) throw InvalidConfig("solver.dt_us", "time step must be positive");
    if (!(t_final_us > 0.0)) throw InvalidConfig("solver.t_final_us", "final time must be positive");
    if (output_stride == 0) throw InvalidConfig("outputs.stride", "stride must be at least 1");
    if (!(gamma_mhz >= 0.0)) throw InvalidConfig("decay.gamma_mhz", "decay rate must be non-negative");
    if (drive.is_rap() && dt_us > drive.cycle_us() / 2000.0 * (1.0 + 1e-12))
        throw InvalidConfig("solver.dt_us", "RAP runs need dt <= T0/2000");
    checked_ratio(t_final_us, dt_us, "solver.dt_us", "final time must be a whole number of steps");
    checked_ratio(drive.step_duration_us(), dt_us, "solver.dt_us", "drive step must be a whole number of steps");
}

std::size_t default_substeps(const Geometry& g, const Drive& drive) {
    if (!drive.is_rap()) return 5000;
    const RapSchedule& s = drive.rap();
    double f_max = s.delta0_mhz + std::abs(s.delta_error_mhz) + s.amplitude_mhz;
    f_max = std::max(f_max, s.omega0_mhz + std::abs(s.omega_error_mhz));
    for (const Pair& p : g.pairs()) f_max = std::max(f_max, std::abs(p.v_mhz));
    // Rounded up to a multiple of 100 so common sampling rates divide it.
    const double needed = std::ceil(drive.step_duration_us() * to_angular(f_max) / 0.025 / 100.0) * 100.0;
    return std::max<std::size_t>(10000, static_cast<std::size_t>(needed));
}

double default_dt(const Geometry& g, const Drive& drive) {
    return drive.step_duration_us() / static_cast<double>(default_substeps(g, drive));
}

Hamiltonian::Hamiltonian(const Geometry& g, Drive drive) : n_sites_(g.size()), drive_(std::move(drive)) {
    if (drive_.n_sites() != n_sites_) throw std::invalid_argument("Hamiltonian: drive and geometry disagree on site count");
    if (n_sites_ > max_pure_sites)
        throw ResourceRefusal(fmt::format("exact solver refuses {} sites (limit {})", n_sites_, max_pure_sites));
    const std::size_t d = dim();
    interaction_.assign(d, 0.0);
    excitations_.assign(d, 0);
    // Build from the state with the lowest set bit removed.
    for (std::size_t a = 1; a < d; ++a) {
        const std::size_t low = static_cast<std::size_t>(std::countr_zero(a));
        const std::size_t rest = a & (a - 1);
        double e = interaction_[rest];
        for (const Neighbor& nb : g.neighbors(low))
            if (rest >> nb.site & 1U) e += to_angular(nb.v_mhz);
        interaction_[a] = e;
        excitations_[a] = static_cast<std::uint8_t>(excitations_[rest] + 1);
    }
}

void Hamiltonian::coefficients(double t_us, std::size_t step, Coefficients& c) const {
    c.delta = to_angular(drive_.delta_mhz(t_us, step));
    c.half_omega.resize(n_sites_);
    const double wa = 0.5 * to_angular(drive_.group_omega_mhz(SiteGroup::a, t_us, step));
    const double wb = 0.5 * to_angular(drive_.group_omega_mhz(SiteGroup::b, t_us, step));
    const auto groups = drive_.groups();
    for (std::size_t j = 0; j < n_sites_; ++j) c.half_omega[j] = groups[j] == SiteGroup::a ? wa : wb;
}

Hamiltonian::Coefficients Hamiltonian::coefficients(double t_us) const {
    Coefficients c;
    coefficients(t_us, drive_.step_index(t_us), c);
    return c;
}

void Hamiltonian::diagonal(double delta, std::span<double> out) const {
    const double n = static_cast<double>(n_sites_);
    for (std::size_t a = 0; a < out.size(); ++a)
        out[a] = -0.5 * delta * (2.0 * excitations_[a] - n) + interaction_[a];
}

void Hamiltonian::apply(double t_us, std::span<const cplx> in, std::span<cplx> out) const {
    apply(coefficients(t_us), in, out);
}

void Hamiltonian::apply(const Coefficients& c, std::span<const cplx> in, std::span<cplx> out) const {
    const std::size_t d = dim();
    if (in.size() != d || out.size() != d)
        throw std::invalid_argument(fmt::format("apply_hamiltonian: expected vectors of length {}", d));
    std::vector<double> energy(d);
    diagonal(c.delta, energy);
    for (std::size_t a = 0; a < d; ++a) out[a] = energy[a] * in[a];
    for (std::size_t j = 0; j < n_sites_; ++j) {
        const double w = c.half_omega[j];
        if (w == 0.0) continue;
        const std::size_t bit = std::size_t{1} << j;
        for (std::size_t a = 0; a < d; ++a) out[a] += w * in[a ^ bit];
    }
}

RunResult evolve(const Geometry& g, const Drive& drive, const EvolveSpec& spec, const ManyBodyState& initial) {
    spec.validate(drive);
    if (initial.n_sites() != g.size())
        throw std::invalid_argument("evolve: initial state and geometry disagree on site count");

    const double gamma = to_angular(spec.gamma_mhz);
    const bool pure = gamma == 0.0 && initial.representation() == Representation::pure;
    ManyBodyState state = pure ? initial : initial.to_density();
    const Hamiltonian h(g, drive);
    const std::size_t dim = h.dim();
    const std::size_t n_total = checked_ratio(spec.t_final_us, spec.dt_us, "solver.dt_us", "bad dt");

    std::vector<double> y(as_doubles(state.data()), as_doubles(state.data()) + 2 * state.data().size());
    Rk4 rk4(y.size());
    Hamiltonian::Coefficients coeff;
    std::vector<double> energy(dim);
    std::size_t segment = 0;
    // Pure states carry a global phase rotating at the mean diagonal energy,
    // which can be hundreds of rad/us for a few atoms. Removing it per step
    // leaves populations untouched and keeps RK4's amplitude error small.
    double offset = 0.0;
    auto rhs = [&](double t, const double* in, double* out) {
        h.coefficients(t, segment, coeff);
        h.diagonal(coeff.delta, energy);
        if (offset != 0.0)
            for (double& e : energy) e -= offset;
        if (pure)
            schroedinger_rhs(h, coeff, energy, in, out);
        else
            lindblad_rhs(h, coeff, energy, gamma, in, out);
    };

    RunResult result;
    result.variant = "full_me";
    {
        const std::vector<double> probs = initial.basis_probabilities();
        const auto it = std::find(probs.begin(), probs.end(), 1.0);
        if (it != probs.end()) {
            const auto a = static_cast<std::size_t>(it - probs.begin());
            for (std::size_t j = 0; j < g.size(); ++j) result.initial += (a >> j & 1U) ? '1' : '0';
        }
    }
    result.residuals.min_population = 1.0;
    result.residuals.max_population = 0.0;
    auto record = [&](std::size_t k) {
        const double t = static_cast<double>(k) * spec.dt_us;
        std::copy(y.begin(), y.end(), as_doubles(state.data()));
        for (double v : y)
            if (!std::isfinite(v)) throw NumericalInstability(t, "non-finite amplitude");
        const double trace_error = std::abs(state.trace() - 1.0);
        const double herm_error = state.hermiticity_residual();
        if (trace_error > abort_trace_error) throw NumericalInstability(t, fmt::format("trace drifted by {:.3e}", trace_error));
        if (herm_error > abort_hermiticity_error)
            throw NumericalInstability(t, fmt::format("hermiticity lost by {:.3e}", herm_error));
        auto& res = result.residuals;
        res.max_trace_error = std::max(res.max_trace_error, trace_error);
        res.max_hermiticity_error = std::max(res.max_hermiticity_error, herm_error);
        std::vector<double> pops = state.populations();
        for (double p : pops) {
            res.min_population = std::min(res.min_population, p);
            res.max_population = std::max(res.max_population, p);
        }
        result.times_us.push_back(t);
        result.populations.push_back(std::move(pops));
    };

    record(0);
    for (std::size_t k = 0; k < n_total; ++k) {
        const double t = static_cast<double>(k) * spec.dt_us;
        segment = drive.step_index(t + 0.5 * spec.dt_us);
        if (pure) {
            h.coefficients(t + 0.5 * spec.dt_us, segment, coeff);
            h.diagonal(coeff.delta, energy);
            double mean = 0.0;
            for (std::size_t a = 0; a < dim; ++a) mean += energy[a] * (y[2 * a] * y[2 * a] + y[2 * a + 1] * y[2 * a + 1]);
            offset = mean;
        }
        rk4.step(y, t, spec.dt_us, rhs);
        if ((k + 1) % spec.output_stride == 0 || k + 1 == n_total) record(k + 1);
    }

    if (!pure && state.n_sites() <= eigenvalue_check_max_sites) result.residuals.min_eigenvalue = state.min_eigenvalue();
    result.final_state = std::move(state);
    return result;
}

std::vector<DressedLevels> dressed_spectrum(const Geometry& g, std::pair<double, double> omega_mhz,
                                            std::span<const double> delta_grid_mhz) {
    if (g.size() != 2) throw std::invalid_argument("dressed_spectrum needs exactly two sites");
    const double v = g.pairs().empty() ? 0.0 : g.pairs().front().v_mhz;
    std::vector<DressedLevels> out;
    out.reserve(delta_grid_mhz.size());
    for (double delta : delta_grid_mhz) {
        Eigen::Matrix4d h = Eigen::Matrix4d::Zero();
        for (int a = 0; a < 4; ++a) {
            const int n = std::popcount(static_cast<unsigned>(a));
            h(a, a) = -0.5 * delta * (2.0 * n - 2.0) + (a == 3 ? v : 0.0);
            h(a, a ^ 1) = 0.5 * omega_mhz.first;
            h(a, a ^ 2) = 0.5 * omega_mhz.second;
        }
        Eigen::SelfAdjointEigenSolver<Eigen::Matrix4d> solver(h, Eigen::EigenvaluesOnly);
        DressedLevels lv;
        lv.delta_mhz = delta;
        for (int i = 0; i < 4; ++i) lv.energies_mhz[static_cast<std::size_t>(i)] = solver.eigenvalues()(i);
        out.push_back(lv);
    }
    return out;
}

DisorderAverage disorder_average(const Geometry& g, const DisorderSpec& disorder, const Drive& drive,
                                 const EvolveSpec& spec, const ManyBodyState& initial, std::size_t threads) {
    if (disorder.n_realizations == 0) throw InvalidConfig("disorder.realizations", "need at least one realization");
    std::vector<RunResult> runs(disorder.n_realizations);
    parallel_for(disorder.n_realizations, threads, [&](std::size_t k) {
        try {
            runs[k] = evolve(sample_disorder(g, disorder, k), drive, spec, initial);
            runs[k].final_state.reset();
        } catch (const NumericalInstability& e) {
            throw NumericalInstability(e.time_us(), fmt::format("realization {}: {}", k, e.what()));
        }
    });

    const std::size_t n_real = runs.size();
    const std::size_t n_samples = runs.front().n_samples();
    const std::size_t n_sites = runs.front().n_sites();
    DisorderAverage out;
    RunResult& mean = out.mean;
    mean.variant = runs.front().variant;
    mean.times_us = runs.front().times_us;
    mean.populations.assign(n_samples, std::vector<double>(n_sites, 0.0));
    mean.std_errors.assign(n_samples, std::vector<double>(n_sites, 0.0));
    mean.residuals = runs.front().residuals;
    for (const RunResult& r : runs) {
        auto& res = mean.residuals;
        res.max_trace_error = std::max(res.max_trace_error, r.residuals.max_trace_error);
        res.max_hermiticity_error = std::max(res.max_hermiticity_error, r.residuals.max_hermiticity_error);
        res.min_population = std::min(res.min_population, r.residuals.min_population);
        res.max_population = std::max(res.max_population, r.residuals.max_population);
        res.min_eigenvalue = std::min(res.min_eigenvalue, r.residuals.min_eigenvalue);
        out.final_populations.push_back(r.populations.back());
    }
    for (std::size_t s = 0; s < n_samples; ++s) {
        for (std::size_t j = 0; j < n_sites; ++j) {
            // Offsets from the first realization keep identical runs exact.
            const double ref = runs.front().populations[s][j];
            double sum = 0.0;
            for (const RunResult& r : runs) sum += r.populations[s][j] - ref;
            const double m = ref + sum / static_cast<double>(n_real);
            double ss = 0.0;
            for (const RunResult& r : runs) ss += (r.populations[s][j] - m) * (r.populations[s][j] - m);
            mean.populations[s][j] = m;
            mean.std_errors[s][j] =
                n_real > 1 ? std::sqrt(ss / static_cast<double>(n_real - 1) / static_cast<double>(n_real)) : 0.0;
        }
    }
    return out;
}

}  // namespace rydfac
