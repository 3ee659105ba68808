#include "rydfac/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <stdexcept>

#include <fmt/format.h>
#include <fmt/ostream.h>

#include "rydfac/errors.hpp"
#include "rydfac/parallel.hpp"
#include "rydfac/units.hpp"

namespace rydfac {
namespace {

constexpr double boundary_tol_us = 1e-9;

std::size_t steps_covered(const RunResult& r, double step_duration_us) {
    if (r.times_us.empty()) throw std::invalid_argument("run has no samples");
    if (!(step_duration_us > 0.0)) throw std::invalid_argument("step duration must be positive");
    return static_cast<std::size_t>(std::floor(r.times_us.back() / step_duration_us + 1e-9));
}

std::string join_steps(const std::vector<std::size_t>& steps) {
    return fmt::format("{}", fmt::join(steps, ";"));
}

double nominal_delta0(const Drive& d) { return d.is_rap() ? d.rap().delta0_mhz : d.rabi().delta0_mhz; }
double nominal_omega0(const Drive& d) { return d.is_rap() ? d.rap().omega0_mhz : d.rabi().omega0_mhz; }

}  // namespace

double gain(std::span<const double> populations) {
    double g = 0.0;
    for (double p : populations) g += p;
    return g;
}

double decay_probability_per_step(double gamma_mhz, double t0_us) { return to_angular(gamma_mhz) * t0_us / 2.0; }

double gain_approx(std::size_t steps, double gamma_mhz, double t0_us) {
    const double s = static_cast<double>(steps);
    const double p = decay_probability_per_step(gamma_mhz, t0_us);
    return 2.0 * s + 1.0 - p * (s * s + (2.0 / 3.0) * s * s * s - (2.0 / 3.0) * s - 1.0);
}

std::pair<std::size_t, double> gain_approx_argmax(double gamma_mhz, double t0_us, std::size_t s_max) {
    std::pair<std::size_t, double> best{1, gain_approx(1, gamma_mhz, t0_us)};
    for (std::size_t s = 2; s <= s_max; ++s) {
        const double g = gain_approx(s, gamma_mhz, t0_us);
        if (g > best.second) best = {s, g};
    }
    return best;
}

std::vector<double> single_decay_weights(std::size_t steps) {
    std::vector<double> w;
    const double s = static_cast<double>(steps);
    for (std::size_t i = 1; i < steps; ++i) {
        const double x = static_cast<double>(i);
        w.push_back(3.0 * (x + 1.0) + x + 2.0 * (2.0 * x + 1.0) * (s - x - 1.0));
    }
    return w;
}

double gain_exact_single_decay(std::size_t steps, double p) {
    if (steps == 0) throw std::invalid_argument("gain_exact_single_decay needs S >= 1");
    if (!(p >= 0.0 && p <= 1.0)) throw std::invalid_argument("decay probability must lie in [0, 1]");
    const double s = static_cast<double>(steps);
    double g = (2.0 * s + 1.0) * (1.0 - std::pow(1.0 - p, s - 1.0) * p);
    const std::vector<double> w = single_decay_weights(steps);
    for (std::size_t i = 1; i < steps; ++i) g -= p * w[i - 1] * std::pow(1.0 - p, static_cast<double>(i) - 1.0);
    return g;
}

std::string_view to_string(GainVariant v) {
    switch (v) {
        case GainVariant::full_me: return "full_me";
        case GainVariant::mf_qmc: return "mf_qmc";
        case GainVariant::mf_me: return "mf_me";
        case GainVariant::eq12: return "eq12";
        case GainVariant::eqs2: return "eqs2";
    }
    return "unknown";
}

GainVariant gain_variant_from_tag(std::string_view tag) {
    for (GainVariant v : {GainVariant::full_me, GainVariant::mf_qmc, GainVariant::mf_me, GainVariant::eq12, GainVariant::eqs2})
        if (to_string(v) == tag) return v;
    throw std::invalid_argument(fmt::format("unknown gain variant '{}'", tag));
}

double GainSeries::at_step(std::size_t step) const {
    for (const GainPoint& p : points)
        if (p.step == step) return p.gain;
    throw std::out_of_range(fmt::format("gain series has no step {}", step));
}

GainSeries gain_series(const RunResult& r, double step_duration_us) {
    GainSeries out;
    out.variant = gain_variant_from_tag(r.variant);
    const std::size_t n = steps_covered(r, step_duration_us);
    for (std::size_t s = 0; s <= n; ++s) {
        const double t = static_cast<double>(s) * step_duration_us;
        std::size_t k = 0;
        try {
            k = r.sample_at(t, boundary_tol_us);
        } catch (const std::out_of_range&) {
            throw std::invalid_argument(fmt::format("run is not sampled at the end of step {} (t = {} us)", s, t));
        }
        out.points.push_back({s, t, gain(r.populations[k])});
    }
    return out;
}

GainSeries gain_series_eq12(std::size_t max_step, double gamma_mhz, double t0_us) {
    GainSeries out;
    out.variant = GainVariant::eq12;
    for (std::size_t s = 0; s <= max_step; ++s)
        out.points.push_back({s, static_cast<double>(s) * t0_us / 2.0, gain_approx(s, gamma_mhz, t0_us)});
    return out;
}

GainSeries gain_series_eqs2(std::size_t max_step, double gamma_mhz, double t0_us) {
    GainSeries out;
    out.variant = GainVariant::eqs2;
    const double p = decay_probability_per_step(gamma_mhz, t0_us);
    out.points.push_back({0, 0.0, 1.0});
    for (std::size_t s = 1; s <= max_step; ++s)
        out.points.push_back({s, static_cast<double>(s) * t0_us / 2.0, gain_exact_single_decay(s, p)});
    return out;
}

void write_gain_csv(std::ostream& os, std::span<const GainSeries> series) {
    os << "step,t_us,gain,variant\n";
    for (const GainSeries& s : series)
        for (const GainPoint& p : s.points) fmt::print(os, "{},{:.12g},{:.12g},{}\n", p.step, p.t_us, p.gain, to_string(s.variant));
}

double dark_count(const RunResult& r) {
    if (r.initial.empty() || r.initial.find_first_not_of('0') != std::string::npos)
        throw std::invalid_argument("dark_count needs a run started from the all-zero state");
    if (r.populations.empty()) throw std::invalid_argument("run has no samples");
    return gain(r.final_populations());
}

PatternLabeling label_pattern(const RunResult& r, const Geometry& g, double step_duration_us, double threshold,
                              double hysteresis, std::size_t n_steps) {
    if (r.n_sites() != g.size()) throw std::invalid_argument("label_pattern: run and geometry disagree on site count");
    const std::size_t covered = steps_covered(r, step_duration_us);
    if (n_steps == 0) n_steps = covered;
    if (n_steps > covered)
        throw std::invalid_argument(fmt::format("run too short: {} steps requested, {} available", n_steps, covered));

    PatternLabeling out;
    out.threshold = threshold;
    out.hysteresis = hysteresis;
    out.n_steps = n_steps;
    std::vector<bool> excited(g.size());
    for (std::size_t s = 0; s <= n_steps; ++s) {
        std::size_t k = 0;
        try {
            k = r.sample_at(static_cast<double>(s) * step_duration_us, boundary_tol_us);
        } catch (const std::out_of_range&) {
            throw std::invalid_argument(fmt::format("run is not sampled at the end of step {}", s));
        }
        const auto& pops = r.populations[k];
        if (s == 0) {
            for (std::size_t j = 0; j < g.size(); ++j) {
                SiteLabel lab;
                lab.site = j;
                lab.row = g.dimension() == 2 ? g.row(j) : 0;
                lab.col = g.dimension() == 2 ? g.col(j) : j;
                excited[j] = pops[j] >= threshold;
                if (excited[j]) lab.first_step = 0;
                out.sites.push_back(std::move(lab));
            }
            continue;
        }
        for (std::size_t j = 0; j < g.size(); ++j) {
            SiteLabel& lab = out.sites[j];
            if (!excited[j] && pops[j] > threshold + hysteresis) {
                excited[j] = true;
                if (lab.first_step < 0)
                    lab.first_step = static_cast<int>(s);
                else
                    lab.reexcite_steps.push_back(s);
            } else if (excited[j] && pops[j] < threshold - hysteresis) {
                excited[j] = false;
                lab.deexcite_steps.push_back(s);
            }
        }
    }
    return out;
}

void write_pattern_csv(std::ostream& os, const PatternLabeling& p) {
    os << "site,row,col,first_step,deexcite_steps,reexcite_steps\n";
    for (const SiteLabel& s : p.sites) {
        const std::string first = s.first_step < 0 ? std::string() : std::to_string(s.first_step);
        fmt::print(os, "{},{},{},{},{},{}\n", s.site, s.row, s.col, first, join_steps(s.deexcite_steps),
                   join_steps(s.reexcite_steps));
    }
}

std::vector<double> linspace(double lo, double hi, std::size_t n) {
    if (n == 0) return {};
    if (n == 1) return {lo};
    std::vector<double> v(n);
    for (std::size_t i = 0; i < n; ++i) v[i] = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(n - 1);
    return v;
}

std::vector<ScanPoint> scan_parameters(const Geometry& g, const Drive& drive, const EvolveSpec& spec,
                                       const ManyBodyState& initial, std::span<const double> delta_fracs,
                                       std::span<const double> omega_fracs, std::size_t site, std::size_t threads) {
    if (site >= g.size()) throw std::invalid_argument("scan_parameters: site out of range");
    const double delta0 = nominal_delta0(drive);
    const double omega0 = nominal_omega0(drive);
    EvolveSpec final_only = spec;
    final_only.output_stride = static_cast<std::size_t>(std::llround(spec.t_final_us / spec.dt_us));
    std::vector<ScanPoint> out(delta_fracs.size() * omega_fracs.size());
    parallel_for(out.size(), threads, [&](std::size_t idx) {
        const double a = delta_fracs[idx / omega_fracs.size()];
        const double b = omega_fracs[idx % omega_fracs.size()];
        const Drive d = drive.with_errors(a * delta0, b * omega0);
        const RunResult r = evolve(g, d, final_only, initial);
        out[idx] = {a, b, r.final_populations()[site]};
    });
    return out;
}

void write_scan_csv(std::ostream& os, std::span<const ScanPoint> points) {
    os << "d_delta_frac,d_omega_frac,final_pop\n";
    for (const ScanPoint& p : points) fmt::print(os, "{:.12g},{:.12g},{:.12g}\n", p.d_delta_frac, p.d_omega_frac, p.final_pop);
}

}  // namespace rydfac
