#pragma once

#include <cstddef>
#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "rydfac/drive.hpp"
#include "rydfac/fullme.hpp"
#include "rydfac/lattice.hpp"
#include "rydfac/run_result.hpp"

namespace rydfac {

/// Total excitation number sum_j <n_j>.
double gain(std::span<const double> populations);

/// Decay probability per step, Gamma T0 / 2 with Gamma converted to rad/us.
double decay_probability_per_step(double gamma_mhz, double t0_us);

/// Closed-form gain after S steps under first-order decay:
/// 2S+1 - p (S^2 + 2/3 S^3 - 2/3 S - 1).
double gain_approx(std::size_t steps, double gamma_mhz, double t0_us);

/// Integer S in [1, s_max] maximising gain_approx, with the gain there.
std::pair<std::size_t, double> gain_approx_argmax(double gamma_mhz, double t0_us, std::size_t s_max = 40);

/// Hole-count weights 3(i+1) + i + 2(2i+1)(S-i-1) for i = 1..S-1.
std::vector<double> single_decay_weights(std::size_t steps);

/// (2S+1)[1 - (1-p)^(S-1) p] - p sum_i w_i (1-p)^(i-1), evaluated as written.
double gain_exact_single_decay(std::size_t steps, double p);

enum class GainVariant { full_me, mf_qmc, mf_me, eq12, eqs2 };

std::string_view to_string(GainVariant v);
GainVariant gain_variant_from_tag(std::string_view tag);

struct GainPoint {
    std::size_t step = 0;
    double t_us = 0.0;
    double gain = 0.0;
};

struct GainSeries {
    GainVariant variant = GainVariant::full_me;
    std::vector<GainPoint> points;

    double at_step(std::size_t step) const;
};

/// Gain sampled at every step boundary S * step_duration covered by the run.
GainSeries gain_series(const RunResult& r, double step_duration_us);
GainSeries gain_series_eq12(std::size_t max_step, double gamma_mhz, double t0_us);
GainSeries gain_series_eqs2(std::size_t max_step, double gamma_mhz, double t0_us);

void write_gain_csv(std::ostream& os, std::span<const GainSeries> series);

/// Gain at the final sample of a vacuum-initialised run.
double dark_count(const RunResult& r);

struct SiteLabel {
    std::size_t site = 0;
    std::size_t row = 0;
    std::size_t col = 0;
    int first_step = -1;  // -1: never excited
    std::vector<std::size_t> deexcite_steps;
    std::vector<std::size_t> reexcite_steps;
};

struct PatternLabeling {
    double threshold = 0.5;
    double hysteresis = 0.1;
    std::size_t n_steps = 0;
    std::vector<SiteLabel> sites;
};

/// Step-boundary crossing analysis. A site counts as excited once its
/// population rises above threshold + hysteresis and as de-excited once it
/// falls below threshold - hysteresis; step 0 uses the bare threshold.
/// n_steps = 0 labels every step the run covers.
PatternLabeling label_pattern(const RunResult& r, const Geometry& g, double step_duration_us, double threshold = 0.5,
                              double hysteresis = 0.1, std::size_t n_steps = 0);

void write_pattern_csv(std::ostream& os, const PatternLabeling& p);

struct ScanPoint {
    double d_delta_frac = 0.0;
    double d_omega_frac = 0.0;
    double final_pop = 0.0;
};

/// n evenly spaced values over [lo, hi].
std::vector<double> linspace(double lo, double hi, std::size_t n);

/// Final population of `site` with static relative errors delta0 * (1 + a) and
/// omega0 * (1 + b) over the grid. One evolve per point, row-major in delta.
std::vector<ScanPoint> scan_parameters(const Geometry& g, const Drive& drive, const EvolveSpec& spec,
                                       const ManyBodyState& initial, std::span<const double> delta_fracs,
                                       std::span<const double> omega_fracs, std::size_t site, std::size_t threads = 1);

void write_scan_csv(std::ostream& os, std::span<const ScanPoint> points);

}  // namespace rydfac
