#include <doctest.h>

#include <cmath>
#include <numbers>
#include <sstream>

#include "rydfac/analysis.hpp"
#include "rydfac/fullme.hpp"

using namespace rydfac;

namespace {

constexpr double room_gamma = 0.000839;
const double rap_c6 = c6_from_nearest(20.0, 6.4);

Drive rap_drive(const Geometry& g, std::size_t n_steps) {
    RapSchedule s;
    s.omega0_mhz = 10.7;
    s.t0_us = 3.0;
    s.delta0_mhz = 20.0;
    s.beta_mhz = 7.6;
    s.amplitude_mhz = amplitude_from_beta(7.6, 3.0);
    s.n_steps = n_steps;
    s.groups = assign_groups(g);
    return Drive(s);
}

EvolveSpec step_sampled(const Geometry& g, const Drive& d) {
    const std::size_t m = default_substeps(g, d);
    EvolveSpec e;
    e.dt_us = d.step_duration_us() / static_cast<double>(m);
    e.t_final_us = d.total_duration_us();
    e.output_stride = m;
    return e;
}

RunResult synthetic(std::vector<std::vector<double>> pops, double step = 1.0) {
    RunResult r;
    r.variant = "mf_qmc";
    for (std::size_t k = 0; k < pops.size(); ++k) r.times_us.push_back(static_cast<double>(k) * step);
    r.populations = std::move(pops);
    return r;
}

}  // namespace

TEST_CASE("gain sums populations") {
    CHECK(gain(std::vector<double>{0, 0, 0}) == 0.0);
    CHECK(gain(std::vector<double>{0.25, 0.5, 1.0}) == 1.75);
    std::vector<double> p{0.1, 0.7, 0.3};
    const double before = gain(p);
    p.push_back(1.0);
    CHECK(gain(p) == doctest::Approx(before + 1.0));
}

TEST_CASE("first-order gain law") {
    const double p = decay_probability_per_step(room_gamma, 3.0);
    CHECK(p == doctest::Approx(2 * std::numbers::pi * room_gamma * 1.5));
    CHECK(p == doctest::Approx(0.0079).epsilon(0.01));
    for (std::size_t s = 0; s < 20; ++s) CHECK(gain_approx(s, 0.0, 3.0) == 2.0 * s + 1.0);

    const double g4 = gain_approx(4, room_gamma, 3.0);
    MESSAGE("gain_approx(4) = " << g4);
    CHECK(std::abs(g4 - 8.57) <= 0.005);
    // the cubic bracket at S = 4 is 55
    CHECK(g4 == doctest::Approx(9.0 - 55.0 * p).epsilon(1e-14));

    // exhaustive oracle
    std::size_t best_s = 0;
    double best_g = -1e300;
    for (std::size_t s = 1; s <= 40; ++s) {
        const double x = static_cast<double>(s);
        const double gx = 2 * x + 1 - p * (x * x + 2.0 / 3.0 * x * x * x - 2.0 / 3.0 * x - 1);
        if (gx > best_g) {
            best_g = gx;
            best_s = s;
        }
    }
    const auto [s_max, g_max] = gain_approx_argmax(room_gamma, 3.0);
    CHECK(s_max == best_s);
    CHECK(s_max == 11);
    CHECK(g_max == doctest::Approx(best_g));
    CHECK(std::abs(g_max - 15.1) <= 0.1);

    // concave for S >= 2
    for (std::size_t s = 2; s < 39; ++s) {
        const double d2 = gain_approx(s + 1, room_gamma, 3.0) - 2 * gain_approx(s, room_gamma, 3.0) +
                          gain_approx(s - 1, room_gamma, 3.0);
        CHECK(d2 <= 0.0);
    }
}

TEST_CASE("single-decay bookkeeping") {
    CHECK(single_decay_weights(4) == std::vector<double>{19, 21, 15});
    CHECK(single_decay_weights(1).empty());
    for (std::size_t s = 1; s < 15; ++s) {
        CHECK(gain_exact_single_decay(s, 0.0) == 2.0 * s + 1.0);
        CHECK(gain_approx(s, 0.0, 3.0) - gain_exact_single_decay(s, 0.0) == 0.0);
    }
    const double p = 0.0079;
    const double direct = 9.0 * (1.0 - std::pow(1 - p, 3) * p) - p * (19.0 + 21.0 * (1 - p) + 15.0 * (1 - p) * (1 - p));
    const double v = gain_exact_single_decay(4, p);
    MESSAGE("single-decay formula at S=4, p=0.0079: " << v << " (first-order law " << 9.0 - 55.0 * p << ")");
    CHECK(v == doctest::Approx(direct).epsilon(1e-14));
    CHECK_THROWS_AS(gain_exact_single_decay(0, p), std::invalid_argument);
    CHECK_THROWS_AS(gain_exact_single_decay(3, 1.5), std::invalid_argument);
}

TEST_CASE("gain series and CSV") {
    const auto r = synthetic({{1, 0}, {1, 1}, {0, 1}}, 1.5);
    const GainSeries s = gain_series(r, 1.5);
    REQUIRE(s.points.size() == 3);
    CHECK(s.variant == GainVariant::mf_qmc);
    CHECK(s.at_step(1) == 2.0);
    CHECK(s.points[2].t_us == 3.0);
    CHECK_THROWS_AS(s.at_step(7), std::out_of_range);
    CHECK_THROWS_AS(gain_series(r, 1.0), std::invalid_argument);  // no sample at t = 1

    const GainSeries e12 = gain_series_eq12(2, 0.0, 3.0);
    const GainSeries es2 = gain_series_eqs2(2, 0.0, 3.0);
    CHECK(e12.at_step(0) == 1.0);
    CHECK(es2.at_step(0) == 1.0);
    CHECK(es2.at_step(2) == 5.0);

    std::ostringstream os;
    const std::vector<GainSeries> all{s, e12};
    write_gain_csv(os, all);
    CHECK(os.str().rfind("step,t_us,gain,variant\n0,0,1,mf_qmc\n1,1.5,2,mf_qmc\n", 0) == 0);
    CHECK(os.str().find("2,3,5,eq12\n") != std::string::npos);

    CHECK(gain_variant_from_tag("eqs2") == GainVariant::eqs2);
    CHECK_THROWS_AS(gain_variant_from_tag("nope"), std::invalid_argument);
}

TEST_CASE("dark count") {
    RunResult r = synthetic({{0, 0}, {1e-4, 2e-4}});
    r.initial = "00";
    CHECK(dark_count(r) == doctest::Approx(3e-4));
    r.initial = "01";
    CHECK_THROWS_AS(dark_count(r), std::invalid_argument);

    const Geometry g = build_chain(3, 6.4, rap_c6);
    const Drive off = rap_drive(g, 2).with_errors(0.0, -10.7);
    EvolveSpec e = step_sampled(g, off);
    const auto vac = evolve(g, off, e, ManyBodyState::product_pure("000"));
    CHECK(vac.initial == "000");
    CHECK(dark_count(vac) == 0.0);
}

TEST_CASE("pattern labeling on synthetic data") {
    const Geometry g = build_chain(3, 1.0, 1.0);
    // site 1 chatters around 0.5 without crossing the hysteresis band
    const auto r = synthetic({{1.0, 0.0, 0.0}, {1.0, 0.55, 0.9}, {0.0, 0.45, 0.1}, {0.0, 0.58, 0.95}, {0.0, 0.7, 0.95}});
    const PatternLabeling lab = label_pattern(r, g, 1.0);
    CHECK(lab.n_steps == 4);
    CHECK(lab.sites[0].first_step == 0);
    CHECK(lab.sites[0].deexcite_steps == std::vector<std::size_t>{2});
    CHECK(lab.sites[1].first_step == 4);
    CHECK(lab.sites[1].deexcite_steps.empty());
    CHECK(lab.sites[2].first_step == 1);
    CHECK(lab.sites[2].deexcite_steps == std::vector<std::size_t>{2});
    CHECK(lab.sites[2].reexcite_steps == std::vector<std::size_t>{3});
    CHECK_THROWS_AS(label_pattern(r, g, 1.0, 0.5, 0.1, 5), std::invalid_argument);
    CHECK_THROWS_AS(label_pattern(r, build_chain(2, 1.0, 1.0), 1.0), std::invalid_argument);

    std::ostringstream os;
    write_pattern_csv(os, lab);
    CHECK(os.str() == "site,row,col,first_step,deexcite_steps,reexcite_steps\n"
                      "0,0,0,0,2,\n1,0,1,4,,\n2,0,2,1,2,3\n");
}

TEST_CASE("ideal 1D avalanche adds one site per end per step") {
    const Geometry g = build_chain(9, 6.4, rap_c6);
    const Drive d = rap_drive(g, 4);
    const auto r = evolve(g, d, step_sampled(g, d), ManyBodyState::product_pure("000010000"));
    const PatternLabeling lab = label_pattern(r, g, d.step_duration_us());
    for (std::size_t j = 0; j < 9; ++j) {
        const int dist = std::abs(static_cast<int>(j) - 4);
        CHECK(lab.sites[j].first_step == dist);
        CHECK(lab.sites[j].deexcite_steps.empty());
    }
    const GainSeries s = gain_series(r, d.step_duration_us());
    for (std::size_t k = 0; k <= 4; ++k) CHECK(s.at_step(k) == doctest::Approx(2.0 * k + 1).epsilon(1e-3));
}

TEST_CASE("RAP transfer is flat over a small error grid") {
    const Geometry g = build_chain(2, 6.4, rap_c6);
    const Drive d = rap_drive(g, 2);
    const auto fr = linspace(-0.05, 0.05, 3);
    CHECK(fr == std::vector<double>{-0.05, 0.0, 0.05});
    const auto pts = scan_parameters(g, d, step_sampled(g, d), ManyBodyState::product_pure("10"), fr, fr, 1, 2);
    REQUIRE(pts.size() == 9);
    CHECK(pts[1].d_delta_frac == -0.05);
    CHECK(pts[1].d_omega_frac == 0.0);
    double lo = 1.0, hi = 0.0;
    for (const auto& p : pts) {
        lo = std::min(lo, p.final_pop);
        hi = std::max(hi, p.final_pop);
    }
    MESSAGE("RAP 3x3 spread " << hi - lo);
    CHECK(hi - lo < 2e-4);
    CHECK(lo > 0.999);

    std::ostringstream os;
    write_scan_csv(os, std::span(pts).first(1));
    CHECK(os.str().rfind("d_delta_frac,d_omega_frac,final_pop\n-0.05,-0.05,", 0) == 0);
    CHECK_THROWS_AS(scan_parameters(g, d, step_sampled(g, d), ManyBodyState::product_pure("10"), fr, fr, 2),
                    std::invalid_argument);
}
