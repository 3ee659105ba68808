#include "rydfac/runner.hpp"

#include <chrono>
#include <cmath>
#include <fstream>
#include <iostream>
#include <limits>
#include <sstream>

#include <fmt/format.h>
#include <json.hpp>
#include <openssl/evp.h>

#include "rydfac/errors.hpp"
#include "rydfac/fullme.hpp"
#include "rydfac/mfqmc.hpp"

#ifndef RYDFAC_VERSION
#define RYDFAC_VERSION "0.0.0"
#endif

namespace rydfac {
namespace fs = std::filesystem;
using ordered_json = nlohmann::ordered_json;

namespace {

template <typename Writer>
void write_file(const fs::path& path, Writer&& w) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw std::runtime_error(fmt::format("cannot write {}", path.string()));
    w(os);
    if (!os) throw std::runtime_error(fmt::format("write failed for {}", path.string()));
}

ordered_json number_or_null(double v) { return std::isfinite(v) ? ordered_json(v) : ordered_json(nullptr); }

ordered_json residuals_json(const InvariantResiduals& r) {
    ordered_json j;
    j["max_trace_error"] = number_or_null(r.max_trace_error);
    j["max_hermiticity_error"] = number_or_null(r.max_hermiticity_error);
    j["min_eigenvalue"] = number_or_null(r.min_eigenvalue);
    j["min_population"] = number_or_null(r.min_population);
    j["max_population"] = number_or_null(r.max_population);
    return j;
}

void write_manifest(const fs::path& dir, ordered_json manifest, const std::vector<std::string>& files) {
    ordered_json entries = ordered_json::object();
    for (const std::string& f : files) {
        const fs::path p = dir / f;
        entries[f] = {{"sha256", sha256_file(p)}, {"bytes", fs::file_size(p)}};
    }
    manifest["files"] = entries;
    write_file(dir / "manifest.json", [&](std::ostream& os) { os << manifest.dump(2) << "\n"; });
}

ordered_json base_manifest(const ResolvedRun& run, const RunOptions& opt) {
    ordered_json m;
    m["software"] = {{"name", "rydfac"}, {"version", software_version()}};
    m["command"] = opt.command_line;
    m["name"] = run.config.name;
    m["config_yaml"] = emit_config(run.config);
    m["seed"] = run.config.seed;
    m["seed_streams"] = "disorder: (seed, disorder, realization), counters 2*site and 2*site+1; "
                        "jumps: (seed, jumps, trajectory, site), counter = integrator step";
    m["threads"] = opt.threads;
    m["dt_us"] = run.dt_us;
    m["t_final_us"] = run.t_final_us;
    m["stride"] = run.stride;
    m["warnings"] = run.config.warnings;
    return m;
}

fs::path output_dir(const RunConfig& c, const RunOptions& opt) {
    fs::path dir = opt.out_dir ? *opt.out_dir : fs::path(c.outputs.directory);
    fs::create_directories(dir);
    return dir;
}

std::vector<std::string> split(const std::string& line, char sep) {
    std::vector<std::string> out;
    std::string cur;
    std::istringstream ss(line);
    while (std::getline(ss, cur, sep)) out.push_back(cur);
    if (!line.empty() && line.back() == sep) out.emplace_back();
    return out;
}

struct PopulationTable {
    std::string header;
    std::vector<double> times;
    std::vector<std::vector<double>> rows;
};

PopulationTable read_populations(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw InvalidConfig("compare", fmt::format("cannot read {}", path.string()));
    PopulationTable t;
    std::getline(in, t.header);
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        const auto cells = split(line, ',');
        t.times.push_back(std::stod(cells.at(0)));
        std::vector<double> row;
        for (std::size_t i = 1; i < cells.size(); ++i) row.push_back(std::stod(cells[i]));
        t.rows.push_back(std::move(row));
    }
    return t;
}

std::string run_label(const fs::path& dir) {
    std::string variant = "run";
    std::ifstream in(dir / "manifest.json");
    if (in) {
        const auto m = ordered_json::parse(in, nullptr, false);
        if (!m.is_discarded() && m.contains("variant")) variant = m["variant"].get<std::string>();
    }
    fs::path name = dir.filename();
    if (name.empty()) name = dir.parent_path().filename();
    return fmt::format("{}@{}", variant, name.string());
}

}  // namespace

std::string software_version() { return RYDFAC_VERSION; }

std::string sha256_file(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error(fmt::format("cannot read {}", path.string()));
    EVP_MD_CTX* ctx = EVP_MD_CTX_new();
    EVP_DigestInit_ex(ctx, EVP_sha256(), nullptr);
    char buf[1 << 16];
    while (in) {
        in.read(buf, sizeof buf);
        if (in.gcount() > 0) EVP_DigestUpdate(ctx, buf, static_cast<std::size_t>(in.gcount()));
    }
    unsigned char digest[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    EVP_DigestFinal_ex(ctx, digest, &len);
    EVP_MD_CTX_free(ctx);
    std::string hex;
    for (unsigned int i = 0; i < len; ++i) hex += fmt::format("{:02x}", digest[i]);
    return hex;
}

RunConfig apply_overrides(RunConfig c, const RunOptions& opt) {
    if (opt.seed) c.seed = *opt.seed;
    if (opt.dt_override_us) c.solver.dt_us = *opt.dt_override_us;
    if (opt.out_dir) c.outputs.directory = opt.out_dir->string();
    return c;
}

Simulation simulate(const ResolvedRun& run, std::size_t threads) {
    const RunConfig& c = run.config;
    Simulation sim;
    const double gamma = c.gamma_mhz;
    if (c.solver.method != "full_me" && c.disorder.sigma_um > 0.0)
        throw InvalidConfig("disorder.sigma_um", "position disorder is only supported by full_me");

    if (c.solver.method == "full_me") {
        EvolveSpec spec;
        spec.t_final_us = run.t_final_us;
        spec.dt_us = run.dt_us;
        spec.output_stride = run.stride;
        spec.gamma_mhz = gamma;
        const ManyBodyState initial =
            gamma > 0.0 ? ManyBodyState::product_density(c.initial) : ManyBodyState::product_pure(c.initial);
        if (c.disorder.sigma_um > 0.0) {
            DisorderSpec d{c.disorder.sigma_um, c.disorder.realizations, c.seed};
            DisorderAverage avg = disorder_average(run.geometry, d, run.drive, spec, initial, threads);
            sim.result = std::move(avg.mean);
            sim.realization_finals = std::move(avg.final_populations);
        } else {
            sim.result = evolve(run.geometry, run.drive, spec, initial);
            sim.result.final_state.reset();
        }
    } else if (c.solver.method == "mf_qmc") {
        TrajectorySpec spec;
        spec.n_trajectories = c.solver.trajectories;
        spec.base_seed = c.seed;
        spec.dt_us = run.dt_us;
        spec.record_jumps = c.solver.record_jumps;
        spec.output_stride = run.stride;
        sim.result = run_ensemble(run.geometry, run.drive, gamma, spec, c.initial, run.t_final_us, threads);
    } else {
        sim.result = run_mfme(run.geometry, run.drive, gamma, c.initial, run.t_final_us, run.dt_us, run.stride);
    }
    sim.result.initial = c.initial;
    return sim;
}

RunOutcome run_config(const RunConfig& config, const RunOptions& opt) {
    const auto start = std::chrono::steady_clock::now();
    ResolvedRun run = resolve(apply_overrides(config, opt));
    for (const std::string& w : run.config.warnings)
        if (!opt.quiet) std::cerr << "warning: " << w << "\n";
    Simulation sim = simulate(run, opt.threads);
    const RunResult& r = sim.result;
    const double step = run.drive.step_duration_us();

    std::vector<GainSeries> gains;
    gains.push_back(gain_series(r, step));
    const std::size_t covered = gains.front().points.back().step;
    if (run.drive.is_rap() && covered > 0) {
        gains.push_back(gain_series_eq12(covered, run.config.gamma_mhz, run.drive.cycle_us()));
        gains.push_back(gain_series_eqs2(covered, run.config.gamma_mhz, run.drive.cycle_us()));
    }

    const fs::path dir = output_dir(run.config, opt);
    std::vector<std::string> files;
    auto emit = [&](const std::string& name, auto&& writer) {
        write_file(dir / name, writer);
        files.push_back(name);
    };
    emit("config.yaml", [&](std::ostream& os) { os << emit_config(run.config); });
    emit("populations.csv", [&](std::ostream& os) { write_populations_csv(os, r); });
    emit("gain.csv", [&](std::ostream& os) { write_gain_csv(os, gains); });
    if (!r.std_errors.empty()) emit("stderr.csv", [&](std::ostream& os) { write_std_errors_csv(os, r); });
    if (run.config.solver.record_jumps) emit("jumps.csv", [&](std::ostream& os) { write_jumps_csv(os, r); });
    emit("geometry.csv", [&](std::ostream& os) { write_geometry_csv(os, run.geometry); });
    emit("pairs.csv", [&](std::ostream& os) { write_pairs_csv(os, run.geometry); });
    emit("drive.csv", [&](std::ostream& os) { write_drive_csv(os, run.drive, r.times_us); });
    if (covered > 0) {
        const PatternLabeling labels = label_pattern(r, run.geometry, step);
        emit("pattern.csv", [&](std::ostream& os) { write_pattern_csv(os, labels); });
    }
    if (!sim.realization_finals.empty()) {
        emit("realizations.csv", [&](std::ostream& os) {
            os << "realization";
            for (std::size_t j = 0; j < r.n_sites(); ++j) os << ",n_" << j;
            os << "\n";
            for (std::size_t k = 0; k < sim.realization_finals.size(); ++k) {
                os << k;
                for (double p : sim.realization_finals[k]) os << fmt::format(",{:.12g}", p);
                os << "\n";
            }
        });
    }

    const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    ordered_json m = base_manifest(run, opt);
    m["variant"] = r.variant;
    m["initial"] = r.initial;
    m["residuals"] = residuals_json(r.residuals);
    ordered_json summary;
    summary["final_time_us"] = r.times_us.back();
    summary["final_gain"] = gain(r.final_populations());
    summary["n_jumps"] = r.jumps.size();
    m["summary"] = summary;
    m["wall_time_s"] = wall;
    write_manifest(dir, m, files);
    if (!opt.quiet)
        std::cerr << fmt::format("{}: {} samples, final gain {:.6g}, {:.1f} s -> {}\n", run.config.name.empty() ? "run" : run.config.name,
                                 r.n_samples(), gain(r.final_populations()), wall, dir.string());
    return RunOutcome{std::move(run), std::move(sim), std::move(gains), dir, wall};
}

ScanOutcome run_scan(const RunConfig& config, const RunOptions& opt) {
    const auto start = std::chrono::steady_clock::now();
    if (!config.scan) throw InvalidConfig("scan", "missing block");
    ResolvedRun run = resolve(apply_overrides(config, opt));
    const ScanConfig& sc = *run.config.scan;
    if (sc.site >= run.geometry.size()) throw InvalidConfig("scan.site", "site out of range");
    if (sc.n_delta == 0 || sc.n_omega == 0) throw InvalidConfig("scan.n_delta", "grid needs at least one point");
    EvolveSpec spec;
    spec.t_final_us = run.t_final_us;
    spec.dt_us = run.dt_us;
    spec.gamma_mhz = run.config.gamma_mhz;
    spec.output_stride = run.stride;
    const ManyBodyState initial = spec.gamma_mhz > 0.0 ? ManyBodyState::product_density(run.config.initial)
                                                       : ManyBodyState::product_pure(run.config.initial);
    const auto dfr = linspace(sc.frac_min, sc.frac_max, sc.n_delta);
    const auto ofr = linspace(sc.frac_min, sc.frac_max, sc.n_omega);
    std::vector<ScanPoint> points = scan_parameters(run.geometry, run.drive, spec, initial, dfr, ofr, sc.site, opt.threads);

    const fs::path dir = output_dir(run.config, opt);
    write_file(dir / "config.yaml", [&](std::ostream& os) { os << emit_config(run.config); });
    write_file(dir / "scan.csv", [&](std::ostream& os) { write_scan_csv(os, points); });
    double lo = std::numeric_limits<double>::infinity(), hi = -lo;
    for (const ScanPoint& p : points) {
        lo = std::min(lo, p.final_pop);
        hi = std::max(hi, p.final_pop);
    }
    ordered_json m = base_manifest(run, opt);
    m["variant"] = "full_me";
    m["summary"] = {{"min_final_pop", lo}, {"max_final_pop", hi}, {"spread", hi - lo}, {"points", points.size()}};
    m["wall_time_s"] = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    write_manifest(dir, m, {"config.yaml", "scan.csv"});
    if (!opt.quiet) std::cerr << fmt::format("scan: {} points, final population in [{:.6g}, {:.6g}] -> {}\n", points.size(), lo, hi, dir.string());
    return ScanOutcome{std::move(run), std::move(points), dir};
}

Comparison compare_runs(const std::vector<fs::path>& dirs, const fs::path& out) {
    if (dirs.size() < 2) throw InvalidConfig("compare", "need at least two run directories");
    std::vector<PopulationTable> tables;
    Comparison cmp;
    for (const fs::path& d : dirs) {
        tables.push_back(read_populations(d / "populations.csv"));
        cmp.labels.push_back(run_label(d));
    }
    const PopulationTable& ref = tables.front();
    for (std::size_t k = 1; k < tables.size(); ++k) {
        const PopulationTable& t = tables[k];
        if (t.header != ref.header) throw InvalidConfig("compare", fmt::format("{} has a different site count", dirs[k].string()));
        if (t.times.size() != ref.times.size())
            throw InvalidConfig("compare", fmt::format("{} has a different time grid", dirs[k].string()));
        for (std::size_t s = 0; s < t.times.size(); ++s)
            if (std::abs(t.times[s] - ref.times[s]) > 1e-9)
                throw InvalidConfig("compare", fmt::format("{} has a different time grid", dirs[k].string()));
    }
    const std::size_t n_sites = ref.rows.empty() ? 0 : ref.rows.front().size();
    for (std::size_t a = 0; a < tables.size(); ++a) {
        for (std::size_t b = a + 1; b < tables.size(); ++b) {
            PairDifference p{cmp.labels[a], cmp.labels[b], 0.0, 0.0};
            for (std::size_t s = 0; s < ref.times.size(); ++s)
                for (std::size_t j = 0; j < n_sites; ++j) {
                    const double d = std::abs(tables[a].rows[s][j] - tables[b].rows[s][j]);
                    p.max_abs_diff = std::max(p.max_abs_diff, d);
                    if (s + 1 == ref.times.size()) p.final_max_abs_diff = std::max(p.final_max_abs_diff, d);
                }
            cmp.pairs.push_back(p);
        }
    }
    fs::create_directories(out);
    write_file(out / "comparison.csv", [&](std::ostream& os) {
        os << "t_us,site";
        for (const auto& l : cmp.labels) os << "," << l;
        os << "\n";
        for (std::size_t s = 0; s < ref.times.size(); ++s)
            for (std::size_t j = 0; j < n_sites; ++j) {
                os << fmt::format("{:.12g},{}", ref.times[s], j);
                for (const auto& t : tables) os << fmt::format(",{:.12g}", t.rows[s][j]);
                os << "\n";
            }
    });
    write_file(out / "comparison_summary.csv", [&](std::ostream& os) {
        os << "a,b,max_abs_diff,final_max_abs_diff\n";
        for (const auto& p : cmp.pairs) os << fmt::format("{},{},{:.12g},{:.12g}\n", p.a, p.b, p.max_abs_diff, p.final_max_abs_diff);
    });
    return cmp;
}

}  // namespace rydfac
