#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "rydfac/analysis.hpp"
#include "rydfac/config.hpp"
#include "rydfac/run_result.hpp"

namespace rydfac {

struct RunOptions {
    std::optional<std::filesystem::path> out_dir;
    std::optional<std::uint64_t> seed;
    std::optional<double> dt_override_us;
    std::size_t threads = 1;
    bool quiet = false;
    std::string command_line;
};

/// Config with command-line overrides folded in.
RunConfig apply_overrides(RunConfig c, const RunOptions& opt);

struct Simulation {
    RunResult result;
    std::vector<std::vector<double>> realization_finals;  // disorder runs
};

/// Runs the resolved configuration without touching the filesystem.
Simulation simulate(const ResolvedRun& run, std::size_t threads);

struct RunOutcome {
    ResolvedRun run;
    Simulation sim;
    std::vector<GainSeries> gains;
    std::filesystem::path directory;
    double wall_time_s = 0.0;
};

/// Resolves, simulates and writes the artifact directory with its manifest.
RunOutcome run_config(const RunConfig& c, const RunOptions& opt);

struct ScanOutcome {
    ResolvedRun run;
    std::vector<ScanPoint> points;
    std::filesystem::path directory;
};

ScanOutcome run_scan(const RunConfig& c, const RunOptions& opt);

struct PairDifference {
    std::string a;
    std::string b;
    double max_abs_diff = 0.0;        // over all samples and sites
    double final_max_abs_diff = 0.0;  // last sample only
};

struct Comparison {
    std::vector<std::string> labels;
    std::vector<PairDifference> pairs;
};

/// Merges populations.csv from run directories sharing a time grid and site
/// count; writes comparison.csv and comparison_summary.csv into `out`.
Comparison compare_runs(const std::vector<std::filesystem::path>& dirs, const std::filesystem::path& out);

std::string sha256_file(const std::filesystem::path& path);

std::string software_version();

}  // namespace rydfac
