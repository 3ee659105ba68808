#include <cstdint>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "rydfac/config.hpp"
#include "rydfac/errors.hpp"
#include "rydfac/parallel.hpp"
#include "rydfac/runner.hpp"

namespace {

enum ExitCode { ok = 0, failure = 1, invalid_config = 2, instability = 3, refused = 4 };

struct CommonFlags {
    std::string out;
    std::uint64_t seed = 0;
    double dt = 0.0;
    std::size_t threads = 0;
    bool quiet = false;

    void add_to(CLI::App* app) {
        app->add_option("--out", out, "Output directory (overrides outputs.directory)");
        app->add_option("--seed", seed, "Base seed (overrides the config)");
        app->add_option("--dt-override", dt, "Integrator step in us (overrides solver.dt_us)");
        app->add_option("--threads", threads, "Worker threads (default: all cores)");
        app->add_flag("--quiet", quiet, "Only print errors");
    }

    rydfac::RunOptions options(const CLI::App* app, const std::string& command_line) const {
        rydfac::RunOptions o;
        if (app->count("--out")) o.out_dir = out;
        if (app->count("--seed")) o.seed = seed;
        if (app->count("--dt-override")) o.dt_override_us = dt;
        o.threads = threads > 0 ? threads : rydfac::default_threads();
        o.quiet = quiet;
        o.command_line = command_line;
        return o;
    }
};

}  // namespace

int main(int argc, char** argv) {
    std::string command_line;
    for (int i = 0; i < argc; ++i) command_line += (i ? " " : "") + std::string(argv[i]);

    CLI::App app{"Rydberg facilitation under rapid adiabatic passage"};
    app.set_version_flag("--version", rydfac::software_version());
    app.require_subcommand(1);

    std::string config_path;
    CommonFlags run_flags;
    CLI::App* run = app.add_subcommand("run", "Run a YAML configuration");
    run->add_option("config", config_path, "Configuration file")->required();
    run_flags.add_to(run);

    std::string preset_name;
    bool emit = false;
    bool list = false;
    CommonFlags preset_flags;
    CLI::App* preset = app.add_subcommand("preset", "Run or print a built-in parameter set");
    preset->add_option("name", preset_name, "Preset name");
    preset->add_flag("--emit-config", emit, "Print the preset as YAML instead of running it");
    preset->add_flag("--list", list, "List preset names");
    preset_flags.add_to(preset);

    std::vector<std::string> compare_dirs;
    std::string compare_out = "comparison";
    CLI::App* compare = app.add_subcommand("compare", "Compare population tables of finished runs");
    compare->add_option("dirs", compare_dirs, "Run directories")->required()->expected(2, -1);
    compare->add_option("--out", compare_out, "Directory for comparison.csv");

    std::string scan_path;
    CommonFlags scan_flags;
    CLI::App* scan = app.add_subcommand("scan", "Scan static detuning and Rabi-frequency errors");
    scan->add_option("config", scan_path, "Configuration file with a scan block")->required();
    scan_flags.add_to(scan);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? ok : invalid_config;
    }

    try {
        if (*run) {
            rydfac::run_config(rydfac::load_config(config_path), run_flags.options(run, command_line));
        } else if (*preset) {
            if (list) {
                for (const auto& n : rydfac::preset_names()) std::cout << n << "\n";
                return ok;
            }
            if (preset_name.empty()) throw rydfac::InvalidConfig("preset", "name required (see --list)");
            const rydfac::RunConfig c = rydfac::preset(preset_name);
            if (emit) {
                std::cout << rydfac::emit_config(c);
                return ok;
            }
            const rydfac::RunOptions opt = preset_flags.options(preset, command_line);
            if (c.scan)
                rydfac::run_scan(c, opt);
            else
                rydfac::run_config(c, opt);
        } else if (*compare) {
            std::vector<std::filesystem::path> dirs(compare_dirs.begin(), compare_dirs.end());
            const rydfac::Comparison cmp = rydfac::compare_runs(dirs, compare_out);
            for (const auto& p : cmp.pairs)
                std::cout << fmt::format("{} vs {}: max |dn| = {:.3e} (final {:.3e})\n", p.a, p.b, p.max_abs_diff,
                                         p.final_max_abs_diff);
        } else if (*scan) {
            rydfac::run_scan(rydfac::load_config(scan_path), scan_flags.options(scan, command_line));
        }
    } catch (const rydfac::InvalidConfig& e) {
        std::cerr << "invalid config: " << e.what() << "\n";
        return invalid_config;
    } catch (const rydfac::NumericalInstability& e) {
        std::cerr << "numerical instability: " << e.what() << "\n";
        return instability;
    } catch (const rydfac::ResourceRefusal& e) {
        std::cerr << "refused: " << e.what() << "\n";
        return refused;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return failure;
    }
    return ok;
}
