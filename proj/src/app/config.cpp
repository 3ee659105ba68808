#include "rydfac/config.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include <fmt/format.h>
#include <yaml-cpp/yaml.h>

#include "rydfac/errors.hpp"
#include "rydfac/fullme.hpp"
#include "rydfac/state.hpp"

namespace rydfac {
namespace {

// Strict block reader: every key must be consumed, values are converted with
// the dotted field path in the error.
class Block {
public:
    Block(const YAML::Node& node, std::string path) : node_(node), path_(std::move(path)) {
        if (node_ && !node_.IsMap()) throw InvalidConfig(path_, "expected a mapping");
    }

    ~Block() = default;

    bool has(const std::string& key) {
        used_.insert(key);
        return node_ && node_[key] && !node_[key].IsNull();
    }

    YAML::Node child(const std::string& key) {
        used_.insert(key);
        return node_ ? node_[key] : YAML::Node();
    }

    std::string field(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }

    template <typename T>
    T get(const std::string& key, T fallback) {
        if (!has(key)) return fallback;
        return convert<T>(node_[key], field(key));
    }

    template <typename T>
    std::optional<T> get_auto(const std::string& key, std::optional<T> fallback = std::nullopt) {
        if (!has(key)) return fallback;
        const YAML::Node v = node_[key];
        if (v.IsScalar() && v.Scalar() == "auto") return std::nullopt;
        return convert<T>(v, field(key));
    }

    void finish() const {
        if (!node_) return;
        for (const auto& kv : node_) {
            const std::string key = kv.first.as<std::string>();
            if (!used_.count(key)) throw InvalidConfig(field(key), "unknown key");
        }
    }

    template <typename T>
    static T convert(const YAML::Node& v, const std::string& field) {
        if (!v.IsScalar()) throw InvalidConfig(field, "expected a scalar value");
        try {
            return v.as<T>();
        } catch (const YAML::Exception&) {
            throw InvalidConfig(field, fmt::format("cannot read '{}'", v.Scalar()));
        }
    }

private:
    YAML::Node node_;
    std::string path_;
    std::set<std::string> used_;
};

std::string num(double v) { return fmt::format("{}", v); }

template <typename T>
std::string num_or_auto(const std::optional<T>& v) {
    return v ? fmt::format("{}", *v) : std::string("auto");
}

void require_choice(const std::string& value, std::initializer_list<const char*> options, const std::string& field) {
    for (const char* o : options)
        if (value == o) return;
    throw InvalidConfig(field, fmt::format("unsupported value '{}'", value));
}

std::string center_bitstring(const GeometryConfig& g, std::size_t n_sites) {
    std::string bits(n_sites, '0');
    std::size_t seed = 0;
    if (g.kind == "square")
        seed = (g.height / 2) * g.width + g.width / 2;
    else
        seed = n_sites / 2;
    bits[seed] = '1';
    return bits;
}

// Reference parameter sets used by the presets.
constexpr double rap_omega0 = 10.7;
constexpr double rap_v = 20.0;
constexpr double rap_spacing = 6.4;
constexpr double rap_sigma = 0.076;
constexpr double rap_t0 = 3.0;
constexpr double rap_beta = 7.6;
constexpr double room_gamma = 0.000839;
constexpr double rabi_omega0 = 0.34;
constexpr double rabi_v = 1.1;
constexpr double rabi_spacing = 10.4;
constexpr double rabi_sigma = 0.034;
constexpr std::uint64_t preset_seed = 20250101;

RunConfig rap_chain(std::string name, std::size_t n, std::size_t steps) {
    RunConfig c;
    c.name = std::move(name);
    c.geometry.kind = "chain";
    c.geometry.n = n;
    c.geometry.spacing_um = rap_spacing;
    c.geometry.v_nn_mhz = rap_v;
    c.drive.kind = "rap";
    c.drive.omega0_mhz = rap_omega0;
    c.drive.t0_us = rap_t0;
    c.drive.beta_mhz = rap_beta;
    c.drive.n_steps = steps;
    c.seed = preset_seed;
    c.outputs.directory = "out/" + c.name;
    return c;
}

RunConfig rabi_pair(std::string name) {
    RunConfig c;
    c.name = std::move(name);
    c.geometry.kind = "chain";
    c.geometry.n = 2;
    c.geometry.spacing_um = rabi_spacing;
    c.geometry.v_nn_mhz = rabi_v;
    c.drive.kind = "rabi";
    c.drive.omega0_mhz = rabi_omega0;
    c.drive.n_steps = 8;
    c.initial = "10";
    c.seed = preset_seed;
    c.outputs.directory = "out/" + c.name;
    return c;
}

}  // namespace

RunConfig parse_config(std::string_view yaml_text) {
    YAML::Node root;
    try {
        root = YAML::Load(std::string(yaml_text));
    } catch (const YAML::Exception& e) {
        throw InvalidConfig("config", fmt::format("not valid YAML: {}", e.what()));
    }
    if (!root.IsMap()) throw InvalidConfig("config", "expected a mapping at the top level");
    Block top(root, "");
    RunConfig c;
    c.name = top.get<std::string>("name", "");

    Block geo(top.child("geometry"), "geometry");
    if (!top.has("geometry")) throw InvalidConfig("geometry", "missing block");
    c.geometry.kind = geo.get<std::string>("kind", "chain");
    require_choice(c.geometry.kind, {"chain", "square"}, "geometry.kind");
    c.geometry.n = geo.get<std::size_t>("n", 0);
    c.geometry.width = geo.get<std::size_t>("width", 0);
    c.geometry.height = geo.get<std::size_t>("height", 0);
    c.geometry.spacing_um = geo.get<double>("spacing_um", 0.0);
    c.geometry.v_nn_mhz = geo.get_auto<double>("v_nn_mhz");
    c.geometry.c6 = geo.get_auto<double>("c6_mhz_um6");
    c.geometry.cutoff = geo.get<std::string>("cutoff", "auto");
    require_choice(c.geometry.cutoff, {"auto", "nn_only", "nn_plus_nnn", "radius"}, "geometry.cutoff");
    c.geometry.cutoff_radius_um = geo.get<double>("cutoff_radius_um", 0.0);
    geo.finish();

    Block dr(top.child("drive"), "drive");
    if (!top.has("drive")) throw InvalidConfig("drive", "missing block");
    c.drive.kind = dr.get<std::string>("kind", "rap");
    require_choice(c.drive.kind, {"rap", "rabi"}, "drive.kind");
    c.drive.omega0_mhz = dr.get<double>("omega0_mhz", 0.0);
    c.drive.t0_us = dr.get<double>("t0_us", 0.0);
    c.drive.delta0_mhz = dr.get_auto<double>("delta0_mhz");
    c.drive.amplitude_mhz = dr.get_auto<double>("amplitude_mhz");
    c.drive.beta_mhz = dr.get_auto<double>("beta_mhz");
    c.drive.n_steps = dr.get<std::size_t>("n_steps", 1);
    c.drive.first_driven_group = dr.get<std::string>("first_driven_group", "a");
    require_choice(c.drive.first_driven_group, {"a", "b"}, "drive.first_driven_group");
    c.drive.reverse_sweep = dr.get<bool>("reverse_sweep", false);
    c.drive.d_delta0_mhz = dr.get<double>("d_delta0_mhz", 0.0);
    c.drive.d_omega0_mhz = dr.get<double>("d_omega0_mhz", 0.0);
    dr.finish();

    Block decay(top.child("decay"), "decay");
    c.gamma_mhz = decay.get<double>("gamma_mhz", 0.0);
    decay.finish();

    Block dis(top.child("disorder"), "disorder");
    c.disorder.sigma_um = dis.get<double>("sigma_um", 0.0);
    c.disorder.realizations = dis.get<std::size_t>("realizations", 1);
    dis.finish();

    Block sol(top.child("solver"), "solver");
    c.solver.method = sol.get<std::string>("method", "full_me");
    require_choice(c.solver.method, {"full_me", "mf_qmc", "mf_me"}, "solver.method");
    c.solver.dt_us = sol.get_auto<double>("dt_us");
    c.solver.t_final_us = sol.get_auto<double>("t_final_us");
    c.solver.trajectories = sol.get<std::size_t>("trajectories", 1);
    c.solver.record_jumps = sol.get<bool>("record_jumps", false);
    sol.finish();

    c.seed = top.get<std::uint64_t>("seed", 0);
    c.initial = top.get<std::string>("initial", "center");

    Block out(top.child("outputs"), "outputs");
    c.outputs.directory = out.get<std::string>("directory", "out");
    c.outputs.stride = out.get_auto<std::size_t>("stride");
    c.outputs.samples_per_step = out.get<std::size_t>("samples_per_step", 20);
    out.finish();

    if (top.has("scan")) {
        Block sc(top.child("scan"), "scan");
        ScanConfig s;
        s.site = sc.get<std::size_t>("site", 1);
        s.frac_min = sc.get<double>("frac_min", -0.05);
        s.frac_max = sc.get<double>("frac_max", 0.05);
        s.n_delta = sc.get<std::size_t>("n_delta", 21);
        s.n_omega = sc.get<std::size_t>("n_omega", 21);
        sc.finish();
        c.scan = s;
    }

    if (top.has("warnings")) {
        const YAML::Node w = top.child("warnings");
        if (!w.IsSequence()) throw InvalidConfig("warnings", "expected a list");
        for (const auto& item : w) c.warnings.push_back(Block::convert<std::string>(item, "warnings"));
    }
    top.finish();
    return c;
}

RunConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw InvalidConfig("config", fmt::format("cannot open {}", path.string()));
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str());
}

std::string emit_config(const RunConfig& c) {
    YAML::Emitter e;
    e << YAML::BeginMap;
    if (!c.name.empty()) e << YAML::Key << "name" << YAML::Value << c.name;

    e << YAML::Key << "geometry" << YAML::Value << YAML::BeginMap;
    e << YAML::Key << "kind" << YAML::Value << c.geometry.kind;
    if (c.geometry.kind == "chain") {
        e << YAML::Key << "n" << YAML::Value << c.geometry.n;
    } else {
        e << YAML::Key << "width" << YAML::Value << c.geometry.width;
        e << YAML::Key << "height" << YAML::Value << c.geometry.height;
    }
    e << YAML::Key << "spacing_um" << YAML::Value << num(c.geometry.spacing_um);
    if (c.geometry.v_nn_mhz) e << YAML::Key << "v_nn_mhz" << YAML::Value << num(*c.geometry.v_nn_mhz);
    if (c.geometry.c6) e << YAML::Key << "c6_mhz_um6" << YAML::Value << num(*c.geometry.c6);
    e << YAML::Key << "cutoff" << YAML::Value << c.geometry.cutoff;
    if (c.geometry.cutoff == "radius") e << YAML::Key << "cutoff_radius_um" << YAML::Value << num(c.geometry.cutoff_radius_um);
    e << YAML::EndMap;

    e << YAML::Key << "drive" << YAML::Value << YAML::BeginMap;
    e << YAML::Key << "kind" << YAML::Value << c.drive.kind;
    e << YAML::Key << "omega0_mhz" << YAML::Value << num(c.drive.omega0_mhz);
    if (c.drive.kind == "rap") e << YAML::Key << "t0_us" << YAML::Value << num(c.drive.t0_us);
    e << YAML::Key << "delta0_mhz" << YAML::Value << num_or_auto(c.drive.delta0_mhz);
    if (c.drive.kind == "rap") {
        e << YAML::Key << "amplitude_mhz" << YAML::Value << num_or_auto(c.drive.amplitude_mhz);
        e << YAML::Key << "beta_mhz" << YAML::Value << num_or_auto(c.drive.beta_mhz);
        e << YAML::Key << "reverse_sweep" << YAML::Value << c.drive.reverse_sweep;
    }
    e << YAML::Key << "n_steps" << YAML::Value << c.drive.n_steps;
    e << YAML::Key << "first_driven_group" << YAML::Value << c.drive.first_driven_group;
    e << YAML::Key << "d_delta0_mhz" << YAML::Value << num(c.drive.d_delta0_mhz);
    e << YAML::Key << "d_omega0_mhz" << YAML::Value << num(c.drive.d_omega0_mhz);
    e << YAML::EndMap;

    e << YAML::Key << "decay" << YAML::Value << YAML::BeginMap;
    e << YAML::Key << "gamma_mhz" << YAML::Value << num(c.gamma_mhz);
    e << YAML::EndMap;

    e << YAML::Key << "disorder" << YAML::Value << YAML::BeginMap;
    e << YAML::Key << "sigma_um" << YAML::Value << num(c.disorder.sigma_um);
    e << YAML::Key << "realizations" << YAML::Value << c.disorder.realizations;
    e << YAML::EndMap;

    e << YAML::Key << "solver" << YAML::Value << YAML::BeginMap;
    e << YAML::Key << "method" << YAML::Value << c.solver.method;
    e << YAML::Key << "dt_us" << YAML::Value << num_or_auto(c.solver.dt_us);
    e << YAML::Key << "t_final_us" << YAML::Value << num_or_auto(c.solver.t_final_us);
    e << YAML::Key << "trajectories" << YAML::Value << c.solver.trajectories;
    e << YAML::Key << "record_jumps" << YAML::Value << c.solver.record_jumps;
    e << YAML::EndMap;

    e << YAML::Key << "seed" << YAML::Value << c.seed;
    e << YAML::Key << "initial" << YAML::Value << YAML::DoubleQuoted << c.initial;

    e << YAML::Key << "outputs" << YAML::Value << YAML::BeginMap;
    e << YAML::Key << "directory" << YAML::Value << c.outputs.directory;
    e << YAML::Key << "stride" << YAML::Value << num_or_auto(c.outputs.stride);
    e << YAML::Key << "samples_per_step" << YAML::Value << c.outputs.samples_per_step;
    e << YAML::EndMap;

    if (c.scan) {
        e << YAML::Key << "scan" << YAML::Value << YAML::BeginMap;
        e << YAML::Key << "site" << YAML::Value << c.scan->site;
        e << YAML::Key << "frac_min" << YAML::Value << num(c.scan->frac_min);
        e << YAML::Key << "frac_max" << YAML::Value << num(c.scan->frac_max);
        e << YAML::Key << "n_delta" << YAML::Value << c.scan->n_delta;
        e << YAML::Key << "n_omega" << YAML::Value << c.scan->n_omega;
        e << YAML::EndMap;
    }
    if (!c.warnings.empty()) {
        e << YAML::Key << "warnings" << YAML::Value << YAML::BeginSeq;
        for (const auto& w : c.warnings) e << w;
        e << YAML::EndSeq;
    }
    e << YAML::EndMap;
    return std::string(e.c_str()) + "\n";
}

ResolvedRun resolve(const RunConfig& in) {
    RunConfig c = in;
    GeometryConfig& gc = c.geometry;

    // geometry
    if (!(gc.spacing_um > 0.0)) throw InvalidConfig("geometry.spacing_um", "spacing must be positive");
    double c6 = 0.0;
    if (gc.v_nn_mhz && gc.c6) throw InvalidConfig("geometry.c6_mhz_um6", "give either v_nn_mhz or c6_mhz_um6, not both");
    if (gc.v_nn_mhz)
        c6 = c6_from_nearest(*gc.v_nn_mhz, gc.spacing_um);
    else if (gc.c6)
        c6 = *gc.c6;
    else
        throw InvalidConfig("geometry.v_nn_mhz", "interaction strength missing");
    if (c6 == 0.0) throw InvalidConfig("geometry.v_nn_mhz", "interaction strength must be non-zero");
    const double v_nn = c6 / std::pow(gc.spacing_um, 6);

    const bool square = gc.kind == "square";
    if (gc.cutoff == "auto") gc.cutoff = square ? "nn_plus_nnn" : "nn_only";
    Cutoff cutoff = Cutoff::nn_only();
    if (gc.cutoff == "nn_plus_nnn") cutoff = Cutoff::nn_plus_nnn();
    if (gc.cutoff == "radius") {
        if (!(gc.cutoff_radius_um > 0.0)) throw InvalidConfig("geometry.cutoff_radius_um", "radius must be positive");
        cutoff = Cutoff::radius(gc.cutoff_radius_um);
    }
    std::optional<Geometry> geometry;
    if (square) {
        if (gc.width == 0 || gc.height == 0) throw InvalidConfig("geometry.width", "lattice needs at least one site");
        geometry = build_square(gc.width, gc.height, gc.spacing_um, c6, cutoff);
    } else {
        if (gc.n == 0) throw InvalidConfig("geometry.n", "chain needs at least one site");
        geometry = build_chain(gc.n, gc.spacing_um, c6, cutoff);
    }
    const std::size_t n_sites = geometry->size();

    // drive
    DriveConfig& dc = c.drive;
    if (!(dc.omega0_mhz > 0.0)) throw InvalidConfig("drive.omega0_mhz", "Rabi frequency must be positive");
    if (dc.n_steps == 0) throw InvalidConfig("drive.n_steps", "need at least one step");
    if (!dc.delta0_mhz) dc.delta0_mhz = square ? 1.125 * v_nn : v_nn;
    const SiteGroup first = dc.first_driven_group == "b" ? SiteGroup::b : SiteGroup::a;
    std::optional<Drive> drive;
    if (dc.kind == "rap") {
        if (!(dc.t0_us > 0.0)) throw InvalidConfig("drive.t0_us", "cycle time must be positive");
        if (!dc.amplitude_mhz) {
            if (!dc.beta_mhz) throw InvalidConfig("drive.amplitude_mhz", "give amplitude_mhz or beta_mhz");
            dc.amplitude_mhz = amplitude_from_beta(*dc.beta_mhz, dc.t0_us);
        }
        RapSchedule s;
        s.omega0_mhz = dc.omega0_mhz;
        s.t0_us = dc.t0_us;
        s.delta0_mhz = *dc.delta0_mhz;
        s.amplitude_mhz = *dc.amplitude_mhz;
        s.beta_mhz = dc.beta_mhz.value_or(0.0);
        s.n_steps = dc.n_steps;
        s.groups = assign_groups(*geometry);
        s.delta_error_mhz = dc.d_delta0_mhz;
        s.omega_error_mhz = dc.d_omega0_mhz;
        s.first_driven = first;
        s.reverse_sweep = dc.reverse_sweep;
        drive.emplace(std::move(s));
    } else {
        RabiSchedule s;
        s.omega0_mhz = dc.omega0_mhz;
        s.delta0_mhz = *dc.delta0_mhz;
        s.step_duration_us = rabi_step_duration(dc.omega0_mhz);
        s.n_steps = dc.n_steps;
        s.groups = assign_groups(*geometry);
        s.delta_error_mhz = dc.d_delta0_mhz;
        s.omega_error_mhz = dc.d_omega0_mhz;
        s.first_driven = first;
        drive.emplace(std::move(s));
        dc.t0_us = drive->cycle_us();
    }

    if (!(c.gamma_mhz >= 0.0)) throw InvalidConfig("decay.gamma_mhz", "decay rate must be non-negative");
    if (!(c.disorder.sigma_um >= 0.0)) throw InvalidConfig("disorder.sigma_um", "sigma must be non-negative");
    if (c.disorder.realizations == 0) throw InvalidConfig("disorder.realizations", "need at least one realization");
    if (c.solver.trajectories == 0) throw InvalidConfig("solver.trajectories", "need at least one trajectory");

    // initial state
    if (c.initial == "center")
        c.initial = center_bitstring(gc, n_sites);
    else if (c.initial == "vacuum")
        c.initial = std::string(n_sites, '0');
    if (c.initial.empty() || c.initial.find_first_not_of("01") != std::string::npos)
        throw InvalidConfig("initial", "expected a bitstring of '0' and '1', 'center' or 'vacuum'");
    if (c.initial.size() != n_sites)
        throw InvalidConfig("initial", fmt::format("bitstring has {} sites, geometry has {}", c.initial.size(), n_sites));

    // solver sizing
    if (c.solver.method == "full_me") {
        const bool density = c.gamma_mhz > 0.0;
        const std::size_t limit = density ? max_density_sites : max_pure_sites;
        if (n_sites > limit)
            throw ResourceRefusal(fmt::format("full_me refuses {} sites with {} (limit {}); use mf_qmc", n_sites,
                                              density ? "decay" : "a pure state", limit));
    }
    const std::size_t substeps = default_substeps(*geometry, *drive);
    if (!c.solver.dt_us) c.solver.dt_us = drive->step_duration_us() / static_cast<double>(substeps);
    if (!(*c.solver.dt_us > 0.0)) throw InvalidConfig("solver.dt_us", "time step must be positive");
    if (!c.solver.t_final_us) c.solver.t_final_us = drive->total_duration_us();
    if (!(*c.solver.t_final_us > 0.0)) throw InvalidConfig("solver.t_final_us", "final time must be positive");

    const double per_step = drive->step_duration_us() / *c.solver.dt_us;
    if (std::abs(per_step - std::round(per_step)) > 1e-6 * per_step)
        throw InvalidConfig("solver.dt_us", "drive step must be a whole number of integrator steps");
    const auto steps_per_drive_step = static_cast<std::size_t>(std::llround(per_step));
    if (!c.outputs.stride) {
        if (c.outputs.samples_per_step == 0 || steps_per_drive_step % c.outputs.samples_per_step != 0)
            throw InvalidConfig("outputs.samples_per_step",
                                fmt::format("must divide the {} integrator steps per drive step", steps_per_drive_step));
        c.outputs.stride = steps_per_drive_step / c.outputs.samples_per_step;
    }
    if (*c.outputs.stride == 0) throw InvalidConfig("outputs.stride", "stride must be at least 1");

    ResolvedRun r{c, *geometry, *drive, *c.solver.dt_us, *c.solver.t_final_us, *c.outputs.stride};
    return r;
}

std::vector<std::string> preset_names() {
    return {"fig2_rap",          "fig2_rap_ideal",     "fig2_rap_disorder", "fig2_rap_decay",
            "fig2_rabi",         "fig2_rabi_ideal",    "fig2_rabi_disorder", "fig2_rabi_decay",
            "fig2f_scan",        "fig2f_scan_rap",     "fig3_chain5",       "fig4_chain9",
            "fig4_chain9_ideal", "fig4_dark",          "fig4_dark_v80",     "fig5_compare",
            "fig5_mfme",         "fig6_chain33",       "fig7_square2d",     "fig7_square2d_ideal",
            "si_two_photon",     "si_two_photon_rabi"};
}

RunConfig preset(std::string_view name) {
    const std::string n(name);
    if (n == "fig2_rap_ideal") {
        RunConfig c = rap_chain(n, 2, 8);
        c.initial = "10";
        return c;
    }
    if (n == "fig2_rabi_ideal") return rabi_pair(n);
    if (n == "fig2_rap" || n == "fig2_rap_disorder" || n == "fig2_rap_decay" || n == "fig2_rabi" ||
        n == "fig2_rabi_disorder" || n == "fig2_rabi_decay") {
        const bool rap = n.rfind("fig2_rap", 0) == 0;
        RunConfig c = rap ? preset("fig2_rap_ideal") : rabi_pair(n);
        c.name = n;
        c.outputs.directory = "out/" + n;
        const bool disorder = n.find("decay") == std::string::npos;
        const bool decay = n.find("disorder") == std::string::npos;
        if (disorder) c.disorder = {rap ? rap_sigma : rabi_sigma, 50};
        if (decay) c.gamma_mhz = room_gamma;
        return c;
    }
    if (n == "fig2f_scan") {
        RunConfig c = rabi_pair(n);
        c.scan = ScanConfig{};
        return c;
    }
    if (n == "fig2f_scan_rap") {
        RunConfig c = preset("fig2_rap_ideal");
        c.name = n;
        c.outputs.directory = "out/" + n;
        c.scan = ScanConfig{};
        return c;
    }
    if (n == "fig3_chain5") return rap_chain(n, 5, 8);
    if (n == "fig4_chain9") {
        RunConfig c = rap_chain(n, 9, 4);
        c.gamma_mhz = room_gamma;
        c.initial = "000010000";
        return c;
    }
    if (n == "fig4_chain9_ideal") {
        RunConfig c = rap_chain(n, 9, 4);
        c.initial = "000010000";
        return c;
    }
    if (n == "fig4_dark") {
        RunConfig c = rap_chain(n, 9, 4);
        c.initial = "vacuum";
        return c;
    }
    if (n == "fig4_dark_v80") {
        RunConfig c = rap_chain(n, 9, 4);
        c.geometry.v_nn_mhz = 80.0;
        c.initial = "vacuum";
        return c;
    }
    if (n == "fig5_compare") {
        RunConfig c = preset("fig4_chain9");
        c.name = n;
        c.outputs.directory = "out/" + n;
        c.solver.method = "mf_qmc";
        c.solver.trajectories = 700;
        return c;
    }
    if (n == "fig5_mfme") {
        RunConfig c = preset("fig4_chain9");
        c.name = n;
        c.outputs.directory = "out/" + n;
        c.solver.method = "mf_me";
        return c;
    }
    if (n == "fig6_chain33") {
        RunConfig c = rap_chain(n, 33, 16);
        c.gamma_mhz = room_gamma;
        c.solver.method = "mf_qmc";
        c.solver.trajectories = 500;
        return c;
    }
    if (n == "fig7_square2d" || n == "fig7_square2d_ideal") {
        RunConfig c = rap_chain(n, 1, 7);
        c.geometry.kind = "square";
        c.geometry.n = 0;
        c.geometry.width = 15;
        c.geometry.height = 15;
        c.drive.delta0_mhz = 22.5;
        c.solver.method = "mf_qmc";
        if (n == "fig7_square2d") {
            c.gamma_mhz = room_gamma;
            c.solver.trajectories = 100;
        }
        return c;
    }
    if (n == "si_two_photon" || n == "si_two_photon_rabi") {
        const bool rap = n == "si_two_photon";
        RunConfig c = rap ? rap_chain(n, 2, 8) : rabi_pair(n);
        c.geometry.spacing_um = rap ? 5.1 : 7.7;
        c.geometry.v_nn_mhz = rap ? 50.0 : 4.0;
        c.drive.omega0_mhz = rap ? 32.0 : 1.0;
        if (rap) {
            // Cycle and sweep not given for this set: pulse area and sweep-to-shift ratio kept from the one-photon set.
            c.drive.t0_us = 1.0;
            c.drive.beta_mhz.reset();
            c.drive.amplitude_mhz = 17.25;
        }
        c.initial = "10";
        c.gamma_mhz = 6.0;
        c.disorder = {rap ? 0.054 : 0.034, 50};
        c.warnings.push_back(
            "gamma_mhz = 6 is used as given for this set; a decay-to-Rabi ratio of 0.2% would instead give "
            "about 0.006 MHz");
        if (rap) c.warnings.push_back("t0_us and amplitude_mhz are assumed: T0 scaled by 10.7/32, sweep half-range 0.345 V");
        return c;
    }
    throw InvalidConfig("preset", fmt::format("unknown preset '{}'", n));
}

}  // namespace rydfac
