#include <CLI11.hpp>
#include <json.hpp>

#include <chrono>
#include <cstdint>
#include <fstream>
#include <iostream>
#include <random>
#include <string>
#include <vector>

#include "etcsim/analysis.hpp"
#include "etcsim/crossbar.hpp"
#include "etcsim/io.hpp"
#include "etcsim/presets.hpp"
#include "etcsim/programming.hpp"
#include "etcsim/thermal.hpp"

using json = nlohmann::json;
using namespace etcsim;

namespace {

constexpr const char* kVersion = "0.1.0";

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitData = 2;
constexpr int kExitNoConverge = 3;

// flag > config file > built-in default
class ConfigFile {
public:
    void load(const std::string& path) {
        std::ifstream in(path);
        if (!in) throw std::runtime_error("cannot open config file " + path);
        in >> doc_;
        if (!doc_.is_object()) throw std::runtime_error(path + ": config must be a JSON object");
    }

    template <typename T>
    void apply(const CLI::Option* opt, const std::string& key, T& value) const {
        if (opt && opt->count() > 0) return; // explicit flag wins
        if (doc_.contains(key)) value = doc_.at(key).get<T>();
    }

private:
    json doc_ = json::object();
};

void write_sidecar(const std::string& out_path, const std::string& command, std::uint64_t seed,
                   const json& effective) {
    json side;
    side["command"] = command;
    side["seed"] = seed;
    side["effective_config"] = effective;
    side["config_hash"] = fnv1a(effective.dump());
    side["version"] = kVersion;
    std::ofstream f(out_path + ".sidecar.json");
    if (!f) throw std::runtime_error("cannot write sidecar for " + out_path);
    f << side.dump(2) << "\n";
}

std::uint64_t default_seed(const CLI::Option* opt, std::uint64_t value) {
    if (opt->count() > 0) return value;
    return static_cast<std::uint64_t>(
        std::chrono::duration_cast<std::chrono::milliseconds>(
            std::chrono::system_clock::now().time_since_epoch())
            .count());
}

std::vector<int> parse_int_list(const std::string& csv) {
    std::vector<int> out;
    std::stringstream ss(csv);
    std::string tok;
    while (std::getline(ss, tok, ',')) out.push_back(std::stoi(tok));
    if (out.empty()) throw std::runtime_error("empty list: " + csv);
    return out;
}

ThermalStack stack_from_json(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open stack file " + path);
    json j;
    in >> j;
    ThermalStack s;
    auto get = [&](const char* key, double& field) {
        if (j.contains(key)) field = j.at(key).get<double>();
    };
    get("kappa_vacuum", s.kappa_vacuum);
    get("kappa_wire", s.kappa_wire);
    get("kappa_stack", s.kappa_stack);
    get("kappa_substrate", s.kappa_substrate);
    get("h_vacuum", s.h_vacuum);
    get("wire_thickness", s.wire_thickness);
    get("stack_thickness", s.stack_thickness);
    get("h_substrate", s.h_substrate);
    get("g12", s.g12);
    get("g23", s.g23);
    get("g34", s.g34);
    get("wire_length", s.wire_length);
    get("ambient", s.ambient);
    get("half_width", s.half_width);
    return s;
}

int cmd_mvm_sweep(const std::string& data_dir, const ConfigFile& cfgfile, CLI::App* cmd,
                  std::vector<std::string> device_names, std::string rows_csv,
                  std::string weights_path, std::string inputs_path, bool desk, double rw,
                  double vfs, std::uint64_t seed, int workers, int vectors, int mrows, int mcols,
                  std::string out_path) {
    cfgfile.apply(cmd->get_option("--rows"), "rows", rows_csv);
    cfgfile.apply(cmd->get_option("--rw"), "rw", rw);
    cfgfile.apply(cmd->get_option("--vfs"), "vfs", vfs);
    cfgfile.apply(cmd->get_option("--workers"), "workers", workers);

    if (desk) {
        if (cmd->get_option("--rows")->count() == 0) rows_csv = "72,144,288,512";
        if (cmd->get_option("--matrix-rows")->count() == 0) mrows = 512;
        if (cmd->get_option("--matrix-cols")->count() == 0) mcols = 512;
        if (cmd->get_option("--vectors")->count() == 0) vectors = 100;
    }

    if (device_names.empty() || (device_names.size() == 1 && device_names[0] == "all"))
        device_names = preset_device_names();
    std::vector<SweepDevice> devices;
    for (const auto& name : device_names) devices.push_back(preset_device(name, data_dir));

    Matrix w;
    std::vector<std::vector<double>> inputs;
    Rng gen(Rng::derive(seed, {0x57454947}));
    if (!weights_path.empty()) {
        w = load_matrix(weights_path);
    } else {
        w = synthetic_gaussian_weights(mrows, mcols, gen);
    }
    if (!inputs_path.empty()) {
        const Matrix im = load_matrix(inputs_path);
        if (im.cols != w.rows)
            throw std::runtime_error("input vectors have length " + std::to_string(im.cols) +
                                     " but the matrix has " + std::to_string(w.rows) + " rows");
        for (int i = 0; i < im.rows; ++i)
            inputs.emplace_back(im.data.begin() + static_cast<std::size_t>(i) * im.cols,
                                im.data.begin() + static_cast<std::size_t>(i + 1) * im.cols);
    } else {
        inputs = synthetic_relu_inputs(vectors, w.rows, gen);
    }

    double x_max = 0.0;
    for (const auto& vec : inputs)
        for (double x : vec) x_max = std::max(x_max, x);
    if (x_max == 0.0) x_max = 1.0;
    std::vector<std::vector<int>> q;
    q.reserve(inputs.size());
    for (const auto& vec : inputs) q.push_back(quantize_inputs(vec, 8, x_max));

    CrossbarConfig cfg;
    cfg.wire_resistance = rw;
    cfg.full_scale_voltage = vfs;

    const auto table =
        mvm_error_sweep(devices, parse_int_list(rows_csv), w, q, cfg, x_max, seed, workers);

    std::ofstream out(out_path);
    if (!out) throw std::runtime_error("cannot write " + out_path);
    out << "device,array_rows,rw_ohms,encoding,normalized_rms,rms,signal_range,seed\n";
    for (const auto& r : table)
        out << r.device << ',' << r.array_rows << ',' << format_double(r.rw_ohms) << ','
            << to_string(r.encoding) << ',' << format_double(r.normalized_rms) << ','
            << format_double(r.rms) << ',' << format_double(r.signal_range) << ',' << r.seed
            << '\n';
    out.close();

    json eff;
    eff["devices"] = device_names;
    eff["rows"] = rows_csv;
    eff["rw"] = rw;
    eff["vfs"] = vfs;
    eff["weights"] = weights_path;
    eff["inputs"] = inputs_path;
    eff["vectors"] = static_cast<int>(inputs.size());
    eff["matrix_rows"] = w.rows;
    eff["matrix_cols"] = w.cols;
    eff["x_max"] = x_max;
    eff["workers"] = workers;
    write_sidecar(out_path, "mvm-sweep", seed, eff);
    std::cout << "wrote " << table.size() << " sweep rows to " << out_path << "\n";
    return kExitOk;
}

int cmd_program(const std::string& data_dir, std::string device, double start, double target,
                double tolerance, int max_pulses, double noise, std::string map_path,
                std::uint64_t seed, std::string out_path) {
    SweepDevice dev = preset_device(device, data_dir);
    UpdateMap map =
        map_path.empty() ? load_default_update_map(data_dir) : load_update_map_csv(map_path);
    ProgramPolicy policy = default_policy(map, tolerance, max_pulses);

    DeviceParams params = dev.params;
    params.g_max = std::max(params.g_max, 1e-3); // programming range exceeds the mapping window
    DeviceState state = make_device(params, start);
    Rng rng(seed);
    const ProgramResult r = write_verify(state, target, policy, map, noise, rng);

    json out;
    out["target_siemens"] = target;
    out["start_siemens"] = start;
    out["pulses_used"] = r.pulses_used;
    out["final_conductance_siemens"] = r.final_conductance;
    out["final_error_fraction"] = r.final_error_fraction;
    out["converged"] = r.converged;
    json traj = json::array();
    for (const auto& [k, g] : r.trajectory) traj.push_back({{"pulse", k}, {"conductance", g}});
    out["trajectory"] = traj;

    if (!out_path.empty()) {
        std::ofstream f(out_path);
        if (!f) throw std::runtime_error("cannot write " + out_path);
        f << out.dump(2) << "\n";
        std::ofstream csv(out_path + ".summary.csv");
        if (!csv) throw std::runtime_error("cannot write summary for " + out_path);
        csv << "device,start_siemens,target_siemens,pulses_used,final_conductance_siemens,"
               "final_error_fraction,converged,seed\n";
        csv << device << ',' << format_double(start) << ',' << format_double(target) << ','
            << r.pulses_used << ',' << format_double(r.final_conductance) << ','
            << format_double(r.final_error_fraction) << ',' << (r.converged ? "true" : "false")
            << ',' << seed << '\n';
        json eff;
        eff["device"] = device;
        eff["start"] = start;
        eff["target"] = target;
        eff["tolerance"] = tolerance;
        eff["max_pulses"] = max_pulses;
        eff["noise"] = noise;
        eff["map"] = map_path;
        write_sidecar(out_path, "program", seed, eff);
    }
    std::cout << "pulses=" << r.pulses_used << " final_error=" << r.final_error_fraction
              << " converged=" << (r.converged ? "true" : "false") << "\n";
    return r.converged ? kExitOk : kExitNoConverge;
}

int cmd_thermal(double length, std::string sweep_spec, double target_rise, std::string stack_path,
                std::string out_path) {
    ThermalStack base = stack_path.empty() ? ThermalStack{} : stack_from_json(stack_path);

    std::vector<double> lengths;
    if (!sweep_spec.empty()) {
        double lo = 0.0, hi = 0.0;
        int n = 0;
        if (std::sscanf(sweep_spec.c_str(), "%lf:%lf:%d", &lo, &hi, &n) != 3 || n < 2)
            throw std::runtime_error("--sweep expects lo:hi:count");
        for (int k = 0; k < n; ++k) lengths.push_back(lo + (hi - lo) * k / (n - 1));
    } else {
        lengths = {length};
    }

    const auto pts = sweep_length(base, lengths, target_rise);
    std::ostringstream csv;
    csv << "length_m,p_crit_w,grid_levels,rise_per_watt\n";
    for (const auto& p : pts)
        csv << format_double(p.length) << ',' << format_double(p.p_crit) << ',' << p.grid_levels
            << ',' << format_double(p.rise_per_watt) << '\n';

    if (!out_path.empty()) {
        std::ofstream f(out_path);
        if (!f) throw std::runtime_error("cannot write " + out_path);
        f << csv.str();
        json eff;
        eff["lengths"] = lengths;
        eff["target_rise"] = target_rise;
        eff["stack"] = stack_path;
        write_sidecar(out_path, "thermal", 0, eff);
    }
    std::cout << csv.str();
    return kExitOk;
}

int cmd_energy(std::string device, double ratio_override, bool ratio_given) {
    EnergyScenario sc;
    bool linear = true;
    if (device == "sonos") {
        sc = {8, 0.36, 3.2, "sonos"};
    } else if (device == "pcm") {
        sc = {8, 0.36, 22.0, "pcm"};
    } else if (device == "memristor") {
        sc = {8, 0.36, 64.0, "memristor"};
        linear = false; // benefit withheld: linearity neither shown nor claimed
    } else {
        throw std::runtime_error("energy: unknown device " + device);
    }
    if (ratio_given) sc.array_size_ratio = ratio_override;
    const double adv = overall_energy_advantage(sc, linear);
    json out;
    out["device"] = device;
    out["array_size_ratio"] = sc.array_size_ratio;
    out["encoding_factor"] = linear ? encoding_energy_factor(sc.cycles, 2.0,
                                                             sc.per_input_overhead_fraction)
                                    : 1.0;
    out["advantage"] = adv;
    std::cout << out.dump(2) << "\n";
    return kExitOk;
}

int cmd_states(std::string calib, double glo, double ghi, int ppd) {
    const ErrorModel model = load_error_model_csv(calib);
    const double n = count_states(model, glo, ghi, ppd);
    json out;
    out["g_lo"] = glo;
    out["g_hi"] = ghi;
    out["levels"] = n;
    std::cout << out.dump(2) << "\n";
    return kExitOk;
}

int cmd_calibrate(std::string tcr_path, std::string powerlaw_path, std::string psd_path,
                  int segments, double rate, std::string out_path) {
    const int modes = (!tcr_path.empty()) + (!powerlaw_path.empty()) + (!psd_path.empty());
    if (modes != 1)
        throw std::runtime_error("calibrate: pass exactly one of --tcr, --powerlaw, --psd");

    json out;
    if (!tcr_path.empty()) {
        const auto cal = tcr_fit(load_tcr_csv(tcr_path));
        out["kind"] = "tcr";
        out["alpha_ohm_per_k"] = cal.alpha;
        out["r0_ohm"] = cal.r0;
    } else if (!powerlaw_path.empty()) {
        const auto pts = load_pairs_csv(powerlaw_path, "feature_size_m", "power_w");
        const auto fit = fit_power_law(pts);
        out["kind"] = "powerlaw";
        out["exponent"] = fit.exponent;
        out["exponent_std"] = fit.exponent_std;
        out["prefactor"] = fit.prefactor;
    } else {
        const Trace tr = load_trace_csv(psd_path);
        const double fs = rate > 0.0 ? rate : tr.sample_rate();
        const auto sp = psd_estimate(tr.current, fs, segments);
        const double f_hi = sp.frequencies.back();
        const auto ni = integrate_noise(sp, {f_hi * 0.6, f_hi}, {f_hi * 0.6, 1e8}, true);
        out["kind"] = "psd";
        out["segments"] = sp.averages;
        out["floor_psd_per_hz"] = ni.floor_psd;
        out["extrapolated_variance"] = ni.variance;
        if (!out_path.empty()) {
            std::ofstream f(out_path);
            if (!f) throw std::runtime_error("cannot write " + out_path);
            f << "frequency_hz,psd_per_hz\n";
            for (std::size_t i = 0; i < sp.frequencies.size(); ++i)
                f << format_double(sp.frequencies[i]) << ',' << format_double(sp.psd[i]) << '\n';
        }
    }
    std::cout << out.dump(2) << "\n";
    return kExitOk;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"etcsim: behavioral simulator of self-heating electrochemical analog memory"};
    app.set_version_flag("--version", std::string("etcsim ") + kVersion);
    app.require_subcommand(1);

    std::string data_dir = default_data_dir();
    std::string config_path;
    app.add_option("--data-dir", data_dir, "calibration data directory");
    app.add_option("--config", config_path, "JSON config file (flag > config > default)");

    // mvm-sweep
    auto* sweep = app.add_subcommand("mvm-sweep", "array-size error sweep across devices");
    std::vector<std::string> device_names;
    std::string rows_csv = "72,144,288,576,1152,2304,4608";
    std::string weights_path, inputs_path, sweep_out = "mvm_sweep.csv";
    double rw = 0.35, vfs = 0.1;
    std::uint64_t sweep_seed = 0;
    int workers = 0, vectors = 19600, mrows = 4608, mcols = 512;
    sweep->add_option("--device", device_names, "device preset(s) or 'all'");
    sweep->add_option("--rows", rows_csv, "comma-separated array row counts");
    sweep->add_option("--weights", weights_path, "weight matrix file (.csv or .bin)");
    sweep->add_option("--inputs", inputs_path, "input vectors file, one vector per row");
    std::string preset;
    sweep->add_option("--preset", preset, "workload preset: desk (512x512 matrix, 100 vectors)")
        ->check(CLI::IsMember({"desk"}));
    sweep->add_option("--rw", rw, "wire resistance per segment, ohms");
    sweep->add_option("--vfs", vfs, "full-scale input voltage");
    auto* sweep_seed_opt = sweep->add_option("--seed", sweep_seed, "master seed");
    sweep->add_option("--workers", workers, "worker threads (0 = auto, never changes results)");
    sweep->add_option("--vectors", vectors, "synthetic input vector count");
    sweep->add_option("--matrix-rows", mrows, "synthetic matrix rows");
    sweep->add_option("--matrix-cols", mcols, "synthetic matrix cols");
    sweep->add_option("--out", sweep_out, "output CSV path");

    // program
    auto* prog = app.add_subcommand("program", "closed-loop write-verify to a target state");
    std::string prog_device = "etcram", map_path, prog_out;
    double start_g = 10e-9, target_g = 50e-9, tolerance = 0.006, noise = 0.10;
    int max_pulses = 50;
    std::uint64_t prog_seed = 0;
    prog->add_option("--device", prog_device, "device preset");
    prog->add_option("--start", start_g, "starting conductance, siemens");
    prog->add_option("--target", target_g, "target conductance, siemens")->required();
    prog->add_option("--tolerance", tolerance, "fractional tolerance");
    prog->add_option("--max-pulses", max_pulses, "pulse budget");
    prog->add_option("--noise", noise, "relative write noise");
    prog->add_option("--map", map_path, "update map CSV (default: shipped map)");
    auto* prog_seed_opt = prog->add_option("--seed", prog_seed, "seed");
    prog->add_option("--out", prog_out, "JSON trajectory output");

    // thermal
    auto* thermal = app.add_subcommand("thermal", "critical programming power vs wire length");
    std::string sweep_spec, stack_path, thermal_out;
    double length = 100e-9, target_rise = 300.0;
    thermal->add_option("--length", length, "wire length, meters");
    thermal->add_option("--sweep", sweep_spec, "length sweep lo:hi:count");
    thermal->add_option("--target-rise", target_rise, "target mid-channel rise, kelvin");
    thermal->add_option("--stack", stack_path, "stack JSON (default: built-in parameter set)");
    thermal->add_option("--out", thermal_out, "output CSV path");

    // energy
    auto* energy = app.add_subcommand("energy", "peripheral energy advantage vs a baseline device");
    std::string energy_device = "sonos";
    double ratio = 0.0;
    energy->add_option("--device", energy_device, "sonos | pcm | memristor");
    auto* ratio_opt = energy->add_option("--ratio", ratio, "override the iso-accuracy array ratio");

    // states
    auto* states = app.add_subcommand("states", "distinguishable analog level count");
    std::string calib;
    double glo = 1e-9, ghi = 1e-3;
    int ppd = 100;
    states->add_option("--calib", calib, "error model CSV")->required();
    states->add_option("--glo", glo, "lower conductance bound");
    states->add_option("--ghi", ghi, "upper conductance bound");
    states->add_option("--points-per-decade", ppd, "quadrature density");

    // calibrate
    auto* calibrate = app.add_subcommand("calibrate", "fit calibrations from measurement files");
    std::string tcr_path, powerlaw_path, psd_path, calib_out;
    int segments = 50;
    double rate = 0.0;
    calibrate->add_option("--tcr", tcr_path, "temperature_k,resistance_ohms CSV");
    calibrate->add_option("--powerlaw", powerlaw_path, "feature_size_m,power_w CSV");
    calibrate->add_option("--psd", psd_path, "t_seconds,current_amperes trace CSV");
    calibrate->add_option("--segments", segments, "averaging segments");
    calibrate->add_option("--rate", rate, "sample rate override, Hz");
    calibrate->add_option("--out", calib_out, "spectrum CSV output (psd mode)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForVersion& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitUsage;
    }

    try {
        ConfigFile cfgfile;
        if (!config_path.empty()) cfgfile.load(config_path);

        if (sweep->parsed()) {
            const std::uint64_t seed = default_seed(sweep_seed_opt, sweep_seed);
            return cmd_mvm_sweep(data_dir, cfgfile, sweep, device_names, rows_csv, weights_path,
                                 inputs_path, preset == "desk", rw, vfs, seed, workers, vectors,
                                 mrows, mcols, sweep_out);
        }
        if (prog->parsed()) {
            const std::uint64_t seed = default_seed(prog_seed_opt, prog_seed);
            return cmd_program(data_dir, prog_device, start_g, target_g, tolerance, max_pulses,
                               noise, map_path, seed, prog_out);
        }
        if (thermal->parsed())
            return cmd_thermal(length, sweep_spec, target_rise, stack_path, thermal_out);
        if (energy->parsed())
            return cmd_energy(energy_device, ratio, ratio_opt->count() > 0);
        if (states->parsed()) return cmd_states(calib, glo, ghi, ppd);
        if (calibrate->parsed())
            return cmd_calibrate(tcr_path, powerlaw_path, psd_path, segments, rate, calib_out);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitData;
    }
    return kExitUsage;
}
