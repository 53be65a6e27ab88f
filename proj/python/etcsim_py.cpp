#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "etcsim/analysis.hpp"
#include "etcsim/crossbar.hpp"
#include "etcsim/io.hpp"
#include "etcsim/presets.hpp"
#include "etcsim/programming.hpp"
#include "etcsim/thermal.hpp"

namespace py = pybind11;
using namespace etcsim;

namespace {

Matrix matrix_from_numpy(const py::array_t<double, py::array::c_style | py::array::forcecast>& a) {
    if (a.ndim() != 2) throw std::invalid_argument("expected a 2-D array");
    Matrix m(static_cast<int>(a.shape(0)), static_cast<int>(a.shape(1)));
    std::memcpy(m.data.data(), a.data(), m.data.size() * sizeof(double));
    return m;
}

py::array_t<double> numpy_from_matrix(const Matrix& m) {
    py::array_t<double> a({m.rows, m.cols});
    std::memcpy(a.mutable_data(), m.data.data(), m.data.size() * sizeof(double));
    return a;
}

} // namespace

PYBIND11_MODULE(_etcsim, m) {
    m.doc() = "Behavioral simulator of self-heating electrochemical analog memory";

    py::class_<ErrorModel>(m, "ErrorModel")
        .def(py::init([](const std::vector<std::pair<double, double>>& anchors) {
            std::vector<ErrorModel::Anchor> a;
            for (const auto& [g, s] : anchors) a.push_back({g, s});
            return ErrorModel(std::move(a));
        }))
        .def("sigma_at", &ErrorModel::sigma_at)
        .def_static("load_csv", &load_error_model_csv);

    m.def("count_states", &count_states, py::arg("model"), py::arg("g_lo"), py::arg("g_hi"),
          py::arg("points_per_decade") = 100);

    py::class_<UpdateMap>(m, "UpdateMap")
        .def_static("load_csv", &load_update_map_csv, py::arg("path"),
                    py::arg("significance_sigma_multiple") = 3.0)
        .def("delta_at", [](const UpdateMap& map, double v, double t) { return map.delta_at(v, t); });

    m.def("default_data_dir", &default_data_dir);
    m.def("load_default_update_map", &load_default_update_map);

    m.def(
        "write_verify",
        [](double start, double target, double g_min, double g_max, const std::string& sigma_csv,
           const UpdateMap& map, double tolerance, int max_pulses, double noise,
           std::uint64_t seed) {
            DeviceParams params{g_min, g_max, load_error_model_csv(sigma_csv), true, "py"};
            DeviceState dev = make_device(params, start);
            Rng rng(seed);
            const ProgramPolicy policy = default_policy(map, tolerance, max_pulses);
            const ProgramResult r = write_verify(dev, target, policy, map, noise, rng);
            py::dict out;
            out["pulses_used"] = r.pulses_used;
            out["final_conductance"] = r.final_conductance;
            out["final_error_fraction"] = r.final_error_fraction;
            out["converged"] = r.converged;
            return out;
        },
        py::arg("start"), py::arg("target"), py::arg("g_min"), py::arg("g_max"),
        py::arg("sigma_csv"), py::arg("map"), py::arg("tolerance") = 0.006,
        py::arg("max_pulses") = 50, py::arg("noise") = 0.10, py::arg("seed") = 1);

    m.def(
        "solve_array",
        [](const py::array_t<double, py::array::c_style | py::array::forcecast>& g,
           const std::vector<double>& v, double wire_resistance, double tolerance) {
            CrossbarConfig cfg;
            cfg.wire_resistance = wire_resistance;
            cfg.solver_tolerance = tolerance;
            return solve_array(matrix_from_numpy(g), v, cfg);
        },
        py::arg("conductances"), py::arg("row_voltages"), py::arg("wire_resistance") = 0.35,
        py::arg("tolerance") = 1e-9);

    m.def(
        "ideal_mvm",
        [](const py::array_t<double, py::array::c_style | py::array::forcecast>& w,
           const std::vector<double>& x) { return ideal_mvm(matrix_from_numpy(w), x); },
        py::arg("weights"), py::arg("inputs"));

    m.def(
        "run_mvm",
        [](const py::array_t<double, py::array::c_style | py::array::forcecast>& w,
           const std::vector<int>& q, const std::string& device, const std::string& encoding,
           double wire_resistance, std::uint64_t seed, const std::string& data_dir) {
            const std::string dir = data_dir.empty() ? default_data_dir() : data_dir;
            SweepDevice dev = preset_device(device, dir);
            Rng rng(seed);
            MappedArray mapped =
                map_weights(matrix_from_numpy(w), dev.params, dev.params.error_model, rng);
            CrossbarConfig cfg;
            cfg.wire_resistance = wire_resistance;
            const MvmResult r = run_mvm(
                mapped, q, encoding.empty() ? dev.encoding : encoding_from_string(encoding), cfg);
            py::dict out;
            out["recombined"] = r.recombined;
            out["ideal"] = r.ideal;
            out["rms_error"] = r.rms_error;
            out["normalized_rms_error"] = r.normalized_rms_error;
            out["signal_range"] = r.signal_range;
            return out;
        },
        py::arg("weights"), py::arg("quantized_inputs"), py::arg("device") = "etcram",
        py::arg("encoding") = "", py::arg("wire_resistance") = 0.35, py::arg("seed") = 1,
        py::arg("data_dir") = "");

    m.def("quantize_inputs", &quantize_inputs, py::arg("x"), py::arg("bits") = 8,
          py::arg("x_max") = 1.0);

    py::class_<ThermalStack>(m, "ThermalStack")
        .def(py::init<>())
        .def_readwrite("wire_length", &ThermalStack::wire_length)
        .def_readwrite("half_width", &ThermalStack::half_width)
        .def_readwrite("ambient", &ThermalStack::ambient);

    m.def(
        "critical_power",
        [](const ThermalStack& s, double target_rise) {
            const auto cp = critical_power(s, target_rise);
            py::dict out;
            out["power"] = cp.power;
            out["rise_per_watt"] = cp.rise_per_watt;
            out["grid_levels"] = cp.grid_levels;
            return out;
        },
        py::arg("stack"), py::arg("target_rise") = 300.0);

    m.def(
        "sweep_length",
        [](const ThermalStack& s, const std::vector<double>& lengths, double target_rise) {
            py::list out;
            for (const auto& p : sweep_length(s, lengths, target_rise)) {
                py::dict d;
                d["length"] = p.length;
                d["p_crit"] = p.p_crit;
                out.append(d);
            }
            return out;
        },
        py::arg("stack"), py::arg("lengths"), py::arg("target_rise") = 300.0);

    m.def("lumped_critical_power", &lumped_critical_power);
    m.def(
        "fit_power_law",
        [](const std::vector<std::pair<double, double>>& pts) {
            const auto fit = fit_power_law(pts);
            return py::make_tuple(fit.exponent, fit.prefactor, fit.exponent_std);
        },
        py::arg("points"));

    m.def("encoding_energy_factor", &encoding_energy_factor, py::arg("baseline_cycles") = 8.0,
          py::arg("target_cycles") = 2.0, py::arg("overhead") = 0.36);
    m.def(
        "overall_energy_advantage",
        [](int cycles, double overhead, double ratio, bool linearity) {
            return overall_energy_advantage({cycles, overhead, ratio, ""}, linearity);
        },
        py::arg("cycles") = 8, py::arg("overhead") = 0.36, py::arg("array_size_ratio") = 1.0,
        py::arg("linearity_applies") = true);

    m.def(
        "psd_estimate",
        [](const std::vector<double>& samples, double fs, int segments) {
            const auto sp = psd_estimate(samples, fs, segments);
            return py::make_tuple(sp.frequencies, sp.psd);
        },
        py::arg("samples"), py::arg("sample_rate"), py::arg("segments") = 50);

    m.def(
        "tcr_fit",
        [](const std::vector<std::pair<double, double>>& pairs) {
            const auto cal = tcr_fit(pairs);
            return py::make_tuple(cal.alpha, cal.r0);
        },
        py::arg("pairs"));
    m.def(
        "temperature_from_resistance",
        [](double alpha, double r0, double r) {
            return temperature_from_resistance({alpha, r0, ""}, r);
        },
        py::arg("alpha"), py::arg("r0"), py::arg("resistance"));

    m.attr("__version__") = "0.1.0";
}
