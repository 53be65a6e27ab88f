#ifndef ETCSIM_DEVICE_HPP
#define ETCSIM_DEVICE_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "etcsim/rng.hpp"

namespace etcsim {

// Conductance states below this are clamped; one decade under the bottom of
// the measured conductance sweep.
inline constexpr double kConductanceFloor = 1e-13;

// State-dependent conductance error sigma_G(G): ordered (G, sigma) anchor
// points, interpolated piecewise-linearly in log-log space with constant
// extrapolation beyond the ends. sigma_G is the total write+read error of a
// programmed state; it is not decomposed per operation.
class ErrorModel {
public:
    struct Anchor {
        double g = 0.0;     // siemens
        double sigma = 0.0; // siemens
    };

    ErrorModel() = default;
    explicit ErrorModel(std::vector<Anchor> anchors);

    double sigma_at(double g) const;

    const std::vector<Anchor>& anchors() const { return anchors_; }

    // Uniformly scaled copy (sigma' = k * sigma).
    ErrorModel scaled(double k) const;

private:
    std::vector<Anchor> anchors_;
};

inline double sigma_at(const ErrorModel& model, double g) { return model.sigma_at(g); }

struct DeviceParams {
    double g_min = 0.0; // siemens, minimum programmable conductance
    double g_max = 0.0; // siemens, maximum programmable conductance
    ErrorModel error_model;
    bool iv_linear = false; // multi-level voltage inputs permitted
    std::string label;
};

void validate(const DeviceParams& p);

struct PulseSpec {
    double voltage = 0.0;  // volts; positive potentiates, negative depresses
    double duration = 0.0; // seconds, > 0
};

// Grid of fractional conductance change dG/G0 vs write voltage and duration.
// Interpolation is bilinear in (V, log t); queries outside the grid clamp to
// the nearest edge.
class UpdateMap {
public:
    UpdateMap() = default;
    UpdateMap(std::vector<double> voltage_grid,
              std::vector<double> duration_grid,
              std::vector<double> delta_fraction, // row-major [voltage][duration]
              double significance_sigma_multiple = 3.0);

    // Fractional change for a pulse; *clamped set when (v, t) fell outside the grid.
    double delta_at(double voltage, double duration, bool* clamped = nullptr) const;

    const std::vector<double>& voltage_grid() const { return voltage_grid_; }
    const std::vector<double>& duration_grid() const { return duration_grid_; }
    const std::vector<double>& delta_fraction() const { return delta_; }
    double significance_sigma_multiple() const { return sig_multiple_; }

    double value(int vi, int ti) const { return delta_[static_cast<std::size_t>(vi) * duration_grid_.size() + ti]; }

    // Checks sign(delta) == sign(V) on every cell whose |dG| at g0 exceeds the
    // significance boundary of the given error model. Throws on violation.
    void validate_signs(const ErrorModel& model, double g0) const;

private:
    std::vector<double> voltage_grid_;
    std::vector<double> duration_grid_;
    std::vector<double> delta_;
    double sig_multiple_ = 3.0;
};

struct DeviceState {
    double conductance = 0.0;      // siemens, > 0
    std::uint64_t write_count = 0; // monotone
    const DeviceParams* params = nullptr;
};

DeviceState make_device(const DeviceParams& params, double g0);

struct ReadOptions {
    double linear_window = 0.05; // volts; Ohmic readout demonstrated to 50 mV
    bool allow_outside = false;
};

// Ideal Ohmic readout I = G * v. Read noise lives in the error model.
double read_current(const DeviceState& state, double v_read, const ReadOptions& opts = {});

// One write pulse: dG = G0 * map(v, t), zeroed when below the significance
// boundary, otherwise scaled by (1 + eps), eps ~ N(0, relative_noise). The new
// conductance is clamped to [floor, g_max] and write_count increments.
DeviceState apply_pulse(const DeviceState& state, const PulseSpec& pulse, const UpdateMap& map,
                        double relative_noise, Rng& rng);

struct RetentionParams {
    double reference_temperature = 473.15; // kelvin, calibration temperature
    double fraction_per_decade = 0.0;      // fractional loss per decade of time
    double onset_time = 1.0;               // seconds
};

void validate(const RetentionParams& p);

// Log-time retention loss: G(t) = G0 * (1 - f * log10(1 + t/onset)).
// Temperature is recorded metadata only; calibration is single-temperature.
DeviceState drift(const DeviceState& state, double temperature, double elapsed,
                  const RetentionParams& params);

struct CorrectedWidth {
    double seconds = 0.0;
    bool sub_transient = false; // nominal width fell inside the setup transient
};

// Nanosecond pulse-width correction: actual = slope * nominal + intercept,
// clamped at zero. Defaults from the measured transient fit.
CorrectedWidth correct_pulse_width(double nominal, double slope = 0.99,
                                   double intercept = -102e-9);

} // namespace etcsim

#endif
