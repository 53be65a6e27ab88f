#ifndef ETCSIM_ANALYSIS_HPP
#define ETCSIM_ANALYSIS_HPP

#include <string>
#include <utility>
#include <vector>

namespace etcsim {

// Net energy factor of a shorter input encoding against a bit-serial
// baseline: baseline_cycles / (target_cycles * (1 + overhead)).
double encoding_energy_factor(double baseline_cycles = 8.0, double target_cycles = 2.0,
                              double overhead = 0.36);

struct EnergyScenario {
    int cycles = 8;                          // input cycles of the compared accelerator
    double per_input_overhead_fraction = 0.36; // input-driver energy / output-circuit energy
    double array_size_ratio = 1.0;           // iso-accuracy array scaling vs ETCRAM
    std::string label;
};

void validate(const EnergyScenario& s);

// advantage = array_size_ratio * (encoding factor when I-V linearity applies, else 1)
double overall_energy_advantage(const EnergyScenario& scenario, bool linearity_applies);

struct NoiseSpectrum {
    std::vector<double> frequencies; // Hz, ascending, DC excluded
    std::vector<double> psd;         // normalized one-sided density, 1/Hz
    int averages = 0;
};

// Segment-averaged one-sided periodogram (rectangular window), normalized by
// the squared mean so the density is dimensionless per hertz. Segment length
// is the largest power of two fitting count/segments samples.
NoiseSpectrum psd_estimate(const std::vector<double>& samples, double sample_rate,
                           int segments = 50);

struct NoiseIntegral {
    double floor_psd = 0.0;       // mean density over the floor band
    double variance = 0.0;        // floor_psd * (band width)
    double in_band_variance = 0.0; // trapezoid of measured psd below the band, when requested
};

// Floor extrapolation: average the density over floor_band and integrate the
// flat floor across integration_band; optionally add the measured spectrum
// integral below the band start.
NoiseIntegral integrate_noise(const NoiseSpectrum& spectrum,
                              std::pair<double, double> floor_band = {1e3, 1.598e3},
                              std::pair<double, double> integration_band = {1e3, 1e8},
                              bool include_in_band = false);

struct TcrCalibration {
    double alpha = 0.0; // ohms per kelvin
    double r0 = 0.0;    // ohms at 20 C (293.15 K)
    std::string size_label;
};

// Least-squares R = r0 + alpha * (T - 293.15 K).
TcrCalibration tcr_fit(const std::vector<std::pair<double, double>>& pairs);

// dT = (R - r0) / alpha
double temperature_from_resistance(const TcrCalibration& cal, double r);

} // namespace etcsim

#endif
