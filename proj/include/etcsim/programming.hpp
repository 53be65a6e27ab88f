#ifndef ETCSIM_PROGRAMMING_HPP
#define ETCSIM_PROGRAMMING_HPP

#include <functional>
#include <utility>
#include <vector>

#include "etcsim/device.hpp"

namespace etcsim {

struct ProgramPolicy {
    double tolerance = 0.006; // fractional error from target
    int max_pulses = 50;
    std::vector<PulseSpec> potentiation; // coarse -> fine
    std::vector<PulseSpec> depression;   // coarse -> fine
};

void validate(const ProgramPolicy& p);

// Builds coarse->fine ladders from map grid nodes, targeting geometrically
// spaced expected steps (ratio ~1.3) down to the resolution useful against
// the significance gate.
ProgramPolicy default_policy(const UpdateMap& map, double tolerance = 0.006,
                             int max_pulses = 50);

struct ProgramResult {
    int pulses_used = 0;
    double final_conductance = 0.0;
    double final_error_fraction = 0.0;
    std::vector<std::pair<int, double>> trajectory; // (pulse index, conductance)
    bool converged = false;
};

// Closed-loop write-verify: read, stop when within tolerance, else apply the
// largest significant ladder pulse whose expected step does not overshoot
// (smallest significant rung when all overshoot). Non-convergence is a result,
// not an error.
ProgramResult write_verify(DeviceState& state, double target, const ProgramPolicy& policy,
                           const UpdateMap& map, double relative_noise, Rng& rng);

struct SigmaEstimate {
    double sigma = 0.0;
    int write_failures = 0; // write_verify non-convergences; samples still included
    int samples = 0;
};

// Write-10x/read-100x protocol: each write is an independent write_verify from
// a fresh device, followed by reads perturbed by the read share of sigma_G.
// Returned sigma is the standard deviation over all writes x reads samples.
SigmaEstimate characterize_sigma(const std::function<DeviceState()>& device_factory,
                                 double target, int n_writes, int n_reads,
                                 const ProgramPolicy& policy, const UpdateMap& map,
                                 double relative_noise, Rng& rng,
                                 double read_noise_share = 0.5);

// Distinguishable-state count N = integral dG / sigma_G(G), evaluated by the
// trapezoid rule on a log grid with at least points_per_decade points/decade.
double count_states(const ErrorModel& model, double g_lo, double g_hi,
                    int points_per_decade = 100);

// One measurement trial: fractional dG/G0 of a single pulse applied to a
// freshly initialized device.
using PulseProbe = std::function<double(const PulseSpec&)>;

// Mean fractional dG/G0 per (V, t) cell over repeated single-pulse trials from
// a fixed initial state; cells below the significance boundary are zeroed.
UpdateMap build_update_map(const PulseProbe& probe, double initial_g,
                           const std::vector<double>& voltage_grid,
                           const std::vector<double>& duration_grid,
                           const ErrorModel& model, int trials,
                           double significance_sigma_multiple = 3.0);

// Convenience overload probing a simulated device that follows
// device_response under apply_pulse.
UpdateMap build_update_map(const std::function<DeviceState()>& device_factory,
                           const UpdateMap& device_response,
                           const std::vector<double>& voltage_grid,
                           const std::vector<double>& duration_grid,
                           const ErrorModel& model, int trials, double relative_noise,
                           Rng& rng, double significance_sigma_multiple = 3.0);

// Default characterization grid bounds: -1.6..+2.4 V, 100-800 ns.
std::vector<double> default_build_voltage_grid();
std::vector<double> default_build_duration_grid();

} // namespace etcsim

#endif
