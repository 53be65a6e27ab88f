#include "etcsim/programming.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace etcsim {

void validate(const ProgramPolicy& p) {
    if (!(p.tolerance > 0.0)) throw std::invalid_argument("tolerance must be positive");
    if (p.max_pulses < 1) throw std::invalid_argument("max_pulses must be >= 1");
    if (p.potentiation.empty() || p.depression.empty())
        throw std::invalid_argument("pulse ladders must be non-empty");
}

ProgramPolicy default_policy(const UpdateMap& map, double tolerance, int max_pulses) {
    auto build = [&](int sign) {
        std::vector<PulseSpec> ladder;
        // geometric step targets, coarse to fine
        const double top = sign > 0 ? 1.55 : 0.96;
        const double ratio = 1.30;
        double last_mag = 0.0;
        for (int k = 0; k < 20; ++k) {
            const double tgt = top * std::pow(1.0 / ratio, k);
            double best_score = 0.0;
            PulseSpec best{};
            double best_delta = 0.0;
            bool found = false;
            for (double v : map.voltage_grid()) {
                if (sign > 0 && v <= 0.0) continue;
                if (sign < 0 && v >= 0.0) continue;
                for (double t : map.duration_grid()) {
                    const double d = map.delta_at(v, t);
                    if (d * sign <= 0.0) continue;
                    const double score = std::abs(std::log(std::abs(d) / tgt));
                    if (!found || score < best_score) {
                        found = true;
                        best_score = score;
                        best = {v, t};
                        best_delta = std::abs(d);
                    }
                }
            }
            if (!found) continue;
            // keep the ladder strictly decreasing in step size
            if (!ladder.empty() && best_delta >= last_mag) continue;
            ladder.push_back(best);
            last_mag = best_delta;
        }
        return ladder;
    };
    ProgramPolicy policy;
    policy.tolerance = tolerance;
    policy.max_pulses = max_pulses;
    policy.potentiation = build(+1);
    policy.depression = build(-1);
    validate(policy);
    return policy;
}

ProgramResult write_verify(DeviceState& state, double target, const ProgramPolicy& policy,
                           const UpdateMap& map, double relative_noise, Rng& rng) {
    validate(policy);
    const DeviceParams& params = *state.params;
    if (!(target >= params.g_min && target <= params.g_max))
        throw std::domain_error("target outside [g_min, g_max]");

    ProgramResult result;
    const ErrorModel& model = params.error_model;
    for (int n = 0; n <= policy.max_pulses; ++n) {
        const double g = state.conductance;
        const double err = std::abs(g - target) / target;
        if (err <= policy.tolerance) {
            result.pulses_used = n;
            result.final_conductance = g;
            result.final_error_fraction = err;
            result.converged = true;
            return result;
        }
        if (n == policy.max_pulses) break;

        const double need = target - g;
        const auto& ladder = need > 0.0 ? policy.potentiation : policy.depression;
        const double boundary = map.significance_sigma_multiple() * model.sigma_at(g);

        // largest significant rung that does not overshoot; ladders are
        // ordered coarse -> fine, so the first hit wins
        const PulseSpec* chosen = nullptr;
        for (const auto& pulse : ladder) {
            const double d = g * map.delta_at(pulse.voltage, pulse.duration);
            if (std::abs(d) <= boundary) continue;
            if (std::abs(d) <= std::abs(need)) {
                chosen = &pulse;
                break;
            }
        }
        if (!chosen) {
            // all significant rungs overshoot: use the smallest significant one
            for (auto it = ladder.rbegin(); it != ladder.rend(); ++it) {
                const double d = g * map.delta_at(it->voltage, it->duration);
                if (std::abs(d) > boundary) {
                    chosen = &*it;
                    break;
                }
            }
        }
        if (!chosen) break; // nothing can move this state

        state = apply_pulse(state, *chosen, map, relative_noise, rng);
        result.trajectory.emplace_back(n + 1, state.conductance);
    }

    result.pulses_used = static_cast<int>(result.trajectory.size());
    result.final_conductance = state.conductance;
    result.final_error_fraction = std::abs(state.conductance - target) / target;
    result.converged = result.final_error_fraction <= policy.tolerance;
    return result;
}

SigmaEstimate characterize_sigma(const std::function<DeviceState()>& device_factory,
                                 double target, int n_writes, int n_reads,
                                 const ProgramPolicy& policy, const UpdateMap& map,
                                 double relative_noise, Rng& rng, double read_noise_share) {
    if (n_writes < 2 || n_reads < 2)
        throw std::invalid_argument("characterize_sigma needs n_writes >= 2 and n_reads >= 2");

    std::vector<double> samples;
    samples.reserve(static_cast<std::size_t>(n_writes) * n_reads);
    int failures = 0;
    for (int w = 0; w < n_writes; ++w) {
        DeviceState dev = device_factory();
        const ErrorModel& model = dev.params->error_model;
        ProgramResult r = write_verify(dev, target, policy, map, relative_noise, rng);
        if (!r.converged) ++failures;
        const double read_sigma = std::sqrt(read_noise_share) * model.sigma_at(dev.conductance);
        for (int k = 0; k < n_reads; ++k)
            samples.push_back(dev.conductance + (read_sigma > 0.0 ? rng.normal(0.0, read_sigma) : 0.0));
    }

    double mean = 0.0;
    for (double s : samples) mean += s;
    mean /= static_cast<double>(samples.size());
    double var = 0.0;
    for (double s : samples) var += (s - mean) * (s - mean);
    var /= static_cast<double>(samples.size() - 1);

    return {std::sqrt(var), failures, static_cast<int>(samples.size())};
}

double count_states(const ErrorModel& model, double g_lo, double g_hi, int points_per_decade) {
    if (!(g_lo > 0.0) || !(g_lo < g_hi)) throw std::domain_error("count_states needs 0 < g_lo < g_hi");
    const double decades = std::log10(g_hi / g_lo);
    const int n = std::max(2, static_cast<int>(std::ceil(decades * points_per_decade)) + 1);
    // integrate G/sigma(G) d(ln G) by trapezoid on a uniform log grid
    const double l0 = std::log(g_lo);
    const double l1 = std::log(g_hi);
    const double dl = (l1 - l0) / (n - 1);
    double sum = 0.0;
    double prev = 0.0;
    for (int i = 0; i < n; ++i) {
        const double g = std::exp(l0 + dl * i);
        const double f = g / model.sigma_at(g);
        if (i > 0) sum += 0.5 * (prev + f) * dl;
        prev = f;
    }
    return sum;
}

UpdateMap build_update_map(const PulseProbe& probe, double initial_g,
                           const std::vector<double>& voltage_grid,
                           const std::vector<double>& duration_grid, const ErrorModel& model,
                           int trials, double significance_sigma_multiple) {
    if (voltage_grid.empty() || duration_grid.empty())
        throw std::invalid_argument("grids must be non-empty");
    if (trials < 1) throw std::invalid_argument("trials must be >= 1");
    if (!(initial_g > 0.0)) throw std::invalid_argument("initial conductance must be positive");

    std::vector<double> deltas(voltage_grid.size() * duration_grid.size(), 0.0);
    for (std::size_t vi = 0; vi < voltage_grid.size(); ++vi) {
        for (std::size_t ti = 0; ti < duration_grid.size(); ++ti) {
            double acc = 0.0;
            for (int k = 0; k < trials; ++k)
                acc += probe({voltage_grid[vi], duration_grid[ti]});
            deltas[vi * duration_grid.size() + ti] = acc / trials;
        }
    }
    // zero the insignificant cells ("inner boundaries" contour)
    const double boundary = significance_sigma_multiple * model.sigma_at(initial_g);
    for (double& d : deltas)
        if (std::abs(d) * initial_g <= boundary) d = 0.0;

    UpdateMap map(voltage_grid, duration_grid, std::move(deltas), significance_sigma_multiple);
    map.validate_signs(model, initial_g);
    return map;
}

UpdateMap build_update_map(const std::function<DeviceState()>& device_factory,
                           const UpdateMap& device_response,
                           const std::vector<double>& voltage_grid,
                           const std::vector<double>& duration_grid, const ErrorModel& model,
                           int trials, double relative_noise, Rng& rng,
                           double significance_sigma_multiple) {
    DeviceState probe_dev = device_factory();
    const double g0 = probe_dev.conductance;
    PulseProbe probe = [&](const PulseSpec& pulse) {
        DeviceState dev = device_factory();
        DeviceState after = apply_pulse(dev, pulse, device_response, relative_noise, rng);
        return (after.conductance - dev.conductance) / dev.conductance;
    };
    return build_update_map(probe, g0, voltage_grid, duration_grid, model, trials,
                            significance_sigma_multiple);
}

std::vector<double> default_build_voltage_grid() {
    std::vector<double> v;
    for (int i = 0; i <= 40; ++i) v.push_back(-1.6 + 0.1 * i);
    return v;
}

std::vector<double> default_build_duration_grid() {
    return {100e-9, 200e-9, 400e-9, 800e-9};
}

} // namespace etcsim
