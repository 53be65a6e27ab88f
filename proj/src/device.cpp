#include "etcsim/device.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace etcsim {

ErrorModel::ErrorModel(std::vector<Anchor> anchors) : anchors_(std::move(anchors)) {
    if (anchors_.empty()) throw std::invalid_argument("error model needs at least one anchor");
    for (std::size_t i = 0; i < anchors_.size(); ++i) {
        if (!(anchors_[i].g > 0.0) || !(anchors_[i].sigma > 0.0))
            throw std::invalid_argument("error model anchors must be positive");
        if (i > 0 && !(anchors_[i].g > anchors_[i - 1].g))
            throw std::invalid_argument("error model anchors must be strictly ascending in g");
    }
}

double ErrorModel::sigma_at(double g) const {
    if (!(g > 0.0)) throw std::domain_error("sigma_at: conductance must be positive");
    if (g <= anchors_.front().g) return anchors_.front().sigma;
    if (g >= anchors_.back().g) return anchors_.back().sigma;
    auto it = std::upper_bound(anchors_.begin(), anchors_.end(), g,
                               [](double v, const Anchor& a) { return v < a.g; });
    const Anchor& hi = *it;
    const Anchor& lo = *(it - 1);
    const double u = (std::log(g) - std::log(lo.g)) / (std::log(hi.g) - std::log(lo.g));
    return std::exp((1.0 - u) * std::log(lo.sigma) + u * std::log(hi.sigma));
}

ErrorModel ErrorModel::scaled(double k) const {
    if (!(k > 0.0)) throw std::invalid_argument("scale factor must be positive");
    std::vector<Anchor> a = anchors_;
    for (auto& p : a) p.sigma *= k;
    return ErrorModel(std::move(a));
}

void validate(const DeviceParams& p) {
    if (!(p.g_min > 0.0) || !(p.g_min < p.g_max))
        throw std::invalid_argument("device params require 0 < g_min < g_max");
}

UpdateMap::UpdateMap(std::vector<double> voltage_grid, std::vector<double> duration_grid,
                     std::vector<double> delta_fraction, double significance_sigma_multiple)
    : voltage_grid_(std::move(voltage_grid)),
      duration_grid_(std::move(duration_grid)),
      delta_(std::move(delta_fraction)),
      sig_multiple_(significance_sigma_multiple) {
    if (voltage_grid_.empty() || duration_grid_.empty())
        throw std::invalid_argument("update map grids must be non-empty");
    for (std::size_t i = 1; i < voltage_grid_.size(); ++i)
        if (!(voltage_grid_[i] > voltage_grid_[i - 1]))
            throw std::invalid_argument("voltage grid must be strictly ascending");
    for (std::size_t i = 1; i < duration_grid_.size(); ++i)
        if (!(duration_grid_[i] > duration_grid_[i - 1]))
            throw std::invalid_argument("duration grid must be strictly ascending");
    if (duration_grid_.front() <= 0.0)
        throw std::invalid_argument("durations must be positive");
    if (delta_.size() != voltage_grid_.size() * duration_grid_.size())
        throw std::invalid_argument("delta grid size mismatch");
    for (double d : delta_)
        if (!std::isfinite(d)) throw std::invalid_argument("delta grid must be finite");
}

namespace {

// index of the grid interval containing x (clamped), plus the local coordinate
std::pair<std::size_t, double> bracket(const std::vector<double>& grid, double x, bool* clamped) {
    if (grid.size() == 1) return {0, 0.0};
    if (x <= grid.front()) {
        if (clamped && x < grid.front()) *clamped = true;
        return {0, 0.0};
    }
    if (x >= grid.back()) {
        if (clamped && x > grid.back()) *clamped = true;
        return {grid.size() - 2, 1.0};
    }
    auto it = std::upper_bound(grid.begin(), grid.end(), x);
    std::size_t i = static_cast<std::size_t>(it - grid.begin()) - 1;
    return {i, (x - grid[i]) / (grid[i + 1] - grid[i])};
}

} // namespace

double UpdateMap::delta_at(double voltage, double duration, bool* clamped) const {
    if (!(duration > 0.0)) throw std::domain_error("pulse duration must be positive");
    if (clamped) *clamped = false;
    const auto [vi, fv] = bracket(voltage_grid_, voltage, clamped);

    // log-duration axis
    const auto& tg = duration_grid_;
    std::size_t ti = 0;
    double ft = 0.0;
    if (tg.size() == 1) {
        ti = 0;
        ft = 0.0;
        if (clamped && duration != tg[0]) *clamped = true;
    } else if (duration <= tg.front()) {
        if (clamped && duration < tg.front()) *clamped = true;
        ti = 0;
        ft = 0.0;
    } else if (duration >= tg.back()) {
        if (clamped && duration > tg.back()) *clamped = true;
        ti = tg.size() - 2;
        ft = 1.0;
    } else {
        auto it = std::upper_bound(tg.begin(), tg.end(), duration);
        ti = static_cast<std::size_t>(it - tg.begin()) - 1;
        ft = (std::log(duration) - std::log(tg[ti])) / (std::log(tg[ti + 1]) - std::log(tg[ti]));
    }

    const std::size_t nt = tg.size();
    auto at = [&](std::size_t v, std::size_t t) { return delta_[v * nt + t]; };
    if (voltage_grid_.size() == 1 && nt == 1) return at(0, 0);
    if (voltage_grid_.size() == 1) return (1.0 - ft) * at(0, ti) + ft * at(0, ti + 1);
    if (nt == 1) return (1.0 - fv) * at(vi, 0) + fv * at(vi + 1, 0);
    const double lo = (1.0 - ft) * at(vi, ti) + ft * at(vi, ti + 1);
    const double hi = (1.0 - ft) * at(vi + 1, ti) + ft * at(vi + 1, ti + 1);
    return (1.0 - fv) * lo + fv * hi;
}

void UpdateMap::validate_signs(const ErrorModel& model, double g0) const {
    const double boundary = sig_multiple_ * model.sigma_at(g0);
    for (std::size_t vi = 0; vi < voltage_grid_.size(); ++vi) {
        for (std::size_t ti = 0; ti < duration_grid_.size(); ++ti) {
            const double d = value(static_cast<int>(vi), static_cast<int>(ti));
            if (std::abs(d) * g0 <= boundary) continue;
            if (d * voltage_grid_[vi] < 0.0)
                throw std::invalid_argument("significant update with sign opposite to voltage");
        }
    }
}

DeviceState make_device(const DeviceParams& params, double g0) {
    validate(params);
    if (!(g0 > 0.0)) throw std::invalid_argument("initial conductance must be positive");
    return DeviceState{g0, 0, &params};
}

double read_current(const DeviceState& state, double v_read, const ReadOptions& opts) {
    if (std::abs(v_read) > opts.linear_window && !opts.allow_outside)
        throw std::domain_error("read voltage outside the Ohmic window; set allow_outside to override");
    return state.conductance * v_read;
}

DeviceState apply_pulse(const DeviceState& state, const PulseSpec& pulse, const UpdateMap& map,
                        double relative_noise, Rng& rng) {
    if (!(pulse.duration > 0.0)) throw std::domain_error("pulse duration must be positive");
    const double g0 = state.conductance;
    double delta = g0 * map.delta_at(pulse.voltage, pulse.duration);

    const ErrorModel& model = state.params->error_model;
    if (std::abs(delta) <= map.significance_sigma_multiple() * model.sigma_at(g0)) {
        delta = 0.0;
    } else if (relative_noise > 0.0) {
        delta *= 1.0 + rng.normal(0.0, relative_noise);
    }

    DeviceState next = state;
    next.conductance = std::clamp(g0 + delta, kConductanceFloor, state.params->g_max);
    next.write_count = state.write_count + 1;
    return next;
}

void validate(const RetentionParams& p) {
    if (p.fraction_per_decade < 0.0) throw std::invalid_argument("fraction_per_decade must be >= 0");
    if (!(p.onset_time > 0.0)) throw std::invalid_argument("onset_time must be positive");
}

DeviceState drift(const DeviceState& state, double /*temperature*/, double elapsed,
                  const RetentionParams& params) {
    if (elapsed < 0.0) throw std::domain_error("elapsed time must be non-negative");
    validate(params);
    const double loss = params.fraction_per_decade * std::log10(1.0 + elapsed / params.onset_time);
    DeviceState next = state;
    next.conductance = std::max(state.conductance * (1.0 - loss), kConductanceFloor);
    return next;
}

CorrectedWidth correct_pulse_width(double nominal, double slope, double intercept) {
    if (!(nominal > 0.0)) throw std::domain_error("nominal width must be positive");
    const double actual = slope * nominal + intercept;
    if (actual < 0.0) return {0.0, true};
    return {actual, false};
}

} // namespace etcsim
