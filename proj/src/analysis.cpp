#include "etcsim/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <stdexcept>
#include <vector>

namespace etcsim {

double encoding_energy_factor(double baseline_cycles, double target_cycles, double overhead) {
    if (!(baseline_cycles > 0.0) || !(target_cycles > 0.0) || overhead < 0.0)
        throw std::domain_error("encoding_energy_factor inputs must be positive");
    return baseline_cycles / (target_cycles * (1.0 + overhead));
}

void validate(const EnergyScenario& s) {
    if (s.cycles < 1) throw std::invalid_argument("cycles must be >= 1");
    if (s.per_input_overhead_fraction < 0.0 || s.array_size_ratio < 0.0)
        throw std::invalid_argument("scenario fractions must be >= 0");
}

double overall_energy_advantage(const EnergyScenario& scenario, bool linearity_applies) {
    validate(scenario);
    const double factor =
        linearity_applies
            ? encoding_energy_factor(static_cast<double>(scenario.cycles), 2.0,
                                     scenario.per_input_overhead_fraction)
            : 1.0;
    return scenario.array_size_ratio * factor;
}

namespace {

// iterative radix-2 FFT, in place
void fft(std::vector<std::complex<double>>& a) {
    const std::size_t n = a.size();
    for (std::size_t i = 1, j = 0; i < n; ++i) {
        std::size_t bit = n >> 1;
        for (; j & bit; bit >>= 1) j ^= bit;
        j ^= bit;
        if (i < j) std::swap(a[i], a[j]);
    }
    for (std::size_t len = 2; len <= n; len <<= 1) {
        const double ang = -2.0 * M_PI / static_cast<double>(len);
        const std::complex<double> wl(std::cos(ang), std::sin(ang));
        for (std::size_t i = 0; i < n; i += len) {
            std::complex<double> w(1.0, 0.0);
            for (std::size_t k = 0; k < len / 2; ++k) {
                const std::complex<double> u = a[i + k];
                const std::complex<double> t = w * a[i + k + len / 2];
                a[i + k] = u + t;
                a[i + k + len / 2] = u - t;
                w *= wl;
            }
        }
    }
}

} // namespace

NoiseSpectrum psd_estimate(const std::vector<double>& samples, double sample_rate, int segments) {
    if (segments < 1) throw std::invalid_argument("segments must be >= 1");
    if (!(sample_rate > 0.0)) throw std::invalid_argument("sample rate must be positive");
    if (samples.size() < static_cast<std::size_t>(segments) * 2)
        throw std::domain_error("series too short for the requested segment count");

    // largest power-of-two segment length
    std::size_t seg_len = 1;
    while (seg_len * 2 <= samples.size() / static_cast<std::size_t>(segments)) seg_len *= 2;
    if (seg_len < 2) throw std::domain_error("series too short for the requested segment count");

    double mean = 0.0;
    for (double s : samples) mean += s;
    mean /= static_cast<double>(samples.size());
    if (mean == 0.0) throw std::domain_error("zero mean current: normalized density undefined");

    const std::size_t nbins = seg_len / 2; // k = 1 .. seg_len/2
    std::vector<double> acc(nbins, 0.0);
    std::vector<std::complex<double>> buf(seg_len);
    for (int seg = 0; seg < segments; ++seg) {
        const std::size_t off = static_cast<std::size_t>(seg) * seg_len;
        for (std::size_t i = 0; i < seg_len; ++i) buf[i] = samples[off + i];
        fft(buf);
        for (std::size_t k = 1; k <= nbins; ++k) {
            const double mag2 = std::norm(buf[k]);
            // one-sided density; the Nyquist bin carries no mirror
            const double scale = (k == nbins) ? 1.0 : 2.0;
            acc[k - 1] += scale * mag2 / (sample_rate * static_cast<double>(seg_len));
        }
    }

    NoiseSpectrum out;
    out.averages = segments;
    out.frequencies.resize(nbins);
    out.psd.resize(nbins);
    for (std::size_t k = 1; k <= nbins; ++k) {
        out.frequencies[k - 1] = static_cast<double>(k) * sample_rate / static_cast<double>(seg_len);
        out.psd[k - 1] = acc[k - 1] / (static_cast<double>(segments) * mean * mean);
    }
    return out;
}

NoiseIntegral integrate_noise(const NoiseSpectrum& spectrum, std::pair<double, double> floor_band,
                              std::pair<double, double> integration_band, bool include_in_band) {
    if (spectrum.frequencies.empty()) throw std::domain_error("empty spectrum");
    if (!(floor_band.second > floor_band.first))
        throw std::domain_error("floor band must have positive width");
    if (floor_band.first < spectrum.frequencies.front() ||
        floor_band.second > spectrum.frequencies.back())
        throw std::domain_error("floor band outside the measured frequency range");

    const auto& f = spectrum.frequencies;
    const auto& p = spectrum.psd;

    // trapezoid mean of the density across the floor band
    double integral = 0.0;
    double width = 0.0;
    auto value_at = [&](double x) {
        auto it = std::lower_bound(f.begin(), f.end(), x);
        if (it == f.begin()) return p.front();
        if (it == f.end()) return p.back();
        const std::size_t hi = static_cast<std::size_t>(it - f.begin());
        const std::size_t lo = hi - 1;
        const double u = (x - f[lo]) / (f[hi] - f[lo]);
        return (1.0 - u) * p[lo] + u * p[hi];
    };
    double prev_f = floor_band.first;
    double prev_p = value_at(prev_f);
    for (std::size_t i = 0; i < f.size(); ++i) {
        if (f[i] <= floor_band.first || f[i] >= floor_band.second) continue;
        integral += 0.5 * (prev_p + p[i]) * (f[i] - prev_f);
        width += f[i] - prev_f;
        prev_f = f[i];
        prev_p = p[i];
    }
    integral += 0.5 * (prev_p + value_at(floor_band.second)) * (floor_band.second - prev_f);
    width += floor_band.second - prev_f;

    NoiseIntegral out;
    out.floor_psd = integral / width;
    out.variance = out.floor_psd * (integration_band.second - integration_band.first);

    if (include_in_band) {
        double acc = 0.0;
        for (std::size_t i = 1; i < f.size(); ++i) {
            if (f[i] > integration_band.first) break;
            acc += 0.5 * (p[i - 1] + p[i]) * (f[i] - f[i - 1]);
        }
        out.in_band_variance = acc;
    }
    return out;
}

TcrCalibration tcr_fit(const std::vector<std::pair<double, double>>& pairs) {
    if (pairs.size() < 2) throw std::domain_error("tcr_fit needs at least 2 points");
    const double t_ref = 293.15;
    double xb = 0.0, yb = 0.0;
    for (const auto& [t, r] : pairs) {
        xb += t - t_ref;
        yb += r;
    }
    const double n = static_cast<double>(pairs.size());
    xb /= n;
    yb /= n;
    double sxx = 0.0, sxy = 0.0;
    for (const auto& [t, r] : pairs) {
        const double x = t - t_ref;
        sxx += (x - xb) * (x - xb);
        sxy += (x - xb) * (r - yb);
    }
    if (sxx == 0.0) throw std::domain_error("tcr_fit: all temperatures identical");

    TcrCalibration cal;
    cal.alpha = sxy / sxx;
    cal.r0 = yb - cal.alpha * xb;
    return cal;
}

double temperature_from_resistance(const TcrCalibration& cal, double r) {
    if (!(r > 0.0)) throw std::domain_error("resistance must be positive");
    if (cal.alpha == 0.0) throw std::domain_error("calibration has zero slope");
    return (r - cal.r0) / cal.alpha;
}

} // namespace etcsim
