#include <doctest.h>

#include <cmath>

#include "etcsim/analysis.hpp"
#include "etcsim/io.hpp"
#include "etcsim/presets.hpp"
#include "etcsim/rng.hpp"

using namespace etcsim;

TEST_CASE("encoding_energy_factor: headline value and identities") {
    CHECK(encoding_energy_factor(8, 2, 0.36) == doctest::Approx(2.94).epsilon(0.002));
    CHECK(encoding_energy_factor(8, 8, 0.0) == doctest::Approx(1.0));
    // overhead rebuilt from the driver/ADC measurements: 110 pJ vs 300 pJ, halved
    const double overhead = 0.73 * 0.5;
    CHECK(encoding_energy_factor(8, 2, overhead) == doctest::Approx(2.93).epsilon(0.005));
    // homogeneous in the cycle counts
    CHECK(encoding_energy_factor(16, 4, 0.36) ==
          doctest::Approx(encoding_energy_factor(8, 2, 0.36)).epsilon(1e-12));
}

TEST_CASE("overall_energy_advantage: the three headline ratios") {
    EnergyScenario sonos{8, 0.36, 3.2, "sonos"};
    EnergyScenario pcm{8, 0.36, 22.0, "pcm"};
    EnergyScenario memristor{8, 0.36, 64.0, "memristor"};
    CHECK(overall_energy_advantage(sonos, true) == doctest::Approx(9.4).epsilon(0.02));
    CHECK(overall_energy_advantage(pcm, true) == doctest::Approx(64.0).epsilon(0.025));
    CHECK(overall_energy_advantage(memristor, false) == doctest::Approx(64.0).epsilon(1e-12));
}

TEST_CASE("psd_estimate: pure DC has no power off the zero bin") {
    std::vector<double> x(4096, 2.5);
    const auto sp = psd_estimate(x, 1e4, 4);
    for (double p : sp.psd) CHECK(p <= 1e-25);
}

TEST_CASE("psd_estimate: white noise is flat at 2 s^2 / fs and satisfies Parseval") {
    const double fs = 1e4;
    const double s = 1e-3;
    Rng rng(123);
    std::vector<double> x(50 * 4096);
    for (double& v : x) v = 1.0 + rng.normal(0.0, s);

    const auto sp = psd_estimate(x, fs, 50);
    double mean_psd = 0.0;
    for (double p : sp.psd) mean_psd += p;
    mean_psd /= static_cast<double>(sp.psd.size());
    CHECK(mean_psd == doctest::Approx(2.0 * s * s / fs).epsilon(0.10));

    // integral of the one-sided density ~ variance (normalized by mean^2 ~ 1)
    double integral = 0.0;
    const double df = sp.frequencies[1] - sp.frequencies[0];
    for (double p : sp.psd) integral += p * df;
    CHECK(integral == doctest::Approx(s * s).epsilon(0.01));
}

TEST_CASE("psd_estimate: synthetic 1/f + floor series shows a -1 slope") {
    const double fs = 1e4;
    const std::size_t seg = 2048;
    Rng rng(7);
    const std::size_t n = 50 * seg;
    std::vector<double> x(n, 1.0);
    // bin-centered random-phase tones with 1/f power weighting, one per bin
    for (int k = 1; k <= 100; ++k) {
        const double f = k * fs / static_cast<double>(seg);
        const double amp = 2e-3 / std::sqrt(f);
        const double phase = 6.283185307179586 * rng.uniform();
        for (std::size_t i = 0; i < n; ++i)
            x[i] += amp * std::sin(6.283185307179586 * f * i / fs + phase);
    }

    const auto sp = psd_estimate(x, fs, 50);
    // regress log psd on log f over the tone band
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    int cnt = 0;
    for (std::size_t i = 0; i < sp.frequencies.size(); ++i) {
        const double f = sp.frequencies[i];
        if (f < 4.0 || f > 480.0 || sp.psd[i] <= 0.0) continue;
        const double lx = std::log10(f), ly = std::log10(sp.psd[i]);
        sx += lx;
        sy += ly;
        sxx += lx * lx;
        sxy += lx * ly;
        ++cnt;
    }
    const double slope = (cnt * sxy - sx * sy) / (cnt * sxx - sx * sx);
    CHECK(slope == doctest::Approx(-1.0).epsilon(0.15));
}

TEST_CASE("psd_estimate: input validation") {
    CHECK_THROWS_AS(psd_estimate(std::vector<double>(10, 1.0), 1e3, 50), std::domain_error);
    CHECK_THROWS_AS(psd_estimate(std::vector<double>(4096, 0.0), 1e3, 4), std::domain_error);
}

TEST_CASE("integrate_noise: flat spectrum integrates exactly") {
    NoiseSpectrum sp;
    const double s0 = 4e-22;
    for (double f = 100.0; f <= 2000.0; f += 10.0) {
        sp.frequencies.push_back(f);
        sp.psd.push_back(s0);
    }
    const auto out = integrate_noise(sp);
    CHECK(out.floor_psd == doctest::Approx(s0).epsilon(1e-12));
    CHECK(out.variance == doctest::Approx(s0 * (1e8 - 1e3)).epsilon(1e-12));
}

TEST_CASE("integrate_noise: shipped example spectrum reproduces the floor figure") {
    const auto sp = load_spectrum_csv(default_data_dir() + "/noise_nsd_example.csv");
    const auto out = integrate_noise(sp, {1e3, 1.598e3}, {1e3, 1e8}, true);
    CHECK(out.variance > 3e-14 / 2.0);
    CHECK(out.variance < 3e-14 * 2.0);
    // at least 700x below the lowest conductance-error anchor
    CHECK(2.1384e-11 / out.variance >= 700.0);
    // the in-band 1/f part is negligible against the extrapolated floor
    CHECK(out.in_band_variance < 1e-17);
}

TEST_CASE("integrate_noise: rejects an out-of-range floor band") {
    NoiseSpectrum sp;
    sp.frequencies = {10.0, 20.0};
    sp.psd = {1.0, 1.0};
    CHECK_THROWS_AS(integrate_noise(sp), std::domain_error);
}

TEST_CASE("tcr_fit: recovers exact linear data") {
    std::vector<std::pair<double, double>> pts;
    for (double t = 293.15; t <= 473.15; t += 20.0) pts.push_back({t, 14.0 + 0.019 * (t - 293.15)});
    const auto cal = tcr_fit(pts);
    CHECK(cal.alpha == doctest::Approx(0.019).epsilon(1e-12));
    CHECK(cal.r0 == doctest::Approx(14.0).epsilon(1e-12));
    CHECK_THROWS_AS(tcr_fit({{300.0, 1.0}, {300.0, 2.0}}), std::domain_error);
}

TEST_CASE("tcr_fit: shipped heater calibrations") {
    const double expected[3] = {0.0162, 0.0190, 0.0208};
    const char* files[3] = {"/tcr_pt_8um.csv", "/tcr_pt_4um.csv", "/tcr_pt_2um.csv"};
    double sum = 0.0;
    for (int k = 0; k < 3; ++k) {
        const auto cal = tcr_fit(load_tcr_csv(default_data_dir() + files[k]));
        CHECK(cal.alpha == doctest::Approx(expected[k]).epsilon(1e-9));
        sum += cal.alpha;
    }
    CHECK(sum / 3.0 == doctest::Approx(0.0186).epsilon(1e-3));
}

TEST_CASE("temperature_from_resistance: inverse of the fit") {
    TcrCalibration cal{0.0186, 15.0, "ave"};
    CHECK(temperature_from_resistance(cal, 15.0) == doctest::Approx(0.0));
    CHECK(temperature_from_resistance(cal, 15.0 + 0.0186 * 100.0) == doctest::Approx(100.0));
    // programming window maps back to 250-450 C above room temperature
    for (double dt : {250.0, 350.0, 450.0}) {
        const double r = cal.r0 + cal.alpha * dt;
        CHECK(temperature_from_resistance(cal, r) == doctest::Approx(dt).epsilon(1e-12));
    }
}

TEST_CASE("tcr round trip on synthetic data") {
    Rng rng(5);
    TcrCalibration truth{0.021, 17.0, "2um"};
    std::vector<std::pair<double, double>> pts;
    for (int k = 0; k < 12; ++k) {
        const double t = 293.15 + 15.0 * k;
        pts.push_back({t, truth.r0 + truth.alpha * (t - 293.15)});
    }
    const auto cal = tcr_fit(pts);
    for (const auto& [t, r] : pts)
        CHECK(temperature_from_resistance(cal, r) == doctest::Approx(t - 293.15).epsilon(1e-9));
}

TEST_CASE("energy scenario validation") {
    CHECK_THROWS_AS(overall_energy_advantage({0, 0.36, 3.2, "x"}, true), std::invalid_argument);
    CHECK_THROWS_AS(overall_energy_advantage({8, -0.1, 3.2, "x"}, true), std::invalid_argument);
    CHECK_THROWS_AS(encoding_energy_factor(0.0, 2.0, 0.36), std::domain_error);
}
