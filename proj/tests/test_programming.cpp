#include <doctest.h>

#include <cmath>
#include <functional>

#include "etcsim/io.hpp"
#include "etcsim/presets.hpp"
#include "etcsim/programming.hpp"

using namespace etcsim;

namespace {

struct Fixture {
    ErrorModel model = load_error_model_csv(default_data_dir() + "/etcram_sigma.csv");
    UpdateMap map = load_default_update_map(default_data_dir());
    DeviceParams params{1e-9, 1e-3, model, true, "etcram"};
    ProgramPolicy policy = default_policy(map);
};

} // namespace

TEST_CASE("write_verify: state already at target uses zero pulses") {
    Fixture f;
    DeviceState dev = make_device(f.params, 50e-9);
    Rng rng(1);
    ProgramResult r = write_verify(dev, 50e-9, f.policy, f.map, 0.10, rng);
    CHECK(r.converged);
    CHECK(r.pulses_used == 0);
    CHECK(r.trajectory.empty());
}

TEST_CASE("write_verify: 10 nS -> 50 nS within 5 pulses in >= 95% of trials") {
    Fixture f;
    f.policy.tolerance = 0.006;
    f.policy.max_pulses = 60;
    int within5 = 0;
    const int trials = 500;
    for (int k = 0; k < trials; ++k) {
        DeviceState dev = make_device(f.params, 10e-9);
        Rng rng(1000 + k);
        ProgramResult r = write_verify(dev, 50e-9, f.policy, f.map, 0.10, rng);
        REQUIRE(r.converged);
        CHECK(r.final_error_fraction <= f.policy.tolerance);
        CHECK(static_cast<int>(r.trajectory.size()) == r.pulses_used);
        if (r.pulses_used <= 5) ++within5;
    }
    CHECK(within5 >= static_cast<int>(0.95 * trials));
}

TEST_CASE("write_verify: decade jump 10 nS -> 0.5 uS converges comparably") {
    Fixture f;
    f.policy.tolerance = 0.007;
    f.policy.max_pulses = 60;
    for (int k = 0; k < 100; ++k) {
        DeviceState dev = make_device(f.params, 10e-9);
        Rng rng(9000 + k);
        ProgramResult r = write_verify(dev, 0.5e-6, f.policy, f.map, 0.10, rng);
        CHECK(r.converged);
        CHECK(r.pulses_used <= 10);
    }
}

TEST_CASE("write_verify: target outside the device range") {
    Fixture f;
    DeviceState dev = make_device(f.params, 10e-9);
    Rng rng(1);
    CHECK_THROWS_AS(write_verify(dev, 1e-1, f.policy, f.map, 0.10, rng), std::domain_error);
    CHECK_THROWS_AS(write_verify(dev, 1e-10, f.policy, f.map, 0.10, rng), std::domain_error);
}

TEST_CASE("write_verify: impossible tolerance reports non-convergence") {
    Fixture f;
    f.policy.tolerance = 1e-9;
    f.policy.max_pulses = 15;
    DeviceState dev = make_device(f.params, 10e-9);
    Rng rng(4);
    ProgramResult r = write_verify(dev, 50e-9, f.policy, f.map, 0.10, rng);
    CHECK_FALSE(r.converged);
    CHECK(r.pulses_used == 15);
}

TEST_CASE("characterize_sigma: deterministic device measures zero") {
    Fixture f;
    auto factory = [&] { return make_device(f.params, 50e-9); };
    ProgramPolicy p = f.policy;
    p.tolerance = 0.05; // already satisfied at the start
    Rng rng(2);
    SigmaEstimate est = characterize_sigma(factory, 50e-9, 10, 100, p, f.map, 0.0, rng, 0.0);
    CHECK(est.sigma <= 1e-18); // summation round-off only
    CHECK(est.write_failures == 0);
    CHECK(est.samples == 1000);
}

TEST_CASE("characterize_sigma: recovers a known additive read noise") {
    // perfect writes at the target and a constant-sigma model; with a 0.5 read
    // share the per-read noise is s = sigma/sqrt(2)
    const double s = 1e-10;
    ErrorModel constant({{1e-9, s * std::sqrt(2.0)}});
    DeviceParams params{1e-10, 1e-3, constant, true, "synthetic"};
    UpdateMap map({1.0}, {1e-6}, {0.0});
    ProgramPolicy policy;
    policy.tolerance = 0.5;
    policy.max_pulses = 1;
    policy.potentiation = {{1.0, 1e-6}};
    policy.depression = {{-1.0, 1e-6}};

    auto factory = [&] { return make_device(params, 50e-9); };
    Rng rng(3);
    SigmaEstimate est = characterize_sigma(factory, 50e-9, 40, 100, policy, map, 0.0, rng, 0.5);
    const int n = est.samples;
    CHECK(est.sigma == doctest::Approx(s).epsilon(3.0 / std::sqrt(static_cast<double>(n))));
}

TEST_CASE("characterize_sigma: ETCRAM-calibrated device near the 1 nS anchor") {
    Fixture f;
    const double target = 1e-9;
    ProgramPolicy policy = f.policy;
    policy.tolerance = f.model.sigma_at(target) / target; // curve-consistent write precision
    policy.max_pulses = 400;
    auto factory = [&] { return make_device(f.params, 2e-9); };
    Rng rng(11);
    SigmaEstimate est = characterize_sigma(factory, target, 10, 100, policy, f.map, 0.10, rng);
    const double anchor = 2.1384e-11;
    CHECK(est.sigma > anchor / 2.0);
    CHECK(est.sigma < anchor * 2.0);
}

TEST_CASE("count_states: degenerate range") {
    ErrorModel m({{1e-9, 1e-11}});
    CHECK(count_states(m, 1e-6, 1e-6 * (1.0 + 1e-12)) == doctest::Approx(0.0).epsilon(1e-6));
    CHECK_THROWS_AS(count_states(m, 1e-6, 1e-7), std::domain_error);
}

TEST_CASE("count_states: constant relative error has a closed form") {
    // sigma = 0.01 G along a log-log segment of slope 1
    ErrorModel m({{1e-8, 1e-10}, {1e-6, 1e-8}});
    const double n = count_states(m, 1e-8, 1e-7);
    CHECK(n == doctest::Approx(std::log(10.0) / 0.01).epsilon(1e-3));
}

TEST_CASE("count_states: shipped calibration yields about 3180 levels") {
    Fixture f;
    const double n = count_states(f.model, 1e-9, 1e-3);
    CHECK(n > 3180.0 * 0.85);
    CHECK(n < 3180.0 * 1.15);
}

TEST_CASE("count_states: additive over contiguous ranges") {
    Fixture f;
    const double full = count_states(f.model, 1e-9, 1e-3, 400);
    const double a = count_states(f.model, 1e-9, 3.7e-6, 400);
    const double b = count_states(f.model, 3.7e-6, 1e-3, 400);
    CHECK(full == doctest::Approx(a + b).epsilon(1e-6));
}

TEST_CASE("count_states: homogeneity in sigma") {
    Fixture f;
    const double n1 = count_states(f.model, 1e-9, 1e-3);
    const double n2 = count_states(f.model.scaled(2.5), 1e-9, 1e-3);
    CHECK(n1 / n2 == doctest::Approx(2.5).epsilon(1e-12));
}

TEST_CASE("build_update_map: all-zero measurements give an all-insignificant map") {
    ErrorModel m({{1e-9, 1e-11}});
    UpdateMap map = build_update_map([](const PulseSpec&) { return 0.0; }, 10e-9,
                                     default_build_voltage_grid(), default_build_duration_grid(), m,
                                     3);
    for (double d : map.delta_fraction()) CHECK(d == 0.0);
}

TEST_CASE("build_update_map: zero-noise round trip recovers the ground truth") {
    // ground truth with steps far above the significance gate
    std::vector<double> vg = {-2.0, -1.5, 1.5, 2.0};
    std::vector<double> tg = {1e-7, 1e-6};
    std::vector<double> truth;
    for (double v : vg)
        for (double t : tg) truth.push_back(v > 0 ? 0.10 * v * (t / 1e-6 + 0.5)
                                                  : 0.08 * v * (t / 1e-6 + 0.5));
    UpdateMap ground(vg, tg, truth);
    ErrorModel m({{1e-9, 1e-15}});
    DeviceParams params{1e-12, 1.0, m, true, "synthetic"};
    Rng rng(5);
    auto factory = [&] { return make_device(params, 100e-9); };
    UpdateMap rebuilt = build_update_map(factory, ground, vg, tg, m, 1, 0.0, rng);
    for (std::size_t i = 0; i < truth.size(); ++i)
        CHECK(rebuilt.delta_fraction()[i] == doctest::Approx(truth[i]).epsilon(1e-12));
}

TEST_CASE("default build grids match the characterization window") {
    const auto vg = default_build_voltage_grid();
    const auto tg = default_build_duration_grid();
    CHECK(vg.front() == doctest::Approx(-1.6));
    CHECK(vg.back() == doctest::Approx(2.4));
    CHECK(tg.front() == doctest::Approx(100e-9));
    CHECK(tg.back() == doctest::Approx(800e-9));
}

TEST_CASE("count_states: quadrature density is converged at 100 points/decade") {
    Fixture f;
    const double n1 = count_states(f.model, 1e-9, 1e-3, 100);
    const double n2 = count_states(f.model, 1e-9, 1e-3, 200);
    CHECK(std::abs(n2 - n1) <= 1e-4 * n1);
}
