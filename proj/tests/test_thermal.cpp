#include <doctest.h>

#include <cmath>

#include "etcsim/io.hpp"
#include "etcsim/presets.hpp"
#include "etcsim/thermal.hpp"

using namespace etcsim;

namespace {

ThermalStack table_stack(double length = 100e-9) {
    ThermalStack s; // defaults carry the shipped parameter set
    s.wire_length = length;
    return s;
}

} // namespace

TEST_CASE("solve_temperature: zero power gives the ambient field") {
    const auto f = solve_temperature_at_level(table_stack(), 0.0, 0);
    for (double t : f.temperature.data) CHECK(t == doctest::Approx(293.15).epsilon(1e-12));
    CHECK(f.mid_channel == doctest::Approx(293.15));
}

TEST_CASE("solve_temperature: field is linear in power") {
    const ThermalStack s = table_stack();
    const auto f1 = solve_temperature_at_level(s, 100e-6, 1);
    const auto f2 = solve_temperature_at_level(s, 200e-6, 1);
    REQUIRE(f1.temperature.data.size() == f2.temperature.data.size());
    const double scale = f2.mid_channel - s.ambient; // largest rise in the field
    for (std::size_t k = 0; k < f1.temperature.data.size(); ++k) {
        const double r1 = f1.temperature.data[k] - s.ambient;
        const double r2 = f2.temperature.data[k] - s.ambient;
        CHECK(std::abs(r2 - 2.0 * r1) <= 1e-8 * scale);
    }
}

TEST_CASE("solve_temperature: maximum sits in the wire domain") {
    const ThermalStack s = table_stack();
    const auto f = solve_temperature_at_level(s, 300e-6, 1);
    double tmax = 0.0;
    int jmax = 0, imax = 0;
    for (int i = 0; i < f.temperature.rows; ++i)
        for (int j = 0; j < f.temperature.cols; ++j)
            if (f.temperature(i, j) > tmax) {
                tmax = f.temperature(i, j);
                imax = i;
                jmax = j;
            }
    CHECK(f.domain_of_row[jmax] == 1);
    CHECK(std::abs(f.x_centers[imax]) <= s.wire_length / 2.0);
    // no heat sinks below ambient
    for (double t : f.temperature.data) CHECK(t >= s.ambient - 1e-9);
}

TEST_CASE("solve_temperature: lateral mirror symmetry") {
    const ThermalStack s = table_stack();
    const auto f = solve_temperature_at_level(s, 300e-6, 0);
    const int nx = f.temperature.rows;
    for (int j = 0; j < f.temperature.cols; ++j)
        for (int i = 0; i < nx / 2; ++i)
            CHECK(f.temperature(i, j) ==
                  doctest::Approx(f.temperature(nx - 1 - i, j)).epsilon(1e-9));
}

TEST_CASE("solve_temperature: energy balance at the side walls") {
    const ThermalStack s = table_stack();
    const auto f = solve_temperature_at_level(s, 320e-6, 1);
    CHECK(f.boundary_flux == doctest::Approx(f.injected).epsilon(0.01));
}

TEST_CASE("solve_temperature: refinement converges with shrinking steps") {
    const ThermalStack s = table_stack();
    const auto r = solve_temperature(s, 320e-6, 0.005, 6);
    REQUIRE(r.rise_history.size() >= 2);
    for (std::size_t k = 2; k < r.rise_history.size(); ++k) {
        const double d1 = std::abs(r.rise_history[k] - r.rise_history[k - 1]);
        const double d0 = std::abs(r.rise_history[k - 1] - r.rise_history[k - 2]);
        CHECK(d1 <= d0 * 1.5);
    }
    const double last = r.rise_history.back();
    const double prev = r.rise_history[r.rise_history.size() - 2];
    CHECK(std::abs(last - prev) <= 0.005 * std::abs(last));
}

TEST_CASE("solve_temperature: 320 uW at 100 nm lands near a 300 K rise") {
    const auto r = solve_temperature(table_stack(100e-9), 320e-6);
    const double rise = r.field.mid_channel - 293.15;
    CHECK(rise > 300.0 * 0.75);
    CHECK(rise < 300.0 * 1.25);
}

TEST_CASE("critical_power: close to the expected scale at 100 nm") {
    const auto cp = critical_power(table_stack(100e-9));
    CHECK(cp.power > 320e-6 * 0.75);
    CHECK(cp.power < 320e-6 * 1.25);
}

TEST_CASE("critical_power: scales with uniformly scaled conductances") {
    ThermalStack s = table_stack(150e-9);
    const double base = critical_power(s).power;
    const double k = 3.0;
    s.kappa_vacuum *= k;
    s.kappa_wire *= k;
    s.kappa_stack *= k;
    s.kappa_substrate *= k;
    s.g12 *= k;
    s.g23 *= k;
    s.g34 *= k;
    CHECK(critical_power(s).power == doctest::Approx(base * k).epsilon(1e-9));
}

TEST_CASE("critical_power: zero-rise limit and degenerate input") {
    const ThermalStack s = table_stack();
    CHECK_THROWS_AS(critical_power(s, 0.0), std::domain_error);
    const double tiny = critical_power(s, 1e-6).power;
    const double full = critical_power(s, 300.0).power;
    CHECK(tiny == doctest::Approx(full * 1e-6 / 300.0).epsilon(1e-9));
}

TEST_CASE("sweep_length: single point agrees with critical_power") {
    const ThermalStack s = table_stack();
    const auto pts = sweep_length(s, {120e-9});
    REQUIRE(pts.size() == 1);
    ThermalStack at = s;
    at.wire_length = 120e-9;
    CHECK(pts[0].p_crit == doctest::Approx(critical_power(at).power).epsilon(1e-12));
    CHECK_THROWS(sweep_length(s, {2e-7, 1e-7}));
}

TEST_CASE("lumped_critical_power: products and quartering") {
    CHECK(lumped_critical_power(0.0, 1e6, 1e-12) == 0.0);
    CHECK(lumped_critical_power(350.0, 1e6, 8e-6 * 24e-6) == doctest::Approx(67.2e-3).epsilon(1e-12));
    const double p1 = lumped_critical_power(300.0, 1e6, 4e-6 * 12e-6);
    const double p2 = lumped_critical_power(300.0, 1e6, 2e-6 * 6e-6);
    CHECK(p1 == doctest::Approx(4.0 * p2).epsilon(1e-12));
}

TEST_CASE("fit_power_law: exact quadratic data") {
    std::vector<std::pair<double, double>> pts;
    for (double f : {2e-6, 4e-6, 8e-6}) pts.push_back({f, 1e9 * f * f});
    const auto fit = fit_power_law(pts);
    CHECK(fit.exponent == doctest::Approx(2.0).epsilon(1e-9));
    CHECK(fit.exponent_std == doctest::Approx(0.0).epsilon(1e-6));
}

TEST_CASE("fit_power_law: lumped-model sweep has exponent 2") {
    std::vector<std::pair<double, double>> pts;
    for (double f : {2e-6, 4e-6, 8e-6})
        pts.push_back({f, lumped_critical_power(350.0, 1e6, 3.0 * f * f)});
    CHECK(fit_power_law(pts).exponent == doctest::Approx(2.0).epsilon(1e-9));
}

TEST_CASE("fit_power_law: shipped measured powers") {
    const auto pts = load_pairs_csv(default_data_dir() + "/fig4c_power.csv", "feature_size_m",
                                    "power_w");
    REQUIRE(pts.size() == 4);
    const auto fit = fit_power_law(pts);
    CHECK(fit.exponent == doctest::Approx(2.31).epsilon(0.09)); // 2.31 +- 0.20 band
    CHECK(fit.exponent_std > 0.05);
    CHECK(fit.exponent_std < 0.25);
}

TEST_CASE("fit_power_law: rejects degenerate input") {
    CHECK_THROWS_AS(fit_power_law({{1e-6, 1.0}, {2e-6, 2.0}}), std::domain_error);
    CHECK_THROWS_AS(fit_power_law({{1e-6, 1.0}, {1e-6, 2.0}, {1e-6, 3.0}}), std::domain_error);
}

TEST_CASE("thermal stack validation") {
    ThermalStack s;
    s.wire_length = 200e-6; // exceeds the lateral half width
    CHECK_THROWS_AS(validate(s), std::invalid_argument);
    ThermalStack z;
    z.kappa_stack = 0.0;
    CHECK_THROWS_AS(validate(z), std::invalid_argument);
    CHECK_THROWS_AS(solve_temperature_at_level(ThermalStack{}, -1.0, 0), std::domain_error);
}
