#ifndef ETCSIM_THERMAL_HPP
#define ETCSIM_THERMAL_HPP

#include <utility>
#include <vector>

#include "etcsim/matrix.hpp"

namespace etcsim {

// Four-domain layered geometry: vacuum over a Joule-heated wire over the
// device stack over the silicon substrate. The wire is a segment of length L
// centered laterally; its width W equals L and enters only through the
// volumetric source density P / (W L t).
struct ThermalStack {
    double kappa_vacuum = 0.1;     // W/(m K)
    double kappa_wire = 10.0;
    double kappa_stack = 10.0;
    double kappa_substrate = 148.0;
    double h_vacuum = 500e-6;      // m
    double wire_thickness = 5e-9;
    double stack_thickness = 250e-9;
    double h_substrate = 600e-6;
    double g12 = 30.0;             // W/(m^2 K), vacuum/wire interface
    double g23 = 1e9;              // wire/stack
    double g34 = 1e9;              // stack/substrate
    double wire_length = 100e-9;   // L; W = L
    double ambient = 293.15;       // K
    double half_width = 50e-6;     // lateral half extent, fixed-T side walls
};

void validate(const ThermalStack& s);

struct TemperatureField {
    std::vector<double> x_centers; // m, centered on the wire
    std::vector<double> y_centers; // m, measured downward from the domain top
    std::vector<int> domain_of_row; // 0 vacuum, 1 wire slab, 2 stack, 3 substrate
    Matrix temperature;             // [x][y], kelvin
    double mid_channel = 0.0;       // T at (x=0, wire slab), kelvin
    int grid_level = 0;
    double boundary_flux = 0.0;     // W per unit depth out of the side walls
    double injected = 0.0;          // W per unit depth injected
};

// Single solve at a fixed refinement level (banded Cholesky direct).
TemperatureField solve_temperature_at_level(const ThermalStack& stack, double power, int level);

struct RefinedField {
    TemperatureField field;
    std::vector<double> rise_history; // mid-channel rise per level
};

// Refines until the mid-channel rise changes by less than rel_tol between
// levels. Throws (with the last two estimates) when max_levels is exhausted.
RefinedField solve_temperature(const ThermalStack& stack, double power, double rel_tol = 0.005,
                               int max_levels = 6);

struct CriticalPower {
    double power = 0.0;          // W
    double rise_per_watt = 0.0;  // K/W
    int grid_levels = 0;
};

// One unit-power solve; P = target_rise / rise_per_watt by linearity, verified
// by a confirmation solve within 0.1%.
CriticalPower critical_power(const ThermalStack& stack, double target_rise = 300.0);

struct SweepPoint {
    double length = 0.0;
    double p_crit = 0.0;
    double rise_per_watt = 0.0;
    int grid_levels = 0;
};

std::vector<SweepPoint> sweep_length(const ThermalStack& base, const std::vector<double>& lengths,
                                     double target_rise = 300.0);

// Lumped areal scaling law: P = dT * G * A.
double lumped_critical_power(double delta_t, double areal_conductance, double area);

struct PowerLawFit {
    double exponent = 0.0;
    double prefactor = 0.0;
    double exponent_std = 0.0;
};

// Least-squares line in (log F, log P).
PowerLawFit fit_power_law(const std::vector<std::pair<double, double>>& points);

} // namespace etcsim

#endif
