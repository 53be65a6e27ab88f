#include "etcsim/thermal.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace etcsim {

void validate(const ThermalStack& s) {
    auto pos = [](double v, const char* what) {
        if (!(v > 0.0)) throw std::invalid_argument(std::string(what) + " must be positive");
    };
    pos(s.kappa_vacuum, "kappa_vacuum");
    pos(s.kappa_wire, "kappa_wire");
    pos(s.kappa_stack, "kappa_stack");
    pos(s.kappa_substrate, "kappa_substrate");
    pos(s.h_vacuum, "h_vacuum");
    pos(s.wire_thickness, "wire_thickness");
    pos(s.stack_thickness, "stack_thickness");
    pos(s.h_substrate, "h_substrate");
    pos(s.g12, "g12");
    pos(s.g23, "g23");
    pos(s.g34, "g34");
    pos(s.wire_length, "wire_length");
    pos(s.half_width, "half_width");
    if (!(s.half_width > s.wire_length / 2.0))
        throw std::invalid_argument("half_width must exceed half the wire length");
}

namespace {

// cell sizes starting at `first`, growing geometrically, summing to `total`
std::vector<double> geometric_cells(double first, double total, double ratio) {
    std::vector<double> out;
    double s = 0.0;
    double d = first;
    while (s + d < total) {
        out.push_back(d);
        s += d;
        d *= ratio;
    }
    out.push_back(total - s);
    return out;
}

struct Grid {
    std::vector<double> dx, dy;
    std::vector<double> xc, yc; // centers; x centered on the wire, y from domain top
    std::vector<int> dom;       // per y-row: 0 vacuum, 1 wire slab, 2 stack, 3 substrate
};

Grid build_grid(const ThermalStack& s, int level) {
    const double ref = std::pow(1.5, level);
    const double L = s.wire_length;

    Grid g;
    int nf = std::max(8, static_cast<int>(8 * ref));
    if (nf % 2) ++nf;
    const double grow = std::pow(1.35, 1.0 / std::pow(ref, 0.3));
    std::vector<double> fine(nf, L / nf);
    std::vector<double> out = geometric_cells(1.5 * L / nf, s.half_width - L / 2.0, grow);
    g.dx.assign(out.rbegin(), out.rend());
    g.dx.insert(g.dx.end(), fine.begin(), fine.end());
    g.dx.insert(g.dx.end(), out.begin(), out.end());

    const int nw = std::max(2, static_cast<int>(2 * ref));
    const int ns = std::max(10, static_cast<int>(10 * ref));
    std::vector<double> vac = geometric_cells(2.0 * s.wire_thickness, s.h_vacuum, grow);
    g.dy.assign(vac.rbegin(), vac.rend());
    const std::size_t n_vac = g.dy.size();
    for (int k = 0; k < nw; ++k) g.dy.push_back(s.wire_thickness / nw);
    for (int k = 0; k < ns; ++k) g.dy.push_back(s.stack_thickness / ns);
    std::vector<double> sub = geometric_cells(2.0 * s.stack_thickness / ns, s.h_substrate, grow);
    g.dy.insert(g.dy.end(), sub.begin(), sub.end());

    g.dom.assign(g.dy.size(), 3);
    for (std::size_t j = 0; j < n_vac; ++j) g.dom[j] = 0;
    for (int k = 0; k < nw; ++k) g.dom[n_vac + k] = 1;
    for (int k = 0; k < ns; ++k) g.dom[n_vac + nw + k] = 2;

    double total_x = 0.0;
    for (double d : g.dx) total_x += d;
    double acc = 0.0;
    for (double d : g.dx) {
        g.xc.push_back(acc + d / 2.0 - total_x / 2.0);
        acc += d;
    }
    acc = 0.0;
    for (double d : g.dy) {
        g.yc.push_back(acc + d / 2.0);
        acc += d;
    }
    return g;
}

// Symmetric banded SPD solver (Cholesky, lower band stored by columns).
class BandedCholesky {
public:
    BandedCholesky(int n, int bw) : n_(n), bw_(bw), band_(static_cast<std::size_t>(n) * (bw + 1), 0.0) {}

    double& at(int row, int col) { // row >= col, row - col <= bw
        return band_[static_cast<std::size_t>(col) * (bw_ + 1) + (row - col)];
    }

    void factor() {
        for (int j = 0; j < n_; ++j) {
            const int lam = std::min(j + bw_, n_ - 1);
            double d = at(j, j);
            if (!(d > 0.0)) throw std::runtime_error("thermal system is not positive definite");
            d = std::sqrt(d);
            at(j, j) = d;
            for (int i = j + 1; i <= lam; ++i) at(i, j) /= d;
            for (int k = j + 1; k <= lam; ++k) {
                const double ljk = at(k, j);
                if (ljk == 0.0) continue;
                for (int i = k; i <= lam; ++i) at(i, k) -= at(i, j) * ljk;
            }
        }
    }

    void solve(std::vector<double>& b) const {
        for (int j = 0; j < n_; ++j) {
            const double yj = b[j] / cat(j, j);
            b[j] = yj;
            const int lam = std::min(j + bw_, n_ - 1);
            for (int i = j + 1; i <= lam; ++i) b[i] -= cat(i, j) * yj;
        }
        for (int j = n_ - 1; j >= 0; --j) {
            double s = b[j];
            const int lam = std::min(j + bw_, n_ - 1);
            for (int i = j + 1; i <= lam; ++i) s -= cat(i, j) * b[i];
            b[j] = s / cat(j, j);
        }
    }

private:
    double cat(int row, int col) const {
        return band_[static_cast<std::size_t>(col) * (bw_ + 1) + (row - col)];
    }
    int n_, bw_;
    std::vector<double> band_;
};

} // namespace

TemperatureField solve_temperature_at_level(const ThermalStack& s, double power, int level) {
    validate(s);
    if (power < 0.0) throw std::domain_error("power must be non-negative");

    const Grid g = build_grid(s, level);
    const int nx = static_cast<int>(g.dx.size());
    const int ny = static_cast<int>(g.dy.size());
    const double L = s.wire_length;
    const double kd[4] = {s.kappa_vacuum, s.kappa_wire, s.kappa_stack, s.kappa_substrate};

    // material per cell: the wire slab is wire material inside |x| <= L/2,
    // vacuum outside
    auto kappa = [&](int i, int j) {
        const int d = g.dom[j];
        if (d == 1) return std::abs(g.xc[i]) <= L / 2.0 + 1e-15 ? s.kappa_wire : s.kappa_vacuum;
        return kd[d];
    };
    auto iface_g = [&](int d_up, int d_dn) -> double {
        if (d_up == 0 && d_dn == 1) return s.g12;
        if (d_up == 1 && d_dn == 2) return s.g23;
        if (d_up == 2 && d_dn == 3) return s.g34;
        return 0.0; // same domain
    };

    const bool x_major = ny <= nx;
    const int bw = x_major ? ny : nx;
    const int n = nx * ny;
    auto index = [&](int i, int j) { return x_major ? i * ny + j : j * nx + i; };

    BandedCholesky chol(n, bw);
    std::vector<double> b(n, 0.0);

    auto add_link = [&](int a, int c, double u) {
        chol.at(a, a) += u;
        chol.at(c, c) += u;
        if (a > c) chol.at(a, c) -= u;
        else chol.at(c, a) -= u;
    };

    const double q = power / (L * L * s.wire_thickness); // W/m^3, W = L
    double injected = 0.0;

    for (int j = 0; j < ny; ++j) {
        for (int i = 0; i < nx; ++i) {
            const int a = index(i, j);
            if (i + 1 < nx) {
                const double u = g.dy[j] / (g.dx[i] / (2.0 * kappa(i, j)) +
                                            g.dx[i + 1] / (2.0 * kappa(i + 1, j)));
                add_link(a, index(i + 1, j), u);
            }
            if (j + 1 < ny) {
                double r = g.dy[j] / (2.0 * kappa(i, j)) + g.dy[j + 1] / (2.0 * kappa(i, j + 1));
                const double gi = iface_g(g.dom[j], g.dom[j + 1]);
                if (gi > 0.0) r += 1.0 / gi;
                add_link(a, index(i, j + 1), g.dx[i] / r);
            }
            if (i == 0) chol.at(a, a) += g.dy[j] * 2.0 * kappa(i, j) / g.dx[i];
            if (i == nx - 1) chol.at(a, a) += g.dy[j] * 2.0 * kappa(i, j) / g.dx[i];
            if (g.dom[j] == 1 && std::abs(g.xc[i]) <= L / 2.0 + 1e-15) {
                const double src = q * g.dx[i] * g.dy[j];
                b[a] += src;
                injected += src;
            }
        }
    }

    chol.factor();
    chol.solve(b); // b now holds T - ambient

    TemperatureField field;
    field.x_centers = g.xc;
    field.y_centers = g.yc;
    field.domain_of_row = g.dom;
    field.grid_level = level;
    field.injected = injected;
    field.temperature = Matrix(nx, ny);
    for (int i = 0; i < nx; ++i)
        for (int j = 0; j < ny; ++j) field.temperature(i, j) = s.ambient + b[index(i, j)];

    int icent = 0;
    for (int i = 1; i < nx; ++i)
        if (std::abs(g.xc[i]) < std::abs(g.xc[icent])) icent = i;
    double mid = s.ambient;
    double flux = 0.0;
    for (int j = 0; j < ny; ++j) {
        if (g.dom[j] == 1) mid = std::max(mid, field.temperature(icent, j));
        flux += g.dy[j] * 2.0 * kappa(0, j) / g.dx[0] * (field.temperature(0, j) - s.ambient);
        flux += g.dy[j] * 2.0 * kappa(nx - 1, j) / g.dx[nx - 1] *
                (field.temperature(nx - 1, j) - s.ambient);
    }
    field.mid_channel = mid;
    field.boundary_flux = flux;
    return field;
}

RefinedField solve_temperature(const ThermalStack& s, double power, double rel_tol, int max_levels) {
    RefinedField out;
    double prev_rise = -1.0;
    for (int level = 0; level < max_levels; ++level) {
        out.field = solve_temperature_at_level(s, power, level);
        const double rise = out.field.mid_channel - s.ambient;
        out.rise_history.push_back(rise);
        if (power == 0.0) return out; // homogeneous problem, exact at any level
        if (prev_rise >= 0.0 && std::abs(rise - prev_rise) <= rel_tol * std::abs(rise)) return out;
        prev_rise = rise;
    }
    std::string msg = "thermal refinement did not converge; last rises";
    const std::size_t k = out.rise_history.size();
    if (k >= 2)
        msg += " " + std::to_string(out.rise_history[k - 2]) + " K, " +
               std::to_string(out.rise_history[k - 1]) + " K";
    throw std::runtime_error(msg);
}

CriticalPower critical_power(const ThermalStack& s, double target_rise) {
    if (!(target_rise > 0.0)) throw std::domain_error("target_rise must be positive");
    const RefinedField unit = solve_temperature(s, 1.0);
    const double rise_per_watt = unit.field.mid_channel - s.ambient;
    if (!(rise_per_watt > 0.0)) throw std::domain_error("degenerate stack: no rise per watt");

    CriticalPower cp;
    cp.rise_per_watt = rise_per_watt;
    cp.power = target_rise / rise_per_watt;
    cp.grid_levels = unit.field.grid_level + 1;

    // confirmation solve at the predicted power
    const TemperatureField check = solve_temperature_at_level(s, cp.power, unit.field.grid_level);
    const double got = check.mid_channel - s.ambient;
    if (std::abs(got - target_rise) > 1e-3 * target_rise)
        throw std::runtime_error("critical power confirmation failed: rise " + std::to_string(got));
    return cp;
}

std::vector<SweepPoint> sweep_length(const ThermalStack& base, const std::vector<double>& lengths,
                                     double target_rise) {
    if (lengths.empty()) throw std::invalid_argument("length list is empty");
    for (std::size_t i = 1; i < lengths.size(); ++i)
        if (!(lengths[i] > lengths[i - 1]))
            throw std::invalid_argument("lengths must be ascending");

    std::vector<SweepPoint> out;
    for (double L : lengths) {
        ThermalStack s = base;
        s.wire_length = L;
        const CriticalPower cp = critical_power(s, target_rise);
        out.push_back({L, cp.power, cp.rise_per_watt, cp.grid_levels});
    }
    return out;
}

double lumped_critical_power(double delta_t, double areal_conductance, double area) {
    if (delta_t < 0.0 || areal_conductance < 0.0 || area < 0.0)
        throw std::domain_error("lumped model inputs must be non-negative");
    return delta_t * areal_conductance * area;
}

PowerLawFit fit_power_law(const std::vector<std::pair<double, double>>& points) {
    if (points.size() < 3) throw std::domain_error("power-law fit needs at least 3 points");
    std::vector<double> xs, ys;
    for (const auto& [f, p] : points) {
        if (!(f > 0.0) || !(p > 0.0)) throw std::domain_error("points must be positive");
        xs.push_back(std::log(f));
        ys.push_back(std::log(p));
    }
    const double n = static_cast<double>(xs.size());
    double xb = 0.0, yb = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        xb += xs[i];
        yb += ys[i];
    }
    xb /= n;
    yb /= n;
    double sxx = 0.0, sxy = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        sxx += (xs[i] - xb) * (xs[i] - xb);
        sxy += (xs[i] - xb) * (ys[i] - yb);
    }
    if (sxx == 0.0) throw std::domain_error("degenerate fit: all feature sizes equal");

    PowerLawFit fit;
    fit.exponent = sxy / sxx;
    fit.prefactor = std::exp(yb - fit.exponent * xb);
    double sse = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        const double r = ys[i] - (yb + fit.exponent * (xs[i] - xb));
        sse += r * r;
    }
    fit.exponent_std = xs.size() > 2 ? std::sqrt(sse / (n - 2.0) / sxx) : 0.0;
    return fit;
}

} // namespace etcsim
