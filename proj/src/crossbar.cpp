#include "etcsim/crossbar.hpp"

#include <algorithm>
#include <cmath>
#include <future>
#include <numeric>
#include <stdexcept>
#include <thread>

namespace etcsim {

namespace {

// Distributed IR-drop network, solved by alternating exact tridiagonal line
// solves over row nodes and column nodes (block Gauss-Seidel). The Thomas
// factorizations depend only on the conductances and the wire segment
// conductance, so they are built once and reused across cycles and vectors.
class LineSolver {
public:
    LineSolver(const Matrix& g, double g_wire) : n_(g.rows), m_(g.cols), gw_(g_wire), g_(g) {
        gt_ = Matrix(m_, n_);
        for (int i = 0; i < n_; ++i)
            for (int j = 0; j < m_; ++j) gt_(j, i) = g(i, j);

        row_cp_.resize(static_cast<std::size_t>(n_) * m_);
        row_inv_.resize(row_cp_.size());
        col_cp_.resize(row_cp_.size());
        col_inv_.resize(row_cp_.size());

        for (int i = 0; i < n_; ++i) {
            // row-node diag: driver link at j=0, open end at j=m-1
            double prev_cp = 0.0;
            for (int j = 0; j < m_; ++j) {
                double diag = g(i, j) + gw_;              // one wire link minimum
                if (j + 1 < m_) diag += gw_;              // link to the right
                const double denom = diag + gw_ * prev_cp;
                const double inv = 1.0 / denom;
                row_inv_[idx(i, j)] = inv;
                prev_cp = (j + 1 < m_) ? -gw_ * inv : 0.0;
                row_cp_[idx(i, j)] = prev_cp;
            }
        }
        for (int j = 0; j < m_; ++j) {
            // column-node diag: open end at i=0, ground link at i=n-1
            double prev_cp = 0.0;
            for (int i = 0; i < n_; ++i) {
                double diag = gt_(j, i) + gw_;            // down link (node or ground)
                if (i > 0) diag += gw_;                   // link upward
                const double denom = diag + gw_ * prev_cp;
                const double inv = 1.0 / denom;
                col_inv_[tidx(j, i)] = inv;
                prev_cp = (i + 1 < n_) ? -gw_ * inv : 0.0;
                col_cp_[tidx(j, i)] = prev_cp;
            }
        }
    }

    struct Stats {
        double residual = 0.0;
        int sweeps = 0;
    };

    // vr: n*m row-major row-node voltages; vc: m*n column-major column-node voltages
    Stats solve(const std::vector<double>& v, double tol, int max_sweeps,
                std::vector<double>& vr, std::vector<double>& vc) const {
        vr.assign(static_cast<std::size_t>(n_) * m_, 0.0);
        vc.assign(static_cast<std::size_t>(n_) * m_, 0.0);

        double b_norm2 = 0.0;
        for (int i = 0; i < n_; ++i) b_norm2 += gw_ * v[i] * gw_ * v[i];
        if (b_norm2 == 0.0) return {0.0, 0};
        const double b_norm = std::sqrt(b_norm2);

        Stats stats;
        for (int sweep = 1; sweep <= max_sweeps; ++sweep) {
            // row pass: exact solve of every row line given column nodes
            for (int i = 0; i < n_; ++i) {
                double prev = 0.0;
                for (int j = 0; j < m_; ++j) {
                    double rhs = g_(i, j) * vc[tidx(j, i)];
                    if (j == 0) rhs += gw_ * v[i];
                    prev = (rhs + gw_ * prev) * row_inv_[idx(i, j)];
                    vr[idx(i, j)] = prev; // holds d' during the forward pass
                }
                double next = 0.0;
                for (int j = m_ - 1; j >= 0; --j) {
                    next = vr[idx(i, j)] - row_cp_[idx(i, j)] * next;
                    vr[idx(i, j)] = next;
                }
            }
            // column pass
            for (int j = 0; j < m_; ++j) {
                double prev = 0.0;
                for (int i = 0; i < n_; ++i) {
                    const double rhs = gt_(j, i) * vr[idx(i, j)];
                    prev = (rhs + gw_ * prev) * col_inv_[tidx(j, i)];
                    vc[tidx(j, i)] = prev;
                }
                double next = 0.0;
                for (int i = n_ - 1; i >= 0; --i) {
                    next = vc[tidx(j, i)] - col_cp_[tidx(j, i)] * next;
                    vc[tidx(j, i)] = next;
                }
            }
            // after an exact column pass only the row equations carry residual
            double r2 = 0.0;
            for (int i = 0; i < n_; ++i) {
                for (int j = 0; j < m_; ++j) {
                    const double center = vr[idx(i, j)];
                    double r = g_(i, j) * (vc[tidx(j, i)] - center);
                    r += gw_ * ((j > 0 ? vr[idx(i, j - 1)] : v[i]) - center);
                    if (j + 1 < m_) r += gw_ * (vr[idx(i, j + 1)] - center);
                    r2 += r * r;
                }
            }
            stats.sweeps = sweep;
            stats.residual = std::sqrt(r2) / b_norm;
            if (stats.residual <= tol) return stats;
        }
        throw std::runtime_error("solve_array did not converge: relative residual " +
                                 std::to_string(stats.residual) + " after " +
                                 std::to_string(stats.sweeps) + " sweeps");
    }

    std::vector<double> column_currents(const std::vector<double>& vc) const {
        std::vector<double> out(m_);
        for (int j = 0; j < m_; ++j) out[j] = gw_ * vc[tidx(j, n_ - 1)];
        return out;
    }

    std::vector<double> driver_currents(const std::vector<double>& v,
                                        const std::vector<double>& vr) const {
        std::vector<double> out(n_);
        for (int i = 0; i < n_; ++i) out[i] = gw_ * (v[i] - vr[idx(i, 0)]);
        return out;
    }

private:
    std::size_t idx(int i, int j) const { return static_cast<std::size_t>(i) * m_ + j; }
    std::size_t tidx(int j, int i) const { return static_cast<std::size_t>(j) * n_ + i; }

    int n_, m_;
    double gw_;
    Matrix g_;
    Matrix gt_; // transposed copy for the column pass
    std::vector<double> row_cp_, row_inv_, col_cp_, col_inv_;
};

std::vector<double> ideal_column_currents(const Matrix& g, const std::vector<double>& v) {
    std::vector<double> out(g.cols, 0.0);
    for (int i = 0; i < g.rows; ++i) {
        const double vi = v[i];
        if (vi == 0.0) continue;
        const double* row = &g.data[static_cast<std::size_t>(i) * g.cols];
        for (int j = 0; j < g.cols; ++j) out[j] += row[j] * vi;
    }
    return out;
}

} // namespace

MappedArray map_weights(const Matrix& w, const DeviceParams& params, const ErrorModel& model,
                        Rng& rng) {
    validate(params);
    if (w.empty()) throw std::domain_error("weight matrix is empty");
    double w_max = 0.0;
    for (double x : w.data) w_max = std::max(w_max, std::abs(x));
    if (w_max == 0.0) throw std::domain_error("all-zero weight matrix: conductance scale undefined");

    const double siemens_per_weight = (params.g_max - params.g_min) / w_max;

    MappedArray out;
    out.params = params;
    out.weight_scale = 1.0 / siemens_per_weight;
    out.target_plus = Matrix(w.rows, w.cols);
    out.target_minus = Matrix(w.rows, w.cols);
    out.g_plus = Matrix(w.rows, w.cols);
    out.g_minus = Matrix(w.rows, w.cols);

    for (int i = 0; i < w.rows; ++i) {
        for (int j = 0; j < w.cols; ++j) {
            const double x = w(i, j);
            const double tp = x >= 0.0 ? params.g_min + x * siemens_per_weight : params.g_min;
            const double tm = x >= 0.0 ? params.g_min : params.g_min - x * siemens_per_weight;
            out.target_plus(i, j) = tp;
            out.target_minus(i, j) = tm;
            out.g_plus(i, j) = std::max(tp + rng.normal(0.0, model.sigma_at(tp)), kConductanceFloor);
            out.g_minus(i, j) = std::max(tm + rng.normal(0.0, model.sigma_at(tm)), kConductanceFloor);
        }
    }
    return out;
}

Matrix physical_conductances(const MappedArray& mapped, bool interleave) {
    const int n = mapped.g_plus.rows;
    const int c = mapped.g_plus.cols;
    Matrix phys(n, 2 * c);
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < c; ++j) {
            const int jp = interleave ? 2 * j : j;
            const int jm = interleave ? 2 * j + 1 : c + j;
            phys(i, jp) = mapped.g_plus(i, j);
            phys(i, jm) = mapped.g_minus(i, j);
        }
    }
    return phys;
}

std::vector<int> quantize_inputs(const std::vector<double>& x, int bits, double x_max) {
    if (bits != 8) throw std::domain_error("only 8-bit input quantization is supported");
    if (!(x_max > 0.0)) throw std::domain_error("x_max must be positive");
    std::vector<int> q(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
        if (x[i] < 0.0) throw std::domain_error("inputs must be non-negative");
        const double clamped = std::min(x[i], x_max);
        q[i] = static_cast<int>(std::round(clamped / x_max * 255.0));
    }
    return q;
}

const char* to_string(InputEncoding e) {
    return e == InputEncoding::bit_serial_1x8 ? "bit_serial_1x8" : "nibble_4x2";
}

InputEncoding encoding_from_string(const std::string& s) {
    if (s == "bit_serial_1x8") return InputEncoding::bit_serial_1x8;
    if (s == "nibble_4x2") return InputEncoding::nibble_4x2;
    throw std::invalid_argument("unknown input encoding: " + s);
}

EncodedCycles encode_inputs(const std::vector<int>& q, InputEncoding encoding, double v_fs) {
    for (int qi : q)
        if (qi < 0 || qi > 255) throw std::domain_error("quantized inputs must be in [0, 255]");

    EncodedCycles enc;
    if (encoding == InputEncoding::bit_serial_1x8) {
        enc.digital_gain = 1.0;
        for (int k = 0; k < 8; ++k) {
            std::vector<double> v(q.size());
            for (std::size_t i = 0; i < q.size(); ++i) v[i] = ((q[i] >> k) & 1) ? v_fs : 0.0;
            enc.cycle_voltages.push_back(std::move(v));
            enc.cycle_weights.push_back(static_cast<double>(1 << k));
        }
    } else {
        enc.digital_gain = 1.0 / 15.0; // sum_k w_k v_k = v_fs * q / 15
        std::vector<double> lo(q.size()), hi(q.size());
        for (std::size_t i = 0; i < q.size(); ++i) {
            lo[i] = v_fs * (q[i] % 16) / 15.0;
            hi[i] = v_fs * (q[i] / 16) / 15.0;
        }
        enc.cycle_voltages.push_back(std::move(lo));
        enc.cycle_voltages.push_back(std::move(hi));
        enc.cycle_weights = {1.0, 16.0};
    }
    return enc;
}

ArraySolution solve_array_full(const Matrix& g_phys, const std::vector<double>& v_rows,
                               const CrossbarConfig& config) {
    if (static_cast<int>(v_rows.size()) != g_phys.rows)
        throw std::invalid_argument("row voltage count does not match array rows");
    if (config.wire_resistance < 0.0)
        throw std::invalid_argument("wire resistance must be >= 0");

    ArraySolution sol;
    if (config.wire_resistance == 0.0) {
        // network degenerates to the ideal dot product
        sol.v_row = Matrix(g_phys.rows, g_phys.cols);
        sol.v_col = Matrix(g_phys.rows, g_phys.cols);
        for (int i = 0; i < g_phys.rows; ++i)
            for (int j = 0; j < g_phys.cols; ++j) sol.v_row(i, j) = v_rows[i];
        sol.column_currents = ideal_column_currents(g_phys, v_rows);
        for (int i = 0; i < g_phys.rows; ++i) {
            double s = 0.0;
            for (int j = 0; j < g_phys.cols; ++j) s += g_phys(i, j) * v_rows[i];
            sol.driver_currents.push_back(s);
        }
        return sol;
    }

    LineSolver solver(g_phys, 1.0 / config.wire_resistance);
    std::vector<double> vr, vc;
    const auto stats = solver.solve(v_rows, config.solver_tolerance, config.max_sweeps, vr, vc);
    sol.residual = stats.residual;
    sol.sweeps = stats.sweeps;
    sol.column_currents = solver.column_currents(vc);
    sol.driver_currents = solver.driver_currents(v_rows, vr);
    sol.v_row = Matrix(g_phys.rows, g_phys.cols);
    sol.v_col = Matrix(g_phys.rows, g_phys.cols);
    for (int i = 0; i < g_phys.rows; ++i) {
        for (int j = 0; j < g_phys.cols; ++j) {
            sol.v_row(i, j) = vr[static_cast<std::size_t>(i) * g_phys.cols + j];
            sol.v_col(i, j) = vc[static_cast<std::size_t>(j) * g_phys.rows + i];
        }
    }
    return sol;
}

std::vector<double> solve_array(const Matrix& g_phys, const std::vector<double>& v_rows,
                                const CrossbarConfig& config) {
    return solve_array_full(g_phys, v_rows, config).column_currents;
}

std::vector<double> ideal_mvm(const Matrix& w, const std::vector<double>& x) {
    if (static_cast<int>(x.size()) != w.rows)
        throw std::invalid_argument("ideal_mvm: dimension mismatch");
    std::vector<double> out(w.cols, 0.0);
    for (int i = 0; i < w.rows; ++i) {
        const double xi = x[i];
        if (xi == 0.0) continue;
        const double* row = &w.data[static_cast<std::size_t>(i) * w.cols];
        for (int j = 0; j < w.cols; ++j) out[j] += row[j] * xi;
    }
    return out;
}

MvmResult run_mvm(const MappedArray& mapped, const std::vector<int>& q, InputEncoding encoding,
                  const CrossbarConfig& config, double x_max) {
    const int n = mapped.g_plus.rows;
    const int c = mapped.g_plus.cols;
    if (static_cast<int>(q.size()) != n)
        throw std::invalid_argument("run_mvm: input length does not match rows");
    if (encoding == InputEncoding::nibble_4x2 && !mapped.params.iv_linear)
        throw std::domain_error("multi-level voltage encoding requires a linear-I-V device");

    const EncodedCycles enc = encode_inputs(q, encoding, config.full_scale_voltage);
    const Matrix phys = physical_conductances(mapped, config.interleave);

    MvmResult result;
    std::vector<double> diff(c, 0.0);

    std::unique_ptr<LineSolver> solver;
    std::vector<double> vr, vc;
    if (config.wire_resistance > 0.0) solver = std::make_unique<LineSolver>(phys, 1.0 / config.wire_resistance);

    for (std::size_t k = 0; k < enc.cycle_voltages.size(); ++k) {
        std::vector<double> currents;
        bool all_zero = true;
        for (double v : enc.cycle_voltages[k])
            if (v != 0.0) { all_zero = false; break; }
        if (all_zero) {
            currents.assign(phys.cols, 0.0);
        } else if (solver) {
            solver->solve(enc.cycle_voltages[k], config.solver_tolerance, config.max_sweeps, vr, vc);
            currents = solver->column_currents(vc);
        } else {
            currents = ideal_column_currents(phys, enc.cycle_voltages[k]);
        }
        for (int j = 0; j < c; ++j) {
            const int jp = config.interleave ? 2 * j : j;
            const int jm = config.interleave ? 2 * j + 1 : c + j;
            diff[j] += enc.cycle_weights[k] * (currents[jp] - currents[jm]);
        }
        result.analog_outputs.push_back(std::move(currents));
    }

    // currents -> weight * input units
    const double unit = mapped.weight_scale * x_max /
                        (255.0 * config.full_scale_voltage * enc.digital_gain);
    result.recombined.resize(c);
    for (int j = 0; j < c; ++j) result.recombined[j] = diff[j] * unit;

    // ideal path: unperturbed weights on dequantized inputs
    std::vector<double> xq(q.size());
    for (std::size_t i = 0; i < q.size(); ++i) xq[i] = q[i] * x_max / 255.0;
    Matrix w_recon(n, c);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < c; ++j)
            w_recon(i, j) = (mapped.target_plus(i, j) - mapped.target_minus(i, j)) * mapped.weight_scale;
    result.ideal = ideal_mvm(w_recon, xq);

    const auto nr = normalized_rms(result.recombined, result.ideal);
    result.rms_error = nr.rms;
    result.signal_range = nr.signal_range;
    result.normalized_rms_error = nr.normalized;
    return result;
}

std::vector<Matrix> partition_matrix(const Matrix& w, int array_rows) {
    if (array_rows < 1) throw std::invalid_argument("array_rows must be >= 1");
    std::vector<Matrix> parts;
    for (int r0 = 0; r0 < w.rows; r0 += array_rows) {
        const int r1 = std::min(r0 + array_rows, w.rows);
        Matrix block(r1 - r0, w.cols);
        for (int i = r0; i < r1; ++i)
            for (int j = 0; j < w.cols; ++j) block(i - r0, j) = w(i, j);
        parts.push_back(std::move(block));
    }
    return parts;
}

NormalizedRms normalized_rms(const std::vector<double>& simulated,
                             const std::vector<double>& ideal, double inner_fraction) {
    if (simulated.empty() || ideal.empty()) throw std::domain_error("normalized_rms: empty inputs");
    if (simulated.size() != ideal.size())
        throw std::invalid_argument("normalized_rms: length mismatch");
    if (!(inner_fraction > 0.0 && inner_fraction <= 1.0))
        throw std::invalid_argument("inner_fraction must be in (0, 1]");

    std::vector<double> mag(ideal.size());
    for (std::size_t i = 0; i < ideal.size(); ++i) mag[i] = std::abs(ideal[i]);
    std::sort(mag.begin(), mag.end());
    const double pos = inner_fraction * static_cast<double>(mag.size() - 1);
    const std::size_t lo = static_cast<std::size_t>(pos);
    const double frac = pos - static_cast<double>(lo);
    const double a = lo + 1 < mag.size() ? mag[lo] * (1.0 - frac) + mag[lo + 1] * frac : mag[lo];

    double se = 0.0;
    for (std::size_t i = 0; i < ideal.size(); ++i) {
        const double d = simulated[i] - ideal[i];
        se += d * d;
    }
    NormalizedRms out;
    out.rms = std::sqrt(se / static_cast<double>(ideal.size()));
    out.signal_range = 2.0 * a;
    out.normalized = out.signal_range > 0.0 ? out.rms / out.signal_range : 0.0;
    return out;
}

namespace {

std::uint64_t label_hash(const std::string& s) {
    std::uint64_t h = 1469598103934665603ULL;
    for (unsigned char ch : s) {
        h ^= ch;
        h *= 1099511628211ULL;
    }
    return h;
}

} // namespace

std::vector<SweepRow> mvm_error_sweep(const std::vector<SweepDevice>& devices,
                                      const std::vector<int>& rows_list, const Matrix& w,
                                      const std::vector<std::vector<int>>& quantized_inputs,
                                      const CrossbarConfig& config, double x_max,
                                      std::uint64_t master_seed, int workers) {
    for (const auto& q : quantized_inputs)
        if (static_cast<int>(q.size()) != w.rows)
            throw std::invalid_argument("input vector length does not match weight rows");
    if (workers <= 0)
        workers = std::max(1u, std::min(std::thread::hardware_concurrency(), 8u));

    std::vector<SweepRow> table;
    for (const auto& dev : devices) {
        for (int rows : rows_list) {
            const auto parts = partition_matrix(w, rows);

            struct Part {
                MappedArray mapped;
                Matrix phys;
                Matrix w_recon;
                std::unique_ptr<LineSolver> solver;
                int row0 = 0;
            };
            std::vector<Part> built;
            int row0 = 0;
            for (std::size_t ip = 0; ip < parts.size(); ++ip) {
                Rng rng(Rng::derive(master_seed,
                                    {label_hash(dev.params.label), static_cast<std::uint64_t>(rows),
                                     static_cast<std::uint64_t>(ip)}));
                Part p;
                p.mapped = map_weights(parts[ip], dev.params, dev.params.error_model, rng);
                p.phys = physical_conductances(p.mapped, config.interleave);
                if (config.wire_resistance > 0.0)
                    p.solver = std::make_unique<LineSolver>(p.phys, 1.0 / config.wire_resistance);
                p.w_recon = Matrix(parts[ip].rows, parts[ip].cols);
                for (int i = 0; i < parts[ip].rows; ++i)
                    for (int j = 0; j < parts[ip].cols; ++j)
                        p.w_recon(i, j) = (p.mapped.target_plus(i, j) - p.mapped.target_minus(i, j)) *
                                          p.mapped.weight_scale;
                p.row0 = row0;
                row0 += parts[ip].rows;
                built.push_back(std::move(p));
            }

            const int c = w.cols;
            const std::size_t per_vec = built.size() * static_cast<std::size_t>(c);
            std::vector<double> sim(quantized_inputs.size() * per_vec);
            std::vector<double> ideal(sim.size());

            auto run_chunk = [&](std::size_t v0, std::size_t v1) {
                std::vector<double> vr, vc, diff(c);
                for (std::size_t iv = v0; iv < v1; ++iv) {
                    const auto& q_full = quantized_inputs[iv];
                    for (std::size_t ip = 0; ip < built.size(); ++ip) {
                        const Part& p = built[ip];
                        const int pn = p.mapped.g_plus.rows;
                        std::vector<int> q(q_full.begin() + p.row0, q_full.begin() + p.row0 + pn);
                        const EncodedCycles enc =
                            encode_inputs(q, dev.encoding, config.full_scale_voltage);
                        std::fill(diff.begin(), diff.end(), 0.0);
                        for (std::size_t k = 0; k < enc.cycle_voltages.size(); ++k) {
                            const auto& volt = enc.cycle_voltages[k];
                            bool all_zero = true;
                            for (double x : volt)
                                if (x != 0.0) { all_zero = false; break; }
                            if (all_zero) continue;
                            std::vector<double> currents;
                            if (p.solver) {
                                p.solver->solve(volt, config.solver_tolerance, config.max_sweeps, vr,
                                                vc);
                                currents = p.solver->column_currents(vc);
                            } else {
                                currents = ideal_column_currents(p.phys, volt);
                            }
                            for (int j = 0; j < c; ++j) {
                                const int jp = config.interleave ? 2 * j : j;
                                const int jm = config.interleave ? 2 * j + 1 : c + j;
                                diff[j] += enc.cycle_weights[k] * (currents[jp] - currents[jm]);
                            }
                        }
                        const double unit = p.mapped.weight_scale * x_max /
                                            (255.0 * config.full_scale_voltage * enc.digital_gain);
                        std::vector<double> xq(q.size());
                        for (std::size_t i = 0; i < q.size(); ++i) xq[i] = q[i] * x_max / 255.0;
                        const std::vector<double> id = ideal_mvm(p.w_recon, xq);
                        const std::size_t base = iv * per_vec + ip * c;
                        for (int j = 0; j < c; ++j) {
                            sim[base + j] = diff[j] * unit;
                            ideal[base + j] = id[j];
                        }
                    }
                }
            };

            if (workers == 1 || quantized_inputs.size() < 2) {
                run_chunk(0, quantized_inputs.size());
            } else {
                const std::size_t nv = quantized_inputs.size();
                const std::size_t chunk = (nv + workers - 1) / workers;
                std::vector<std::future<void>> futs;
                for (std::size_t v0 = 0; v0 < nv; v0 += chunk)
                    futs.push_back(std::async(std::launch::async, run_chunk, v0,
                                              std::min(v0 + chunk, nv)));
                for (auto& f : futs) f.get();
            }

            const auto nr = normalized_rms(sim, ideal);
            SweepRow rowout;
            rowout.device = dev.params.label;
            rowout.array_rows = rows;
            rowout.rw_ohms = config.wire_resistance;
            rowout.encoding = dev.encoding;
            rowout.normalized_rms = nr.normalized;
            rowout.rms = nr.rms;
            rowout.signal_range = nr.signal_range;
            rowout.seed = master_seed;
            table.push_back(std::move(rowout));
        }
    }
    return table;
}

} // namespace etcsim
