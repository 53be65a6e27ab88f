#ifndef ETCSIM_CROSSBAR_HPP
#define ETCSIM_CROSSBAR_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "etcsim/device.hpp"
#include "etcsim/matrix.hpp"
#include "etcsim/rng.hpp"

namespace etcsim {

struct CrossbarConfig {
    double wire_resistance = 0.35;  // ohms per cell-to-cell segment, rows and columns
    double full_scale_voltage = 0.1; // volts
    bool interleave = true;          // alternate +/- physical columns
    double solver_tolerance = 1e-9;  // relative KCL residual
    int max_sweeps = 100000;
};

// Differential-pair conductance image of a weight matrix with frozen
// programming errors. Targets are kept alongside the perturbed conductances
// so ideal outputs and round trips stay available.
struct MappedArray {
    Matrix g_plus;       // perturbed conductances, rows x cols
    Matrix g_minus;
    Matrix target_plus;  // unperturbed targets
    Matrix target_minus;
    double weight_scale = 0.0; // weights per siemens
    DeviceParams params;
};

// scale = (g_max - g_min) / max|w|; positive weights program g_plus, negative
// g_minus, the partner stays at g_min. Each target is perturbed once by
// N(0, sigma_G(target)) and clamped at the positivity floor.
MappedArray map_weights(const Matrix& w, const DeviceParams& params, const ErrorModel& model,
                        Rng& rng);

// Physical column layout: interleaved (+,-,+,-,...) or blocked (+..+,-..-).
Matrix physical_conductances(const MappedArray& mapped, bool interleave);

// q_i = round(clamp(x_i, 0, x_max) / x_max * 255)
std::vector<int> quantize_inputs(const std::vector<double>& x, int bits, double x_max);

enum class InputEncoding {
    bit_serial_1x8, // 8 cycles of 1-bit voltages, weights 2^k
    nibble_4x2,     // 2 cycles of 4-bit voltages (low, high), weights (1, 16)
};

const char* to_string(InputEncoding e);
InputEncoding encoding_from_string(const std::string& s);

struct EncodedCycles {
    std::vector<std::vector<double>> cycle_voltages; // per cycle, per row
    std::vector<double> cycle_weights;               // digital recombination weights
    double digital_gain = 1.0; // sum_k w_k v_k = v_fs * q * digital_gain
};

EncodedCycles encode_inputs(const std::vector<int>& q, InputEncoding encoding, double v_fs);

// Solves the distributed-IR-drop network: one row node and one column node per
// cell joined by the cell conductance; wire segments between adjacent nodes;
// drivers at the left end of each row; column bottoms at virtual ground.
// Returns the current entering each column's ground terminal.
std::vector<double> solve_array(const Matrix& g_phys, const std::vector<double>& v_rows,
                                const CrossbarConfig& config);

// Full nodal solution, exposed for conservation/symmetry checks.
struct ArraySolution {
    Matrix v_row;                       // row-node voltages
    Matrix v_col;                       // column-node voltages
    std::vector<double> column_currents; // into ground terminals
    std::vector<double> driver_currents; // out of row drivers
    double residual = 0.0;               // relative KCL residual reached
    int sweeps = 0;
};

ArraySolution solve_array_full(const Matrix& g_phys, const std::vector<double>& v_rows,
                               const CrossbarConfig& config);

struct MvmResult {
    std::vector<std::vector<double>> analog_outputs; // per cycle, per physical column (A)
    std::vector<double> recombined; // weight * input units
    std::vector<double> ideal;      // ideal_mvm on unperturbed weights, quantized inputs
    double rms_error = 0.0;
    double normalized_rms_error = 0.0;
    double signal_range = 0.0;
};

// Multi-cycle encoded MVM against the mapped array. Inputs are the quantized
// codes; x_max restores physical input units in the recombined/ideal outputs.
MvmResult run_mvm(const MappedArray& mapped, const std::vector<int>& q, InputEncoding encoding,
                  const CrossbarConfig& config, double x_max = 255.0);

std::vector<double> ideal_mvm(const Matrix& w, const std::vector<double>& x);

// Contiguous row blocks of at most array_rows rows; the last may be short.
std::vector<Matrix> partition_matrix(const Matrix& w, int array_rows);

struct NormalizedRms {
    double rms = 0.0;
    double signal_range = 0.0; // 2 * quantile(|ideal|, inner_fraction)
    double normalized = 0.0;
};

NormalizedRms normalized_rms(const std::vector<double>& simulated,
                             const std::vector<double>& ideal,
                             double inner_fraction = 0.999);

struct SweepDevice {
    DeviceParams params;
    InputEncoding encoding = InputEncoding::bit_serial_1x8;
};

struct SweepRow {
    std::string device;
    int array_rows = 0;
    double rw_ohms = 0.0;
    InputEncoding encoding = InputEncoding::bit_serial_1x8;
    double normalized_rms = 0.0;
    double rms = 0.0;
    double signal_range = 0.0;
    std::uint64_t seed = 0;
};

// For each device and array size: map per partition (seed derived per device,
// size, partition), run all input vectors, aggregate partial dot products into
// one normalized error. Deterministic for a fixed seed and worker count.
std::vector<SweepRow> mvm_error_sweep(const std::vector<SweepDevice>& devices,
                                      const std::vector<int>& rows_list, const Matrix& w,
                                      const std::vector<std::vector<int>>& quantized_inputs,
                                      const CrossbarConfig& config, double x_max,
                                      std::uint64_t master_seed, int workers = 0);

} // namespace etcsim

#endif
