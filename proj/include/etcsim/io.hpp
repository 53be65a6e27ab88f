#ifndef ETCSIM_IO_HPP
#define ETCSIM_IO_HPP

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "etcsim/analysis.hpp"
#include "etcsim/device.hpp"
#include "etcsim/matrix.hpp"

namespace etcsim {

// Error model CSV: header "g_siemens,sigma_siemens", rows ascending in g.
ErrorModel load_error_model_csv(const std::string& path);
void save_error_model_csv(const std::string& path, const ErrorModel& model);

// Update map CSV, long format: "v_volts,t_seconds,delta_fraction" covering a
// rectangular grid.
UpdateMap load_update_map_csv(const std::string& path, double significance_sigma_multiple = 3.0);
void save_update_map_csv(const std::string& path, const UpdateMap& map);

// Dense matrix CSV (no header) and the binary container: 16-byte header
// (8-byte magic "ETCMTX01", u32 rows, u32 cols, little-endian) followed by
// row-major float64.
Matrix load_matrix_csv(const std::string& path);
void save_matrix_csv(const std::string& path, const Matrix& m);
Matrix load_matrix_bin(const std::string& path);
void save_matrix_bin(const std::string& path, const Matrix& m);
Matrix load_matrix(const std::string& path); // dispatch on .bin/.csv extension

// Trace CSV: "t_seconds,current_amperes".
struct Trace {
    std::vector<double> t;
    std::vector<double> current;
    double sample_rate() const; // from the first two timestamps
};
Trace load_trace_csv(const std::string& path);

// Generic two-column CSV with a required header naming both columns.
std::vector<std::pair<double, double>> load_pairs_csv(const std::string& path,
                                                      const std::string& col_a,
                                                      const std::string& col_b);

// Calibration CSV: "temperature_k,resistance_ohms".
std::vector<std::pair<double, double>> load_tcr_csv(const std::string& path);

// Spectrum CSV: "frequency_hz,psd_per_hz".
NoiseSpectrum load_spectrum_csv(const std::string& path);

// Round-trippable decimal formatting used for every emitted number.
std::string format_double(double v);

std::uint64_t fnv1a(const std::string& s);

} // namespace etcsim

#endif
