#ifndef ETCSIM_PRESETS_HPP
#define ETCSIM_PRESETS_HPP

#include <string>
#include <vector>

#include "etcsim/crossbar.hpp"
#include "etcsim/device.hpp"
#include "etcsim/matrix.hpp"

namespace etcsim {

// Shipped calibration: conductance ranges and input encodings per technology,
// sigma_G(G) curves loaded from the data directory.
//   etcram    1 nS  .. 1.6 uS, 4-bit voltage x 2 cycles (linear I-V)
//   sonos     10 pS .. 16 uS,  1-bit voltage x 8 cycles
//   pcm       0.47 uS .. 25 uS
//   memristor 0.57 uS .. 39.3 uS
SweepDevice preset_device(const std::string& name, const std::string& data_dir);

std::vector<std::string> preset_device_names();

std::string default_data_dir();

UpdateMap load_default_update_map(const std::string& data_dir);

// Retention calibrations: low state loses 10.3% over 20 h, high state 0.09%
// over 3 h, both at the 200 C bake temperature.
RetentionParams etcram_retention_low();
RetentionParams etcram_retention_high();

// Supp-style workload stand-ins: Gaussian weights, non-negative inputs from
// rectified Gaussians (ReLU-like activations).
Matrix synthetic_gaussian_weights(int rows, int cols, Rng& rng);
std::vector<std::vector<double>> synthetic_relu_inputs(int count, int dim, Rng& rng);

} // namespace etcsim

#endif
