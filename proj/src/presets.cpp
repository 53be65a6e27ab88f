#include "etcsim/presets.hpp"

#include <cmath>
#include <stdexcept>

#include "etcsim/io.hpp"

namespace etcsim {

std::string default_data_dir() {
#ifdef ETCSIM_DATA_DIR
    return ETCSIM_DATA_DIR;
#else
    return "data";
#endif
}

std::vector<std::string> preset_device_names() {
    return {"etcram", "sonos", "pcm", "memristor"};
}

SweepDevice preset_device(const std::string& name, const std::string& data_dir) {
    SweepDevice dev;
    if (name == "etcram") {
        dev.params = {1e-9, 1.6e-6, load_error_model_csv(data_dir + "/etcram_sigma.csv"), true,
                      "etcram"};
        dev.encoding = InputEncoding::nibble_4x2;
    } else if (name == "sonos") {
        dev.params = {10e-12, 16.0e-6, load_error_model_csv(data_dir + "/sonos_sigma.csv"), false,
                      "sonos"};
        dev.encoding = InputEncoding::bit_serial_1x8;
    } else if (name == "pcm") {
        dev.params = {0.47e-6, 25.0e-6, load_error_model_csv(data_dir + "/pcm_sigma.csv"), false,
                      "pcm"};
        dev.encoding = InputEncoding::bit_serial_1x8;
    } else if (name == "memristor") {
        dev.params = {0.57e-6, 39.3e-6, load_error_model_csv(data_dir + "/memristor_sigma.csv"),
                      false, "memristor"};
        dev.encoding = InputEncoding::bit_serial_1x8;
    } else {
        throw std::invalid_argument("unknown device preset: " + name);
    }
    return dev;
}

UpdateMap load_default_update_map(const std::string& data_dir) {
    return load_update_map_csv(data_dir + "/etcram_update_map.csv");
}

RetentionParams etcram_retention_low() {
    // 10.3% loss after 20 h at the 200 C bake
    RetentionParams p;
    p.reference_temperature = 473.15;
    p.onset_time = 1.0;
    p.fraction_per_decade = 0.103 / std::log10(1.0 + 20.0 * 3600.0);
    return p;
}

RetentionParams etcram_retention_high() {
    // 0.09% loss after 3 h
    RetentionParams p;
    p.reference_temperature = 473.15;
    p.onset_time = 1.0;
    p.fraction_per_decade = 0.0009 / std::log10(1.0 + 3.0 * 3600.0);
    return p;
}

Matrix synthetic_gaussian_weights(int rows, int cols, Rng& rng) {
    Matrix w(rows, cols);
    for (double& x : w.data) x = rng.normal();
    return w;
}

std::vector<std::vector<double>> synthetic_relu_inputs(int count, int dim, Rng& rng) {
    std::vector<std::vector<double>> out(count, std::vector<double>(dim));
    for (auto& vec : out)
        for (double& x : vec) x = std::max(0.0, rng.normal());
    return out;
}

} // namespace etcsim
