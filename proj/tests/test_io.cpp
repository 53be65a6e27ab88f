#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <string>
#include <unistd.h>

#include "etcsim/io.hpp"
#include "etcsim/presets.hpp"

using namespace etcsim;

namespace {

struct TempDir {
    std::filesystem::path path;
    TempDir() {
        path = std::filesystem::temp_directory_path() /
               ("etcsim_io_" + std::to_string(::getpid()));
        std::filesystem::create_directories(path);
    }
    ~TempDir() { std::filesystem::remove_all(path); }
    std::string file(const std::string& name) const { return (path / name).string(); }
};

} // namespace

TEST_CASE("error model CSV round trip") {
    TempDir dir;
    ErrorModel m({{1e-9, 2.1384e-11}, {1e-7, 3e-10}, {1e-3, 1.2e-5}});
    save_error_model_csv(dir.file("m.csv"), m);
    ErrorModel back = load_error_model_csv(dir.file("m.csv"));
    REQUIRE(back.anchors().size() == 3);
    for (std::size_t i = 0; i < 3; ++i) {
        CHECK(back.anchors()[i].g == m.anchors()[i].g);
        CHECK(back.anchors()[i].sigma == m.anchors()[i].sigma);
    }
}

TEST_CASE("error model CSV rejects bad headers and unsorted rows") {
    TempDir dir;
    {
        FILE* f = std::fopen(dir.file("bad.csv").c_str(), "w");
        std::fputs("conductance,sigma\n1e-9,1e-11\n", f);
        std::fclose(f);
    }
    CHECK_THROWS(load_error_model_csv(dir.file("bad.csv")));
    {
        FILE* f = std::fopen(dir.file("unsorted.csv").c_str(), "w");
        std::fputs("g_siemens,sigma_siemens\n1e-7,1e-10\n1e-9,1e-11\n", f);
        std::fclose(f);
    }
    CHECK_THROWS(load_error_model_csv(dir.file("unsorted.csv")));
    CHECK_THROWS(load_error_model_csv(dir.file("missing.csv")));
}

TEST_CASE("update map CSV round trip and rectangularity") {
    TempDir dir;
    UpdateMap m({-1.0, 1.0}, {1e-7, 1e-6}, {-0.1, -0.2, 0.1, 0.2});
    save_update_map_csv(dir.file("map.csv"), m);
    UpdateMap back = load_update_map_csv(dir.file("map.csv"));
    CHECK(back.voltage_grid() == m.voltage_grid());
    CHECK(back.duration_grid() == m.duration_grid());
    CHECK(back.delta_fraction() == m.delta_fraction());

    {
        FILE* f = std::fopen(dir.file("ragged.csv").c_str(), "w");
        std::fputs("v_volts,t_seconds,delta_fraction\n1.0,1e-7,0.1\n1.0,1e-6,0.2\n2.0,1e-7,0.3\n",
                   f);
        std::fclose(f);
    }
    CHECK_THROWS(load_update_map_csv(dir.file("ragged.csv")));
}

TEST_CASE("matrix CSV and binary round trips") {
    TempDir dir;
    Rng rng(3);
    Matrix m(7, 5);
    for (double& x : m.data) x = rng.normal() * std::pow(10.0, -6.0 * rng.uniform());

    save_matrix_csv(dir.file("m.csv"), m);
    Matrix c = load_matrix_csv(dir.file("m.csv"));
    REQUIRE(c.rows == 7);
    REQUIRE(c.cols == 5);
    CHECK(c.data == m.data); // round-trippable decimal formatting

    save_matrix_bin(dir.file("m.bin"), m);
    Matrix b = load_matrix_bin(dir.file("m.bin"));
    CHECK(b.data == m.data);
    CHECK(load_matrix(dir.file("m.bin")).data == m.data);
    CHECK(load_matrix(dir.file("m.csv")).data == m.data);
}

TEST_CASE("binary container rejects a foreign file") {
    TempDir dir;
    {
        FILE* f = std::fopen(dir.file("x.bin").c_str(), "wb");
        std::fputs("NOTMAGIC00000000", f);
        std::fclose(f);
    }
    CHECK_THROWS(load_matrix_bin(dir.file("x.bin")));
}

TEST_CASE("trace CSV and sample rate") {
    TempDir dir;
    {
        FILE* f = std::fopen(dir.file("trace.csv").c_str(), "w");
        std::fputs("t_seconds,current_amperes\n0.0,1e-6\n0.001,1.1e-6\n0.002,0.9e-6\n", f);
        std::fclose(f);
    }
    Trace tr = load_trace_csv(dir.file("trace.csv"));
    REQUIRE(tr.t.size() == 3);
    CHECK(tr.sample_rate() == doctest::Approx(1000.0));
}

TEST_CASE("format_double round trips exactly") {
    Rng rng(9);
    for (int k = 0; k < 1000; ++k) {
        const double v = (rng.uniform() - 0.5) * std::pow(10.0, 30.0 * (rng.uniform() - 0.5));
        CHECK(std::stod(format_double(v)) == v);
    }
}

TEST_CASE("shipped data files load cleanly") {
    const std::string dir = default_data_dir();
    for (const auto& name : preset_device_names()) CHECK_NOTHROW(preset_device(name, dir));
    CHECK_NOTHROW(load_default_update_map(dir));
    CHECK_NOTHROW(load_spectrum_csv(dir + "/noise_nsd_example.csv"));
    CHECK_THROWS(preset_device("unknown", dir));
}
