#include "etcsim/io.hpp"

#include <algorithm>
#include <charconv>
#include <cstring>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <stdexcept>

namespace etcsim {

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> out;
    std::string field;
    std::stringstream ss(line);
    while (std::getline(ss, field, ',')) {
        // trim whitespace
        const auto b = field.find_first_not_of(" \t\r");
        const auto e = field.find_last_not_of(" \t\r");
        out.push_back(b == std::string::npos ? std::string() : field.substr(b, e - b + 1));
    }
    return out;
}

double parse_double(const std::string& s, const std::string& path) {
    try {
        std::size_t used = 0;
        const double v = std::stod(s, &used);
        if (used != s.size()) throw std::invalid_argument(s);
        return v;
    } catch (const std::exception&) {
        throw std::runtime_error(path + ": cannot parse number '" + s + "'");
    }
}

std::ifstream open_in(const std::string& path, bool binary = false) {
    std::ifstream in(path, binary ? std::ios::binary : std::ios::in);
    if (!in) throw std::runtime_error("cannot open " + path);
    return in;
}

std::ofstream open_out(const std::string& path, bool binary = false) {
    std::ofstream out(path, binary ? std::ios::binary : std::ios::out);
    if (!out) throw std::runtime_error("cannot write " + path);
    return out;
}

} // namespace

std::string format_double(double v) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

std::uint64_t fnv1a(const std::string& s) {
    std::uint64_t h = 1469598103934665603ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    return h;
}

ErrorModel load_error_model_csv(const std::string& path) {
    auto in = open_in(path);
    std::string line;
    if (!std::getline(in, line)) throw std::runtime_error(path + ": empty file");
    auto header = split_csv_line(line);
    if (header.size() < 2 || header[0] != "g_siemens" || header[1] != "sigma_siemens")
        throw std::runtime_error(path + ": expected header g_siemens,sigma_siemens");

    std::vector<ErrorModel::Anchor> anchors;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        auto f = split_csv_line(line);
        if (f.size() < 2) throw std::runtime_error(path + ": malformed row '" + line + "'");
        anchors.push_back({parse_double(f[0], path), parse_double(f[1], path)});
    }
    try {
        return ErrorModel(std::move(anchors));
    } catch (const std::exception& e) {
        throw std::runtime_error(path + ": " + e.what());
    }
}

void save_error_model_csv(const std::string& path, const ErrorModel& model) {
    auto out = open_out(path);
    out << "g_siemens,sigma_siemens\n";
    for (const auto& a : model.anchors())
        out << format_double(a.g) << ',' << format_double(a.sigma) << '\n';
}

UpdateMap load_update_map_csv(const std::string& path, double significance_sigma_multiple) {
    auto in = open_in(path);
    std::string line;
    if (!std::getline(in, line)) throw std::runtime_error(path + ": empty file");
    auto header = split_csv_line(line);
    if (header.size() < 3 || header[0] != "v_volts" || header[1] != "t_seconds" ||
        header[2] != "delta_fraction")
        throw std::runtime_error(path + ": expected header v_volts,t_seconds,delta_fraction");

    std::map<std::pair<double, double>, double> cells;
    std::set<double> vs, ts;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        auto f = split_csv_line(line);
        if (f.size() < 3) throw std::runtime_error(path + ": malformed row '" + line + "'");
        const double v = parse_double(f[0], path);
        const double t = parse_double(f[1], path);
        const double d = parse_double(f[2], path);
        vs.insert(v);
        ts.insert(t);
        cells[{v, t}] = d;
    }
    if (cells.size() != vs.size() * ts.size())
        throw std::runtime_error(path + ": grid is not rectangular");

    std::vector<double> vg(vs.begin(), vs.end());
    std::vector<double> tg(ts.begin(), ts.end());
    std::vector<double> delta;
    delta.reserve(cells.size());
    for (double v : vg)
        for (double t : tg) delta.push_back(cells.at({v, t}));
    try {
        return UpdateMap(std::move(vg), std::move(tg), std::move(delta), significance_sigma_multiple);
    } catch (const std::exception& e) {
        throw std::runtime_error(path + ": " + e.what());
    }
}

void save_update_map_csv(const std::string& path, const UpdateMap& map) {
    auto out = open_out(path);
    out << "v_volts,t_seconds,delta_fraction\n";
    for (std::size_t vi = 0; vi < map.voltage_grid().size(); ++vi)
        for (std::size_t ti = 0; ti < map.duration_grid().size(); ++ti)
            out << format_double(map.voltage_grid()[vi]) << ','
                << format_double(map.duration_grid()[ti]) << ','
                << format_double(map.value(static_cast<int>(vi), static_cast<int>(ti))) << '\n';
}

Matrix load_matrix_csv(const std::string& path) {
    auto in = open_in(path);
    std::vector<std::vector<double>> rows;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        auto f = split_csv_line(line);
        std::vector<double> row;
        row.reserve(f.size());
        for (const auto& s : f) row.push_back(parse_double(s, path));
        if (!rows.empty() && row.size() != rows.front().size())
            throw std::runtime_error(path + ": ragged rows");
        rows.push_back(std::move(row));
    }
    if (rows.empty()) throw std::runtime_error(path + ": empty matrix");
    Matrix m(static_cast<int>(rows.size()), static_cast<int>(rows.front().size()));
    for (int i = 0; i < m.rows; ++i)
        for (int j = 0; j < m.cols; ++j) m(i, j) = rows[i][j];
    return m;
}

void save_matrix_csv(const std::string& path, const Matrix& m) {
    auto out = open_out(path);
    for (int i = 0; i < m.rows; ++i) {
        for (int j = 0; j < m.cols; ++j) {
            if (j) out << ',';
            out << format_double(m(i, j));
        }
        out << '\n';
    }
}

namespace {
constexpr char kMagic[8] = {'E', 'T', 'C', 'M', 'T', 'X', '0', '1'};
}

Matrix load_matrix_bin(const std::string& path) {
    auto in = open_in(path, true);
    char magic[8];
    std::uint32_t rows = 0, cols = 0;
    in.read(magic, 8);
    in.read(reinterpret_cast<char*>(&rows), 4);
    in.read(reinterpret_cast<char*>(&cols), 4);
    if (!in || std::memcmp(magic, kMagic, 8) != 0)
        throw std::runtime_error(path + ": not an ETCMTX01 container");
    Matrix m(static_cast<int>(rows), static_cast<int>(cols));
    in.read(reinterpret_cast<char*>(m.data.data()),
            static_cast<std::streamsize>(m.data.size() * sizeof(double)));
    if (!in) throw std::runtime_error(path + ": truncated matrix payload");
    return m;
}

void save_matrix_bin(const std::string& path, const Matrix& m) {
    auto out = open_out(path, true);
    out.write(kMagic, 8);
    const std::uint32_t rows = static_cast<std::uint32_t>(m.rows);
    const std::uint32_t cols = static_cast<std::uint32_t>(m.cols);
    out.write(reinterpret_cast<const char*>(&rows), 4);
    out.write(reinterpret_cast<const char*>(&cols), 4);
    out.write(reinterpret_cast<const char*>(m.data.data()),
              static_cast<std::streamsize>(m.data.size() * sizeof(double)));
}

Matrix load_matrix(const std::string& path) {
    if (path.size() >= 4 && path.substr(path.size() - 4) == ".bin") return load_matrix_bin(path);
    return load_matrix_csv(path);
}

double Trace::sample_rate() const {
    if (t.size() < 2) throw std::domain_error("trace too short to infer a sample rate");
    const double dt = t[1] - t[0];
    if (!(dt > 0.0)) throw std::domain_error("non-increasing trace timestamps");
    return 1.0 / dt;
}

Trace load_trace_csv(const std::string& path) {
    auto in = open_in(path);
    std::string line;
    if (!std::getline(in, line)) throw std::runtime_error(path + ": empty file");
    auto header = split_csv_line(line);
    if (header.size() < 2 || header[0] != "t_seconds" || header[1] != "current_amperes")
        throw std::runtime_error(path + ": expected header t_seconds,current_amperes");
    Trace tr;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        auto f = split_csv_line(line);
        if (f.size() < 2) throw std::runtime_error(path + ": malformed row '" + line + "'");
        tr.t.push_back(parse_double(f[0], path));
        tr.current.push_back(parse_double(f[1], path));
    }
    return tr;
}

std::vector<std::pair<double, double>> load_pairs_csv(const std::string& path,
                                                      const std::string& col_a,
                                                      const std::string& col_b) {
    auto in = open_in(path);
    std::string line;
    if (!std::getline(in, line)) throw std::runtime_error(path + ": empty file");
    auto header = split_csv_line(line);
    if (header.size() < 2 || header[0] != col_a || header[1] != col_b)
        throw std::runtime_error(path + ": expected header " + col_a + "," + col_b);
    std::vector<std::pair<double, double>> out;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        auto f = split_csv_line(line);
        if (f.size() < 2) throw std::runtime_error(path + ": malformed row '" + line + "'");
        out.emplace_back(parse_double(f[0], path), parse_double(f[1], path));
    }
    return out;
}

std::vector<std::pair<double, double>> load_tcr_csv(const std::string& path) {
    return load_pairs_csv(path, "temperature_k", "resistance_ohms");
}

NoiseSpectrum load_spectrum_csv(const std::string& path) {
    auto in = open_in(path);
    std::string line;
    if (!std::getline(in, line)) throw std::runtime_error(path + ": empty file");
    auto header = split_csv_line(line);
    if (header.size() < 2 || header[0] != "frequency_hz" || header[1] != "psd_per_hz")
        throw std::runtime_error(path + ": expected header frequency_hz,psd_per_hz");
    NoiseSpectrum sp;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        auto f = split_csv_line(line);
        if (f.size() < 2) throw std::runtime_error(path + ": malformed row '" + line + "'");
        sp.frequencies.push_back(parse_double(f[0], path));
        sp.psd.push_back(parse_double(f[1], path));
    }
    for (std::size_t i = 1; i < sp.frequencies.size(); ++i)
        if (!(sp.frequencies[i] > sp.frequencies[i - 1]))
            throw std::runtime_error(path + ": frequencies must be strictly ascending");
    sp.averages = 1;
    return sp;
}

} // namespace etcsim
