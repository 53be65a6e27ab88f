#ifndef ETCSIM_MATRIX_HPP
#define ETCSIM_MATRIX_HPP

#include <cstddef>
#include <stdexcept>
#include <vector>

namespace etcsim {

// Dense row-major matrix of doubles.
struct Matrix {
    int rows = 0;
    int cols = 0;
    std::vector<double> data;

    Matrix() = default;
    Matrix(int r, int c, double fill = 0.0)
        : rows(r), cols(c), data(static_cast<std::size_t>(r) * c, fill) {
        if (r < 0 || c < 0) throw std::invalid_argument("negative matrix dimension");
    }

    double& operator()(int i, int j) { return data[static_cast<std::size_t>(i) * cols + j]; }
    double operator()(int i, int j) const { return data[static_cast<std::size_t>(i) * cols + j]; }

    bool empty() const { return rows == 0 || cols == 0; }
};

} // namespace etcsim

#endif
