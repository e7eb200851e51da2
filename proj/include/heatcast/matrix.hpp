#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace heatcast {

/// Dense row-major numeric matrix (observations x features).
class Matrix {
public:
    Matrix() = default;
    Matrix(std::size_t rows, std::size_t cols) : rows_(rows), cols_(cols), data_(rows * cols, 0.0) {}

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }

    double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }
    double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }

    std::span<const double> row(std::size_t r) const {
        return std::span<const double>(data_.data() + r * cols_, cols_);
    }
    std::span<double> row(std::size_t r) {
        return std::span<double>(data_.data() + r * cols_, cols_);
    }

    const std::vector<double>& data() const { return data_; }

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<double> data_;
};

}  // namespace heatcast
