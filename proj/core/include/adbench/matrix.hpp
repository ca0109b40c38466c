#pragma once

#include <cstddef>
#include <initializer_list>
#include <span>
#include <vector>

namespace adbench {

/// Dense row-major matrix of doubles. Small and predictable; this is the only
/// numeric container the library uses.
class Matrix {
public:
    Matrix() = default;
    Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
        : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

    static Matrix from_rows(std::initializer_list<std::initializer_list<double>> rows);

    double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
    double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }
    bool empty() const { return data_.empty(); }

    std::span<double> row(std::size_t r) { return {data_.data() + r * cols_, cols_}; }
    std::span<const double> row(std::size_t r) const { return {data_.data() + r * cols_, cols_}; }

    std::vector<double>& data() { return data_; }
    const std::vector<double>& data() const { return data_; }

    bool all_finite() const;

    friend bool operator==(const Matrix& a, const Matrix& b) {
        return a.rows_ == b.rows_ && a.cols_ == b.cols_ && a.data_ == b.data_;
    }

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<double> data_;
};

/// C = A [n×k] * B [k×m]
Matrix matmul(const Matrix& a, const Matrix& b);
/// C = A [n×k] * B^T, B [m×k]
Matrix matmul_nt(const Matrix& a, const Matrix& b);
/// C = A^T * B, A [k×n], B [k×m]
Matrix matmul_tn(const Matrix& a, const Matrix& b);

Matrix transpose(const Matrix& a);

/// Adds `bias` (length = cols) to every row.
void add_row_inplace(Matrix& m, std::span<const double> bias);

/// Euclidean distance between two equal-length vectors.
double euclidean(std::span<const double> a, std::span<const double> b);
/// Squared Euclidean distance.
double squared_distance(std::span<const double> a, std::span<const double> b);

/// Matrix whose rows are the given subset of `src` rows.
Matrix take_rows(const Matrix& src, std::span<const std::size_t> indices);

}  // namespace adbench
