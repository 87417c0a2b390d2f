#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace sem
{

/// Small dense row-major matrix. Used for 1-D operators, element blocks and
/// the oracle paths; never for anything that grows with the mesh.
class Matrix
{
public:
    Matrix() = default;
    Matrix(std::size_t rows, std::size_t cols, double value = 0.0)
        : rows_(rows), cols_(cols), data_(rows * cols, value)
    {}

    static Matrix identity(std::size_t n);
    static Matrix diagonal(std::span<const double> d);

    [[nodiscard]] std::size_t rows() const noexcept { return rows_; }
    [[nodiscard]] std::size_t cols() const noexcept { return cols_; }

    double&       operator()(std::size_t i, std::size_t j) noexcept { return data_[i * cols_ + j]; }
    const double& operator()(std::size_t i, std::size_t j) const noexcept { return data_[i * cols_ + j]; }

    [[nodiscard]] std::span<double>       data() noexcept { return data_; }
    [[nodiscard]] std::span<const double> data() const noexcept { return data_; }
    [[nodiscard]] std::span<const double> row(std::size_t i) const noexcept
    {
        return std::span<const double>(data_).subspan(i * cols_, cols_);
    }

    [[nodiscard]] Matrix transpose() const;
    /// Sub-block with rows [r0, r0+nr) and columns [c0, c0+nc).
    [[nodiscard]] Matrix block(std::size_t r0, std::size_t c0, std::size_t nr, std::size_t nc) const;

private:
    std::size_t         rows_ = 0;
    std::size_t         cols_ = 0;
    std::vector<double> data_;
};

Matrix operator*(const Matrix& a, const Matrix& b);
Matrix operator+(const Matrix& a, const Matrix& b);
Matrix operator-(const Matrix& a, const Matrix& b);
Matrix operator*(double s, const Matrix& a);

std::vector<double> matvec(const Matrix& a, std::span<const double> x);

/// max |a_ij - b_ij|
double max_abs_diff(const Matrix& a, const Matrix& b);
double max_abs(const Matrix& a);

/// LU factorization with partial pivoting. Throws std::runtime_error on a
/// zero pivot.
class LuFactorization
{
public:
    explicit LuFactorization(Matrix a);

    void                 solve_in_place(std::span<double> b) const;
    [[nodiscard]] Matrix solve(const Matrix& b) const;
    [[nodiscard]] Matrix inverse() const;

private:
    Matrix                   lu_;
    std::vector<std::size_t> pivot_;
};

struct SymmetricEigen
{
    std::vector<double> values;  // ascending
    Matrix              vectors; // column k belongs to values[k]
};

/// Cyclic Jacobi rotations for a symmetric matrix. Sweeps until the
/// off-diagonal Frobenius norm drops below `tolerance` times the Frobenius
/// norm of the input.
SymmetricEigen symmetric_eigen(const Matrix& a, double tolerance = 1e-14, int max_sweeps = 100);

} // namespace sem
