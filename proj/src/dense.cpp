#include "sem/dense.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace sem
{

Matrix Matrix::identity(std::size_t n)
{
    Matrix m(n, n);
    for (std::size_t i = 0; i < n; ++i)
        m(i, i) = 1.0;
    return m;
}

Matrix Matrix::diagonal(std::span<const double> d)
{
    Matrix m(d.size(), d.size());
    for (std::size_t i = 0; i < d.size(); ++i)
        m(i, i) = d[i];
    return m;
}

Matrix Matrix::transpose() const
{
    Matrix t(cols_, rows_);
    for (std::size_t i = 0; i < rows_; ++i)
        for (std::size_t j = 0; j < cols_; ++j)
            t(j, i) = (*this)(i, j);
    return t;
}

Matrix Matrix::block(std::size_t r0, std::size_t c0, std::size_t nr, std::size_t nc) const
{
    if (r0 + nr > rows_ || c0 + nc > cols_)
        throw std::out_of_range("Matrix::block: range exceeds matrix");
    Matrix b(nr, nc);
    for (std::size_t i = 0; i < nr; ++i)
        for (std::size_t j = 0; j < nc; ++j)
            b(i, j) = (*this)(r0 + i, c0 + j);
    return b;
}

Matrix operator*(const Matrix& a, const Matrix& b)
{
    if (a.cols() != b.rows())
        throw std::invalid_argument("Matrix product: inner dimensions differ");
    Matrix c(a.rows(), b.cols());
    for (std::size_t i = 0; i < a.rows(); ++i)
        for (std::size_t k = 0; k < a.cols(); ++k)
        {
            const double aik = a(i, k);
            if (aik == 0.0)
                continue;
            for (std::size_t j = 0; j < b.cols(); ++j)
                c(i, j) += aik * b(k, j);
        }
    return c;
}

namespace
{
void require_same_shape(const Matrix& a, const Matrix& b)
{
    if (a.rows() != b.rows() || a.cols() != b.cols())
        throw std::invalid_argument("Matrix shapes differ");
}
} // namespace

Matrix operator+(const Matrix& a, const Matrix& b)
{
    require_same_shape(a, b);
    Matrix c = a;
    auto   cd = c.data();
    auto   bd = b.data();
    for (std::size_t i = 0; i < cd.size(); ++i)
        cd[i] += bd[i];
    return c;
}

Matrix operator-(const Matrix& a, const Matrix& b)
{
    require_same_shape(a, b);
    Matrix c = a;
    auto   cd = c.data();
    auto   bd = b.data();
    for (std::size_t i = 0; i < cd.size(); ++i)
        cd[i] -= bd[i];
    return c;
}

Matrix operator*(double s, const Matrix& a)
{
    Matrix c = a;
    for (auto& v : c.data())
        v *= s;
    return c;
}

std::vector<double> matvec(const Matrix& a, std::span<const double> x)
{
    if (a.cols() != x.size())
        throw std::invalid_argument("matvec: dimension mismatch");
    std::vector<double> y(a.rows(), 0.0);
    for (std::size_t i = 0; i < a.rows(); ++i)
    {
        const auto r = a.row(i);
        y[i]         = std::inner_product(r.begin(), r.end(), x.begin(), 0.0);
    }
    return y;
}

double max_abs_diff(const Matrix& a, const Matrix& b)
{
    require_same_shape(a, b);
    double m  = 0.0;
    auto   ad = a.data();
    auto   bd = b.data();
    for (std::size_t i = 0; i < ad.size(); ++i)
        m = std::max(m, std::abs(ad[i] - bd[i]));
    return m;
}

double max_abs(const Matrix& a)
{
    double m = 0.0;
    for (double v : a.data())
        m = std::max(m, std::abs(v));
    return m;
}

LuFactorization::LuFactorization(Matrix a) : lu_(std::move(a)), pivot_(lu_.rows())
{
    const std::size_t n = lu_.rows();
    if (lu_.cols() != n)
        throw std::invalid_argument("LuFactorization: matrix not square");
    std::iota(pivot_.begin(), pivot_.end(), std::size_t{0});
    for (std::size_t k = 0; k < n; ++k)
    {
        std::size_t piv  = k;
        double      best = std::abs(lu_(k, k));
        for (std::size_t i = k + 1; i < n; ++i)
            if (std::abs(lu_(i, k)) > best)
            {
                best = std::abs(lu_(i, k));
                piv  = i;
            }
        if (best == 0.0)
            throw std::runtime_error("LuFactorization: singular matrix");
        if (piv != k)
        {
            for (std::size_t j = 0; j < n; ++j)
                std::swap(lu_(k, j), lu_(piv, j));
            std::swap(pivot_[k], pivot_[piv]);
        }
        const double inv = 1.0 / lu_(k, k);
        for (std::size_t i = k + 1; i < n; ++i)
        {
            const double l = lu_(i, k) * inv;
            lu_(i, k)      = l;
            if (l == 0.0)
                continue;
            for (std::size_t j = k + 1; j < n; ++j)
                lu_(i, j) -= l * lu_(k, j);
        }
    }
}

void LuFactorization::solve_in_place(std::span<double> b) const
{
    const std::size_t n = lu_.rows();
    if (b.size() != n)
        throw std::invalid_argument("LuFactorization::solve: size mismatch");
    std::vector<double> x(n);
    for (std::size_t i = 0; i < n; ++i)
        x[i] = b[pivot_[i]];
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < i; ++j)
            x[i] -= lu_(i, j) * x[j];
    for (std::size_t i = n; i-- > 0;)
    {
        for (std::size_t j = i + 1; j < n; ++j)
            x[i] -= lu_(i, j) * x[j];
        x[i] /= lu_(i, i);
    }
    std::copy(x.begin(), x.end(), b.begin());
}

Matrix LuFactorization::solve(const Matrix& b) const
{
    const std::size_t   n = lu_.rows();
    Matrix              x(n, b.cols());
    std::vector<double> col(n);
    for (std::size_t j = 0; j < b.cols(); ++j)
    {
        for (std::size_t i = 0; i < n; ++i)
            col[i] = b(i, j);
        solve_in_place(col);
        for (std::size_t i = 0; i < n; ++i)
            x(i, j) = col[i];
    }
    return x;
}

Matrix LuFactorization::inverse() const
{
    return solve(Matrix::identity(lu_.rows()));
}

SymmetricEigen symmetric_eigen(const Matrix& input, double tolerance, int max_sweeps)
{
    const std::size_t n = input.rows();
    if (input.cols() != n)
        throw std::invalid_argument("symmetric_eigen: matrix not square");

    Matrix a = input;
    Matrix v = Matrix::identity(n);

    double frob = 0.0;
    for (double x : a.data())
        frob += x * x;
    frob = std::sqrt(frob);

    auto off_norm = [&] {
        double s = 0.0;
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < n; ++j)
                if (i != j)
                    s += a(i, j) * a(i, j);
        return std::sqrt(s);
    };

    int sweep = 0;
    while (off_norm() > tolerance * frob)
    {
        if (++sweep > max_sweeps)
            throw std::runtime_error("symmetric_eigen: Jacobi sweeps did not converge");
        for (std::size_t p = 0; p + 1 < n; ++p)
            for (std::size_t q = p + 1; q < n; ++q)
            {
                const double apq = a(p, q);
                if (apq == 0.0)
                    continue;
                const double theta = (a(q, q) - a(p, p)) / (2.0 * apq);
                const double t     = std::copysign(1.0, theta) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
                const double c     = 1.0 / std::sqrt(t * t + 1.0);
                const double s     = t * c;
                for (std::size_t k = 0; k < n; ++k)
                {
                    const double akp = a(k, p);
                    const double akq = a(k, q);
                    a(k, p)          = c * akp - s * akq;
                    a(k, q)          = s * akp + c * akq;
                }
                for (std::size_t k = 0; k < n; ++k)
                {
                    const double apk = a(p, k);
                    const double aqk = a(q, k);
                    a(p, k)          = c * apk - s * aqk;
                    a(q, k)          = s * apk + c * aqk;
                }
                for (std::size_t k = 0; k < n; ++k)
                {
                    const double vkp = v(k, p);
                    const double vkq = v(k, q);
                    v(k, p)          = c * vkp - s * vkq;
                    v(k, q)          = s * vkp + c * vkq;
                }
            }
    }

    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) { return a(x, x) < a(y, y); });

    SymmetricEigen out{std::vector<double>(n), Matrix(n, n)};
    for (std::size_t k = 0; k < n; ++k)
    {
        out.values[k] = a(order[k], order[k]);
        for (std::size_t i = 0; i < n; ++i)
            out.vectors(i, k) = v(i, order[k]);
    }
    return out;
}

} // namespace sem
