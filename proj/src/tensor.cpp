#include "sem/tensor.hpp"

#include <stdexcept>

namespace sem
{

Field3::Field3(Dims3 dims, std::vector<double> data) : dims_(dims), data_(std::move(data))
{
    if (data_.size() != volume(dims_))
        throw std::invalid_argument("Field3: data length does not match dims");
}

void apply_axis(const Matrix& a, Axis axis, std::span<const double> in, const Dims3& in_dims, std::span<double> out,
                bool accumulate, MulCounter* counter)
{
    const auto ax   = static_cast<std::size_t>(axis);
    const auto nin  = a.cols();
    const auto nout = a.rows();
    if (in_dims[ax] != nin)
        throw std::invalid_argument("apply_axis: matrix columns do not match field extent");
    Dims3 out_dims = in_dims;
    out_dims[ax]   = nout;
    if (in.size() != volume(in_dims) || out.size() != volume(out_dims))
        throw std::invalid_argument("apply_axis: buffer sizes do not match dims");

    const std::size_t n1 = in_dims[0];
    const std::size_t n2 = in_dims[1];
    const std::size_t n3 = in_dims[2];
    const double*     A  = a.data().data();
    const double*     x  = in.data();
    double*           y  = out.data();

    if (!accumulate)
        std::fill(out.begin(), out.end(), 0.0);

    switch (axis)
    {
    case Axis::x1:
        for (std::size_t jk = 0; jk < n2 * n3; ++jk)
        {
            const double* xs = x + jk * nin;
            double*       ys = y + jk * nout;
            for (std::size_t r = 0; r < nout; ++r)
            {
                const double* ar = A + r * nin;
                double        s  = 0.0;
                for (std::size_t l = 0; l < nin; ++l)
                    s += ar[l] * xs[l];
                ys[r] += s;
            }
        }
        break;
    case Axis::x2:
        for (std::size_t k = 0; k < n3; ++k)
        {
            const double* xs = x + k * n1 * nin;
            double*       ys = y + k * n1 * nout;
            for (std::size_t r = 0; r < nout; ++r)
            {
                double* yr = ys + r * n1;
                for (std::size_t l = 0; l < nin; ++l)
                {
                    const double  arl = A[r * nin + l];
                    const double* xl  = xs + l * n1;
                    for (std::size_t i = 0; i < n1; ++i)
                        yr[i] += arl * xl[i];
                }
            }
        }
        break;
    case Axis::x3: {
        const std::size_t plane = n1 * n2;
        for (std::size_t r = 0; r < nout; ++r)
        {
            double* yr = y + r * plane;
            for (std::size_t l = 0; l < nin; ++l)
            {
                const double  arl = A[r * nin + l];
                const double* xl  = x + l * plane;
                for (std::size_t i = 0; i < plane; ++i)
                    yr[i] += arl * xl[i];
            }
        }
        break;
    }
    }
    tally(counter, static_cast<std::uint64_t>(nout * nin) * (volume(in_dims) / nin));
}

Field3 apply_axis(const Matrix& a, Axis axis, const Field3& u, MulCounter* counter)
{
    Dims3 out_dims                       = u.dims();
    out_dims[static_cast<std::size_t>(axis)] = a.rows();
    if (u.dims()[static_cast<std::size_t>(axis)] != a.cols())
        throw std::invalid_argument("apply_axis: matrix columns do not match field extent");
    Field3 out(out_dims);
    apply_axis(a, axis, u.data(), u.dims(), out.data(), false, counter);
    return out;
}

Field3 kron3_apply(const Matrix& a3, const Matrix& a2, const Matrix& a1, const Field3& u, MulCounter* counter)
{
    auto t = apply_axis(a1, Axis::x1, u, counter);
    t      = apply_axis(a2, Axis::x2, t, counter);
    return apply_axis(a3, Axis::x3, t, counter);
}

Field3 diag3_build(std::span<const double> l1, std::span<const double> l2, std::span<const double> l3,
                   const std::array<double, 4>& d)
{
    Field3 out({l1.size(), l2.size(), l3.size()});
    for (std::size_t k = 0; k < l3.size(); ++k)
        for (std::size_t j = 0; j < l2.size(); ++j)
            for (std::size_t i = 0; i < l1.size(); ++i)
            {
                const double v = d[0] + d[1] * l1[i] + d[2] * l2[j] + d[3] * l3[k];
                if (!(v > 0.0))
                    throw std::domain_error("diag3_build: non-positive eigenspace diagonal entry");
                out(i, j, k) = v;
            }
    return out;
}

} // namespace sem
