#pragma once

#include "sem/dense.hpp"

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace sem
{

/// Coordinate direction. Direction 1 (x1) is the fastest running index.
enum class Axis : int
{
    x1 = 0,
    x2 = 1,
    x3 = 2,
};

using Dims3 = std::array<std::size_t, 3>;

[[nodiscard]] constexpr std::size_t volume(const Dims3& d) noexcept { return d[0] * d[1] * d[2]; }

/// Multiplication tally. Passing nullptr wherever a counter is accepted
/// disables counting.
struct MulCounter
{
    std::uint64_t count = 0;

    void add(std::uint64_t n) noexcept { count += n; }
};

inline void tally(MulCounter* c, std::uint64_t n) noexcept
{
    if (c)
        c->add(n);
}

/// Rank-3 nodal field, entry (i1, i2, i3) stored at i1 + n1*i2 + n1*n2*i3.
class Field3
{
public:
    Field3() = default;
    explicit Field3(Dims3 dims, double value = 0.0) : dims_(dims), data_(volume(dims), value) {}
    Field3(Dims3 dims, std::vector<double> data);

    [[nodiscard]] const Dims3& dims() const noexcept { return dims_; }
    [[nodiscard]] std::size_t  size() const noexcept { return data_.size(); }

    double& operator()(std::size_t i1, std::size_t i2, std::size_t i3) noexcept
    {
        return data_[i1 + dims_[0] * (i2 + dims_[1] * i3)];
    }
    const double& operator()(std::size_t i1, std::size_t i2, std::size_t i3) const noexcept
    {
        return data_[i1 + dims_[0] * (i2 + dims_[1] * i3)];
    }

    [[nodiscard]] std::span<double>       data() noexcept { return data_; }
    [[nodiscard]] std::span<const double> data() const noexcept { return data_; }

private:
    Dims3               dims_{0, 0, 0};
    std::vector<double> data_;
};

/// Contracts `a` (n_out x n_in) against `axis` of `in` (dims `in_dims`,
/// in_dims[axis] == n_in). `out` receives dims with n_in replaced by n_out.
/// Adds n_out*n_in*(product of the other dims) to the counter.
void apply_axis(const Matrix& a, Axis axis, std::span<const double> in, const Dims3& in_dims, std::span<double> out,
                bool accumulate, MulCounter* counter);

Field3 apply_axis(const Matrix& a, Axis axis, const Field3& u, MulCounter* counter = nullptr);

/// (a3 (x) a2 (x) a1) u, the rightmost factor acting along x1. Applied as
/// three sweeps in the order x1, x2, x3.
Field3 kron3_apply(const Matrix& a3, const Matrix& a2, const Matrix& a1, const Field3& u,
                   MulCounter* counter = nullptr);

/// Diagonal of d0 I(x)I(x)I + d1 I(x)I(x)L1 + d2 I(x)L2(x)I + d3 L3(x)I(x)I:
/// entry (i, j, k) = d0 + d1*l1[i] + d2*l2[j] + d3*l3[k].
/// Throws std::domain_error if any entry is not strictly positive.
Field3 diag3_build(std::span<const double> l1, std::span<const double> l2, std::span<const double> l3,
                   const std::array<double, 4>& d);

} // namespace sem
