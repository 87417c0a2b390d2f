#include "oracles.hpp"
#include "sem/basis.hpp"
#include "sem/tensor.hpp"

#include <doctest.h>

#include <random>

using namespace sem;

namespace
{

Matrix random_matrix(std::size_t r, std::size_t c, std::mt19937_64& rng)
{
    Matrix m(r, c);
    for (auto& v : m.data())
        v = std::uniform_real_distribution<double>(-1, 1)(rng);
    return m;
}

Field3 random_field(Dims3 d, std::mt19937_64& rng)
{
    Field3 f(d);
    for (auto& v : f.data())
        v = std::uniform_real_distribution<double>(-1, 1)(rng);
    return f;
}

double max_diff(const Field3& a, const oracle::Vec& b)
{
    double m = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i)
        m = std::max(m, std::abs(a.data()[i] - b(static_cast<Eigen::Index>(i))));
    return m;
}

} // namespace

TEST_CASE("Field3 layout runs direction 1 fastest")
{
    Field3 f({2, 3, 4});
    f(1, 2, 3) = 5.0;
    CHECK(f.data()[1 + 2 * 2 + 2 * 3 * 3] == 5.0);
    CHECK_THROWS_AS(Field3({2, 2, 2}, std::vector<double>(7)), std::invalid_argument);
}

TEST_CASE("apply_axis")
{
    std::mt19937_64 rng(3);
    const Field3    u = random_field({3, 4, 2}, rng);
    for (Axis ax : {Axis::x1, Axis::x2, Axis::x3})
    {
        const auto   n = u.dims()[static_cast<std::size_t>(ax)];
        const Field3 v = apply_axis(Matrix::identity(n), ax, u);
        CHECK(v.data()[5] == u.data()[5]);
        CHECK(max_diff(v, oracle::to_eigen(u.data())) == 0.0);
    }

    // dense (I (x) I (x) A) u on a 2x2x2 field
    const Matrix a  = random_matrix(2, 2, rng);
    const Field3 w  = random_field({2, 2, 2}, rng);
    const auto   I2 = oracle::Mat::Identity(2, 2);
    const oracle::Vec ref = oracle::kron3(I2, I2, oracle::to_eigen(a)) * oracle::to_eigen(w.data());
    CHECK(max_diff(apply_axis(a, Axis::x1, w), ref) < 1e-14);

    // disjoint axes commute
    const Matrix b  = random_matrix(5, 4, rng);
    const Matrix c  = random_matrix(2, 3, rng);
    const Field3 ab = apply_axis(c, Axis::x1, apply_axis(b, Axis::x2, u));
    const Field3 ba = apply_axis(b, Axis::x2, apply_axis(c, Axis::x1, u));
    REQUIRE(ab.dims() == Dims3{2, 5, 2});
    CHECK(max_diff(ab, oracle::to_eigen(ba.data())) < 1e-13);

    MulCounter cnt;
    apply_axis(b, Axis::x2, u, &cnt);
    CHECK(cnt.count == 5u * 4u * 3u * 2u);

    CHECK_THROWS_AS(apply_axis(b, Axis::x1, u), std::invalid_argument);
}

TEST_CASE("kron3_apply matches the dense Kronecker product")
{
    std::mt19937_64 rng(5);
    for (int trial = 0; trial < 100; ++trial)
    {
        std::uniform_int_distribution<std::size_t> dim(1, 4);
        const Dims3  in{dim(rng), dim(rng), dim(rng)};
        const Dims3  out{dim(rng), dim(rng), dim(rng)};
        const Matrix a1 = random_matrix(out[0], in[0], rng);
        const Matrix a2 = random_matrix(out[1], in[1], rng);
        const Matrix a3 = random_matrix(out[2], in[2], rng);
        const Field3 u  = random_field(in, rng);
        const oracle::Vec ref =
            oracle::kron3(oracle::to_eigen(a3), oracle::to_eigen(a2), oracle::to_eigen(a1)) * oracle::to_eigen(u.data());
        const Field3 v = kron3_apply(a3, a2, a1, u);
        REQUIRE(v.dims() == out);
        CHECK(max_diff(v, ref) <= 1e-12 * std::max(1.0, oracle::max_abs(ref)));

        if (in == out)
        {
            // (A3 (x) A2 (x) A1)^T u == kron3_apply with transposed factors
            const oracle::Vec reft = oracle::kron3(oracle::to_eigen(a3), oracle::to_eigen(a2), oracle::to_eigen(a1))
                                         .transpose() *
                                     oracle::to_eigen(u.data());
            const Field3 vt = kron3_apply(a3.transpose(), a2.transpose(), a1.transpose(), u);
            CHECK(max_diff(vt, reft) <= 1e-12 * std::max(1.0, oracle::max_abs(reft)));
        }
    }

    const Field3 u = random_field({3, 3, 3}, rng);
    const auto   I = Matrix::identity(3);
    CHECK(max_diff(kron3_apply(I, I, I, u), oracle::to_eigen(u.data())) == 0.0);
}

TEST_CASE("kron3_apply counts 3 n^4 multiplications")
{
    std::mt19937_64 rng(9);
    for (std::size_t n : {2u, 5u, 17u})
    {
        const Matrix a = random_matrix(n, n, rng);
        MulCounter   cnt;
        kron3_apply(a, a, a, Field3({n, n, n}), &cnt);
        CHECK(cnt.count == 3 * n * n * n * n);
        kron3_apply(a, a, a, Field3({n, n, n}), nullptr);
        CHECK(cnt.count == 3 * n * n * n * n);
    }
}

TEST_CASE("diag3_build")
{
    const std::vector<double> l{0.5, 2.0};
    const Field3              ones = diag3_build(l, l, l, {1, 0, 0, 0});
    for (double v : ones.data())
        CHECK(v == 1.0);

    const auto   eig = interior_eigendecomposition(build_basis(2));
    const Field3 six = diag3_build(eig.lambda, eig.lambda, eig.lambda, {0, 1, 1, 1});
    CHECK(six.data()[0] == doctest::Approx(6.0).epsilon(1e-14));

    // dense assembly d0 I + d1 I(x)I(x)L1 + d2 I(x)L2(x)I + d3 L3(x)I(x)I
    std::mt19937_64           rng(2);
    const std::vector<double> l1{1.0, 3.0}, l2{0.5, 2.5}, l3{4.0, 0.25};
    const std::array<double, 4> d{0.3, 1.1, 0.7, 2.0};
    const oracle::Mat L1 = oracle::to_eigen(Matrix::diagonal(l1));
    const oracle::Mat L2 = oracle::to_eigen(Matrix::diagonal(l2));
    const oracle::Mat L3 = oracle::to_eigen(Matrix::diagonal(l3));
    const auto        I  = oracle::Mat::Identity(2, 2);
    const oracle::Mat D  = d[0] * oracle::kron3(I, I, I) + d[1] * oracle::kron3(I, I, L1) +
                          d[2] * oracle::kron3(I, L2, I) + d[3] * oracle::kron3(L3, I, I);
    const Field3 got = diag3_build(l1, l2, l3, d);
    CHECK(max_diff(got, D.diagonal()) < 1e-14);

    CHECK_THROWS_AS(diag3_build(l, l, l, {-10, 1, 1, 1}), std::domain_error);
}
