#include "oracles.hpp"
#include "sem/basis.hpp"

#include <doctest.h>

#include <cmath>
#include <random>

using namespace sem;

namespace
{

double rel_diff(const oracle::Mat& a, const oracle::Mat& b)
{
    return (a - b).cwiseAbs().maxCoeff() / std::max(1.0, b.cwiseAbs().maxCoeff());
}

} // namespace

TEST_CASE("dense LU and Jacobi agree with Eigen")
{
    std::mt19937_64 rng(7);
    for (std::size_t n : {1u, 3u, 7u, 12u})
    {
        Matrix a(n, n);
        for (auto& v : a.data())
            v = std::uniform_real_distribution<double>(-1, 1)(rng);
        for (std::size_t i = 0; i < n; ++i)
            a(i, i) += 4.0;
        const auto inv = LuFactorization(a).inverse();
        CHECK(rel_diff(oracle::to_eigen(inv), oracle::to_eigen(a).inverse()) < 1e-12);

        const Matrix sym = a + a.transpose();
        const auto   eig = symmetric_eigen(sym);
        const Eigen::SelfAdjointEigenSolver<oracle::Mat> es(oracle::to_eigen(sym));
        for (std::size_t k = 0; k < n; ++k)
            CHECK(eig.values[k] == doctest::Approx(es.eigenvalues()(static_cast<Eigen::Index>(k))).epsilon(1e-12));
    }
    CHECK_THROWS_AS(LuFactorization(Matrix(2, 2)), std::runtime_error);
}

TEST_CASE("gll_rule small degrees")
{
    const auto r1 = gll_rule(1);
    CHECK(r1.nodes == std::vector<double>{-1.0, 1.0});
    CHECK(r1.weights[0] == doctest::Approx(1.0));
    CHECK(r1.weights[1] == doctest::Approx(1.0));

    // p = 2: weights from the exactness conditions on 1, x, x^2 at (-1, 0, 1)
    const auto r2 = gll_rule(2);
    CHECK(r2.nodes[0] == -1.0);
    CHECK(r2.nodes[1] == doctest::Approx(0.0).epsilon(1e-15));
    CHECK(r2.nodes[2] == 1.0);
    oracle::Mat v(3, 3);
    oracle::Vec m(3);
    for (int k = 0; k < 3; ++k)
    {
        for (int i = 0; i < 3; ++i)
            v(k, i) = std::pow(r2.nodes[static_cast<std::size_t>(i)], k);
        m(k) = (k % 2 == 0) ? 2.0 / (k + 1) : 0.0;
    }
    const oracle::Vec w = v.fullPivLu().solve(m);
    for (int i = 0; i < 3; ++i)
        CHECK(r2.weights[static_cast<std::size_t>(i)] == doctest::Approx(w(i)).epsilon(1e-14));
    CHECK(r2.weights[1] == doctest::Approx(4.0 / 3.0));

    CHECK_THROWS_AS(gll_rule(0), std::invalid_argument);
}

TEST_CASE("gll nodes are the roots of (1 - x^2) L_p'")
{
    for (int p = 2; p <= 32; ++p)
    {
        const auto r = gll_rule(p);
        for (std::size_t j = 1; j < r.nodes.size() - 1; ++j)
        {
            // (1 - x^2) L_p'(x) = p (L_{p-1}(x) - x L_p(x))
            const double x = r.nodes[j];
            const double f = std::legendre(static_cast<unsigned>(p - 1), x) - x * std::legendre(static_cast<unsigned>(p), x);
            CHECK(std::abs(f) < 1e-13);
        }
    }
}

TEST_CASE("gll invariants for p in 2..16")
{
    for (int p = 2; p <= 16; ++p)
    {
        const auto r = gll_rule(p);
        REQUIRE(r.nodes.size() == static_cast<std::size_t>(p + 1));
        CHECK(r.nodes.front() == -1.0);
        CHECK(r.nodes.back() == 1.0);
        double sum = 0.0;
        for (std::size_t j = 0; j <= static_cast<std::size_t>(p); ++j)
        {
            sum += r.weights[j];
            CHECK(r.weights[j] > 0.0);
            CHECK(r.nodes[j] == doctest::Approx(-r.nodes[static_cast<std::size_t>(p) - j]).epsilon(1e-15));
            if (j > 0)
                CHECK(r.nodes[j] > r.nodes[j - 1]);
        }
        CHECK(sum == doctest::Approx(2.0).epsilon(1e-13));
    }
}

TEST_CASE("gll quadrature is exact up to degree 2p-1")
{
    std::mt19937_64                        rng(11);
    std::uniform_real_distribution<double> dist(-1, 1);
    for (int p = 2; p <= 32; ++p)
    {
        const auto r = gll_rule(p);
        for (int trial = 0; trial < 5; ++trial)
        {
            const int           deg = 2 * p - 1;
            std::vector<double> c(static_cast<std::size_t>(deg) + 1);
            for (auto& x : c)
                x = dist(rng);
            double exact = 0.0, scale = 0.0;
            for (int k = 0; k <= deg; k += 2)
                exact += c[static_cast<std::size_t>(k)] * 2.0 / (k + 1);
            double quad = 0.0;
            for (std::size_t j = 0; j < r.nodes.size(); ++j)
            {
                double v = 0.0;
                for (int k = deg; k >= 0; --k)
                    v = v * r.nodes[j] + c[static_cast<std::size_t>(k)];
                quad += r.weights[j] * v;
                scale += r.weights[j] * std::abs(v);
            }
            CHECK(std::abs(quad - exact) <= 1e-12 * std::max(1.0, scale));
        }
    }
}

TEST_CASE("build_basis matrices")
{
    const auto b1 = build_basis(1);
    CHECK(b1.stiffness(0, 0) == doctest::Approx(0.5));
    CHECK(b1.stiffness(0, 1) == doctest::Approx(-0.5));
    CHECK(b1.stiffness(1, 1) == doctest::Approx(0.5));

    const auto b2 = build_basis(2);
    CHECK(b2.stiffness(1, 1) == doctest::Approx(8.0 / 3.0).epsilon(1e-14));

    for (int p = 1; p <= 16; ++p)
    {
        const auto b = build_basis(p);
        const auto n = static_cast<std::size_t>(p) + 1;
        CHECK(b.mass == b.weights);
        double kmax = 0.0;
        for (double v : b.stiffness.data())
            kmax = std::max(kmax, std::abs(v));
        for (std::size_t i = 0; i < n; ++i)
        {
            double row = 0.0;
            for (std::size_t j = 0; j < n; ++j)
            {
                row += b.stiffness(i, j);
                CHECK(b.stiffness(i, j) == doctest::Approx(b.stiffness(j, i)).epsilon(1e-13));
            }
            CHECK(std::abs(row) <= 1e-12 * kmax);
        }
        // differentiation is exact on polynomials of degree p
        for (std::size_t i = 0; i < n; ++i)
        {
            double d = 0.0;
            for (std::size_t j = 0; j < n; ++j)
                d += b.derivative(i, j) * std::pow(b.nodes[j], p);
            CHECK(d == doctest::Approx(p * std::pow(b.nodes[i], p - 1)).epsilon(1e-10));
        }
    }
}

TEST_CASE("stiffness matches exact integration of the Lagrange basis")
{
    for (int p = 1; p <= 8; ++p)
    {
        const auto b = build_basis(p);
        CHECK(rel_diff(oracle::to_eigen(b.stiffness), oracle::exact_stiffness(b.nodes)) < 1e-9);
    }
}

TEST_CASE("interior eigendecomposition")
{
    const auto b2 = build_basis(2);
    const auto e2 = interior_eigendecomposition(b2);
    CHECK(e2.lambda[0] == doctest::Approx(2.0).epsilon(1e-14));
    CHECK(e2.transform(0, 0) == doctest::Approx(std::sqrt(3.0) / 2.0).epsilon(1e-14));

    CHECK_THROWS_AS(interior_eigendecomposition(build_basis(1)), std::invalid_argument);

    for (int p = 2; p <= 32; ++p)
    {
        const auto b  = build_basis(p);
        const auto e  = interior_eigendecomposition(b);
        const auto ni = static_cast<std::size_t>(p - 1);
        oracle::Mat mii = oracle::Mat::Zero(static_cast<Eigen::Index>(ni), static_cast<Eigen::Index>(ni));
        oracle::Mat kii(static_cast<Eigen::Index>(ni), static_cast<Eigen::Index>(ni));
        for (std::size_t i = 0; i < ni; ++i)
        {
            mii(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(i)) = b.mass[i + 1];
            for (std::size_t j = 0; j < ni; ++j)
                kii(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = b.stiffness(i + 1, j + 1);
        }
        const oracle::Mat s   = oracle::to_eigen(e.transform);
        const oracle::Mat lam = oracle::to_eigen(Matrix::diagonal(e.lambda));
        CHECK(rel_diff(s * mii * s.transpose(), oracle::Mat::Identity(mii.rows(), mii.cols())) < 1e-11);
        CHECK(rel_diff(s * kii * s.transpose(), lam) < 1e-11);
        CHECK(rel_diff(oracle::to_eigen(e.inverse), s.inverse()) < 1e-11);
        CHECK(rel_diff(oracle::to_eigen(e.inverse), mii * s.transpose()) < 1e-11);

        const Eigen::GeneralizedSelfAdjointEigenSolver<oracle::Mat> ges(kii, mii);
        for (std::size_t k = 0; k < ni; ++k)
        {
            CHECK(e.lambda[k] > 0.0);
            if (k > 0)
                CHECK(e.lambda[k] >= e.lambda[k - 1]);
            CHECK(e.lambda[k] ==
                  doctest::Approx(ges.eigenvalues()(static_cast<Eigen::Index>(k))).epsilon(1e-10));
            // sign convention: the largest-magnitude entry of each row is positive
            double best = 0.0;
            for (std::size_t j = 0; j < ni; ++j)
                if (std::abs(e.transform(k, j)) > std::abs(best) * (1.0 + 1e-10))
                    best = e.transform(k, j);
            CHECK(best > 0.0);
        }
        if (p == 8)
        {
            const oracle::Mat sinv = oracle::to_eigen(e.inverse);
            CHECK(rel_diff(sinv * lam * sinv.transpose(), kii) < 1e-10);
        }
    }
}

TEST_CASE("transformed matrices")
{
    const auto t2 = transformed_matrices(build_basis(2), interior_eigendecomposition(build_basis(2)));
    CHECK(t2.stiffness(1, 1) == doctest::Approx(2.0).epsilon(1e-14));

    for (int p = 2; p <= 16; ++p)
    {
        const auto b  = build_basis(p);
        const auto e  = interior_eigendecomposition(b);
        const auto t  = transformed_matrices(b, e);
        const auto n  = static_cast<std::size_t>(p) + 1;
        const auto pp = n - 1;

        CHECK(t.mass[0] == b.mass[0]);
        CHECK(t.mass[pp] == b.mass[pp]);
        for (std::size_t i = 1; i < pp; ++i)
        {
            CHECK(t.mass[i] == 1.0);
            for (std::size_t j = 1; j < pp; ++j)
                CHECK(t.stiffness(i, j) == (i == j ? e.lambda[i - 1] : 0.0));
        }
        for (std::size_t a : {std::size_t{0}, pp})
            for (std::size_t c : {std::size_t{0}, pp})
                CHECK(t.stiffness(a, c) == b.stiffness(a, c));

        const oracle::Mat s  = oracle::to_eigen(t.padded);
        const oracle::Mat mt = s * oracle::to_eigen(Matrix::diagonal(b.mass)) * s.transpose();
        const oracle::Mat kt = s * oracle::to_eigen(b.stiffness) * s.transpose();
        CHECK(rel_diff(oracle::to_eigen(Matrix::diagonal(t.mass)), mt) < 1e-11);
        CHECK(rel_diff(oracle::to_eigen(t.stiffness), kt) < 1e-11);
    }
}
