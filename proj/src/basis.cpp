#include "sem/basis.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

namespace sem
{

namespace
{

struct LegendrePair
{
    double value; // L_p(x)
    double prev;  // L_{p-1}(x)
};

LegendrePair legendre(int p, double x)
{
    double l0 = 1.0;
    double l1 = x;
    for (int k = 2; k <= p; ++k)
    {
        const double l2 = ((2.0 * k - 1.0) * x * l1 - (k - 1.0) * l0) / k;
        l0              = l1;
        l1              = l2;
    }
    return {l1, l0};
}

} // namespace

GllRule gll_rule(int p)
{
    if (p < 1)
        throw std::invalid_argument("gll_rule: degree must be >= 1, got " + std::to_string(p));

    const auto n = static_cast<std::size_t>(p) + 1;
    GllRule    rule{std::vector<double>(n), std::vector<double>(n)};
    rule.nodes.front() = -1.0;
    rule.nodes.back()  = 1.0;

    // Newton on q(x) = (1 - x^2) L_p'(x) = p (L_{p-1} - x L_p), q'(x) = -p (p+1) L_p.
    for (int j = 1; j < p; ++j)
    {
        double x = -std::cos(std::numbers::pi * j / p);
        for (int it = 0; it < 100; ++it)
        {
            const auto   l  = legendre(p, x);
            const double dx = (l.prev - x * l.value) / ((p + 1.0) * l.value);
            x += dx;
            if (std::abs(dx) < 1e-15)
                break;
        }
        rule.nodes[static_cast<std::size_t>(j)] = x;
    }
    for (std::size_t j = 0; j < n / 2; ++j)
    {
        const double s         = 0.5 * (rule.nodes[n - 1 - j] - rule.nodes[j]);
        rule.nodes[j]          = -s;
        rule.nodes[n - 1 - j]  = s;
    }
    if (n % 2 == 1)
        rule.nodes[n / 2] = 0.0;

    for (std::size_t j = 0; j < n; ++j)
    {
        const double lp = legendre(p, rule.nodes[j]).value;
        rule.weights[j] = 2.0 / (p * (p + 1.0) * lp * lp);
    }
    return rule;
}

Basis1D build_basis(int p)
{
    auto rule = gll_rule(p);

    Basis1D b;
    b.p       = p;
    b.nodes   = std::move(rule.nodes);
    b.weights = std::move(rule.weights);
    b.mass    = b.weights;

    const std::size_t   n = b.nodes.size();
    std::vector<double> bary(n, 1.0);
    for (std::size_t j = 0; j < n; ++j)
        for (std::size_t k = 0; k < n; ++k)
            if (k != j)
                bary[j] /= (b.nodes[j] - b.nodes[k]);

    b.derivative = Matrix(n, n);
    for (std::size_t i = 0; i < n; ++i)
    {
        double diag = 0.0;
        for (std::size_t j = 0; j < n; ++j)
        {
            if (i == j)
                continue;
            const double dij    = (bary[j] / bary[i]) / (b.nodes[i] - b.nodes[j]);
            b.derivative(i, j)  = dij;
            diag               -= dij;
        }
        b.derivative(i, i) = diag;
    }

    // K = D^T M D, exact since the integrand has degree 2p-2.
    b.stiffness = Matrix(n, n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i; j < n; ++j)
        {
            double s = 0.0;
            for (std::size_t q = 0; q < n; ++q)
                s += b.derivative(q, i) * b.weights[q] * b.derivative(q, j);
            b.stiffness(i, j) = s;
            b.stiffness(j, i) = s;
        }
    return b;
}

InteriorEigen interior_eigendecomposition(const Basis1D& basis)
{
    const int p = basis.p;
    if (p < 2)
        throw std::invalid_argument("interior_eigendecomposition: degree must be >= 2");
    const auto ni = static_cast<std::size_t>(p - 1);

    std::vector<double> w(ni);
    for (std::size_t i = 0; i < ni; ++i)
    {
        const double m = basis.mass[i + 1];
        if (!(m > 0.0))
            throw std::runtime_error("interior_eigendecomposition: non-positive interior mass entry");
        w[i] = 1.0 / std::sqrt(m);
    }

    Matrix a(ni, ni);
    for (std::size_t i = 0; i < ni; ++i)
        for (std::size_t j = 0; j < ni; ++j)
            a(i, j) = w[i] * basis.stiffness(i + 1, j + 1) * w[j];

    const auto es = symmetric_eigen(a, 1e-14);

    InteriorEigen out{Matrix(ni, ni), Matrix(ni, ni), es.values};
    for (std::size_t k = 0; k < ni; ++k)
    {
        // S row k = q_k^T W; fix the sign so the first largest-magnitude entry is positive.
        double      best = 0.0;
        std::size_t at   = 0;
        for (std::size_t i = 0; i < ni; ++i)
        {
            const double v = std::abs(es.vectors(i, k) * w[i]);
            if (v > best * (1.0 + 1e-10))
            {
                best = v;
                at   = i;
            }
        }
        const double sign = es.vectors(at, k) < 0.0 ? -1.0 : 1.0;
        for (std::size_t i = 0; i < ni; ++i)
            out.transform(k, i) = sign * es.vectors(i, k) * w[i];
    }
    for (std::size_t i = 0; i < ni; ++i)
        for (std::size_t k = 0; k < ni; ++k)
            out.inverse(i, k) = basis.mass[i + 1] * out.transform(k, i);
    return out;
}

TransformedBasis1D transformed_matrices(const Basis1D& basis, const InteriorEigen& eig)
{
    const auto n  = static_cast<std::size_t>(basis.p) + 1;
    const auto ni = n - 2;
    if (eig.transform.rows() != ni)
        throw std::invalid_argument("transformed_matrices: eigendecomposition degree does not match basis");

    TransformedBasis1D t;
    t.padded          = Matrix(n, n);
    t.padded(0, 0)    = 1.0;
    t.padded(n - 1, n - 1) = 1.0;
    for (std::size_t i = 0; i < ni; ++i)
        for (std::size_t j = 0; j < ni; ++j)
            t.padded(i + 1, j + 1) = eig.transform(i, j);

    t.mass.assign(n, 1.0);
    t.mass.front() = basis.mass.front();
    t.mass.back()  = basis.mass.back();

    const Matrix& k = basis.stiffness;
    t.stiffness     = Matrix(n, n);
    const std::size_t ends[2] = {0, n - 1};
    for (auto r : ends)
        for (auto c : ends)
            t.stiffness(r, c) = k(r, c);
    for (auto e : ends)
        for (std::size_t a = 0; a < ni; ++a)
        {
            double s = 0.0;
            for (std::size_t j = 0; j < ni; ++j)
                s += eig.transform(a, j) * k(j + 1, e);
            t.stiffness(a + 1, e) = s;
            t.stiffness(e, a + 1) = s;
        }
    for (std::size_t a = 0; a < ni; ++a)
        t.stiffness(a + 1, a + 1) = eig.lambda[a];
    return t;
}

} // namespace sem
