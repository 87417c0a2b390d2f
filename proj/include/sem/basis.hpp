#pragma once

#include "sem/dense.hpp"

#include <vector>

namespace sem
{

struct GllRule
{
    std::vector<double> nodes;   // ascending, nodes.front() == -1, nodes.back() == +1
    std::vector<double> weights;
};

/// Gauss-Lobatto-Legendre points and weights for degree p >= 1 (p+1 points).
/// Exact for polynomials up to degree 2p-1.
GllRule gll_rule(int p);

/// One-dimensional Lagrange basis on the GLL points of [-1, 1].
struct Basis1D
{
    int                 p = 0;
    std::vector<double> nodes;
    std::vector<double> weights;
    std::vector<double> mass;      // lumped mass, equals weights
    Matrix              stiffness; // (p+1) x (p+1), symmetric, rows sum to zero
    Matrix              derivative; // derivative(i, j) = phi_j'(x_i)

    [[nodiscard]] int n_interior() const noexcept { return p - 1; }
};

Basis1D build_basis(int p);

/// Solution of the interior generalized eigenproblem
///   S M_II S^T = I,  S K_II S^T = diag(lambda).
/// Rows of S are M_II-orthonormal eigenvectors.
struct InteriorEigen
{
    Matrix              transform; // S_II, n_I x n_I
    Matrix              inverse;   // S_II^{-1} = M_II S_II^T
    std::vector<double> lambda;    // ascending, positive
};

InteriorEigen interior_eigendecomposition(const Basis1D& basis);

/// Mass and stiffness after applying the padded transform
/// S = diag(1, S_II, 1) from both sides.
struct TransformedBasis1D
{
    std::vector<double> mass;      // (M_00, 1, ..., 1, M_pp)
    Matrix              stiffness; // arrowhead: dense first/last rows and columns, diag(lambda) inside
    Matrix              padded;    // padded S
};

TransformedBasis1D transformed_matrices(const Basis1D& basis, const InteriorEigen& eig);

} // namespace sem
