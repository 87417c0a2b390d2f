#pragma once

#include "sem/basis.hpp"
#include "sem/dense.hpp"
#include "sem/mesh.hpp"
#include "sem/tensor.hpp"

#include <array>
#include <cstdint>
#include <memory>
#include <span>
#include <vector>

namespace sem
{

/// Sparse boundary-to-boundary stencil of one tensor term of the element
/// operator: for each boundary node the neighbours along one direction that
/// are themselves boundary nodes, with the 1-D stiffness entry.
struct DirectionalStencil
{
    std::vector<std::uint32_t> row_start; // n_boundary + 1
    std::vector<std::uint32_t> column;    // boundary index
    std::vector<double>        value;
};

/// Boundary restriction of d0 M(x)M(x)M + d1 M(x)M(x)K + d2 M(x)K(x)M + d3 K(x)M(x)M
/// for a diagonal 1-D mass and a 1-D stiffness with known sparsity.
struct PrimaryStencil
{
    std::vector<std::array<double, 4>> weights; // mass products per boundary node and term
    std::array<DirectionalStencil, 3>  direction;
};

/// Everything that depends on the polynomial degree only. Shared read-only by
/// all element operators of that degree.
struct ReferenceElement
{
    int         p  = 0;
    std::size_t n  = 0; // p + 1
    std::size_t ni = 0; // p - 1
    std::size_t nb = 0; // boundary nodes per element

    Basis1D            basis;
    InteriorEigen      eig;
    TransformedBasis1D transformed;
    DofClasses         classes;

    std::vector<std::size_t>   boundary;          // boundary position -> local index
    std::vector<std::int64_t>  local_to_boundary; // local index -> boundary position, -1 for interior

    Matrix s;        // S_II
    Matrix st;       // S_II^T
    Matrix s_mass;   // S_II M_II
    Matrix mass_st;  // M_II S_II^T
    std::array<std::vector<double>, 2> s_k_end; // S_II K_{I0}, S_II K_{Ip}  (= transformed K_{I0}, K_{Ip})

    PrimaryStencil primary;             // original basis
    PrimaryStencil primary_transformed; // transformed basis

    [[nodiscard]] std::size_t face_offset(int f) const noexcept { return static_cast<std::size_t>(f) * ni * ni; }
    [[nodiscard]] std::size_t edge_offset(int q) const noexcept { return 6 * ni * ni + static_cast<std::size_t>(q) * ni; }
    [[nodiscard]] std::size_t vertex_offset() const noexcept { return 6 * ni * ni + 12 * ni; }
    [[nodiscard]] Dims3       full_dims() const noexcept { return {n, n, n}; }
    [[nodiscard]] Dims3       interior_dims() const noexcept { return {ni, ni, ni}; }
    /// Face array viewed as a field with extent 1 along the normal.
    [[nodiscard]] Dims3 face_dims(int f) const noexcept
    {
        Dims3 d{ni, ni, ni};
        d[static_cast<std::size_t>(f / 2)] = 1;
        return d;
    }
};

std::shared_ptr<const ReferenceElement> make_reference_element(int p);

/// Multiplication tallies split as in the operator cost tables.
struct OpCounters
{
    MulCounter primary;
    MulCounter condensed;
};

/// Element Helmholtz operator d0 M(x)M(x)M + d1 M(x)M(x)K + d2 M(x)K(x)M + d3 K(x)M(x)M.
struct FullElementOperator
{
    std::shared_ptr<const ReferenceElement> ref;
    MetricCoefficients                      metric;
};

/// Sum-factorized application on a (p+1)^3 field.
Field3 apply_full(const FullElementOperator& op, const Field3& u, MulCounter* counter = nullptr);

/// Dense (p+1)^3 element matrix assembled entry by entry.
Matrix dense_element_matrix(const FullElementOperator& op);

/// H_BB - H_BI H_II^{-1} H_IB by dense factorization, rows and columns in
/// boundary order. Oracle only; refuses p > 8.
Matrix schur_dense(const FullElementOperator& op);

/// Eigenspace diagonal D = d0 + d1 lambda_i + d2 lambda_j + d3 lambda_k.
Field3 eigenspace_diagonal(const ReferenceElement& ref, const MetricCoefficients& metric);

/// H_II^{-1} r = (S^T (x) S^T (x) S^T) D^{-1} (S (x) S (x) S) r.
Field3 interior_inverse_apply(const ReferenceElement& ref, const MetricCoefficients& metric, const Field3& r,
                              MulCounter* counter = nullptr);

/// Scratch buffers for the factorized operators; one per worker.
class OperatorWorkspace
{
public:
    explicit OperatorWorkspace(const ReferenceElement& ref);

    std::vector<double> eigenspace;
    std::vector<double> face_a;
    std::vector<double> face_b;
    Matrix              column; // ni x 1
    Matrix              row;    // 1 x ni
};

/// Condensed operator, tensor-product factorization accumulating in the
/// interior eigenspace.
class CondensedTpc
{
public:
    explicit CondensedTpc(const FullElementOperator& op);

    /// vb = H^ ub (overwrites vb).
    void apply(std::span<const double> ub, std::span<double> vb, OperatorWorkspace& ws, OpCounters* counters = nullptr) const;

    /// acc += sum_i H_{E F_i} u_{F_i}
    void faces_to_eigenspace(std::span<const double> ub, std::span<double> acc, OperatorWorkspace& ws, MulCounter* c) const;
    /// vb_{F_j} += scale * H_{F_j E} v for all faces
    void eigenspace_to_faces(std::span<const double> v, std::span<double> vb, double scale, OperatorWorkspace& ws,
                             MulCounter* c) const;

    [[nodiscard]] const FullElementOperator& op() const noexcept { return op_; }
    [[nodiscard]] std::span<const double>    inverse_diagonal() const noexcept { return inv_diag_; }

private:
    FullElementOperator op_;
    std::vector<double> inv_diag_;
};

/// Condensed operator of the transformed system: every suboperator is one
/// 1-D vector along the face normal.
class CondensedTpt
{
public:
    explicit CondensedTpt(const FullElementOperator& op);

    void apply(std::span<const double> ub, std::span<double> vb, OperatorWorkspace& ws, OpCounters* counters = nullptr) const;

    void faces_to_eigenspace(std::span<const double> ub, std::span<double> acc, OperatorWorkspace& ws, MulCounter* c) const;
    void eigenspace_to_faces(std::span<const double> v, std::span<double> vb, double scale, OperatorWorkspace& ws,
                             MulCounter* c) const;

    [[nodiscard]] const FullElementOperator& op() const noexcept { return op_; }
    [[nodiscard]] std::span<const double>    inverse_diagonal() const noexcept { return inv_diag_; }

private:
    FullElementOperator op_;
    std::vector<double> inv_diag_;
};

/// Condensed operator stored as one dense boundary x boundary matrix.
class CondensedMmc
{
public:
    explicit CondensedMmc(const FullElementOperator& op);

    void apply(std::span<const double> ub, std::span<double> vb, OpCounters* counters = nullptr) const;
    /// Applies to `count` boundary vectors stored back to back with one matrix product.
    void apply_batch(std::span<const double> ub, std::span<double> vb, std::size_t count,
                     OpCounters* counters = nullptr) const;

    [[nodiscard]] const Matrix& matrix() const noexcept { return matrix_; }

private:
    std::shared_ptr<const ReferenceElement> ref_;
    Matrix                                  matrix_;
};

/// Untransformed element RHS condensation F_B - H_BI H_II^{-1} F_I.
std::vector<double> condense_rhs(const CondensedTpc& tpc, const Field3& f, MulCounter* counter = nullptr);
/// u_I = H_II^{-1} (F_I - H_IB u_B)
Field3 recover_interior(const CondensedTpc& tpc, const Field3& f, std::span<const double> ub,
                        MulCounter* counter = nullptr);

/// Transformed-system counterparts, inputs already transformed.
std::vector<double> condense_rhs(const CondensedTpt& tpt, const Field3& f, MulCounter* counter = nullptr);
Field3 recover_interior(const CondensedTpt& tpt, const Field3& f, std::span<const double> ub,
                        MulCounter* counter = nullptr);

/// Padded element transforms. With H~ = (S(x)S(x)S) H (S(x)S(x)S)^T:
///   solution  u~ = (S^{-1}(x)S^{-1}(x)S^{-1})^T u
///   back      u  = (S(x)S(x)S)^T u~
///   rhs       F~ = (S(x)S(x)S) F
/// so that H~ u~ = F~ iff H u = F.
class TransformContext
{
public:
    explicit TransformContext(std::shared_ptr<const ReferenceElement> ref);

    [[nodiscard]] Field3 forward(const Field3& u) const;
    [[nodiscard]] Field3 backward(const Field3& ut) const;
    [[nodiscard]] Field3 rhs(const Field3& f) const;

    enum class Kind
    {
        forward,
        backward,
        rhs,
    };
    /// Same transforms restricted to an element boundary vector; faces and
    /// edges transform within themselves, vertices are left unchanged.
    void boundary(Kind kind, std::span<const double> in, std::span<double> out) const;
    /// Transform of one entity: 1 value (vertex), a length-ni edge or a
    /// ni x ni face. Used on global vectors entity by entity.
    void entity(Kind kind, EntityKind entity, std::span<const double> in, std::span<double> out) const;

    [[nodiscard]] const Matrix& interior_matrix(Kind kind) const noexcept;

private:
    std::shared_ptr<const ReferenceElement> ref_;
    Matrix                                  forward_;  // padded (S^{-1})^T = padded S M
    Matrix                                  backward_; // padded S^T
    Matrix                                  rhs_;      // padded S
    std::array<Matrix, 3>                   interior_; // interior blocks of the above
};

/// Face-to-face storage of the dense variant for n_e elements without
/// geometry sharing: 36 n_I^4 reals per element.
double estimate_mmc_memory(int p, std::size_t n_elements, std::size_t bytes_per_real = 8);

/// Boundary values of a full element field, in boundary order.
std::vector<double> restrict_to_boundary(const ReferenceElement& ref, const Field3& u);
/// Interior values as an n_I^3 field.
Field3 restrict_to_interior(const ReferenceElement& ref, const Field3& u);
/// Assembles a full element field from boundary and interior parts.
Field3 combine(const ReferenceElement& ref, std::span<const double> ub, const Field3& ui);

/// Diagonal of the element condensed operator in boundary order, closed form
/// in O(n_I^3).
std::vector<double> condensed_diagonal(const CondensedTpc& tpc);
/// Same for the transformed system; face self-couplings are diagonal there.
std::vector<double> condensed_diagonal(const CondensedTpt& tpt);

} // namespace sem
