#pragma once

#include "sem/mesh.hpp"
#include "sem/operators.hpp"

#include <functional>
#include <limits>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace sem
{

enum class OperatorVariant
{
    mmc,
    tpc,
    tpt,
};

enum class SolverKind
{
    uc,
    dc,
    bc,
    bt,
};

std::string    to_string(OperatorVariant v);
std::string    to_string(SolverKind s);
OperatorVariant parse_operator_variant(const std::string& s);
SolverKind      parse_solver_kind(const std::string& s);

/// Thrown when the MMC storage estimate exceeds the configured cap.
class MemoryCapExceeded : public std::runtime_error
{
public:
    using std::runtime_error::runtime_error;
};

/// Distinct element extents; elements with bit-identical extents share all
/// precomputed operator data.
struct GeometryTable
{
    std::vector<Extents>       extents;
    std::vector<std::uint32_t> element_geometry;
    std::vector<std::size_t>   order; // elements sorted by geometry, stable
};

GeometryTable classify_geometries(const CartesianMesh& mesh);

/// Assembled condensed operator R H^ R^T over the condensed global numbering.
/// Dirichlet rows are not touched here; the solver masks them.
class CondensedSystem
{
public:
    struct Options
    {
        bool   parallel    = false;
        double mmc_mem_cap = std::numeric_limits<double>::infinity();
    };

    CondensedSystem(const CartesianMesh& mesh, const DofMap& dofs, std::shared_ptr<const ReferenceElement> ref,
                    double lambda, OperatorVariant variant, Options options);
    CondensedSystem(const CartesianMesh& mesh, const DofMap& dofs, std::shared_ptr<const ReferenceElement> ref,
                    double lambda, OperatorVariant variant)
        : CondensedSystem(mesh, dofs, std::move(ref), lambda, variant, Options{})
    {}

    /// y = A x
    void apply(std::span<const double> x, std::span<double> y, OpCounters* counters = nullptr) const;

    /// Exact diagonal of A from the closed-form element diagonals, gathered.
    [[nodiscard]] std::vector<double> assembled_diagonal() const;

    [[nodiscard]] std::size_t           size() const noexcept { return dofs_->n_condensed; }
    [[nodiscard]] OperatorVariant       variant() const noexcept { return variant_; }
    [[nodiscard]] const ReferenceElement& ref() const noexcept { return *ref_; }
    [[nodiscard]] std::shared_ptr<const ReferenceElement> ref_ptr() const noexcept { return ref_; }
    [[nodiscard]] const DofMap&         dofs() const noexcept { return *dofs_; }
    [[nodiscard]] const GeometryTable&  geometries() const noexcept { return geom_; }
    [[nodiscard]] const MetricCoefficients& metric(std::size_t g) const noexcept { return metrics_[g]; }
    [[nodiscard]] const CondensedTpc& tpc(std::size_t g) const { return tpc_.at(g); }
    [[nodiscard]] const CondensedTpt& tpt(std::size_t g) const { return tpt_.at(g); }
    [[nodiscard]] double lambda() const noexcept { return lambda_; }

private:
    const DofMap*                           dofs_;
    std::shared_ptr<const ReferenceElement> ref_;
    double                                  lambda_;
    OperatorVariant                         variant_;
    Options                                 options_;
    GeometryTable                           geom_;
    std::vector<MetricCoefficients>         metrics_;
    std::vector<CondensedTpc>               tpc_;
    std::vector<CondensedTpt>               tpt_;
    std::vector<CondensedMmc>               mmc_;
    std::vector<std::size_t>                geom_begin_; // rows of `order` per geometry
    mutable std::vector<double>             local_in_;
    mutable std::vector<double>             local_out_;
};

enum class PreconditionerKind
{
    identity,
    diagonal,
    block,
    transformed_diagonal,
};

/// Block-diagonal (by mesh entity) preconditioner z = P^{-1} r.
class Preconditioner
{
public:
    Preconditioner() = default;

    void apply(std::span<const double> r, std::span<double> z, MulCounter* counter = nullptr) const;

    [[nodiscard]] PreconditionerKind kind() const noexcept { return kind_; }
    /// Inverse diagonal for the diagonal kinds, empty otherwise.
    [[nodiscard]] std::span<const double> inverse_diagonal() const noexcept { return inv_diag_; }

    friend Preconditioner build_identity_preconditioner(const CondensedSystem& sys);
    friend Preconditioner build_diagonal_preconditioner(const CondensedSystem& sys);
    friend Preconditioner build_block_preconditioner(const CondensedSystem& sys);
    friend Preconditioner build_transformed_diagonal_preconditioner(const CondensedSystem& sys);

private:
    PreconditionerKind       kind_ = PreconditionerKind::identity;
    std::size_t              n_    = 0;
    std::vector<double>      inv_diag_; // diagonal kinds; vertex entries for the block kind
    // block kind
    std::shared_ptr<const ReferenceElement> ref_;
    std::vector<Entity>                     faces_;
    std::vector<std::vector<double>>        face_inv_eig_; // per face, n_I^2
    std::vector<Entity>                     edges_;
    std::vector<Matrix>                     edge_inv_;
    std::vector<std::size_t>                vertices_;
};

Preconditioner build_identity_preconditioner(const CondensedSystem& sys);
/// Untransformed assembled diagonal. Throws std::runtime_error on a non-positive entry.
Preconditioner build_diagonal_preconditioner(const CondensedSystem& sys);
/// Exact inverses of the assembled face, edge and vertex self-blocks. Face
/// blocks are inverted in tensor form through the interior eigenbasis.
Preconditioner build_block_preconditioner(const CondensedSystem& sys);
/// Diagonal of the assembled transformed system (requires the TPT variant).
Preconditioner build_transformed_diagonal_preconditioner(const CondensedSystem& sys);

struct SolverConfig
{
    SolverKind                     kind           = SolverKind::bt;
    double                         tolerance      = 1e-12;
    std::size_t                    max_iterations = 100000;
    /// Defaults: UC/DC/BC use TPC, BT uses TPT. TPT selects the transformed pipeline.
    std::optional<OperatorVariant> operator_variant;
    bool                           parallel    = false;
    double                         mmc_mem_cap = std::numeric_limits<double>::infinity();

    [[nodiscard]] OperatorVariant bound_variant() const;
    void                          validate() const;
};

struct SolveCounters
{
    OpCounters operator_apply;
    MulCounter preconditioner;
    MulCounter vector_ops;
};

struct SolveReport
{
    std::size_t         iterations = 0;
    std::vector<double> residual_history; // recursive residual norms, initial first
    double              initial_residual = 0.0;
    double              final_true_residual = 0.0;
    bool                converged = false;
    bool                breakdown = false;
    SolveCounters       counters;
    double              setup_seconds = 0.0;
    double              solve_seconds = 0.0;
    double              total_seconds = 0.0;
};

using OperatorFn = std::function<void(std::span<const double>, std::span<double>)>;
using PrecondFn  = std::function<void(std::span<const double>, std::span<double>)>;

/// Preconditioned CG on the free DOFs (mask[i] == 0). x holds the initial
/// guess on entry, including the fixed values on masked DOFs, and the
/// solution on exit. Stops when the true residual has been reduced by
/// `tolerance` relative to the initial residual.
SolveReport cg_solve(const OperatorFn& apply, const PrecondFn& precond, std::span<const double> rhs,
                     std::span<double> x, std::span<const std::uint8_t> mask, double tolerance,
                     std::size_t max_iterations, SolveCounters* counters = nullptr);

using PointFunction = std::function<double(const std::array<double, 3>&)>;

/// -Laplace(u) + lambda u = f with Dirichlet data on the flagged sides.
struct HelmholtzProblem
{
    double         lambda = 0.0;
    PointFunction  rhs;
    PointFunction  dirichlet;
    DirichletSides sides{true, true, true, true, true, true};
};

struct SolveResult
{
    DofMap                             dofs;
    std::vector<std::array<double, 3>> coordinates;
    std::vector<double>                u; // full global numbering
    SolveReport                        report;
};

/// Static condensation, global PCG on the condensed system, interior
/// recovery. The TPT variant runs the whole pipeline in the transformed
/// basis and transforms back per element.
SolveResult solve_helmholtz(const HelmholtzProblem& problem, const CartesianMesh& mesh, int p,
                            const SolverConfig& config);

} // namespace sem
