#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace sem
{

struct Box
{
    std::array<double, 3> lo{0.0, 0.0, 0.0};
    std::array<double, 3> hi{1.0, 1.0, 1.0};
};

using Extents = std::array<double, 3>;

/// Tensor-product mesh of cuboids. Element e = e1 + ne1*(e2 + ne2*e3).
struct CartesianMesh
{
    std::array<int, 3>                 counts{1, 1, 1};
    std::array<std::vector<double>, 3> breakpoints;
    Box                                domain;
    double                             alpha = 1.0;

    [[nodiscard]] std::size_t        n_elements() const noexcept;
    [[nodiscard]] std::array<int, 3> element_position(std::size_t e) const noexcept;
    [[nodiscard]] Extents            extents(std::size_t e) const noexcept;
    [[nodiscard]] std::array<double, 3> origin(std::size_t e) const noexcept;
    /// Largest ratio of longest to shortest edge over all elements.
    [[nodiscard]] double max_aspect_ratio() const;
};

/// Widths grow geometrically by `alpha` from lo to hi in every direction.
CartesianMesh build_mesh(std::array<int, 3> counts, const Box& domain, double alpha = 1.0);

/// d = (h1 h2 h3 / 8) * (lambda, 4/h1^2, 4/h2^2, 4/h3^2)
struct MetricCoefficients
{
    std::array<double, 4> d{0.0, 1.0, 1.0, 1.0};
};

MetricCoefficients metric_coefficients(const Extents& h, double lambda);

/// Faces in compass order: west/east (x1 = -1/+1), south/north (x2),
/// bottom/top (x3).
enum class Face : int
{
    west   = 0,
    east   = 1,
    south  = 2,
    north  = 3,
    bottom = 4,
    top    = 5,
};

/// Local node sets of the (p+1)^3 element, local index i1 + (p+1)*(i2 + (p+1)*i3).
///  - faces exclude their edges and vertices, ordered by the tangential
///    indices with the lower direction running fastest;
///  - edges 0-3 run along x1, 4-7 along x2, 8-11 along x3; within a group the
///    position on the two remaining axes is (0,0), (p,0), (0,p), (p,p);
///  - vertices are ordered i1 fastest.
struct DofClasses
{
    int                                       p = 0;
    std::vector<std::size_t>                  interior;
    std::array<std::vector<std::size_t>, 6>   faces;
    std::array<std::vector<std::size_t>, 12>  edges;
    std::array<std::size_t, 8>                vertices{};

    /// Boundary layout used by every condensed operator: faces w,e,s,n,b,t,
    /// then edges, then vertices.
    [[nodiscard]] std::vector<std::size_t> boundary() const;
    [[nodiscard]] std::size_t n_boundary() const noexcept;
};

DofClasses classify_dofs(int p);

/// Local-to-global index table for one kind of element-local vector.
struct ElementMap
{
    std::size_t                n_local  = 0;
    std::size_t                n_global = 0;
    std::vector<std::uint32_t> table; // n_elements * n_local

    [[nodiscard]] std::size_t n_elements() const noexcept { return n_local ? table.size() / n_local : 0; }
    [[nodiscard]] std::span<const std::uint32_t> element(std::size_t e) const noexcept
    {
        return std::span<const std::uint32_t>(table).subspan(e * n_local, n_local);
    }
};

/// global = R local: sums element contributions in element order.
void gather(const ElementMap& map, std::span<const double> local, std::span<double> global);
/// local = R^T global
void scatter(const ElementMap& map, std::span<const double> global, std::span<double> local);

enum class EntityKind : int
{
    vertex,
    edge,
    face,
};

/// Mesh vertex, edge or face. Its global DOFs occupy [offset, offset + size).
struct Entity
{
    EntityKind kind;
    int        axis; // edge: running direction, face: normal direction, vertex: -1
    std::size_t offset;
    std::size_t size;
    bool        dirichlet;
};

/// Flags per domain side in Face order.
using DirichletSides = std::array<bool, 6>;

/// Conforming numbering: vertices, then edges (by direction), then faces (by
/// normal), then element interiors, each group ordered by position with x1
/// fastest. Condensed indices coincide with the full indices of boundary
/// DOFs, so the condensed system is the leading block of the full one.
struct DofMap
{
    int                                      p = 0;
    std::array<int, 3>                       counts{};
    std::size_t                              n_full      = 0;
    std::size_t                              n_condensed = 0;
    ElementMap                               full;      // local lexicographic order
    ElementMap                               condensed; // DofClasses::boundary() order
    std::vector<std::uint8_t>                dirichlet; // per global DOF (full numbering)
    std::vector<double>                      multiplicity;
    std::vector<std::array<std::uint32_t, 3>> grid; // global grid coordinate per DOF
    std::vector<Entity>                      entities;
};

DofMap build_dof_maps(const CartesianMesh& mesh, int p, const DirichletSides& dirichlet = {true, true, true, true, true, true});

/// Physical coordinates of every global DOF given the 1-D GLL nodes.
std::vector<std::array<double, 3>> node_coordinates(const CartesianMesh& mesh, const DofMap& dofs,
                                                    std::span<const double> gll_nodes);

} // namespace sem
