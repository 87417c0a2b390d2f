#include "sem/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace sem
{

std::size_t CartesianMesh::n_elements() const noexcept
{
    return static_cast<std::size_t>(counts[0]) * static_cast<std::size_t>(counts[1]) *
           static_cast<std::size_t>(counts[2]);
}

std::array<int, 3> CartesianMesh::element_position(std::size_t e) const noexcept
{
    const auto n1 = static_cast<std::size_t>(counts[0]);
    const auto n2 = static_cast<std::size_t>(counts[1]);
    return {static_cast<int>(e % n1), static_cast<int>((e / n1) % n2), static_cast<int>(e / (n1 * n2))};
}

Extents CartesianMesh::extents(std::size_t e) const noexcept
{
    const auto pos = element_position(e);
    Extents    h{};
    for (std::size_t a = 0; a < 3; ++a)
    {
        const auto i = static_cast<std::size_t>(pos[a]);
        h[a]         = breakpoints[a][i + 1] - breakpoints[a][i];
    }
    return h;
}

std::array<double, 3> CartesianMesh::origin(std::size_t e) const noexcept
{
    const auto            pos = element_position(e);
    std::array<double, 3> x{};
    for (std::size_t a = 0; a < 3; ++a)
        x[a] = breakpoints[a][static_cast<std::size_t>(pos[a])];
    return x;
}

double CartesianMesh::max_aspect_ratio() const
{
    double ar = 1.0;
    for (std::size_t e = 0; e < n_elements(); ++e)
    {
        const auto h = extents(e);
        ar           = std::max(ar, *std::max_element(h.begin(), h.end()) / *std::min_element(h.begin(), h.end()));
    }
    return ar;
}

CartesianMesh build_mesh(std::array<int, 3> counts, const Box& domain, double alpha)
{
    if (!(alpha > 0.0))
        throw std::invalid_argument("build_mesh: expansion factor must be positive");
    CartesianMesh mesh;
    mesh.counts = counts;
    mesh.domain = domain;
    mesh.alpha  = alpha;
    for (std::size_t a = 0; a < 3; ++a)
    {
        const int    n      = counts[a];
        const double length = domain.hi[a] - domain.lo[a];
        if (n < 1)
            throw std::invalid_argument("build_mesh: element count must be >= 1 in every direction");
        if (!(length > 0.0))
            throw std::invalid_argument("build_mesh: degenerate domain along direction " + std::to_string(a + 1));

        std::vector<double> widths(static_cast<std::size_t>(n));
        double              total = 0.0;
        double              w     = 1.0;
        for (auto& wi : widths)
        {
            wi = w;
            total += w;
            w *= alpha;
        }
        auto& bp = mesh.breakpoints[a];
        bp.resize(static_cast<std::size_t>(n) + 1);
        bp.front() = domain.lo[a];
        double acc = 0.0;
        for (std::size_t i = 0; i < widths.size(); ++i)
        {
            acc += widths[i];
            bp[i + 1] = domain.lo[a] + length * (acc / total);
        }
        bp.back() = domain.hi[a];
    }
    return mesh;
}

MetricCoefficients metric_coefficients(const Extents& h, double lambda)
{
    if (lambda < 0.0)
        throw std::invalid_argument("metric_coefficients: negative Helmholtz parameter is not supported");
    for (double hi : h)
        if (!(hi > 0.0))
            throw std::invalid_argument("metric_coefficients: element extents must be positive");
    const double j = h[0] * h[1] * h[2] / 8.0;
    return {{j * lambda, j * 4.0 / (h[0] * h[0]), j * 4.0 / (h[1] * h[1]), j * 4.0 / (h[2] * h[2])}};
}

std::vector<std::size_t> DofClasses::boundary() const
{
    std::vector<std::size_t> b;
    b.reserve(n_boundary());
    for (const auto& f : faces)
        b.insert(b.end(), f.begin(), f.end());
    for (const auto& e : edges)
        b.insert(b.end(), e.begin(), e.end());
    b.insert(b.end(), vertices.begin(), vertices.end());
    return b;
}

std::size_t DofClasses::n_boundary() const noexcept
{
    const auto ni = static_cast<std::size_t>(p - 1);
    return 6 * ni * ni + 12 * ni + 8;
}

DofClasses classify_dofs(int p)
{
    if (p < 2)
        throw std::invalid_argument("classify_dofs: degree must be >= 2");
    const auto n  = static_cast<std::size_t>(p) + 1;
    const auto pp = static_cast<std::size_t>(p);
    auto       at = [n](std::size_t i, std::size_t j, std::size_t k) { return i + n * (j + n * k); };

    DofClasses c;
    c.p = p;
    for (std::size_t k = 1; k < pp; ++k)
        for (std::size_t j = 1; j < pp; ++j)
            for (std::size_t i = 1; i < pp; ++i)
                c.interior.push_back(at(i, j, k));

    for (std::size_t side = 0; side < 2; ++side)
    {
        const std::size_t s = side * pp;
        for (std::size_t k = 1; k < pp; ++k)
            for (std::size_t j = 1; j < pp; ++j)
                c.faces[0 + side].push_back(at(s, j, k));
        for (std::size_t k = 1; k < pp; ++k)
            for (std::size_t i = 1; i < pp; ++i)
                c.faces[2 + side].push_back(at(i, s, k));
        for (std::size_t j = 1; j < pp; ++j)
            for (std::size_t i = 1; i < pp; ++i)
                c.faces[4 + side].push_back(at(i, j, s));
    }

    for (std::size_t q = 0; q < 4; ++q)
    {
        const std::size_t sb = (q % 2) * pp;
        const std::size_t sc = (q / 2) * pp;
        for (std::size_t r = 1; r < pp; ++r)
        {
            c.edges[0 + q].push_back(at(r, sb, sc));
            c.edges[4 + q].push_back(at(sb, r, sc));
            c.edges[8 + q].push_back(at(sb, sc, r));
        }
    }

    for (std::size_t v = 0; v < 8; ++v)
        c.vertices[v] = at((v & 1) * pp, ((v >> 1) & 1) * pp, ((v >> 2) & 1) * pp);
    return c;
}

void gather(const ElementMap& map, std::span<const double> local, std::span<double> global)
{
    if (local.size() != map.table.size() || global.size() != map.n_global)
        throw std::invalid_argument("gather: size mismatch");
    std::fill(global.begin(), global.end(), 0.0);
    for (std::size_t k = 0; k < map.table.size(); ++k)
        global[map.table[k]] += local[k];
}

void scatter(const ElementMap& map, std::span<const double> global, std::span<double> local)
{
    if (local.size() != map.table.size() || global.size() != map.n_global)
        throw std::invalid_argument("scatter: size mismatch");
    for (std::size_t k = 0; k < map.table.size(); ++k)
        local[k] = global[map.table[k]];
}

namespace
{

/// Closed-form conforming numbering over the global grid of (ne*p + 1)^3 nodes.
class Numbering
{
public:
    Numbering(const std::array<int, 3>& counts, int p) : p_(static_cast<std::size_t>(p))
    {
        for (std::size_t a = 0; a < 3; ++a)
            ne_[a] = static_cast<std::size_t>(counts[a]);
        ni_ = p_ - 1;

        std::size_t off = (ne_[0] + 1) * (ne_[1] + 1) * (ne_[2] + 1);
        for (std::size_t a = 0; a < 3; ++a)
        {
            edge_off_[a] = off;
            off += entity_count(a, true) * ni_;
        }
        for (std::size_t a = 0; a < 3; ++a)
        {
            face_off_[a] = off;
            off += entity_count(a, false) * ni_ * ni_;
        }
        interior_off_ = off;
        n_full_       = off + ne_[0] * ne_[1] * ne_[2] * ni_ * ni_ * ni_;
    }

    [[nodiscard]] std::size_t n_full() const noexcept { return n_full_; }
    [[nodiscard]] std::size_t n_condensed() const noexcept { return interior_off_; }
    [[nodiscard]] std::size_t edge_offset(std::size_t a) const noexcept { return edge_off_[a]; }
    [[nodiscard]] std::size_t face_offset(std::size_t a) const noexcept { return face_off_[a]; }

    /// Number of edges running along a (span == true) or faces normal to a.
    [[nodiscard]] std::size_t entity_count(std::size_t a, bool span) const noexcept
    {
        std::size_t c = 1;
        for (std::size_t b = 0; b < 3; ++b)
            c *= ((b == a) == span) ? ne_[b] : ne_[b] + 1;
        return c;
    }

    [[nodiscard]] std::size_t index(const std::array<std::size_t, 3>& g) const noexcept
    {
        std::array<bool, 3>        on_vertex{};
        std::array<std::size_t, 3> q{}; // vertex index or element span
        std::array<std::size_t, 3> r{}; // offset inside the span
        int                        n_vertex = 0;
        for (std::size_t a = 0; a < 3; ++a)
        {
            on_vertex[a] = g[a] % p_ == 0;
            q[a]         = g[a] / p_;
            r[a]         = on_vertex[a] ? 0 : g[a] % p_ - 1;
            n_vertex += on_vertex[a] ? 1 : 0;
        }
        auto lex = [&](std::size_t c0, std::size_t c1) { return q[0] + c0 * (q[1] + c1 * q[2]); };
        auto cnt = [&](std::size_t a) { return on_vertex[a] ? ne_[a] + 1 : ne_[a]; };

        switch (n_vertex)
        {
        case 3: return q[0] + (ne_[0] + 1) * (q[1] + (ne_[1] + 1) * q[2]);
        case 2: {
            std::size_t a = 0;
            while (on_vertex[a])
                ++a;
            return edge_off_[a] + lex(cnt(0), cnt(1)) * ni_ + r[a];
        }
        case 1: {
            std::size_t a = 0;
            while (!on_vertex[a])
                ++a;
            const std::size_t b = a == 0 ? 1 : 0;
            const std::size_t c = a == 2 ? 1 : 2;
            return face_off_[a] + lex(cnt(0), cnt(1)) * ni_ * ni_ + r[b] + ni_ * r[c];
        }
        default: {
            const std::size_t e = lex(ne_[0], ne_[1]);
            return interior_off_ + e * ni_ * ni_ * ni_ + r[0] + ni_ * (r[1] + ni_ * r[2]);
        }
        }
    }

private:
    std::size_t                p_;
    std::size_t                ni_;
    std::array<std::size_t, 3> ne_{};
    std::array<std::size_t, 3> edge_off_{};
    std::array<std::size_t, 3> face_off_{};
    std::size_t                interior_off_ = 0;
    std::size_t                n_full_       = 0;
};

} // namespace

DofMap build_dof_maps(const CartesianMesh& mesh, int p, const DirichletSides& dirichlet)
{
    if (p < 2)
        throw std::invalid_argument("build_dof_maps: degree must be >= 2");
    const Numbering num(mesh.counts, p);
    const auto      n  = static_cast<std::size_t>(p) + 1;
    const auto      pp = static_cast<std::size_t>(p);
    const auto      ne = mesh.n_elements();

    DofMap map;
    map.p           = p;
    map.counts      = mesh.counts;
    map.n_full      = num.n_full();
    map.n_condensed = num.n_condensed();
    if (map.n_full > std::numeric_limits<std::uint32_t>::max())
        throw std::length_error("build_dof_maps: global DOF count exceeds 32-bit index range");

    std::array<std::size_t, 3> last{};
    for (std::size_t a = 0; a < 3; ++a)
        last[a] = static_cast<std::size_t>(mesh.counts[a]) * pp;

    map.full      = ElementMap{n * n * n, map.n_full, std::vector<std::uint32_t>(ne * n * n * n)};
    map.grid.resize(map.n_full);
    map.dirichlet.assign(map.n_full, 0);
    for (std::size_t e = 0; e < ne; ++e)
    {
        const auto pos = mesh.element_position(e);
        for (std::size_t k = 0; k < n; ++k)
            for (std::size_t j = 0; j < n; ++j)
                for (std::size_t i = 0; i < n; ++i)
                {
                    const std::array<std::size_t, 3> g{static_cast<std::size_t>(pos[0]) * pp + i,
                                                       static_cast<std::size_t>(pos[1]) * pp + j,
                                                       static_cast<std::size_t>(pos[2]) * pp + k};
                    const auto gid = num.index(g);
                    map.full.table[e * n * n * n + i + n * (j + n * k)] = static_cast<std::uint32_t>(gid);
                    map.grid[gid] = {static_cast<std::uint32_t>(g[0]), static_cast<std::uint32_t>(g[1]),
                                     static_cast<std::uint32_t>(g[2])};
                    bool d = false;
                    for (std::size_t a = 0; a < 3; ++a)
                        d = d || (g[a] == 0 && dirichlet[2 * a]) || (g[a] == last[a] && dirichlet[2 * a + 1]);
                    map.dirichlet[gid] = d ? 1 : 0;
                }
    }

    const auto classes  = classify_dofs(p);
    const auto boundary = classes.boundary();
    map.condensed       = ElementMap{boundary.size(), map.n_condensed, std::vector<std::uint32_t>(ne * boundary.size())};
    for (std::size_t e = 0; e < ne; ++e)
        for (std::size_t b = 0; b < boundary.size(); ++b)
            map.condensed.table[e * boundary.size() + b] = map.full.table[e * n * n * n + boundary[b]];

    map.multiplicity.assign(map.n_full, 0.0);
    for (auto g : map.full.table)
        map.multiplicity[g] += 1.0;

    const std::size_t ni = pp - 1;
    auto              add_entities = [&](EntityKind kind, int axis, std::size_t offset, std::size_t count, std::size_t size) {
        for (std::size_t c = 0; c < count; ++c)
        {
            const std::size_t off = offset + c * size;
            map.entities.push_back(Entity{kind, axis, off, size, map.dirichlet[off] != 0});
        }
    };
    add_entities(EntityKind::vertex, -1, 0, num.edge_offset(0), 1);
    for (std::size_t a = 0; a < 3; ++a)
        add_entities(EntityKind::edge, static_cast<int>(a), num.edge_offset(a), num.entity_count(a, true), ni);
    for (std::size_t a = 0; a < 3; ++a)
        add_entities(EntityKind::face, static_cast<int>(a), num.face_offset(a), num.entity_count(a, false), ni * ni);
    return map;
}

std::vector<std::array<double, 3>> node_coordinates(const CartesianMesh& mesh, const DofMap& dofs,
                                                    std::span<const double> gll_nodes)
{
    const auto                         pp = static_cast<std::uint32_t>(dofs.p);
    std::vector<std::array<double, 3>> x(dofs.n_full);
    for (std::size_t g = 0; g < dofs.n_full; ++g)
        for (std::size_t a = 0; a < 3; ++a)
        {
            const std::uint32_t c    = dofs.grid[g][a];
            std::uint32_t       span = c / pp;
            std::uint32_t       r    = c % pp;
            if (span == static_cast<std::uint32_t>(mesh.counts[a]))
            {
                span -= 1;
                r = pp;
            }
            const double x0 = mesh.breakpoints[a][span];
            const double x1 = mesh.breakpoints[a][span + 1];
            x[g][a]         = r == 0 ? x0 : (r == pp ? x1 : x0 + 0.5 * (x1 - x0) * (gll_nodes[r] + 1.0));
        }
    return x;
}

} // namespace sem
