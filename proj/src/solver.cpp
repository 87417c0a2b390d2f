#include "sem/solver.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>
#include <stdexcept>

#ifdef _OPENMP
#include <omp.h>
#define SEM_OMP(x) _Pragma(#x)
#else
#define SEM_OMP(x)
#endif

namespace sem
{

namespace
{

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0)
{
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

double dot(std::span<const double> a, std::span<const double> b)
{
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i)
        s += a[i] * b[i];
    return s;
}

void mask_out(std::span<double> v, std::span<const std::uint8_t> mask)
{
    for (std::size_t i = 0; i < v.size(); ++i)
        if (mask[i])
            v[i] = 0.0;
}

} // namespace

std::string to_string(OperatorVariant v)
{
    switch (v)
    {
    case OperatorVariant::mmc: return "mmc";
    case OperatorVariant::tpc: return "tpc";
    case OperatorVariant::tpt: return "tpt";
    }
    return "?";
}

std::string to_string(SolverKind s)
{
    switch (s)
    {
    case SolverKind::uc: return "uc";
    case SolverKind::dc: return "dc";
    case SolverKind::bc: return "bc";
    case SolverKind::bt: return "bt";
    }
    return "?";
}

OperatorVariant parse_operator_variant(const std::string& s)
{
    if (s == "mmc" || s == "MMC")
        return OperatorVariant::mmc;
    if (s == "tpc" || s == "TPC")
        return OperatorVariant::tpc;
    if (s == "tpt" || s == "TPT")
        return OperatorVariant::tpt;
    throw std::invalid_argument("unknown operator variant '" + s + "' (expected mmc, tpc or tpt)");
}

SolverKind parse_solver_kind(const std::string& s)
{
    if (s == "uc" || s == "UC")
        return SolverKind::uc;
    if (s == "dc" || s == "DC")
        return SolverKind::dc;
    if (s == "bc" || s == "BC")
        return SolverKind::bc;
    if (s == "bt" || s == "BT")
        return SolverKind::bt;
    throw std::invalid_argument("unknown solver '" + s + "' (expected uc, dc, bc or bt)");
}

GeometryTable classify_geometries(const CartesianMesh& mesh)
{
    GeometryTable                     t;
    std::map<Extents, std::uint32_t> ids;
    const auto                        ne = mesh.n_elements();
    t.element_geometry.resize(ne);
    for (std::size_t e = 0; e < ne; ++e)
    {
        const auto h        = mesh.extents(e);
        const auto [it, ok] = ids.emplace(h, static_cast<std::uint32_t>(t.extents.size()));
        if (ok)
            t.extents.push_back(h);
        t.element_geometry[e] = it->second;
    }
    t.order.resize(ne);
    std::iota(t.order.begin(), t.order.end(), std::size_t{0});
    std::stable_sort(t.order.begin(), t.order.end(), [&t](std::size_t a, std::size_t b) {
        return t.element_geometry[a] < t.element_geometry[b];
    });
    return t;
}

CondensedSystem::CondensedSystem(const CartesianMesh& mesh, const DofMap& dofs,
                                 std::shared_ptr<const ReferenceElement> ref, double lambda, OperatorVariant variant,
                                 Options options)
    : dofs_(&dofs), ref_(std::move(ref)), lambda_(lambda), variant_(variant), options_(options)
{
    if (!ref_ || ref_->p != dofs.p)
        throw std::invalid_argument("CondensedSystem: reference element degree does not match DOF map");
    if (mesh.n_elements() != dofs.condensed.n_elements())
        throw std::invalid_argument("CondensedSystem: mesh and DOF map disagree on element count");
    geom_ = classify_geometries(mesh);
    const auto ng = geom_.extents.size();

    if (variant_ == OperatorVariant::mmc)
    {
        const double bytes = static_cast<double>(ng) * static_cast<double>(ref_->nb * ref_->nb) * 8.0;
        if (bytes > options_.mmc_mem_cap)
            throw MemoryCapExceeded("MMC storage of " + std::to_string(bytes) + " bytes for " + std::to_string(ng) +
                                    " distinct geometries exceeds the cap of " +
                                    std::to_string(options_.mmc_mem_cap) + " bytes");
    }

    for (std::size_t g = 0; g < ng; ++g)
    {
        metrics_.push_back(metric_coefficients(geom_.extents[g], lambda));
        const FullElementOperator op{ref_, metrics_.back()};
        if (variant_ == OperatorVariant::tpt)
            tpt_.emplace_back(op);
        else
            tpc_.emplace_back(op);
        if (variant_ == OperatorVariant::mmc)
            mmc_.emplace_back(op);
    }

    geom_begin_.assign(ng + 1, 0);
    for (auto g : geom_.element_geometry)
        ++geom_begin_[g + 1];
    std::partial_sum(geom_begin_.begin(), geom_begin_.end(), geom_begin_.begin());

    local_in_.resize(mesh.n_elements() * ref_->nb);
    local_out_.resize(local_in_.size());
}

void CondensedSystem::apply(std::span<const double> x, std::span<double> y, OpCounters* counters) const
{
    const auto& map = dofs_->condensed;
    const auto  nb  = ref_->nb;
    const auto  ne  = geom_.order.size();
    if (x.size() != size() || y.size() != size())
        throw std::invalid_argument("CondensedSystem::apply: vector length mismatch");

    for (std::size_t r = 0; r < ne; ++r)
    {
        const auto idx = map.element(geom_.order[r]);
        double*    dst = local_in_.data() + r * nb;
        for (std::size_t b = 0; b < nb; ++b)
            dst[b] = x[idx[b]];
    }

    if (variant_ == OperatorVariant::mmc)
    {
        for (std::size_t g = 0; g + 1 < geom_begin_.size(); ++g)
        {
            const auto r0 = geom_begin_[g];
            const auto nr = geom_begin_[g + 1] - r0;
            mmc_[g].apply_batch(std::span<const double>(local_in_).subspan(r0 * nb, nr * nb),
                                std::span<double>(local_out_).subspan(r0 * nb, nr * nb), nr, counters);
        }
    }
    else
    {
        const bool tpt      = variant_ == OperatorVariant::tpt;
        const bool parallel = options_.parallel;
        (void)parallel;
        SEM_OMP(omp parallel if (parallel))
        {
            OperatorWorkspace ws(*ref_);
            OpCounters        local;
            OpCounters*       lc = counters ? &local : nullptr;
            SEM_OMP(omp for schedule(static))
            for (std::ptrdiff_t r = 0; r < static_cast<std::ptrdiff_t>(ne); ++r)
            {
                const auto g   = geom_.element_geometry[geom_.order[static_cast<std::size_t>(r)]];
                const auto in  = std::span<const double>(local_in_).subspan(static_cast<std::size_t>(r) * nb, nb);
                const auto out = std::span<double>(local_out_).subspan(static_cast<std::size_t>(r) * nb, nb);
                if (tpt)
                    tpt_[g].apply(in, out, ws, lc);
                else
                    tpc_[g].apply(in, out, ws, lc);
            }
            if (counters)
            {
                SEM_OMP(omp critical)
                {
                    counters->primary.add(local.primary.count);
                    counters->condensed.add(local.condensed.count);
                }
            }
        }
    }

    std::fill(y.begin(), y.end(), 0.0);
    for (std::size_t r = 0; r < ne; ++r)
    {
        const auto    idx = map.element(geom_.order[r]);
        const double* src = local_out_.data() + r * nb;
        for (std::size_t b = 0; b < nb; ++b)
            y[idx[b]] += src[b];
    }
}

std::vector<double> CondensedSystem::assembled_diagonal() const
{
    const auto&                      map = dofs_->condensed;
    std::vector<std::vector<double>> per_geometry;
    for (std::size_t g = 0; g < geom_.extents.size(); ++g)
        per_geometry.push_back(variant_ == OperatorVariant::tpt ? condensed_diagonal(tpt_[g])
                                                                : condensed_diagonal(tpc_[g]));
    std::vector<double> diag(size(), 0.0);
    for (std::size_t e = 0; e < geom_.element_geometry.size(); ++e)
    {
        const auto  idx   = map.element(e);
        const auto& local = per_geometry[geom_.element_geometry[e]];
        for (std::size_t b = 0; b < idx.size(); ++b)
            diag[idx[b]] += local[b];
    }
    return diag;
}

namespace
{

std::vector<double> checked_reciprocal(const std::vector<double>& diag, const char* what)
{
    std::vector<double> inv(diag.size());
    for (std::size_t i = 0; i < diag.size(); ++i)
    {
        if (!(diag[i] > 0.0))
            throw std::runtime_error(std::string(what) + ": non-positive diagonal entry at DOF " + std::to_string(i));
        inv[i] = 1.0 / diag[i];
    }
    return inv;
}

/// Self-block of the element operator on local edge q (interior nodes along
/// the edge direction).
Matrix element_edge_block(const ReferenceElement& ref, const MetricCoefficients& metric, int q)
{
    const auto  a  = static_cast<std::size_t>(q / 4);
    const auto  pp = ref.n - 1;
    const auto  ni = ref.ni;
    const auto& m  = ref.basis.mass;
    const auto& K  = ref.basis.stiffness;
    const auto& d  = metric.d;
    // node indices on the two remaining axes, lower axis first
    const std::size_t b  = a == 0 ? 1 : 0;
    const std::size_t c  = a == 2 ? 1 : 2;
    const std::size_t ib = (static_cast<std::size_t>(q) % 2) * pp;
    const std::size_t ic = ((static_cast<std::size_t>(q) % 4) / 2) * pp;

    Matrix blk(ni, ni);
    for (std::size_t r = 0; r < ni; ++r)
    {
        for (std::size_t s = 0; s < ni; ++s)
            blk(r, s) = d[a + 1] * K(r + 1, s + 1) * m[ib] * m[ic];
        blk(r, r) += d[0] * m[r + 1] * m[ib] * m[ic] + d[b + 1] * m[r + 1] * K(ib, ib) * m[ic] +
                     d[c + 1] * m[r + 1] * m[ib] * K(ic, ic);
    }
    return blk;
}

} // namespace

void Preconditioner::apply(std::span<const double> r, std::span<double> z, MulCounter* counter) const
{
    if (r.size() != n_ || z.size() != n_)
        throw std::invalid_argument("Preconditioner::apply: vector length mismatch");
    switch (kind_)
    {
    case PreconditionerKind::identity: std::copy(r.begin(), r.end(), z.begin()); return;
    case PreconditionerKind::diagonal:
    case PreconditionerKind::transformed_diagonal:
        for (std::size_t i = 0; i < n_; ++i)
            z[i] = inv_diag_[i] * r[i];
        tally(counter, n_);
        return;
    case PreconditionerKind::block: break;
    }

    const auto  ni = ref_->ni;
    const Dims3 fd{ni, ni, 1};
    std::vector<double> t1(ni * ni), t2(ni * ni);
    for (std::size_t f = 0; f < faces_.size(); ++f)
    {
        const auto& ent = faces_[f];
        const auto  in  = r.subspan(ent.offset, ent.size);
        apply_axis(ref_->s, Axis::x1, in, fd, t1, false, counter);
        apply_axis(ref_->s, Axis::x2, t1, fd, t2, false, counter);
        const auto& w = face_inv_eig_[f];
        for (std::size_t i = 0; i < t2.size(); ++i)
            t2[i] *= w[i];
        tally(counter, t2.size());
        apply_axis(ref_->st, Axis::x1, t2, fd, t1, false, counter);
        apply_axis(ref_->st, Axis::x2, t1, fd, z.subspan(ent.offset, ent.size), false, counter);
    }
    for (std::size_t q = 0; q < edges_.size(); ++q)
    {
        const auto& ent = edges_[q];
        const auto& inv = edge_inv_[q];
        for (std::size_t i = 0; i < ni; ++i)
        {
            double s = 0.0;
            for (std::size_t j = 0; j < ni; ++j)
                s += inv(i, j) * r[ent.offset + j];
            z[ent.offset + i] = s;
        }
        tally(counter, ni * ni);
    }
    for (auto v : vertices_)
        z[v] = inv_diag_[v] * r[v];
    tally(counter, vertices_.size());
}

Preconditioner build_identity_preconditioner(const CondensedSystem& sys)
{
    Preconditioner pc;
    pc.kind_ = PreconditionerKind::identity;
    pc.n_    = sys.size();
    return pc;
}

Preconditioner build_diagonal_preconditioner(const CondensedSystem& sys)
{
    if (sys.variant() == OperatorVariant::tpt)
        throw std::invalid_argument("diagonal preconditioner needs the untransformed system");
    Preconditioner pc;
    pc.kind_     = PreconditionerKind::diagonal;
    pc.n_        = sys.size();
    pc.inv_diag_ = checked_reciprocal(sys.assembled_diagonal(), "diagonal preconditioner");
    return pc;
}

Preconditioner build_transformed_diagonal_preconditioner(const CondensedSystem& sys)
{
    if (sys.variant() != OperatorVariant::tpt)
        throw std::invalid_argument("transformed diagonal preconditioner needs the TPT system");
    Preconditioner pc;
    pc.kind_     = PreconditionerKind::transformed_diagonal;
    pc.n_        = sys.size();
    pc.inv_diag_ = checked_reciprocal(sys.assembled_diagonal(), "transformed diagonal preconditioner");
    return pc;
}

Preconditioner build_block_preconditioner(const CondensedSystem& sys)
{
    if (sys.variant() == OperatorVariant::tpt)
        throw std::invalid_argument("block preconditioner needs the untransformed system");
    const auto& ref  = sys.ref();
    const auto& dofs = sys.dofs();
    const auto& geom = sys.geometries();
    const auto  ng   = geom.extents.size();

    Preconditioner pc;
    pc.kind_     = PreconditionerKind::block;
    pc.n_        = sys.size();
    pc.ref_      = sys.ref_ptr();
    pc.inv_diag_ = checked_reciprocal(sys.assembled_diagonal(), "block preconditioner");

    // Face self-blocks are diagonal in the transformed basis: their
    // eigenvalues are the transformed assembled diagonal.
    std::vector<std::vector<double>> tdiag_geom;
    std::vector<std::array<Matrix, 12>> edge_geom;
    for (std::size_t g = 0; g < ng; ++g)
    {
        const FullElementOperator op{sys.ref_ptr(), sys.metric(g)};
        tdiag_geom.push_back(condensed_diagonal(CondensedTpt(op)));
        std::array<Matrix, 12> blocks;
        for (int q = 0; q < 12; ++q)
            blocks[static_cast<std::size_t>(q)] = element_edge_block(ref, op.metric, q);
        edge_geom.push_back(std::move(blocks));
    }

    std::vector<double>      tdiag(sys.size(), 0.0);
    std::vector<std::int64_t> edge_of(sys.size(), -1);
    for (const auto& ent : dofs.entities)
    {
        if (ent.kind == EntityKind::edge)
        {
            edge_of[ent.offset] = static_cast<std::int64_t>(pc.edges_.size());
            pc.edges_.push_back(ent);
        }
        else if (ent.kind == EntityKind::face)
            pc.faces_.push_back(ent);
        else
            pc.vertices_.push_back(ent.offset);
    }
    std::vector<Matrix> edge_sum(pc.edges_.size(), Matrix(ref.ni, ref.ni));

    for (std::size_t e = 0; e < geom.element_geometry.size(); ++e)
    {
        const auto g   = geom.element_geometry[e];
        const auto idx = dofs.condensed.element(e);
        for (std::size_t b = 0; b < idx.size(); ++b)
            tdiag[idx[b]] += tdiag_geom[g][b];
        for (int q = 0; q < 12; ++q)
        {
            const auto first = idx[ref.edge_offset(q)];
            const auto k     = edge_of[first];
            if (k < 0)
                throw std::logic_error("block preconditioner: element edge does not start a global edge");
            auto&       dst = edge_sum[static_cast<std::size_t>(k)];
            const auto& src = edge_geom[g][static_cast<std::size_t>(q)];
            for (std::size_t i = 0; i < ref.ni; ++i)
                for (std::size_t j = 0; j < ref.ni; ++j)
                    dst(i, j) += src(i, j);
        }
    }

    for (const auto& ent : pc.faces_)
    {
        std::vector<double> w(ent.size);
        for (std::size_t i = 0; i < ent.size; ++i)
        {
            const double v = tdiag[ent.offset + i];
            if (!(v > 0.0))
                throw std::runtime_error("block preconditioner: singular face block");
            w[i] = 1.0 / v;
        }
        pc.face_inv_eig_.push_back(std::move(w));
    }
    for (auto& blk : edge_sum)
        pc.edge_inv_.push_back(LuFactorization(std::move(blk)).inverse());
    return pc;
}

OperatorVariant SolverConfig::bound_variant() const
{
    if (operator_variant)
        return *operator_variant;
    return kind == SolverKind::bt ? OperatorVariant::tpt : OperatorVariant::tpc;
}

void SolverConfig::validate() const
{
    if (!(tolerance > 0.0 && tolerance < 1.0))
        throw std::invalid_argument("solver tolerance must lie in (0, 1)");
    if (max_iterations == 0)
        throw std::invalid_argument("max_iterations must be positive");
    const auto v = bound_variant();
    if (kind == SolverKind::bt && v != OperatorVariant::tpt)
        throw std::invalid_argument("BT runs on the transformed (TPT) system");
    if ((kind == SolverKind::dc || kind == SolverKind::bc) && v == OperatorVariant::tpt)
        throw std::invalid_argument(to_string(kind) + " runs on the untransformed system");
}

SolveReport cg_solve(const OperatorFn& apply, const PrecondFn& precond, std::span<const double> rhs,
                     std::span<double> x, std::span<const std::uint8_t> mask, double tolerance,
                     std::size_t max_iterations, SolveCounters* counters)
{
    const auto n = rhs.size();
    if (x.size() != n || mask.size() != n)
        throw std::invalid_argument("cg_solve: vector length mismatch");
    MulCounter* vc = counters ? &counters->vector_ops : nullptr;

    SolveReport         rep;
    std::vector<double> r(n), z(n), p(n), q(n);

    auto true_residual = [&](std::vector<double>& out) {
        apply(x, out);
        for (std::size_t i = 0; i < n; ++i)
            out[i] = rhs[i] - out[i];
        mask_out(out, mask);
        return std::sqrt(dot(out, out));
    };

    const double r0 = true_residual(r);
    tally(vc, n);
    rep.initial_residual = r0;
    rep.residual_history.push_back(r0);
    rep.final_true_residual = r0;
    if (r0 == 0.0)
    {
        rep.converged = true;
        return rep;
    }
    const double target = tolerance * r0;

    auto restart = [&]() {
        precond(r, z);
        mask_out(z, mask);
        p = z;
        tally(vc, n);
        return dot(r, z);
    };
    double rz = restart();

    while (rep.iterations < max_iterations)
    {
        apply(p, q);
        mask_out(q, mask);
        const double pq = dot(p, q);
        if (!(pq > 0.0))
        {
            rep.breakdown = true;
            break;
        }
        const double a = rz / pq;
        for (std::size_t i = 0; i < n; ++i)
        {
            x[i] += a * p[i];
            r[i] -= a * q[i];
        }
        ++rep.iterations;
        const double rn = std::sqrt(dot(r, r));
        tally(vc, 5 * n);
        rep.residual_history.push_back(rn);

        if (rn <= target)
        {
            std::vector<double> t(n);
            const double        tn = true_residual(t);
            rep.final_true_residual = tn;
            if (tn <= target)
            {
                rep.converged = true;
                return rep;
            }
            r  = std::move(t);
            rz = restart();
            continue;
        }

        precond(r, z);
        mask_out(z, mask);
        const double rz_new = dot(r, z);
        const double beta   = rz_new / rz;
        rz                  = rz_new;
        for (std::size_t i = 0; i < n; ++i)
            p[i] = z[i] + beta * p[i];
        tally(vc, 2 * n);
    }
    std::vector<double> t(n);
    rep.final_true_residual = true_residual(t);
    rep.converged           = rep.final_true_residual <= target;
    return rep;
}

SolveResult solve_helmholtz(const HelmholtzProblem& problem, const CartesianMesh& mesh, int p,
                            const SolverConfig& config)
{
    config.validate();
    if (!problem.rhs || !problem.dirichlet)
        throw std::invalid_argument("solve_helmholtz: problem needs rhs and Dirichlet evaluators");
    const auto t_start = Clock::now();

    SolveResult res;
    auto        ref = make_reference_element(p);
    res.dofs        = build_dof_maps(mesh, p, problem.sides);
    res.coordinates = node_coordinates(mesh, res.dofs, ref->basis.nodes);
    const auto& dofs = res.dofs;
    const auto  n    = ref->n;
    const auto  nb   = ref->nb;
    const auto  ne   = mesh.n_elements();

    const auto variant     = config.bound_variant();
    const bool transformed = variant == OperatorVariant::tpt;
    const CondensedSystem sys(mesh, dofs, ref, problem.lambda, variant, {config.parallel, config.mmc_mem_cap});

    Preconditioner pc;
    switch (config.kind)
    {
    case SolverKind::uc: pc = build_identity_preconditioner(sys); break;
    case SolverKind::dc: pc = build_diagonal_preconditioner(sys); break;
    case SolverKind::bc: pc = build_block_preconditioner(sys); break;
    case SolverKind::bt: pc = build_transformed_diagonal_preconditioner(sys); break;
    }
    const TransformContext ctx(ref);

    // Element load vectors (transformed for the TPT pipeline) and their condensation.
    const auto&         geom = sys.geometries();
    std::vector<Field3> loads(ne);
    std::vector<double> condensed_local(ne * nb);
    for (std::size_t e = 0; e < ne; ++e)
    {
        const auto   h     = mesh.extents(e);
        const double scale = h[0] * h[1] * h[2] / 8.0;
        const auto   idx   = dofs.full.element(e);
        const auto&  m     = ref->basis.mass;
        Field3       f(ref->full_dims());
        for (std::size_t k = 0; k < n; ++k)
            for (std::size_t j = 0; j < n; ++j)
                for (std::size_t i = 0; i < n; ++i)
                    f(i, j, k) = scale * m[i] * m[j] * m[k] * problem.rhs(res.coordinates[idx[i + n * (j + n * k)]]);
        const auto g = geom.element_geometry[e];
        std::vector<double> fb;
        if (transformed)
        {
            f  = ctx.rhs(f);
            fb = condense_rhs(sys.tpt(g), f);
        }
        else
            fb = condense_rhs(sys.tpc(g), f);
        std::copy(fb.begin(), fb.end(), condensed_local.begin() + static_cast<std::ptrdiff_t>(e * nb));
        loads[e] = std::move(f);
    }
    std::vector<double> b(sys.size());
    gather(dofs.condensed, condensed_local, b);

    // Lifting: Dirichlet values in the initial guess.
    std::vector<double>       x(sys.size(), 0.0);
    std::span<const std::uint8_t> mask(dofs.dirichlet.data(), sys.size());
    for (std::size_t i = 0; i < sys.size(); ++i)
        if (mask[i])
            x[i] = problem.dirichlet(res.coordinates[i]);
    if (transformed)
    {
        std::vector<double> tmp;
        for (const auto& ent : dofs.entities)
        {
            if (!ent.dirichlet || ent.kind == EntityKind::vertex)
                continue;
            tmp.resize(ent.size);
            ctx.entity(TransformContext::Kind::forward, ent.kind, std::span<const double>(x).subspan(ent.offset, ent.size),
                       tmp);
            std::copy(tmp.begin(), tmp.end(), x.begin() + static_cast<std::ptrdiff_t>(ent.offset));
        }
    }
    res.report.setup_seconds = seconds_since(t_start);

    const auto t_solve = Clock::now();
    SolveCounters counters;
    const OperatorFn op = [&](std::span<const double> in, std::span<double> out) {
        sys.apply(in, out, &counters.operator_apply);
    };
    const PrecondFn prec = [&](std::span<const double> in, std::span<double> out) {
        pc.apply(in, out, &counters.preconditioner);
    };
    auto report = cg_solve(op, prec, b, x, mask, config.tolerance, config.max_iterations, &counters);
    report.counters      = counters;
    report.setup_seconds = res.report.setup_seconds;
    report.solve_seconds = seconds_since(t_solve);

    // Interior recovery (and back transform).
    res.u.assign(dofs.n_full, 0.0);
    std::copy(x.begin(), x.end(), res.u.begin());
    std::vector<double> ub(nb);
    for (std::size_t e = 0; e < ne; ++e)
    {
        const auto cidx = dofs.condensed.element(e);
        for (std::size_t i = 0; i < nb; ++i)
            ub[i] = x[cidx[i]];
        const auto g    = geom.element_geometry[e];
        const auto fidx = dofs.full.element(e);
        if (transformed)
        {
            const Field3 ui = recover_interior(sys.tpt(g), loads[e], ub);
            const Field3 ue = ctx.backward(combine(*ref, ub, ui));
            for (std::size_t l = 0; l < fidx.size(); ++l)
                res.u[fidx[l]] = ue.data()[l];
        }
        else
        {
            const Field3 ui = recover_interior(sys.tpc(g), loads[e], ub);
            for (std::size_t l = 0; l < ref->classes.interior.size(); ++l)
                res.u[fidx[ref->classes.interior[l]]] = ui.data()[l];
        }
    }
    report.total_seconds = seconds_since(t_start);
    res.report           = std::move(report);
    return res;
}

} // namespace sem
