#include "sem/operators.hpp"

#include <cblas.h>

#include <algorithm>
#include <stdexcept>
#include <string>

namespace sem
{

namespace
{

std::array<std::size_t, 3> unpack(std::size_t local, std::size_t n) noexcept
{
    return {local % n, (local / n) % n, local / (n * n)};
}

/// Tangential axes of a face with normal `a`, lower direction first.
std::array<Axis, 2> tangential(std::size_t a) noexcept
{
    switch (a)
    {
    case 0: return {Axis::x2, Axis::x3};
    case 1: return {Axis::x1, Axis::x3};
    default: return {Axis::x1, Axis::x2};
    }
}

template <typename NonZero>
PrimaryStencil build_stencil(const ReferenceElement& ref, std::span<const double> mass, const Matrix& stiffness,
                             NonZero nonzero)
{
    const std::size_t n = ref.n;
    PrimaryStencil    st;
    st.weights.resize(ref.nb);
    for (auto& d : st.direction)
        d.row_start.assign(1, 0);

    for (std::size_t b = 0; b < ref.nb; ++b)
    {
        const auto ijk = unpack(ref.boundary[b], n);
        const double mi = mass[ijk[0]];
        const double mj = mass[ijk[1]];
        const double mk = mass[ijk[2]];
        st.weights[b]   = {mi * mj * mk, mj * mk, mi * mk, mi * mj};
        for (std::size_t a = 0; a < 3; ++a)
        {
            auto& dir = st.direction[a];
            for (std::size_t l = 0; l < n; ++l)
            {
                if (!nonzero(ijk[a], l))
                    continue;
                auto nb  = ijk;
                nb[a]    = l;
                const auto pos = ref.local_to_boundary[nb[0] + n * (nb[1] + n * nb[2])];
                if (pos < 0)
                    continue;
                dir.column.push_back(static_cast<std::uint32_t>(pos));
                dir.value.push_back(stiffness(ijk[a], l));
            }
            dir.row_start.push_back(static_cast<std::uint32_t>(dir.column.size()));
        }
    }
    return st;
}

/// vb = H_BB ub through the boundary stencil.
void apply_primary(const PrimaryStencil& st, const MetricCoefficients& metric, std::span<const double> ub,
                   std::span<double> vb, MulCounter* counter)
{
    const auto&       d  = metric.d;
    const std::size_t nb = st.weights.size();
    for (std::size_t b = 0; b < nb; ++b)
    {
        std::array<double, 3> s{};
        for (std::size_t a = 0; a < 3; ++a)
        {
            const auto& dir = st.direction[a];
            double      acc = 0.0;
            for (auto q = dir.row_start[b]; q < dir.row_start[b + 1]; ++q)
                acc += dir.value[q] * ub[dir.column[q]];
            s[a] = acc;
        }
        const auto& w = st.weights[b];
        vb[b]         = (d[0] * w[0]) * ub[b] + (d[1] * w[1]) * s[0] + (d[2] * w[2]) * s[1] + (d[3] * w[3]) * s[2];
    }
    if (counter)
    {
        std::uint64_t nnz = 0;
        for (const auto& dir : st.direction)
            nnz += dir.column.size();
        counter->add(8 * nb + nnz);
    }
}

void require_size(std::span<const double> v, std::size_t n, const char* what)
{
    if (v.size() != n)
        throw std::invalid_argument(std::string(what) + ": expected length " + std::to_string(n) + ", got " +
                                    std::to_string(v.size()));
}

void scale_by(std::span<double> v, std::span<const double> s, MulCounter* c)
{
    for (std::size_t i = 0; i < v.size(); ++i)
        v[i] *= s[i];
    tally(c, v.size());
}

std::vector<double> reciprocal(const Field3& d)
{
    std::vector<double> r(d.size());
    for (std::size_t i = 0; i < r.size(); ++i)
        r[i] = 1.0 / d.data()[i];
    return r;
}

void check_degree(const FullElementOperator& op)
{
    if (!op.ref)
        throw std::invalid_argument("element operator without reference element");
}

} // namespace

std::shared_ptr<const ReferenceElement> make_reference_element(int p)
{
    if (p < 2)
        throw std::invalid_argument("make_reference_element: degree must be >= 2, got " + std::to_string(p));
    auto ref         = std::make_shared<ReferenceElement>();
    ref->p           = p;
    ref->n           = static_cast<std::size_t>(p) + 1;
    ref->ni          = static_cast<std::size_t>(p) - 1;
    ref->basis       = build_basis(p);
    ref->eig         = interior_eigendecomposition(ref->basis);
    ref->transformed = transformed_matrices(ref->basis, ref->eig);
    ref->classes     = classify_dofs(p);
    ref->boundary    = ref->classes.boundary();
    ref->nb          = ref->boundary.size();

    ref->local_to_boundary.assign(ref->n * ref->n * ref->n, -1);
    for (std::size_t b = 0; b < ref->nb; ++b)
        ref->local_to_boundary[ref->boundary[b]] = static_cast<std::int64_t>(b);

    const std::size_t ni = ref->ni;
    ref->s               = ref->eig.transform;
    ref->st              = ref->s.transpose();
    ref->s_mass          = Matrix(ni, ni);
    for (std::size_t a = 0; a < ni; ++a)
        for (std::size_t j = 0; j < ni; ++j)
            ref->s_mass(a, j) = ref->s(a, j) * ref->basis.mass[j + 1];
    ref->mass_st = ref->s_mass.transpose();
    for (std::size_t side = 0; side < 2; ++side)
    {
        const std::size_t end = side == 0 ? 0 : ref->n - 1;
        ref->s_k_end[side].assign(ni, 0.0);
        for (std::size_t a = 0; a < ni; ++a)
            for (std::size_t j = 0; j < ni; ++j)
                ref->s_k_end[side][a] += ref->s(a, j) * ref->basis.stiffness(j + 1, end);
    }

    const std::size_t last = ref->n - 1;
    ref->primary           = build_stencil(*ref, ref->basis.mass, ref->basis.stiffness,
                                           [](std::size_t, std::size_t) { return true; });
    ref->primary_transformed =
        build_stencil(*ref, ref->transformed.mass, ref->transformed.stiffness, [last](std::size_t i, std::size_t l) {
            return i == l || i == 0 || i == last || l == 0 || l == last;
        });
    return ref;
}

Field3 apply_full(const FullElementOperator& op, const Field3& u, MulCounter* counter)
{
    check_degree(op);
    const auto& ref = *op.ref;
    if (u.dims() != ref.full_dims())
        throw std::invalid_argument("apply_full: field dims must be (p+1)^3");
    const auto& m = ref.basis.mass;
    const auto& K = ref.basis.stiffness;
    const auto& d = op.metric.d;
    const auto  n = ref.n;

    const Field3 k1 = apply_axis(K, Axis::x1, u, counter);
    const Field3 k2 = apply_axis(K, Axis::x2, u, counter);
    const Field3 k3 = apply_axis(K, Axis::x3, u, counter);
    Field3       out(u.dims());
    for (std::size_t k = 0; k < n; ++k)
        for (std::size_t j = 0; j < n; ++j)
            for (std::size_t i = 0; i < n; ++i)
                out(i, j, k) = d[0] * m[i] * m[j] * m[k] * u(i, j, k) + d[1] * m[j] * m[k] * k1(i, j, k) +
                               d[2] * m[i] * m[k] * k2(i, j, k) + d[3] * m[i] * m[j] * k3(i, j, k);
    tally(counter, 13 * volume(u.dims()));
    return out;
}

Matrix dense_element_matrix(const FullElementOperator& op)
{
    check_degree(op);
    const auto& ref = *op.ref;
    const auto& m   = ref.basis.mass;
    const auto& K   = ref.basis.stiffness;
    const auto& d   = op.metric.d;
    const auto  n   = ref.n;
    auto        at  = [n](std::size_t i, std::size_t j, std::size_t k) { return i + n * (j + n * k); };

    Matrix h(n * n * n, n * n * n);
    for (std::size_t k = 0; k < n; ++k)
        for (std::size_t j = 0; j < n; ++j)
            for (std::size_t i = 0; i < n; ++i)
            {
                const auto r = at(i, j, k);
                h(r, r) += d[0] * m[i] * m[j] * m[k];
                for (std::size_t l = 0; l < n; ++l)
                {
                    h(r, at(l, j, k)) += d[1] * K(i, l) * m[j] * m[k];
                    h(r, at(i, l, k)) += d[2] * m[i] * K(j, l) * m[k];
                    h(r, at(i, j, l)) += d[3] * m[i] * m[j] * K(k, l);
                }
            }
    return h;
}

Matrix schur_dense(const FullElementOperator& op)
{
    check_degree(op);
    const auto& ref = *op.ref;
    if (ref.p > 8)
        throw std::invalid_argument("schur_dense: oracle limited to p <= 8");
    const Matrix h   = dense_element_matrix(op);
    const auto&  bnd = ref.boundary;
    const auto&  in  = ref.classes.interior;

    auto pick = [&h](const std::vector<std::size_t>& rows, const std::vector<std::size_t>& cols) {
        Matrix out(rows.size(), cols.size());
        for (std::size_t i = 0; i < rows.size(); ++i)
            for (std::size_t j = 0; j < cols.size(); ++j)
                out(i, j) = h(rows[i], cols[j]);
        return out;
    };
    const Matrix hbb = pick(bnd, bnd);
    const Matrix hbi = pick(bnd, in);
    const Matrix hib = pick(in, bnd);
    const LuFactorization lu(pick(in, in));
    return hbb - hbi * lu.solve(hib);
}

Field3 eigenspace_diagonal(const ReferenceElement& ref, const MetricCoefficients& metric)
{
    const auto& l = ref.eig.lambda;
    return diag3_build(l, l, l, metric.d);
}

Field3 interior_inverse_apply(const ReferenceElement& ref, const MetricCoefficients& metric, const Field3& r,
                              MulCounter* counter)
{
    if (r.dims() != ref.interior_dims())
        throw std::invalid_argument("interior_inverse_apply: field dims must be (p-1)^3");
    const Field3 diag = eigenspace_diagonal(ref, metric);
    Field3       t    = kron3_apply(ref.s, ref.s, ref.s, r, counter);
    for (std::size_t i = 0; i < t.size(); ++i)
        t.data()[i] /= diag.data()[i];
    tally(counter, t.size());
    return kron3_apply(ref.st, ref.st, ref.st, t, counter);
}

OperatorWorkspace::OperatorWorkspace(const ReferenceElement& ref)
    : eigenspace(ref.ni * ref.ni * ref.ni), face_a(ref.ni * ref.ni), face_b(ref.ni * ref.ni), column(ref.ni, 1),
      row(1, ref.ni)
{}

CondensedTpc::CondensedTpc(const FullElementOperator& op) : op_(op)
{
    check_degree(op);
    inv_diag_ = reciprocal(eigenspace_diagonal(*op.ref, op.metric));
}

void CondensedTpc::faces_to_eigenspace(std::span<const double> ub, std::span<double> acc, OperatorWorkspace& ws,
                                       MulCounter* c) const
{
    const auto& ref = *op_.ref;
    const auto  ni  = ref.ni;
    for (int f = 0; f < 6; ++f)
    {
        const auto  a    = static_cast<std::size_t>(f / 2);
        const auto  tang = tangential(a);
        const Dims3 fd   = ref.face_dims(f);
        const auto  in   = ub.subspan(ref.face_offset(f), ni * ni);
        apply_axis(ref.s_mass, tang[0], in, fd, ws.face_a, false, c);
        apply_axis(ref.s_mass, tang[1], ws.face_a, fd, ws.face_b, false, c);
        const auto& g    = ref.s_k_end[static_cast<std::size_t>(f % 2)];
        const double da  = op_.metric.d[a + 1];
        for (std::size_t q = 0; q < ni; ++q)
            ws.column(q, 0) = da * g[q];
        tally(c, ni);
        apply_axis(ws.column, static_cast<Axis>(a), ws.face_b, fd, acc, true, c);
    }
}

void CondensedTpc::eigenspace_to_faces(std::span<const double> v, std::span<double> vb, double scale,
                                       OperatorWorkspace& ws, MulCounter* c) const
{
    const auto& ref = *op_.ref;
    const auto  ni  = ref.ni;
    for (int f = 0; f < 6; ++f)
    {
        const auto   a    = static_cast<std::size_t>(f / 2);
        const auto   tang = tangential(a);
        const Dims3  fd   = ref.face_dims(f);
        const auto&  g    = ref.s_k_end[static_cast<std::size_t>(f % 2)];
        const double da   = scale * op_.metric.d[a + 1];
        for (std::size_t q = 0; q < ni; ++q)
            ws.row(0, q) = da * g[q];
        tally(c, ni + 1);
        apply_axis(ws.row, static_cast<Axis>(a), v, ref.interior_dims(), ws.face_a, false, c);
        apply_axis(ref.mass_st, tang[0], ws.face_a, fd, ws.face_b, false, c);
        apply_axis(ref.mass_st, tang[1], ws.face_b, fd, vb.subspan(ref.face_offset(f), ni * ni), true, c);
    }
}

void CondensedTpc::apply(std::span<const double> ub, std::span<double> vb, OperatorWorkspace& ws,
                         OpCounters* counters) const
{
    const auto& ref = *op_.ref;
    require_size(ub, ref.nb, "CondensedTpc::apply input");
    require_size(vb, ref.nb, "CondensedTpc::apply output");
    MulCounter* cp = counters ? &counters->primary : nullptr;
    MulCounter* cc = counters ? &counters->condensed : nullptr;

    apply_primary(ref.primary, op_.metric, ub, vb, cp);
    std::fill(ws.eigenspace.begin(), ws.eigenspace.end(), 0.0);
    faces_to_eigenspace(ub, ws.eigenspace, ws, cc);
    scale_by(ws.eigenspace, inv_diag_, cc);
    eigenspace_to_faces(ws.eigenspace, vb, -1.0, ws, cc);
}

CondensedTpt::CondensedTpt(const FullElementOperator& op) : op_(op)
{
    check_degree(op);
    inv_diag_ = reciprocal(eigenspace_diagonal(*op.ref, op.metric));
}

void CondensedTpt::faces_to_eigenspace(std::span<const double> ub, std::span<double> acc, OperatorWorkspace& ws,
                                       MulCounter* c) const
{
    const auto& ref = *op_.ref;
    const auto  ni  = ref.ni;
    for (int f = 0; f < 6; ++f)
    {
        const auto   a  = static_cast<std::size_t>(f / 2);
        const auto&  g  = ref.s_k_end[static_cast<std::size_t>(f % 2)];
        const double da = op_.metric.d[a + 1];
        for (std::size_t q = 0; q < ni; ++q)
            ws.column(q, 0) = da * g[q];
        tally(c, ni);
        apply_axis(ws.column, static_cast<Axis>(a), ub.subspan(ref.face_offset(f), ni * ni), ref.face_dims(f), acc,
                   true, c);
    }
}

void CondensedTpt::eigenspace_to_faces(std::span<const double> v, std::span<double> vb, double scale,
                                       OperatorWorkspace& ws, MulCounter* c) const
{
    const auto& ref = *op_.ref;
    const auto  ni  = ref.ni;
    for (int f = 0; f < 6; ++f)
    {
        const auto   a  = static_cast<std::size_t>(f / 2);
        const auto&  g  = ref.s_k_end[static_cast<std::size_t>(f % 2)];
        const double da = scale * op_.metric.d[a + 1];
        for (std::size_t q = 0; q < ni; ++q)
            ws.row(0, q) = da * g[q];
        tally(c, ni + 1);
        apply_axis(ws.row, static_cast<Axis>(a), v, ref.interior_dims(), vb.subspan(ref.face_offset(f), ni * ni), true,
                   c);
    }
}

void CondensedTpt::apply(std::span<const double> ub, std::span<double> vb, OperatorWorkspace& ws,
                         OpCounters* counters) const
{
    const auto& ref = *op_.ref;
    require_size(ub, ref.nb, "CondensedTpt::apply input");
    require_size(vb, ref.nb, "CondensedTpt::apply output");
    MulCounter* cp = counters ? &counters->primary : nullptr;
    MulCounter* cc = counters ? &counters->condensed : nullptr;

    apply_primary(ref.primary_transformed, op_.metric, ub, vb, cp);
    std::fill(ws.eigenspace.begin(), ws.eigenspace.end(), 0.0);
    faces_to_eigenspace(ub, ws.eigenspace, ws, cc);
    scale_by(ws.eigenspace, inv_diag_, cc);
    eigenspace_to_faces(ws.eigenspace, vb, -1.0, ws, cc);
}

CondensedMmc::CondensedMmc(const FullElementOperator& op) : ref_(op.ref)
{
    check_degree(op);
    const std::size_t  nb = ref_->nb;
    const CondensedTpc tpc(op);
    OperatorWorkspace  ws(*ref_);
    std::vector<double> unit(nb, 0.0);
    std::vector<double> col(nb);
    matrix_ = Matrix(nb, nb);
    for (std::size_t c = 0; c < nb; ++c)
    {
        unit[c] = 1.0;
        tpc.apply(unit, col, ws);
        unit[c] = 0.0;
        for (std::size_t r = 0; r < nb; ++r)
            matrix_(r, c) = col[r];
    }
}

void CondensedMmc::apply(std::span<const double> ub, std::span<double> vb, OpCounters* counters) const
{
    apply_batch(ub, vb, 1, counters);
}

void CondensedMmc::apply_batch(std::span<const double> ub, std::span<double> vb, std::size_t count,
                               OpCounters* counters) const
{
    const std::size_t nb = ref_->nb;
    require_size(ub, nb * count, "CondensedMmc::apply input");
    require_size(vb, nb * count, "CondensedMmc::apply output");
    const auto n = static_cast<int>(nb);
    // V (count x nb) = U (count x nb) * A^T, one matrix product for the batch.
    cblas_dgemm(CblasRowMajor, CblasNoTrans, CblasTrans, static_cast<int>(count), n, n, 1.0, ub.data(), n,
                matrix_.data().data(), n, 0.0, vb.data(), n);
    if (counters)
    {
        const std::uint64_t nf        = 6 * ref_->ni * ref_->ni;
        const std::uint64_t face_face = nf * nf;
        counters->condensed.add(face_face * count);
        counters->primary.add((static_cast<std::uint64_t>(nb) * nb - face_face) * count);
    }
}

std::vector<double> condense_rhs(const CondensedTpc& tpc, const Field3& f, MulCounter* counter)
{
    const auto& ref = *tpc.op().ref;
    auto        fb  = restrict_to_boundary(ref, f);
    Field3      e   = kron3_apply(ref.s, ref.s, ref.s, restrict_to_interior(ref, f), counter);
    scale_by(e.data(), tpc.inverse_diagonal(), counter);
    OperatorWorkspace ws(ref);
    tpc.eigenspace_to_faces(e.data(), fb, -1.0, ws, counter);
    return fb;
}

Field3 recover_interior(const CondensedTpc& tpc, const Field3& f, std::span<const double> ub, MulCounter* counter)
{
    const auto& ref = *tpc.op().ref;
    require_size(ub, ref.nb, "recover_interior boundary values");
    Field3            e = kron3_apply(ref.s, ref.s, ref.s, restrict_to_interior(ref, f), counter);
    OperatorWorkspace ws(ref);
    std::vector<double> acc(e.size(), 0.0);
    tpc.faces_to_eigenspace(ub, acc, ws, counter);
    for (std::size_t i = 0; i < acc.size(); ++i)
        e.data()[i] -= acc[i];
    scale_by(e.data(), tpc.inverse_diagonal(), counter);
    return kron3_apply(ref.st, ref.st, ref.st, e, counter);
}

std::vector<double> condense_rhs(const CondensedTpt& tpt, const Field3& f, MulCounter* counter)
{
    const auto& ref = *tpt.op().ref;
    auto        fb  = restrict_to_boundary(ref, f);
    Field3      e   = restrict_to_interior(ref, f);
    scale_by(e.data(), tpt.inverse_diagonal(), counter);
    OperatorWorkspace ws(ref);
    tpt.eigenspace_to_faces(e.data(), fb, -1.0, ws, counter);
    return fb;
}

Field3 recover_interior(const CondensedTpt& tpt, const Field3& f, std::span<const double> ub, MulCounter* counter)
{
    const auto& ref = *tpt.op().ref;
    require_size(ub, ref.nb, "recover_interior boundary values");
    Field3            e = restrict_to_interior(ref, f);
    OperatorWorkspace ws(ref);
    std::vector<double> acc(e.size(), 0.0);
    tpt.faces_to_eigenspace(ub, acc, ws, counter);
    for (std::size_t i = 0; i < acc.size(); ++i)
        e.data()[i] -= acc[i];
    scale_by(e.data(), tpt.inverse_diagonal(), counter);
    return e;
}

TransformContext::TransformContext(std::shared_ptr<const ReferenceElement> ref) : ref_(std::move(ref))
{
    const auto n  = ref_->n;
    const auto ni = ref_->ni;
    interior_     = {ref_->s_mass, ref_->st, ref_->s};
    auto pad      = [&](const Matrix& inner) {
        Matrix m(n, n);
        m(0, 0)         = 1.0;
        m(n - 1, n - 1) = 1.0;
        for (std::size_t i = 0; i < ni; ++i)
            for (std::size_t j = 0; j < ni; ++j)
                m(i + 1, j + 1) = inner(i, j);
        return m;
    };
    forward_  = pad(interior_[0]);
    backward_ = pad(interior_[1]);
    rhs_      = pad(interior_[2]);
}

Field3 TransformContext::forward(const Field3& u) const { return kron3_apply(forward_, forward_, forward_, u); }
Field3 TransformContext::backward(const Field3& ut) const { return kron3_apply(backward_, backward_, backward_, ut); }
Field3 TransformContext::rhs(const Field3& f) const { return kron3_apply(rhs_, rhs_, rhs_, f); }

const Matrix& TransformContext::interior_matrix(Kind kind) const noexcept
{
    return interior_[static_cast<std::size_t>(kind)];
}

void TransformContext::entity(Kind kind, EntityKind entity, std::span<const double> in, std::span<double> out) const
{
    const Matrix& t  = interior_matrix(kind);
    const auto    ni = ref_->ni;
    switch (entity)
    {
    case EntityKind::vertex: out[0] = in[0]; break;
    case EntityKind::edge:
        for (std::size_t r = 0; r < ni; ++r)
        {
            double s = 0.0;
            for (std::size_t c = 0; c < ni; ++c)
                s += t(r, c) * in[c];
            out[r] = s;
        }
        break;
    case EntityKind::face: {
        std::vector<double> tmp(ni * ni);
        const Dims3         fd{ni, ni, 1};
        apply_axis(t, Axis::x1, in, fd, tmp, false, nullptr);
        apply_axis(t, Axis::x2, tmp, fd, out, false, nullptr);
        break;
    }
    }
}

void TransformContext::boundary(Kind kind, std::span<const double> in, std::span<double> out) const
{
    const auto& ref = *ref_;
    require_size(in, ref.nb, "TransformContext::boundary input");
    require_size(out, ref.nb, "TransformContext::boundary output");
    const auto ni = ref.ni;
    for (int f = 0; f < 6; ++f)
        entity(kind, EntityKind::face, in.subspan(ref.face_offset(f), ni * ni), out.subspan(ref.face_offset(f), ni * ni));
    for (int q = 0; q < 12; ++q)
        entity(kind, EntityKind::edge, in.subspan(ref.edge_offset(q), ni), out.subspan(ref.edge_offset(q), ni));
    for (std::size_t v = 0; v < 8; ++v)
        out[ref.vertex_offset() + v] = in[ref.vertex_offset() + v];
}

double estimate_mmc_memory(int p, std::size_t n_elements, std::size_t bytes_per_real)
{
    if (p < 2)
        throw std::invalid_argument("estimate_mmc_memory: degree must be >= 2");
    const double ni = p - 1;
    return 36.0 * ni * ni * ni * ni * static_cast<double>(bytes_per_real) * static_cast<double>(n_elements);
}

std::vector<double> restrict_to_boundary(const ReferenceElement& ref, const Field3& u)
{
    if (u.dims() != ref.full_dims())
        throw std::invalid_argument("restrict_to_boundary: field dims must be (p+1)^3");
    std::vector<double> b(ref.nb);
    for (std::size_t i = 0; i < ref.nb; ++i)
        b[i] = u.data()[ref.boundary[i]];
    return b;
}

Field3 restrict_to_interior(const ReferenceElement& ref, const Field3& u)
{
    if (u.dims() != ref.full_dims())
        throw std::invalid_argument("restrict_to_interior: field dims must be (p+1)^3");
    Field3 out(ref.interior_dims());
    for (std::size_t i = 0; i < ref.classes.interior.size(); ++i)
        out.data()[i] = u.data()[ref.classes.interior[i]];
    return out;
}

Field3 combine(const ReferenceElement& ref, std::span<const double> ub, const Field3& ui)
{
    require_size(ub, ref.nb, "combine boundary values");
    if (ui.dims() != ref.interior_dims())
        throw std::invalid_argument("combine: interior dims must be (p-1)^3");
    Field3 u(ref.full_dims());
    for (std::size_t i = 0; i < ref.nb; ++i)
        u.data()[ref.boundary[i]] = ub[i];
    for (std::size_t i = 0; i < ref.classes.interior.size(); ++i)
        u.data()[ref.classes.interior[i]] = ui.data()[i];
    return u;
}

namespace
{

std::vector<double> primary_diagonal(const ReferenceElement& ref, std::span<const double> mass, const Matrix& stiffness,
                                     const MetricCoefficients& metric)
{
    const auto&         d = metric.d;
    std::vector<double> diag(ref.nb);
    for (std::size_t b = 0; b < ref.nb; ++b)
    {
        const auto   ijk = unpack(ref.boundary[b], ref.n);
        const double mi  = mass[ijk[0]];
        const double mj  = mass[ijk[1]];
        const double mk  = mass[ijk[2]];
        diag[b]          = d[0] * mi * mj * mk + d[1] * stiffness(ijk[0], ijk[0]) * mj * mk +
                  d[2] * mi * stiffness(ijk[1], ijk[1]) * mk + d[3] * mi * mj * stiffness(ijk[2], ijk[2]);
    }
    return diag;
}

/// Index of an eigenspace entry given the coordinate along the face normal
/// and along the two tangential axes.
std::size_t eig_index(std::size_t ni, std::size_t a, std::size_t normal, std::size_t tb, std::size_t tc) noexcept
{
    switch (a)
    {
    case 0: return normal + ni * (tb + ni * tc);
    case 1: return tb + ni * (normal + ni * tc);
    default: return tb + ni * (tc + ni * normal);
    }
}

} // namespace

std::vector<double> condensed_diagonal(const CondensedTpc& tpc)
{
    const auto& ref  = *tpc.op().ref;
    const auto& d    = tpc.op().metric.d;
    const auto  ni   = ref.ni;
    auto        diag = primary_diagonal(ref, ref.basis.mass, ref.basis.stiffness, tpc.op().metric);
    const auto  invd = tpc.inverse_diagonal();

    std::vector<double> e(ni * ni), x(ni * ni);
    for (int f = 0; f < 6; ++f)
    {
        const auto  a = static_cast<std::size_t>(f / 2);
        const auto& g = ref.s_k_end[static_cast<std::size_t>(f % 2)];
        // e(beta, gamma) = sum_alpha g_alpha^2 / D
        for (std::size_t c = 0; c < ni; ++c)
            for (std::size_t b = 0; b < ni; ++b)
            {
                double s = 0.0;
                for (std::size_t q = 0; q < ni; ++q)
                    s += g[q] * g[q] * invd[eig_index(ni, a, q, b, c)];
                e[b + ni * c] = s;
            }
        // x(tb, gamma) = sum_beta (S M)_{beta, tb}^2 e(beta, gamma)
        for (std::size_t c = 0; c < ni; ++c)
            for (std::size_t tb = 0; tb < ni; ++tb)
            {
                double s = 0.0;
                for (std::size_t b = 0; b < ni; ++b)
                    s += ref.s_mass(b, tb) * ref.s_mass(b, tb) * e[b + ni * c];
                x[tb + ni * c] = s;
            }
        const double da2 = d[a + 1] * d[a + 1];
        for (std::size_t tc = 0; tc < ni; ++tc)
            for (std::size_t tb = 0; tb < ni; ++tb)
            {
                double s = 0.0;
                for (std::size_t c = 0; c < ni; ++c)
                    s += x[tb + ni * c] * ref.s_mass(c, tc) * ref.s_mass(c, tc);
                diag[ref.face_offset(f) + tb + ni * tc] -= da2 * s;
            }
    }
    return diag;
}

std::vector<double> condensed_diagonal(const CondensedTpt& tpt)
{
    const auto& ref  = *tpt.op().ref;
    const auto& d    = tpt.op().metric.d;
    const auto  ni   = ref.ni;
    auto        diag = primary_diagonal(ref, ref.transformed.mass, ref.transformed.stiffness, tpt.op().metric);
    const auto  invd = tpt.inverse_diagonal();
    for (int f = 0; f < 6; ++f)
    {
        const auto   a   = static_cast<std::size_t>(f / 2);
        const auto&  g   = ref.s_k_end[static_cast<std::size_t>(f % 2)];
        const double da2 = d[a + 1] * d[a + 1];
        for (std::size_t tc = 0; tc < ni; ++tc)
            for (std::size_t tb = 0; tb < ni; ++tb)
            {
                double s = 0.0;
                for (std::size_t q = 0; q < ni; ++q)
                    s += g[q] * g[q] * invd[eig_index(ni, a, q, tb, tc)];
                diag[ref.face_offset(f) + tb + ni * tc] -= da2 * s;
            }
    }
    return diag;
}

} // namespace sem
