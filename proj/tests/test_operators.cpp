#include "oracles.hpp"
#include "sem/operators.hpp"

#include <doctest.h>

#include <algorithm>
#include <numbers>
#include <random>

using namespace sem;
using oracle::Mat;
using oracle::Vec;

namespace
{

FullElementOperator make_op(int p, Extents h, double lambda)
{
    return FullElementOperator{make_reference_element(p), metric_coefficients(h, lambda)};
}

Extents random_extents(std::mt19937_64& rng)
{
    std::uniform_real_distribution<double> dist(0.05, 3.0);
    return {dist(rng), dist(rng), dist(rng)};
}

template <class Apply>
Mat columns(std::size_t n, Apply&& apply)
{
    Mat                 out(n, n);
    std::vector<double> e(n, 0.0), v(n);
    for (std::size_t c = 0; c < n; ++c)
    {
        e[c] = 1.0;
        apply(e, v);
        e[c] = 0.0;
        for (std::size_t r = 0; r < n; ++r)
            out(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = v[r];
    }
    return out;
}

double rel_diff(const Mat& a, const Mat& b)
{
    return (a - b).cwiseAbs().maxCoeff() / std::max(1e-300, b.cwiseAbs().maxCoeff());
}

double rel_diff(const Vec& a, const Vec& b)
{
    return (a - b).cwiseAbs().maxCoeff() / std::max(1e-300, b.cwiseAbs().maxCoeff());
}

Mat tpc_matrix(const CondensedTpc& tpc)
{
    OperatorWorkspace ws(*tpc.op().ref);
    return columns(tpc.op().ref->nb, [&](std::span<const double> u, std::span<double> v) { tpc.apply(u, v, ws); });
}

Mat tpt_matrix(const CondensedTpt& tpt)
{
    OperatorWorkspace ws(*tpt.op().ref);
    return columns(tpt.op().ref->nb, [&](std::span<const double> u, std::span<double> v) { tpt.apply(u, v, ws); });
}

Field3 random_field(Dims3 d, std::mt19937_64& rng) { return Field3(d, oracle::random_vector(d[0] * d[1] * d[2], rng)); }

Vec full_vec(const Field3& f) { return oracle::to_eigen(f.data()); }

} // namespace

TEST_CASE("apply_full")
{
    const auto op = make_op(3, {0.7, 1.3, 2.1}, 0.0);
    Field3     ones(op.ref->full_dims());
    for (auto& v : ones.data())
        v = 1.0;
    const Field3 z = apply_full(op, ones);
    for (double v : z.data())
        CHECK(std::abs(v) < 1e-13);

    const auto op2 = make_op(2, {2, 2, 2}, 0.0);
    Field3     hat(op2.ref->full_dims());
    hat(1, 1, 1) = 1.0;
    CHECK(apply_full(op2, hat)(1, 1, 1) == doctest::Approx(128.0 / 9.0).epsilon(1e-14));

    std::mt19937_64 rng(1);
    for (double lambda : {0.0, std::numbers::pi})
    {
        const auto   op3 = make_op(3, random_extents(rng), lambda);
        const Mat    H   = oracle::element_matrix(*op3.ref, op3.metric.d);
        const Field3 u   = random_field(op3.ref->full_dims(), rng);
        CHECK(rel_diff(full_vec(apply_full(op3, u)), Vec(H * full_vec(u))) < 1e-12);
        CHECK(rel_diff(oracle::to_eigen(dense_element_matrix(op3)), H) < 1e-13);
    }

    CHECK_THROWS_AS(apply_full(op, Field3({3, 3, 3})), std::invalid_argument);
}

TEST_CASE("schur_dense")
{
    std::mt19937_64 rng(2);
    for (int p : {2, 3, 5})
    {
        const auto op = make_op(p, random_extents(rng), 0.0);
        const Mat  S  = oracle::to_eigen(schur_dense(op));
        CHECK(rel_diff(S, Mat(S.transpose())) < 1e-11);
        const Vec one = Vec::Ones(S.cols());
        CHECK((S * one).cwiseAbs().maxCoeff() < 1e-10 * S.cwiseAbs().maxCoeff());
        CHECK(rel_diff(S, oracle::schur(*op.ref, oracle::element_matrix(*op.ref, op.metric.d))) < 1e-11);
    }
    CHECK_THROWS_AS(schur_dense(make_op(9, {1, 1, 1}, 0.0)), std::invalid_argument);
}

TEST_CASE("condensed variants agree with the dense Schur complement")
{
    std::mt19937_64 rng(3);
    for (int p : {2, 3, 4, 6})
        for (double lambda : {0.0, std::numbers::pi})
            for (int trial = 0; trial < 4; ++trial)
            {
                const Extents h  = trial == 0 ? Extents{2, 2, 2} : random_extents(rng);
                const auto    op = make_op(p, h, lambda);
                const Mat     S  = oracle::schur(*op.ref, oracle::element_matrix(*op.ref, op.metric.d));

                const CondensedTpc tpc(op);
                CHECK(rel_diff(tpc_matrix(tpc), S) < 1e-11);

                const CondensedMmc mmc(op);
                CHECK(rel_diff(oracle::to_eigen(mmc.matrix()), S) < 1e-11);
                const Mat m = columns(op.ref->nb, [&](std::span<const double> u, std::span<double> v) { mmc.apply(u, v); });
                CHECK(rel_diff(m, S) < 1e-11);

                const CondensedTpt tpt(op);
                const Mat          B = oracle::boundary_transform(*op.ref);
                CHECK(rel_diff(tpt_matrix(tpt), Mat(B * S * B.transpose())) < 1e-11);
            }
}

TEST_CASE("batched dense application matches single applications")
{
    std::mt19937_64    rng(4);
    const auto         op = make_op(4, random_extents(rng), 1.0);
    const CondensedMmc mmc(op);
    const std::size_t  nb = op.ref->nb;
    const auto         u  = oracle::random_vector(5 * nb, rng);
    std::vector<double> batch(5 * nb), single(nb);
    mmc.apply_batch(u, batch, 5);
    for (std::size_t k = 0; k < 5; ++k)
    {
        mmc.apply(std::span<const double>(u).subspan(k * nb, nb), single);
        for (std::size_t i = 0; i < nb; ++i)
            CHECK(batch[k * nb + i] == doctest::Approx(single[i]).epsilon(1e-13));
    }
}

TEST_CASE("transformed face self-coupling is diagonal")
{
    const auto         op = make_op(3, {0.4, 1.1, 2.5}, 0.5);
    const CondensedTpt tpt(op);
    const Mat          T  = tpt_matrix(tpt);
    const auto         ni = op.ref->ni;
    for (int f = 0; f < 6; ++f)
    {
        const auto o = static_cast<Eigen::Index>(op.ref->face_offset(f));
        const auto k = static_cast<Eigen::Index>(ni * ni);
        const Mat  block = T.block(o, o, k, k);
        const Mat  off   = block - Mat(block.diagonal().asDiagonal());
        CHECK(off.cwiseAbs().maxCoeff() < 1e-12 * block.cwiseAbs().maxCoeff());
    }
}

TEST_CASE("edge and vertex modes do not couple through the interior")
{
    std::mt19937_64 rng(5);
    for (int p : {2, 4})
    {
        const auto op = make_op(p, random_extents(rng), 1.0);
        const Mat  H  = oracle::element_matrix(*op.ref, op.metric.d);
        const Mat  S  = oracle::schur(*op.ref, H);
        const Mat  hbb = oracle::pick(H, op.ref->boundary, op.ref->boundary);
        const Mat  hib = oracle::pick(H, op.ref->classes.interior, op.ref->boundary);
        const auto first_edge = static_cast<Eigen::Index>(op.ref->edge_offset(0));
        const auto nb         = static_cast<Eigen::Index>(op.ref->nb);
        CHECK(hib.rightCols(nb - first_edge).cwiseAbs().maxCoeff() == 0.0);
        CHECK((S - hbb).rightCols(nb - first_edge).cwiseAbs().maxCoeff() < 1e-12 * hbb.cwiseAbs().maxCoeff());

        const CondensedTpc  tpc(op);
        OperatorWorkspace   ws(*op.ref);
        std::vector<double> u(op.ref->nb, 0.0), acc(op.ref->ni * op.ref->ni * op.ref->ni, 0.0);
        for (std::size_t i = op.ref->edge_offset(0); i < op.ref->nb; ++i)
            u[i] = 1.0;
        tpc.faces_to_eigenspace(u, acc, ws, nullptr);
        for (double v : acc)
            CHECK(v == 0.0);
    }
}

TEST_CASE("multiplication counts at p = 16")
{
    const int          p  = 16;
    const auto         op = make_op(p, {0.3, 0.5, 0.9}, 1.0);
    const double       ni = p - 1;
    const double       c  = 200.0;
    std::mt19937_64    rng(6);
    const auto         u = oracle::random_vector(op.ref->nb, rng);
    std::vector<double> v(op.ref->nb);
    OperatorWorkspace  ws(*op.ref);

    OpCounters tpc_count;
    CondensedTpc(op).apply(u, v, ws, &tpc_count);
    const auto tc = static_cast<double>(tpc_count.condensed.count);
    const auto tp = static_cast<double>(tpc_count.primary.count);
    MESSAGE("TPC condensed " << tc << " primary " << tp);
    CHECK(tc >= 37 * ni * ni * ni);
    CHECK(tc <= 37 * ni * ni * ni + c * ni * ni);
    CHECK(tp >= 12 * ni * ni * ni);
    CHECK(tp <= 12 * ni * ni * ni + c * ni * ni);

    OpCounters tpt_count;
    CondensedTpt(op).apply(u, v, ws, &tpt_count);
    const auto ttc = static_cast<double>(tpt_count.condensed.count);
    const auto ttp = static_cast<double>(tpt_count.primary.count);
    MESSAGE("TPT condensed " << ttc << " primary " << ttp);
    CHECK(ttc >= 13 * ni * ni * ni);
    CHECK(ttc <= 13 * ni * ni * ni + c * ni * ni);
    CHECK(ttp <= c * ni * ni);

    OpCounters mmc_count;
    CondensedMmc(op).apply(u, v, &mmc_count);
    CHECK(mmc_count.condensed.count == static_cast<std::uint64_t>(36 * ni * ni * ni * ni));
    CHECK(mmc_count.condensed.count + mmc_count.primary.count == op.ref->nb * op.ref->nb);
}

TEST_CASE("interior_inverse_apply")
{
    const auto op2 = make_op(2, {2, 2, 2}, 0.0);
    Field3     r({1, 1, 1});
    r(0, 0, 0) = 1.0;
    CHECK(interior_inverse_apply(*op2.ref, op2.metric, r)(0, 0, 0) == doctest::Approx(9.0 / 128.0).epsilon(1e-14));

    std::mt19937_64 rng(7);
    for (int p : {3, 5})
    {
        const auto   op  = make_op(p, random_extents(rng), p == 3 ? 0.0 : 2.0);
        const Mat    H   = oracle::element_matrix(*op.ref, op.metric.d);
        const auto&  in  = op.ref->classes.interior;
        const Mat    hii = oracle::pick(H, in, in);
        const Field3 rr  = random_field(op.ref->interior_dims(), rng);
        const Vec    w   = full_vec(interior_inverse_apply(*op.ref, op.metric, rr));
        CHECK(rel_diff(Vec(hii * w), full_vec(rr)) < 1e-10);
        CHECK(rel_diff(w, Vec(hii.ldlt().solve(full_vec(rr)))) < 1e-10);
    }

    CHECK_THROWS_AS(interior_inverse_apply(*op2.ref, MetricCoefficients{{-10, 1, 1, 1}}, r), std::domain_error);
    CHECK_THROWS_AS(interior_inverse_apply(*op2.ref, op2.metric, Field3({2, 2, 2})), std::invalid_argument);
}

TEST_CASE("condense_rhs and recover_interior")
{
    std::mt19937_64 rng(8);
    const auto      op  = make_op(3, random_extents(rng), 0.7);
    const auto&     ref = *op.ref;
    const Mat       H   = oracle::element_matrix(ref, op.metric.d);
    const auto&     B   = ref.boundary;
    const auto&     I   = ref.classes.interior;
    const Mat       hii = oracle::pick(H, I, I);
    const Mat       hbi = oracle::pick(H, B, I);
    const Mat       hib = oracle::pick(H, I, B);
    const CondensedTpc tpc(op);

    auto restrict_vec = [](const Vec& v, const std::vector<std::size_t>& idx) {
        Vec out(idx.size());
        for (std::size_t i = 0; i < idx.size(); ++i)
            out(static_cast<Eigen::Index>(i)) = v(static_cast<Eigen::Index>(idx[i]));
        return out;
    };

    // interior load zero: condensed load equals the boundary load
    Field3 fb = random_field(ref.full_dims(), rng);
    for (auto i : I)
        fb.data()[i] = 0.0;
    CHECK(rel_diff(oracle::to_eigen(condense_rhs(tpc, fb)), restrict_vec(full_vec(fb), B)) < 1e-14);

    const Field3 f  = random_field(ref.full_dims(), rng);
    const Field3 g  = random_field(ref.full_dims(), rng);
    const Vec    fv = full_vec(f);
    const Vec    want = restrict_vec(fv, B) - hbi * hii.ldlt().solve(restrict_vec(fv, I));
    CHECK(rel_diff(oracle::to_eigen(condense_rhs(tpc, f)), want) < 1e-11);

    Field3 combo(ref.full_dims());
    for (std::size_t i = 0; i < combo.size(); ++i)
        combo.data()[i] = 2.0 * f.data()[i] - 3.0 * g.data()[i];
    const Vec lin = 2.0 * oracle::to_eigen(condense_rhs(tpc, f)) - 3.0 * oracle::to_eigen(condense_rhs(tpc, g));
    CHECK(rel_diff(oracle::to_eigen(condense_rhs(tpc, combo)), lin) < 1e-12);

    // zero data gives zero interior
    const std::vector<double> zb(ref.nb, 0.0);
    const Field3 zi = recover_interior(tpc, Field3(ref.full_dims()), zb);
    for (double v : zi.data())
        CHECK(v == 0.0);

    // interior rows of the full system hold
    const auto ub = oracle::random_vector(ref.nb, rng);
    const Vec  ui = full_vec(recover_interior(tpc, f, ub));
    CHECK(rel_diff(Vec(hii * ui + hib * oracle::to_eigen(ub)), restrict_vec(fv, I)) < 1e-9);

    // full direct solve (lambda > 0, no constraints) vs condense then recover
    const Vec  u_full = H.ldlt().solve(fv);
    const Mat  S      = oracle::schur(ref, H);
    const Vec  u_b    = S.ldlt().solve(oracle::to_eigen(condense_rhs(tpc, f)));
    std::vector<double> u_b_std(u_b.data(), u_b.data() + u_b.size());
    CHECK(rel_diff(u_b, restrict_vec(u_full, B)) < 1e-10);
    CHECK(rel_diff(full_vec(recover_interior(tpc, f, u_b_std)), restrict_vec(u_full, I)) < 1e-10);

    // transformed pipeline on the same element
    const CondensedTpt     tpt(op);
    const TransformContext ctx(op.ref);
    const Field3           ft  = ctx.rhs(f);
    const Mat              St  = tpt_matrix(tpt);
    const Vec              utb = St.ldlt().solve(oracle::to_eigen(condense_rhs(tpt, ft)));
    std::vector<double>    utb_std(utb.data(), utb.data() + utb.size());
    const Field3           uti = recover_interior(tpt, ft, utb_std);
    const Field3           back = ctx.backward(combine(ref, utb_std, uti));
    CHECK(rel_diff(full_vec(back), u_full) < 1e-10);
}

TEST_CASE("element transforms")
{
    std::mt19937_64 rng(9);
    for (int p : {2, 3, 6})
    {
        const auto             ref = make_reference_element(p);
        const TransformContext ctx(ref);
        const Field3           u = random_field(ref->full_dims(), rng);

        CHECK(rel_diff(full_vec(ctx.backward(ctx.forward(u))), full_vec(u)) < 1e-12);
        CHECK(rel_diff(full_vec(ctx.forward(ctx.backward(u))), full_vec(u)) < 1e-12);

        // padded S keeps the end nodes, so element vertices are untouched
        for (auto kind : {TransformContext::Kind::forward, TransformContext::Kind::backward, TransformContext::Kind::rhs})
        {
            const Field3 t = kind == TransformContext::Kind::forward    ? ctx.forward(u)
                             : kind == TransformContext::Kind::backward ? ctx.backward(u)
                                                                        : ctx.rhs(u);
            for (auto v : ref->classes.vertices)
                CHECK(t.data()[v] == u.data()[v]);

            // boundary entities transform within themselves
            const auto          ub = restrict_to_boundary(*ref, u);
            std::vector<double> tb(ref->nb);
            ctx.boundary(kind, ub, tb);
            const auto want = restrict_to_boundary(*ref, t);
            for (std::size_t i = 0; i < ref->nb; ++i)
                CHECK(tb[i] == doctest::Approx(want[i]).epsilon(1e-13));

            const auto          ni = ref->ni;
            std::vector<double> out(ni * ni);
            ctx.entity(kind, EntityKind::face, std::span<const double>(ub).subspan(ref->face_offset(2), ni * ni), out);
            for (std::size_t i = 0; i < ni * ni; ++i)
                CHECK(out[i] == doctest::Approx(want[ref->face_offset(2) + i]).epsilon(1e-13));
            ctx.entity(kind, EntityKind::edge, std::span<const double>(ub).subspan(ref->edge_offset(9), ni),
                       std::span<double>(out).subspan(0, ni));
            for (std::size_t i = 0; i < ni; ++i)
                CHECK(out[i] == doctest::Approx(want[ref->edge_offset(9) + i]).epsilon(1e-13));
        }

        // forward is the inverse transpose of backward; rhs transforms the operator
        const Mat Sp = oracle::to_eigen(ref->transformed.padded);
        const Mat S3 = oracle::kron3(Sp, Sp, Sp);
        CHECK(rel_diff(full_vec(ctx.backward(u)), Vec(S3.transpose() * full_vec(u))) < 1e-12);
        CHECK(rel_diff(full_vec(ctx.rhs(u)), Vec(S3 * full_vec(u))) < 1e-12);
        CHECK(rel_diff(full_vec(ctx.forward(u)), Vec(S3.transpose().lu().solve(full_vec(u)))) < 1e-11);

        const auto round = combine(*ref, restrict_to_boundary(*ref, u), restrict_to_interior(*ref, u));
        CHECK(std::ranges::equal(round.data(), u.data()));
    }
}

TEST_CASE("estimate_mmc_memory")
{
    CHECK(estimate_mmc_memory(2, 1, 8) == 288.0);
    const double big = estimate_mmc_memory(17, 512, 8);
    CHECK(big == doctest::Approx(9.66e9).epsilon(0.001));
    CHECK(estimate_mmc_memory(5, 20) == 2.0 * estimate_mmc_memory(5, 10));
}

TEST_CASE("closed-form condensed diagonals")
{
    std::mt19937_64 rng(10);
    for (int p : {2, 3, 5, 7})
    {
        const auto         op = make_op(p, random_extents(rng), p % 2 ? 0.0 : 1.5);
        const CondensedTpc tpc(op);
        const CondensedTpt tpt(op);
        const Mat          S = oracle::schur(*op.ref, oracle::element_matrix(*op.ref, op.metric.d));
        const Mat          B = oracle::boundary_transform(*op.ref);
        CHECK(rel_diff(oracle::to_eigen(condensed_diagonal(tpc)), Vec(S.diagonal())) < 1e-11);
        CHECK(rel_diff(oracle::to_eigen(condensed_diagonal(tpt)), Vec((B * S * B.transpose()).diagonal())) < 1e-11);
    }
}

TEST_CASE("condensed operators check sizes")
{
    const auto          op = make_op(3, {1, 1, 1}, 0.0);
    const CondensedTpc  tpc(op);
    const CondensedTpt  tpt(op);
    const CondensedMmc  mmc(op);
    OperatorWorkspace   ws(*op.ref);
    std::vector<double> small(3), out(op.ref->nb);
    CHECK_THROWS_AS(tpc.apply(small, out, ws), std::invalid_argument);
    CHECK_THROWS_AS(tpt.apply(small, out, ws), std::invalid_argument);
    CHECK_THROWS_AS(mmc.apply(small, out), std::invalid_argument);
    CHECK_THROWS_AS(make_reference_element(1), std::invalid_argument);
}
