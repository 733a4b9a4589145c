#include "specsys/generators.hpp"

#include "oracle.hpp"
#include "test_util.hpp"

#include <doctest.h>

using namespace specsys;

TEST_CASE("simplicial homology of the basic fixtures") {
    FieldSpec f = FieldSpec::rationals();
    auto pt = simplicial_complex<Rational>({{"v"}}, f);
    CHECK(oracle::homology_dims(*pt) == DimVec{1});

    auto circle = circle_complex<Rational>(f);
    CHECK(circle->dim(0) == 3);
    CHECK(circle->dim(1) == 3);
    CHECK(oracle::homology_dims(*circle) == DimVec{1, 1});

    auto disc = simplicial_complex<Rational>({{"v0", "v1", "v2"}}, f);
    CHECK(oracle::homology_dims(*disc) == DimVec{1, 0, 0});
}

TEST_CASE("cover system with one subcomplex gives the pair filtration") {
    FieldSpec f = FieldSpec::rationals();
    auto cx = circle_complex<Rational>(f);
    auto filt = cover_system<Rational>(cx, {{"v0", "v2", "v0|v2"}});
    CHECK(filt.grid().n == 1);
    CHECK(filt.evaluate(Downset::principal(filt.grid(), {0})).dims() == DimVec{2, 1});
    CHECK(filt.validate().ok);
}

TEST_CASE("cover system rejects non-subcomplexes") {
    FieldSpec f = FieldSpec::rationals();
    auto cx = circle_complex<Rational>(f);
    CHECK_THROWS_AS(cover_system<Rational>(cx, {{"v0|v2"}}), FiltrationError);
}

TEST_CASE("circle fixture validates and has the expected slice homology") {
    auto inst = circle_fixture<Rational>(FieldSpec::rationals());
    CHECK(inst.filtration.validate().ok);

    // H(F_P / sum_{Q<P} F_Q) per P in {0,1}^2, computed through quotient
    // representatives and the oracle's own elimination
    const auto& f = inst.filtration;
    const auto& cx = f.complex();
    auto slice_homology = [&](GridPoint P) {
        Downset down = Downset::principal(f.grid(), P);
        std::vector<GridPoint> below;
        for (int i = 0; i < 2; ++i) {
            GridPoint q = P;
            q[i] -= 1;
            below.push_back(q);
        }
        Downset cut = Downset::closure(f.grid(), below);
        auto top = f.evaluate(down);
        auto bottom = f.evaluate(cut);
        // induced boundary on class representatives
        std::vector<Subquotient<Rational>> q;
        for (Index k = 0; k <= cx.top_degree(); ++k)
            q.push_back(subquotient(top.parts[k], bottom.parts[k]));
        DimVec h;
        for (Index k = 0; k <= cx.top_degree(); ++k) {
            oracle::Mat<Rational> dk =
                k == 0 ? oracle::Mat<Rational>()
                       : oracle::from_eigen<Rational>(
                             MatrixOf<Rational>(q[k - 1].project * cx.d(k) * q[k].lift));
            oracle::Mat<Rational> dk1 =
                k == cx.top_degree()
                    ? oracle::Mat<Rational>()
                    : oracle::from_eigen<Rational>(
                          MatrixOf<Rational>(q[k].project * cx.d(k + 1) * q[k + 1].lift));
            h.push_back(q[k].dim - oracle::rank_of(dk) - oracle::rank_of(dk1));
        }
        return h;
    };
    CHECK(slice_homology({0, 0}) == DimVec{2, 0});
    CHECK(slice_homology({1, 0}) == DimVec{0, 1});
    CHECK(slice_homology({0, 1}) == DimVec{0, 1});
    CHECK(slice_homology({1, 1}) == DimVec{0, 0});
}

TEST_CASE("the two displayed slice forms agree dimensionwise") {
    auto inst = circle_fixture<Rational>(FieldSpec::rationals());
    const auto& f = inst.filtration;
    const auto& cx = f.complex();
    // F^P = sum_{i: p_i = 1} F_i, intersect over Q > P in {0,1}^n
    auto arc = [&](int axis) {
        GridPoint lvl(2, 1);
        lvl[axis] = 0;
        return f.at_point(lvl);  // F_i = F at (0 on axis, 1 elsewhere)
    };
    for (int p0 = 0; p0 <= 1; ++p0)
        for (int p1 = 0; p1 <= 1; ++p1) {
            GridPoint P{p0, p1};
            Downset down = Downset::principal(f.grid(), P);
            std::vector<GridPoint> below;
            for (int i = 0; i < 2; ++i) {
                GridPoint q = P;
                q[i] -= 1;
                below.push_back(q);
            }
            auto top = f.evaluate(down);
            auto bottom = f.evaluate(Downset::closure(f.grid(), below));

            GradedSubspace<Rational> upper = GradedSubspace<Rational>::full(cx);
            for (int i = 0; i < 2; ++i) {
                GridPoint Q = P;
                Q[i] += 1;
                if (Q[i] > 1) continue;
                GradedSubspace<Rational> fq = GradedSubspace<Rational>::zero(cx);
                for (int j = 0; j < 2; ++j)
                    if (Q[j] == 1) fq = sum(fq, arc(j));
                upper = intersect(upper, fq);
            }
            GradedSubspace<Rational> fp_upper = GradedSubspace<Rational>::zero(cx);
            for (int j = 0; j < 2; ++j)
                if (P[j] == 1) fp_upper = sum(fp_upper, arc(j));

            for (Index k = 0; k <= cx.top_degree(); ++k) {
                Index lhs = subquotient(top.parts[k], bottom.parts[k]).dim;
                Index rhs = subquotient(upper.parts[k], fp_upper.parts[k]).dim;
                CHECK(lhs == rhs);
            }
        }
}

TEST_CASE("sphere cover fixture") {
    auto inst = sphere_cover_fixture<Rational>(FieldSpec::rationals());
    CHECK(oracle::homology_dims(inst.filtration.complex()) == DimVec{1, 0, 1});
    CHECK(inst.filtration.grid().n == 3);
    CHECK(inst.filtration.validate(std::pair<unsigned, int>{7u, 60}).ok);
}

TEST_CASE("multicomplex totalization") {
    FieldSpec f = FieldSpec::rationals();
    SUBCASE("one direction embeds as the complex itself") {
        MultiComplex<Rational> mc;
        mc.n = 1;
        mc.field = f;
        mc.names = {"a", "b"};
        mc.degree = {{1}, {0}};
        MatrixOf<Rational> d = MatrixOf<Rational>::Zero(2, 2);
        d(1, 0) = Rational(1);  // d(a) = b
        mc.differential = {d};
        auto inst = multicomplex_total(mc);
        CHECK(inst.complex->dim(0) == 1);
        CHECK(inst.complex->dim(1) == 1);
        CHECK(inst.complex->d(1)(0, 0) == Rational(1));
        CHECK(oracle::homology_dims(*inst.complex) == DimVec{0, 0});
    }
    SUBCASE("2x2 commuting square has vanishing total homology") {
        MultiComplex<Rational> mc;
        mc.n = 2;
        mc.field = f;
        mc.names = {"w", "x", "y", "z"};
        mc.degree = {{1, 1}, {0, 1}, {1, 0}, {0, 0}};
        MatrixOf<Rational> d1 = MatrixOf<Rational>::Zero(4, 4);
        MatrixOf<Rational> d2 = MatrixOf<Rational>::Zero(4, 4);
        d1(1, 0) = Rational(1);  // d1 w = x
        d2(2, 0) = Rational(1);  // d2 w = y
        d2(3, 1) = Rational(1);  // d2 x = z
        d1(3, 2) = Rational(1);  // d1 y = z
        mc.differential = {d1, d2};
        auto inst = multicomplex_total(mc);
        CHECK(oracle::homology_dims(*inst.complex) == DimVec{0, 0, 0});
        CHECK(inst.filtration.validate().ok);
    }
    SUBCASE("non-commuting differentials are rejected") {
        MultiComplex<Rational> mc;
        mc.n = 2;
        mc.field = f;
        mc.names = {"w", "x", "y", "z"};
        mc.degree = {{1, 1}, {0, 1}, {1, 0}, {0, 0}};
        MatrixOf<Rational> d1 = MatrixOf<Rational>::Zero(4, 4);
        MatrixOf<Rational> d2 = MatrixOf<Rational>::Zero(4, 4);
        d1(1, 0) = Rational(1);
        d2(2, 0) = Rational(1);
        d2(3, 1) = Rational(1);
        d1(3, 2) = Rational(-1);  // breaks d1 d2 = d2 d1
        mc.differential = {d1, d2};
        CHECK_THROWS_AS(multicomplex_total(mc), ComplexError);
    }
}

TEST_CASE("random double complexes are valid and deterministic") {
    for (unsigned seed : {1u, 2u, 3u, 10u}) {
        auto mc = random_double_complex<Rational>(seed, FieldSpec::rationals());
        auto inst = multicomplex_total(mc);  // constructor re-checks d^2 = 0
        CHECK(inst.filtration.validate(std::pair<unsigned, int>{3u, 40}).ok);
        auto mc2 = random_double_complex<Rational>(seed, FieldSpec::rationals());
        CHECK(mc.names == mc2.names);
        CHECK(mc.degree == mc2.degree);
        CHECK(mc.differential[0] == mc2.differential[0]);
        CHECK(mc.differential[1] == mc2.differential[1]);
    }
}

TEST_CASE("random instances: determinism, caps, known homology") {
    RandomParams params;
    params.n = 2;
    params.grid = 3;
    params.max_dim = 14;
    for (unsigned seed = 0; seed < 10; ++seed) {
        DimVec expect;
        auto inst = random_instance<Rational>(seed, params, &expect);
        CHECK(inst.complex->total_dim() <= params.max_dim);
        CHECK(oracle::homology_dims(*inst.complex) == expect);
        CHECK(inst.filtration.validate(std::pair<unsigned, int>{seed, 40}).ok);

        auto inst2 = random_instance<Rational>(seed, params);
        for (Index k = 0; k <= inst.complex->top_degree(); ++k)
            CHECK(inst.complex->d(k) == inst2.complex->d(k));
    }
    SUBCASE("zero cap gives the zero complex") {
        RandomParams zero = params;
        zero.max_dim = 0;
        auto inst = random_instance<Rational>(0, zero);
        CHECK(inst.complex->total_dim() == 0);
    }
    SUBCASE("caps are enforced") {
        RandomParams bad = params;
        bad.grid = 9;
        CHECK_THROWS(random_instance<Rational>(0, bad));
    }
    SUBCASE("prime field instances work the same way") {
        RandomParams fp = params;
        fp.field = FieldSpec::prime(5);
        DimVec expect;
        auto inst = random_instance<Fp>(4, fp, &expect);
        CHECK(oracle::homology_dims(*inst.complex) == expect);
    }
}

TEST_CASE("seed-0 fingerprint is frozen") {
    RandomParams params;
    params.n = 2;
    params.grid = 3;
    params.max_dim = 14;
    auto inst = random_instance<Rational>(0, params);
    DimVec dims;
    DimVec ranks;
    for (Index k = 0; k <= inst.complex->top_degree(); ++k) {
        dims.push_back(inst.complex->dim(k));
        ranks.push_back(oracle::rank_of_eigen<Rational>(inst.complex->d(k)));
    }
    // frozen golden numbers; regenerate only on an intentional generator change
    CAPTURE(dims);
    CAPTURE(ranks);
    CHECK(dims == DimVec{1, 2, 1});
    CHECK(ranks == DimVec{0, 0, 1});
}
