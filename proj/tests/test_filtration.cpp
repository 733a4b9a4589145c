#include "specsys/filtration.hpp"

#include "specsys/generators.hpp"
#include "test_util.hpp"

#include <doctest.h>

#include <random>

using namespace specsys;

namespace {

// For a multidegree filtration, F_p is just the span of the generators whose
// multidegree lies in p; this is the hand-enumeration rule the library's
// sum-of-intersections evaluation must reproduce.
template <class K>
GradedSubspace<K> coordinate_rule(const DownsetFiltration<K>& f, const Downset& p) {
    const ChainComplex<K>& cx = f.complex();
    GradedSubspace<K> out;
    for (Index k = 0; k <= cx.top_degree(); ++k) {
        MatrixOf<K> cols = MatrixOf<K>::Zero(cx.dim(k), cx.dim(k));
        Index m = 0;
        for (Index c = 0; c < cx.dim(k); ++c)
            if (p.member(f.multidegrees().at(cx.generators(k)[c]))) {
                cols(c, m) = K(1);
                ++m;
            }
        out.parts.push_back(Subspace<K>::span(cols.leftCols(m)));
    }
    return out;
}

}  // namespace

TEST_CASE("constant multidegrees give the two-value filtration") {
    FieldSpec f = FieldSpec::rationals();
    auto cx = circle_complex<Rational>(f);
    std::map<std::string, GridPoint> md;
    for (Index k = 0; k <= cx->top_degree(); ++k)
        for (const auto& g : cx->generators(k)) md[g] = {0, 0};
    auto filt = from_multidegrees<Rational>(cx, md);
    for (const auto& p : enumerate_downsets(filt.grid())) {
        auto v = filt.evaluate(p);
        if (p.member({0, 0}))
            CHECK(v == GradedSubspace<Rational>::full(*cx));
        else
            CHECK(v == GradedSubspace<Rational>::zero(*cx));
    }
}

TEST_CASE("single generator, n = 3") {
    FieldSpec f = FieldSpec::rationals();
    auto cx = std::make_shared<ChainComplex<Rational>>(
        f, std::vector<std::vector<std::string>>{{"pt"}},
        std::vector<MatrixOf<Rational>>{MatrixOf<Rational>::Zero(0, 1)});
    auto filt = from_multidegrees<Rational>(cx, {{"pt", {0, 1, 0}}});
    for (const auto& p : enumerate_downsets(filt.grid())) {
        CHECK((filt.evaluate(p) == GradedSubspace<Rational>::full(*cx)) == p.member({0, 1, 0}));
    }
}

TEST_CASE("circle fixture reproduces the hand enumeration on every downset") {
    auto inst = circle_fixture<Rational>(FieldSpec::rationals());
    auto all = enumerate_downsets(inst.filtration.grid());
    CHECK(all.size() == 70);
    for (const auto& p : all)
        CHECK(inst.filtration.evaluate(p) == coordinate_rule(inst.filtration, p));
}

TEST_CASE("circle fixture: F at down{(1,0)} is the arc B") {
    auto inst = circle_fixture<Rational>(FieldSpec::rationals());
    const auto& f = inst.filtration;
    Downset p = Downset::principal(f.grid(), {1, 0});
    auto v = f.evaluate(p);
    CHECK(v.dims() == DimVec{2, 1});  // v0, v2 and the arc v0|v2
    auto [dv, cv] = f.complex().find_generator("v0|v2");
    VectorOf<Rational> e = VectorOf<Rational>::Zero(f.complex().dim(1));
    e(cv) = Rational(1);
    CHECK(v.parts[dv].contains(e));
}

TEST_CASE("evaluate at the lattice extremes") {
    auto inst = circle_fixture<Rational>(FieldSpec::rationals());
    const auto& f = inst.filtration;
    CHECK(f.evaluate(Downset::empty(f.grid())) == GradedSubspace<Rational>::zero(f.complex()));
    CHECK(f.evaluate(Downset::full(f.grid())) == GradedSubspace<Rational>::full(f.complex()));
}

TEST_CASE("boundary violating multidegrees is reported with the pair") {
    FieldSpec f = FieldSpec::rationals();
    auto cx = circle_complex<Rational>(f);
    std::map<std::string, GridPoint> md;
    for (Index k = 0; k <= cx->top_degree(); ++k)
        for (const auto& g : cx->generators(k)) md[g] = {0, 0};
    md["v1"] = {1, 0};  // v0|v1 at (0,0) hits v1 at (1,0)
    CHECK_THROWS_WITH_AS(from_multidegrees<Rational>(cx, md), doctest::Contains("v0|v1"),
                         FiltrationError);
}

TEST_CASE("explicit filtration") {
    FieldSpec fs = FieldSpec::rationals();
    auto cx = circle_complex<Rational>(fs);
    SUBCASE("n = 1 two-step filtration") {
        auto f = from_explicit<Rational>(
            cx,
            {{{0, {"v0", "v2", "v0|v2"}}, {1, {"v0", "v1", "v2", "v0|v1", "v0|v2", "v1|v2"}}}});
        CHECK(f.grid().n == 1);
        CHECK(f.evaluate(Downset::principal(f.grid(), {0})).dims() == DimVec{2, 1});
        CHECK(f.evaluate(Downset::full(f.grid())).dims() == DimVec{3, 3});
        CHECK(f.validate().ok);
    }
    SUBCASE("explicit equals the multidegree construction on every downset") {
        auto inst = circle_fixture<Rational>(fs);
        std::vector<std::vector<std::pair<int, std::vector<std::string>>>> axes(2);
        for (int i = 0; i < 2; ++i)
            for (int t = 0; t <= 1; ++t) {
                std::vector<std::string> names;
                for (Index k = 0; k <= cx->top_degree(); ++k)
                    for (const auto& g : cx->generators(k))
                        if (inst.filtration.multidegrees().at(g)[i] <= t) names.push_back(g);
                axes[i].push_back({t, names});
            }
        auto f2 = from_explicit<Rational>(cx, axes);
        CHECK(f2.grid() == inst.filtration.grid());
        for (const auto& p : enumerate_downsets(f2.grid()))
            CHECK(f2.evaluate(p) == inst.filtration.evaluate(p));
    }
    SUBCASE("a level not closed under d is rejected") {
        CHECK_THROWS_WITH_AS(
            from_explicit<Rational>(
                cx, {{{0, {"v0|v1"}},
                      {1, {"v0", "v1", "v2", "v0|v1", "v0|v2", "v1|v2"}}}}),
            doctest::Contains("subcomplex"), FiltrationError);
    }
    SUBCASE("nesting violation is rejected") {
        CHECK_THROWS_WITH_AS(
            from_explicit<Rational>(
                cx, {{{0, {"v0", "v1", "v0|v1"}}, {1, {"v0", "v2", "v0|v2"}}}}),
            doctest::Contains("nesting"), FiltrationError);
    }
}

TEST_CASE("multidegree filtrations validate as distributive") {
    auto inst = circle_fixture<Rational>(FieldSpec::rationals());
    auto rep = inst.filtration.validate();
    CHECK(rep.ok);
    CHECK(rep.distributive);
    CHECK(rep.pairs_checked > 1000);
    CHECK(inst.filtration.distributive());
}

TEST_CASE("three skew lines break distributivity, with witness") {
    // Q^2 in degree 0, three axes whose level-0 spans are the three distinct
    // lines x, y, x+y. Two-chain configurations are always distributive, so
    // three axes is the smallest genuine failure.
    FieldSpec fs = FieldSpec::rationals();
    auto cx = std::make_shared<ChainComplex<Rational>>(
        fs, std::vector<std::vector<std::string>>{{"a", "b"}},
        std::vector<MatrixOf<Rational>>{MatrixOf<Rational>::Zero(0, 2)});
    std::vector<AxisFiltration<Rational>> axes(3);
    auto line = [&](int c0, int c1) {
        MatrixOf<Rational> m(2, 1);
        m(0, 0) = Rational(c0);
        m(1, 0) = Rational(c1);
        GradedSubspace<Rational> g;
        g.parts.push_back(Subspace<Rational>::span(m));
        return g;
    };
    GradedSubspace<Rational> zero = GradedSubspace<Rational>::zero(*cx);
    GradedSubspace<Rational> full = GradedSubspace<Rational>::full(*cx);
    axes[0] = {0, 0, {zero, line(1, 0), full}};
    axes[1] = {0, 0, {zero, line(0, 1), full}};
    axes[2] = {0, 0, {zero, line(1, 1), full}};
    std::vector<int> lo{0, 0, 0}, hi{0, 0, 0};
    DownsetFiltration<Rational> f(cx, ClampedGrid(lo, hi), axes);

    // the violating pair by hand: F_a = x + y = C = x + (x+y) = F_b, while
    // a cap b only reaches the line x
    Downset a = Downset::closure(f.grid(), {{0, 1, 1}, {1, 0, 1}});
    Downset b = Downset::closure(f.grid(), {{0, 1, 1}, {1, 1, 0}});
    auto fa = f.evaluate(a), fb = f.evaluate(b);
    CHECK(fa.dims() == DimVec{2});
    CHECK(fb.dims() == DimVec{2});
    CHECK(intersect(fa, fb).dims() == DimVec{2});
    CHECK(f.evaluate(intersect(a, b)).dims() == DimVec{1});

    auto rep = f.validate(std::pair<unsigned, int>{1u, 200});
    CHECK(!rep.distributive);
    CHECK(!rep.ok);
    REQUIRE(!rep.issues.empty());
    bool found = false;
    for (const auto& issue : rep.issues)
        if (issue.check.find("distributive") != std::string::npos && !issue.witness.empty())
            found = true;
    CHECK(found);
    CHECK(!f.distributive());
}

TEST_CASE("one axis is always distributive") {
    FieldSpec fs = FieldSpec::rationals();
    auto cx = circle_complex<Rational>(fs);
    auto f = from_explicit<Rational>(
        cx, {{{0, {"v0", "v2"}},
              {1, {"v0", "v2", "v0|v2"}},
              {2, {"v0", "v1", "v2", "v0|v1", "v0|v2", "v1|v2"}}}});
    auto rep = f.validate();
    CHECK(rep.ok);
    CHECK(rep.distributive);
}

TEST_CASE("filtration invariants on random instances") {
    std::mt19937_64 rng(100);
    for (unsigned seed = 0; seed < 6; ++seed) {
        RandomParams params;
        params.n = 2;
        params.grid = 2;
        params.max_dim = 12;
        auto inst = random_instance<Rational>(seed, params);
        const auto& f = inst.filtration;
        auto pool = enumerate_downsets(f.grid(), 600);
        std::shuffle(pool.begin(), pool.end(), rng);
        pool.resize(std::min<size_t>(pool.size(), 12));
        for (const auto& p : pool) {
            auto fp = f.evaluate(p);
            CHECK(is_subcomplex(f.complex(), fp));
            // sum over maximal points agrees with the sum over all members
            GradedSubspace<Rational> full_sum = GradedSubspace<Rational>::zero(f.complex());
            for (const auto& pt : p.points()) full_sum = sum(full_sum, f.at_point(pt));
            CHECK(fp == full_sum);
            for (const auto& q : pool)
                if (leq(p, q)) CHECK(contains(f.evaluate(q), fp));
        }
        // cache transparency: a fresh filtration gives identical canonical bases
        auto inst2 = random_instance<Rational>(seed, params);
        for (const auto& p : pool)
            CHECK(inst.filtration.evaluate(p) == inst2.filtration.evaluate(p));
    }
}

TEST_CASE("support points are the generator multidegrees") {
    auto inst = circle_fixture<Rational>(FieldSpec::rationals());
    auto sup = inst.filtration.support();
    std::set<GridPoint> expect;
    for (const auto& [g, d] : inst.filtration.multidegrees()) expect.insert(d);
    CHECK(std::set<GridPoint>(sup.begin(), sup.end()) == expect);
}
