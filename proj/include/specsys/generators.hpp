// Instance generators: oriented simplicial chain complexes, subcomplex cover
// systems on the {0,1}^n box, total complexes of n-complexes with the usual
// alternating signs, and seeded random multidegree-filtered complexes whose
// homology is known by construction.

#pragma once

#include "specsys/chain.hpp"
#include "specsys/filtration.hpp"
#include "specsys/grid.hpp"
#include "specsys/linalg.hpp"

#include <algorithm>
#include <map>
#include <memory>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

namespace specsys {

template <class K>
struct Instance {
    std::shared_ptr<const ChainComplex<K>> complex;
    DownsetFiltration<K> filtration;
};

/// Oriented simplicial chain complex from facet lists; orientation induced by
/// the sort order of vertex labels.
template <class K>
std::shared_ptr<const ChainComplex<K>> simplicial_complex(
    const std::vector<std::vector<std::string>>& facets, const FieldSpec& field) {
    if (facets.empty()) throw ComplexError("simplicial_complex: no facets");
    std::set<std::vector<std::string>> faces;
    for (auto facet : facets) {
        std::sort(facet.begin(), facet.end());
        facet.erase(std::unique(facet.begin(), facet.end()), facet.end());
        if (facet.empty()) throw ComplexError("simplicial_complex: empty facet");
        const size_t m = facet.size();
        for (size_t mask = 1; mask < (1u << m); ++mask) {
            std::vector<std::string> face;
            for (size_t i = 0; i < m; ++i)
                if (mask & (1u << i)) face.push_back(facet[i]);
            faces.insert(face);
        }
    }
    size_t top = 0;
    for (const auto& f : faces) top = std::max(top, f.size() - 1);
    std::vector<std::vector<std::vector<std::string>>> by_deg(top + 1);
    for (const auto& f : faces) by_deg[f.size() - 1].push_back(f);
    for (auto& v : by_deg) std::sort(v.begin(), v.end());

    auto face_name = [](const std::vector<std::string>& f) {
        std::ostringstream os;
        for (size_t i = 0; i < f.size(); ++i) os << (i ? "|" : "") << f[i];
        return os.str();
    };

    std::vector<std::vector<std::string>> gens(top + 1);
    std::vector<std::map<std::vector<std::string>, Index>> idx(top + 1);
    for (size_t k = 0; k <= top; ++k)
        for (const auto& f : by_deg[k]) {
            idx[k][f] = static_cast<Index>(gens[k].size());
            gens[k].push_back(face_name(f));
        }

    std::vector<MatrixOf<K>> boundary(top + 1);
    boundary[0] = MatrixOf<K>::Zero(0, static_cast<Index>(gens[0].size()));
    for (size_t k = 1; k <= top; ++k) {
        boundary[k] = MatrixOf<K>::Zero(static_cast<Index>(gens[k - 1].size()),
                                        static_cast<Index>(gens[k].size()));
        for (const auto& f : by_deg[k]) {
            const Index col = idx[k].at(f);
            int sign = 1;
            for (size_t drop = 0; drop < f.size(); ++drop) {
                std::vector<std::string> sub;
                for (size_t i = 0; i < f.size(); ++i)
                    if (i != drop) sub.push_back(f[i]);
                boundary[k](idx[k - 1].at(sub), col) = K(sign);
                sign = -sign;
            }
        }
    }
    return std::make_shared<ChainComplex<K>>(field, std::move(gens), std::move(boundary));
}

/// Cover system: axis i is the two-step filtration 0 <= span(G_i) <= C,
/// realized as the multidegree filtration with deg_i(g) = 0 iff g in G_i.
template <class K>
DownsetFiltration<K> cover_system(std::shared_ptr<const ChainComplex<K>> cx,
                                  const std::vector<std::vector<std::string>>& cover_gens) {
    const int n = static_cast<int>(cover_gens.size());
    if (n == 0) throw FiltrationError("cover_system: no subcomplexes");
    const ChainComplex<K>& c = *cx;
    std::map<std::string, GridPoint> multideg;
    for (Index k = 0; k <= c.top_degree(); ++k)
        for (const auto& g : c.generators(k)) multideg[g] = GridPoint(n, 1);
    for (int i = 0; i < n; ++i) {
        for (const auto& g : cover_gens[i]) {
            auto it = multideg.find(g);
            if (it == multideg.end()) throw FiltrationError("cover_system: unknown generator " + g);
            it->second[i] = 0;
        }
    }
    try {
        return from_multidegrees<K>(std::move(cx), multideg);
    } catch (const FiltrationError&) {
        throw FiltrationError("cover_system: a cover set is not a subcomplex");
    }
}

/// The circle as the boundary of a triangle.
template <class K>
std::shared_ptr<const ChainComplex<K>> circle_complex(const FieldSpec& field) {
    return simplicial_complex<K>({{"v0", "v1"}, {"v0", "v2"}, {"v1", "v2"}}, field);
}

/// Running fixture: the circle covered by two arcs
/// A = v0|v1 + v1|v2 (through v1) and B = v0|v2.
template <class K>
Instance<K> circle_fixture(const FieldSpec& field) {
    auto cx = circle_complex<K>(field);
    auto f = cover_system<K>(cx, {{"v0", "v1", "v2", "v0|v1", "v1|v2"}, {"v0", "v2", "v0|v2"}});
    return {cx, std::move(f)};
}

/// 2-sphere (tetrahedron boundary) covered by three patches.
template <class K>
Instance<K> sphere_cover_fixture(const FieldSpec& field) {
    auto cx = simplicial_complex<K>(
        {{"t0", "t1", "t2"}, {"t0", "t1", "t3"}, {"t0", "t2", "t3"}, {"t1", "t2", "t3"}}, field);
    auto closure = [&](std::vector<std::vector<std::string>> facets) {
        std::set<std::string> names;
        for (auto f : facets) {
            std::sort(f.begin(), f.end());
            const size_t m = f.size();
            for (size_t mask = 1; mask < (1u << m); ++mask) {
                std::vector<std::string> sub;
                for (size_t i = 0; i < m; ++i)
                    if (mask & (1u << i)) sub.push_back(f[i]);
                std::ostringstream os;
                for (size_t i = 0; i < sub.size(); ++i) os << (i ? "|" : "") << sub[i];
                names.insert(os.str());
            }
        }
        return std::vector<std::string>(names.begin(), names.end());
    };
    auto f = cover_system<K>(cx, {closure({{"t0", "t1", "t2"}, {"t0", "t1", "t3"}}),
                                  closure({{"t0", "t2", "t3"}}), closure({{"t1", "t2", "t3"}})});
    return {cx, std::move(f)};
}

/// Z^n-graded generators with n commuting differentials of degree -e_i.
template <class K>
struct MultiComplex {
    int n = 2;
    FieldSpec field;
    std::vector<std::string> names;
    std::vector<GridPoint> degree;              // componentwise >= 0
    std::vector<MatrixOf<K>> differential;      // n square matrices over all generators

    Index size() const { return static_cast<Index>(names.size()); }

    void check() const {
        for (const auto& p : degree)
            for (int v : p)
                if (v < 0) throw ComplexError("multicomplex: negative multidegree");
        for (int i = 0; i < n; ++i) {
            for (Index c = 0; c < size(); ++c)
                for (Index r = 0; r < size(); ++r) {
                    if (scalar_is_zero(differential[i](r, c))) continue;
                    GridPoint expect = point_sub(degree[c], unit_point(n, i));
                    if (degree[r] != expect)
                        throw ComplexError("multicomplex: differential " + std::to_string(i + 1) +
                                           " is not of degree -e_" + std::to_string(i + 1));
                }
            if (!is_zero_matrix(MatrixOf<K>(differential[i] * differential[i])))
                throw ComplexError("multicomplex: d_i^2 != 0");
        }
        for (int i = 0; i < n; ++i)
            for (int j = i + 1; j < n; ++j) {
                MatrixOf<K> ij = differential[i] * differential[j];
                MatrixOf<K> ji = differential[j] * differential[i];
                if (!(ij == ji)) throw ComplexError("multicomplex: differentials do not commute");
            }
    }
};

/// Total complex with the sign (-1)^{p_1+...+p_{i-1}} on d_i, plus the n
/// multidegree axis filtrations.
template <class K>
Instance<K> multicomplex_total(const MultiComplex<K>& mc) {
    mc.check();
    Index top = 0;
    for (const auto& p : mc.degree) {
        Index s = 0;
        for (int v : p) s += v;
        top = std::max(top, s);
    }
    std::vector<std::vector<std::string>> gens(top + 1);
    std::vector<std::vector<Index>> which(top + 1);  // generator index per slot
    std::vector<Index> slot(mc.size());
    for (Index g = 0; g < mc.size(); ++g) {
        Index s = 0;
        for (int v : mc.degree[g]) s += v;
        slot[g] = static_cast<Index>(gens[s].size());
        gens[s].push_back(mc.names[g]);
        which[s].push_back(g);
    }
    std::vector<MatrixOf<K>> boundary(top + 1);
    boundary[0] = MatrixOf<K>::Zero(0, static_cast<Index>(gens[0].size()));
    for (Index k = 1; k <= top; ++k) {
        boundary[k] = MatrixOf<K>::Zero(static_cast<Index>(gens[k - 1].size()),
                                        static_cast<Index>(gens[k].size()));
        for (Index cslot = 0; cslot < static_cast<Index>(which[k].size()); ++cslot) {
            const Index g = which[k][cslot];
            int sign = 1;
            for (int i = 0; i < mc.n; ++i) {
                for (Index rslot = 0; rslot < static_cast<Index>(which[k - 1].size()); ++rslot) {
                    const Index h = which[k - 1][rslot];
                    const K& entry = mc.differential[i](h, g);
                    if (!scalar_is_zero(entry)) boundary[k](rslot, cslot) += K(sign) * entry;
                }
                sign *= (mc.degree[g][i] % 2 == 0) ? 1 : -1;
            }
        }
    }
    auto cx = std::make_shared<ChainComplex<K>>(mc.field, gens, std::move(boundary));
    std::map<std::string, GridPoint> multideg;
    for (Index g = 0; g < mc.size(); ++g) multideg[mc.names[g]] = mc.degree[g];
    auto f = from_multidegrees<K>(cx, multideg);
    return {cx, std::move(f)};
}

struct RandomParams {
    int n = 2;
    int grid = 2;        // multidegrees in [0, grid-1] per axis
    Index max_dim = 16;  // total dimension cap
    FieldSpec field = FieldSpec::rationals();
};

/// Reproducible multidegree-filtered complex: a sum of spheres and discs in a
/// basis mixed by a random multidegree-monotone unit-triangular change of
/// coordinates. Homology dims equal the sphere counts by construction.
template <class K>
Instance<K> random_instance(unsigned seed, const RandomParams& params,
                            DimVec* expected_homology = nullptr) {
    if (params.n < 1 || params.n > 3 || params.grid < 1 || params.grid > 4 ||
        params.max_dim > 40)
        throw std::invalid_argument("random_instance: parameters exceed the documented caps");
    std::mt19937_64 rng(seed);
    auto draw = [&](int m) { return m <= 0 ? 0 : static_cast<int>(rng() % m); };

    const Index top = 2 + draw(2);  // degrees 0..2 or 0..3
    std::vector<std::vector<GridPoint>> deg_of(top + 1);
    std::vector<std::vector<std::string>> gens(top + 1);
    DimVec spheres(top + 1, 0);
    Index total = 0;
    auto random_point = [&]() {
        GridPoint p(params.n);
        for (int i = 0; i < params.n; ++i) p[i] = draw(params.grid);
        return p;
    };
    auto add_gen = [&](Index k, const GridPoint& p) {
        std::ostringstream os;
        os << "g" << k << "_" << gens[k].size();
        gens[k].push_back(os.str());
        deg_of[k].push_back(p);
        ++total;
        return static_cast<Index>(gens[k].size()) - 1;
    };

    struct Disc {
        Index deg, a, b;
    };
    std::vector<Disc> discs;
    if (params.max_dim >= 1) {
        // at least one sphere so homology is nonzero
        add_gen(0, random_point());
        spheres[0] += 1;
    }
    while (total + 2 <= params.max_dim) {
        if (draw(3) == 0) {
            Index k = draw(static_cast<int>(top) + 1);
            add_gen(k, random_point());
            spheres[k] += 1;
        } else {
            Index k = draw(static_cast<int>(top));  // disc occupies degrees k, k+1
            GridPoint pb = random_point();
            GridPoint pa = pb;
            for (int i = 0; i < params.n; ++i)
                pa[i] = std::min(pa[i] + draw(2), params.grid - 1);
            Index b = add_gen(k, pb);
            Index a = add_gen(k + 1, pa);
            discs.push_back({k, a, b});
        }
        if (draw(5) == 0) break;
    }

    std::vector<MatrixOf<K>> boundary(top + 1);
    boundary[0] = MatrixOf<K>::Zero(0, static_cast<Index>(gens[0].size()));
    for (Index k = 1; k <= top; ++k)
        boundary[k] = MatrixOf<K>::Zero(static_cast<Index>(gens[k - 1].size()),
                                        static_cast<Index>(gens[k].size()));
    for (const auto& d : discs) boundary[d.deg + 1](d.b, d.a) = K(1);

    // multidegree-monotone unit-triangular mixing per degree
    std::vector<MatrixOf<K>> mix(top + 1), mix_inv(top + 1);
    for (Index k = 0; k <= top; ++k) {
        const Index m = static_cast<Index>(gens[k].size());
        MatrixOf<K> t = MatrixOf<K>::Identity(m, m);
        for (Index c = 0; c < m; ++c)
            for (Index r = 0; r < m; ++r) {
                if (r == c || !point_leq(deg_of[k][r], deg_of[k][c])) continue;
                if (deg_of[k][r] == deg_of[k][c] && r > c) continue;  // keep triangular
                if (draw(3) == 0) t(r, c) = FieldOps<K>::make(params.field, draw(5) - 2);
            }
        mix[k] = t;
        mix_inv[k] = invert(t);
    }
    for (Index k = 1; k <= top; ++k) boundary[k] = mix_inv[k - 1] * boundary[k] * mix[k];

    std::map<std::string, GridPoint> multideg;
    for (Index k = 0; k <= top; ++k)
        for (size_t i = 0; i < gens[k].size(); ++i) multideg[gens[k][i]] = deg_of[k][i];

    if (expected_homology) *expected_homology = spheres;
    auto cx = std::make_shared<ChainComplex<K>>(params.field, gens, std::move(boundary));
    auto f = from_multidegrees<K>(cx, multideg, params.n);
    return {cx, std::move(f)};
}

/// Seeded random double complex (n = 2): a direct sum of dots, horizontal and
/// vertical dominoes, and commuting squares with random coefficients.
template <class K>
MultiComplex<K> random_double_complex(unsigned seed, const FieldSpec& field, int grid = 3,
                                      Index max_dim = 14) {
    std::mt19937_64 rng(seed);
    auto draw = [&](int m) { return m <= 0 ? 0 : static_cast<int>(rng() % m); };
    MultiComplex<K> mc;
    mc.n = 2;
    mc.field = field;
    std::vector<std::tuple<Index, Index, int, K>> arrows;  // (to, from, direction, coeff)
    auto add = [&](int i, int j) {
        std::ostringstream os;
        os << "x" << mc.names.size() << "_" << i << j;
        mc.names.push_back(os.str());
        mc.degree.push_back({i, j});
        return static_cast<Index>(mc.names.size()) - 1;
    };
    auto coeff = [&]() { return FieldOps<K>::make(field, 1 + draw(3)); };

    add(draw(grid), draw(grid));  // ensure at least one dot
    while (static_cast<Index>(mc.names.size()) + 4 <= max_dim) {
        switch (draw(4)) {
            case 0:
                add(draw(grid), draw(grid));
                break;
            case 1: {  // horizontal domino
                int i = 1 + draw(grid - 1), j = draw(grid);
                Index a = add(i, j), b = add(i - 1, j);
                arrows.push_back({b, a, 0, coeff()});
                break;
            }
            case 2: {  // vertical domino
                int i = draw(grid), j = 1 + draw(grid - 1);
                Index a = add(i, j), b = add(i, j - 1);
                arrows.push_back({b, a, 1, coeff()});
                break;
            }
            default: {  // commuting square
                int i = 1 + draw(grid - 1), j = 1 + draw(grid - 1);
                Index w = add(i, j), x = add(i - 1, j), y = add(i, j - 1), z = add(i - 1, j - 1);
                K c1 = coeff(), c2 = coeff();
                arrows.push_back({x, w, 0, c1});
                arrows.push_back({y, w, 1, c2});
                arrows.push_back({z, x, 1, c2});
                arrows.push_back({z, y, 0, c1});
                break;
            }
        }
        if (draw(6) == 0) break;
    }
    const Index total = static_cast<Index>(mc.names.size());
    MatrixOf<K> d1 = MatrixOf<K>::Zero(total, total);
    MatrixOf<K> d2 = MatrixOf<K>::Zero(total, total);
    for (const auto& [to, from, dir, c] : arrows) (dir == 0 ? d1 : d2)(to, from) = c;
    mc.differential = {d1, d2};
    mc.check();
    return mc;
}

}  // namespace specsys
