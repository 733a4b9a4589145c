// Test-only reference implementations, kept independent of the library code
// paths they are used to check: a plain row-reduction, brute-force subspace
// enumeration over prime fields, rank-nullity homology, a textbook one-axis
// spectral sequence, and iterated homology of double complexes.

#pragma once

#include "specsys/chain.hpp"
#include "specsys/linalg.hpp"
#include "specsys/scalar.hpp"

#include <algorithm>
#include <map>
#include <set>
#include <vector>

namespace oracle {

using specsys::Index;

template <class K>
using Mat = std::vector<std::vector<K>>;  // row-major

template <class K>
Mat<K> from_eigen(const specsys::MatrixOf<K>& m) {
    Mat<K> out(m.rows(), std::vector<K>(m.cols(), K(0)));
    for (Index r = 0; r < m.rows(); ++r)
        for (Index c = 0; c < m.cols(); ++c) out[r][c] = m(r, c);
    return out;
}

template <class K>
Index rows(const Mat<K>& m) {
    return static_cast<Index>(m.size());
}
template <class K>
Index cols(const Mat<K>& m) {
    return m.empty() ? 0 : static_cast<Index>(m[0].size());
}

// plain Gaussian row elimination
template <class K>
Index row_reduce(Mat<K>& m) {
    Index rank = 0;
    for (Index c = 0; c < cols(m) && rank < rows(m); ++c) {
        Index piv = -1;
        for (Index r = rank; r < rows(m); ++r)
            if (!m[r][c].is_zero()) {
                piv = r;
                break;
            }
        if (piv < 0) continue;
        std::swap(m[rank], m[piv]);
        K inv = K(1) / m[rank][c];
        for (Index cc = 0; cc < cols(m); ++cc) m[rank][cc] = m[rank][cc] * inv;
        for (Index r = 0; r < rows(m); ++r) {
            if (r == rank || m[r][c].is_zero()) continue;
            K f = m[r][c];
            for (Index cc = 0; cc < cols(m); ++cc) m[r][cc] = m[r][cc] - f * m[rank][cc];
        }
        ++rank;
    }
    return rank;
}

template <class K>
Index rank_of(Mat<K> m) {
    return row_reduce(m);
}

template <class K>
Index rank_of_eigen(const specsys::MatrixOf<K>& m) {
    Mat<K> o = from_eigen(m);
    return row_reduce(o);
}

// columns of a and b side by side
template <class K>
Mat<K> hcat(const Mat<K>& a, const Mat<K>& b) {
    Mat<K> out(std::max(rows(a), rows(b)), std::vector<K>(cols(a) + cols(b), K(0)));
    for (Index r = 0; r < rows(a); ++r)
        for (Index c = 0; c < cols(a); ++c) out[r][c] = a[r][c];
    for (Index r = 0; r < rows(b); ++r)
        for (Index c = 0; c < cols(b); ++c) out[r][cols(a) + c] = b[r][c];
    return out;
}

// nullspace basis, columns
template <class K>
Mat<K> nullspace(Mat<K> m) {
    const Index nc = cols(m);
    Mat<K> work = m;
    Index rank = row_reduce(work);
    std::vector<Index> pivot_col;
    std::vector<bool> is_pivot(nc, false);
    for (Index r = 0; r < rank; ++r) {
        for (Index c = 0; c < nc; ++c)
            if (!work[r][c].is_zero()) {
                pivot_col.push_back(c);
                is_pivot[c] = true;
                break;
            }
    }
    Mat<K> out(nc, std::vector<K>(nc - rank, K(0)));
    Index j = 0;
    for (Index c = 0; c < nc; ++c) {
        if (is_pivot[c]) continue;
        out[c][j] = K(1);
        for (Index r = 0; r < rank; ++r) out[pivot_col[r]][j] = K(0) - work[r][c];
        ++j;
    }
    return out;
}

// product of row-major matrices
template <class K>
Mat<K> mul(const Mat<K>& a, const Mat<K>& b) {
    Mat<K> out(rows(a), std::vector<K>(cols(b), K(0)));
    for (Index r = 0; r < rows(a); ++r)
        for (Index k = 0; k < cols(a); ++k) {
            if (a[r][k].is_zero()) continue;
            for (Index c = 0; c < cols(b); ++c) out[r][c] = out[r][c] + a[r][k] * b[k][c];
        }
    return out;
}

// dim(span(cols a) + span(cols b)) etc.
template <class K>
Index sum_dim(const Mat<K>& a, const Mat<K>& b) {
    Mat<K> cat = hcat(a, b);
    return rank_of(std::move(cat));
}

template <class K>
Index intersection_dim(const Mat<K>& a, const Mat<K>& b) {
    return rank_of(a) + rank_of(b) - sum_dim(a, b);
}

// Every vector of span(cols) over F_p, as coordinate tuples.
inline std::set<std::vector<long long>> enumerate_span_fp(const Mat<specsys::Fp>& basis,
                                                          long long p) {
    const Index nr = rows(basis), nc = cols(basis);
    std::set<std::vector<long long>> out;
    std::vector<long long> coeff(nc, 0);
    while (true) {
        std::vector<long long> v(nr, 0);
        for (Index c = 0; c < nc; ++c)
            for (Index r = 0; r < nr; ++r)
                v[r] = (v[r] + coeff[c] * basis[r][c].value()) % p;
        for (auto& x : v) x = ((x % p) + p) % p;
        out.insert(v);
        Index i = 0;
        while (i < nc && coeff[i] == p - 1) coeff[i++] = 0;
        if (i == nc) break;
        ++coeff[i];
    }
    return out;
}

template <class K>
specsys::DimVec homology_dims(const specsys::ChainComplex<K>& cx) {
    specsys::DimVec h(cx.top_degree() + 1, 0);
    std::vector<Index> rk(cx.top_degree() + 2, 0);
    for (Index k = 1; k <= cx.top_degree(); ++k) rk[k] = rank_of_eigen<K>(cx.d(k));
    for (Index k = 0; k <= cx.top_degree(); ++k) h[k] = cx.dim(k) - rk[k] - rk[k + 1];
    return h;
}

// ---------------------------------------------------------------------------
// Textbook one-axis spectral sequence, straight from the cycle/boundary
// towers Z^r_p = F_p cap d^{-1}(F_{p-r}), E^r_p = Z^r_p / (Z^{r-1}_{p-1} +
// d Z^{r-1}_{p+r-1}). Filtration levels are coordinate spans given by a level
// number per generator.
// ---------------------------------------------------------------------------

template <class K>
struct ClassicOracle {
    // boundary[k]: degree k -> k-1 (row-major, rows = dim(k-1))
    std::vector<Mat<K>> boundary;
    std::vector<std::vector<int>> level;  // level[k][i] = filtration level of generator i
    int lo = 0, hi = 0;

    Index dim(Index k) const {
        if (k < 0 || k >= static_cast<Index>(level.size())) return 0;
        return static_cast<Index>(level[k].size());
    }

    // columns spanning F_p in degree k
    Mat<K> filt(Index k, int p) const {
        Mat<K> out(dim(k), std::vector<K>(0));
        if (dim(k) == 0) return Mat<K>(0, std::vector<K>(0));
        std::vector<Index> take;
        for (Index i = 0; i < dim(k); ++i)
            if (level[k][i] <= p) take.push_back(i);
        Mat<K> m(dim(k), std::vector<K>(take.size(), K(0)));
        for (size_t j = 0; j < take.size(); ++j) m[take[j]][j] = K(1);
        return m;
    }

    Mat<K> d(Index k) const {
        if (k < 1 || k > static_cast<Index>(boundary.size()) - 1) {
            return Mat<K>(dim(k - 1) < 0 ? 0 : dim(k - 1), std::vector<K>(dim(k), K(0)));
        }
        return boundary[k];
    }

    // basis (columns) of Z^r_p in degree k
    Mat<K> cycles(Index k, int p, int r) const {
        Mat<K> fp = filt(k, p);
        if (cols(fp) == 0) return Mat<K>(dim(k), std::vector<K>(0));
        Mat<K> dk = d(k);
        Mat<K> img = mul(dk, fp);  // d restricted to F_p columns
        Mat<K> fz = filt(k - 1, p - r);
        // solve d*fp*x = fz*y  ->  nullspace of [d*fp | -fz]
        Mat<K> rhs = fz;
        for (auto& row : rhs)
            for (auto& v : row) v = K(0) - v;
        Mat<K> sys = hcat(img, rhs);
        if (rows(sys) == 0) return fp;
        Mat<K> ns = nullspace(sys);
        // x-part coefficients applied to fp
        Mat<K> xpart(cols(fp), std::vector<K>(cols(ns), K(0)));
        for (Index r2 = 0; r2 < cols(fp); ++r2)
            for (Index c = 0; c < cols(ns); ++c) xpart[r2][c] = ns[r2][c];
        return mul(fp, xpart);
    }

    Index e_dim(Index k, int p, int r) const {
        Mat<K> z = cycles(k, p, r);
        Mat<K> zprev = cycles(k, p - 1, r - 1);
        Mat<K> zup = cycles(k + 1, p + r - 1, r - 1);
        Mat<K> dzup = mul(d(k + 1), zup);
        Mat<K> denom = hcat(zprev, dzup);
        return rank_of(hcat(z, denom)) - rank_of(denom);
    }

    Index d_rank(Index k, int p, int r) const {
        // rank of d_r out of E^r_{p, deg k}: dim((d Z^r_p + D_{p-r}) / D_{p-r})
        Mat<K> z = cycles(k, p, r);
        Mat<K> dz = mul(d(k), z);
        Mat<K> zprev = cycles(k - 1, p - r - 1, r - 1);
        Mat<K> zup = cycles(k, p - 1, r - 1);
        Mat<K> denom = hcat(zprev, mul(d(k), zup));
        return rank_of(hcat(dz, denom)) - rank_of(denom);
    }
};

// ---------------------------------------------------------------------------
// Iterated homology of a double complex: dims of H(H(X, d1), d2) per bidegree.
// Data: per-bidegree dimensions and the two commuting differentials.
// ---------------------------------------------------------------------------

template <class K>
struct DoubleComplexOracle {
    std::map<std::pair<int, int>, Index> dims;
    // maps keyed by source bidegree; d1: (i,j)->(i-1,j), d2: (i,j)->(i,j-1)
    std::map<std::pair<int, int>, Mat<K>> d1, d2;

    Index dim(std::pair<int, int> p) const {
        auto it = dims.find(p);
        return it == dims.end() ? 0 : it->second;
    }
    // row-major matrices cannot represent 0 x n, so zero maps out of a
    // nonempty source get one explicit zero row
    Mat<K> map1(std::pair<int, int> p) const {
        auto it = d1.find(p);
        if (it != d1.end() && !it->second.empty()) return it->second;
        return Mat<K>(std::max<Index>(dim({p.first - 1, p.second}), 1),
                      std::vector<K>(dim(p), K(0)));
    }
    Mat<K> map2(std::pair<int, int> p) const {
        auto it = d2.find(p);
        if (it != d2.end() && !it->second.empty()) return it->second;
        return Mat<K>(std::max<Index>(dim({p.first, p.second - 1}), 1),
                      std::vector<K>(dim(p), K(0)));
    }

    // Dims of H(H(X, first), second) per bidegree; first = d1 when d1_first.
    std::map<std::pair<int, int>, Index> iterated_dims(bool d1_first) const {
        using P = std::pair<int, int>;
        const P dir1 = d1_first ? P{-1, 0} : P{0, -1};
        const P dir2 = d1_first ? P{0, -1} : P{-1, 0};
        auto shift = [](P p, P d) { return P{p.first + d.first, p.second + d.second}; };
        auto first_map = [&](P p) { return d1_first ? map1(p) : map2(p); };
        auto second_map = [&](P p) { return d1_first ? map2(p) : map1(p); };

        std::set<P> all;
        for (auto& [k, v] : dims)
            if (v > 0)
                for (int dx = -1; dx <= 1; ++dx)
                    for (int dy = -1; dy <= 1; ++dy) all.insert({k.first + dx, k.second + dy});

        std::map<P, Mat<K>> ker1, img1;  // of the first differential
        std::map<P, Index> h1;
        for (auto& p : all) {
            ker1[p] = nullspace(first_map(p));
            img1[p] = first_map(shift(p, {-dir1.first, -dir1.second}));
            h1[p] = rank_of(ker1[p]) - rank_of(img1[p]);  // img lies inside ker
        }

        // rank of the induced second differential out of each bidegree:
        // classes second(ker1) modulo img1 at the target
        std::map<P, Index> rk_out;
        for (auto& p : all) {
            P tgt = shift(p, dir2);
            Mat<K> sec = mul(second_map(p), ker1[p]);
            Mat<K> img_t = img1.count(tgt) ? img1[tgt] : Mat<K>();
            rk_out[p] = rank_of(hcat(sec, img_t)) - rank_of(img_t);
        }

        std::map<P, Index> out;
        for (auto& p : all) {
            P src = shift(p, {-dir2.first, -dir2.second});
            Index v = h1[p] - rk_out[p] - (rk_out.count(src) ? rk_out[src] : 0);
            if (v != 0) out[p] = v;
        }
        return out;
    }
};

}  // namespace oracle
