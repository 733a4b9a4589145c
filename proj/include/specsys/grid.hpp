// Staircase combinatorics on a clamped integer grid: downsets stored as
// antichains of maximal points, lexicographic downsets for sheared orders,
// connected components of downset differences, and the standard shear
// matrices used by the secondary connections.
//
// Each axis i carries levels lo[i]-1 .. hi[i]+1; the two extreme levels are
// sentinels standing for -inf/+inf. All arithmetic on them is plain integer
// arithmetic, which is exact as long as the attached filtration is constant
// outside [lo, hi] (the filtration module enforces that).

#pragma once

#include "specsys/linalg.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cstdint>
#include <functional>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

namespace specsys {

using GridPoint = std::vector<int>;  // componentwise order

inline bool point_leq(const GridPoint& a, const GridPoint& b) {
    for (size_t i = 0; i < a.size(); ++i)
        if (a[i] > b[i]) return false;
    return true;
}

inline GridPoint point_meet(const GridPoint& a, const GridPoint& b) {
    GridPoint m(a.size());
    for (size_t i = 0; i < a.size(); ++i) m[i] = std::min(a[i], b[i]);
    return m;
}

inline GridPoint point_add(const GridPoint& a, const GridPoint& b) {
    GridPoint m(a.size());
    for (size_t i = 0; i < a.size(); ++i) m[i] = a[i] + b[i];
    return m;
}

inline GridPoint point_sub(const GridPoint& a, const GridPoint& b) {
    GridPoint m(a.size());
    for (size_t i = 0; i < a.size(); ++i) m[i] = a[i] - b[i];
    return m;
}

inline GridPoint unit_point(int n, int axis, int sign = 1) {
    GridPoint e(n, 0);
    if (axis >= 0) e[axis] = sign;
    return e;
}

using PointSet = std::set<GridPoint>;

struct GridMismatch : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

struct ClampedGrid {
    int n = 1;
    std::vector<int> lo, hi;

    ClampedGrid() : lo(1, 0), hi(1, 0) {}
    ClampedGrid(std::vector<int> lo_, std::vector<int> hi_)
        : n(static_cast<int>(lo_.size())), lo(std::move(lo_)), hi(std::move(hi_)) {
        if (lo.size() != hi.size() || lo.empty()) throw std::invalid_argument("grid bounds");
        for (int i = 0; i < n; ++i)
            if (lo[i] > hi[i]) throw std::invalid_argument("grid bounds: lo > hi");
    }

    int min_coord(int axis) const { return lo[axis] - 1; }
    int max_coord(int axis) const { return hi[axis] + 1; }

    bool in_box(const GridPoint& p) const {
        if (static_cast<int>(p.size()) != n) return false;
        for (int i = 0; i < n; ++i)
            if (p[i] < min_coord(i) || p[i] > max_coord(i)) return false;
        return true;
    }

    GridPoint clamp(GridPoint p) const {
        for (int i = 0; i < n; ++i) p[i] = std::clamp(p[i], min_coord(i), max_coord(i));
        return p;
    }

    GridPoint box_min() const {
        GridPoint p(n);
        for (int i = 0; i < n; ++i) p[i] = min_coord(i);
        return p;
    }
    GridPoint box_max() const {
        GridPoint p(n);
        for (int i = 0; i < n; ++i) p[i] = max_coord(i);
        return p;
    }

    std::size_t box_size() const {
        std::size_t s = 1;
        for (int i = 0; i < n; ++i) s *= static_cast<std::size_t>(max_coord(i) - min_coord(i) + 1);
        return s;
    }

    /// Visit every point of the box (odometer order).
    template <class F>
    void for_each_point(F&& f) const {
        GridPoint p = box_min();
        while (true) {
            f(p);
            int axis = 0;
            while (axis < n) {
                if (p[axis] < max_coord(axis)) {
                    ++p[axis];
                    break;
                }
                p[axis] = min_coord(axis);
                ++axis;
            }
            if (axis == n) return;
        }
    }

    bool operator==(const ClampedGrid&) const = default;
};

/// A downset of the clamped grid, canonically stored as the antichain of its
/// maximal points (empty antichain = empty downset).
class Downset {
public:
    Downset() = default;
    explicit Downset(ClampedGrid grid) : grid_(std::move(grid)) {}

    static Downset empty(const ClampedGrid& g) { return Downset(g); }

    static Downset full(const ClampedGrid& g) {
        Downset d(g);
        d.max_points_.push_back(g.box_max());
        return d;
    }

    static Downset principal(const ClampedGrid& g, const GridPoint& p) {
        if (!g.in_box(p)) throw GridMismatch("principal: point outside grid");
        Downset d(g);
        d.max_points_.push_back(p);
        return d;
    }

    /// Downward closure (within the box) of an arbitrary point set.
    static Downset closure(const ClampedGrid& g, const std::vector<GridPoint>& pts) {
        Downset d(g);
        for (const auto& p : pts) {
            if (!g.in_box(p)) throw GridMismatch("closure: point outside grid");
            d.max_points_.push_back(p);
        }
        d.prune();
        return d;
    }

    const ClampedGrid& grid() const { return grid_; }
    const std::vector<GridPoint>& max_points() const { return max_points_; }
    bool is_empty() const { return max_points_.empty(); }

    bool member(const GridPoint& p) const {
        for (const auto& m : max_points_)
            if (point_leq(p, m)) return true;
        return false;
    }

    friend Downset unite(const Downset& a, const Downset& b) {
        a.check_grid(b);
        Downset d(a.grid_);
        d.max_points_ = a.max_points_;
        d.max_points_.insert(d.max_points_.end(), b.max_points_.begin(), b.max_points_.end());
        d.prune();
        return d;
    }

    friend Downset intersect(const Downset& a, const Downset& b) {
        a.check_grid(b);
        Downset d(a.grid_);
        for (const auto& ma : a.max_points_)
            for (const auto& mb : b.max_points_) d.max_points_.push_back(point_meet(ma, mb));
        d.prune();
        return d;
    }

    /// Containment: a <= b iff a is a subset of b.
    friend bool leq(const Downset& a, const Downset& b) {
        a.check_grid(b);
        return std::all_of(a.max_points_.begin(), a.max_points_.end(),
                           [&](const GridPoint& m) { return b.member(m); });
    }

    friend bool operator==(const Downset& a, const Downset& b) {
        return a.grid_ == b.grid_ && a.max_points_ == b.max_points_;
    }
    friend bool operator!=(const Downset& a, const Downset& b) { return !(a == b); }
    friend bool operator<(const Downset& a, const Downset& b) {
        return a.max_points_ < b.max_points_;
    }

    /// Pointwise translation; coordinates clamp into the sentinel range.
    Downset translate(const GridPoint& v) const {
        Downset d(grid_);
        for (const auto& m : max_points_) d.max_points_.push_back(grid_.clamp(point_add(m, v)));
        d.prune();
        return d;
    }

    /// All box points of this downset.
    PointSet points() const {
        PointSet s;
        grid_.for_each_point([&](const GridPoint& p) {
            if (member(p)) s.insert(p);
        });
        return s;
    }

    void check_grid(const Downset& other) const {
        if (!(grid_ == other.grid_)) throw GridMismatch("downsets on different grids");
    }

private:
    void prune() {
        std::sort(max_points_.begin(), max_points_.end());
        max_points_.erase(std::unique(max_points_.begin(), max_points_.end()), max_points_.end());
        std::vector<GridPoint> keep;
        for (size_t i = 0; i < max_points_.size(); ++i) {
            bool dominated = false;
            for (size_t j = 0; j < max_points_.size() && !dominated; ++j)
                if (i != j && point_leq(max_points_[i], max_points_[j]) &&
                    max_points_[i] != max_points_[j])
                    dominated = true;
            if (!dominated) keep.push_back(max_points_[i]);
        }
        max_points_ = std::move(keep);
    }

    ClampedGrid grid_;
    std::vector<GridPoint> max_points_;
};

/// Finite set difference a \ b as explicit box points.
inline PointSet minus_points(const Downset& a, const Downset& b) {
    a.check_grid(b);
    PointSet s;
    a.grid().for_each_point([&](const GridPoint& p) {
        if (a.member(p) && !b.member(p)) s.insert(p);
    });
    return s;
}

/// Connected components of a point set under unit-step adjacency (P ~ P±e_i).
///
/// On order-convex sets (every downset difference is one) this partition
/// agrees with comparability-graph connectivity: a comparability edge X <= Y
/// is realized by the unit-step chain X, X+e_i, ..., Y, which stays inside
/// the set by order convexity.
inline std::vector<PointSet> components(const PointSet& s, const ClampedGrid& grid) {
    std::vector<PointSet> out;
    PointSet todo = s;
    while (!todo.empty()) {
        PointSet comp;
        std::vector<GridPoint> stack{*todo.begin()};
        todo.erase(todo.begin());
        while (!stack.empty()) {
            GridPoint p = stack.back();
            stack.pop_back();
            comp.insert(p);
            for (int i = 0; i < grid.n; ++i) {
                for (int sgn : {-1, 1}) {
                    GridPoint q = p;
                    q[i] += sgn;
                    auto it = todo.find(q);
                    if (it != todo.end()) {
                        stack.push_back(*it);
                        todo.erase(it);
                    }
                }
            }
        }
        out.push_back(std::move(comp));
    }
    std::sort(out.begin(), out.end(),
              [](const PointSet& a, const PointSet& b) { return *a.begin() < *b.begin(); });
    return out;
}

using IntMatrix = Eigen::Matrix<std::int64_t, Eigen::Dynamic, Eigen::Dynamic>;
using IntVector = Eigen::Matrix<std::int64_t, Eigen::Dynamic, 1>;

/// Unimodular reindexing matrix with non-negative entries, inverse cached.
class ShearMatrix {
public:
    explicit ShearMatrix(IntMatrix m) : m_(std::move(m)) {
        if (m_.rows() != m_.cols()) throw std::invalid_argument("shear: not square");
        for (Eigen::Index r = 0; r < m_.rows(); ++r)
            for (Eigen::Index c = 0; c < m_.cols(); ++c)
                if (m_(r, c) < 0) throw std::invalid_argument("shear: negative entry");
        inv_ = integral_inverse(m_);
    }

    static ShearMatrix identity(int n) { return ShearMatrix(IntMatrix::Identity(n, n)); }

    int n() const { return static_cast<int>(m_.rows()); }
    const IntMatrix& matrix() const { return m_; }
    const IntMatrix& inverse() const { return inv_; }

    GridPoint apply(const GridPoint& x) const { return mul(m_, x); }
    GridPoint apply_inverse(const GridPoint& y) const { return mul(inv_, y); }

    /// First k components of apply(x).
    std::vector<int> apply_prefix(const GridPoint& x, int k) const {
        GridPoint y = apply(x);
        return {y.begin(), y.begin() + k};
    }

    bool operator==(const ShearMatrix& o) const { return m_ == o.m_; }

private:
    static GridPoint mul(const IntMatrix& m, const GridPoint& x) {
        if (static_cast<int>(x.size()) != m.cols()) throw std::invalid_argument("shear apply: size");
        GridPoint y(m.rows());
        for (Eigen::Index r = 0; r < m.rows(); ++r) {
            std::int64_t acc = 0;
            for (Eigen::Index c = 0; c < m.cols(); ++c) acc += m(r, c) * x[c];
            y[r] = static_cast<int>(acc);
        }
        return y;
    }

    // Integer Gauss-Jordan over rationals; throws unless |det| = 1.
    static IntMatrix integral_inverse(const IntMatrix& m);

    IntMatrix m_;
    IntMatrix inv_;
};

inline IntMatrix ShearMatrix::integral_inverse(const IntMatrix& m) {
    const Eigen::Index n = m.rows();
    MatrixOf<Rational> q(n, n);
    for (Eigen::Index r = 0; r < n; ++r)
        for (Eigen::Index c = 0; c < n; ++c) q(r, c) = Rational(m(r, c));
    MatrixOf<Rational> qi;
    try {
        qi = invert(q);
    } catch (const std::domain_error&) {
        throw std::invalid_argument("shear: singular matrix");
    }
    IntMatrix inv(n, n);
    for (Eigen::Index r = 0; r < n; ++r)
        for (Eigen::Index c = 0; c < n; ++c) {
            const Rational& x = qi(r, c);
            if (boost::multiprecision::denominator(x.rep()) != 1)
                throw std::invalid_argument("shear: not unimodular");
            inv(r, c) = static_cast<std::int64_t>(boost::multiprecision::numerator(x.rep()));
        }
    return inv;
}

/// Per-component range of phi(X) over the grid box.
inline std::pair<IntVector, IntVector> shear_range(const ShearMatrix& phi, const ClampedGrid& g) {
    const int n = phi.n();
    IntVector mn(n), mx(n);
    GridPoint bmin = g.box_min(), bmax = g.box_max();
    for (int r = 0; r < n; ++r) {
        std::int64_t a = 0, b = 0;
        for (int c = 0; c < n; ++c) {
            a += phi.matrix()(r, c) * bmin[c];
            b += phi.matrix()(r, c) * bmax[c];
        }
        mn(r) = a;
        mx(r) = b;
    }
    return {mn, mx};
}

/// The lexicographic downset {X : phi_{1..k}(X) <=_lex prefix}.
///
/// Computed by exhaustive scan of the clamped box; sentinel coordinates are
/// treated as genuine integers. Prefix entries are saturated into the range
/// of phi over the box, so arbitrarily large/small prefixes are legal.
inline Downset lex_downset(const ClampedGrid& g, std::vector<int> prefix, const ShearMatrix& phi) {
    const int k = static_cast<int>(prefix.size());
    if (k < 1 || k > phi.n() || phi.n() != g.n)
        throw std::invalid_argument("lex_downset: bad prefix length");
    auto [mn, mx] = shear_range(phi, g);
    for (int j = 0; j < k; ++j)
        prefix[j] = static_cast<int>(
            std::clamp<std::int64_t>(prefix[j], mn(j) - 1, mx(j) + 1));
    PointSet members;
    g.for_each_point([&](const GridPoint& x) {
        std::vector<int> y = phi.apply_prefix(x, k);
        if (std::lexicographical_compare(y.begin(), y.end(), prefix.begin(), prefix.end()) ||
            y == prefix)
            members.insert(x);
    });
    // The member set is downward closed, so points with no successor inside
    // it are exactly the antichain of maximal points.
    std::vector<GridPoint> maximal;
    for (const auto& p : members) {
        bool max = true;
        for (int i = 0; i < g.n && max; ++i) {
            GridPoint up = p;
            up[i] += 1;
            if (g.in_box(up) && members.count(up)) max = false;
        }
        if (max) maximal.push_back(p);
    }
    return Downset::closure(g, maximal);
}

/// Shear automorphism phi_k: X -> (x_{k+1},...,x_n, sum_{i=1..k} x_i, sum_{i=2..k} x_i, ..., x_k).
inline ShearMatrix phi_k(int n, int k) {
    if (k < 0 || k > n) throw std::invalid_argument("phi_k: k out of range");
    IntMatrix m = IntMatrix::Zero(n, n);
    for (int r = 0; r < n - k; ++r) m(r, k + r) = 1;
    for (int j = 1; j <= k; ++j)
        for (int i = j; i <= k; ++i) m(n - k + j - 1, i - 1) = 1;
    return ShearMatrix(m);
}

/// Offset variant phi_k^Q: X -> (x_{k+1},...,x_n, x_1 + q_1*sum_{i=2..k} x_i, ..., x_k).
inline ShearMatrix phi_kQ(int n, int k, const GridPoint& q) {
    if (k < 0 || k > n) throw std::invalid_argument("phi_kQ: k out of range");
    if (static_cast<int>(q.size()) != n) throw std::invalid_argument("phi_kQ: offset size");
    for (int v : q)
        if (v < 0) throw std::invalid_argument("phi_kQ: negative offset");
    IntMatrix m = IntMatrix::Zero(n, n);
    for (int r = 0; r < n - k; ++r) m(r, k + r) = 1;
    for (int j = 1; j <= k; ++j) {
        m(n - k + j - 1, j - 1) = 1;
        for (int i = j + 1; i <= k; ++i) m(n - k + j - 1, i - 1) = q[j - 1];
    }
    return ShearMatrix(m);
}

/// Unit vector with the conventions e_0 = 0 and e_{-1} = -e_n.
inline GridPoint secondary_unit(int n, int k) {
    if (k == 0) return GridPoint(n, 0);
    if (k == -1) return unit_point(n, n - 1, -1);
    return unit_point(n, k - 1);
}

/// T^k_P = A(phi_k(P); phi_k).
inline Downset t_set(const ClampedGrid& g, const GridPoint& p, int k) {
    ShearMatrix phi = phi_k(g.n, k);
    return lex_downset(g, phi.apply(p), phi);
}

/// a_k^Q = e_k - sum_{i<k} q_i a_i^Q (a_0 = 0).
inline GridPoint a_vec(int n, int k, const GridPoint& q) {
    if (k < 0 || k > n) throw std::invalid_argument("a_vec: k out of range");
    std::vector<GridPoint> a(k + 1, GridPoint(n, 0));
    for (int j = 1; j <= k; ++j) {
        a[j] = unit_point(n, j - 1);
        for (int i = 1; i < j; ++i)
            for (int c = 0; c < n; ++c) a[j][c] -= q[i - 1] * a[i][c];
    }
    return a[k];
}

/// V_k by the alternating recurrence V_{k+1} = V_k sqcup (e_{k+1} - V_k); |V_k| = 2^k.
inline PointSet v_set(int n, int k) {
    if (k < 0 || k > n) throw std::invalid_argument("v_set: k out of range");
    PointSet v{GridPoint(n, 0)};
    for (int j = 1; j <= k; ++j) {
        PointSet next = v;
        for (const auto& x : v) next.insert(point_sub(unit_point(n, j - 1), x));
        v = std::move(next);
    }
    return v;
}

/// V_k^Q = {0..q_k} a_k^Q + V_{k-1}^Q; the discrete affine cube.
inline PointSet v_setQ(int n, int k, const GridPoint& q) {
    if (k < 0 || k > n) throw std::invalid_argument("v_setQ: k out of range");
    for (int v : q)
        if (v < 0) throw std::invalid_argument("v_setQ: negative offset");
    PointSet v{GridPoint(n, 0)};
    for (int j = 1; j <= k; ++j) {
        GridPoint aj = a_vec(n, j, q);
        PointSet next;
        for (int t = 0; t <= q[j - 1]; ++t)
            for (const auto& x : v) {
                GridPoint y = x;
                for (int c = 0; c < n; ++c) y[c] += t * aj[c];
                next.insert(y);
            }
        v = std::move(next);
    }
    return v;
}

/// All downsets of the grid (guarded; intended for small boxes).
inline std::vector<Downset> enumerate_downsets(const ClampedGrid& g, std::size_t cap = 2000) {
    std::vector<GridPoint> pts;
    g.for_each_point([&](const GridPoint& p) { pts.push_back(p); });
    std::sort(pts.begin(), pts.end());  // lex order is a linear extension
    std::vector<Downset> out;
    PointSet current;
    std::function<void(std::size_t)> go = [&](std::size_t i) {
        if (out.size() > cap) throw std::runtime_error("enumerate_downsets: cap exceeded");
        if (i == pts.size()) {
            std::vector<GridPoint> v(current.begin(), current.end());
            out.push_back(Downset::closure(g, v));
            return;
        }
        go(i + 1);  // point absent
        bool ok = true;
        for (int ax = 0; ax < g.n && ok; ++ax) {
            GridPoint below = pts[i];
            below[ax] -= 1;
            if (g.in_box(below) && !current.count(below)) ok = false;
        }
        if (ok) {
            current.insert(pts[i]);
            go(i + 1);
            current.erase(pts[i]);
        }
    };
    go(0);
    std::sort(out.begin(), out.end());
    return out;
}

}  // namespace specsys
