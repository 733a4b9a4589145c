// Downset filtrations of a finite chain complex, built from n Z-filtrations:
// F_P is the intersection of the per-axis levels at P and F_p the interior
// sum of F_P over the downset p. Validation covers nesting, d-invariance and
// distributivity (which the connection drivers require).

#pragma once

#include "specsys/chain.hpp"
#include "specsys/grid.hpp"
#include "specsys/linalg.hpp"
#include "specsys/parallel.hpp"

#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

namespace specsys {

struct FiltrationError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

/// One Z-filtration of the complex, stored on levels lo-1 .. hi+1. The bottom
/// sentinel carries the constant-below value, the top sentinel is all of C.
template <class K>
struct AxisFiltration {
    int lo = 0, hi = 0;
    std::vector<GradedSubspace<K>> levels;  // size hi - lo + 3

    const GradedSubspace<K>& level(int t) const {
        const int i = std::clamp(t, lo - 1, hi + 1) - (lo - 1);
        return levels[i];
    }
};

template <class K>
void validate_axis(const ChainComplex<K>& cx, const AxisFiltration<K>& ax, int axis) {
    for (size_t i = 0; i + 1 < ax.levels.size(); ++i) {
        if (!contains(ax.levels[i + 1], ax.levels[i]))
            throw FiltrationError("axis " + std::to_string(axis) + ": nesting violated at level " +
                                  std::to_string(ax.lo - 1 + static_cast<int>(i)));
    }
    for (size_t i = 0; i < ax.levels.size(); ++i) {
        if (!is_subcomplex(cx, ax.levels[i]))
            throw FiltrationError("axis " + std::to_string(axis) + ": level " +
                                  std::to_string(ax.lo - 1 + static_cast<int>(i)) +
                                  " is not a subcomplex");
    }
    if (!(ax.levels.back() == GradedSubspace<K>::full(cx)))
        throw FiltrationError("axis " + std::to_string(axis) + ": top level must be the whole complex");
}

struct ValidationIssue {
    std::string check;
    std::string witness;
};

struct ValidationReport {
    bool distributive = true;
    bool ok = true;
    std::size_t pairs_checked = 0;
    std::vector<ValidationIssue> issues;

    void fail(const std::string& check, const std::string& witness, bool breaks_distributivity) {
        ok = false;
        if (breaks_distributivity) distributive = false;
        issues.push_back({check, witness});
    }
};

inline std::string describe(const Downset& d) {
    std::ostringstream os;
    os << "{";
    bool first = true;
    for (const auto& m : d.max_points()) {
        if (!first) os << ",";
        first = false;
        os << "(";
        for (size_t i = 0; i < m.size(); ++i) os << (i ? "," : "") << m[i];
        os << ")";
    }
    os << "}";
    return os.str();
}

template <class K>
class DownsetFiltration {
public:
    DownsetFiltration() = default;
    DownsetFiltration(std::shared_ptr<const ChainComplex<K>> cx, ClampedGrid grid,
                      std::vector<AxisFiltration<K>> axes,
                      std::map<std::string, GridPoint> multidegrees = {})
        : cx_(std::move(cx)),
          grid_(std::move(grid)),
          axes_(std::move(axes)),
          multidegrees_(std::move(multidegrees)),
          state_(std::make_shared<Memo>()) {}

    const ChainComplex<K>& complex() const { return *cx_; }
    std::shared_ptr<const ChainComplex<K>> complex_ptr() const { return cx_; }
    const ClampedGrid& grid() const { return grid_; }
    int axis_count() const { return grid_.n; }
    const std::vector<AxisFiltration<K>>& axes() const { return axes_; }
    const std::map<std::string, GridPoint>& multidegrees() const { return multidegrees_; }

    /// F at a single grid point: intersection of the axis levels.
    GradedSubspace<K> at_point(const GridPoint& p) const {
        if (!grid_.in_box(p)) throw GridMismatch("point outside grid");
        std::lock_guard<std::mutex> lock(state_->mutex);
        auto it = state_->point_cache.find(p);
        if (it != state_->point_cache.end()) return it->second;
        GradedSubspace<K> g = axes_[0].level(p[0]);
        for (int i = 1; i < grid_.n; ++i) g = intersect(g, axes_[i].level(p[i]));
        state_->point_cache.emplace(p, g);
        return g;
    }

    /// F_p = sum of F_P over p (maximal points suffice since F_P is monotone).
    GradedSubspace<K> evaluate(const Downset& p) const {
        if (!(p.grid() == grid_)) throw GridMismatch("downset on a different grid");
        {
            std::lock_guard<std::mutex> lock(state_->mutex);
            auto it = state_->cache.find(p.max_points());
            if (it != state_->cache.end()) return it->second;
        }
        GradedSubspace<K> g = GradedSubspace<K>::zero(*cx_);
        for (const auto& m : p.max_points()) g = sum(g, at_point(m));
        std::lock_guard<std::mutex> lock(state_->mutex);
        state_->cache.emplace(p.max_points(), g);
        return g;
    }

    /// Grid points where F_{A(P)} properly exceeds F_{A(P) minus P}; every
    /// nonzero slice term sits over one of these.
    std::vector<GridPoint> support() const {
        std::vector<GridPoint> out;
        grid_.for_each_point([&](const GridPoint& p) {
            DimVec full = evaluate(Downset::principal(grid_, p)).dims();
            std::vector<GridPoint> below;
            for (int i = 0; i < grid_.n; ++i) {
                GridPoint q = p;
                q[i] -= 1;
                if (grid_.in_box(q)) below.push_back(q);
            }
            DimVec cut = evaluate(Downset::closure(grid_, below)).dims();
            if (full != cut) out.push_back(p);
        });
        return out;
    }

    ValidationReport validate(std::optional<std::pair<unsigned, int>> sampled = {}) const;

    bool distributive() const {
        {
            std::lock_guard<std::mutex> lock(state_->mutex);
            if (state_->distributive.has_value()) return *state_->distributive;
        }
        ValidationReport rep = grid_.box_size() <= 16
                                   ? validate()
                                   : validate(std::pair<unsigned, int>{12345u, 80});
        return rep.distributive;
    }

    DownsetFiltration permuted(const std::vector<int>& perm) const {
        if (static_cast<int>(perm.size()) != grid_.n)
            throw FiltrationError("permutation size mismatch");
        std::vector<int> lo(grid_.n), hi(grid_.n);
        std::vector<AxisFiltration<K>> axes(grid_.n);
        for (int i = 0; i < grid_.n; ++i) {
            lo[i] = grid_.lo[perm[i]];
            hi[i] = grid_.hi[perm[i]];
            axes[i] = axes_[perm[i]];
        }
        std::map<std::string, GridPoint> md;
        for (const auto& [name, deg] : multidegrees_) {
            GridPoint d(grid_.n);
            for (int i = 0; i < grid_.n; ++i) d[i] = deg[perm[i]];
            md[name] = d;
        }
        return DownsetFiltration(cx_, ClampedGrid(lo, hi), std::move(axes), std::move(md));
    }

private:
    struct Memo {
        mutable std::mutex mutex;
        std::map<std::vector<GridPoint>, GradedSubspace<K>> cache;
        std::map<GridPoint, GradedSubspace<K>> point_cache;
        std::optional<bool> distributive;
    };

    std::shared_ptr<const ChainComplex<K>> cx_;
    ClampedGrid grid_;
    std::vector<AxisFiltration<K>> axes_;
    std::map<std::string, GridPoint> multidegrees_;
    std::shared_ptr<Memo> state_;
};

/// Filtration induced by a multidegree assignment: axis i at level t spans
/// the generators with i-th multidegree <= t. Distributive by construction.
/// n_hint fixes the axis count when the complex has no generators.
template <class K>
DownsetFiltration<K> from_multidegrees(std::shared_ptr<const ChainComplex<K>> cx,
                                       const std::map<std::string, GridPoint>& multideg,
                                       int n_hint = 0) {
    const ChainComplex<K>& c = *cx;
    int n = -1;
    for (Index k = 0; k <= c.top_degree(); ++k)
        for (const auto& g : c.generators(k)) {
            auto it = multideg.find(g);
            if (it == multideg.end())
                throw FiltrationError("generator '" + g + "' has no multidegree");
            if (n < 0) n = static_cast<int>(it->second.size());
            if (static_cast<int>(it->second.size()) != n)
                throw FiltrationError("inconsistent multidegree arity for '" + g + "'");
        }
    if (n <= 0) n = n_hint > 0 ? n_hint : 1;

    // boundary must not increase multidegrees
    for (Index k = 1; k <= c.top_degree(); ++k) {
        const MatrixOf<K> d = c.d(k);
        for (Index col = 0; col < c.dim(k); ++col) {
            const GridPoint& dg = multideg.at(c.generators(k)[col]);
            for (Index row = 0; row < c.dim(k - 1); ++row) {
                if (scalar_is_zero(d(row, col))) continue;
                const GridPoint& dh = multideg.at(c.generators(k - 1)[row]);
                if (!point_leq(dh, dg))
                    throw FiltrationError("boundary violates multidegree monotonicity: d(" +
                                          c.generators(k)[col] + ") hits " +
                                          c.generators(k - 1)[row]);
            }
        }
    }

    std::vector<int> lo(n, 0), hi(n, 0);
    bool first = true;
    for (const auto& [name, deg] : multideg) {
        (void)name;
        for (int i = 0; i < n; ++i) {
            lo[i] = first ? deg[i] : std::min(lo[i], deg[i]);
            hi[i] = first ? deg[i] : std::max(hi[i], deg[i]);
        }
        first = false;
    }

    std::vector<AxisFiltration<K>> axes(n);
    for (int i = 0; i < n; ++i) {
        axes[i].lo = lo[i];
        axes[i].hi = hi[i];
        for (int t = lo[i] - 1; t <= hi[i] + 1; ++t) {
            GradedSubspace<K> level;
            for (Index k = 0; k <= c.top_degree(); ++k) {
                MatrixOf<K> cols(c.dim(k), c.dim(k));
                Index m = 0;
                for (Index col = 0; col < c.dim(k); ++col) {
                    if (multideg.at(c.generators(k)[col])[i] <= t) {
                        cols.col(m) = MatrixOf<K>::Identity(c.dim(k), c.dim(k)).col(col);
                        ++m;
                    }
                }
                level.parts.push_back(Subspace<K>::span(cols.leftCols(m)));
            }
            axes[i].levels.push_back(std::move(level));
        }
        validate_axis(c, axes[i], i);
    }
    return DownsetFiltration<K>(std::move(cx), ClampedGrid(lo, hi), std::move(axes), multideg);
}

/// Filtration from explicit graded spans at sparse ascending levels (constant
/// in between, zero below the first, all of C at the top sentinel).
template <class K>
DownsetFiltration<K> from_explicit_spans(
    std::shared_ptr<const ChainComplex<K>> cx,
    const std::vector<std::vector<std::pair<int, GradedSubspace<K>>>>& axes_spec) {
    const ChainComplex<K>& c = *cx;
    const int n = static_cast<int>(axes_spec.size());
    if (n == 0) throw FiltrationError("need at least one axis");
    std::vector<int> lo(n), hi(n);
    std::vector<AxisFiltration<K>> axes(n);
    for (int i = 0; i < n; ++i) {
        if (axes_spec[i].empty()) throw FiltrationError("axis " + std::to_string(i) + " has no levels");
        for (size_t j = 0; j + 1 < axes_spec[i].size(); ++j)
            if (axes_spec[i][j].first >= axes_spec[i][j + 1].first)
                throw FiltrationError("axis " + std::to_string(i) + ": levels must increase");
        lo[i] = axes_spec[i].front().first;
        hi[i] = axes_spec[i].back().first;
        axes[i].lo = lo[i];
        axes[i].hi = hi[i];
        GradedSubspace<K> cur = GradedSubspace<K>::zero(c);
        size_t next = 0;
        for (int t = lo[i] - 1; t <= hi[i]; ++t) {
            if (next < axes_spec[i].size() && axes_spec[i][next].first == t) {
                const GradedSubspace<K>& level = axes_spec[i][next].second;
                if (!contains(level, cur))
                    throw FiltrationError("axis " + std::to_string(i) +
                                          ": nesting violated at level " + std::to_string(t));
                cur = level;
                ++next;
            }
            axes[i].levels.push_back(cur);
        }
        axes[i].levels.push_back(GradedSubspace<K>::full(c));
        validate_axis(c, axes[i], i);
    }
    return DownsetFiltration<K>(std::move(cx), ClampedGrid(lo, hi), std::move(axes));
}

/// Convenience form: levels given by generator names (coordinate spans).
template <class K>
DownsetFiltration<K> from_explicit(
    std::shared_ptr<const ChainComplex<K>> cx,
    const std::vector<std::vector<std::pair<int, std::vector<std::string>>>>& axes_spec) {
    const ChainComplex<K>& c = *cx;
    std::vector<std::vector<std::pair<int, GradedSubspace<K>>>> spans(axes_spec.size());
    for (size_t i = 0; i < axes_spec.size(); ++i)
        for (const auto& [t, names] : axes_spec[i]) {
            GradedSubspace<K> level;
            for (Index k = 0; k <= c.top_degree(); ++k) {
                MatrixOf<K> cols = MatrixOf<K>::Zero(c.dim(k), c.dim(k));
                Index m = 0;
                for (const auto& name : names) {
                    auto [deg, col] = c.find_generator(name);
                    if (deg == k) {
                        cols(col, m) = K(1);
                        ++m;
                    }
                }
                level.parts.push_back(Subspace<K>::span(cols.leftCols(m)));
            }
            spans[i].push_back({t, std::move(level)});
        }
    return from_explicit_spans<K>(std::move(cx), spans);
}

template <class K>
ValidationReport DownsetFiltration<K>::validate(
    std::optional<std::pair<unsigned, int>> sampled) const {
    ValidationReport rep;
    std::vector<Downset> pool;
    if (!sampled) {
        pool = enumerate_downsets(grid_, 600);
    } else {
        auto [seed, count] = *sampled;
        std::mt19937_64 rng(seed);
        std::vector<GridPoint> box;
        grid_.for_each_point([&](const GridPoint& p) { box.push_back(p); });
        pool.push_back(Downset::empty(grid_));
        pool.push_back(Downset::full(grid_));
        while (static_cast<int>(pool.size()) < count) {
            std::vector<GridPoint> gens;
            const int m = 1 + static_cast<int>(rng() % 3);
            for (int j = 0; j < m; ++j) gens.push_back(box[rng() % box.size()]);
            pool.push_back(Downset::closure(grid_, gens));
        }
    }

    for (const auto& p : pool) {
        GradedSubspace<K> fp = evaluate(p);
        if (!is_subcomplex(*cx_, fp))
            rep.fail("subcomplex", "d(F_p) not in F_p at p=" + describe(p), false);
    }
    std::vector<std::pair<size_t, size_t>> pairs;
    for (size_t i = 0; i < pool.size(); ++i)
        for (size_t j = i; j < pool.size(); ++j) pairs.push_back({i, j});
    std::vector<std::vector<ValidationIssue>> found(pairs.size());
    parallel_for(pairs.size(), [&](size_t t) {
        const Downset& a = pool[pairs[t].first];
        const Downset& b = pool[pairs[t].second];
        GradedSubspace<K> fa = evaluate(a), fb = evaluate(b);
        if (leq(a, b) && !contains(fb, fa))
            found[t].push_back(
                {"monotone", "F not monotone on " + describe(a) + " <= " + describe(b)});
        GradedSubspace<K> meet = evaluate(intersect(a, b));
        if (!(meet == intersect(fa, fb)))
            found[t].push_back({"distributive-meet", "F_{a cap b} != F_a cap F_b for a=" +
                                                         describe(a) + " b=" + describe(b)});
        GradedSubspace<K> join = evaluate(unite(a, b));
        if (!(join == sum(fa, fb)))
            found[t].push_back({"distributive-join", "F_{a cup b} != F_a + F_b for a=" +
                                                         describe(a) + " b=" + describe(b)});
    });
    rep.pairs_checked += pairs.size();
    for (const auto& issues : found)
        for (const auto& issue : issues)
            rep.fail(issue.check, issue.witness, issue.check.rfind("distributive", 0) == 0 ||
                                                     issue.check == "monotone");
    {
        std::lock_guard<std::mutex> lock(state_->mutex);
        if (!state_->distributive.has_value() || !rep.distributive)
            state_->distributive = rep.distributive;
    }
    return rep;
}

}  // namespace specsys
