// Exact linear algebra over a field scalar K: reduced column echelon forms,
// the subspace lattice (sum, intersection, containment), preimages under
// linear maps, and subquotients with explicit lift/project matrices.
//
// Every subspace is kept in a canonical reduced column echelon basis, so
// subspace equality is plain matrix equality.

#pragma once

#include "specsys/scalar.hpp"

#include <Eigen/Dense>

#include <stdexcept>
#include <string>
#include <vector>

namespace specsys {

using Index = Eigen::Index;

template <class K>
using MatrixOf = Eigen::Matrix<K, Eigen::Dynamic, Eigen::Dynamic>;

template <class K>
using VectorOf = Eigen::Matrix<K, Eigen::Dynamic, 1>;

using DimVec = std::vector<Index>;

struct DimensionMismatch : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

struct MembershipError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

/// In-place reduced column echelon form.
///
/// After the call the first `rank` columns of `m` form the canonical basis of
/// the original column space: pivot rows strictly increase, pivots are 1, and
/// a pivot row is zero in every other column. If `ops` is non-null it must be
/// square with m.cols() columns; the same column operations are applied to it,
/// so (original m) * ops == (echelonized m).
template <class K>
Index column_echelon_inplace(MatrixOf<K>& m, MatrixOf<K>* ops = nullptr) {
    const Index rows = m.rows(), cols = m.cols();
    Index rank = 0;
    for (Index r = 0; r < rows && rank < cols; ++r) {
        Index pivot = -1;
        for (Index c = rank; c < cols; ++c) {
            if (!scalar_is_zero(m(r, c))) {
                pivot = c;
                break;
            }
        }
        if (pivot < 0) continue;
        if (pivot != rank) {
            m.col(rank).swap(m.col(pivot));
            if (ops) ops->col(rank).swap(ops->col(pivot));
        }
        const K inv = K(1) / m(r, rank);
        m.col(rank) *= inv;
        if (ops) ops->col(rank) *= inv;
        for (Index c = 0; c < cols; ++c) {
            if (c == rank || scalar_is_zero(m(r, c))) continue;
            const K f = m(r, c);
            m.col(c) -= f * m.col(rank);
            if (ops) ops->col(c) -= f * ops->col(rank);
        }
        ++rank;
    }
    return rank;
}

template <class K>
Index matrix_rank(MatrixOf<K> m) {
    return column_echelon_inplace(m);
}

/// Basis of {x : m x = 0}, canonical.
template <class K>
MatrixOf<K> kernel_basis(MatrixOf<K> m) {
    MatrixOf<K> ops = MatrixOf<K>::Identity(m.cols(), m.cols());
    const Index rank = column_echelon_inplace(m, &ops);
    MatrixOf<K> ker = ops.rightCols(m.cols() - rank);
    column_echelon_inplace(ker);
    return ker;
}

/// A linear subspace of K^ambient with canonical echelon basis.
template <class K>
class Subspace {
public:
    Subspace() = default;
    explicit Subspace(Index ambient) : ambient_(ambient), basis_(ambient, 0) {}

    /// Span of the columns of `gens`.
    static Subspace span(MatrixOf<K> gens) {
        Subspace s;
        s.ambient_ = gens.rows();
        const Index rank = column_echelon_inplace(gens);
        s.basis_ = gens.leftCols(rank);
        return s;
    }

    static Subspace zero(Index ambient) { return Subspace(ambient); }

    static Subspace full(Index ambient) {
        Subspace s;
        s.ambient_ = ambient;
        s.basis_ = MatrixOf<K>::Identity(ambient, ambient);
        return s;
    }

    Index ambient() const { return ambient_; }
    Index dim() const { return basis_.cols(); }
    const MatrixOf<K>& basis() const { return basis_; }

    bool contains(const VectorOf<K>& v) const {
        check_ambient(v.rows());
        VectorOf<K> w = reduce_against(v);
        for (Index r = 0; r < w.rows(); ++r)
            if (!scalar_is_zero(w(r))) return false;
        return true;
    }

    bool contains(const Subspace& other) const {
        check_ambient(other.ambient_);
        for (Index c = 0; c < other.dim(); ++c)
            if (!contains(VectorOf<K>(other.basis_.col(c)))) return false;
        return true;
    }

    friend bool operator==(const Subspace& a, const Subspace& b) {
        return a.ambient_ == b.ambient_ && a.basis_.rows() == b.basis_.rows() &&
               a.basis_.cols() == b.basis_.cols() && a.basis_ == b.basis_;
    }
    friend bool operator!=(const Subspace& a, const Subspace& b) { return !(a == b); }

    /// Coordinates of v in this basis; throws MembershipError if v is outside.
    VectorOf<K> coordinates(const VectorOf<K>& v) const {
        check_ambient(v.rows());
        VectorOf<K> coeff = VectorOf<K>::Zero(dim());
        VectorOf<K> w = v;
        for (Index c = 0; c < dim(); ++c) {
            const Index pr = pivot_row(c);
            coeff(c) = w(pr);
            if (!scalar_is_zero(coeff(c))) w -= coeff(c) * basis_.col(c);
        }
        for (Index r = 0; r < w.rows(); ++r)
            if (!scalar_is_zero(w(r))) throw MembershipError("vector outside subspace");
        return coeff;
    }

    void check_ambient(Index other) const {
        if (ambient_ != other)
            throw DimensionMismatch("ambient dimension mismatch: " + std::to_string(ambient_) +
                                    " vs " + std::to_string(other));
    }

private:
    VectorOf<K> reduce_against(VectorOf<K> v) const {
        for (Index c = 0; c < dim(); ++c) {
            const Index pr = pivot_row(c);
            if (!scalar_is_zero(v(pr))) v -= v(pr) * basis_.col(c);
        }
        return v;
    }

    Index pivot_row(Index c) const {
        for (Index r = 0; r < basis_.rows(); ++r)
            if (!scalar_is_zero(basis_(r, c))) return r;
        throw std::logic_error("zero column in echelon basis");
    }

    Index ambient_ = 0;
    MatrixOf<K> basis_;
};

template <class K>
MatrixOf<K> invert(const MatrixOf<K>& a);

/// Rank, canonical column basis, and the column-operation recorder with
/// m * ops = [basis | 0].
template <class K>
struct Echelon {
    Index rank = 0;
    Subspace<K> column_basis;
    MatrixOf<K> ops;
};

template <class K>
Echelon<K> echelonize(MatrixOf<K> m) {
    Echelon<K> e;
    e.ops = MatrixOf<K>::Identity(m.cols(), m.cols());
    e.rank = column_echelon_inplace(m, &e.ops);
    e.column_basis = Subspace<K>::span(m.leftCols(e.rank));
    return e;
}

template <class K>
Subspace<K> sum(const Subspace<K>& u, const Subspace<K>& v) {
    u.check_ambient(v.ambient());
    MatrixOf<K> cat(u.ambient(), u.dim() + v.dim());
    cat << u.basis(), v.basis();
    return Subspace<K>::span(std::move(cat));
}

/// Intersection via the kernel of the concatenated bases.
template <class K>
Subspace<K> intersect(const Subspace<K>& u, const Subspace<K>& v) {
    u.check_ambient(v.ambient());
    if (u.dim() == 0 || v.dim() == 0) return Subspace<K>::zero(u.ambient());
    MatrixOf<K> cat(u.ambient(), u.dim() + v.dim());
    cat << u.basis(), -v.basis();
    MatrixOf<K> ker = kernel_basis(std::move(cat));
    return Subspace<K>::span(u.basis() * ker.topRows(u.dim()));
}

/// Image of a subspace under a linear map.
template <class K>
Subspace<K> apply(const MatrixOf<K>& f, const Subspace<K>& w) {
    w.check_ambient(f.cols());
    return Subspace<K>::span(f * w.basis());
}

/// Preimage {x : f(x) in w}; always contains ker f.
template <class K>
Subspace<K> preimage(const MatrixOf<K>& f, const Subspace<K>& w) {
    w.check_ambient(f.rows());
    const Index n = f.cols();
    if (w.dim() == 0) return Subspace<K>::span(kernel_basis(MatrixOf<K>(f)));
    MatrixOf<K> cat(f.rows(), n + w.dim());
    cat << f, -w.basis();
    MatrixOf<K> ker = kernel_basis(std::move(cat));
    return Subspace<K>::span(MatrixOf<K>(ker.topRows(n)));
}

/// The subquotient top/(top ∩ bottom) with explicit representatives.
///
/// `lift` columns are representative vectors; `project` maps any ambient
/// vector of top + bottom to its class coordinates (a class is zero exactly
/// when the vector lies in bottom).
template <class K>
struct Subquotient {
    Index dim = 0;
    Subspace<K> top, bottom, carrier;  // carrier = top + bottom
    MatrixOf<K> lift;                  // ambient x dim
    MatrixOf<K> project;               // dim x ambient

    VectorOf<K> project_member(const VectorOf<K>& v) const {
        if (!carrier.contains(v)) throw MembershipError("vector outside top + bottom");
        return project * v;
    }
};

template <class K>
Subquotient<K> subquotient(const Subspace<K>& top, const Subspace<K>& bottom) {
    top.check_ambient(bottom.ambient());
    const Index ambient = top.ambient();
    Subquotient<K> q;
    q.top = top;
    q.bottom = bottom;
    q.carrier = sum(top, bottom);

    // Extend a basis of top ∩ bottom by columns of top: the added columns are
    // the class representatives.
    Subspace<K> meet = intersect(top, bottom);
    q.dim = top.dim() - meet.dim();
    MatrixOf<K> work(ambient, meet.dim() + q.dim);
    work.leftCols(meet.dim()) = meet.basis();
    Index have = meet.dim();
    MatrixOf<K> probe = work.leftCols(have);
    Subspace<K> spanned = meet;
    q.lift = MatrixOf<K>(ambient, q.dim);
    Index taken = 0;
    for (Index c = 0; c < top.dim() && taken < q.dim; ++c) {
        VectorOf<K> cand = top.basis().col(c);
        if (spanned.contains(cand)) continue;
        q.lift.col(taken++) = cand;
        work.col(have++) = cand;
        spanned = Subspace<K>::span(work.leftCols(have));
    }

    // Square change of basis [lift | bottom-basis | complement]; the top rows
    // of its inverse are the class-coordinate functionals.
    MatrixOf<K> frame(ambient, q.dim + bottom.dim());
    frame << q.lift, bottom.basis();
    MatrixOf<K> square(ambient, ambient);
    square.leftCols(frame.cols()) = frame;
    Subspace<K> sp = Subspace<K>::span(frame);
    Index extra = frame.cols();
    for (Index r = 0; r < ambient && extra < ambient; ++r) {
        VectorOf<K> e = VectorOf<K>::Zero(ambient);
        e(r) = K(1);
        if (sp.contains(e)) continue;
        square.col(extra++) = e;
        MatrixOf<K> acc(ambient, extra);
        acc = square.leftCols(extra);
        sp = Subspace<K>::span(acc);
    }
    MatrixOf<K> inv = invert(square);
    q.project = inv.topRows(q.dim);
    return q;
}

/// Any exact solution X of A X = B; throws MembershipError if inconsistent.
template <class K>
MatrixOf<K> solve_linear(const MatrixOf<K>& a, const MatrixOf<K>& b) {
    if (a.rows() != b.rows()) throw DimensionMismatch("solve_linear: row mismatch");
    Echelon<K> e = echelonize(a);
    MatrixOf<K> x = MatrixOf<K>::Zero(a.cols(), b.cols());
    for (Index c = 0; c < b.cols(); ++c) {
        VectorOf<K> coeff;
        try {
            coeff = e.column_basis.coordinates(VectorOf<K>(b.col(c)));
        } catch (const MembershipError&) {
            throw MembershipError("solve_linear: inconsistent system");
        }
        VectorOf<K> padded = VectorOf<K>::Zero(a.cols());
        padded.topRows(e.rank) = coeff;
        x.col(c) = e.ops * padded;
    }
    return x;
}

/// Exact inverse of a square matrix (throws if singular).
template <class K>
MatrixOf<K> invert(const MatrixOf<K>& a) {
    if (a.rows() != a.cols()) throw DimensionMismatch("invert: matrix not square");
    const Index n = a.rows();
    MatrixOf<K> m = a;
    MatrixOf<K> ops = MatrixOf<K>::Identity(n, n);
    const Index rank = column_echelon_inplace(m, &ops);
    if (rank != n) throw std::domain_error("invert: singular matrix");
    // m is now the identity (echelon of an invertible matrix), so a * ops = I.
    return ops;
}

template <class K>
bool is_zero_matrix(const MatrixOf<K>& m) {
    for (Index c = 0; c < m.cols(); ++c)
        for (Index r = 0; r < m.rows(); ++r)
            if (!scalar_is_zero(m(r, c))) return false;
    return true;
}

}  // namespace specsys
