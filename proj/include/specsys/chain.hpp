// Finite chain complexes over an exact field and graded subspaces of them.
// Differentials have degree -1 and square to zero (checked at construction).

#pragma once

#include "specsys/linalg.hpp"
#include "specsys/scalar.hpp"

#include <memory>
#include <numeric>
#include <stdexcept>
#include <string>
#include <vector>

namespace specsys {

struct ComplexError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

template <class K>
class ChainComplex {
public:
    ChainComplex() = default;

    /// gens[k] are the degree-k generator names; boundary[k] maps degree k to
    /// degree k-1 (boundary[0] must have zero rows).
    ChainComplex(FieldSpec field, std::vector<std::vector<std::string>> gens,
                 std::vector<MatrixOf<K>> boundary)
        : field_(field), gens_(std::move(gens)), boundary_(std::move(boundary)) {
        if (gens_.empty()) gens_.push_back({});
        if (boundary_.size() != gens_.size())
            throw ComplexError("boundary count must match degree count");
        for (size_t k = 0; k < gens_.size(); ++k) {
            const Index rows = k == 0 ? 0 : static_cast<Index>(gens_[k - 1].size());
            if (boundary_[k].rows() != rows ||
                boundary_[k].cols() != static_cast<Index>(gens_[k].size()))
                throw ComplexError("boundary shape mismatch in degree " + std::to_string(k));
        }
        for (size_t k = 2; k < gens_.size(); ++k) {
            MatrixOf<K> dd = boundary_[k - 1] * boundary_[k];
            if (!is_zero_matrix(dd))
                throw ComplexError("d o d != 0 at degree " + std::to_string(k));
        }
    }

    const FieldSpec& field() const { return field_; }
    Index top_degree() const { return static_cast<Index>(gens_.size()) - 1; }
    Index dim(Index k) const {
        return (k < 0 || k > top_degree()) ? 0 : static_cast<Index>(gens_[k].size());
    }
    Index total_dim() const {
        Index t = 0;
        for (Index k = 0; k <= top_degree(); ++k) t += dim(k);
        return t;
    }
    const std::vector<std::string>& generators(Index k) const { return gens_[k]; }

    /// Boundary matrix C_k -> C_{k-1}; degrees outside the range give the
    /// appropriately shaped zero map.
    MatrixOf<K> d(Index k) const {
        if (k >= 1 && k <= top_degree()) return boundary_[k];
        return MatrixOf<K>::Zero(dim(k - 1), dim(k));
    }

    /// Rank-nullity homology dimensions (independent of any filtration data).
    DimVec homology_dims() const {
        DimVec h(top_degree() + 1, 0);
        std::vector<Index> rank(top_degree() + 2, 0);
        for (Index k = 1; k <= top_degree(); ++k) rank[k] = matrix_rank(MatrixOf<K>(d(k)));
        for (Index k = 0; k <= top_degree(); ++k) h[k] = dim(k) - rank[k] - rank[k + 1];
        return h;
    }

    /// Locate a generator by name: (degree, column).
    std::pair<Index, Index> find_generator(const std::string& name) const {
        for (Index k = 0; k <= top_degree(); ++k)
            for (Index c = 0; c < dim(k); ++c)
                if (gens_[k][c] == name) return {k, c};
        throw ComplexError("unknown generator '" + name + "'");
    }

private:
    FieldSpec field_;
    std::vector<std::vector<std::string>> gens_{{}};
    std::vector<MatrixOf<K>> boundary_{MatrixOf<K>(0, 0)};
};

/// One subspace per degree, same degree range as the complex.
template <class K>
struct GradedSubspace {
    std::vector<Subspace<K>> parts;

    static GradedSubspace zero(const ChainComplex<K>& cx) {
        GradedSubspace g;
        for (Index k = 0; k <= cx.top_degree(); ++k)
            g.parts.push_back(Subspace<K>::zero(cx.dim(k)));
        return g;
    }
    static GradedSubspace full(const ChainComplex<K>& cx) {
        GradedSubspace g;
        for (Index k = 0; k <= cx.top_degree(); ++k)
            g.parts.push_back(Subspace<K>::full(cx.dim(k)));
        return g;
    }

    Index degrees() const { return static_cast<Index>(parts.size()); }

    /// Degree access with zero outside the range.
    Subspace<K> at(Index k) const {
        if (k < 0 || k >= degrees()) return Subspace<K>::zero(0);
        return parts[k];
    }

    DimVec dims() const {
        DimVec d;
        for (const auto& s : parts) d.push_back(s.dim());
        return d;
    }

    friend GradedSubspace sum(const GradedSubspace& a, const GradedSubspace& b) {
        GradedSubspace g;
        for (size_t k = 0; k < a.parts.size(); ++k)
            g.parts.push_back(sum(a.parts[k], b.parts[k]));
        return g;
    }
    friend GradedSubspace intersect(const GradedSubspace& a, const GradedSubspace& b) {
        GradedSubspace g;
        for (size_t k = 0; k < a.parts.size(); ++k)
            g.parts.push_back(intersect(a.parts[k], b.parts[k]));
        return g;
    }
    friend bool contains(const GradedSubspace& a, const GradedSubspace& b) {
        for (size_t k = 0; k < a.parts.size(); ++k)
            if (!a.parts[k].contains(b.parts[k])) return false;
        return true;
    }
    friend bool operator==(const GradedSubspace& a, const GradedSubspace& b) {
        return a.parts == b.parts;
    }
};

/// d(F) subset-of F, degreewise.
template <class K>
bool is_subcomplex(const ChainComplex<K>& cx, const GradedSubspace<K>& f) {
    for (Index k = 1; k <= cx.top_degree(); ++k)
        if (!f.parts[k - 1].contains(apply(cx.d(k), f.parts[k]))) return false;
    return true;
}

template <class K>
Index euler_characteristic(const DimVec& dims) {
    Index chi = 0;
    int sgn = 1;
    for (Index d : dims) {
        chi += sgn * d;
        sgn = -sgn;
    }
    return chi;
}

}  // namespace specsys
