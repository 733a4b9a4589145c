// JSON input/output: the instance file format, downsets as antichain lists
// with "-inf"/"+inf" sentinels, S-term and trace serialization, abstract
// exact-couple tables, and the ASCII region diagrams for two-axis grids.
// All emitted JSON uses ordered keys so identical inputs give identical bytes.

#pragma once

#include "specsys/connect.hpp"
#include "specsys/ecs.hpp"
#include "specsys/generators.hpp"

#include <json.hpp>

#include <sstream>
#include <string>
#include <variant>
#include <vector>

namespace specsys {

using Json = nlohmann::ordered_json;

struct ParseError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

inline FieldSpec parse_field(const Json& j) {
    if (!j.is_object() || !j.contains("kind")) throw ParseError("field: expected {\"kind\": ...}");
    std::string kind = j.at("kind").get<std::string>();
    if (kind == "rational") return FieldSpec::rationals();
    if (kind == "prime") {
        if (!j.contains("p")) throw ParseError("field: prime fields need \"p\"");
        return FieldSpec::prime(j.at("p").get<long long>());
    }
    throw ParseError("field: unknown kind '" + kind + "'");
}

inline Json field_json(const FieldSpec& f) {
    Json j;
    j["kind"] = f.kind == FieldSpec::Kind::rational ? "rational" : "prime";
    if (f.kind == FieldSpec::Kind::prime) j["p"] = f.characteristic;
    return j;
}

// -------------------------------------------------------------------------
// Instances
// -------------------------------------------------------------------------

template <class K>
Instance<K> parse_instance_as(const Json& j) {
    FieldSpec field = parse_field(j.at("field"));
    if (!FieldOps<K>::matches(field)) throw ParseError("field kind does not match the scalar");
    const Json& cj = j.at("complex");
    std::map<std::string, std::pair<Index, Index>> where;  // name -> (degree, column)
    std::vector<std::vector<std::string>> gens;
    for (const auto& g : cj.at("generators")) {
        std::string name = g.at("name").get<std::string>();
        Index deg = g.at("degree").get<Index>();
        if (deg < 0) throw ParseError("generator degree must be >= 0");
        if (static_cast<Index>(gens.size()) <= deg) gens.resize(deg + 1);
        if (where.count(name)) throw ParseError("duplicate generator '" + name + "'");
        where[name] = {deg, static_cast<Index>(gens[deg].size())};
        gens[deg].push_back(name);
    }
    if (gens.empty()) gens.push_back({});
    std::vector<MatrixOf<K>> boundary(gens.size());
    boundary[0] = MatrixOf<K>::Zero(0, static_cast<Index>(gens[0].size()));
    for (size_t k = 1; k < gens.size(); ++k)
        boundary[k] = MatrixOf<K>::Zero(static_cast<Index>(gens[k - 1].size()),
                                        static_cast<Index>(gens[k].size()));
    if (cj.contains("boundary"))
        for (const auto& e : cj.at("boundary")) {
            std::string from = e.at("from").get<std::string>();
            std::string to = e.at("to").get<std::string>();
            if (!where.count(from) || !where.count(to))
                throw ParseError("boundary entry references unknown generator");
            auto [df, cf] = where.at(from);
            auto [dt, ct] = where.at(to);
            if (dt != df - 1)
                throw ParseError("boundary entry " + from + " -> " + to +
                                 " does not drop the degree by one");
            boundary[df](ct, cf) = FieldOps<K>::parse(field, e.at("coeff").get<std::string>());
        }
    auto cx = std::make_shared<ChainComplex<K>>(field, gens, std::move(boundary));

    const Json& fj = j.at("filtration");
    std::string mode = fj.at("mode").get<std::string>();
    if (mode == "multidegree") {
        std::map<std::string, GridPoint> md;
        for (auto it = fj.at("multidegrees").begin(); it != fj.at("multidegrees").end(); ++it)
            md[it.key()] = it.value().get<GridPoint>();
        int n_hint = fj.contains("n") ? fj.at("n").get<int>() : 0;
        return {cx, from_multidegrees<K>(cx, md, n_hint)};
    }
    if (mode == "explicit") {
        // levels span generator columns and optional raw vectors
        std::vector<std::vector<std::pair<int, GradedSubspace<K>>>> axes;
        for (const auto& axis : fj.at("axes")) {
            std::vector<std::pair<int, GradedSubspace<K>>> levels;
            for (const auto& lvl : axis.at("levels")) {
                std::vector<std::vector<VectorOf<K>>> cols(cx->top_degree() + 1);
                if (lvl.contains("generators"))
                    for (const auto& nj : lvl.at("generators")) {
                        auto [deg, col] = cx->find_generator(nj.get<std::string>());
                        VectorOf<K> e = VectorOf<K>::Zero(cx->dim(deg));
                        e(col) = FieldOps<K>::make(field, 1);
                        cols[deg].push_back(e);
                    }
                if (lvl.contains("vectors"))
                    for (const auto& vj : lvl.at("vectors")) {
                        Index deg = vj.at("degree").get<Index>();
                        if (deg < 0 || deg > cx->top_degree())
                            throw ParseError("vector degree out of range");
                        const auto& coords = vj.at("coords");
                        if (static_cast<Index>(coords.size()) != cx->dim(deg))
                            throw ParseError("vector coordinate count mismatch");
                        VectorOf<K> v(cx->dim(deg));
                        for (Index r = 0; r < cx->dim(deg); ++r)
                            v(r) = FieldOps<K>::parse(field, coords.at(r).get<std::string>());
                        cols[deg].push_back(v);
                    }
                GradedSubspace<K> span;
                for (Index k = 0; k <= cx->top_degree(); ++k) {
                    MatrixOf<K> m(cx->dim(k), static_cast<Index>(cols[k].size()));
                    for (Index c = 0; c < m.cols(); ++c) m.col(c) = cols[k][c];
                    span.parts.push_back(Subspace<K>::span(std::move(m)));
                }
                levels.push_back({lvl.at("level").get<int>(), std::move(span)});
            }
            axes.push_back(std::move(levels));
        }
        return {cx, from_explicit_spans<K>(cx, axes)};
    }
    throw ParseError("filtration: unknown mode '" + mode + "'");
}

template <class K>
Json instance_json(const Instance<K>& inst) {
    Json j;
    j["field"] = field_json(inst.complex->field());
    Json gens = Json::array();
    Json bnd = Json::array();
    const ChainComplex<K>& cx = *inst.complex;
    for (Index k = 0; k <= cx.top_degree(); ++k)
        for (Index c = 0; c < cx.dim(k); ++c) {
            Json g;
            g["name"] = cx.generators(k)[c];
            g["degree"] = k;
            gens.push_back(g);
            if (k >= 1) {
                MatrixOf<K> d = cx.d(k);
                for (Index r = 0; r < cx.dim(k - 1); ++r) {
                    if (scalar_is_zero(d(r, c))) continue;
                    Json e;
                    e["from"] = cx.generators(k)[c];
                    e["to"] = cx.generators(k - 1)[r];
                    e["coeff"] = d(r, c).str();
                    bnd.push_back(e);
                }
            }
        }
    j["complex"] = Json{{"generators", gens}, {"boundary", bnd}};
    Json f;
    f["n"] = inst.filtration.grid().n;
    f["mode"] = "multidegree";
    Json md = Json::object();
    for (const auto& [name, deg] : inst.filtration.multidegrees()) md[name] = deg;
    f["multidegrees"] = md;
    j["filtration"] = f;
    return j;
}

/// Parse a complete instance and dispatch on the coefficient field.
template <class F>
auto with_instance(const Json& j, F&& fn) {
    FieldSpec field = parse_field(j.at("field"));
    if (field.kind == FieldSpec::Kind::rational) return fn(parse_instance_as<Rational>(j));
    return fn(parse_instance_as<Fp>(j));
}

// -------------------------------------------------------------------------
// Downsets
// -------------------------------------------------------------------------

inline Json coord_json(const ClampedGrid& g, int axis, int value) {
    if (value <= g.min_coord(axis)) return Json("-inf");
    if (value >= g.max_coord(axis)) return Json("+inf");
    return Json(value);
}

inline Json downset_json(const Downset& d) {
    Json j = Json::array();
    for (const auto& m : d.max_points()) {
        Json pt = Json::array();
        for (int i = 0; i < d.grid().n; ++i) pt.push_back(coord_json(d.grid(), i, m[i]));
        j.push_back(pt);
    }
    return j;
}

inline Downset parse_downset(const Json& j, const ClampedGrid& g) {
    if (j.is_string()) {
        std::string s = j.get<std::string>();
        if (s == "full") return Downset::full(g);
        if (s == "bottom" || s == "empty") return Downset::empty(g);
        throw ParseError("downset: unknown shorthand '" + s + "'");
    }
    if (!j.is_array()) throw ParseError("downset: expected an antichain array");
    std::vector<GridPoint> pts;
    for (const auto& pj : j) {
        if (!pj.is_array() || static_cast<int>(pj.size()) != g.n)
            throw ParseError("downset: point arity mismatch");
        GridPoint p(g.n);
        for (int i = 0; i < g.n; ++i) {
            const Json& c = pj[i];
            if (c.is_string()) {
                std::string s = c.get<std::string>();
                if (s == "-inf")
                    p[i] = g.min_coord(i);
                else if (s == "+inf" || s == "inf")
                    p[i] = g.max_coord(i);
                else
                    throw ParseError("downset: bad coordinate '" + s + "'");
            } else {
                p[i] = std::clamp(c.get<int>(), g.min_coord(i), g.max_coord(i));
            }
        }
        pts.push_back(p);
    }
    return Downset::closure(g, pts);
}

// -------------------------------------------------------------------------
// S-terms and traces
// -------------------------------------------------------------------------

inline Json dims_json(const DimVec& dims) {
    Json j = Json::object();
    for (size_t k = 0; k < dims.size(); ++k) j[std::to_string(k)] = dims[k];
    return j;
}

inline Json index_json(const STermIndex& ix) {
    Json j;
    j["z"] = downset_json(ix.z);
    j["q"] = downset_json(ix.q);
    j["p"] = downset_json(ix.p);
    j["b"] = downset_json(ix.b);
    return j;
}

template <class K>
Json sterm_json(const STerm<K>& s, bool with_basis = false) {
    Json j;
    j["index"] = index_json(s.index);
    j["dims"] = dims_json(s.dims());
    if (with_basis) {
        Json basis = Json::array();
        for (Index k = 0; k < s.degrees(); ++k) {
            Json deg = Json::array();
            const MatrixOf<K>& lift = s.parts[k].lift;
            for (Index c = 0; c < lift.cols(); ++c) {
                Json vec = Json::array();
                for (Index r = 0; r < lift.rows(); ++r) vec.push_back(lift(r, c).str());
                deg.push_back(vec);
            }
            basis.push_back(deg);
        }
        j["basis"] = basis;
    }
    return j;
}

/// Ruled-region picture of an index: Z marks p\z, B marks b\q,
/// # their overlap p\q, for two-axis grids only.
inline std::vector<std::string> ascii_diagram(const STermIndex& ix) {
    const ClampedGrid& g = ix.p.grid();
    std::vector<std::string> out;
    if (g.n != 2) {
        out.push_back("(diagram available for n = 2 only; index: " + ix.str() + ")");
        return out;
    }
    PointSet pz = minus_points(ix.p, ix.z);
    PointSet bq = minus_points(ix.b, ix.q);
    for (int y = g.max_coord(1); y >= g.min_coord(1); --y) {
        std::string row;
        for (int x = g.min_coord(0); x <= g.max_coord(0); ++x) {
            GridPoint p{x, y};
            bool in_pz = pz.count(p), in_bq = bq.count(p);
            row += in_pz && in_bq ? '#' : in_pz ? 'Z' : in_bq ? 'B' : '.';
        }
        out.push_back(row);
    }
    return out;
}

inline Json trace_json(const ConnectionTrace& t, bool with_diagrams = false) {
    Json j;
    j["driver"] = t.driver;
    j["ok"] = t.ok;
    Json steps = Json::array();
    for (const auto& s : t.steps) {
        Json sj;
        sj["kind"] = s.kind;
        if (!s.coords.empty()) sj["coords"] = s.coords;
        if (!s.in_dims.empty()) sj["input_dims"] = dims_json(s.in_dims);
        if (!s.out_dims.empty()) sj["output_dims"] = dims_json(s.out_dims);
        sj["verdict"] = s.pass ? "pass" : "fail";
        if (!s.note.empty()) sj["note"] = s.note;
        if (with_diagrams && !s.index.p.max_points().empty() && s.kind != "euler") {
            sj["index"] = index_json(s.index);
            sj["diagram"] = ascii_diagram(s.index);
        }
        steps.push_back(sj);
    }
    j["steps"] = steps;
    if (!t.one_page.empty()) {
        Json pg = Json::array();
        for (const auto& [P, dims] : t.one_page)
            pg.push_back(Json{{"P", P}, {"dims", dims_json(dims)}});
        j["one_page"] = pg;
    }
    if (!t.two_page.empty()) {
        Json pg = Json::array();
        for (const auto& [P, dims] : t.two_page)
            pg.push_back(Json{{"P", P}, {"dims", dims_json(dims)}});
        j["two_page"] = pg;
    }
    j["reference_homology"] = dims_json(t.reference_homology);
    j["final_dims"] = dims_json(t.final_dims);
    return j;
}

inline Json validation_json(const ValidationReport& rep) {
    Json j;
    j["ok"] = rep.ok;
    j["distributive"] = rep.distributive;
    j["pairs_checked"] = rep.pairs_checked;
    Json issues = Json::array();
    for (const auto& issue : rep.issues)
        issues.push_back(Json{{"check", issue.check}, {"witness", issue.witness}});
    j["issues"] = issues;
    return j;
}

inline Json ecs_report_json(const EcsReport& rep) {
    Json j;
    j["ok"] = rep.ok;
    if (rep.sampling_seed) j["sampling_seed"] = *rep.sampling_seed;
    Json checks = Json::array();
    for (const auto& c : rep.checks) {
        Json cj;
        cj["name"] = c.name;
        cj["verdict"] = c.pass ? "pass" : "fail";
        if (!c.witness.empty()) cj["witness"] = c.witness;
        checks.push_back(cj);
    }
    j["checks"] = checks;
    return j;
}

// -------------------------------------------------------------------------
// Abstract exact couple tables
// -------------------------------------------------------------------------

template <class K>
std::pair<ExactCoupleSystem<K>, std::vector<std::string>> parse_ecs_as(const Json& j) {
    FieldSpec field = parse_field(j.at("field"));
    if (!FieldOps<K>::matches(field)) throw ParseError("field kind does not match the scalar");
    const Json& pj = j.at("poset");
    std::vector<std::string> names = pj.at("elements").get<std::vector<std::string>>();
    auto index_of = [&](const std::string& n) {
        for (size_t i = 0; i < names.size(); ++i)
            if (names[i] == n) return static_cast<int>(i);
        throw ParseError("unknown poset element '" + n + "'");
    };
    const int m = static_cast<int>(names.size());
    std::vector<std::vector<bool>> rel(m, std::vector<bool>(m, false));
    for (int a = 0; a < m; ++a) rel[a][a] = true;
    for (const auto& e : pj.at("leq")) rel[index_of(e.at(0))][index_of(e.at(1))] = true;
    for (int c = 0; c < m; ++c)  // transitive closure
        for (int a = 0; a < m; ++a)
            for (int b = 0; b < m; ++b)
                if (rel[a][c] && rel[c][b]) rel[a][b] = true;
    BoundedPoset poset(m, [&](int a, int b) { return rel[a][b]; }, names);

    Index degrees = j.at("degrees").get<Index>();
    ExactCoupleSystem<K> ecs(poset, degrees);
    for (const auto& sp : j.at("spaces"))
        ecs.set_space(index_of(sp.at("p")), index_of(sp.at("q")), sp.at("dims").get<DimVec>());
    auto parse_mats = [&](const Json& mj, auto rows_of, auto cols_of) {
        std::vector<MatrixOf<K>> mats;
        for (Index d = 0; d < degrees; ++d) {
            const Json& md = mj.at(d);
            MatrixOf<K> mat = MatrixOf<K>::Zero(rows_of(d), cols_of(d));
            if (static_cast<Index>(md.size()) != mat.rows())
                throw ParseError("matrix row count mismatch");
            for (Index r = 0; r < mat.rows(); ++r) {
                if (static_cast<Index>(md.at(r).size()) != mat.cols())
                    throw ParseError("matrix column count mismatch");
                for (Index c = 0; c < mat.cols(); ++c)
                    mat(r, c) = FieldOps<K>::parse(field, md.at(r).at(c).template get<std::string>());
            }
            mats.push_back(std::move(mat));
        }
        return mats;
    };
    if (j.contains("ell"))
        for (const auto& e : j.at("ell")) {
            int p = index_of(e.at("from").at(0)), q = index_of(e.at("from").at(1));
            int p2 = index_of(e.at("to").at(0)), q2 = index_of(e.at("to").at(1));
            ecs.set_ell(p, q, p2, q2,
                        parse_mats(
                            e.at("matrices"), [&](Index d) { return ecs.dim(p2, q2, d); },
                            [&](Index d) { return ecs.dim(p, q, d); }));
        }
    if (j.contains("k"))
        for (const auto& e : j.at("k")) {
            int p = index_of(e.at("p")), q = index_of(e.at("q"));
            ecs.set_k(p, q,
                      parse_mats(
                          e.at("matrices"),
                          [&](Index d) { return ecs.dim(q, poset.bottom(), d - 1); },
                          [&](Index d) { return ecs.dim(p, q, d); }));
        }
    return {std::move(ecs), std::move(names)};
}

}  // namespace specsys
