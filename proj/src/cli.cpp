#include "specsys/cli.hpp"

#include "specsys/ecs_driver.hpp"
#include "specsys/io.hpp"

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

namespace specsys::cli {

namespace {

constexpr int kOk = 0;
constexpr int kUsage = 1;
constexpr int kVerificationFailed = 2;

Json read_json(const std::string& path, std::istream& in) {
    try {
        if (path == "-") return Json::parse(in);
        std::ifstream file(path);
        if (!file) throw ParseError("cannot open '" + path + "'");
        return Json::parse(file);
    } catch (const nlohmann::json::parse_error& e) {
        throw ParseError(std::string("json parse error: ") + e.what());
    }
}

ShearMatrix parse_phi(const std::string& text, int n) {
    if (text.empty()) return ShearMatrix::identity(n);
    Json j = Json::parse(text);
    if (!j.is_array() || static_cast<int>(j.size()) != n)
        throw ParseError("--phi must be an n x n integer matrix");
    IntMatrix m(n, n);
    for (int r = 0; r < n; ++r)
        for (int c = 0; c < n; ++c) m(r, c) = j.at(r).at(c).get<std::int64_t>();
    return ShearMatrix(m);
}

GridPoint parse_vector(const std::string& text, int n, int fill) {
    if (text.empty()) return GridPoint(n, fill);
    Json j = Json::parse(text);
    if (!j.is_array() || static_cast<int>(j.size()) != n)
        throw ParseError("expected a vector of length " + std::to_string(n));
    return j.get<GridPoint>();
}

void emit(std::ostream& out, const Json& j, bool text) {
    if (!text) {
        out << j.dump(2) << "\n";
        return;
    }
    if (j.contains("steps")) {
        out << j.at("driver").get<std::string>() << " trace\n";
        for (const auto& s : j.at("steps")) {
            out << "  [" << s.at("kind").get<std::string>() << "] ";
            if (s.contains("coords")) out << s.at("coords").get<std::string>() << " ";
            if (s.contains("output_dims")) out << "-> " << s.at("output_dims").dump() << " ";
            out << s.at("verdict").get<std::string>() << "\n";
            if (s.contains("diagram"))
                for (const auto& row : s.at("diagram"))
                    out << "      " << row.get<std::string>() << "\n";
        }
        out << "final " << j.at("final_dims").dump() << (j.at("ok").get<bool>() ? " ok" : " FAIL")
            << "\n";
        return;
    }
    if (j.contains("checks")) {
        for (const auto& c : j.at("checks")) {
            out << "  " << c.at("name").get<std::string>() << ": "
                << c.at("verdict").get<std::string>();
            if (c.contains("witness")) out << "  (" << c.at("witness").get<std::string>() << ")";
            out << "\n";
        }
        out << (j.at("ok").get<bool>() ? "ok" : "FAIL") << "\n";
        return;
    }
    out << j.dump(2) << "\n";
}

template <class K>
int run_validate(const Instance<K>& inst, std::optional<unsigned> seed, int samples, bool text,
                 std::ostream& out) {
    // exhaustive pair checking on small boxes, seeded sampling otherwise
    ValidationReport rep;
    if (seed)
        rep = inst.filtration.validate(std::pair<unsigned, int>{*seed, samples});
    else if (inst.filtration.grid().box_size() <= 16)
        rep = inst.filtration.validate();
    else
        rep = inst.filtration.validate(std::pair<unsigned, int>{1u, samples});
    emit(out, validation_json(rep), text);
    return rep.ok ? kOk : kVerificationFailed;
}

template <class K>
int run_sterm(const Instance<K>& inst, const Json& zj, const Json& qj, const Json& pj,
              const Json& bj, bool reduce, bool classify, bool basis, bool text,
              std::ostream& out) {
    const ClampedGrid& g = inst.filtration.grid();
    STermIndex ix{parse_downset(zj, g), parse_downset(qj, g), parse_downset(pj, g),
                  parse_downset(bj, g)};
    STerm<K> s = compute_sterm(inst.filtration, ix);
    Json j = sterm_json(s, basis);
    bool ok = true;
    if (classify || reduce) {
        STermIndex canon = ix.canonicalized();
        if (!canon.normalized())
            throw ParseError("classification needs z <= q <= p <= b after canonicalization");
        if (classify) {
            ZBClass zb = zb_classify(inst.filtration, canon);
            Json zpts = Json::array(), bpts = Json::array();
            for (const auto& x : zb.Z) zpts.push_back(x);
            for (const auto& x : zb.B) bpts.push_back(x);
            j["Z"] = zpts;
            j["B"] = bpts;
        }
        if (reduce) {
            Reduction<K> red = reduce_sterm(inst.filtration, canon);
            j["reduced"] = index_json(red.reduced);
            j["reduction_verified"] = red.verified;
            ok = ok && red.verified;
        }
    }
    emit(out, j, text);
    return ok ? kOk : kVerificationFailed;
}

template <class K>
int run_connect(const Instance<K>& inst, const std::string& mode, const std::string& phi_text,
                const std::string& offset_text, const std::string& perm_text, bool diagrams,
                bool text, std::ostream& out) {
    DownsetFiltration<K> f = inst.filtration;
    const int n = f.grid().n;
    if (!perm_text.empty()) {
        GridPoint perm = parse_vector(perm_text, n, 0);
        f = f.permuted(std::vector<int>(perm.begin(), perm.end()));
    }
    ConnectionTrace trace;
    if (mode == "bigstep") {
        trace = run_bigstep(f, parse_phi(phi_text, n), parse_vector(offset_text, n, 0));
    } else if (mode == "smallstep") {
        trace = run_smallstep(f, parse_phi(phi_text, n));
    } else if (mode == "secondary") {
        trace = run_secondary(f);
    } else if (mode == "gensecondary") {
        trace = run_secondary(f, parse_vector(offset_text, n, 1));
    } else {
        throw ParseError("unknown mode '" + mode + "'");
    }
    emit(out, trace_json(trace, diagrams), text);
    return trace.ok ? kOk : kVerificationFailed;
}

template <class K>
int run_classic(const Instance<K>& inst, int rmax, bool text, std::ostream& out) {
    auto pages = classic_pages(inst.filtration, rmax);
    Json j;
    j["driver"] = "classic";
    Json table = Json::array();
    for (const auto& [key, dims] : pages.dims) {
        Json row;
        row["r"] = key.first;
        row["p"] = key.second;
        row["dims"] = dims_json(dims);
        row["d_ranks"] = dims_json(pages.d_ranks.at(key));
        table.push_back(row);
    }
    j["pages"] = table;
    j["stable_r"] = pages.stable_r;
    j["ok"] = pages.trace.ok;
    j["final_dims"] = dims_json(pages.trace.final_dims);
    emit(out, j, text);
    return pages.trace.ok ? kOk : kVerificationFailed;
}

template <class K>
int run_ecs_check(const Instance<K>& inst, bool lemmas, bool excision, unsigned seed,
                  std::size_t poset_cap, bool text, std::ostream& out) {
    const ClampedGrid& g = inst.filtration.grid();
    // default poset: lattice closure of the principal downsets of the support
    std::vector<Downset> elements{Downset::empty(g), Downset::full(g)};
    for (const auto& p : inst.filtration.support())
        elements.push_back(Downset::principal(g, p));
    std::sort(elements.begin(), elements.end());
    elements.erase(std::unique(elements.begin(), elements.end()), elements.end());
    bool grew = true;
    while (grew) {
        grew = false;
        std::vector<Downset> next = elements;
        for (size_t i = 0; i < elements.size(); ++i)
            for (size_t j = i + 1; j < elements.size(); ++j) {
                for (Downset d :
                     {unite(elements[i], elements[j]), intersect(elements[i], elements[j])}) {
                    bool known = false;
                    for (const auto& e : next) known = known || e == d;
                    if (!known) {
                        next.push_back(d);
                        grew = true;
                    }
                }
            }
        elements = std::move(next);
        if (elements.size() > poset_cap)
            throw ParseError("poset closure exceeded the cap; raise --poset-cap");
    }
    DownsetPoset dp = DownsetPoset::of(std::move(elements));
    auto ecs = ecs_from_filtration(inst.filtration, dp);

    Json j;
    j["poset_size"] = dp.poset.size();
    bool ok = true;
    {
        EcsReport rep = verify_axioms(ecs);
        ok = ok && rep.ok;
        j["axioms"] = ecs_report_json(rep);
    }
    if (lemmas) {
        EcsReport rep = lemma_checks(ecs, seed);
        ok = ok && rep.ok;
        j["lemmas"] = ecs_report_json(rep);
    }
    if (excision) {
        EcsReport rep = excision_checks(ecs, dp, seed);
        ok = ok && rep.ok;
        j["excision"] = ecs_report_json(rep);
    }
    j["ok"] = ok;
    if (text) {
        for (const auto& [key, rep] : j.items())
            if (rep.is_object() && rep.contains("checks")) {
                out << key << ":\n";
                emit(out, rep, true);
            }
        out << (ok ? "ok" : "FAIL") << "\n";
    } else {
        out << j.dump(2) << "\n";
    }
    return ok ? kOk : kVerificationFailed;
}

int run_example(const std::string& which, unsigned seed, const std::string& field_text, int n,
                int grid, Index max_dim, const std::string& out_path, std::ostream& out) {
    FieldSpec field = field_text == "rational" ? FieldSpec::rationals()
                                               : FieldSpec::prime(std::stoll(field_text));
    auto build = [&](auto scalar_tag) -> Json {
        using K = decltype(scalar_tag);
        if (which == "circle") return instance_json(circle_fixture<K>(field));
        if (which == "cover") return instance_json(sphere_cover_fixture<K>(field));
        if (which == "double")
            return instance_json(multicomplex_total(random_double_complex<K>(seed, field)));
        if (which == "random") {
            RandomParams params{n, grid, max_dim, field};
            return instance_json(random_instance<K>(seed, params));
        }
        throw ParseError("unknown example '" + which + "'");
    };
    Json j = field.kind == FieldSpec::Kind::rational ? build(Rational{}) : build(Fp{});
    if (out_path.empty() || out_path == "-") {
        out << j.dump(2) << "\n";
    } else {
        std::ofstream file(out_path);
        if (!file) throw ParseError("cannot write '" + out_path + "'");
        file << j.dump(2) << "\n";
    }
    return kOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::istream& in, std::ostream& out,
        std::ostream& err) {
    CLI::App app{"spectral systems of downset-filtered chain complexes"};
    app.require_subcommand(1);

    std::string instance_path;
    bool text = false;

    auto* validate = app.add_subcommand("validate", "check nesting, d-invariance, distributivity");
    std::optional<unsigned> v_seed;
    int v_samples = 120;
    validate->add_option("instance", instance_path, "instance file or - for stdin")->required();
    validate->add_option("--seed", v_seed, "sampled mode with this seed");
    validate->add_option("--samples", v_samples, "sample count for sampled mode");
    validate->add_flag("--text", text, "human-readable output");

    auto* sterm = app.add_subcommand("sterm", "compute one subquotient term");
    std::string s_z = "bottom", s_q = "bottom", s_p = "full", s_b = "full";
    bool s_reduce = false, s_classify = false, s_basis = false;
    sterm->add_option("instance", instance_path)->required();
    sterm->add_option("--z", s_z, "cycle downset (antichain JSON, 'bottom' or 'full')");
    sterm->add_option("--q", s_q, "quotient downset");
    sterm->add_option("--p", s_p, "filtration downset");
    sterm->add_option("--b", s_b, "boundary downset");
    sterm->add_flag("--reduce", s_reduce, "append the reduced index");
    sterm->add_flag("--classify", s_classify, "append the (Z,B) classification");
    sterm->add_flag("--basis", s_basis, "include representative vectors");
    sterm->add_flag("--text", text);

    auto* connect = app.add_subcommand("connect", "run a verified connection driver");
    std::string c_mode = "bigstep", c_phi, c_offset, c_perm;
    bool c_diagrams = false;
    connect->add_option("instance", instance_path)->required();
    connect->add_option("--mode", c_mode, "bigstep | smallstep | secondary | gensecondary");
    connect->add_option("--phi", c_phi, "shear matrix as JSON rows");
    connect->add_option("--offset", c_offset, "offset vector as JSON");
    connect->add_option("--perm", c_perm, "axis permutation as JSON");
    connect->add_flag("--emit-diagram", c_diagrams, "ASCII region pictures per step");
    connect->add_flag("--text", text);

    auto* classic = app.add_subcommand("classic", "one-axis page tables");
    int rmax = 0;
    classic->add_option("instance", instance_path)->required();
    classic->add_option("--rmax", rmax, "cap the page number");
    classic->add_flag("--text", text);

    auto* ecs = app.add_subcommand("ecs-check", "exact couple system reports");
    bool e_lemmas = false, e_excision = false;
    unsigned e_seed = 2026;
    std::size_t e_cap = 64;
    ecs->add_option("instance", instance_path)->required();
    ecs->add_flag("--lemmas", e_lemmas, "run the structural lemma suite");
    ecs->add_flag("--excision", e_excision, "run excision and splitting checks");
    ecs->add_option("--seed", e_seed, "sampling seed for large posets");
    ecs->add_option("--poset-cap", e_cap, "cap on the generated downset lattice");
    ecs->add_flag("--text", text);

    auto* example = app.add_subcommand("example", "emit a generated instance");
    std::string x_which, x_field = "rational", x_out;
    unsigned x_seed = 0;
    int x_n = 2, x_grid = 3;
    Index x_dim = 16;
    example->add_option("which", x_which, "circle | cover | double | random")->required();
    example->add_option("--seed", x_seed);
    example->add_option("--field", x_field, "rational or a prime number");
    example->add_option("--n", x_n, "axes for random instances");
    example->add_option("--grid", x_grid, "grid size per axis for random instances");
    example->add_option("--max-dim", x_dim, "total dimension cap for random instances");
    example->add_option("--out", x_out, "output file (default stdout)");

    std::vector<const char*> argv;
    std::string prog = "specsys";
    argv.push_back(prog.c_str());
    for (const auto& a : args) argv.push_back(a.c_str());
    try {
        app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::ParseError& e) {
        std::ostringstream usage;
        int code = app.exit(e, usage, usage);
        (code == 0 ? out : err) << usage.str();
        return code == 0 ? kOk : kUsage;
    }

    try {
        if (example->parsed())
            return run_example(x_which, x_seed, x_field, x_n, x_grid, x_dim, x_out, out);
        Json j = read_json(instance_path, in);
        if (validate->parsed())
            return with_instance(j, [&](const auto& inst) {
                return run_validate(inst, v_seed, v_samples, text, out);
            });
        if (sterm->parsed())
            return with_instance(j, [&](const auto& inst) {
                auto down = [](const std::string& s) {
                    return (s == "full" || s == "bottom" || s == "empty") ? Json(s)
                                                                          : Json::parse(s);
                };
                return run_sterm(inst, down(s_z), down(s_q), down(s_p), down(s_b), s_reduce,
                                 s_classify, s_basis, text, out);
            });
        if (connect->parsed())
            return with_instance(j, [&](const auto& inst) {
                return run_connect(inst, c_mode, c_phi, c_offset, c_perm, c_diagrams, text, out);
            });
        if (classic->parsed())
            return with_instance(j,
                                 [&](const auto& inst) { return run_classic(inst, rmax, text, out); });
        if (ecs->parsed())
            return with_instance(j, [&](const auto& inst) {
                return run_ecs_check(inst, e_lemmas, e_excision, e_seed, e_cap, text, out);
            });
        err << "error: no subcommand\n";
        return kUsage;
    } catch (const ParseError& e) {
        err << "error: " << e.what() << "\n";
        return kUsage;
    } catch (const nlohmann::json::exception& e) {
        err << "error: " << e.what() << "\n";
        return kUsage;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return kUsage;
    }
}

}  // namespace specsys::cli
