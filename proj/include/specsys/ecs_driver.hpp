// Big-step page walk driven purely by an exact couple system: indices come
// from the combinatorial schedule, terms from kernel/image subquotients of the E
// tables, and page turns from the tight kernel/cokernel differentials. There
// is no 0-page; the walk starts on the 1-page.

#pragma once

#include "specsys/connect.hpp"
#include "specsys/ecs.hpp"

#include <set>
#include <vector>

namespace specsys {

struct EcsSchedule {
    ShearMatrix phi = ShearMatrix::identity(1);
    GridPoint offset;
    // per chapter (outermost first): candidate prefixes with their page range
    struct Chapter {
        int k = 0;
        std::vector<std::pair<std::vector<int>, int>> prefixes;  // (prefix, saturation page)
    };
    std::vector<Chapter> chapters;
    std::vector<Downset> used;
};

/// All indices the big-step walk will touch, computed without any F data.
inline EcsSchedule plan_bigstep(const ClampedGrid& g, const std::vector<GridPoint>& support,
                                const ShearMatrix& phi, const GridPoint& offset) {
    EcsSchedule plan;
    plan.phi = phi;
    plan.offset = offset;
    std::set<std::vector<GridPoint>> seen;
    auto note = [&](const Downset& d) {
        if (seen.insert(d.max_points()).second) plan.used.push_back(d);
    };
    auto note_index = [&](const STermIndex& ix) {
        note(ix.z);
        note(ix.q);
        note(ix.p);
        note(ix.b);
    };
    for (int k = g.n; k >= 1; --k) {
        EcsSchedule::Chapter ch;
        ch.k = k;
        std::set<std::vector<int>> cands;
        for (const auto& d : support) cands.insert(phi.apply_prefix(d, k));
        for (const auto& pre : cands) {
            int r = 1;
            while (true) {
                STermIndex cur = expand_lex_index(g, phi, offset, pre, r);
                STermIndex nxt = expand_lex_index(g, phi, offset, pre, r + 1);
                note_index(cur);
                if (cur == nxt) break;
                ++r;
                if (r > 4 * static_cast<int>(g.box_size()) + 16)
                    throw DriverError("schedule failed to saturate");
            }
            ch.prefixes.push_back({pre, r});
            // the incoming/outgoing triple partners for every page
            for (int rr = 1; rr <= r; ++rr) {
                auto moved = [&](int dir) {
                    std::vector<int> v = pre;
                    for (int i = 0; i < k; ++i) v[i] += dir * offset[i];
                    v[k - 1] += dir * rr;
                    return v;
                };
                note_index(expand_lex_index(g, phi, offset, moved(+1), rr));
                note_index(expand_lex_index(g, phi, offset, moved(-1), rr));
                note_index(expand_lex_index(g, phi, offset, pre, rr + 1));
            }
        }
        // extension chains
        std::map<std::vector<int>, std::vector<int>> groups;
        for (const auto& pre : cands)
            groups[std::vector<int>(pre.begin(), pre.end() - 1)].push_back(pre.back());
        for (auto& [head, values] : groups) {
            std::sort(values.begin(), values.end());
            std::vector<int> pre = head;
            pre.push_back(values.front() - 1);
            note(lex_downset(g, pre, phi));
            for (int v : values) {
                std::vector<int> pv = head;
                pv.push_back(v);
                note(lex_downset(g, pv, phi));
            }
        }
        plan.chapters.push_back(std::move(ch));
    }
    note(Downset::empty(g));
    note(Downset::full(g));
    return plan;
}

/// Derived tables restricted to what the schedule needs: D-column inclusions,
/// j maps, and the connecting k maps.
template <class K>
std::pair<ExactCoupleSystem<K>, DownsetPoset> ecs_for_driver(const DownsetFiltration<K>& f,
                                                             const EcsSchedule& plan) {
    std::vector<Downset> downs = plan.used;
    downs.push_back(Downset::empty(f.grid()));
    downs.push_back(Downset::full(f.grid()));
    DownsetPoset dp = DownsetPoset::of(std::move(downs));
    const ChainComplex<K>& cx = f.complex();
    ExactCoupleSystem<K> ecs(dp.poset, cx.top_degree() + 1);
    const int m = dp.poset.size();
    const int bot = dp.poset.bottom();

    std::vector<std::vector<STerm<K>>> page(m, std::vector<STerm<K>>(m));
    for (int p = 0; p < m; ++p)
        for (int q = 0; q < m; ++q) {
            if (!dp.poset.leq(q, p)) continue;
            STermIndex ix{dp.elements[q], dp.elements[q], dp.elements[p], dp.elements[p]};
            page[p][q] = compute_sterm(f, ix);
            ecs.set_space(p, q, page[p][q].dims());
        }
    for (int p = 0; p < m; ++p) {
        for (int q = 0; q < m; ++q) {
            if (!dp.poset.leq(q, p)) continue;
            if (q != bot) ecs.set_ell(p, bot, p, q, inclusion_map(f, page[p][bot], page[p][q]).mats);
            ecs.set_k(p, q, induced_map(cx, page[p][q], page[q][bot], -1, true).mats);
        }
        for (int p2 = 0; p2 < m; ++p2)
            if (p != p2 && dp.poset.leq(p, p2))
                ecs.set_ell(p, bot, p2, bot, inclusion_map(f, page[p][bot], page[p2][bot]).mats);
    }
    return {std::move(ecs), std::move(dp)};
}

struct EcsTraceResult {
    bool ok = true;
    DimVec final_dims;
    int homology_steps = 0;
    int extensions = 0;
    std::string failure;
};

/// Run the planned big-step walk on the tables alone.
template <class K>
EcsTraceResult run_bigstep_ecs(const ExactCoupleSystem<K>& ecs, const DownsetPoset& dp,
                               const ClampedGrid& g, const EcsSchedule& plan) {
    EcsTraceResult out;
    auto term = [&](const STermIndex& ix) {
        return ecs_sterm(ecs, dp.index_of(ix.b), dp.index_of(ix.p), dp.index_of(ix.q),
                         dp.index_of(ix.z));
    };
    auto fail = [&](const std::string& msg) {
        out.ok = false;
        if (out.failure.empty()) out.failure = msg;
    };
    const ShearMatrix& phi = plan.phi;
    const GridPoint& offset = plan.offset;

    for (const auto& ch : plan.chapters) {
        const int k = ch.k;
        for (const auto& [pre, rsat] : ch.prefixes) {
            for (int r = 1; r <= rsat; ++r) {
                auto moved = [&](int dir) {
                    std::vector<int> v = pre;
                    for (int i = 0; i < k; ++i) v[i] += dir * offset[i];
                    v[k - 1] += dir * r;
                    return v;
                };
                STermIndex mid = expand_lex_index(g, phi, offset, pre, r);
                STermIndex right = expand_lex_index(g, phi, offset, moved(+1), r);
                STermIndex left = expand_lex_index(g, phi, offset, moved(-1), r);
                STermIndex next = expand_lex_index(g, phi, offset, pre, r + 1);
                auto s_mid = term(mid);
                auto s_right = term(right);
                auto s_left = term(left);
                auto s_next = term(next);
                auto d_out = ecs_tight_differential(ecs, s_mid, s_left);
                auto d_in = ecs_tight_differential(ecs, s_right, s_mid);
                ++out.homology_steps;
                for (Index deg = 0; deg < ecs.degrees(); ++deg) {
                    Index rank_out = matrix_rank(MatrixOf<K>(d_out[deg]));
                    Index rank_in = deg + 1 < ecs.degrees()
                                        ? matrix_rank(MatrixOf<K>(d_in[deg + 1]))
                                        : 0;
                    if (s_next.dims[deg] != s_mid.dims[deg] - rank_out - rank_in)
                        fail("page turn mismatch in chapter " + std::to_string(k));
                }
            }
        }
        // extension additivity toward the next chapter
        std::map<std::vector<int>, std::vector<std::pair<int, int>>> groups;  // head -> (v, rsat)
        for (const auto& [pre, rsat] : ch.prefixes)
            groups[std::vector<int>(pre.begin(), pre.end() - 1)].push_back({pre.back(), rsat});
        for (auto& [head, values] : groups) {
            std::sort(values.begin(), values.end());
            auto sat_index = [&](int v, int rsat) {
                std::vector<int> pre = head;
                pre.push_back(v);
                return expand_lex_index(g, phi, offset, pre, rsat);
            };
            const STermIndex inf0 = sat_index(values.front().first, values.front().second);
            std::vector<Downset> chain;
            {
                std::vector<int> pre = head;
                pre.push_back(values.front().first - 1);
                chain.push_back(lex_downset(g, pre, phi));
            }
            for (auto [v, rsat] : values) {
                std::vector<int> pre = head;
                pre.push_back(v);
                chain.push_back(lex_downset(g, pre, phi));
            }
            DimVec total(ecs.degrees(), 0);
            for (size_t j = 0; j + 1 < chain.size(); ++j) {
                auto quot = term({inf0.z, chain[j], chain[j + 1], inf0.b});
                for (Index deg = 0; deg < ecs.degrees(); ++deg) total[deg] += quot.dims[deg];
            }
            STermIndex entry = expand_lex_index(g, phi, offset, head, 1);
            auto entry_term = term(entry);
            if (total != entry_term.dims) fail("extension mismatch in chapter " + std::to_string(k));
            ++out.extensions;
        }
    }
    STermIndex limit{Downset::empty(g), Downset::empty(g), Downset::full(g), Downset::full(g)};
    auto fin = term(limit);
    out.final_dims = fin.dims;
    return out;
}

}  // namespace specsys
