#include "bcsg/rdecomp.hpp"

#include <algorithm>
#include <map>
#include <queue>
#include <set>
#include <stdexcept>

namespace bcsg {

int RDecomp::max_rel_index() const {
    int m = -1;
    for (const auto& w : witnesses) m = std::max(m, w.rel);
    return m;
}

Rational rdecomp_size(const RDecomp& d, const RelationSet& rels) {
    Rational total;
    for (const auto& w : d.witnesses) {
        const Rational& norm = rels[w.rel].norm;
        total += w.lambda.abs_exact() * (Rational(1) + norm * Rational((long long)w.v.size()));
    }
    return total;
}

StarPoly rdecomp_expand(const RDecomp& d, const RelationSet& rels) {
    StarPoly acc;
    for (const auto& wit : d.witnesses) {
        const StarPoly& base = rels[wit.rel].poly;
        StarPoly r = wit.star ? base.star() : base;
        for (const auto& [word, c] : r.terms())
            acc.add_term(concat(wit.u, concat(word, wit.v)), wit.lambda * c);
    }
    return acc;
}

bool verify_decomposition(const RDecomp& d, const StarPoly& target, const RelationSet& rels) {
    return rdecomp_expand(d, rels) == target;
}

RDecomp rdecomp_add(const std::vector<std::pair<Coeff, RDecomp>>& parts, const RelationSet& rels) {
    RDecomp out;
    Rational bound;
    for (const auto& [lambda, part] : parts) {
        bound += lambda.abs_exact() * rdecomp_size(part, rels);
        for (const auto& w : part.witnesses) {
            Witness nw = w;
            nw.lambda = lambda * w.lambda;
            if (nw.lambda.is_zero()) continue;
            out.witnesses.push_back(std::move(nw));
        }
    }
    if (rdecomp_size(out, rels) > bound) throw std::logic_error("sizecalc(1) bound violated");
    return out;
}

RDecomp rdecomp_mul(const RDecomp& d1, const Word& alpha1, const RDecomp& d2, const Word& beta2,
                    const RelationSet& rels) {
    // alpha1*alpha2 - beta1*beta2 = alpha1 (alpha2 - beta2) + (alpha1 - beta1) beta2
    RDecomp out;
    for (const auto& w : d2.witnesses) {
        Witness nw = w;
        nw.u = concat(alpha1, w.u);
        out.witnesses.push_back(std::move(nw));
    }
    for (const auto& w : d1.witnesses) {
        Witness nw = w;
        nw.v = concat(w.v, beta2);
        out.witnesses.push_back(std::move(nw));
    }
    // The textbook bound L2 + L1 (1 + deg beta2) presumes sum |l_i| ||r_i||
    // <= L1, which can fail when a witness has deg(v) = 0 and norm > 1; the
    // unconditional form adds S1 = sum |l_i| ||r_i|| instead.
    Rational l1 = rdecomp_size(d1, rels), l2 = rdecomp_size(d2, rels);
    Rational s1;
    for (const auto& w : d1.witnesses) s1 += w.lambda.abs_exact() * rels[w.rel].norm;
    Rational d((long long)beta2.size());
    Rational bound = l2 + l1 + (s1 > l1 ? s1 : l1) * d;
    if (rdecomp_size(out, rels) > bound) throw std::logic_error("sizecalc(2) bound violated");
    return out;
}

namespace {

// A two-term relation c*(p - q) read as the rewrite p -> q. Applying it at
// m = u p v yields m' = reduce(u q v) with m - m' = (1/c) u r v.
struct Move {
    Word p, q;
    int rel;
    bool star;
    Coeff lambda;
    Rational norm;
};

void push_moves(const StarPoly& poly, int rel, bool star, const Rational& norm,
                std::vector<Move>& moves) {
    const auto& t = poly.terms();
    if (t.size() != 2) return;
    auto it = t.begin();
    Word w1 = it->first;
    Coeff c1 = it->second;
    ++it;
    Word w2 = it->first;
    Coeff c2 = it->second;
    if (c2 != -c1) return;  // need binomial a(p - q) shape
    Coeff inv_c1;
    {
        // 1/c1 for axis-aligned c1
        if (c1.im.is_zero())
            inv_c1 = Coeff(Rational(1) / c1.re);
        else if (c1.re.is_zero())
            inv_c1 = Coeff(Rational(0), Rational(-1) / c1.im);
        else
            return;
    }
    moves.push_back({w1, w2, rel, star, inv_c1, norm});
    moves.push_back({w2, w1, rel, star, -inv_c1, norm});
}

struct QueueItem {
    Rational cost;
    Word word;
    bool operator>(const QueueItem& o) const {
        if (cost != o.cost) return o.cost < cost;
        return word > o.word;  // deterministic tie-break
    }
};

}  // namespace

std::optional<RDecomp> decompose_by_rewriting(const Word& source, const Word& target,
                                              const RelationSet& rels,
                                              const std::vector<int>& usable,
                                              const SearchLimits& limits) {
    std::vector<Move> moves;
    for (int idx : usable) {
        const Relation& r = rels[idx];
        push_moves(r.poly, idx, false, r.norm, moves);
        StarPoly st = r.poly.star();
        if (st != r.poly) push_moves(st, idx, true, r.norm, moves);
    }

    std::map<Word, Rational> dist;
    struct Step {
        Word prev;
        Witness wit;
    };
    std::map<Word, Step> from;
    std::priority_queue<QueueItem, std::vector<QueueItem>, std::greater<QueueItem>> pq;
    Word src = reduce(source), dst = reduce(target);
    dist[src] = Rational(0);
    pq.push({Rational(0), src});

    while (!pq.empty()) {
        auto [cost, w] = pq.top();
        pq.pop();
        auto dit = dist.find(w);
        if (dit == dist.end() || cost > dit->second) continue;
        if (w == dst) break;
        if (dist.size() > limits.max_states) return std::nullopt;
        for (const auto& mv : moves) {
            size_t plen = mv.p.size();
            if (plen > w.size() && plen > 0) continue;
            size_t positions = w.size() - plen + 1;
            for (size_t pos = 0; pos < positions; ++pos) {
                if (!std::equal(mv.p.begin(), mv.p.end(), w.begin() + (long)pos)) continue;
                Word u(w.begin(), w.begin() + (long)pos);
                Word v(w.begin() + (long)(pos + plen), w.end());
                Word next = concat(u, concat(mv.q, v));
                if (next.size() > limits.max_len) continue;
                Rational step =
                    mv.lambda.abs_exact() * (Rational(1) + mv.norm * Rational((long long)v.size()));
                Rational ncost = cost + step;
                if (ncost > limits.budget) continue;
                auto it = dist.find(next);
                if (it != dist.end() && it->second <= ncost) continue;
                dist[next] = ncost;
                from[next] = Step{w, Witness{mv.lambda, u, mv.rel, mv.star, v}};
                pq.push({ncost, next});
            }
        }
    }

    if (!dist.count(dst)) return std::nullopt;
    // The chain telescopes: source - target = sum of per-step witnesses.
    RDecomp out;
    Word cur = dst;
    while (cur != src) {
        const Step& s = from.at(cur);
        out.witnesses.push_back(s.wit);
        cur = s.prev;
    }
    std::reverse(out.witnesses.begin(), out.witnesses.end());
    return out;
}

}  // namespace bcsg
