#pragma once

#include <optional>
#include <vector>

#include "bcsg/star_algebra.hpp"

namespace bcsg {

// One witness lambda * u * r * v; r is a relation index into a RelationSet,
// taken starred when star is set.
struct Witness {
    Coeff lambda;
    Word u;
    int rel = 0;
    bool star = false;
    Word v;
};

struct RDecomp {
    std::vector<Witness> witnesses;

    int max_rel_index() const;
};

// Def-3.2 size functional: sum |lambda_i| (1 + ||r_i|| deg(v_i)), evaluated
// exactly from the stored norm bounds.
Rational rdecomp_size(const RDecomp& d, const RelationSet& rels);

// Exact expansion sum lambda_i u_i r_i v_i as a star-polynomial.
StarPoly rdecomp_expand(const RDecomp& d, const RelationSet& rels);

bool verify_decomposition(const RDecomp& d, const StarPoly& target, const RelationSet& rels);

// sizecalc part 1: decomposition of sum lambda_i f_i; asserts the returned
// size obeys sum |lambda_i| Lambda_i.
RDecomp rdecomp_add(const std::vector<std::pair<Coeff, RDecomp>>& parts, const RelationSet& rels);

// sizecalc part 2: from decompositions of alpha1-beta1 and alpha2-beta2,
// a decomposition of alpha1*alpha2 - beta1*beta2 of size
// <= Lambda2 + Lambda1 (1 + deg beta2); asserted, not assumed.
RDecomp rdecomp_mul(const RDecomp& d1, const Word& alpha1, const RDecomp& d2, const Word& beta2,
                    const RelationSet& rels);

// Minimum-size rewrite search: treats every two-term relation c(p - q) as a
// reversible subword rewrite p <-> q (and its adjoint) and runs Dijkstra over
// reduced words, move cost = |lambda| (1 + ||r|| deg(v)). On success the
// witness chain decomposes source - target over the given relations.
struct SearchLimits {
    Rational budget = Rational(200);
    size_t max_len = 12;
    size_t max_states = 200000;
};

std::optional<RDecomp> decompose_by_rewriting(const Word& source, const Word& target,
                                              const RelationSet& rels,
                                              const std::vector<int>& usable,
                                              const SearchLimits& limits);

}  // namespace bcsg
