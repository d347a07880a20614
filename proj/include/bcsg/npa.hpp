#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "bcsg/game.hpp"
#include "bcsg/sdp.hpp"

namespace bcsg {
namespace npa {

// Projector symbol: question q, answer a. The designated last outcome of
// every question is eliminated through completeness, so a ranges over
// 0 .. answers(q)-2.
struct PSym {
    int q = 0, a = 0;
    friend bool operator==(const PSym& x, const PSym& y) { return x.q == y.q && x.a == y.a; }
    friend bool operator<(const PSym& x, const PSym& y) {
        return x.q != y.q ? x.q < y.q : x.a < y.a;
    }
};

// Word in the measurement projectors, Alice letters sorted before Bob
// letters (cross-party commutation). Within a party, adjacent same-question
// symbols collapse (idempotence) or annihilate (orthogonal outcomes).
struct PWord {
    bool zero = false;
    std::vector<PSym> alice, bob;

    size_t length() const { return alice.size() + bob.size(); }
    friend bool operator==(const PWord& x, const PWord& y) {
        return x.zero == y.zero && x.alice == y.alice && x.bob == y.bob;
    }
    friend bool operator<(const PWord& x, const PWord& y);
};

PWord pword_zero();
PWord pword_append(const PWord& w, bool alice_side, const PSym& s);
PWord pword_mul(const PWord& x, const PWord& y);
PWord pword_star(const PWord& w);
PWord pword_canonical(const PWord& w);  // min(w, w*): moments are symmetric
std::string pword_str(const PWord& w);

std::vector<PSym> alice_symbols(const Game& g);
std::vector<PSym> bob_symbols(const Game& g);

// Deduplicated canonical words of length <= k including the empty word,
// ordered by (length, alice, bob). Throws when the cap is exceeded.
std::vector<PWord> build_basis(const Game& g, int level, size_t cap = 5000);

// Linear combination of moments: coefficient per canonical word plus a
// scalar part (the empty word).
struct MomentExpr {
    Rational constant;
    std::map<PWord, Rational> coeffs;
};

// Moment-matrix relaxation at one level: basis, variable ids per canonical
// entry word, objective encoding the game functional.
struct MomentRelaxation {
    int level = 0;
    std::vector<PWord> basis;
    std::map<PWord, int> var_index;       // canonical non-empty words -> 1-based id
    std::vector<PWord> var_words;         // id-1 -> word
    MomentExpr objective;
    // entries[i*n+j] for i<=j: 0 empty word, -1 zero word, else var id
    std::vector<int> entry_var;

    int n() const { return (int)basis.size(); }
    int num_vars() const { return (int)var_words.size(); }
    SdpProblem to_sdp() const;
};

MomentRelaxation build_relaxation(const Game& g, int level, size_t cap = 5000);

// Expansion of one projector pair E^x_a F^y_b with eliminated outcomes
// rewritten via completeness.
MomentExpr projector_pair_expr(const Game& g, int x, int y, int a, int b);

// The game functional as a moment expression (sum over winning pairs),
// independent of any basis.
MomentExpr game_objective(const Game& g);

struct NpaResult {
    double value = 0;          // solver optimum plus objective constant
    double upper = 0;          // weak-duality certified upper bound
    SdpSolution sdp;
};

NpaResult npa_solve(const Game& g, int level, double tol = 1e-7, size_t cap = 5000);
double npa_value(const Game& g, int level, double tol = 1e-7);

enum class Threshold { Above, Below, Inconclusive };
Threshold decide_threshold(const Game& g, int level, const Rational& theta, double tol = 1e-7);

// Value chain of one game: exact classical value, relaxation bounds per
// requested level, and any supplied strategy evaluations. The classical
// value never exceeds a relaxation bound beyond solver tolerance; violations
// indicate solver failure and throw.
struct GameValueReport {
    Rational classical;
    std::map<int, double> npa_levels;
    std::vector<std::pair<std::string, double>> strategy_values;
};

GameValueReport make_value_report(const Game& g, const std::vector<int>& levels,
                                  const std::vector<std::pair<std::string, Strategy>>& strategies,
                                  double tol = 1e-7);

// Exact structural certificate that the level-k optimum is <= 1: the losing
// and winning moment expressions telescope to the unit moment, and at k >= 2
// every projector-pair moment sits on the diagonal of the (un-eliminated)
// moment matrix. Returns false when the structure does not support the bound.
bool certify_value_at_most_one(const Game& g, int level);

// Objective evaluated at the moment vector of a finite strategy; the
// strategy's Gram moment matrix is feasible at every level, so this is a
// lower bound on the relaxation optimum.
double objective_at_strategy(const Game& g, const MomentExpr& objective, const Strategy& s);

}  // namespace npa
}  // namespace bcsg
