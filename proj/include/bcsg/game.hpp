#pragma once

#include <Eigen/Dense>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "bcsg/bcs.hpp"
#include "bcsg/star_algebra.hpp"

namespace bcsg {

// Two-player one-round game (X, Y, A, B, pi, V). Answer sets are per
// question; V is stored extensionally as the winning set (absent = lose).
// Question labels drive shared-Bob merging and file round-trips.
class Game {
public:
    std::vector<std::string> alice_labels, bob_labels;
    std::vector<int> alice_answers, bob_answers;
    std::map<std::pair<int, int>, Rational> pi;

    bool win(int x, int y, int a, int b) const { return wins_.count(key(x, y, a, b)) > 0; }
    void set_win(int x, int y, int a, int b);
    void validate() const;

    int alice_index(const std::string& label) const;  // -1 if absent
    int bob_index(const std::string& label) const;

private:
    static uint64_t key(int x, int y, int a, int b) {
        return ((uint64_t)(uint16_t)x << 48) | ((uint64_t)(uint16_t)y << 32) |
               ((uint64_t)(uint16_t)a << 16) | (uint64_t)(uint16_t)b;
    }
    std::set<uint64_t> wins_;
};

// Constraint-variable game of a BCS: Alice gets constraint i with weight
// mu(i) and answers an assignment of its context; Bob gets a uniformly random
// variable of that context and answers a sign. They win iff Alice satisfies
// and both agree on the shared variable. Alice answer = packed assignment;
// Bob answer 0 = +1, 1 = -1.
Game bcs_to_game(const Bcs& b);

Game always_win();
Game always_lose();

enum class BobMode { Tagged, SharedByLabel };

// Convex mixture: with probability p play g1, else g2. Tagged mode keeps the
// parties' question sets disjoint; SharedByLabel merges Bob questions with
// equal labels so Bob cannot tell which sub-game he is in.
Game mix_games(const Rational& p, const Game& g1, const Game& g2, BobMode mode = BobMode::Tagged);

// theta in (0,1): mixes with an always-lose (theta >= 1/2) or always-win
// (theta < 1/2) game so that value > theta iff mixed value > 1/2.
Game theta_shift(const Game& g, const Rational& theta);

// Thm-style mixture G_m: with p = C/(1+C) play the BCS game, else both
// players get x_D and win iff both answer -1. Bob questions shared.
std::pair<Game, Rational> build_Gm(const Bcs& b, int dist_var, long long C);

// Exact optimum over deterministic strategies (convexity makes this the
// classical value). Enumerates the cheaper party, best-responds the other.
Rational classical_value(const Game& g);

// Finite-dimensional strategy: tensor form (dimA x dimB) or commuting form
// on a single space. Projectors per question/answer plus a shared state.
struct Strategy {
    bool tensor = true;
    int dimA = 1, dimB = 1;  // commuting form: dimA == dimB == dim
    std::vector<std::vector<Eigen::MatrixXcd>> alice, bob;
    Eigen::VectorXcd state;

    int total_dim() const { return tensor ? dimA * dimB : dimA; }
    void validate(const Game& g, double tol = 1e-10) const;
};

double strategy_value(const Game& g, const Strategy& s);

Strategy perfect_strategy_from_assignment(const Bcs& b, Assignment a);

struct EpsilonReport {
    double eps;                  // 1 - strategy value
    Rational t_b;                // 4^{M+2} k M^3
    std::vector<std::pair<std::string, double>> residuals;
    bool all_within_bound;       // every residual <= T_B eps + 1e-8
};

// Residuals phi_S(r*r) of every BCS relation under Bob's observables.
EpsilonReport epsilon_report(const Bcs& b, const Strategy& s);

// Named builders used by tests and the CLI corpus.
Game chsh_game();
Strategy chsh_optimal_strategy();
Strategy magic_square_strategy(const Bcs& magic);
std::vector<Eigen::MatrixXcd> magic_square_observables();

// Game and strategy plain-text files.
Game parse_game(const std::string& text);
std::string render_game(const Game& g);
Strategy parse_strategy(const std::string& text);
std::string render_strategy(const Strategy& s);

}  // namespace bcsg
