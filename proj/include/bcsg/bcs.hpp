#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "bcsg/rational.hpp"

namespace bcsg {

// Boolean convention throughout: -1 is TRUE, +1 is FALSE. Assignments over a
// context are packed into an unsigned index with bit j set iff the j-th
// context variable takes the value -1.

struct BoolVar {
    int id = 0;
    std::string name;
};

// Satisfying assignments of one constraint, stored extensionally as a bitset
// over all 2^m assignments of its context. Contexts are capped at 16.
class SatSet {
public:
    SatSet() = default;
    explicit SatSet(int arity);

    int arity() const { return arity_; }
    uint32_t count() const;
    bool test(uint32_t assignment) const;
    void set(uint32_t assignment, bool sat = true);
    void fill(bool sat);

    friend bool operator==(const SatSet& a, const SatSet& b) {
        return a.arity_ == b.arity_ && a.bits_ == b.bits_;
    }

private:
    int arity_ = 0;
    std::vector<uint64_t> bits_;
};

struct Constraint {
    std::vector<int> context;  // variable ids, strictly increasing
    SatSet satisfying;
};

// Assignment of every variable of a system: bit v set iff variable v is -1.
using Assignment = uint32_t;

constexpr int kMaxContext = 16;
constexpr int kMaxBruteForceVars = 30;

class Bcs {
public:
    std::vector<BoolVar> vars;
    std::vector<Constraint> constraints;
    std::optional<std::vector<Rational>> weights;  // distribution over constraints

    int var_id(const std::string& name) const;  // -1 if absent
    void validate() const;                      // invariants; throws on violation

    // Weight of constraint i: stored weight, or uniform when omitted.
    Rational weight(int i) const;

    // Restriction of a full assignment to the context of constraint ci,
    // packed in context order.
    uint32_t restrict_to_context(int ci, Assignment a) const;
};

struct ParseError : std::runtime_error {
    int line;
    ParseError(int line_, const std::string& what)
        : std::runtime_error("line " + std::to_string(line_) + ": " + what), line(line_) {}
};

Bcs parse_bcs(const std::string& text);
std::string render_bcs(const Bcs& b);

// Per-constraint satisfaction vector of a full assignment.
std::vector<bool> check_assignment(const Bcs& b, Assignment a);
bool satisfies_all(const Bcs& b, Assignment a);

// Lexicographic scan over all 2^n assignments (all-FALSE first);
// n <= 30 enforced.
std::optional<Assignment> brute_force_satisfiability(const Bcs& b);

// Builders used across the suite.
Constraint make_constraint(std::vector<int> context,
                           const std::function<bool(const std::vector<int>&)>& sat_pred);
Constraint parity_constraint(std::vector<int> context, int rhs_sign);  // product == rhs_sign

// Mermin-Peres magic square linear system as a BCS: variables x0..x8,
// rows multiply to +1, columns to (+1, +1, -1).
Bcs magic_square_bcs();

}  // namespace bcsg
