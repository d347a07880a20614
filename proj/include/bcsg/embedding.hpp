#pragma once

#include <array>
#include <optional>
#include <string>
#include <vector>

#include "bcsg/bcs.hpp"
#include "bcsg/rdecomp.hpp"

namespace bcsg {

// Nested conjugacy variable w(i0, i1, ..., il): indices are generator ids
// with adjacent entries distinct; depth l >= 0, depth 0 is the base
// variable itself.
struct NestedVar {
    std::vector<int> idx;

    int depth() const { return (int)idx.size() - 1; }
    void validate() const;
    friend bool operator==(const NestedVar& a, const NestedVar& b) { return a.idx == b.idx; }
    friend bool operator<(const NestedVar& a, const NestedVar& b) { return a.idx < b.idx; }
};

// Palindromic image x_il ... x_i1 x_i0 x_i1 ... x_il; reduced of length
// 2*depth + 1 and an order-two unitary.
Word psi(const NestedVar& w);

std::string nested_var_name(const NestedVar& w, const GenRegistry& reg);

// Constraint system over nested conjugacy variables.
struct NestedBcs {
    std::vector<int> base_gens;
    std::vector<NestedVar> wvars;            // constraint variables (depth 0 allowed)
    std::vector<Constraint> constraints;     // contexts index into wvars

    int max_depth() const;
    int max_context() const;
    void validate(const GenRegistry& reg) const;
    int wvar_index(const NestedVar& w) const;  // -1 if absent
    int add_wvar(const NestedVar& w);          // dedup, returns index
};

// Constraint over wvars listed in any order; pred sees +/-1 values in the
// listed order.
Constraint nested_constraint(const std::vector<int>& wvar_indices,
                             const std::function<bool(const std::vector<int>&)>& pred);

// BCS relations of the system pushed through psi into the base letters.
RelationSet nested_relations(const NestedBcs& nb, GenRegistry& reg);

// Flattened system: one fresh boolean variable per prefix of every nested
// variable, plus the chain conjugacy relations and the telescoping
// decomposition of psi(w) - w (size depth^2) for each variable.
struct FlatSystem {
    Bcs bcs;                      // constraints over base + flattened variables
    std::vector<int> var_gens;    // bcs position -> generator id
    std::vector<std::array<int, 3>> conjugacies;  // (a, b, c): a b a = c, gen ids
    RelationSet relations;        // BCS relations of bcs, then conjugacy relations
    std::vector<int> conj_rel_index;              // conjugacies[k] -> relation index
    std::vector<RDecomp> psi_decomps;             // per wvar, empty at depth 0
    std::vector<int> wvar_gens;                   // wvar -> flattened/base gen id
};

FlatSystem flatten(const NestedBcs& nb, GenRegistry& reg);

// Conjugacy-to-BCS gadget for a b a = c: 42 boolean variables, 31 linear
// constraints of context size 3, and an exact decomposition of a b a - c
// over the gadget's BCS relations of size at most 1750.
struct Gadget {
    Bcs bcs;
    std::vector<int> var_gens;    // position -> gen id; 0,1,2 are a,b,c
    RelationSet relations;
    RDecomp cert;
    Rational measured_size;
};

Gadget conjugacy_gadget(int a, int b, int c, GenRegistry& reg);

// Block-matrix extension of a base representation with pi(a)pi(b)pi(a) =
// pi(c): dimension doubles for the y/z/w/f/g layer and doubles again for the
// d layer. Verifies every gadget relation numerically.
struct GadgetRepReport {
    int base_dim = 0;
    int extended_dim = 0;
    double max_residual = 0;
    std::vector<std::pair<std::string, double>> residuals;
    bool pass = false;
};

GadgetRepReport gadget_representation_check(const MatrixRep& base, int a, int b, int c,
                                            GenRegistry& reg, double tol = 1e-10);

struct CertEntry {
    std::string relation;
    Rational claimed;
    Rational measured;
    bool verified = false;
    size_t witnesses = 0;
};

struct EmbedResult {
    Bcs target;
    std::vector<int> var_gens;
    RelationSet target_relations;
    std::vector<CertEntry> certificate;
    RelationSet source_relations;     // what each decomposition expands to
    std::vector<RDecomp> decomps;     // parallel to certificate
    Rational claimed_bound;   // 2^16 M^2 l^2 per unit-size source relation
    bool all_verified = false;
    int num_gadgets = 0;

    std::string certificate_json() const;
    std::string certificate_text() const;
};

EmbedResult embed_nested_bcs(const NestedBcs& nb, GenRegistry& reg);

// Self-contained certificate files: generators, relations with norm bounds,
// and per-entry target polynomial plus witness list, re-checkable without
// the producing pipeline.
struct CertBundle {
    GenRegistry reg;
    RelationSet relations;
    struct Item {
        std::string name;
        Rational claimed;
        Rational measured;
        bool verified = false;
        StarPoly target;
        RDecomp decomp;
    };
    std::vector<Item> items;
};

CertBundle bundle_from_embed(const EmbedResult& res, const GenRegistry& reg);
CertBundle bundle_from_gadget(const Gadget& g, int a, int b, int c, const GenRegistry& reg);
std::string bundle_to_json(const CertBundle& cb);
CertBundle bundle_from_json(const std::string& text);
// re-verifies every item in place; true iff all pass and sizes match claims
bool recheck_bundle(CertBundle& cb, std::string* first_failure = nullptr);

// Z2-linear system Ax = b as parity constraints; rows must be nonzero.
Bcs lcs_to_bcs(const std::vector<std::vector<int>>& A, const std::vector<int>& b);

// Solution group presentation: generators x_0..x_{n-1} and J (id n),
// relator words stored unreduced.
struct SolutionGroup {
    int num_vars = 0;
    int j_gen = 0;
    std::vector<std::vector<int>> g0, g1, g2, g3;
};

SolutionGroup solution_group(const std::vector<std::vector<int>>& A, const std::vector<int>& b);

// Structural skeleton of the m-th constraint system in the halting family:
// commutation constraints C1-C12, the equality-under-Q constraints C13-C16,
// C17 tying the distinguished variable to P and Q, and the 6-variable C18
// with its 20 unsatisfying assignments, appended to a caller-supplied group
// part. fix_c16 switches the right side of C16 from the transcribed
// X-conjugate to the symmetric Z-conjugate.
struct LFamilyOptions {
    bool fix_c16 = false;
};

NestedBcs lfamily_skeleton(int m, const Bcs& group_part, GenRegistry& reg,
                           const LFamilyOptions& opt = {});

// The named generators lfamily_skeleton needs, interned in a fixed order.
void intern_lfamily_generators(GenRegistry& reg);

// Nested system files: the BCS grammar plus
//   nested w <name> = <center> <i1> <i2> ...
// declarations; constraints may reference base and nested names alike.
NestedBcs parse_nested_bcs(const std::string& text, GenRegistry& reg);
std::string render_nested_bcs(const NestedBcs& nb, const GenRegistry& reg);

}  // namespace bcsg
