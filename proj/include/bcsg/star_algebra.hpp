#pragma once

#include <Eigen/Dense>
#include <map>
#include <string>
#include <vector>

#include "bcsg/bcs.hpp"
#include "bcsg/words.hpp"

namespace bcsg {

// A defining relation together with a certified upper bound on its operator
// norm (commutators and group-style 1-g bounds are 2; constraint projector
// sums are 1). Bounds enter the decomposition size functional.
struct Relation {
    std::string name;
    StarPoly poly;
    Rational norm;
};

class RelationSet {
public:
    int add(Relation r);  // returns index; throws on duplicate name
    int add_commutator_once(const GenRegistry& reg, int g, int h);  // dedup across contexts
    const Relation& operator[](int i) const { return rels_.at((size_t)i); }
    int size() const { return (int)rels_.size(); }
    const std::vector<Relation>& all() const { return rels_; }
    int index_of(const std::string& name) const;  // -1 if absent

private:
    std::vector<Relation> rels_;
    std::map<std::string, int> by_name_;
    std::map<std::pair<int, int>, int> comm_index_;
};

// Commutator xy - yx.
StarPoly commutator(int g, int h);

// Constraint relation: sum over unsatisfying assignments of the ordered
// projector product prod_j (1 + phi(x_j) x_j)/2; context order fixed
// increasing. Computed exactly with a Walsh-Hadamard transform.
StarPoly constraint_relation(const Constraint& c, const std::vector<int>& ctx_gens);

// All BCS relations of a system: pairwise commutators within every context
// (each included once) followed by one constraint relation per constraint.
// var_gens maps variable position -> generator id.
RelationSet bcs_relations(const Bcs& b, const GenRegistry& reg, const std::vector<int>& var_gens);

// Assignment of generators to d x d complex matrices; each image must be
// self-adjoint, unitary and square to the identity within tol.
struct MatrixRep {
    int dim = 0;
    std::map<int, Eigen::MatrixXcd> images;

    void set(int gen, const Eigen::MatrixXcd& m);
    void validate(double tol = 1e-10) const;
};

Eigen::MatrixXcd eval_word(const Word& w, const MatrixRep& rep);
Eigen::MatrixXcd eval_in_rep(const StarPoly& p, const MatrixRep& rep);

// <vec| pi(p)* pi(p) |vec> for a unit vector; the epsilon-state residual.
double state_residual(const StarPoly& p, const MatrixRep& rep, const Eigen::VectorXcd& vec);

}  // namespace bcsg
