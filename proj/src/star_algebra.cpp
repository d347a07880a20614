#include "bcsg/star_algebra.hpp"

#include <algorithm>
#include <stdexcept>

namespace bcsg {

int RelationSet::add(Relation r) {
    if (by_name_.count(r.name)) throw std::invalid_argument("duplicate relation " + r.name);
    int idx = (int)rels_.size();
    by_name_.emplace(r.name, idx);
    rels_.push_back(std::move(r));
    return idx;
}

int RelationSet::add_commutator_once(const GenRegistry& reg, int g, int h) {
    if (g == h) throw std::invalid_argument("commutator of a generator with itself");
    auto key = std::minmax(g, h);
    auto it = comm_index_.find(key);
    if (it != comm_index_.end()) return it->second;
    // orientation follows the first-seen order, so systems built in parallel
    // stay aligned term for term
    Relation r;
    r.name = "comm(" + reg.name(g) + "," + reg.name(h) + ")";
    r.poly = commutator(g, h);
    r.norm = Rational(2);
    int idx = add(std::move(r));
    comm_index_.emplace(key, idx);
    return idx;
}

int RelationSet::index_of(const std::string& name) const {
    auto it = by_name_.find(name);
    return it == by_name_.end() ? -1 : it->second;
}

StarPoly commutator(int g, int h) {
    StarPoly p;
    p.add_term(Word{g, h}, Coeff(1));
    p.add_term(Word{h, g}, Coeff(-1));
    return p;
}

StarPoly constraint_relation(const Constraint& c, const std::vector<int>& ctx_gens) {
    int m = (int)c.context.size();
    if (m > kMaxContext) throw std::invalid_argument("context too large");
    if ((int)ctx_gens.size() != m) throw std::invalid_argument("ctx_gens size mismatch");
    size_t total = size_t(1) << m;

    // Walsh-Hadamard transform of the unsatisfying-set indicator gives the
    // coefficient of each subset monomial, up to the 2^-m normalization.
    std::vector<long long> f(total);
    for (uint32_t a = 0; a < (uint32_t)total; ++a) f[a] = c.satisfying.test(a) ? 0 : 1;
    for (int bit = 0; bit < m; ++bit) {
        size_t stride = size_t(1) << bit;
        for (size_t base = 0; base < total; base += 2 * stride)
            for (size_t j = base; j < base + stride; ++j) {
                long long x = f[j], y = f[j + stride];
                f[j] = x + y;
                f[j + stride] = x - y;
            }
    }
    // After the WHT, f[S] = sum_phi unsat(phi) * (-1)^{|S cap phi|}. A bit set
    // in phi means value -1, so the monomial coefficient of prod_{j in S} x_j
    // is f[S] / 2^m.
    StarPoly p;
    Rational scale(1, (long long)total);
    for (uint32_t S = 0; S < (uint32_t)total; ++S) {
        if (f[S] == 0) continue;
        Word w;
        for (int j = 0; j < m; ++j)
            if ((S >> j) & 1) w.push_back(ctx_gens[(size_t)j]);
        p.add_term(w, Coeff(Rational(f[S]) * scale));
    }
    return p;
}

RelationSet bcs_relations(const Bcs& b, const GenRegistry& reg,
                          const std::vector<int>& var_gens) {
    if (var_gens.size() != b.vars.size()) throw std::invalid_argument("var_gens size mismatch");
    RelationSet rs;
    for (const auto& c : b.constraints)
        for (size_t i = 0; i < c.context.size(); ++i)
            for (size_t j = i + 1; j < c.context.size(); ++j)
                rs.add_commutator_once(reg, var_gens[(size_t)c.context[i]],
                                       var_gens[(size_t)c.context[j]]);
    for (int ci = 0; ci < (int)b.constraints.size(); ++ci) {
        const auto& c = b.constraints[(size_t)ci];
        std::vector<int> gens;
        for (int v : c.context) gens.push_back(var_gens[(size_t)v]);
        Relation r;
        r.name = "con" + std::to_string(ci);
        r.poly = constraint_relation(c, gens);
        r.norm = Rational(1);
        rs.add(std::move(r));
    }
    return rs;
}

void MatrixRep::set(int gen, const Eigen::MatrixXcd& m) {
    if (dim == 0) dim = (int)m.rows();
    if (m.rows() != dim || m.cols() != dim) throw std::invalid_argument("dimension mismatch");
    images[gen] = m;
}

void MatrixRep::validate(double tol) const {
    Eigen::MatrixXcd id = Eigen::MatrixXcd::Identity(dim, dim);
    for (const auto& [g, m] : images) {
        if ((m - m.adjoint()).norm() > tol)
            throw std::invalid_argument("generator image not self-adjoint");
        if ((m * m - id).norm() > tol)
            throw std::invalid_argument("generator image not an involution");
    }
}

Eigen::MatrixXcd eval_word(const Word& w, const MatrixRep& rep) {
    Eigen::MatrixXcd acc = Eigen::MatrixXcd::Identity(rep.dim, rep.dim);
    for (int g : w) {
        auto it = rep.images.find(g);
        if (it == rep.images.end()) throw std::out_of_range("unassigned generator in word");
        acc = acc * it->second;
    }
    return acc;
}

Eigen::MatrixXcd eval_in_rep(const StarPoly& p, const MatrixRep& rep) {
    Eigen::MatrixXcd acc = Eigen::MatrixXcd::Zero(rep.dim, rep.dim);
    for (const auto& [w, c] : p.terms()) {
        std::complex<double> z(c.re.to_double(), c.im.to_double());
        acc += z * eval_word(w, rep);
    }
    return acc;
}

double state_residual(const StarPoly& p, const MatrixRep& rep, const Eigen::VectorXcd& vec) {
    if ((int)vec.size() != rep.dim) throw std::invalid_argument("vector dimension mismatch");
    if (std::abs(vec.norm() - 1.0) > 1e-10) throw std::invalid_argument("vector not unit norm");
    Eigen::VectorXcd image = eval_in_rep(p, rep) * vec;
    return image.squaredNorm();
}

}  // namespace bcsg
