#include "bcsg/embedding.hpp"

#include <algorithm>
#include <functional>
#include <json.hpp>
#include <set>
#include <sstream>

namespace bcsg {

void NestedVar::validate() const {
    if (idx.empty()) throw std::invalid_argument("empty nested variable");
    for (size_t j = 1; j < idx.size(); ++j)
        if (idx[j] == idx[j - 1])
            throw std::invalid_argument("nested variable with equal adjacent indices");
}

Word psi(const NestedVar& w) {
    w.validate();
    Word out;
    for (size_t j = w.idx.size(); j-- > 1;) out.push_back(w.idx[j]);
    out.push_back(w.idx[0]);
    for (size_t j = 1; j < w.idx.size(); ++j) out.push_back(w.idx[j]);
    if (!is_reduced(out)) throw std::logic_error("psi image not reduced");
    return out;
}

std::string nested_var_name(const NestedVar& w, const GenRegistry& reg) {
    if (w.depth() == 0) return reg.name(w.idx[0]);
    std::string s = "cj(" + reg.name(w.idx[0]) + ";";
    for (size_t j = 1; j < w.idx.size(); ++j) {
        if (j > 1) s += ",";
        s += reg.name(w.idx[j]);
    }
    return s + ")";
}

int NestedBcs::max_depth() const {
    int d = 0;
    for (const auto& w : wvars) d = std::max(d, w.depth());
    return d;
}

int NestedBcs::max_context() const {
    int m = 0;
    for (const auto& c : constraints) m = std::max(m, (int)c.context.size());
    return m;
}

void NestedBcs::validate(const GenRegistry& reg) const {
    std::set<int> base(base_gens.begin(), base_gens.end());
    std::set<std::vector<int>> seen;
    for (const auto& w : wvars) {
        w.validate();
        for (int g : w.idx) {
            reg.name(g);  // range check
            if (!base.count(g)) throw std::invalid_argument("nested index outside base set");
        }
        if (!seen.insert(w.idx).second) throw std::invalid_argument("duplicate nested variable");
    }
    for (const auto& c : constraints) {
        if (c.context.empty()) throw std::invalid_argument("empty context");
        for (size_t j = 0; j < c.context.size(); ++j) {
            if (c.context[j] < 0 || c.context[j] >= (int)wvars.size())
                throw std::invalid_argument("context out of range");
            if (j && c.context[j] <= c.context[j - 1])
                throw std::invalid_argument("context not strictly increasing");
        }
    }
}

int NestedBcs::wvar_index(const NestedVar& w) const {
    for (int i = 0; i < (int)wvars.size(); ++i)
        if (wvars[(size_t)i] == w) return i;
    return -1;
}

int NestedBcs::add_wvar(const NestedVar& w) {
    int i = wvar_index(w);
    if (i >= 0) return i;
    w.validate();
    wvars.push_back(w);
    return (int)wvars.size() - 1;
}

Constraint nested_constraint(const std::vector<int>& wvar_indices,
                             const std::function<bool(const std::vector<int>&)>& pred) {
    return make_constraint(wvar_indices, pred);
}

namespace {

// Rebuild a constraint after renaming its context variables, keeping the
// satisfying set aligned with the new sorted order.
Constraint remap_constraint(const Constraint& c, const std::vector<int>& new_ids) {
    int m = (int)c.context.size();
    std::vector<int> order((size_t)m);
    for (int j = 0; j < m; ++j) order[(size_t)j] = j;
    std::sort(order.begin(), order.end(),
              [&](int x, int y) { return new_ids[(size_t)x] < new_ids[(size_t)y]; });
    Constraint out;
    out.context.resize((size_t)m);
    for (int j = 0; j < m; ++j) out.context[(size_t)j] = new_ids[(size_t)order[(size_t)j]];
    for (int j = 1; j < m; ++j)
        if (out.context[(size_t)j] == out.context[(size_t)j - 1])
            throw std::invalid_argument("context collision after renaming");
    out.satisfying = SatSet(m);
    for (uint32_t a = 0; a < (uint32_t(1) << m); ++a) {
        if (!c.satisfying.test(a)) continue;
        uint32_t na = 0;
        for (int j = 0; j < m; ++j)
            if ((a >> order[(size_t)j]) & 1) na |= uint32_t(1) << j;
        out.satisfying.set(na);
    }
    return out;
}

Bcs wvar_bcs(const NestedBcs& nb, const GenRegistry& reg) {
    Bcs w;
    for (int i = 0; i < (int)nb.wvars.size(); ++i)
        w.vars.push_back({i, nested_var_name(nb.wvars[(size_t)i], reg)});
    w.constraints = nb.constraints;
    w.validate();
    return w;
}

}  // namespace

RelationSet nested_relations(const NestedBcs& nb, GenRegistry& reg) {
    nb.validate(reg);
    Bcs wb = wvar_bcs(nb, reg);
    GenRegistry wreg;
    std::vector<int> ids;
    for (const auto& v : wb.vars) ids.push_back(wreg.intern(v.name));
    RelationSet wrels = bcs_relations(wb, wreg, ids);
    std::map<int, Word> images;
    for (int i = 0; i < (int)nb.wvars.size(); ++i) images[i] = psi(nb.wvars[(size_t)i]);
    RelationSet out;
    for (const auto& r : wrels.all()) {
        Relation nr;
        nr.name = r.name;
        nr.poly = r.poly.substituted(images);
        nr.norm = r.norm;
        out.add(std::move(nr));
    }
    return out;
}

FlatSystem flatten(const NestedBcs& nb, GenRegistry& reg) {
    nb.validate(reg);
    FlatSystem fs;

    // intern every prefix variable and collect the chain conjugacy relations
    fs.wvar_gens.resize(nb.wvars.size());
    std::vector<std::array<int, 3>> conj;
    std::set<std::array<int, 3>> conj_seen;
    for (size_t wi = 0; wi < nb.wvars.size(); ++wi) {
        const NestedVar& w = nb.wvars[wi];
        int prev_gen = w.idx[0];
        for (int j = 1; j <= w.depth(); ++j) {
            NestedVar prefix{std::vector<int>(w.idx.begin(), w.idx.begin() + j + 1)};
            int g = reg.intern(nested_var_name(prefix, reg));
            std::array<int, 3> t{w.idx[(size_t)j], prev_gen, g};
            if (conj_seen.insert(t).second) conj.push_back(t);
            prev_gen = g;
        }
        fs.wvar_gens[wi] = prev_gen;
    }
    fs.conjugacies = std::move(conj);

    // variable order: constraint variables first, in wvar order, so every
    // context keeps its relative order and the flat relations project back
    // onto the nested relations letter for letter; remaining base letters and
    // intermediate prefixes follow
    std::vector<int> gens;
    std::set<int> present;
    auto push_gen = [&](int g) {
        if (present.insert(g).second) gens.push_back(g);
    };
    for (size_t wi = 0; wi < nb.wvars.size(); ++wi) push_gen(fs.wvar_gens[wi]);
    for (int g : nb.base_gens) push_gen(g);
    for (const auto& t : fs.conjugacies) {
        push_gen(t[1]);
        push_gen(t[2]);
    }

    std::map<int, int> pos_of_gen;
    for (int i = 0; i < (int)gens.size(); ++i) {
        fs.bcs.vars.push_back({i, reg.name(gens[(size_t)i])});
        pos_of_gen[gens[(size_t)i]] = i;
    }
    fs.var_gens = gens;
    for (const auto& c : nb.constraints) {
        std::vector<int> ids;
        for (int wv : c.context) ids.push_back(pos_of_gen.at(fs.wvar_gens[(size_t)wv]));
        fs.bcs.constraints.push_back(remap_constraint(c, ids));
    }
    fs.bcs.validate();

    fs.relations = bcs_relations(fs.bcs, reg, fs.var_gens);
    for (const auto& t : fs.conjugacies) {
        Relation r;
        r.name = "conj(" + reg.name(t[2]) + ")";
        StarPoly p;
        p.add_term(Word{t[0], t[1], t[0]}, Coeff(1));
        p.add_term(Word{t[2]}, Coeff(-1));
        r.poly = p;
        r.norm = Rational(2);
        fs.conj_rel_index.push_back(fs.relations.add(std::move(r)));
    }

    // telescoping decomposition of psi(w) - w, size depth^2
    fs.psi_decomps.resize(nb.wvars.size());
    std::map<std::vector<int>, int> conj_of_prefix;
    for (size_t k = 0; k < fs.conjugacies.size(); ++k) {
        // keyed by the flattened generator c of the prefix
        conj_of_prefix[{fs.conjugacies[k][2]}] = fs.conj_rel_index[k];
    }
    for (size_t wi = 0; wi < nb.wvars.size(); ++wi) {
        const NestedVar& w = nb.wvars[wi];
        int k = w.depth();
        if (k == 0) continue;
        RDecomp d;
        for (int t = k; t >= 1; --t) {
            NestedVar prefix{std::vector<int>(w.idx.begin(), w.idx.begin() + t + 1)};
            int cgen = reg.id(nested_var_name(prefix, reg));
            Word u, v;
            for (int j = k; j > t; --j) u.push_back(w.idx[(size_t)j]);
            for (int j = t + 1; j <= k; ++j) v.push_back(w.idx[(size_t)j]);
            d.witnesses.push_back({Coeff(1), u, conj_of_prefix.at({cgen}), false, v});
        }
        StarPoly want = StarPoly::monomial(psi(w), Coeff(1)) -
                        StarPoly::monomial(Word{fs.wvar_gens[wi]}, Coeff(1));
        if (!verify_decomposition(d, want, fs.relations))
            throw std::logic_error("telescoping decomposition failed to verify");
        if (rdecomp_size(d, fs.relations) != Rational((long long)k * k))
            throw std::logic_error("telescoping decomposition size != depth^2");
        fs.psi_decomps[wi] = std::move(d);
    }
    return fs;
}

namespace {

// Gadget template over placeholder generators; instantiated by renaming.
struct GadgetTemplate {
    GenRegistry reg;
    std::vector<std::string> var_names;  // 42 entries, positions fixed
    Bcs bcs;
    RelationSet rels;      // BCS relations of bcs (commutators then con0..con30)
    RDecomp cert;          // decomposition of a b a - c over rels
};

const std::array<std::array<int, 3>, 4> kGadgetBlocks = {{
    {12, 3, 6},   // f y1 z1
    {12, 4, 7},   // f y2 z2
    {12, 5, 8},   // f y3 z3
    {9, 4, 8},    // w1 y2 z3
}};

const GadgetTemplate& gadget_template() {
    static const GadgetTemplate tpl = [] {
        GadgetTemplate t;
        const char* names[] = {"a", "b", "c", "y1", "y2", "y3", "z1", "z2", "z3",
                               "w1", "w2", "w3", "f", "g"};
        for (const char* n : names) t.var_names.push_back(n);
        for (int j = 1; j <= 4; ++j)
            for (int l = 1; l <= 7; ++l)
                t.var_names.push_back("d" + std::to_string(j) + std::to_string(l));
        for (int i = 0; i < (int)t.var_names.size(); ++i) {
            t.reg.fresh(t.var_names[(size_t)i]);
            t.bcs.vars.push_back({i, t.var_names[(size_t)i]});
        }
        auto add_parity = [&](std::vector<int> ctx) {
            t.bcs.constraints.push_back(parity_constraint(std::move(ctx), +1));
        };
        for (int i = 0; i < 3; ++i) add_parity({i, 3 + i, 6 + i});       // x y z = 1
        for (int i = 0; i < 3; ++i) add_parity({i, 12, 9 + i});          // x f w = 1
        add_parity({13, 4, 8});                                          // g y2 z3 = 1
        for (int j = 0; j < 4; ++j) {
            auto [aj, bj, cj] = std::tuple{kGadgetBlocks[(size_t)j][0], kGadgetBlocks[(size_t)j][1],
                                           kGadgetBlocks[(size_t)j][2]};
            int d = 14 + 7 * j;  // d_{j1} position
            add_parity({aj, d, d + 1});
            add_parity({bj, d + 1, d + 2});
            add_parity({d + 2, d + 3, d + 4});
            add_parity({aj, d + 4, d + 5});
            add_parity({cj, d + 5, d + 6});
            add_parity({d, d + 3, d + 6});
        }
        t.bcs.validate();
        std::vector<int> ids;
        for (int i = 0; i < 42; ++i) ids.push_back(i);
        t.rels = bcs_relations(t.bcs, t.reg, ids);

        // inner chains: a_j b_j a_j -> c_j over the block's own relations
        auto block_chain = [&](int j) {
            std::vector<int> usable;
            for (int ci = 7 + 6 * j; ci < 13 + 6 * j; ++ci)
                usable.push_back(t.rels.index_of("con" + std::to_string(ci)));
            const auto& blk = kGadgetBlocks[(size_t)j];
            std::set<int> members = {blk[0], blk[1], blk[2]};
            for (int l = 0; l < 7; ++l) members.insert(14 + 7 * j + l);
            for (int x : members)
                for (int y : members)
                    if (x < y) {
                        int idx = t.rels.index_of("comm(" + t.reg.name(x) + "," + t.reg.name(y) + ")");
                        if (idx >= 0) usable.push_back(idx);
                    }
            SearchLimits lim;
            lim.budget = Rational(40);
            lim.max_len = 8;
            Word src = {blk[0], blk[1], blk[0]}, dst = {blk[2]};
            auto d = decompose_by_rewriting(src, dst, t.rels, usable, lim);
            if (!d) throw std::logic_error("gadget inner chain search failed");
            return *d;
        };
        std::array<RDecomp, 4> inner;
        for (int j = 0; j < 4; ++j) inner[(size_t)j] = block_chain(j);

        // outer chain, following the proof: a b a = (w1 f)(y2 z2)(w1 f), the
        // middle regrouped into (f w1 y2 w1 f)(f w1 z2 w1 f), the left factor
        // collapsing to y3 and the right to z3, and y3 z3 = c. Witness list
        // telescoping A = [a b a] -> W -> W' -> y3 z3 -> [c], with the four
        // conjugacy relations iv_j kept symbolic for block substitution.
        struct OuterWit {
            Coeff lambda;
            Word u;
            int rel;   // >= 0: index into t.rels; -1-j: conjugacy block j
            Word v;
        };
        int con1 = t.rels.index_of("con1"), con2 = t.rels.index_of("con2"),
            con3 = t.rels.index_of("con3");
        int cwf = t.rels.index_of("comm(w1,f)");
        if (con1 < 0 || con2 < 0 || con3 < 0 || cwf < 0)
            throw std::logic_error("gadget relation lookup failed");
        const Word P = {12, 9, 4, 9, 12};  // f w1 y2 w1 f
        std::vector<OuterWit> outer = {
            // A - W with W = w1 f y2 z2 w1 f
            {Coeff(2), {9, 12, 4, 7, 0}, con3, {}},
            {Coeff(2), {9, 12, 1}, con1, {0}},
            {Coeff(2), {0}, con3, {1, 0}},
            // W - W' swaps the leading w1 f
            {Coeff(1), {}, cwf, {4, 7, 9, 12}},
            // W' - y3 z3 through the product of the two conjugated factors
            {Coeff(-1), {12, 9, 4}, -1 - 1, {9, 12}},          // z2 -> f y2 f (iv1)
            {Coeff(-1), P, cwf, {12, 4, 12, 9, 12}},
            {Coeff(-1), {12, 9, 4, 9, 12, 9, 4}, cwf, {12}},
            {Coeff(1), P, -1 - 3, {}},                         // w1 y2 w1 -> z3 (iv3)
            {Coeff(1), {12}, -1 - 3, {12, 8}},
            {Coeff(-1), {12}, -1 - 2, {12, 8}},                // f y3 f -> z3 (iv2)
            // y3 z3 - c
            {Coeff(-2), {2}, con2, {}},
        };

        // substitute each conjugacy witness by the block decomposition
        for (const auto& w : outer) {
            if (w.rel >= 0) {
                t.cert.witnesses.push_back({w.lambda, w.u, w.rel, false, w.v});
            } else {
                int j = -1 - w.rel;
                for (const auto& iw : inner[(size_t)j].witnesses) {
                    Witness nw;
                    nw.lambda = w.lambda * iw.lambda;
                    nw.u = concat(w.u, iw.u);
                    nw.rel = iw.rel;
                    nw.star = iw.star;
                    nw.v = concat(iw.v, w.v);
                    t.cert.witnesses.push_back(std::move(nw));
                }
            }
        }
        StarPoly target;
        target.add_term(Word{0, 1, 0}, Coeff(1));
        target.add_term(Word{2}, Coeff(-1));
        if (!verify_decomposition(t.cert, target, t.rels))
            throw std::logic_error("gadget certificate failed to verify");
        if (rdecomp_size(t.cert, t.rels) > Rational(1750))
            throw std::logic_error("gadget certificate size exceeds 1750");
        return t;
    }();
    return tpl;
}

int next_gadget_tag(const GenRegistry& reg) {
    int k = 0;
    while (reg.contains("g" + std::to_string(k) + "_f")) ++k;
    return k;
}

}  // namespace

Gadget conjugacy_gadget(int a, int b, int c, GenRegistry& reg) {
    if (a == b || b == c || a == c) throw std::invalid_argument("gadget endpoints must be distinct");
    const GadgetTemplate& tpl = gadget_template();
    int tag = next_gadget_tag(reg);
    std::string prefix = "g" + std::to_string(tag) + "_";

    Gadget g;
    std::map<int, int> gen_map;      // template position -> global gen id
    std::map<int, Word> word_map;    // for polynomial substitution
    gen_map[0] = a;
    gen_map[1] = b;
    gen_map[2] = c;
    for (int i = 3; i < 42; ++i) gen_map[i] = reg.fresh(prefix + tpl.var_names[(size_t)i]);
    for (int i = 0; i < 42; ++i) word_map[i] = Word{gen_map[i]};

    for (int i = 0; i < 42; ++i) {
        g.bcs.vars.push_back({i, reg.name(gen_map[i])});
        g.var_gens.push_back(gen_map[i]);
    }
    g.bcs.constraints = tpl.bcs.constraints;
    g.bcs.validate();

    for (const auto& r : tpl.rels.all()) {
        Relation nr;
        nr.name = prefix + r.name;
        nr.poly = r.poly.substituted(word_map);
        nr.norm = r.norm;
        g.relations.add(std::move(nr));
    }
    g.cert = tpl.cert;
    for (auto& w : g.cert.witnesses) {
        for (auto& l : w.u) l = gen_map[l];
        for (auto& l : w.v) l = gen_map[l];
    }
    g.measured_size = rdecomp_size(g.cert, g.relations);
    return g;
}

GadgetRepReport gadget_representation_check(const MatrixRep& base, int a, int b, int c,
                                            GenRegistry& reg, double tol) {
    for (int gen : {a, b, c})
        if (!base.images.count(gen)) throw std::invalid_argument("base rep must assign a, b, c");
    const Eigen::MatrixXcd &A = base.images.at(a), &B = base.images.at(b), &C = base.images.at(c);
    base.validate(tol);
    if ((A * B * A - C).norm() > tol)
        throw std::invalid_argument("base representation violates a b a = c");

    int d = base.dim;
    auto dsum = [](const Eigen::MatrixXcd& p, const Eigen::MatrixXcd& q) {
        Eigen::MatrixXcd m = Eigen::MatrixXcd::Zero(2 * p.rows(), 2 * p.rows());
        m.topLeftCorner(p.rows(), p.rows()) = p;
        m.bottomRightCorner(q.rows(), q.rows()) = q;
        return m;
    };
    auto asum = [](const Eigen::MatrixXcd& p, const Eigen::MatrixXcd& q) {
        Eigen::MatrixXcd m = Eigen::MatrixXcd::Zero(2 * p.rows(), 2 * p.rows());
        m.topRightCorner(p.rows(), p.rows()) = p;
        m.bottomLeftCorner(q.rows(), q.rows()) = q;
        return m;
    };
    Eigen::MatrixXcd I = Eigen::MatrixXcd::Identity(d, d);
    Eigen::MatrixXcd I2 = Eigen::MatrixXcd::Identity(2 * d, 2 * d);

    // first layer on H (+) H
    std::vector<Eigen::MatrixXcd> phi(14);
    std::array<Eigen::MatrixXcd, 3> X = {A, B, C};
    for (int i = 0; i < 3; ++i) {
        phi[(size_t)i] = dsum(X[(size_t)i], X[(size_t)i]);
        phi[(size_t)(3 + i)] = dsum(X[(size_t)i], I);            // y_i
        phi[(size_t)(6 + i)] = dsum(I, X[(size_t)i]);            // z_i
        phi[(size_t)(9 + i)] = asum(X[(size_t)i], X[(size_t)i]); // w_i
    }
    phi[12] = asum(I, I);            // f
    phi[13] = phi[4] * phi[8];       // g = y2 z3

    // second layer on (H (+) H) (+) (H (+) H)
    std::vector<Eigen::MatrixXcd> theta(42);
    for (int i = 0; i < 14; ++i) theta[(size_t)i] = dsum(phi[(size_t)i], phi[(size_t)i]);
    for (int j = 0; j < 4; ++j) {
        const auto& blk = kGadgetBlocks[(size_t)j];
        const Eigen::MatrixXcd &Aj = phi[(size_t)blk[0]], &Bj = phi[(size_t)blk[1]],
                               &Cj = phi[(size_t)blk[2]];
        int base_pos = 14 + 7 * j;
        theta[(size_t)base_pos + 0] = asum(Aj, Aj);
        theta[(size_t)base_pos + 1] = asum(I2, I2);
        theta[(size_t)base_pos + 2] = asum(Bj, Bj);
        theta[(size_t)base_pos + 3] = asum(Bj * Aj, Aj * Bj);
        theta[(size_t)base_pos + 4] = dsum(Bj * Aj * Bj, Aj);
        theta[(size_t)base_pos + 5] = dsum(Bj * Cj, I2);
        theta[(size_t)base_pos + 6] = dsum(Bj, Cj);
    }

    Gadget g = conjugacy_gadget(a, b, c, reg);
    MatrixRep rep;
    rep.dim = 4 * d;
    for (int i = 0; i < 42; ++i) rep.set(g.var_gens[(size_t)i], theta[(size_t)i]);
    rep.validate(tol);

    GadgetRepReport out;
    out.base_dim = d;
    out.extended_dim = 4 * d;
    for (const auto& r : g.relations.all()) {
        double res = eval_in_rep(r.poly, rep).norm();
        out.residuals.push_back({r.name, res});
        out.max_residual = std::max(out.max_residual, res);
    }
    out.pass = out.max_residual <= tol;
    return out;
}

EmbedResult embed_nested_bcs(const NestedBcs& nb, GenRegistry& reg) {
    RelationSet source = nested_relations(nb, reg);
    FlatSystem fs = flatten(nb, reg);

    int num_flat_bcs_rels = fs.relations.size() - (int)fs.conjugacies.size();
    if (num_flat_bcs_rels != source.size())
        throw std::logic_error("flat/source relation count mismatch");

    // sanity: the flat relation list mirrors the source list through psi
    {
        std::map<int, Word> images;
        for (size_t wi = 0; wi < nb.wvars.size(); ++wi)
            images[fs.wvar_gens[wi]] = psi(nb.wvars[wi]);
        for (int i = 0; i < num_flat_bcs_rels; ++i)
            if (fs.relations[i].poly.substituted(images) != source[i].poly)
                throw std::logic_error("flat relation does not project to the source relation");
    }

    EmbedResult res;

    // target variables: flat variables then gadget fresh variables
    std::vector<int> target_gens = fs.var_gens;
    std::vector<Constraint> target_constraints = fs.bcs.constraints;

    // target relations: flat BCS relations (indices remembered), gadget
    // relations merged with commutator dedup
    RelationSet target;
    std::vector<int> flat_to_target((size_t)num_flat_bcs_rels);
    for (int i = 0; i < num_flat_bcs_rels; ++i) {
        Relation cp = fs.relations[i];
        flat_to_target[(size_t)i] = target.add(std::move(cp));
    }

    std::vector<RDecomp> conj_certs(fs.conjugacies.size());
    for (size_t k = 0; k < fs.conjugacies.size(); ++k) {
        auto [a, b, c] = fs.conjugacies[k];
        Gadget g = conjugacy_gadget(a, b, c, reg);
        res.num_gadgets++;
        std::map<int, int> pos_of_gen;
        for (int i = 0; i < (int)target_gens.size(); ++i) pos_of_gen[target_gens[(size_t)i]] = i;
        std::vector<int> gpos(42);
        for (int i = 0; i < 42; ++i) {
            int gen = g.var_gens[(size_t)i];
            auto it = pos_of_gen.find(gen);
            if (it == pos_of_gen.end()) {
                gpos[(size_t)i] = (int)target_gens.size();
                pos_of_gen[gen] = gpos[(size_t)i];
                target_gens.push_back(gen);
            } else {
                gpos[(size_t)i] = it->second;
            }
        }
        for (const auto& c2 : g.bcs.constraints) {
            std::vector<int> ids;
            for (int p : c2.context) ids.push_back(gpos[(size_t)p]);
            target_constraints.push_back(remap_constraint(c2, ids));
        }
        // merge relations, tracking local -> target indices for the cert;
        // a commutator already present with the opposite orientation flips
        // the witness coefficient
        std::vector<int> rel_map((size_t)g.relations.size(), -1);
        std::vector<bool> rel_flip((size_t)g.relations.size(), false);
        for (int i = 0; i < g.relations.size(); ++i) {
            const Relation& r = g.relations[i];
            if (r.name.find("comm(") != std::string::npos) {
                Word w;
                for (const auto& [word, cf] : r.poly.terms())
                    if (cf == Coeff(1)) w = word;
                int idx = target.add_commutator_once(reg, w[0], w[1]);
                if (target[idx].poly == -r.poly)
                    rel_flip[(size_t)i] = true;
                else if (!(target[idx].poly == r.poly))
                    throw std::logic_error("merged commutator mismatch");
                rel_map[(size_t)i] = idx;
            } else {
                Relation cp = r;
                rel_map[(size_t)i] = target.add(std::move(cp));
            }
        }
        RDecomp cert = g.cert;
        for (auto& w : cert.witnesses) {
            if (rel_flip[(size_t)w.rel]) w.lambda = -w.lambda;
            w.rel = rel_map[(size_t)w.rel];
        }
        conj_certs[k] = std::move(cert);
    }

    res.target.vars.clear();
    for (int i = 0; i < (int)target_gens.size(); ++i)
        res.target.vars.push_back({i, reg.name(target_gens[(size_t)i])});
    res.target.constraints = std::move(target_constraints);
    res.target.validate();
    res.var_gens = target_gens;
    res.target_relations = std::move(target);

    // bound 2^16 M^2 l^2 for unit-size source relations
    long long M = std::max(1, nb.max_context());
    long long l = std::max(1, nb.max_depth());
    res.claimed_bound = Rational(65536) * Rational(M * M) * Rational(l * l);

    // decomposition of psi(p) - p for a word over flattened symbols
    std::map<int, size_t> wvar_of_gen;
    for (size_t wi = 0; wi < nb.wvars.size(); ++wi) wvar_of_gen[fs.wvar_gens[wi]] = wi;
    std::map<int, Word> psi_of_gen;
    for (size_t wi = 0; wi < nb.wvars.size(); ++wi)
        psi_of_gen[fs.wvar_gens[wi]] = psi(nb.wvars[wi]);

    std::function<RDecomp(const Word&)> psi_decomp_word = [&](const Word& p) -> RDecomp {
        if (p.empty()) return RDecomp{};
        int head = p[0];
        Word tail(p.begin() + 1, p.end());
        RDecomp dh;
        Word psi_head{head};
        auto it = wvar_of_gen.find(head);
        if (it != wvar_of_gen.end()) {
            dh = fs.psi_decomps[it->second];
            psi_head = psi_of_gen.at(head);
        }
        if (tail.empty()) return dh;
        RDecomp dt = psi_decomp_word(tail);
        return rdecomp_mul(dh, psi_head, dt, tail, fs.relations);
    };

    std::map<int, size_t> conj_pos;
    for (size_t k = 0; k < fs.conj_rel_index.size(); ++k) conj_pos[fs.conj_rel_index[k]] = k;

    res.all_verified = true;
    for (int t = 0; t < num_flat_bcs_rels; ++t) {
        const Relation& flat_rel = fs.relations[t];
        std::vector<std::pair<Coeff, RDecomp>> parts;
        for (const auto& [word, c] : flat_rel.poly.terms())
            parts.push_back({c, psi_decomp_word(word)});
        RDecomp shift = rdecomp_add(parts, fs.relations);   // psi(r) - r

        // substitute conjugacy witnesses by gadget certificates
        RDecomp flat_decomp;
        flat_decomp.witnesses.push_back({Coeff(1), Word{}, t, false, Word{}});
        for (auto& w : shift.witnesses) flat_decomp.witnesses.push_back(std::move(w));
        RDecomp final;
        for (const auto& w : flat_decomp.witnesses) {
            auto cit = conj_pos.find(w.rel);
            if (cit == conj_pos.end()) {
                Witness nw = w;
                nw.rel = flat_to_target[(size_t)w.rel];
                final.witnesses.push_back(std::move(nw));
            } else {
                for (const auto& iw : conj_certs[cit->second].witnesses) {
                    Witness nw;
                    nw.lambda = w.lambda * iw.lambda;
                    nw.u = concat(w.u, iw.u);
                    nw.rel = iw.rel;
                    nw.star = iw.star;
                    nw.v = concat(iw.v, w.v);
                    final.witnesses.push_back(std::move(nw));
                }
            }
        }

        CertEntry entry;
        entry.relation = source[t].name;
        entry.claimed = res.claimed_bound;
        entry.measured = rdecomp_size(final, res.target_relations);
        entry.witnesses = final.witnesses.size();
        entry.verified = verify_decomposition(final, source[t].poly, res.target_relations) &&
                         entry.measured <= entry.claimed;
        if (!entry.verified) res.all_verified = false;
        res.certificate.push_back(std::move(entry));
        res.decomps.push_back(std::move(final));
    }
    res.source_relations = std::move(source);
    return res;
}

namespace {

nlohmann::json poly_to_json(const StarPoly& p) {
    nlohmann::json terms = nlohmann::json::array();
    for (const auto& [w, c] : p.terms())
        terms.push_back({w, c.re.str(), c.im.str()});
    return terms;
}

StarPoly poly_from_json(const nlohmann::json& j) {
    StarPoly p;
    for (const auto& t : j) {
        Word w = t.at(0).get<Word>();
        Coeff c(Rational::from_string(t.at(1).get<std::string>()),
                Rational::from_string(t.at(2).get<std::string>()));
        p.add_term(w, c);
    }
    return p;
}

CertBundle::Item item_from(const std::string& name, const Rational& claimed,
                           const StarPoly& target, const RDecomp& d, const RelationSet& rels) {
    CertBundle::Item item;
    item.name = name;
    item.claimed = claimed;
    item.target = target;
    item.decomp = d;
    item.measured = rdecomp_size(d, rels);
    item.verified = verify_decomposition(d, target, rels) && item.measured <= claimed;
    return item;
}

}  // namespace

CertBundle bundle_from_embed(const EmbedResult& res, const GenRegistry& reg) {
    CertBundle cb;
    cb.reg = reg;
    cb.relations = res.target_relations;
    for (size_t i = 0; i < res.decomps.size(); ++i)
        cb.items.push_back(item_from(res.source_relations[(int)i].name, res.claimed_bound,
                                     res.source_relations[(int)i].poly, res.decomps[i],
                                     cb.relations));
    return cb;
}

CertBundle bundle_from_gadget(const Gadget& g, int a, int b, int c, const GenRegistry& reg) {
    CertBundle cb;
    cb.reg = reg;
    cb.relations = g.relations;
    StarPoly target;
    target.add_term(Word{a, b, a}, Coeff(1));
    target.add_term(Word{c}, Coeff(-1));
    cb.items.push_back(item_from("conjugacy(" + reg.name(a) + "," + reg.name(b) + "," +
                                     reg.name(c) + ")",
                                 Rational(1750), target, g.cert, cb.relations));
    return cb;
}

std::string bundle_to_json(const CertBundle& cb) {
    nlohmann::json j;
    nlohmann::json gens = nlohmann::json::array();
    for (int i = 0; i < cb.reg.size(); ++i) gens.push_back(cb.reg.name(i));
    j["generators"] = gens;
    j["relations"] = nlohmann::json::array();
    for (const auto& r : cb.relations.all())
        j["relations"].push_back(
            {{"name", r.name}, {"norm", r.norm.str()}, {"poly", poly_to_json(r.poly)}});
    j["entries"] = nlohmann::json::array();
    for (const auto& it : cb.items) {
        nlohmann::json wits = nlohmann::json::array();
        for (const auto& w : it.decomp.witnesses)
            wits.push_back({w.lambda.re.str(), w.lambda.im.str(), w.u, w.rel, w.star, w.v});
        j["entries"].push_back({{"relation", it.name},
                                {"claimed", it.claimed.str()},
                                {"measured", it.measured.str()},
                                {"verified", it.verified},
                                {"target", poly_to_json(it.target)},
                                {"witnesses", wits}});
    }
    return j.dump(1);
}

CertBundle bundle_from_json(const std::string& text) {
    nlohmann::json j = nlohmann::json::parse(text);
    CertBundle cb;
    for (const auto& n : j.at("generators")) cb.reg.intern(n.get<std::string>());
    for (const auto& rj : j.at("relations")) {
        Relation r;
        r.name = rj.at("name").get<std::string>();
        r.norm = Rational::from_string(rj.at("norm").get<std::string>());
        r.poly = poly_from_json(rj.at("poly"));
        cb.relations.add(std::move(r));
    }
    for (const auto& ej : j.at("entries")) {
        CertBundle::Item it;
        it.name = ej.at("relation").get<std::string>();
        it.claimed = Rational::from_string(ej.at("claimed").get<std::string>());
        it.measured = Rational::from_string(ej.at("measured").get<std::string>());
        it.verified = ej.at("verified").get<bool>();
        it.target = poly_from_json(ej.at("target"));
        for (const auto& wj : ej.at("witnesses")) {
            Witness w;
            w.lambda = Coeff(Rational::from_string(wj.at(0).get<std::string>()),
                             Rational::from_string(wj.at(1).get<std::string>()));
            w.u = wj.at(2).get<Word>();
            w.rel = wj.at(3).get<int>();
            w.star = wj.at(4).get<bool>();
            w.v = wj.at(5).get<Word>();
            it.decomp.witnesses.push_back(std::move(w));
        }
        cb.items.push_back(std::move(it));
    }
    return cb;
}

bool recheck_bundle(CertBundle& cb, std::string* first_failure) {
    bool ok = true;
    for (auto& it : cb.items) {
        Rational measured = rdecomp_size(it.decomp, cb.relations);
        bool pass = verify_decomposition(it.decomp, it.target, cb.relations) &&
                    measured == it.measured && measured <= it.claimed;
        it.verified = pass;
        if (!pass && ok) {
            ok = false;
            if (first_failure) *first_failure = it.name;
        }
    }
    return ok;
}

std::string EmbedResult::certificate_json() const {
    nlohmann::json j;
    j["claimed_bound"] = claimed_bound.str();
    j["all_verified"] = all_verified;
    j["gadgets"] = num_gadgets;
    j["variables"] = target.vars.size();
    j["constraints"] = target.constraints.size();
    j["entries"] = nlohmann::json::array();
    for (const auto& e : certificate) {
        nlohmann::json je;
        je["relation"] = e.relation;
        je["claimed"] = e.claimed.str();
        je["measured"] = e.measured.str();
        je["verified"] = e.verified;
        je["witnesses"] = e.witnesses;
        j["entries"].push_back(je);
    }
    return j.dump(2);
}

std::string EmbedResult::certificate_text() const {
    std::ostringstream os;
    os << "embedding certificate: " << certificate.size() << " relations, " << num_gadgets
       << " gadgets, bound " << claimed_bound << "\n";
    for (const auto& e : certificate)
        os << "  " << e.relation << ": measured " << e.measured << " <= " << e.claimed << " : "
           << (e.verified ? "ok" : "FAIL") << "\n";
    os << (all_verified ? "all verified" : "VERIFICATION FAILED") << "\n";
    return os.str();
}

Bcs lcs_to_bcs(const std::vector<std::vector<int>>& A, const std::vector<int>& b) {
    if (A.size() != b.size()) throw std::invalid_argument("row count mismatch");
    size_t n = A.empty() ? 0 : A[0].size();
    Bcs out;
    for (size_t i = 0; i < n; ++i) out.vars.push_back({(int)i, "x" + std::to_string(i)});
    for (size_t i = 0; i < A.size(); ++i) {
        if (A[i].size() != n) throw std::invalid_argument("ragged matrix");
        std::vector<int> ctx;
        for (size_t j = 0; j < n; ++j)
            if (A[i][j] % 2 != 0) ctx.push_back((int)j);
        if (ctx.empty()) throw std::invalid_argument("zero row in linear system");
        out.constraints.push_back(parity_constraint(ctx, b[i] % 2 == 0 ? +1 : -1));
    }
    out.validate();
    return out;
}

SolutionGroup solution_group(const std::vector<std::vector<int>>& A, const std::vector<int>& b) {
    SolutionGroup g;
    g.num_vars = A.empty() ? 0 : (int)A[0].size();
    g.j_gen = g.num_vars;
    int J = g.j_gen;
    g.g0.push_back({J, J});
    for (int i = 0; i < g.num_vars; ++i) g.g0.push_back({i, i});
    for (int i = 0; i < g.num_vars; ++i) g.g1.push_back({i, J, i, J});
    for (size_t r = 0; r < A.size(); ++r) {
        std::vector<int> rel;
        for (int t = 0; t < b[r] % 2; ++t) rel.push_back(J);
        for (int j = 0; j < g.num_vars; ++j)
            if (A[r][(size_t)j] % 2 != 0) rel.push_back(j);
        g.g2.push_back(rel);
        std::vector<int> support;
        for (int j = 0; j < g.num_vars; ++j)
            if (A[r][(size_t)j] % 2 != 0) support.push_back(j);
        for (size_t x = 0; x < support.size(); ++x)
            for (size_t y = x + 1; y < support.size(); ++y)
                g.g3.push_back({support[x], support[y], support[x], support[y]});
    }
    return g;
}

NestedBcs parse_nested_bcs(const std::string& text, GenRegistry& reg) {
    std::vector<std::string> base_names;
    std::vector<std::pair<std::string, std::vector<std::string>>> nested;
    std::ostringstream core;
    std::istringstream is(text);
    std::string line;
    int lineno = 0;
    while (std::getline(is, line)) {
        ++lineno;
        std::istringstream ls(line);
        std::string head;
        if (!(ls >> head) || head[0] == '#') continue;
        if (head == "var") {
            std::string n;
            while (ls >> n) {
                if (n[0] == '#') break;
                base_names.push_back(n);
            }
        } else if (head == "nested") {
            std::string w, name, eq;
            ls >> w >> name >> eq;
            if (w != "w" || eq != "=") throw ParseError(lineno, "expected nested w <name> = ...");
            std::vector<std::string> idx;
            std::string n;
            while (ls >> n) {
                if (n[0] == '#') break;
                idx.push_back(n);
            }
            if (idx.empty()) throw ParseError(lineno, "nested variable needs indices");
            nested.push_back({name, idx});
        } else if (head == "weight") {
            throw ParseError(lineno, "weights are not part of nested systems");
        } else {
            core << line << '\n';
        }
    }
    std::ostringstream full;
    full << "var";
    for (const auto& n : base_names) full << ' ' << n;
    for (const auto& [n, idx] : nested) full << ' ' << n;
    full << '\n' << core.str();
    Bcs parsed = parse_bcs(full.str());

    NestedBcs nb;
    for (const auto& n : base_names) nb.base_gens.push_back(reg.intern(n));
    for (size_t i = 0; i < base_names.size(); ++i)
        nb.add_wvar(NestedVar{{nb.base_gens[i]}});
    for (const auto& [name, idx] : nested) {
        NestedVar v;
        for (const auto& n : idx) {
            auto it = std::find(base_names.begin(), base_names.end(), n);
            if (it == base_names.end()) throw ParseError(0, "nested index " + n + " not a base variable");
            v.idx.push_back(nb.base_gens[(size_t)(it - base_names.begin())]);
        }
        nb.add_wvar(v);
    }
    // temp var order equals wvar order, so contexts carry over unchanged
    nb.constraints = parsed.constraints;
    nb.validate(reg);
    return nb;
}

std::string render_nested_bcs(const NestedBcs& nb, const GenRegistry& reg) {
    std::ostringstream os;
    os << "var";
    for (int g : nb.base_gens) os << ' ' << reg.name(g);
    os << '\n';
    std::vector<std::string> names;
    for (const auto& w : nb.wvars) {
        if (w.depth() == 0) {
            names.push_back(reg.name(w.idx[0]));
            continue;
        }
        std::string n = "n" + std::to_string(names.size());
        names.push_back(n);
        os << "nested w " << n << " =";
        for (int g : w.idx) os << ' ' << reg.name(g);
        os << '\n';
    }
    for (const auto& c : nb.constraints) {
        os << "constraint table";
        for (int wv : c.context) os << ' ' << names[(size_t)wv];
        os << " :";
        for (uint32_t a = 0; a < (uint32_t(1) << c.context.size()); ++a) {
            if (!c.satisfying.test(a)) continue;
            os << ' ';
            for (size_t j = 0; j < c.context.size(); ++j) os << (((a >> j) & 1) ? '-' : '+');
        }
        os << '\n';
    }
    return os.str();
}

void intern_lfamily_generators(GenRegistry& reg) {
    for (const char* n : {"J", "X", "Z", "S1", "S2", "T1", "T2", "W1", "W2", "U1", "U2", "Xtil",
                          "Ztil", "OP", "OQ", "xD"})
        reg.intern(n);
}

NestedBcs lfamily_skeleton(int m, const Bcs& group_part, GenRegistry& reg,
                           const LFamilyOptions& opt) {
    if (m < 1) throw std::invalid_argument("m must be >= 1");
    intern_lfamily_generators(reg);
    NestedBcs nb;
    auto gid = [&](const char* n) { return reg.id(n); };
    for (const char* n : {"J", "X", "Z", "S1", "S2", "T1", "T2", "W1", "W2", "U1", "U2", "Xtil",
                          "Ztil", "OP", "OQ", "xD"})
        nb.base_gens.push_back(gid(n));
    for (const auto& v : group_part.vars) {
        int g = reg.intern(v.name);
        if (std::find(nb.base_gens.begin(), nb.base_gens.end(), g) == nb.base_gens.end())
            nb.base_gens.push_back(g);
    }

    auto depth0 = [&](int gen) { return nb.add_wvar(NestedVar{{gen}}); };
    auto conj2 = [&](const char* center, const char* i1, const char* i2) {
        return nb.add_wvar(NestedVar{{gid(center), gid(i1), gid(i2)}});
    };
    auto conj1 = [&](const char* center, const char* i1) {
        return nb.add_wvar(NestedVar{{gid(center), gid(i1)}});
    };

    // group-part constraints ride along on depth-0 variables
    for (const auto& c : group_part.constraints) {
        std::vector<int> ids;
        for (int v : c.context) ids.push_back(depth0(reg.id(group_part.vars[(size_t)v].name)));
        nb.constraints.push_back(remap_constraint(c, ids));
    }

    // the displayed nested-variable pool
    conj2("X", "U2", "U1");
    conj2("Z", "U2", "U1");
    conj2("U1", "S2", "S1");
    conj2("U2", "S2", "S1");
    conj2("U1", "T2", "T1");
    conj2("U2", "T2", "T1");
    conj2("J", "U2", "U1");
    conj2("OQ", "S2", "S1");
    conj2("OQ", "T2", "T1");
    // X_m0 and Z_m0: conjugate by W^m
    NestedVar xm0{{gid("X")}}, zm0{{gid("Z")}};
    for (int t = 0; t < m; ++t) {
        for (auto* v : {&xm0, &zm0}) {
            v->idx.push_back(gid("W2"));
            v->idx.push_back(gid("W1"));
        }
    }
    int w_xm0 = nb.add_wvar(xm0);
    int w_zm0 = nb.add_wvar(zm0);
    conj2("Xtil", "U2", "U1");
    conj2("Xtil", "S2", "S1");
    conj2("Ztil", "U2", "U1");
    conj2("Ztil", "S2", "S1");
    conj1("OP", "Xtil");
    conj2("OP", "U2", "U1");
    conj1("Ztil", "Xtil");

    auto eq2 = [&](int wa, int wb) {
        nb.constraints.push_back(
            nested_constraint({wa, wb}, [](const std::vector<int>& v) { return v[0] == v[1]; }));
    };
    auto triv2 = [&](int wa, int wb) {
        nb.constraints.push_back(
            nested_constraint({wa, wb}, [](const std::vector<int>&) { return true; }));
    };

    // C1-C12: commutation constraints
    eq2(conj2("X", "U2", "U1"), depth0(gid("X")));
    eq2(conj2("Z", "U2", "U1"), depth0(gid("Z")));
    eq2(conj2("U1", "S2", "S1"), depth0(gid("U1")));
    eq2(conj2("U2", "S2", "S1"), depth0(gid("U2")));
    eq2(conj2("U1", "T2", "T1"), depth0(gid("U1")));
    eq2(conj2("U2", "T2", "T1"), depth0(gid("U2")));
    eq2(conj2("J", "U2", "U1"), depth0(gid("J")));
    triv2(depth0(gid("OQ")), depth0(gid("X")));
    triv2(depth0(gid("OQ")), depth0(gid("Z")));
    eq2(conj2("OQ", "S2", "S1"), depth0(gid("OQ")));
    eq2(conj2("OQ", "T2", "T1"), depth0(gid("OQ")));
    triv2(depth0(gid("OQ")), depth0(gid("J")));

    // C13, C14: equality under Q
    auto and_eq_under = [&](int wa, int wb, int wq) {
        nb.constraints.push_back(nested_constraint({wa, wb, wq}, [](const std::vector<int>& v) {
            bool lhs = v[0] == -1 && v[2] == -1;
            bool rhs = v[1] == -1 && v[2] == -1;
            return lhs == rhs;
        }));
    };
    and_eq_under(w_xm0, depth0(gid("Xtil")), depth0(gid("OQ")));
    and_eq_under(w_zm0, depth0(gid("Ztil")), depth0(gid("OQ")));

    // C15, C16: conjugate-equality constraints
    eq2(conj2("Xtil", "U2", "U1"), conj2("Xtil", "S2", "S1"));
    if (opt.fix_c16)
        eq2(conj2("Ztil", "U2", "U1"), conj2("Ztil", "T2", "T1"));
    else
        eq2(conj2("Ztil", "U2", "U1"), conj2("Xtil", "T2", "T1"));  // transcribed verbatim

    // C17: O_D = O_P and O_Q
    nb.constraints.push_back(nested_constraint(
        {depth0(gid("xD")), depth0(gid("OP")), depth0(gid("OQ"))}, [](const std::vector<int>& v) {
            return (v[0] == -1) == (v[1] == -1 && v[2] == -1);
        }));

    // C18: context (O_P, Xtil O_P Xtil, U O_P U*, J, Xtil Ztil Xtil, Ztil),
    // unsatisfying assignments A123 x A456
    static const int A123[5][3] = {{-1, 1, 1}, {1, -1, 1}, {1, 1, -1}, {-1, -1, 1}, {-1, -1, -1}};
    static const int A456[4][3] = {{1, 1, 1}, {1, -1, -1}, {-1, 1, -1}, {-1, -1, 1}};
    nb.constraints.push_back(nested_constraint(
        {depth0(gid("OP")), conj1("OP", "Xtil"), conj2("OP", "U2", "U1"), depth0(gid("J")),
         conj1("Ztil", "Xtil"), depth0(gid("Ztil"))},
        [](const std::vector<int>& v) {
            bool in123 = false, in456 = false;
            for (const auto& t : A123)
                if (v[0] == t[0] && v[1] == t[1] && v[2] == t[2]) in123 = true;
            for (const auto& t : A456)
                if (v[3] == t[0] && v[4] == t[1] && v[5] == t[2]) in456 = true;
            return !(in123 && in456);
        }));

    nb.validate(reg);
    return nb;
}

}  // namespace bcsg
