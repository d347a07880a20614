#include "bcsg/npa.hpp"

#include <algorithm>
#include <sstream>

namespace bcsg {
namespace npa {

bool operator<(const PWord& x, const PWord& y) {
    if (x.zero != y.zero) return y.zero;  // zero word sorts last
    if (x.length() != y.length()) return x.length() < y.length();
    if (x.alice != y.alice) return x.alice < y.alice;
    return x.bob < y.bob;
}

PWord pword_zero() {
    PWord w;
    w.zero = true;
    return w;
}

PWord pword_append(const PWord& w, bool alice_side, const PSym& s) {
    if (w.zero) return w;
    PWord out = w;
    auto& part = alice_side ? out.alice : out.bob;
    if (!part.empty() && part.back().q == s.q) {
        if (part.back().a == s.a) return out;  // idempotent
        return pword_zero();                   // orthogonal outcomes
    }
    part.push_back(s);
    return out;
}

PWord pword_mul(const PWord& x, const PWord& y) {
    if (x.zero || y.zero) return pword_zero();
    PWord out = x;
    for (const auto& s : y.alice) {
        out = pword_append(out, true, s);
        if (out.zero) return out;
    }
    for (const auto& s : y.bob) {
        out = pword_append(out, false, s);
        if (out.zero) return out;
    }
    return out;
}

PWord pword_star(const PWord& w) {
    PWord out = w;
    std::reverse(out.alice.begin(), out.alice.end());
    std::reverse(out.bob.begin(), out.bob.end());
    return out;
}

PWord pword_canonical(const PWord& w) {
    if (w.zero) return w;
    PWord s = pword_star(w);
    return s < w ? s : w;
}

std::string pword_str(const PWord& w) {
    if (w.zero) return "0";
    if (w.length() == 0) return "1";
    std::ostringstream os;
    for (const auto& s : w.alice) os << "A" << s.q << "_" << s.a << ".";
    for (const auto& s : w.bob) os << "B" << s.q << "_" << s.a << ".";
    std::string t = os.str();
    t.pop_back();
    return t;
}

std::vector<PSym> alice_symbols(const Game& g) {
    std::vector<PSym> out;
    for (int q = 0; q < (int)g.alice_answers.size(); ++q)
        for (int a = 0; a + 1 < g.alice_answers[(size_t)q]; ++a) out.push_back({q, a});
    return out;
}

std::vector<PSym> bob_symbols(const Game& g) {
    std::vector<PSym> out;
    for (int q = 0; q < (int)g.bob_answers.size(); ++q)
        for (int a = 0; a + 1 < g.bob_answers[(size_t)q]; ++a) out.push_back({q, a});
    return out;
}

std::vector<PWord> build_basis(const Game& g, int level, size_t cap) {
    if (level < 1) throw std::invalid_argument("level must be >= 1");
    auto as = alice_symbols(g);
    auto bs = bob_symbols(g);
    std::vector<PWord> frontier = {PWord{}};
    std::vector<PWord> basis = {PWord{}};
    for (int len = 1; len <= level; ++len) {
        std::vector<PWord> next;
        for (const auto& w : frontier) {
            // extend on the Alice side only while the Bob side is empty,
            // so each canonical word is generated once
            if (w.bob.empty())
                for (const auto& s : as) {
                    PWord e = pword_append(w, true, s);
                    if (!e.zero && e.length() == (size_t)len) next.push_back(e);
                }
            for (const auto& s : bs) {
                PWord e = pword_append(w, false, s);
                if (!e.zero && e.length() == (size_t)len) next.push_back(e);
            }
        }
        std::sort(next.begin(), next.end());
        next.erase(std::unique(next.begin(), next.end()), next.end());
        basis.insert(basis.end(), next.begin(), next.end());
        if (basis.size() > cap)
            throw std::runtime_error("basis size " + std::to_string(basis.size()) +
                                     " exceeds cap " + std::to_string(cap));
        frontier = std::move(next);
    }
    std::sort(basis.begin(), basis.end());
    return basis;
}

namespace {

void accumulate(MomentExpr& e, const PWord& w, const Rational& c) {
    if (w.zero || c.is_zero()) return;
    if (w.length() == 0) {
        e.constant += c;
        return;
    }
    PWord cw = pword_canonical(w);
    auto it = e.coeffs.find(cw);
    if (it == e.coeffs.end())
        e.coeffs.emplace(cw, c);
    else {
        it->second += c;
        if (it->second.is_zero()) e.coeffs.erase(it);
    }
}

// E^x_a with the last outcome rewritten via completeness; a list of
// (word, coeff) pairs over retained symbols.
std::vector<std::pair<PWord, Rational>> projector_terms(const Game& g, bool alice_side, int q,
                                                        int a) {
    int answers = alice_side ? g.alice_answers[(size_t)q] : g.bob_answers[(size_t)q];
    std::vector<std::pair<PWord, Rational>> out;
    if (a + 1 < answers) {
        out.push_back({pword_append(PWord{}, alice_side, {q, a}), Rational(1)});
    } else {
        out.push_back({PWord{}, Rational(1)});
        for (int o = 0; o + 1 < answers; ++o)
            out.push_back({pword_append(PWord{}, alice_side, {q, o}), Rational(-1)});
    }
    return out;
}

}  // namespace

MomentExpr projector_pair_expr(const Game& g, int x, int y, int a, int b) {
    MomentExpr e;
    for (const auto& [wa, ca] : projector_terms(g, true, x, a))
        for (const auto& [wb, cb] : projector_terms(g, false, y, b))
            accumulate(e, pword_mul(wa, wb), ca * cb);
    return e;
}

MomentExpr game_objective(const Game& g) {
    MomentExpr obj;
    for (const auto& [q, p] : g.pi) {
        auto [x, y] = q;
        for (int a = 0; a < g.alice_answers[(size_t)x]; ++a)
            for (int b = 0; b < g.bob_answers[(size_t)y]; ++b) {
                if (!g.win(x, y, a, b)) continue;
                MomentExpr e = projector_pair_expr(g, x, y, a, b);
                obj.constant += p * e.constant;
                for (const auto& [w, c] : e.coeffs) accumulate(obj, w, p * c);
            }
    }
    return obj;
}

MomentRelaxation build_relaxation(const Game& g, int level, size_t cap) {
    g.validate();
    MomentRelaxation r;
    r.level = level;
    r.basis = build_basis(g, level, cap);
    int n = r.n();
    r.entry_var.assign((size_t)n * (size_t)n, -1);
    for (int i = 0; i < n; ++i)
        for (int j = i; j < n; ++j) {
            PWord w = pword_mul(pword_star(r.basis[(size_t)i]), r.basis[(size_t)j]);
            int id;
            if (w.zero) {
                id = -1;
            } else if (w.length() == 0) {
                id = 0;
            } else {
                PWord cw = pword_canonical(w);
                auto it = r.var_index.find(cw);
                if (it == r.var_index.end()) {
                    id = (int)r.var_words.size() + 1;
                    r.var_index.emplace(cw, id);
                    r.var_words.push_back(cw);
                } else {
                    id = it->second;
                }
            }
            r.entry_var[(size_t)i * (size_t)n + (size_t)j] = id;
        }

    r.objective = game_objective(g);
    for (const auto& [w, c] : r.objective.coeffs)
        if (!r.var_index.count(w))
            throw std::logic_error("objective word missing from moment matrix");
    return r;
}

SdpProblem MomentRelaxation::to_sdp() const {
    SdpProblem p;
    int nn = n();
    p.n = nn;
    p.b.assign((size_t)num_vars(), 0.0);
    for (const auto& [w, c] : objective.coeffs) p.b[(size_t)var_index.at(w) - 1] = c.to_double();
    p.fs.assign((size_t)num_vars(), {});
    for (int i = 0; i < nn; ++i)
        for (int j = i; j < nn; ++j) {
            int id = entry_var[(size_t)i * (size_t)nn + (size_t)j];
            if (id < 0) continue;
            if (id == 0)
                p.f0.push_back({i, j, 1.0});
            else
                p.fs[(size_t)id - 1].push_back({i, j, 1.0});
        }
    return p;
}

NpaResult npa_solve(const Game& g, int level, double tol, size_t cap) {
    MomentRelaxation r = build_relaxation(g, level, cap);
    if (r.num_vars() > 20000)
        throw std::runtime_error("moment relaxation has " + std::to_string(r.num_vars()) +
                                 " variables, beyond the dense solver; use the SDPA export");
    SdpProblem p = r.to_sdp();
    NpaResult out;
    out.sdp = solve_sdp(p, tol);
    if (out.sdp.status == SdpStatus::NumericalFailure)
        throw std::runtime_error("SDP solver failed on the moment relaxation");
    double c = r.objective.constant.to_double();
    out.value = c + out.sdp.primal_value;
    out.upper = c + out.sdp.dual_value;
    return out;
}

double npa_value(const Game& g, int level, double tol) {
    return npa_solve(g, level, tol).value;
}

Threshold decide_threshold(const Game& g, int level, const Rational& theta, double tol) {
    double v = npa_value(g, level, tol);
    double t = theta.to_double();
    if (v + tol < t) return Threshold::Below;
    if (v - tol > t) return Threshold::Above;
    return Threshold::Inconclusive;
}

GameValueReport make_value_report(const Game& g, const std::vector<int>& levels,
                                  const std::vector<std::pair<std::string, Strategy>>& strategies,
                                  double tol) {
    GameValueReport rep;
    rep.classical = classical_value(g);
    for (int k : levels) {
        NpaResult res = npa_solve(g, k, tol);
        if (res.sdp.status != SdpStatus::Converged)
            throw std::runtime_error("solver did not converge at level " + std::to_string(k));
        if (rep.classical.to_double() > res.value + 10 * tol)
            throw std::runtime_error("relaxation bound fell below the classical value");
        rep.npa_levels[k] = res.value;
    }
    for (const auto& [label, s] : strategies)
        rep.strategy_values.push_back({label, strategy_value(g, s)});
    return rep;
}

bool certify_value_at_most_one(const Game& g, int level) {
    if (level < 2) return false;
    // completeness telescope: summing every answer pair of every asked
    // question pair must give exactly the unit moment
    MomentExpr total;
    for (const auto& [q, p] : g.pi) {
        auto [x, y] = q;
        for (int a = 0; a < g.alice_answers[(size_t)x]; ++a)
            for (int b = 0; b < g.bob_answers[(size_t)y]; ++b) {
                MomentExpr e = projector_pair_expr(g, x, y, a, b);
                total.constant += p * e.constant;
                for (const auto& [w, c] : e.coeffs) accumulate(total, w, p * c);
            }
    }
    if (!(total.constant == Rational(1) && total.coeffs.empty())) return false;
    // each pair moment expands over words of length <= 2, hence lives inside
    // the level-2 matrix, and equals a diagonal entry of the un-eliminated
    // moment matrix (E F is idempotent up to cross-party commutation)
    for (const auto& [q, p] : g.pi) {
        (void)p;
        auto [x, y] = q;
        PWord ef;
        if (g.alice_answers[(size_t)q.first] > 1) ef = pword_append(ef, true, {x, 0});
        if (g.bob_answers[(size_t)q.second] > 1) ef = pword_append(ef, false, {y, 0});
        if (pword_canonical(pword_mul(pword_star(ef), ef)) != pword_canonical(ef)) return false;
    }
    return true;
}

double objective_at_strategy(const Game& g, const MomentExpr& objective, const Strategy& s) {
    s.validate(g);
    auto lift = [&](const PWord& w) {
        int dA = s.tensor ? s.dimA : s.dimA;
        int dB = s.tensor ? s.dimB : s.dimA;
        Eigen::MatrixXcd opA = Eigen::MatrixXcd::Identity(dA, dA);
        Eigen::MatrixXcd opB = Eigen::MatrixXcd::Identity(dB, dB);
        for (const auto& sym : w.alice) opA = opA * s.alice[(size_t)sym.q][(size_t)sym.a];
        for (const auto& sym : w.bob) opB = opB * s.bob[(size_t)sym.q][(size_t)sym.a];
        if (!s.tensor) return (opA * opB).eval();
        Eigen::MatrixXcd out(dA * dB, dA * dB);
        for (int i = 0; i < dA; ++i)
            for (int j = 0; j < dA; ++j)
                out.block(i * dB, j * dB, dB, dB) = opA(i, j) * opB;
        return out;
    };
    double v = objective.constant.to_double();
    for (const auto& [w, c] : objective.coeffs) {
        std::complex<double> amp = s.state.adjoint() * lift(w) * s.state;
        v += c.to_double() * amp.real();
    }
    return v;
}

}  // namespace npa
}  // namespace bcsg
