#include "bcsg/game.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace bcsg {

namespace {

Eigen::MatrixXcd kron(const Eigen::MatrixXcd& a, const Eigen::MatrixXcd& b) {
    Eigen::MatrixXcd out(a.rows() * b.rows(), a.cols() * b.cols());
    for (int i = 0; i < a.rows(); ++i)
        for (int j = 0; j < a.cols(); ++j)
            out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
    return out;
}

}  // namespace

void Game::set_win(int x, int y, int a, int b) { wins_.insert(key(x, y, a, b)); }

void Game::validate() const {
    if (alice_labels.size() != alice_answers.size() || bob_labels.size() != bob_answers.size())
        throw std::invalid_argument("label/answer size mismatch");
    Rational total;
    for (const auto& [q, p] : pi) {
        auto [x, y] = q;
        if (x < 0 || x >= (int)alice_labels.size() || y < 0 || y >= (int)bob_labels.size())
            throw std::invalid_argument("pi index out of range");
        if (p.is_negative()) throw std::invalid_argument("negative pi entry");
        total += p;
    }
    if (total != Rational(1)) throw std::invalid_argument("pi must sum to 1");
    for (int m : alice_answers)
        if (m <= 0) throw std::invalid_argument("empty answer set");
    for (int m : bob_answers)
        if (m <= 0) throw std::invalid_argument("empty answer set");
}

int Game::alice_index(const std::string& label) const {
    for (int i = 0; i < (int)alice_labels.size(); ++i)
        if (alice_labels[i] == label) return i;
    return -1;
}

int Game::bob_index(const std::string& label) const {
    for (int i = 0; i < (int)bob_labels.size(); ++i)
        if (bob_labels[i] == label) return i;
    return -1;
}

Game bcs_to_game(const Bcs& b) {
    b.validate();
    Game g;
    std::vector<int> bobq_of_var((size_t)b.vars.size(), -1);
    for (const auto& c : b.constraints)
        for (int v : c.context)
            if (bobq_of_var[(size_t)v] < 0) {
                bobq_of_var[(size_t)v] = (int)g.bob_labels.size();
                g.bob_labels.push_back(b.vars[(size_t)v].name);
                g.bob_answers.push_back(2);
            }
    for (int i = 0; i < (int)b.constraints.size(); ++i) {
        const auto& c = b.constraints[(size_t)i];
        g.alice_labels.push_back("c" + std::to_string(i));
        g.alice_answers.push_back(1 << c.context.size());
        Rational share = b.weight(i) / Rational((long long)c.context.size());
        for (size_t j = 0; j < c.context.size(); ++j) {
            int y = bobq_of_var[(size_t)c.context[j]];
            g.pi[{i, y}] += share;
            for (uint32_t phi = 0; phi < (uint32_t(1) << c.context.size()); ++phi) {
                if (!c.satisfying.test(phi)) continue;
                int gamma = (phi >> j) & 1;  // 1 means Alice assigned -1 to this variable
                g.set_win(i, y, (int)phi, gamma);
            }
        }
    }
    g.validate();
    return g;
}

Game always_win() {
    Game g;
    g.alice_labels = {"w"};
    g.alice_answers = {1};
    g.bob_labels = {"w"};
    g.bob_answers = {1};
    g.pi[{0, 0}] = Rational(1);
    g.set_win(0, 0, 0, 0);
    return g;
}

Game always_lose() {
    Game g;
    g.alice_labels = {"l"};
    g.alice_answers = {1};
    g.bob_labels = {"l"};
    g.bob_answers = {1};
    g.pi[{0, 0}] = Rational(1);
    return g;
}

Game mix_games(const Rational& p, const Game& g1, const Game& g2, BobMode mode) {
    if (p.is_negative() || p > Rational(1)) throw std::invalid_argument("p outside [0,1]");
    Game g;
    for (size_t i = 0; i < g1.alice_labels.size(); ++i) {
        g.alice_labels.push_back("1:" + g1.alice_labels[i]);
        g.alice_answers.push_back(g1.alice_answers[i]);
    }
    int a_off = (int)g.alice_labels.size();
    for (size_t i = 0; i < g2.alice_labels.size(); ++i) {
        g.alice_labels.push_back("2:" + g2.alice_labels[i]);
        g.alice_answers.push_back(g2.alice_answers[i]);
    }

    std::vector<int> bob2_map(g2.bob_labels.size());
    if (mode == BobMode::SharedByLabel) {
        g.bob_labels = g1.bob_labels;
        g.bob_answers = g1.bob_answers;
        for (size_t j = 0; j < g2.bob_labels.size(); ++j) {
            int idx = -1;
            for (size_t k = 0; k < g.bob_labels.size(); ++k)
                if (g.bob_labels[k] == g2.bob_labels[j]) idx = (int)k;
            if (idx >= 0) {
                if (g.bob_answers[(size_t)idx] != g2.bob_answers[j])
                    throw std::invalid_argument("shared Bob question with incompatible answers: " +
                                                g2.bob_labels[j]);
                bob2_map[j] = idx;
            } else {
                bob2_map[j] = (int)g.bob_labels.size();
                g.bob_labels.push_back(g2.bob_labels[j]);
                g.bob_answers.push_back(g2.bob_answers[j]);
            }
        }
    } else {
        for (size_t j = 0; j < g1.bob_labels.size(); ++j) {
            g.bob_labels.push_back("1:" + g1.bob_labels[j]);
            g.bob_answers.push_back(g1.bob_answers[j]);
        }
        for (size_t j = 0; j < g2.bob_labels.size(); ++j) {
            bob2_map[j] = (int)g.bob_labels.size();
            g.bob_labels.push_back("2:" + g2.bob_labels[j]);
            g.bob_answers.push_back(g2.bob_answers[j]);
        }
    }

    for (const auto& [q, pr] : g1.pi) {
        Rational w = p * pr;
        if (!w.is_zero()) g.pi[{q.first, q.second}] += w;
    }
    for (const auto& [q, pr] : g2.pi) {
        Rational w = (Rational(1) - p) * pr;
        if (!w.is_zero()) g.pi[{a_off + q.first, bob2_map[(size_t)q.second]}] += w;
    }
    // winning sets
    for (int x = 0; x < (int)g1.alice_labels.size(); ++x)
        for (int y = 0; y < (int)g1.bob_answers.size(); ++y)
            for (int a = 0; a < g1.alice_answers[(size_t)x]; ++a)
                for (int b = 0; b < g1.bob_answers[(size_t)y]; ++b)
                    if (g1.win(x, y, a, b)) g.set_win(x, y, a, b);
    for (int x = 0; x < (int)g2.alice_labels.size(); ++x)
        for (int y = 0; y < (int)g2.bob_answers.size(); ++y)
            for (int a = 0; a < g2.alice_answers[(size_t)x]; ++a)
                for (int b = 0; b < g2.bob_answers[(size_t)y]; ++b)
                    if (g2.win(x, y, a, b)) g.set_win(a_off + x, bob2_map[(size_t)y], a, b);
    g.validate();
    return g;
}

Game theta_shift(const Game& g, const Rational& theta) {
    if (!(Rational(0) < theta && theta < Rational(1)))
        throw std::invalid_argument("theta outside (0,1)");
    if (theta >= Rational(1, 2))
        return mix_games(Rational(1) / (Rational(2) * theta), g, always_lose());
    return mix_games(Rational(1) / (Rational(2) * (Rational(1) - theta)), g, always_win());
}

std::pair<Game, Rational> build_Gm(const Bcs& b, int dist_var, long long C) {
    if (dist_var < 0 || dist_var >= (int)b.vars.size())
        throw std::invalid_argument("dist_var absent");
    if (C <= 0) throw std::invalid_argument("C must be positive");
    Game g1 = bcs_to_game(b);
    const std::string& dname = b.vars[(size_t)dist_var].name;
    if (g1.bob_index(dname) < 0)
        throw std::invalid_argument("dist_var not asked in any context");
    Game g2;
    g2.alice_labels = {dname};
    g2.alice_answers = {2};
    g2.bob_labels = {dname};
    g2.bob_answers = {2};
    g2.pi[{0, 0}] = Rational(1);
    g2.set_win(0, 0, 1, 1);  // both respond -1
    Rational p(C, C + 1);
    return {mix_games(p, g1, g2, BobMode::SharedByLabel), p};
}

Rational classical_value(const Game& g) {
    g.validate();
    // enumerate the party with the smaller strategy space, best-respond the other
    __int128 prodA = 1, prodB = 1;
    for (int m : g.alice_answers) prodA = std::min<__int128>(prodA * m, (__int128)2e18);
    for (int m : g.bob_answers) prodB = std::min<__int128>(prodB * m, (__int128)2e18);
    bool enum_bob = prodB <= prodA;
    if (std::min(prodA, prodB) > (__int128)1000000000)
        throw std::invalid_argument("deterministic enumeration guard exceeded");

    int nx = (int)g.alice_answers.size(), ny = (int)g.bob_answers.size();
    // per outer-question sparse pi rows
    Rational best(-1);
    if (enum_bob) {
        std::vector<std::vector<std::pair<int, Rational>>> row((size_t)nx);
        for (const auto& [q, p] : g.pi) row[(size_t)q.first].push_back({q.second, p});
        std::vector<int> bob((size_t)ny, 0);
        while (true) {
            Rational total;
            for (int x = 0; x < nx; ++x) {
                Rational bestx(-1);
                for (int a = 0; a < g.alice_answers[(size_t)x]; ++a) {
                    Rational acc;
                    for (const auto& [y, p] : row[(size_t)x])
                        if (g.win(x, y, a, bob[(size_t)y])) acc += p;
                    if (acc > bestx) bestx = acc;
                }
                total += bestx;
            }
            if (total > best) best = total;
            int j = 0;
            for (; j < ny; ++j) {
                if (++bob[(size_t)j] < g.bob_answers[(size_t)j]) break;
                bob[(size_t)j] = 0;
            }
            if (j == ny) break;
        }
    } else {
        std::vector<std::vector<std::pair<int, Rational>>> col((size_t)ny);
        for (const auto& [q, p] : g.pi) col[(size_t)q.second].push_back({q.first, p});
        std::vector<int> alice((size_t)nx, 0);
        while (true) {
            Rational total;
            for (int y = 0; y < ny; ++y) {
                Rational besty(-1);
                for (int b = 0; b < g.bob_answers[(size_t)y]; ++b) {
                    Rational acc;
                    for (const auto& [x, p] : col[(size_t)y])
                        if (g.win(x, y, alice[(size_t)x], b)) acc += p;
                    if (acc > besty) besty = acc;
                }
                total += besty;
            }
            if (total > best) best = total;
            int j = 0;
            for (; j < nx; ++j) {
                if (++alice[(size_t)j] < g.alice_answers[(size_t)j]) break;
                alice[(size_t)j] = 0;
            }
            if (j == nx) break;
        }
    }
    return best;
}

void Strategy::validate(const Game& g, double tol) const {
    if (alice.size() != g.alice_answers.size() || bob.size() != g.bob_answers.size())
        throw std::invalid_argument("strategy question count mismatch");
    int dA = tensor ? dimA : dimA;
    int dB = tensor ? dimB : dimA;
    auto check_pvm = [&](const std::vector<Eigen::MatrixXcd>& pvm, int d, int expected) {
        if ((int)pvm.size() != expected) throw std::invalid_argument("PVM outcome count mismatch");
        Eigen::MatrixXcd sum = Eigen::MatrixXcd::Zero(d, d);
        for (const auto& e : pvm) {
            if (e.rows() != d || e.cols() != d) throw std::invalid_argument("projector shape");
            if ((e - e.adjoint()).norm() > tol || (e * e - e).norm() > tol)
                throw std::invalid_argument("non-projector PVM element");
            sum += e;
        }
        if ((sum - Eigen::MatrixXcd::Identity(d, d)).norm() > tol)
            throw std::invalid_argument("PVM does not sum to identity");
    };
    for (size_t x = 0; x < alice.size(); ++x)
        check_pvm(alice[x], dA, g.alice_answers[x]);
    for (size_t y = 0; y < bob.size(); ++y) check_pvm(bob[y], dB, g.bob_answers[y]);
    if ((int)state.size() != total_dim()) throw std::invalid_argument("state dimension");
    if (std::abs(state.norm() - 1.0) > tol) throw std::invalid_argument("state not unit norm");
    if (!tensor) {
        for (const auto& pa : alice)
            for (const auto& ea : pa)
                for (const auto& pb : bob)
                    for (const auto& eb : pb)
                        if ((ea * eb - eb * ea).norm() > 1e-9)
                            throw std::invalid_argument("cross-party operators do not commute");
    }
}

double strategy_value(const Game& g, const Strategy& s) {
    s.validate(g);
    double total = 0.0;
    for (const auto& [q, p] : g.pi) {
        auto [x, y] = q;
        for (int a = 0; a < g.alice_answers[(size_t)x]; ++a)
            for (int b = 0; b < g.bob_answers[(size_t)y]; ++b) {
                if (!g.win(x, y, a, b)) continue;
                std::complex<double> amp;
                if (s.tensor) {
                    Eigen::MatrixXcd op = kron(s.alice[(size_t)x][(size_t)a], s.bob[(size_t)y][(size_t)b]);
                    amp = s.state.adjoint() * op * s.state;
                } else {
                    amp = s.state.adjoint() * s.alice[(size_t)x][(size_t)a] *
                          s.bob[(size_t)y][(size_t)b] * s.state;
                }
                total += p.to_double() * amp.real();
            }
    }
    return total;
}

Strategy perfect_strategy_from_assignment(const Bcs& b, Assignment a) {
    if (!satisfies_all(b, a)) throw std::invalid_argument("assignment does not satisfy the system");
    Game g = bcs_to_game(b);
    Strategy s;
    s.tensor = true;
    s.dimA = s.dimB = 1;
    s.state = Eigen::VectorXcd::Ones(1);
    for (int i = 0; i < (int)b.constraints.size(); ++i) {
        uint32_t mine = b.restrict_to_context(i, a);
        std::vector<Eigen::MatrixXcd> pvm;
        for (int phi = 0; phi < g.alice_answers[(size_t)i]; ++phi)
            pvm.push_back(Eigen::MatrixXcd::Constant(1, 1, phi == (int)mine ? 1.0 : 0.0));
        s.alice.push_back(std::move(pvm));
    }
    for (size_t y = 0; y < g.bob_labels.size(); ++y) {
        int v = b.var_id(g.bob_labels[y]);
        int gamma = (a >> v) & 1;
        std::vector<Eigen::MatrixXcd> pvm;
        for (int c = 0; c < 2; ++c)
            pvm.push_back(Eigen::MatrixXcd::Constant(1, 1, c == gamma ? 1.0 : 0.0));
        s.bob.push_back(std::move(pvm));
    }
    return s;
}

EpsilonReport epsilon_report(const Bcs& b, const Strategy& s) {
    Game g = bcs_to_game(b);
    EpsilonReport rep;
    rep.eps = std::max(0.0, 1.0 - strategy_value(g, s));

    int M = 0;
    for (const auto& c : b.constraints) M = std::max(M, (int)c.context.size());
    Rational t(1);
    for (int i = 0; i < M + 2; ++i) t *= Rational(4);
    t *= Rational((long long)b.constraints.size());
    t *= Rational((long long)M * M * M);
    rep.t_b = t;

    GenRegistry reg;
    std::vector<int> var_gens;
    for (const auto& v : b.vars) var_gens.push_back(reg.intern(v.name));
    RelationSet rels = bcs_relations(b, reg, var_gens);

    // Bob's observables X_j = Q_+ - Q_-; answer index 1 encodes -1.
    MatrixRep mrep;
    int dim = s.total_dim();
    mrep.dim = dim;
    for (size_t y = 0; y < g.bob_labels.size(); ++y) {
        int v = b.var_id(g.bob_labels[y]);
        Eigen::MatrixXcd obs = s.bob[y][0] - s.bob[y][1];
        if (s.tensor) obs = kron(Eigen::MatrixXcd::Identity(s.dimA, s.dimA), obs);
        mrep.set(var_gens[(size_t)v], obs);
    }
    mrep.validate(1e-8);

    double bound = rep.t_b.to_double() * rep.eps + 1e-8;
    rep.all_within_bound = true;
    for (const auto& r : rels.all()) {
        bool usable = true;
        for (const auto& [w, c] : r.poly.terms())
            for (int gen : w)
                if (!mrep.images.count(gen)) usable = false;
        if (!usable) continue;  // variable outside every context never asked
        double res = state_residual(r.poly, mrep, s.state);
        rep.residuals.push_back({r.name, res});
        if (res > bound) rep.all_within_bound = false;
    }
    return rep;
}

Game chsh_game() {
    Game g;
    g.alice_labels = {"x0", "x1"};
    g.alice_answers = {2, 2};
    g.bob_labels = {"y0", "y1"};
    g.bob_answers = {2, 2};
    for (int x = 0; x < 2; ++x)
        for (int y = 0; y < 2; ++y) {
            g.pi[{x, y}] = Rational(1, 4);
            for (int a = 0; a < 2; ++a)
                for (int b = 0; b < 2; ++b)
                    if ((a ^ b) == (x & y)) g.set_win(x, y, a, b);
        }
    return g;
}

Strategy chsh_optimal_strategy() {
    Eigen::MatrixXcd Z(2, 2), X(2, 2);
    Z << 1, 0, 0, -1;
    X << 0, 1, 1, 0;
    double s = 1.0 / std::sqrt(2.0);
    std::vector<Eigen::MatrixXcd> aobs = {Z, X};
    std::vector<Eigen::MatrixXcd> bobs = {s * (Z + X), s * (Z - X)};
    Strategy st;
    st.tensor = true;
    st.dimA = st.dimB = 2;
    st.state = Eigen::VectorXcd::Zero(4);
    st.state(0) = st.state(3) = 1.0 / std::sqrt(2.0);  // |00> + |11>
    Eigen::MatrixXcd id = Eigen::MatrixXcd::Identity(2, 2);
    for (const auto& o : aobs) st.alice.push_back({(id + o) / 2, (id - o) / 2});
    for (const auto& o : bobs) st.bob.push_back({(id + o) / 2, (id - o) / 2});
    return st;
}

std::vector<Eigen::MatrixXcd> magic_square_observables() {
    Eigen::MatrixXcd I = Eigen::MatrixXcd::Identity(2, 2), X(2, 2), Z(2, 2), Y(2, 2);
    X << 0, 1, 1, 0;
    Z << 1, 0, 0, -1;
    Y << 0, std::complex<double>(0, -1), std::complex<double>(0, 1), 0;
    auto k = [](const Eigen::MatrixXcd& a, const Eigen::MatrixXcd& b) {
        Eigen::MatrixXcd out(4, 4);
        for (int i = 0; i < 2; ++i)
            for (int j = 0; j < 2; ++j) out.block(2 * i, 2 * j, 2, 2) = a(i, j) * b;
        return out;
    };
    // rows multiply to +1, columns to (+1, +1, -1)
    return {k(Z, I), k(I, Z), k(Z, Z),
            k(I, X), k(X, I), k(X, X),
            k(Z, X), k(X, Z), k(Y, Y)};
}

Strategy magic_square_strategy(const Bcs& magic) {
    auto obs = magic_square_observables();
    Game g = bcs_to_game(magic);
    Strategy s;
    s.tensor = true;
    s.dimA = s.dimB = 4;
    s.state = Eigen::VectorXcd::Zero(16);
    for (int i = 0; i < 4; ++i) s.state(i * 4 + i) = 0.5;  // maximally entangled
    Eigen::MatrixXcd id = Eigen::MatrixXcd::Identity(4, 4);
    for (const auto& c : magic.constraints) {
        std::vector<Eigen::MatrixXcd> pvm;
        for (uint32_t phi = 0; phi < (uint32_t(1) << c.context.size()); ++phi) {
            Eigen::MatrixXcd p = id;
            for (size_t j = 0; j < c.context.size(); ++j) {
                double sign = ((phi >> j) & 1) ? -1.0 : 1.0;
                p = p * (id + sign * obs[(size_t)c.context[j]]) / 2.0;
            }
            pvm.push_back(p);
        }
        s.alice.push_back(std::move(pvm));
    }
    for (size_t y = 0; y < g.bob_labels.size(); ++y) {
        int v = magic.var_id(g.bob_labels[y]);
        const Eigen::MatrixXcd& o = obs[(size_t)v];  // real symmetric, so transpose = itself
        s.bob.push_back({(id + o) / 2, (id - o) / 2});
    }
    return s;
}

namespace {

void emit_doubles(std::ostream& os, const Eigen::MatrixXcd& m) {
    char buf[64];
    for (int i = 0; i < m.rows(); ++i)
        for (int j = 0; j < m.cols(); ++j) {
            snprintf(buf, sizeof buf, " %.17g %.17g", m(i, j).real(), m(i, j).imag());
            os << buf;
        }
}

Eigen::MatrixXcd read_matrix(std::istream& is, int rows, int cols) {
    Eigen::MatrixXcd m(rows, cols);
    for (int i = 0; i < rows; ++i)
        for (int j = 0; j < cols; ++j) {
            double re, im;
            if (!(is >> re >> im)) throw std::runtime_error("truncated matrix block");
            m(i, j) = std::complex<double>(re, im);
        }
    return m;
}

}  // namespace

std::string render_game(const Game& g) {
    std::ostringstream os;
    os << "game\n";
    os << "aq " << g.alice_labels.size() << "\n";
    os << "bq " << g.bob_labels.size() << "\n";
    for (size_t i = 0; i < g.alice_labels.size(); ++i)
        os << "alabel " << i << ' ' << g.alice_labels[i] << "\n";
    for (size_t i = 0; i < g.bob_labels.size(); ++i)
        os << "blabel " << i << ' ' << g.bob_labels[i] << "\n";
    for (size_t i = 0; i < g.alice_answers.size(); ++i)
        os << "aanswers " << i << ' ' << g.alice_answers[i] << "\n";
    for (size_t i = 0; i < g.bob_answers.size(); ++i)
        os << "banswers " << i << ' ' << g.bob_answers[i] << "\n";
    for (const auto& [q, p] : g.pi) os << "pi " << q.first << ' ' << q.second << ' ' << p << "\n";
    for (size_t x = 0; x < g.alice_answers.size(); ++x)
        for (size_t y = 0; y < g.bob_answers.size(); ++y)
            for (int a = 0; a < g.alice_answers[x]; ++a)
                for (int b = 0; b < g.bob_answers[y]; ++b)
                    if (g.win((int)x, (int)y, a, b))
                        os << "win " << x << ' ' << y << ' ' << a << ' ' << b << "\n";
    return os.str();
}

Game parse_game(const std::string& text) {
    std::istringstream is(text);
    std::string line;
    Game g;
    bool header = false;
    int lineno = 0;
    while (std::getline(is, line)) {
        ++lineno;
        std::istringstream ls(line);
        std::string head;
        if (!(ls >> head) || head[0] == '#') continue;
        try {
            if (head == "game") {
                header = true;
            } else if (head == "aq") {
                int n;
                ls >> n;
                g.alice_labels.resize((size_t)n);
                g.alice_answers.assign((size_t)n, 1);
                for (int i = 0; i < n; ++i) g.alice_labels[(size_t)i] = "q" + std::to_string(i);
            } else if (head == "bq") {
                int n;
                ls >> n;
                g.bob_labels.resize((size_t)n);
                g.bob_answers.assign((size_t)n, 1);
                for (int i = 0; i < n; ++i) g.bob_labels[(size_t)i] = "q" + std::to_string(i);
            } else if (head == "alabel") {
                int q;
                std::string name;
                ls >> q >> name;
                g.alice_labels.at((size_t)q) = name;
            } else if (head == "blabel") {
                int q;
                std::string name;
                ls >> q >> name;
                g.bob_labels.at((size_t)q) = name;
            } else if (head == "aanswers") {
                int q, m;
                ls >> q >> m;
                g.alice_answers.at((size_t)q) = m;
            } else if (head == "banswers") {
                int q, m;
                ls >> q >> m;
                g.bob_answers.at((size_t)q) = m;
            } else if (head == "pi") {
                int x, y;
                std::string p;
                ls >> x >> y >> p;
                g.pi[{x, y}] = Rational::from_string(p);
            } else if (head == "win") {
                int x, y, a, b;
                ls >> x >> y >> a >> b;
                g.set_win(x, y, a, b);
            } else {
                throw std::runtime_error("unknown directive " + head);
            }
            if (ls.fail()) throw std::runtime_error("malformed arguments");
        } catch (const std::exception& e) {
            throw ParseError(lineno, e.what());
        }
    }
    if (!header) throw ParseError(0, "missing game header");
    g.validate();
    return g;
}

std::string render_strategy(const Strategy& s) {
    std::ostringstream os;
    if (s.tensor)
        os << "strategy tensor " << s.dimA << ' ' << s.dimB << "\n";
    else
        os << "strategy commuting " << s.dimA << "\n";
    os << "state";
    emit_doubles(os, s.state);
    os << "\n";
    for (size_t q = 0; q < s.alice.size(); ++q)
        for (size_t a = 0; a < s.alice[q].size(); ++a) {
            os << "alice " << q << ' ' << a;
            emit_doubles(os, s.alice[q][a]);
            os << "\n";
        }
    for (size_t q = 0; q < s.bob.size(); ++q)
        for (size_t b = 0; b < s.bob[q].size(); ++b) {
            os << "bob " << q << ' ' << b;
            emit_doubles(os, s.bob[q][b]);
            os << "\n";
        }
    return os.str();
}

Strategy parse_strategy(const std::string& text) {
    std::istringstream is(text);
    std::string head;
    Strategy s;
    if (!(is >> head) || head != "strategy") throw std::runtime_error("missing strategy header");
    std::string kind;
    is >> kind;
    int dA = 0, dB = 0;
    if (kind == "tensor") {
        is >> dA >> dB;
        s.tensor = true;
    } else if (kind == "commuting") {
        is >> dA;
        dB = dA;
        s.tensor = false;
    } else {
        throw std::runtime_error("unknown strategy kind " + kind);
    }
    s.dimA = dA;
    s.dimB = dB;
    int total = s.total_dim();
    while (is >> head) {
        if (head == "state") {
            Eigen::MatrixXcd v = read_matrix(is, total, 1);
            s.state = v.col(0);
        } else if (head == "alice" || head == "bob") {
            int q, a;
            is >> q >> a;
            int d = head == "alice" ? dA : (s.tensor ? dB : dA);
            auto& side = head == "alice" ? s.alice : s.bob;
            if ((int)side.size() <= q) side.resize((size_t)q + 1);
            if ((int)side[(size_t)q].size() <= a) side[(size_t)q].resize((size_t)a + 1);
            side[(size_t)q][(size_t)a] = read_matrix(is, d, d);
        } else {
            throw std::runtime_error("unknown strategy directive " + head);
        }
    }
    return s;
}

}  // namespace bcsg
