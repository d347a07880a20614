#include "bcsg/bcs.hpp"

#include <algorithm>
#include <map>
#include <numeric>
#include <sstream>

namespace bcsg {

SatSet::SatSet(int arity) : arity_(arity) {
    if (arity < 0 || arity > kMaxContext) throw std::invalid_argument("context too large");
    bits_.assign(((size_t(1) << arity) + 63) / 64, 0);
}

uint32_t SatSet::count() const {
    uint32_t n = 0;
    for (uint64_t b : bits_) n += (uint32_t)__builtin_popcountll(b);
    return n;
}

bool SatSet::test(uint32_t a) const { return (bits_[a >> 6] >> (a & 63)) & 1; }

void SatSet::set(uint32_t a, bool sat) {
    if (sat)
        bits_[a >> 6] |= uint64_t(1) << (a & 63);
    else
        bits_[a >> 6] &= ~(uint64_t(1) << (a & 63));
}

void SatSet::fill(bool sat) {
    uint32_t total = uint32_t(1) << arity_;
    for (uint32_t a = 0; a < total; ++a) set(a, sat);
}

int Bcs::var_id(const std::string& name) const {
    for (const auto& v : vars)
        if (v.name == name) return v.id;
    return -1;
}

void Bcs::validate() const {
    std::map<std::string, int> seen;
    for (int i = 0; i < (int)vars.size(); ++i) {
        if (vars[i].id != i) throw std::invalid_argument("variable ids must be dense 0..n-1");
        if (!seen.emplace(vars[i].name, i).second)
            throw std::invalid_argument("duplicate variable name " + vars[i].name);
    }
    for (const auto& c : constraints) {
        if (c.context.empty()) throw std::invalid_argument("empty context");
        if ((int)c.context.size() > kMaxContext) throw std::invalid_argument("context too large");
        for (size_t j = 0; j < c.context.size(); ++j) {
            if (c.context[j] < 0 || c.context[j] >= (int)vars.size())
                throw std::invalid_argument("context variable out of range");
            if (j > 0 && c.context[j] <= c.context[j - 1])
                throw std::invalid_argument("context not strictly increasing");
        }
        if (c.satisfying.arity() != (int)c.context.size())
            throw std::invalid_argument("satisfying set arity mismatch");
    }
    if (weights) {
        if (weights->size() != constraints.size())
            throw std::invalid_argument("one weight per constraint required");
        Rational total;
        for (const auto& w : *weights) {
            if (w.is_negative()) throw std::invalid_argument("negative weight");
            total += w;
        }
        if (total != Rational(1)) throw std::invalid_argument("weights must sum to 1");
    }
}

Rational Bcs::weight(int i) const {
    if (weights) return (*weights)[i];
    return Rational(1, (long long)constraints.size());
}

uint32_t Bcs::restrict_to_context(int ci, Assignment a) const {
    const auto& ctx = constraints[ci].context;
    uint32_t r = 0;
    for (size_t j = 0; j < ctx.size(); ++j)
        if ((a >> ctx[j]) & 1) r |= uint32_t(1) << j;
    return r;
}

std::vector<bool> check_assignment(const Bcs& b, Assignment a) {
    if (b.vars.size() < 32 && (a >> b.vars.size()) != 0)
        throw std::invalid_argument("assignment has more bits than variables");
    std::vector<bool> out(b.constraints.size());
    for (int i = 0; i < (int)b.constraints.size(); ++i)
        out[i] = b.constraints[i].satisfying.test(b.restrict_to_context(i, a));
    return out;
}

bool satisfies_all(const Bcs& b, Assignment a) {
    for (int i = 0; i < (int)b.constraints.size(); ++i)
        if (!b.constraints[i].satisfying.test(b.restrict_to_context(i, a))) return false;
    return true;
}

std::optional<Assignment> brute_force_satisfiability(const Bcs& b) {
    int n = (int)b.vars.size();
    if (n > kMaxBruteForceVars) throw std::invalid_argument("brute force guard: > 30 variables");
    uint64_t total = uint64_t(1) << n;
    for (uint64_t a = 0; a < total; ++a)
        if (satisfies_all(b, (Assignment)a)) return (Assignment)a;
    return std::nullopt;
}

Constraint make_constraint(std::vector<int> context,
                           const std::function<bool(const std::vector<int>&)>& sat_pred) {
    // sat_pred sees values (+1/-1) in the given (pre-sort) variable order.
    int m = (int)context.size();
    std::vector<int> order(m);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](int x, int y) { return context[x] < context[y]; });

    Constraint c;
    c.context.resize(m);
    for (int j = 0; j < m; ++j) c.context[j] = context[order[j]];
    c.satisfying = SatSet(m);
    std::vector<int> vals(m);
    for (uint32_t a = 0; a < (uint32_t(1) << m); ++a) {
        // bit j of a belongs to sorted position j = original position order[j]
        for (int j = 0; j < m; ++j) vals[order[j]] = ((a >> j) & 1) ? -1 : 1;
        if (sat_pred(vals)) c.satisfying.set(a);
    }
    return c;
}

Constraint parity_constraint(std::vector<int> context, int rhs_sign) {
    return make_constraint(std::move(context), [rhs_sign](const std::vector<int>& v) {
        int p = 1;
        for (int x : v) p *= x;
        return p == rhs_sign;
    });
}

namespace {

std::vector<std::string> tokens_of(const std::string& line) {
    std::vector<std::string> out;
    std::istringstream is(line);
    std::string t;
    while (is >> t) {
        if (t[0] == '#') break;
        out.push_back(t);
    }
    return out;
}

std::vector<int> lookup_context(const Bcs& b, const std::vector<std::string>& toks, size_t first,
                                size_t last, int lineno) {
    std::vector<int> ctx;
    for (size_t i = first; i < last; ++i) {
        int id = b.var_id(toks[i]);
        if (id < 0) throw ParseError(lineno, "unknown variable " + toks[i]);
        if (std::find(ctx.begin(), ctx.end(), id) != ctx.end())
            throw ParseError(lineno, "duplicate variable in context: " + toks[i]);
        ctx.push_back(id);
    }
    if (ctx.empty()) throw ParseError(lineno, "empty context");
    return ctx;
}

bool parse_bool(const std::string& s, int lineno) {
    if (s == "true") return true;
    if (s == "false") return false;
    throw ParseError(lineno, "expected true|false, got " + s);
}

}  // namespace

Bcs parse_bcs(const std::string& text) {
    Bcs b;
    std::map<int, Rational> weight_lines;
    std::istringstream is(text);
    std::string line;
    int lineno = 0;
    while (std::getline(is, line)) {
        ++lineno;
        auto toks = tokens_of(line);
        if (toks.empty()) continue;
        const std::string& head = toks[0];
        if (head == "var") {
            for (size_t i = 1; i < toks.size(); ++i) {
                if (b.var_id(toks[i]) >= 0) throw ParseError(lineno, "duplicate var " + toks[i]);
                b.vars.push_back({(int)b.vars.size(), toks[i]});
            }
        } else if (head == "weight") {
            if (toks.size() != 3) throw ParseError(lineno, "weight <i> <p/q>");
            int idx;
            try {
                idx = std::stoi(toks[1]);
                weight_lines[idx] = Rational::from_string(toks[2]);
            } catch (const std::exception& e) {
                throw ParseError(lineno, e.what());
            }
        } else if (head == "constraint") {
            if (toks.size() < 2) throw ParseError(lineno, "missing constraint kind");
            const std::string& kind = toks[1];
            auto colon = std::find(toks.begin(), toks.end(), ":");
            size_t ctx_end = colon == toks.end() ? toks.size() : (size_t)(colon - toks.begin());
            auto ctx = lookup_context(b, toks, 2, ctx_end, lineno);
            size_t tail = ctx_end + 1;  // first token after ':'
            try {
                if (kind == "xor") {
                    if (tail >= toks.size()) throw ParseError(lineno, "xor needs : true|false");
                    int rhs = parse_bool(toks[tail], lineno) ? -1 : 1;
                    b.constraints.push_back(parity_constraint(ctx, rhs));
                } else if (kind == "and") {
                    if (ctx.size() != 2) throw ParseError(lineno, "and takes 2 variables");
                    if (tail >= toks.size()) throw ParseError(lineno, "and needs : true|false");
                    bool rhs = parse_bool(toks[tail], lineno);
                    b.constraints.push_back(make_constraint(ctx, [rhs](const std::vector<int>& v) {
                        bool val = v[0] == -1 && v[1] == -1;
                        return val == rhs;
                    }));
                } else if (kind == "orf") {
                    if (ctx.size() != 2) throw ParseError(lineno, "orf takes 2 variables");
                    b.constraints.push_back(make_constraint(ctx, [](const std::vector<int>& v) {
                        return !(v[0] == -1 || v[1] == -1);
                    }));
                } else if (kind == "eq") {
                    if (ctx.size() != 2) throw ParseError(lineno, "eq takes 2 variables");
                    b.constraints.push_back(make_constraint(
                        ctx, [](const std::vector<int>& v) { return v[0] == v[1]; }));
                } else if (kind == "andeq") {
                    if (ctx.size() != 3) throw ParseError(lineno, "andeq takes 3 variables");
                    b.constraints.push_back(make_constraint(ctx, [](const std::vector<int>& v) {
                        return (v[0] == -1) == (v[1] == -1 && v[2] == -1);
                    }));
                } else if (kind == "triv") {
                    Constraint c;
                    c = make_constraint(ctx, [](const std::vector<int>&) { return true; });
                    b.constraints.push_back(std::move(c));
                } else if (kind == "table") {
                    if (colon == toks.end()) throw ParseError(lineno, "table needs : patterns");
                    int m = (int)ctx.size();
                    // patterns are given in the listed variable order
                    std::vector<int> order((size_t)m);
                    std::iota(order.begin(), order.end(), 0);
                    std::sort(order.begin(), order.end(),
                              [&](int x, int y) { return ctx[x] < ctx[y]; });
                    Constraint c;
                    c.context = ctx;
                    std::sort(c.context.begin(), c.context.end());
                    c.satisfying = SatSet(m);
                    for (size_t i = tail; i < toks.size(); ++i) {
                        const std::string& pat = toks[i];
                        if ((int)pat.size() != m)
                            throw ParseError(lineno, "pattern length != context size: " + pat);
                        uint32_t a = 0;
                        for (int j = 0; j < m; ++j) {
                            char ch = pat[(size_t)order[j]];
                            if (ch == '-')
                                a |= uint32_t(1) << j;
                            else if (ch != '+')
                                throw ParseError(lineno, "pattern chars must be + or -");
                        }
                        c.satisfying.set(a);
                    }
                    b.constraints.push_back(std::move(c));
                } else {
                    throw ParseError(lineno, "unknown constraint kind " + kind);
                }
            } catch (const ParseError&) {
                throw;
            } catch (const std::exception& e) {
                throw ParseError(lineno, e.what());
            }
        } else {
            throw ParseError(lineno, "unknown directive " + head);
        }
    }
    if (!weight_lines.empty()) {
        std::vector<Rational> w(b.constraints.size(), Rational(0));
        for (const auto& [i, r] : weight_lines) {
            if (i < 0 || i >= (int)b.constraints.size())
                throw ParseError(0, "weight index out of range");
            w[(size_t)i] = r;
        }
        b.weights = std::move(w);
    }
    b.validate();
    return b;
}

std::string render_bcs(const Bcs& b) {
    std::ostringstream os;
    os << "var";
    for (const auto& v : b.vars) os << ' ' << v.name;
    os << '\n';
    if (b.weights)
        for (size_t i = 0; i < b.weights->size(); ++i)
            os << "weight " << i << ' ' << (*b.weights)[i].str() << '\n';
    for (const auto& c : b.constraints) {
        os << "constraint table";
        for (int id : c.context) os << ' ' << b.vars[(size_t)id].name;
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

Bcs magic_square_bcs() {
    Bcs b;
    for (int i = 0; i < 9; ++i) b.vars.push_back({i, "x" + std::to_string(i)});
    for (int r = 0; r < 3; ++r)
        b.constraints.push_back(parity_constraint({3 * r, 3 * r + 1, 3 * r + 2}, +1));
    for (int c = 0; c < 3; ++c)
        b.constraints.push_back(parity_constraint({c, c + 3, c + 6}, c == 2 ? -1 : +1));
    b.validate();
    return b;
}

}  // namespace bcsg
