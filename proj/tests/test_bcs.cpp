#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>

#include "bcsg/bcs.hpp"

using namespace bcsg;

namespace {

bool same_system(const Bcs& a, const Bcs& b) {
    if (a.vars.size() != b.vars.size() || a.constraints.size() != b.constraints.size())
        return false;
    for (size_t i = 0; i < a.vars.size(); ++i)
        if (a.vars[i].name != b.vars[i].name) return false;
    for (size_t i = 0; i < a.constraints.size(); ++i) {
        if (a.constraints[i].context != b.constraints[i].context) return false;
        if (!(a.constraints[i].satisfying == b.constraints[i].satisfying)) return false;
    }
    if (a.weights.has_value() != b.weights.has_value()) return false;
    if (a.weights && *a.weights != *b.weights) return false;
    return true;
}

}  // namespace

TEST_CASE("xor constraint expands to the two odd-parity assignments") {
    Bcs b = parse_bcs("var x1 x2\nconstraint xor x1 x2 : true\n");
    REQUIRE(b.constraints.size() == 1);
    const auto& s = b.constraints[0].satisfying;
    CHECK(s.count() == 2);
    CHECK(s.test(0b01));  // (-1, +1)
    CHECK(s.test(0b10));  // (+1, -1)
    CHECK_FALSE(s.test(0b00));
    CHECK_FALSE(s.test(0b11));
}

TEST_CASE("trivial constraint admits every assignment") {
    Bcs b = parse_bcs("var x1 x2\nconstraint triv x1 x2\n");
    CHECK(b.constraints[0].satisfying.count() == 4);
}

TEST_CASE("table constraint transcribes patterns directly") {
    Bcs b = parse_bcs("var x1 x2 x3\nconstraint table x1 x2 x3 : --- -++\n");
    const auto& s = b.constraints[0].satisfying;
    CHECK(s.count() == 2);
    CHECK(s.test(0b111));  // (-1,-1,-1)
    CHECK(s.test(0b001));  // (-1,+1,+1)
}

TEST_CASE("parser reports line numbers and bad variables") {
    CHECK_THROWS_AS(parse_bcs("var x\nconstraint xor x y : true\n"), ParseError);
    CHECK_THROWS_AS(parse_bcs("var x\nconstraint xor x x : true\n"), ParseError);
    CHECK_THROWS_AS(parse_bcs("var x\nbogus\n"), ParseError);
    try {
        parse_bcs("var x\nconstraint xor x q : true\n");
        FAIL("expected ParseError");
    } catch (const ParseError& e) {
        CHECK(e.line == 2);
    }
}

TEST_CASE("expression forms agree with direct boolean evaluation") {
    struct Row {
        const char* text;
        bool (*eval)(int, int, int);
        int arity;
    };
    auto tb = [](int v) { return v == -1; };
    static auto to_bool = tb;
    Row rows[] = {
        {"constraint xor x0 x1 : true",
         [](int a, int b, int) { return to_bool(a) != to_bool(b); }, 2},
        {"constraint xor x0 x1 : false",
         [](int a, int b, int) { return to_bool(a) == to_bool(b); }, 2},
        {"constraint and x0 x1 : true",
         [](int a, int b, int) { return to_bool(a) && to_bool(b); }, 2},
        {"constraint and x0 x1 : false",
         [](int a, int b, int) { return !(to_bool(a) && to_bool(b)); }, 2},
        {"constraint orf x0 x1", [](int a, int b, int) { return !(to_bool(a) || to_bool(b)); }, 2},
        {"constraint eq x0 x1", [](int a, int b, int) { return to_bool(a) == to_bool(b); }, 2},
        {"constraint andeq x0 x1 x2",
         [](int a, int b, int c) { return to_bool(a) == (to_bool(b) && to_bool(c)); }, 3},
    };
    for (const auto& row : rows) {
        CAPTURE(row.text);
        Bcs b = parse_bcs("var x0 x1 x2\n" + std::string(row.text) + "\n");
        const auto& c = b.constraints[0];
        for (uint32_t m = 0; m < (uint32_t(1) << row.arity); ++m) {
            int v[3] = {1, 1, 1};
            for (int j = 0; j < row.arity; ++j) v[j] = ((m >> j) & 1) ? -1 : 1;
            CHECK(c.satisfying.test(m) == row.eval(v[0], v[1], v[2]));
        }
    }
}

TEST_CASE("check_assignment matches the worked examples") {
    Bcs b = parse_bcs("var x1 x2\nconstraint xor x1 x2 : true\n");
    CHECK(check_assignment(b, 0b01) == std::vector<bool>{true});   // (-1,+1)
    CHECK(check_assignment(b, 0b11) == std::vector<bool>{false});  // (-1,-1)
}

TEST_CASE("brute force finds the unique AND witness and scans lexicographically") {
    Bcs b = parse_bcs("var x1 x2\nconstraint and x1 x2 : true\n");
    auto a = brute_force_satisfiability(b);
    REQUIRE(a.has_value());
    CHECK(*a == 0b11);  // (-1, -1)

    Bcs empty = parse_bcs("var x1 x2 x3\n");
    auto e = brute_force_satisfiability(empty);
    REQUIRE(e.has_value());
    CHECK(*e == 0);  // all +1 comes first
}

TEST_CASE("magic square system is unsatisfiable") {
    Bcs b = magic_square_bcs();
    CHECK(b.vars.size() == 9);
    CHECK(b.constraints.size() == 6);
    CHECK_FALSE(brute_force_satisfiability(b).has_value());
    auto flags = check_assignment(b, 0);
    CHECK(std::count(flags.begin(), flags.end(), false) >= 1);
}

TEST_CASE("brute force agrees with an exhaustive check_assignment scan") {
    Bcs sys[] = {
        magic_square_bcs(),
        parse_bcs("var a b c d\nconstraint xor a b : true\nconstraint xor b c : true\n"
                  "constraint xor c d : true\nconstraint xor d a : true\n"),
        parse_bcs("var a b c\nconstraint and a b : true\nconstraint orf b c\n"),
    };
    for (const auto& b : sys) {
        auto witness = brute_force_satisfiability(b);
        bool any = false;
        for (uint32_t a = 0; a < (uint32_t(1) << b.vars.size()); ++a)
            if (satisfies_all(b, a)) {
                any = true;
                break;
            }
        CHECK(witness.has_value() == any);
        if (witness) CHECK(satisfies_all(b, *witness));
    }
}

TEST_CASE("odd xor cycle is unsatisfiable") {
    Bcs b = parse_bcs(
        "var a b c\nconstraint xor a b : true\nconstraint xor b c : true\n"
        "constraint xor c a : true\n");
    CHECK_FALSE(brute_force_satisfiability(b).has_value());
}

TEST_CASE("render/parse round trip is the identity") {
    Bcs sys[] = {
        magic_square_bcs(),
        parse_bcs("var x y z\nweight 0 1/3\nweight 1 2/3\nconstraint andeq x y z\n"
                  "constraint triv x z\n"),
        parse_bcs("var u v\nconstraint table u v : +- -+ ++\n"),
    };
    for (const auto& b : sys) CHECK(same_system(b, parse_bcs(render_bcs(b))));
}

TEST_CASE("weights must form a distribution") {
    CHECK_THROWS(parse_bcs("var x\nweight 0 1/2\nconstraint triv x\n"));
    Bcs b =
        parse_bcs("var x y\nweight 0 1/4\nweight 1 3/4\nconstraint triv x\nconstraint triv y\n");
    CHECK(b.weight(0) == Rational(1, 4));
    CHECK(b.weight(1) == Rational(3, 4));
}

TEST_CASE("brute force guard rejects oversized systems") {
    Bcs b;
    for (int i = 0; i < 31; ++i) b.vars.push_back({i, "v" + std::to_string(i)});
    CHECK_THROWS(brute_force_satisfiability(b));
}
