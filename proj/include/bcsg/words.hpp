#pragma once

#include <map>
#include <string>
#include <vector>

#include "bcsg/rational.hpp"

namespace bcsg {

// Shared registry of order-two self-adjoint generators. Every stage of the
// pipeline interns into the same registry, so adding fresh variables never
// re-indexes existing letters.
class GenRegistry {
public:
    int intern(const std::string& name);            // existing id or fresh
    int fresh(const std::string& name);             // throws if name taken
    int id(const std::string& name) const;          // throws if absent
    bool contains(const std::string& name) const;
    const std::string& name(int id) const;
    int size() const { return (int)names_.size(); }

private:
    std::vector<std::string> names_;
    std::map<std::string, int> index_;
};

// Reduced word over the generator alphabet; x^2 = 1, so reduction cancels
// adjacent equal letters. The empty word is the identity.
using Word = std::vector<int>;

Word reduce(const Word& raw);
Word concat(const Word& a, const Word& b);          // reduced product
Word adjoint(const Word& w);                        // reversal (letters self-adjoint)
bool is_reduced(const Word& w);

// Finite linear combination of reduced words with Gaussian-rational
// coefficients; zero coefficients are never stored.
class StarPoly {
public:
    using Terms = std::map<Word, Coeff>;

    StarPoly() = default;
    static StarPoly one() { return monomial(Word{}, Coeff(1)); }
    static StarPoly monomial(const Word& w, const Coeff& c);

    const Terms& terms() const { return terms_; }
    bool is_zero() const { return terms_.empty(); }
    int degree() const;  // max word length, -1 for zero

    void add_term(const Word& w, const Coeff& c);

    StarPoly operator-() const;
    StarPoly& operator+=(const StarPoly& o);
    StarPoly& operator-=(const StarPoly& o);
    friend StarPoly operator+(StarPoly a, const StarPoly& b) { return a += b; }
    friend StarPoly operator-(StarPoly a, const StarPoly& b) { return a -= b; }
    friend StarPoly operator*(const StarPoly& a, const StarPoly& b);
    StarPoly scaled(const Coeff& c) const;
    StarPoly star() const;  // adjoint: reverse words, conjugate coefficients

    friend bool operator==(const StarPoly& a, const StarPoly& b) { return a.terms_ == b.terms_; }
    friend bool operator!=(const StarPoly& a, const StarPoly& b) { return !(a == b); }

    // Substitute each generator by a word (used to push relations through
    // the nested-variable map). Letters absent from the map stay put.
    StarPoly substituted(const std::map<int, Word>& images) const;

    // Evaluate at a classical point x -> +/-1. Every letter must be mapped.
    Coeff eval_scalar(const std::map<int, int>& point) const;

    // Text form: terms "+(p/q)[i] g0.g1..." joined by spaces; empty word "1".
    std::string str(const GenRegistry& reg) const;

private:
    Terms terms_;
};

}  // namespace bcsg
