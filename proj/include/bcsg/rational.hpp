#pragma once

#include <cstdint>
#include <iosfwd>
#include <stdexcept>
#include <string>

namespace bcsg {

// Exact rational on 64-bit numerator/denominator, normalized with den > 0.
// Intermediates use __int128; anything that would not normalize back into
// 64 bits throws overflow_error instead of silently wrapping.
class Rational {
public:
    Rational() : num_(0), den_(1) {}
    Rational(long long n) : num_(n), den_(1) {}
    Rational(long long n, long long d) { assign(n, d); }

    static Rational from_string(const std::string& s);  // "p/q" or "p"

    long long num() const { return num_; }
    long long den() const { return den_; }

    bool is_zero() const { return num_ == 0; }
    bool is_negative() const { return num_ < 0; }
    bool is_integer() const { return den_ == 1; }

    Rational operator-() const { return Rational(-num_, den_); }
    Rational abs() const { return num_ < 0 ? -*this : *this; }

    Rational& operator+=(const Rational& o);
    Rational& operator-=(const Rational& o);
    Rational& operator*=(const Rational& o);
    Rational& operator/=(const Rational& o);

    friend Rational operator+(Rational a, const Rational& b) { return a += b; }
    friend Rational operator-(Rational a, const Rational& b) { return a -= b; }
    friend Rational operator*(Rational a, const Rational& b) { return a *= b; }
    friend Rational operator/(Rational a, const Rational& b) { return a /= b; }

    friend bool operator==(const Rational& a, const Rational& b) {
        return a.num_ == b.num_ && a.den_ == b.den_;
    }
    friend bool operator!=(const Rational& a, const Rational& b) { return !(a == b); }
    friend bool operator<(const Rational& a, const Rational& b) {
        return (__int128)a.num_ * b.den_ < (__int128)b.num_ * a.den_;
    }
    friend bool operator>(const Rational& a, const Rational& b) { return b < a; }
    friend bool operator<=(const Rational& a, const Rational& b) { return !(b < a); }
    friend bool operator>=(const Rational& a, const Rational& b) { return !(a < b); }

    double to_double() const { return (double)num_ / (double)den_; }
    std::string str() const;

private:
    void assign(long long n, long long d);
    void normalize128(__int128 n, __int128 d);
    long long num_;
    long long den_;
};

std::ostream& operator<<(std::ostream& os, const Rational& r);

// Gaussian rational re + im*i. Star-polynomial coefficients; every
// construction in scope stays on the axes {1, i, -1, -i} times a rational,
// but sums are closed here so intermediate arithmetic never leaves exactness.
struct Coeff {
    Rational re, im;

    Coeff() = default;
    Coeff(Rational r) : re(r) {}
    Coeff(long long n) : re(Rational(n)) {}
    Coeff(Rational r, Rational i) : re(r), im(i) {}

    bool is_zero() const { return re.is_zero() && im.is_zero(); }
    Coeff conj() const { return Coeff(re, -im); }

    Coeff operator-() const { return Coeff(-re, -im); }
    Coeff& operator+=(const Coeff& o) { re += o.re; im += o.im; return *this; }
    Coeff& operator-=(const Coeff& o) { re -= o.re; im -= o.im; return *this; }
    friend Coeff operator+(Coeff a, const Coeff& b) { return a += b; }
    friend Coeff operator-(Coeff a, const Coeff& b) { return a -= b; }
    friend Coeff operator*(const Coeff& a, const Coeff& b) {
        return Coeff(a.re * b.re - a.im * b.im, a.re * b.im + a.im * b.re);
    }
    friend bool operator==(const Coeff& a, const Coeff& b) { return a.re == b.re && a.im == b.im; }
    friend bool operator!=(const Coeff& a, const Coeff& b) { return !(a == b); }

    // |c| as an exact rational; defined only for axis-aligned values,
    // which is all the size functional ever sees.
    Rational abs_exact() const {
        if (re.is_zero()) return im.abs();
        if (im.is_zero()) return re.abs();
        throw std::domain_error("Coeff::abs_exact: coefficient off the rational axes");
    }

    std::string str() const;
};

}  // namespace bcsg
