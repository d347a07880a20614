#include "bcsg/rational.hpp"

#include <limits>
#include <numeric>
#include <ostream>
#include <sstream>

namespace bcsg {

namespace {

__int128 gcd128(__int128 a, __int128 b) {
    if (a < 0) a = -a;
    if (b < 0) b = -b;
    while (b != 0) {
        __int128 t = a % b;
        a = b;
        b = t;
    }
    return a;
}

long long narrow(__int128 v) {
    if (v > std::numeric_limits<long long>::max() || v < std::numeric_limits<long long>::min())
        throw std::overflow_error("Rational: 64-bit overflow");
    return (long long)v;
}

}  // namespace

void Rational::normalize128(__int128 n, __int128 d) {
    if (d == 0) throw std::domain_error("Rational: zero denominator");
    if (d < 0) { n = -n; d = -d; }
    if (n == 0) { num_ = 0; den_ = 1; return; }
    __int128 g = gcd128(n, d);
    num_ = narrow(n / g);
    den_ = narrow(d / g);
}

void Rational::assign(long long n, long long d) { normalize128(n, d); }

Rational& Rational::operator+=(const Rational& o) {
    normalize128((__int128)num_ * o.den_ + (__int128)o.num_ * den_, (__int128)den_ * o.den_);
    return *this;
}

Rational& Rational::operator-=(const Rational& o) {
    normalize128((__int128)num_ * o.den_ - (__int128)o.num_ * den_, (__int128)den_ * o.den_);
    return *this;
}

Rational& Rational::operator*=(const Rational& o) {
    normalize128((__int128)num_ * o.num_, (__int128)den_ * o.den_);
    return *this;
}

Rational& Rational::operator/=(const Rational& o) {
    if (o.num_ == 0) throw std::domain_error("Rational: division by zero");
    normalize128((__int128)num_ * o.den_, (__int128)den_ * o.num_);
    return *this;
}

Rational Rational::from_string(const std::string& s) {
    auto bad = [&] { throw std::invalid_argument("bad rational '" + s + "'"); };
    if (s.empty()) bad();
    size_t slash = s.find('/');
    try {
        if (slash == std::string::npos) {
            size_t pos = 0;
            long long n = std::stoll(s, &pos);
            if (pos != s.size()) bad();
            return Rational(n);
        }
        size_t p1 = 0, p2 = 0;
        long long n = std::stoll(s.substr(0, slash), &p1);
        long long d = std::stoll(s.substr(slash + 1), &p2);
        if (p1 != slash || p2 != s.size() - slash - 1) bad();
        return Rational(n, d);
    } catch (const std::invalid_argument&) {
        bad();
    } catch (const std::out_of_range&) {
        bad();
    }
    return Rational();  // unreachable
}

std::string Rational::str() const {
    std::ostringstream os;
    os << num_;
    if (den_ != 1) os << '/' << den_;
    return os.str();
}

std::ostream& operator<<(std::ostream& os, const Rational& r) { return os << r.str(); }

std::string Coeff::str() const {
    if (im.is_zero()) return re.str();
    if (re.is_zero()) return im.str() + "i";
    return re.str() + (im.is_negative() ? "" : "+") + im.str() + "i";
}

}  // namespace bcsg
