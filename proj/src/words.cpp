#include "bcsg/words.hpp"

#include <algorithm>
#include <sstream>
#include <stdexcept>

namespace bcsg {

int GenRegistry::intern(const std::string& name) {
    auto it = index_.find(name);
    if (it != index_.end()) return it->second;
    int id = (int)names_.size();
    names_.push_back(name);
    index_.emplace(name, id);
    return id;
}

int GenRegistry::fresh(const std::string& name) {
    if (index_.count(name)) throw std::invalid_argument("generator name collision: " + name);
    return intern(name);
}

int GenRegistry::id(const std::string& name) const {
    auto it = index_.find(name);
    if (it == index_.end()) throw std::out_of_range("unknown generator: " + name);
    return it->second;
}

bool GenRegistry::contains(const std::string& name) const { return index_.count(name) > 0; }

const std::string& GenRegistry::name(int id) const {
    if (id < 0 || id >= (int)names_.size()) throw std::out_of_range("generator id out of range");
    return names_[id];
}

Word reduce(const Word& raw) {
    Word out;
    out.reserve(raw.size());
    for (int g : raw) {
        if (!out.empty() && out.back() == g)
            out.pop_back();
        else
            out.push_back(g);
    }
    return out;
}

Word concat(const Word& a, const Word& b) {
    Word out = a;
    for (int g : b) {
        if (!out.empty() && out.back() == g)
            out.pop_back();
        else
            out.push_back(g);
    }
    return out;
}

Word adjoint(const Word& w) {
    Word out(w.rbegin(), w.rend());
    return out;
}

bool is_reduced(const Word& w) {
    for (size_t i = 1; i < w.size(); ++i)
        if (w[i] == w[i - 1]) return false;
    return true;
}

StarPoly StarPoly::monomial(const Word& w, const Coeff& c) {
    StarPoly p;
    p.add_term(w, c);
    return p;
}

int StarPoly::degree() const {
    int d = -1;
    for (const auto& [w, c] : terms_) d = std::max(d, (int)w.size());
    return d;
}

void StarPoly::add_term(const Word& w, const Coeff& c) {
    if (c.is_zero()) return;
    Word r = reduce(w);
    auto it = terms_.find(r);
    if (it == terms_.end()) {
        terms_.emplace(std::move(r), c);
    } else {
        it->second += c;
        if (it->second.is_zero()) terms_.erase(it);
    }
}

StarPoly StarPoly::operator-() const {
    StarPoly out;
    for (const auto& [w, c] : terms_) out.terms_.emplace(w, -c);
    return out;
}

StarPoly& StarPoly::operator+=(const StarPoly& o) {
    for (const auto& [w, c] : o.terms_) add_term(w, c);
    return *this;
}

StarPoly& StarPoly::operator-=(const StarPoly& o) {
    for (const auto& [w, c] : o.terms_) add_term(w, -c);
    return *this;
}

StarPoly operator*(const StarPoly& a, const StarPoly& b) {
    StarPoly out;
    for (const auto& [wa, ca] : a.terms())
        for (const auto& [wb, cb] : b.terms()) out.add_term(concat(wa, wb), ca * cb);
    return out;
}

StarPoly StarPoly::scaled(const Coeff& c) const {
    StarPoly out;
    if (c.is_zero()) return out;
    for (const auto& [w, t] : terms_) out.terms_.emplace(w, t * c);
    return out;
}

StarPoly StarPoly::star() const {
    StarPoly out;
    for (const auto& [w, c] : terms_) out.add_term(adjoint(w), c.conj());
    return out;
}

StarPoly StarPoly::substituted(const std::map<int, Word>& images) const {
    StarPoly out;
    for (const auto& [w, c] : terms_) {
        Word img;
        for (int g : w) {
            auto it = images.find(g);
            if (it == images.end())
                img.push_back(g);
            else
                img.insert(img.end(), it->second.begin(), it->second.end());
        }
        out.add_term(img, c);
    }
    return out;
}

Coeff StarPoly::eval_scalar(const std::map<int, int>& point) const {
    Coeff total;
    for (const auto& [w, c] : terms_) {
        int sign = 1;
        for (int g : w) {
            auto it = point.find(g);
            if (it == point.end()) throw std::out_of_range("eval_scalar: unassigned generator");
            if (it->second != 1 && it->second != -1)
                throw std::invalid_argument("eval_scalar: values must be +/-1");
            sign *= it->second;
        }
        total += (sign == 1) ? c : -c;
    }
    return total;
}

std::string StarPoly::str(const GenRegistry& reg) const {
    if (terms_.empty()) return "0";
    std::ostringstream os;
    bool first = true;
    for (const auto& [w, c] : terms_) {
        std::string cs;
        if (c.im.is_zero()) {
            cs = (c.re.is_negative() ? "-(" : "+(") + c.re.abs().str() + ")";
        } else if (c.re.is_zero()) {
            cs = (c.im.is_negative() ? "-(" : "+(") + c.im.abs().str() + ")i";
        } else {
            cs = "+(" + c.str() + ")";
        }
        if (!first) os << ' ';
        first = false;
        os << cs << ' ';
        if (w.empty()) {
            os << '1';
        } else {
            for (size_t i = 0; i < w.size(); ++i) {
                if (i) os << '.';
                os << reg.name(w[i]);
            }
        }
    }
    return os.str();
}

}  // namespace bcsg
