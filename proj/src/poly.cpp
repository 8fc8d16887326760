#include "ktri/poly.hpp"

#include <sstream>
#include <stdexcept>

namespace ktri {

void Poly::trim() {
    while (!c_.empty() && c_.back() == 0) c_.pop_back();
}

Rat Poly::eval(const Rat& t) const {
    Rat acc(0);
    for (auto it = c_.rbegin(); it != c_.rend(); ++it) acc = acc * t + *it;
    return acc;
}

Poly Poly::derivative() const {
    if (c_.size() <= 1) return Poly();
    std::vector<Rat> d(c_.size() - 1);
    for (size_t i = 1; i < c_.size(); ++i) d[i - 1] = c_[i] * Rat(static_cast<long>(i));
    return Poly(std::move(d));
}

Poly Poly::operator+(const Poly& o) const {
    std::vector<Rat> r(std::max(c_.size(), o.c_.size()), Rat(0));
    for (size_t i = 0; i < c_.size(); ++i) r[i] += c_[i];
    for (size_t i = 0; i < o.c_.size(); ++i) r[i] += o.c_[i];
    return Poly(std::move(r));
}

Poly Poly::operator-(const Poly& o) const { return *this + (-o); }

Poly Poly::operator-() const {
    std::vector<Rat> r(c_);
    for (auto& x : r) x = -x;
    return Poly(std::move(r));
}

Poly Poly::operator*(const Poly& o) const {
    if (is_zero() || o.is_zero()) return Poly();
    std::vector<Rat> r(c_.size() + o.c_.size() - 1, Rat(0));
    for (size_t i = 0; i < c_.size(); ++i)
        for (size_t j = 0; j < o.c_.size(); ++j) r[i + j] += c_[i] * o.c_[j];
    return Poly(std::move(r));
}

Poly Poly::divide_exact(const Poly& d) const {
    if (d.is_zero()) throw std::invalid_argument("polynomial division by zero");
    std::vector<Rat> rem(c_);
    if (rem.size() < d.c_.size()) {
        if (is_zero()) return Poly();
        throw std::invalid_argument("inexact polynomial division");
    }
    std::vector<Rat> quot(rem.size() - d.c_.size() + 1, Rat(0));
    const Rat& lead = d.c_.back();
    for (size_t i = quot.size(); i-- > 0;) {
        Rat q = rem[i + d.c_.size() - 1] / lead;
        quot[i] = q;
        if (q != 0)
            for (size_t j = 0; j < d.c_.size(); ++j) rem[i + j] -= q * d.c_[j];
    }
    for (const auto& x : rem)
        if (x != 0) throw std::invalid_argument("inexact polynomial division");
    return Poly(std::move(quot));
}

Poly Poly::monic() const {
    if (is_zero()) return Poly();
    std::vector<Rat> r(c_);
    const Rat lead = r.back();
    for (auto& x : r) x /= lead;
    return Poly(std::move(r));
}

std::string Poly::to_string() const {
    if (is_zero()) return "0";
    std::ostringstream os;
    for (size_t i = c_.size(); i-- > 0;) {
        if (c_[i] == 0 && c_.size() > 1) continue;
        if (os.tellp() > 0) os << " + ";
        os << rat_to_string(c_[i]);
        if (i >= 1) os << "*t";
        if (i >= 2) os << "^" << i;
    }
    return os.str();
}

Poly poly_gcd(Poly a, Poly b) {
    while (!b.is_zero()) {
        // Euclidean remainder, then normalize to keep coefficients tame.
        std::vector<Rat> rem(a.coeffs());
        const auto& dc = b.coeffs();
        while (rem.size() >= dc.size() && !rem.empty()) {
            Rat q = rem.back() / dc.back();
            size_t off = rem.size() - dc.size();
            for (size_t j = 0; j < dc.size(); ++j) rem[off + j] -= q * dc[j];
            while (!rem.empty() && rem.back() == 0) rem.pop_back();
        }
        a = std::move(b);
        b = Poly(std::move(rem)).monic();
    }
    return a.monic();
}

Poly square_free_part(const Poly& f) {
    if (f.is_zero()) throw std::invalid_argument("square-free part of zero polynomial");
    if (f.degree() == 0) return Poly::constant(Rat(1));
    Poly g = poly_gcd(f, f.derivative());
    return f.divide_exact(g).monic();
}

std::vector<Poly> square_free_decomposition(const Poly& f) {
    if (f.is_zero()) throw std::invalid_argument("square-free decomposition of zero polynomial");
    std::vector<Poly> out;
    if (f.degree() == 0) return out;
    // Yun's algorithm on the monic form.
    Poly a = f.monic();
    Poly d = a.derivative();
    Poly g = poly_gcd(a, d);
    Poly w = a.divide_exact(g);
    Poly y = d.divide_exact(g);
    while (w.degree() > 0) {
        Poly z = y - w.derivative();
        Poly fi = poly_gcd(w, z);
        out.push_back(fi);
        w = w.divide_exact(fi);
        y = z.divide_exact(fi);
    }
    return out;
}

}  // namespace ktri
