#pragma once

#include <initializer_list>
#include <vector>

#include "ktri/rat.hpp"

namespace ktri {

// Univariate polynomial with exact rational coefficients, constant term first.
// Trailing zero coefficients are stripped on construction, so degree() is
// always exact; the zero polynomial has an empty coefficient vector.
class Poly {
  public:
    Poly() = default;
    Poly(std::initializer_list<Rat> coeffs) : c_(coeffs) { trim(); }
    explicit Poly(std::vector<Rat> coeffs) : c_(std::move(coeffs)) { trim(); }

    static Poly constant(Rat v) { return Poly{std::move(v)}; }
    /// (t - r), handy for rational roots.
    static Poly linear_root(const Rat& r) { return Poly{-r, Rat(1)}; }

    bool is_zero() const { return c_.empty(); }
    int degree() const { return static_cast<int>(c_.size()) - 1; }
    const std::vector<Rat>& coeffs() const { return c_; }
    const Rat& operator[](int i) const { return c_[static_cast<size_t>(i)]; }

    Rat eval(const Rat& t) const;
    int sign_at(const Rat& t) const { return sign_of(eval(t)); }

    Poly derivative() const;

    Poly operator+(const Poly& o) const;
    Poly operator-(const Poly& o) const;
    Poly operator*(const Poly& o) const;
    Poly operator-() const;
    bool operator==(const Poly& o) const { return c_ == o.c_; }

    /// Exact division; throws std::invalid_argument unless the remainder is zero.
    Poly divide_exact(const Poly& d) const;

    /// Monic form (leading coefficient 1); zero stays zero.
    Poly monic() const;

    std::string to_string() const;

  private:
    void trim();
    std::vector<Rat> c_;
};

/// Monic gcd via the Euclidean algorithm. gcd(0, 0) is 0.
Poly poly_gcd(Poly a, Poly b);

/// Largest square-free divisor, monic: f / gcd(f, f').
Poly square_free_part(const Poly& f);

/// Yun's square-free decomposition: f ~ prod out[i-1]^i (each factor monic,
/// possibly constant 1). Throws on the zero polynomial.
std::vector<Poly> square_free_decomposition(const Poly& f);

}  // namespace ktri
