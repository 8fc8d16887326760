#pragma once

#include <gmpxx.h>

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>

namespace ktri {

// Exact rational scalar. All core geometry and root bookkeeping runs on these;
// floating point only appears in report output.
using Rat = mpq_class;

inline Rat make_rat(long num, long den = 1) {
    if (den == 0) throw std::invalid_argument("rational with zero denominator");
    Rat r(num, den);
    r.canonicalize();
    return r;
}

inline Rat make_rat(const mpz_class& num, const mpz_class& den) {
    if (den == 0) throw std::invalid_argument("rational with zero denominator");
    Rat r(num, den);
    r.canonicalize();
    return r;
}

inline int sign_of(const Rat& r) { return sgn(r); }

inline bool is_integer(const Rat& r) { return r.get_den() == 1; }

/// Parses "p", "-p", or "p/q". Returns nullopt on malformed input.
std::optional<Rat> parse_rat(const std::string& text);

/// Canonical text form: "p" when integral, otherwise "p/q" with q > 0.
std::string rat_to_string(const Rat& r);

/// Decimal rendering with the given number of significant digits,
/// round-half-away. Exact values shorter than the budget print exactly.
std::string rat_to_decimal(const Rat& r, int significant_digits);

}  // namespace ktri
