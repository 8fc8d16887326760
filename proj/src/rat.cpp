#include "ktri/rat.hpp"

#include <cctype>
#include <cstdlib>

namespace ktri {

std::optional<Rat> parse_rat(const std::string& text) {
    if (text.empty()) return std::nullopt;
    std::size_t slash = text.find('/');
    auto is_int = [](const std::string& s) {
        if (s.empty()) return false;
        std::size_t i = (s[0] == '-' || s[0] == '+') ? 1 : 0;
        if (i == s.size()) return false;
        for (; i < s.size(); ++i) {
            if (!std::isdigit(static_cast<unsigned char>(s[i]))) return false;
        }
        return true;
    };
    try {
        if (slash == std::string::npos) {
            if (!is_int(text)) return std::nullopt;
            return Rat(mpz_class(text));
        }
        std::string num = text.substr(0, slash);
        std::string den = text.substr(slash + 1);
        if (!is_int(num) || !is_int(den)) return std::nullopt;
        mpz_class d(den);
        if (d == 0) return std::nullopt;
        Rat r(mpz_class(num), d);
        r.canonicalize();
        return r;
    } catch (const std::invalid_argument&) {
        return std::nullopt;
    }
}

std::string rat_to_string(const Rat& r) {
    if (r.get_den() == 1) return r.get_num().get_str();
    return r.get_num().get_str() + "/" + r.get_den().get_str();
}

std::string rat_to_decimal(const Rat& r, int significant_digits) {
    if (significant_digits < 1) significant_digits = 1;
    if (r == 0) return "0";
    const bool neg = r < 0;
    Rat a = neg ? Rat(-r) : r;

    // Decimal exponent e with 10^e <= a < 10^(e+1).
    int e = 0;
    Rat probe = 1;
    if (a >= 1) {
        while (probe * 10 <= a) {
            probe *= 10;
            ++e;
        }
    } else {
        while (probe > a) {
            probe /= 10;
            --e;
        }
    }

    // Round a / 10^(e - d + 1) half away from zero to an integer mantissa.
    Rat scale = 1;
    int shift = significant_digits - 1 - e;
    for (int i = 0; i < shift; ++i) scale *= 10;
    for (int i = 0; i < -shift; ++i) scale /= 10;
    Rat scaled = a * scale;
    mpz_class mant = scaled.get_num() / scaled.get_den();  // floor (operands > 0)
    if ((scaled - Rat(mant)) * 2 >= 1) mant += 1;

    std::string digits = mant.get_str();
    if (static_cast<int>(digits.size()) > significant_digits) {
        // Rounding carried into a new leading digit (e.g. 9.99 -> 10.0).
        digits.pop_back();
        ++e;
    }

    std::string out;
    int point_after = e + 1;  // digits before the decimal point
    if (point_after <= 0) {
        out = "0.";
        out.append(static_cast<std::size_t>(-point_after), '0');
        out += digits;
    } else if (point_after >= static_cast<int>(digits.size())) {
        out = digits;
        out.append(static_cast<std::size_t>(point_after - static_cast<int>(digits.size())), '0');
    } else {
        out = digits.substr(0, static_cast<std::size_t>(point_after)) + "." +
              digits.substr(static_cast<std::size_t>(point_after));
    }
    if (out.find('.') != std::string::npos) {
        while (out.back() == '0') out.pop_back();
        if (out.back() == '.') out.pop_back();
    }
    return neg ? "-" + out : out;
}

}  // namespace ktri
