#ifndef CBD_RATIONAL_HPP
#define CBD_RATIONAL_HPP

#include <gmpxx.h>

#include <cmath>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace cbd {

/// Exact probability arithmetic. mpq_class keeps values canonical (lowest
/// terms, positive denominator) after every operation.
using Rational = mpq_class;

inline Rational make_rational(long num, unsigned long den = 1) {
    Rational r(num, den);
    r.canonicalize();
    return r;
}

/// Canonical "p/q" rendering; integers are rendered as "p/1" so that every
/// emitted probability has the same shape.
inline std::string to_string(const Rational& r) {
    return r.get_num().get_str() + "/" + r.get_den().get_str();
}

inline double to_double(const Rational& r) { return r.get_d(); }

namespace detail {

inline bool all_digits(std::string_view s) {
    if (s.empty()) return false;
    for (char c : s)
        if (c < '0' || c > '9') return false;
    return true;
}

inline std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t')) s.remove_suffix(1);
    return s;
}

inline mpz_class pow10(unsigned long e) {
    mpz_class r;
    mpz_ui_pow_ui(r.get_mpz_t(), 10, e);
    return r;
}

}  // namespace detail

/// Parses "p/q", an integer, or a decimal literal ("0.25", "-1.5e-3") into
/// the exact rational it denotes. Returns nullopt on malformed input or a
/// zero denominator.
inline std::optional<Rational> parse_rational(std::string_view text) {
    using detail::all_digits;
    std::string_view s = detail::trim(text);
    if (s.empty()) return std::nullopt;

    bool negative = false;
    if (s.front() == '+' || s.front() == '-') {
        negative = s.front() == '-';
        s.remove_prefix(1);
    }
    if (s.empty()) return std::nullopt;

    if (auto slash = s.find('/'); slash != std::string_view::npos) {
        std::string_view n = s.substr(0, slash), d = s.substr(slash + 1);
        if (!all_digits(n) || !all_digits(d)) return std::nullopt;
        mpz_class den(std::string(d), 10);
        if (den == 0) return std::nullopt;
        Rational r(mpz_class(std::string(n), 10), den);
        r.canonicalize();
        return negative ? Rational(-r) : r;
    }

    long exponent = 0;
    if (auto e = s.find_first_of("eE"); e != std::string_view::npos) {
        std::string_view exp = s.substr(e + 1);
        s = s.substr(0, e);
        bool exp_neg = false;
        if (!exp.empty() && (exp.front() == '+' || exp.front() == '-')) {
            exp_neg = exp.front() == '-';
            exp.remove_prefix(1);
        }
        if (!all_digits(exp) || exp.size() > 6) return std::nullopt;
        exponent = std::stol(std::string(exp));
        if (exp_neg) exponent = -exponent;
    }

    std::string_view int_part = s, frac_part;
    if (auto dot = s.find('.'); dot != std::string_view::npos) {
        int_part = s.substr(0, dot);
        frac_part = s.substr(dot + 1);
    }
    if (int_part.empty() && frac_part.empty()) return std::nullopt;
    if (!int_part.empty() && !all_digits(int_part)) return std::nullopt;
    if (!frac_part.empty() && !all_digits(frac_part)) return std::nullopt;

    std::string digits = std::string(int_part) + std::string(frac_part);
    mpz_class num(digits.empty() ? std::string("0") : digits, 10);
    long scale = static_cast<long>(frac_part.size()) - exponent;
    Rational r;
    if (scale >= 0)
        r = Rational(num, detail::pow10(static_cast<unsigned long>(scale)));
    else
        r = Rational(num * detail::pow10(static_cast<unsigned long>(-scale)));
    r.canonicalize();
    return negative ? Rational(-r) : r;
}

inline Rational parse_rational_or_throw(std::string_view text) {
    auto r = parse_rational(text);
    if (!r) throw std::invalid_argument("not a rational number: '" + std::string(text) + "'");
    return *r;
}

/// The exact value of a finite long double.
inline Rational exact_from(long double x) {
    if (!std::isfinite(x)) throw std::invalid_argument("non-finite value");
    if (x == 0.0L) return Rational(0);
    int exp = 0;
    long double mant = std::frexp(x, &exp);  // x = mant * 2^exp, |mant| in [0.5, 1)
    // 64 bits cover the long double mantissa on x86; other formats are narrower.
    long double scaled = std::ldexp(std::fabs(mant), 64);
    auto hi = static_cast<std::uint64_t>(scaled);
    mpz_class m(static_cast<unsigned long>(hi >> 32));
    m <<= 32;
    m += static_cast<unsigned long>(hi & 0xffffffffULL);
    Rational r(m);
    int shift = exp - 64;
    if (shift >= 0)
        r *= Rational(mpz_class(1) << shift);
    else
        r /= Rational(mpz_class(1) << (-shift));
    r.canonicalize();
    return mant < 0 ? Rational(-r) : r;
}

/// Closest rational with denominator <= max_den (ties go to the smaller
/// denominator). Uses convergents and the best semiconvergent of the
/// continued fraction expansion.
inline Rational nearest_with_denominator(const Rational& x, const mpz_class& max_den) {
    if (max_den < 1) throw std::invalid_argument("denominator bound must be >= 1");
    if (x.get_den() <= max_den) return x;

    mpz_class p0 = 0, q0 = 1, p1 = 1, q1 = 0;
    mpz_class n = x.get_num(), d = x.get_den();
    while (true) {
        mpz_class a;
        mpz_fdiv_q(a.get_mpz_t(), n.get_mpz_t(), d.get_mpz_t());
        mpz_class q2 = q0 + a * q1;
        if (q2 > max_den) break;
        mpz_class p2 = p0 + a * p1;
        p0 = p1; q0 = q1; p1 = p2; q1 = q2;
        mpz_class r = n - a * d;
        n = d;
        d = r;
        if (d == 0) break;
    }
    // Largest admissible semiconvergent between p0/q0 and p1/q1.
    mpz_class k = (max_den - q0) / q1;
    Rational semi(p0 + k * p1, q0 + k * q1);
    Rational conv(p1, q1);
    semi.canonicalize();
    conv.canonicalize();
    Rational ds = abs(semi - x), dc = abs(conv - x);
    if (ds < dc) return semi;
    return conv;
}

inline Rational nearest_with_denominator(long double x, long max_den) {
    return nearest_with_denominator(exact_from(x), mpz_class(max_den));
}

}  // namespace cbd

#endif
