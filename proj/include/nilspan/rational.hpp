#pragma once

#include <gmpxx.h>

#include <cstdint>
#include <stdexcept>
#include <string>

namespace nilspan {

using Rational = mpq_class;
using Integer = mpz_class;

/// mpq_class(num, den) does not reduce the fraction; this does.
inline Rational make_rational(long num, long den) {
    Rational r(num, den);
    r.canonicalize();
    return r;
}
inline Rational make_rational(const Integer& num, const Integer& den) {
    Rational r(num, den);
    r.canonicalize();
    return r;
}

inline Integer floor_div(const Integer& a, const Integer& b) {
    Integer q;
    mpz_fdiv_q(q.get_mpz_t(), a.get_mpz_t(), b.get_mpz_t());
    return q;
}

/// Largest integer <= x.
inline Integer rfloor(const Rational& x) {
    return floor_div(x.get_num(), x.get_den());
}

/// x - floor(x), in [0,1).
inline Rational rfrac(const Rational& x) {
    return x - Rational(rfloor(x));
}

/// Height of a rational in lowest terms: max(|num|, |den|).
inline Integer rheight(const Rational& x) {
    Integer n = abs(x.get_num());
    Integer d = x.get_den();
    return n > d ? n : d;
}

/// Distance to the nearest integer, exact.
inline Rational rz_norm(const Rational& x) {
    Rational f = rfrac(x);
    Rational g = 1 - f;
    return f < g ? f : g;
}

inline bool is_integral(const Rational& x) { return x.get_den() == 1; }

/// Nearest integer; exact half-integers round toward zero.
inline Integer round_half_to_zero(const Rational& x) {
    Integer fl = rfloor(x);
    Rational f = x - Rational(fl);
    Rational half(1, 2);
    if (f > half) return fl + 1;
    if (f < half) return fl;
    // tie: pick whichever of fl, fl+1 is closer to zero
    return fl >= 0 ? fl : fl + 1;
}

/// Parses "a" or "a/b". Throws std::invalid_argument on malformed input.
inline Rational parse_rational(const std::string& s) {
    Rational r;
    if (r.set_str(s, 10) != 0)
        throw std::invalid_argument("malformed rational: '" + s + "'");
    r.canonicalize();
    return r;
}

inline std::string to_string(const Rational& x) { return x.get_str(); }

inline double to_double(const Rational& x) { return x.get_d(); }

inline Integer binomial_z(long n, int k) {
    if (k < 0) return 0;
    Integer r;
    if (n >= 0) {
        if (n < k) return 0;
        mpz_bin_uiui(r.get_mpz_t(), static_cast<unsigned long>(n),
                     static_cast<unsigned long>(k));
        return r;
    }
    // binom(n,k) = (-1)^k binom(k-n-1, k) for n < 0
    Integer top = Integer(k) - n - 1;
    mpz_bin_ui(r.get_mpz_t(), top.get_mpz_t(), static_cast<unsigned long>(k));
    return (k % 2 == 0) ? r : -r;
}

inline double binomial_d(long n, int k) {
    if (k < 0) return 0.0;
    double r = 1.0;
    for (int i = 0; i < k; ++i) r *= static_cast<double>(n - i) / (i + 1);
    return r;
}

}  // namespace nilspan
