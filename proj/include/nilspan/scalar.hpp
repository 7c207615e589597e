#pragma once

#include <cmath>
#include <cstdint>

#include "nilspan/rational.hpp"

namespace nilspan {

/// Uniform interface over the two scalar flavors: exact rationals (lattice
/// work, factorization) and doubles (bulk evaluation). Conversions between
/// flavors are explicit at call sites via from_rational/to_double.
template <class S>
struct ScalarOps;

template <>
struct ScalarOps<Rational> {
    static constexpr bool exact = true;
    static Rational zero() { return Rational(0); }
    static Rational from_rational(const Rational& q) { return q; }
    static Rational from_long(long v) { return Rational(v); }
    static double to_double(const Rational& x) { return x.get_d(); }
    static Rational floor(const Rational& x) { return Rational(rfloor(x)); }
    static Rational frac(const Rational& x) { return rfrac(x); }
    static double rz_norm_d(const Rational& x) { return nilspan::rz_norm(x).get_d(); }
    static bool is_zero(const Rational& x) { return x == 0; }
    static bool is_integer(const Rational& x) { return is_integral(x); }
    static Rational binomial(long n, int k) { return Rational(binomial_z(n, k)); }
};

template <>
struct ScalarOps<double> {
    static constexpr bool exact = false;
    static double zero() { return 0.0; }
    static double from_rational(const Rational& q) { return q.get_d(); }
    static double from_long(long v) { return static_cast<double>(v); }
    static double to_double(double x) { return x; }
    static double floor(double x) { return std::floor(x); }
    static double frac(double x) {
        double f = x - std::floor(x);
        if (f >= 1.0) f = 0.0;  // guard against rounding at the boundary
        return f;
    }
    static double rz_norm_d(double x) {
        double f = frac(x);
        return f < 0.5 ? f : 1.0 - f;
    }
    static bool is_zero(double x) { return x == 0.0; }
    static bool is_integer(double x) { return x == std::floor(x); }
    static double binomial(long n, int k) { return binomial_d(n, k); }
};

/// Tolerance for mod-1 float comparisons throughout the project.
inline constexpr double kMod1Tol = 1e-9;

}  // namespace nilspan
