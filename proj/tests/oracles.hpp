// Independent oracles used by the unit and acceptance suites. Everything in
// this header is deliberately naive: direct definitions, brute force, no
// sharing with the code under test.
#pragma once

#include <array>
#include <cstdint>
#include <random>
#include <vector>

#include "nilspan/rational.hpp"

namespace oracle {

using nilspan::Integer;
using nilspan::Rational;

// ---- Heisenberg via 3x3 unitriangular matrices ----------------------------

// matrix coords (x,y,z) of [[1,x,z],[0,1,y],[0,0,1]]
template <class S>
struct UniTri3 {
    S x, y, z;
};

template <class S>
UniTri3<S> mat_mul(const UniTri3<S>& a, const UniTri3<S>& b) {
    return {a.x + b.x, a.y + b.y, a.z + b.z + a.x * b.y};
}

template <class S>
UniTri3<S> mat_inv(const UniTri3<S>& a) {
    return {-a.x, -a.y, a.x * a.y - a.z};
}

// psi coords (x, y, z - x*y)  <->  matrix coords (x, y, z)
template <class S>
UniTri3<S> psi_to_mat(const std::array<S, 3>& p) {
    return {p[0], p[1], p[2] + p[0] * p[1]};
}

template <class S>
std::array<S, 3> mat_to_psi(const UniTri3<S>& m) {
    return {m.x, m.y, m.z - m.x * m.y};
}

template <class S>
std::array<S, 3> heis_mul_psi(const std::array<S, 3>& a, const std::array<S, 3>& b) {
    return mat_to_psi(mat_mul(psi_to_mat(a), psi_to_mat(b)));
}

template <class S>
std::array<S, 3> heis_inv_psi(const std::array<S, 3>& a) {
    return mat_to_psi(mat_inv(psi_to_mat(a)));
}

// ---- arithmetic functions by trial division --------------------------------

inline int mobius_naive(long n) {
    int mu = 1;
    for (long p = 2; p * p <= n; ++p) {
        if (n % p == 0) {
            n /= p;
            if (n % p == 0) return 0;
            mu = -mu;
        }
    }
    if (n > 1) mu = -mu;
    return mu;
}

inline int liouville_naive(long n) {
    int lam = 1;
    for (long p = 2; p * p <= n; ++p)
        while (n % p == 0) {
            n /= p;
            lam = -lam;
        }
    if (n > 1) lam = -lam;
    return lam;
}

inline bool is_prime_naive(long n) {
    if (n < 2) return false;
    for (long p = 2; p * p <= n; ++p)
        if (n % p == 0) return false;
    return true;
}

inline std::vector<long> primes_in_naive(long lo, long hi) {
    std::vector<long> out;
    for (long n = std::max(2L, lo); n <= hi; ++n)
        if (is_prime_naive(n)) out.push_back(n);
    return out;
}

// distinct prime divisors of n that lie in the sorted list P
inline int count_div_in(long n, const std::vector<long>& P) {
    int c = 0;
    for (long p : P) {
        if (p > n) break;
        if (n % p == 0) ++c;
    }
    return c;
}

// ---- deterministic random rationals ----------------------------------------

struct RatGen {
    std::mt19937_64 rng;
    explicit RatGen(uint64_t seed) : rng(seed) {}
    Rational operator()(long num_range = 20, long den_range = 8) {
        long num = static_cast<long>(rng() % (2 * num_range + 1)) - num_range;
        long den = static_cast<long>(rng() % den_range) + 1;
        return nilspan::make_rational(num, den);
    }
};

}  // namespace oracle
