#pragma once

#include <cstdint>
#include <stdexcept>
#include <vector>

#include "nilspan/rational.hpp"

namespace nilspan {

/// gcd(a,b) together with x,y such that a*x + b*y = g, g >= 0.
inline Integer xgcd(const Integer& a, const Integer& b, Integer& x, Integer& y) {
    Integer g;
    mpz_gcdext(g.get_mpz_t(), x.get_mpz_t(), y.get_mpz_t(), a.get_mpz_t(),
               b.get_mpz_t());
    return g;
}

inline long xgcd_long(long a, long b, long& x, long& y) {
    if (b == 0) {
        x = (a >= 0) ? 1 : -1;
        y = 0;
        return a >= 0 ? a : -a;
    }
    long x1, y1;
    long g = xgcd_long(b, a % b, x1, y1);
    x = y1;
    y = x1 - (a / b) * y1;
    return g;
}

/// Primitive integer kernel of a nonzero row vector a: a basis of
/// {x in Z^n : a.x = 0} of rank n-1 (n>=1), obtained from the unimodular
/// column transform that maps a to (g,0,...,0). Row i of the result is one
/// basis vector.
inline std::vector<std::vector<Integer>> integer_kernel_basis(
    const std::vector<Integer>& a) {
    const int n = static_cast<int>(a.size());
    // columns of U, as vectors; start with identity
    std::vector<std::vector<Integer>> cols(n, std::vector<Integer>(n, 0));
    for (int i = 0; i < n; ++i) cols[i][i] = 1;
    std::vector<Integer> r = a;  // r[i] = a . cols[i]

    int pivot = -1;
    for (int i = 0; i < n; ++i)
        if (r[i] != 0) { pivot = i; break; }
    if (pivot < 0) throw std::invalid_argument("integer_kernel_basis: zero vector");
    if (pivot != 0) { std::swap(cols[0], cols[pivot]); std::swap(r[0], r[pivot]); }

    for (int i = 1; i < n; ++i) {
        if (r[i] == 0) continue;
        Integer x, y;
        Integer g = xgcd(r[0], r[i], x, y);
        Integer q0 = r[0] / g, qi = r[i] / g;
        std::vector<Integer> c0(n), ci(n);
        for (int k = 0; k < n; ++k) {
            c0[k] = x * cols[0][k] + y * cols[i][k];
            ci[k] = -qi * cols[0][k] + q0 * cols[i][k];
        }
        cols[0] = c0;
        cols[i] = ci;
        r[0] = g;
        r[i] = 0;
    }

    std::vector<std::vector<Integer>> kernel;
    kernel.reserve(n - 1);
    for (int i = 1; i < n; ++i) kernel.push_back(cols[i]);
    return kernel;
}

/// Solves M x = b exactly over the rationals by Gaussian elimination, where
/// M is rows x cols with rows >= cols and full column rank. Throws if the
/// system is inconsistent or rank-deficient.
inline std::vector<Rational> solve_rational(
    std::vector<std::vector<Rational>> M, std::vector<Rational> b) {
    const int rows = static_cast<int>(M.size());
    const int cols = rows ? static_cast<int>(M[0].size()) : 0;
    int rank = 0;
    std::vector<int> pivot_row(cols, -1);
    for (int c = 0; c < cols; ++c) {
        int pr = -1;
        for (int r = rank; r < rows; ++r)
            if (M[r][c] != 0) { pr = r; break; }
        if (pr < 0) throw std::runtime_error("solve_rational: rank-deficient system");
        std::swap(M[rank], M[pr]);
        std::swap(b[rank], b[pr]);
        Rational inv = M[rank][c];
        for (int cc = c; cc < cols; ++cc) M[rank][cc] /= inv;
        b[rank] /= inv;
        for (int r = 0; r < rows; ++r) {
            if (r == rank || M[r][c] == 0) continue;
            Rational f = M[r][c];
            for (int cc = c; cc < cols; ++cc) M[r][cc] -= f * M[rank][cc];
            b[r] -= f * b[rank];
        }
        pivot_row[c] = rank;
        ++rank;
    }
    for (int r = rank; r < rows; ++r)
        if (b[r] != 0) throw std::runtime_error("solve_rational: inconsistent system");
    std::vector<Rational> x(cols);
    for (int c = 0; c < cols; ++c) x[c] = b[pivot_row[c]];
    return x;
}

}  // namespace nilspan
