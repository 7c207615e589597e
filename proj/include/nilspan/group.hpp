#pragma once

#include <cmath>
#include <cstdlib>
#include <optional>
#include <stdexcept>
#include <vector>

#include "nilspan/presentation.hpp"
#include "nilspan/scalar.hpp"

namespace nilspan {

struct FlavorMismatch : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct SupportViolation : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Group element in psi_V coordinates. S is Rational (exact flavor) or
/// double (float flavor).
template <class S>
struct GroupElement {
    const MalcevPresentation* pres = nullptr;
    std::vector<S> c;

    GroupElement() = default;
    GroupElement(const MalcevPresentation& p, std::vector<S> coords)
        : pres(&p), c(std::move(coords)) {
        if (static_cast<int>(c.size()) != p.dim())
            throw std::invalid_argument("coordinate vector has wrong length");
    }

    bool operator==(const GroupElement& o) const {
        return pres == o.pres && c == o.c;
    }
};

template <class S>
GroupElement<S> identity(const MalcevPresentation& p) {
    return {p, p.template identity_coords<S>()};
}

template <class S>
GroupElement<S> multiply(const GroupElement<S>& a, const GroupElement<S>& b) {
    if (a.pres != b.pres)
        throw FlavorMismatch("multiply: elements of different presentations");
    return {*a.pres, a.pres->template multiply<S>(a.c, b.c)};
}

inline GroupElement<double> multiply_fast(const GroupElement<double>& a,
                                          const GroupElement<double>& b) {
    return {*a.pres, a.pres->multiply_fast(a.c, b.c)};
}

template <class S>
GroupElement<S> inverse(const GroupElement<S>& a) {
    return {*a.pres, a.pres->template inverse<S>(a.c)};
}

template <class S>
GroupElement<S> power(const GroupElement<S>& g, long e) {
    if (e < 0) return power(inverse(g), -e);
    GroupElement<S> acc = identity<S>(*g.pres);
    GroupElement<S> base = g;
    while (e > 0) {
        if (e & 1) acc = multiply(acc, base);
        base = multiply(base, base);
        e >>= 1;
    }
    return acc;
}

template <class S>
bool is_lattice_element(const GroupElement<S>& g) {
    for (const S& x : g.c)
        if (!ScalarOps<S>::is_integer(x)) return false;
    return true;
}

/// Point of G/Gamma represented in the fundamental domain [0,1)^m.
template <class S>
struct ManifoldPoint {
    const MalcevPresentation* pres = nullptr;
    std::vector<S> c;
};

/// Writes g = point * gamma with point in the fundamental domain and gamma in
/// the lattice. Coordinates are peeled lowest index first: right-multiplying
/// by exp(t V_i) only disturbs coordinates after i, so one pass suffices.
template <class S>
std::pair<ManifoldPoint<S>, GroupElement<S>> reduce_mod_lattice(
    const GroupElement<S>& g) {
    const auto& P = *g.pres;
    const int m = P.dim();
    GroupElement<S> cur = g;
    GroupElement<S> gamma = identity<S>(P);
    for (int i = 0; i < m; ++i) {
        S fl = ScalarOps<S>::floor(cur.c[i]);
        if (ScalarOps<S>::is_zero(fl)) continue;
        std::vector<S> e = P.template identity_coords<S>();
        e[i] = -fl;
        cur = multiply(cur, GroupElement<S>{P, e});
        e[i] = fl;
        gamma = multiply(GroupElement<S>{P, e}, gamma);
    }
    return {ManifoldPoint<S>{&P, cur.c}, gamma};
}

template <class S>
GroupElement<S> as_element(const ManifoldPoint<S>& x) {
    return {*x.pres, x.c};
}

/// Computable stand-in for the word metric d_G: the max-norm of
/// psi_V(a b^{-1}), which is the stated upper bound for the paper's largest
/// right-invariant metric.
inline double dist(const GroupElement<double>& a, const GroupElement<double>& b) {
    auto ab = multiply(a, inverse(b));
    double r = 0;
    for (double x : ab.c) r = std::max(r, std::abs(x));
    return r;
}

inline double dist_to_id(const GroupElement<double>& a) {
    double r = 0;
    for (double x : a.c) r = std::max(r, std::abs(x));
    return r;
}

/// Surrogate for d_{G/Gamma}: minimizes dist(x, y*gamma) over lattice
/// translates gamma with coordinates in {-1,0,1}^m.
inline double manifold_dist(const ManifoldPoint<double>& x,
                            const ManifoldPoint<double>& y) {
    const auto& P = *x.pres;
    const int m = P.dim();
    if (m > 12) throw std::invalid_argument("manifold_dist: dimension too large");
    GroupElement<double> gx{P, x.c};
    GroupElement<double> gy{P, y.c};
    double best = dist(gx, gy);
    std::vector<double> t(m, -1.0);
    while (true) {
        bool all_zero = true;
        for (double v : t)
            if (v != 0.0) all_zero = false;
        if (!all_zero) {
            GroupElement<double> gamma{P, t};
            best = std::min(best, dist(gx, multiply(gy, gamma)));
        }
        int i = 0;
        for (; i < m; ++i) {
            if (t[i] < 1.0) { t[i] += 1.0; break; }
            t[i] = -1.0;
        }
        if (i == m) break;
    }
    return best;
}

/// Horizontal character: integer vector supported on the first m - m_2
/// coordinates, evaluated as a . psi_V(g) mod 1.
struct HorizontalCharacter {
    const MalcevPresentation* pres = nullptr;
    std::vector<long> a;

    HorizontalCharacter() = default;
    HorizontalCharacter(const MalcevPresentation& p, std::vector<long> coeffs)
        : pres(&p), a(std::move(coeffs)) {
        if (static_cast<int>(a.size()) != p.dim())
            throw std::invalid_argument("character vector has wrong length");
        for (int i = p.horizontal_dim(); i < p.dim(); ++i)
            if (a[i] != 0)
                throw SupportViolation(
                    "horizontal character must vanish beyond coordinate " +
                    std::to_string(p.horizontal_dim()));
    }

    long modulus() const {
        long r = 0;
        for (long v : a) r = std::max(r, std::labs(v));
        return r;
    }
    bool is_trivial() const { return modulus() == 0; }

    /// a . v as an exact rational linear functional on the Lie algebra.
    Rational apply(const std::vector<Rational>& v) const {
        Rational r(0);
        for (size_t i = 0; i < a.size(); ++i)
            if (a[i] != 0) r += Rational(a[i]) * v[i];
        return r;
    }
    double apply(const std::vector<double>& v) const {
        double r = 0;
        for (size_t i = 0; i < a.size(); ++i)
            if (a[i] != 0) r += static_cast<double>(a[i]) * v[i];
        return r;
    }
};

/// Fractional part of a . psi_V(g); well-defined on G/Gamma.
template <class S>
S char_eval(const HorizontalCharacter& eta, const GroupElement<S>& g) {
    if (eta.pres != g.pres)
        throw FlavorMismatch("char_eval: presentation mismatch");
    S dot = ScalarOps<S>::zero();
    for (size_t i = 0; i < eta.a.size(); ++i)
        if (eta.a[i] != 0) dot += ScalarOps<S>::from_long(eta.a[i]) * g.c[i];
    return ScalarOps<S>::frac(dot);
}

template <class S>
S char_eval(const HorizontalCharacter& eta, const ManifoldPoint<S>& x) {
    return char_eval(eta, GroupElement<S>{*x.pres, x.c});
}

/// Smallest 1 <= r <= R with g^r in the lattice, if any. Exact flavor only.
inline std::optional<long> is_rational_element(const GroupElement<Rational>& g,
                                               long R) {
    GroupElement<Rational> acc = g;
    for (long r = 1; r <= R; ++r) {
        if (is_lattice_element(acc)) return r;
        if (r < R) acc = multiply(acc, g);
    }
    return std::nullopt;
}

template <class S>
GroupElement<double> to_float(const GroupElement<S>& g) {
    std::vector<double> c;
    c.reserve(g.c.size());
    for (const S& x : g.c) c.push_back(ScalarOps<S>::to_double(x));
    return {*g.pres, std::move(c)};
}

inline GroupElement<Rational> to_exact(const GroupElement<Rational>& g) { return g; }

}  // namespace nilspan
