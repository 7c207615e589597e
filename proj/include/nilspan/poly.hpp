#pragma once

#include <cstdint>
#include <map>
#include <vector>

#include "nilspan/rational.hpp"

namespace nilspan {

/// Sparse multivariate polynomial with rational coefficients. Used to carry
/// the symbolic group law in Mal'cev coordinates: m polynomials in the 2m
/// variables (x_1..x_m, y_1..y_m). Exponents stay tiny (total degree is
/// bounded by the filtration degree), so a map keyed by the exponent vector
/// is plenty.
class MultiPoly {
public:
    using Monomial = std::vector<uint8_t>;

    MultiPoly() = default;
    explicit MultiPoly(int nvars) : nvars_(nvars) {}

    static MultiPoly constant(int nvars, const Rational& c) {
        MultiPoly p(nvars);
        if (c != 0) p.terms_[Monomial(nvars, 0)] = c;
        return p;
    }
    static MultiPoly variable(int nvars, int idx) {
        MultiPoly p(nvars);
        Monomial mo(nvars, 0);
        mo[idx] = 1;
        p.terms_[mo] = 1;
        return p;
    }

    int nvars() const { return nvars_; }
    bool is_zero() const { return terms_.empty(); }
    const std::map<Monomial, Rational>& terms() const { return terms_; }

    MultiPoly& operator+=(const MultiPoly& o) {
        for (const auto& [mo, c] : o.terms_) add_term(mo, c);
        return *this;
    }
    MultiPoly& operator-=(const MultiPoly& o) {
        for (const auto& [mo, c] : o.terms_) add_term(mo, -c);
        return *this;
    }
    friend MultiPoly operator+(MultiPoly a, const MultiPoly& b) { return a += b; }
    friend MultiPoly operator-(MultiPoly a, const MultiPoly& b) { return a -= b; }

    friend MultiPoly operator*(const MultiPoly& a, const MultiPoly& b) {
        MultiPoly r(a.nvars_);
        for (const auto& [ma, ca] : a.terms_)
            for (const auto& [mb, cb] : b.terms_) {
                Monomial mo(ma);
                for (size_t i = 0; i < mo.size(); ++i) mo[i] += mb[i];
                r.add_term(mo, ca * cb);
            }
        return r;
    }

    MultiPoly& operator*=(const Rational& c) {
        if (c == 0) { terms_.clear(); return *this; }
        for (auto& [mo, v] : terms_) v *= c;
        return *this;
    }
    friend MultiPoly operator*(MultiPoly a, const Rational& c) { return a *= c; }
    friend MultiPoly operator*(const Rational& c, MultiPoly a) { return a *= c; }
    MultiPoly operator-() const {
        MultiPoly r = *this;
        for (auto& [mo, v] : r.terms_) v = -v;
        return r;
    }

    bool operator==(const MultiPoly& o) const { return terms_ == o.terms_; }

    /// Exact evaluation; S must support *= and += with itself and
    /// construction from Rational via ScalarOps-style conversion at the call
    /// site. Here we take pre-converted variable values.
    template <class S>
    S eval(const std::vector<S>& vars, S (*from_rat)(const Rational&)) const {
        S acc = from_rat(Rational(0));
        for (const auto& [mo, c] : terms_) {
            S t = from_rat(c);
            for (size_t i = 0; i < mo.size(); ++i)
                for (int e = 0; e < mo[i]; ++e) t *= vars[i];
            acc += t;
        }
        return acc;
    }

    Integer max_height() const {
        Integer h = 0;
        for (const auto& [mo, c] : terms_) {
            Integer hh = rheight(c);
            if (hh > h) h = hh;
        }
        return h;
    }

private:
    void add_term(const Monomial& mo, const Rational& c) {
        if (c == 0) return;
        auto it = terms_.find(mo);
        if (it == terms_.end()) {
            terms_.emplace(mo, c);
        } else {
            it->second += c;
            if (it->second == 0) terms_.erase(it);
        }
    }

    int nvars_ = 0;
    std::map<Monomial, Rational> terms_;
};

/// Flattened form of a MultiPoly for tight evaluation loops over doubles.
struct CompiledPoly {
    struct Term {
        double coef;
        std::vector<std::pair<uint16_t, uint8_t>> powers;  // (var, exponent)
    };
    std::vector<Term> terms;

    static CompiledPoly compile(const MultiPoly& p) {
        CompiledPoly cp;
        for (const auto& [mo, c] : p.terms()) {
            Term t;
            t.coef = c.get_d();
            for (size_t i = 0; i < mo.size(); ++i)
                if (mo[i] > 0) t.powers.push_back({static_cast<uint16_t>(i), mo[i]});
            cp.terms.push_back(std::move(t));
        }
        return cp;
    }

    double eval(const double* vars) const {
        double acc = 0.0;
        for (const Term& t : terms) {
            double v = t.coef;
            for (auto [i, e] : t.powers)
                for (int k = 0; k < e; ++k) v *= vars[i];
            acc += v;
        }
        return acc;
    }
};

}  // namespace nilspan
