#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "nilspan/group.hpp"
#include "nilspan/presentation.hpp"

namespace nilspan {

struct FitResidualError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct MembershipViolation : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Two-parameter polynomial sequence in binomial-coefficient coordinates:
/// psi_V(g(n,h)) = sum_{j+k<=d} w_{jk} binom(n,j) binom(h,k), with
/// (w_{jk})_i = 0 for i <= m - m_{j+k} (the filtration membership condition).
template <class S>
class PolySeq2 {
public:
    PolySeq2() = default;
    explicit PolySeq2(const MalcevPresentation& p)
        : pres_(&p), d_(p.degree()), w_((p.degree() + 1) * (p.degree() + 1),
                                        p.identity_coords<S>()) {
        if (d_ > 8) throw std::invalid_argument("degree > 8 unsupported");
    }

    const MalcevPresentation& presentation() const { return *pres_; }
    int degree() const { return d_; }

    const std::vector<S>& coeff(int j, int k) const { return w_[idx(j, k)]; }
    void set_coeff(int j, int k, std::vector<S> v) {
        if (j < 0 || k < 0 || j + k > d_)
            throw std::invalid_argument("coefficient index out of range");
        if (static_cast<int>(v.size()) != pres_->dim())
            throw std::invalid_argument("coefficient vector has wrong length");
        w_[idx(j, k)] = std::move(v);
    }

    /// First index that must vanish is 0-based m - m_{j+k}; returns the
    /// offending (j,k,i) if the membership condition fails.
    std::optional<std::string> membership_violation() const {
        for (int j = 0; j <= d_; ++j)
            for (int k = 0; j + k <= d_; ++k) {
                int cutoff = pres_->dim() - pres_->m_level(j + k);
                for (int i = 0; i < cutoff; ++i)
                    if (!ScalarOps<S>::is_zero(w_[idx(j, k)][i]))
                        return "coefficient (" + std::to_string(j) + "," +
                               std::to_string(k) + ") has nonzero entry " +
                               std::to_string(i + 1) + " below the G_" +
                               std::to_string(j + k) + " cutoff";
            }
        return std::nullopt;
    }
    void require_membership(const char* who) const {
        if (auto v = membership_violation())
            throw MembershipViolation(std::string(who) + ": " + *v);
    }

    GroupElement<S> eval(long n, long h) const {
        std::vector<S> c = pres_->identity_coords<S>();
        for (int j = 0; j <= d_; ++j) {
            S bn = ScalarOps<S>::binomial(n, j);
            if (ScalarOps<S>::is_zero(bn)) continue;
            for (int k = 0; j + k <= d_; ++k) {
                S bh = ScalarOps<S>::binomial(h, k);
                if (ScalarOps<S>::is_zero(bh)) continue;
                const auto& w = w_[idx(j, k)];
                S b = bn * bh;
                for (int i = 0; i < pres_->dim(); ++i) c[i] += w[i] * b;
            }
        }
        return {*pres_, std::move(c)};
    }

    bool is_identity() const {
        for (const auto& v : w_)
            for (const S& x : v)
                if (!ScalarOps<S>::is_zero(x)) return false;
        return true;
    }

    PolySeq2<double> to_float() const {
        PolySeq2<double> out(*pres_);
        for (int j = 0; j <= d_; ++j)
            for (int k = 0; j + k <= d_; ++k) {
                std::vector<double> v;
                for (const S& x : coeff(j, k)) v.push_back(ScalarOps<S>::to_double(x));
                out.set_coeff(j, k, std::move(v));
            }
        return out;
    }

    std::string serialize() const {
        std::ostringstream out;
        for (int j = 0; j <= d_; ++j)
            for (int k = 0; j + k <= d_; ++k) {
                out << j << " " << k << " :";
                for (const S& x : coeff(j, k)) out << " " << scalar_str(x);
                out << "\n";
            }
        return out.str();
    }

    static PolySeq2 parse(const MalcevPresentation& p, std::istream& in,
                          const std::string& origin = "") {
        PolySeq2 seq(p);
        std::string line;
        int lineno = 0;
        while (std::getline(in, line)) {
            ++lineno;
            auto hash = line.find('#');
            if (hash != std::string::npos) line = line.substr(0, hash);
            std::istringstream ls(line);
            int j, k;
            std::string colon;
            if (!(ls >> j)) continue;  // blank
            if (!(ls >> k >> colon) || colon != ":")
                throw ParseError(origin + ":" + std::to_string(lineno) +
                                 ": expected 'j k : coords'");
            std::vector<S> v;
            std::string tok;
            while (ls >> tok) v.push_back(parse_scalar(tok));
            if (static_cast<int>(v.size()) != p.dim())
                throw ParseError(origin + ":" + std::to_string(lineno) +
                                 ": expected " + std::to_string(p.dim()) +
                                 " coordinates");
            seq.set_coeff(j, k, std::move(v));
        }
        return seq;
    }

private:
    int idx(int j, int k) const { return j * (d_ + 1) + k; }

    static std::string scalar_str(const Rational& x) { return x.get_str(); }
    static std::string scalar_str(double x) {
        std::ostringstream o;
        o.precision(17);
        o << x;
        return o.str();
    }
    static S parse_scalar(const std::string& tok) {
        if constexpr (ScalarOps<S>::exact) {
            return parse_rational(tok);
        } else {
            return std::stod(tok);
        }
    }

    const MalcevPresentation* pres_ = nullptr;
    int d_ = 0;
    std::vector<std::vector<S>> w_;
};

/// One-parameter analogue, used for restrictions g(n, h0) and orbit slices.
template <class S>
class PolySeq1 {
public:
    PolySeq1() = default;
    explicit PolySeq1(const MalcevPresentation& p)
        : pres_(&p), d_(p.degree()), w_(p.degree() + 1, p.identity_coords<S>()) {}

    const MalcevPresentation& presentation() const { return *pres_; }
    int degree() const { return d_; }
    const std::vector<S>& coeff(int j) const { return w_[j]; }
    void set_coeff(int j, std::vector<S> v) { w_[j] = std::move(v); }

    GroupElement<S> eval(long n) const {
        std::vector<S> c = pres_->identity_coords<S>();
        for (int j = 0; j <= d_; ++j) {
            S bn = ScalarOps<S>::binomial(n, j);
            if (ScalarOps<S>::is_zero(bn)) continue;
            for (int i = 0; i < pres_->dim(); ++i) c[i] += w_[j][i] * bn;
        }
        return {*pres_, std::move(c)};
    }

private:
    const MalcevPresentation* pres_ = nullptr;
    int d_ = 0;
    std::vector<std::vector<S>> w_;
};

namespace detail {

/// Binomial-basis coefficients from samples at 0..d: alpha_j = (Delta^j f)(0).
template <class S>
std::vector<std::vector<S>> finite_differences(std::vector<std::vector<S>> f) {
    const int n = static_cast<int>(f.size());
    std::vector<std::vector<S>> out;
    out.reserve(n);
    out.push_back(f[0]);
    for (int j = 1; j < n; ++j) {
        for (int i = 0; i < n - j; ++i)
            for (size_t c = 0; c < f[i].size(); ++c) f[i][c] = f[i + 1][c] - f[i][c];
        out.push_back(f[0]);
    }
    return out;
}

}  // namespace detail

inline bool scalar_close(const Rational& a, const Rational& b) { return a == b; }
inline bool scalar_close(double a, double b) {
    double diff = std::abs(a - b);
    return diff <= 1e-7 * std::max({1.0, std::abs(a), std::abs(b)});
}

/// Fits a PolySeq2 to a pointwise-defined sequence by exact finite
/// differencing on the (d+1)x(d+1) grid, then validates the fit on extra
/// points. The sampler must return psi coordinates.
template <class S, class Sampler>
PolySeq2<S> fit_polyseq2(const MalcevPresentation& P, Sampler&& sample,
                         const char* who, bool check_membership = true) {
    const int d = P.degree();
    const int m = P.dim();
    // row-wise differences in h, then differences in n
    std::vector<std::vector<std::vector<S>>> grid(d + 1);
    for (int n = 0; n <= d; ++n) {
        std::vector<std::vector<S>> row;
        row.reserve(d + 1);
        for (int h = 0; h <= d; ++h) row.push_back(sample(n, h));
        grid[n] = detail::finite_differences(std::move(row));
    }
    PolySeq2<S> seq(P);
    for (int k = 0; k <= d; ++k) {
        std::vector<std::vector<S>> col;
        col.reserve(d + 1);
        for (int n = 0; n <= d; ++n) col.push_back(grid[n][k]);
        auto diffs = detail::finite_differences(std::move(col));
        for (int j = 0; j <= d; ++j) {
            if (j + k > d) {
                // degree overflow must vanish identically
                for (int i = 0; i < m; ++i)
                    if (!ScalarOps<S>::is_zero(diffs[j][i]))
                        throw FitResidualError(std::string(who) +
                                               ": sequence exceeds degree " +
                                               std::to_string(d));
                continue;
            }
            seq.set_coeff(j, k, diffs[j]);
        }
    }
    // residual check away from the fit grid
    for (auto [n, h] : {std::pair<long, long>{d + 1, d + 1},
                        std::pair<long, long>{2 * d + 3, 1},
                        std::pair<long, long>{1, 2 * d + 5}}) {
        auto want = sample(n, h);
        auto got = seq.eval(n, h);
        for (int i = 0; i < m; ++i)
            if (!scalar_close(got.c[i], want[i]))
                throw FitResidualError(std::string(who) + ": nonzero fit residual at (" +
                                       std::to_string(n) + "," + std::to_string(h) + ")");
    }
    if (check_membership) seq.require_membership(who);
    return seq;
}

template <class S, class Sampler>
PolySeq1<S> fit_polyseq1(const MalcevPresentation& P, Sampler&& sample,
                         const char* who) {
    const int d = P.degree();
    std::vector<std::vector<S>> row;
    for (int n = 0; n <= d; ++n) row.push_back(sample(n));
    auto diffs = detail::finite_differences(std::move(row));
    PolySeq1<S> seq(P);
    for (int j = 0; j <= d; ++j) seq.set_coeff(j, diffs[j]);
    for (long n : {static_cast<long>(d + 1), static_cast<long>(2 * d + 3)}) {
        auto want = sample(n);
        auto got = seq.eval(n);
        for (int i = 0; i < P.dim(); ++i)
            if (!scalar_close(got.c[i], want[i]))
                throw FitResidualError(std::string(who) + ": nonzero fit residual");
    }
    return seq;
}

/// Coefficients of (n,h) -> g0^{n+h} x.
template <class S>
PolySeq2<S> from_orbit(const GroupElement<S>& g0, const GroupElement<S>& x) {
    const auto& P = *g0.pres;
    return fit_polyseq2<S>(
        P,
        [&](long n, long h) { return multiply(power(g0, n + h), x).c; },
        "from_orbit");
}

/// Coefficients of the pointwise product sequence (Lazard: Poly is a group).
template <class S>
PolySeq2<S> multiply_seqs(const PolySeq2<S>& f, const PolySeq2<S>& g) {
    if (&f.presentation() != &g.presentation())
        throw FlavorMismatch("multiply_seqs: different presentations");
    const auto& P = f.presentation();
    return fit_polyseq2<S>(
        P,
        [&](long n, long h) { return multiply(f.eval(n, h), g.eval(n, h)).c; },
        "multiply_seqs");
}

/// Pointwise inverse sequence.
template <class S>
PolySeq2<S> inverse_seq(const PolySeq2<S>& f) {
    const auto& P = f.presentation();
    return fit_polyseq2<S>(
        P, [&](long n, long h) { return inverse(f.eval(n, h)).c; }, "inverse_seq");
}

enum class Direction { n, h };

/// Discrete derivative d g(n,h) = g(n+e, h) g(n,h)^{-1} (or the h-shift).
template <class S>
PolySeq2<S> derivative(const PolySeq2<S>& g, Direction dir) {
    const auto& P = g.presentation();
    long dn = dir == Direction::n ? 1 : 0;
    long dh = dir == Direction::h ? 1 : 0;
    return fit_polyseq2<S>(
        P,
        [&](long n, long h) {
            return multiply(g.eval(n + dn, h + dh), inverse(g.eval(n, h))).c;
        },
        "derivative");
}

/// Refit of (n,h) -> g(n + dn, h + dh).
template <class S>
PolySeq2<S> shift_seq(const PolySeq2<S>& g, long dn, long dh) {
    const auto& P = g.presentation();
    return fit_polyseq2<S>(
        P, [&](long n, long h) { return g.eval(n + dn, h + dh).c; }, "shift_seq");
}

/// Restriction n -> g(n, h0).
template <class S>
PolySeq1<S> restrict_to_n(const PolySeq2<S>& g, long h0) {
    return fit_polyseq1<S>(
        g.presentation(), [&](long n) { return g.eval(n, h0).c; }, "restrict_to_n");
}

/// Restriction h -> g(n0, h).
template <class S>
PolySeq1<S> restrict_to_h(const PolySeq2<S>& g, long n0) {
    return fit_polyseq1<S>(
        g.presentation(), [&](long h) { return g.eval(n0, h).c; }, "restrict_to_h");
}

// ---- torus polynomials and the C^infinity([N]) toolkit ---------------------

/// f(n) = sum alpha_i binom(n,i), valued mod 1.
template <class S>
struct TorusPoly {
    std::vector<S> alpha;  // length d+1

    int degree() const { return static_cast<int>(alpha.size()) - 1; }

    S eval(long n) const {
        S acc = ScalarOps<S>::zero();
        for (size_t i = 0; i < alpha.size(); ++i)
            acc += alpha[i] * ScalarOps<S>::binomial(n, static_cast<int>(i));
        return acc;
    }
    double eval_mod1(long n) const { return ScalarOps<S>::frac(eval(n)); }
};

/// max_i N^i || alpha_i ||_{R/Z}; the i = 0 term uses N^0 = 1.
template <class S>
double cinf_norm(const TorusPoly<S>& f, long N) {
    double best = 0;
    double p = 1;
    for (size_t i = 0; i < f.alpha.size(); ++i) {
        best = std::max(best, p * ScalarOps<S>::rz_norm_d(f.alpha[i]));
        p *= static_cast<double>(N);
    }
    return best;
}

/// Exact-rational value of the same norm (N^i as exact integers).
inline Rational cinf_norm_exact(const TorusPoly<Rational>& f, long N) {
    Rational best(0);
    Integer p = 1;
    for (size_t i = 0; i < f.alpha.size(); ++i) {
        Rational v = rz_norm(f.alpha[i]) * Rational(p);
        if (v > best) best = v;
        p *= N;
    }
    return best;
}

template <class S>
TorusPoly<S> scale_poly(const TorusPoly<S>& f, long D) {
    TorusPoly<S> g = f;
    for (auto& a : g.alpha) a = a * ScalarOps<S>::from_long(D);
    return g;
}

struct DenominatorWitness {
    long D;
    double norm;
};

/// D in [1, D_max] minimizing cinf_norm(D f, N); ties break to the smaller D.
template <class S>
DenominatorWitness best_denominator(const TorusPoly<S>& f, long N, long D_max) {
    DenominatorWitness best{1, cinf_norm(scale_poly(f, 1), N)};
    for (long D = 2; D <= D_max; ++D) {
        double norm = cinf_norm(scale_poly(f, D), N);
        if (norm < best.norm) best = {D, norm};
        if (best.norm == 0) break;
    }
    return best;
}

struct ConcentrationWitness {
    long D;
    double norm;        // C^inf norm of the nonconstant part of D*f
    double hit_fraction;  // fraction of n in [N] inside the best window
};

/// Checks whether f(n) mod 1 spends a delta-fraction of [N] inside some
/// interval of length epsilon (circular sliding window over sorted values);
/// if so, reports the D <= D_cap minimizing the nonconstant C^inf norm.
template <class S>
std::optional<ConcentrationWitness> concentration_witness(const TorusPoly<S>& f,
                                                          long N, double delta,
                                                          double eps,
                                                          long D_cap = 1000000) {
    if (!(0 < eps && eps < delta / 2 && delta / 2 < 0.25))
        throw std::invalid_argument("concentration_witness: need 0<eps<delta/2<1/4");
    std::vector<double> vals(N);
    for (long n = 1; n <= N; ++n) vals[n - 1] = f.eval_mod1(n);
    std::sort(vals.begin(), vals.end());
    // circular window: duplicate with +1 wrap
    size_t best_count = 0;
    size_t lo = 0;
    std::vector<double> ext = vals;
    for (double v : vals) ext.push_back(v + 1.0);
    for (size_t hi = 0; hi < ext.size(); ++hi) {
        while (ext[hi] - ext[lo] > eps) ++lo;
        size_t count = hi - lo + 1;
        if (count > best_count) best_count = count;
        if (hi + 1 == ext.size()) break;
    }
    best_count = std::min(best_count, static_cast<size_t>(N));
    double frac = static_cast<double>(best_count) / static_cast<double>(N);
    if (frac < delta) return std::nullopt;

    TorusPoly<S> tail = f;
    if (!tail.alpha.empty()) tail.alpha[0] = ScalarOps<S>::zero();
    DenominatorWitness w{1, cinf_norm(scale_poly(tail, 1), N)};
    for (long D = 2; D <= D_cap && w.norm > 0; ++D) {
        double norm = cinf_norm(scale_poly(tail, D), N);
        if (norm < w.norm) w = {D, norm};
    }
    return ConcentrationWitness{w.D, w.norm, frac};
}

// ---- smoothness -------------------------------------------------------------

struct SmoothnessReport {
    bool smooth;
    double max_dist_to_id;
    double max_step_n;
    double max_step_h;
    long samples;
};

/// (W,(N,H))-smoothness: d(g(n,h), id) <= W and unit-step increments at most
/// W/N resp. W/H. Full grid when N*H <= budget, else a stratified lattice of
/// about `budget` cells with one deterministic sample each (fixed seed).
template <class Eval>
SmoothnessReport is_smooth(Eval&& g, double W, long N, long H,
                           long budget = 1000000, uint64_t seed = 9001) {
    double limit_n = W / static_cast<double>(N);
    double limit_h = W / static_cast<double>(H);
    SmoothnessReport rep{true, 0, 0, 0, 0};
    auto visit = [&](long n, long h) {
        GroupElement<double> at = g(n, h);
        rep.max_dist_to_id = std::max(rep.max_dist_to_id, dist_to_id(at));
        if (n < N) rep.max_step_n = std::max(rep.max_step_n, dist(g(n + 1, h), at));
        if (h < H) rep.max_step_h = std::max(rep.max_step_h, dist(g(n, h + 1), at));
        ++rep.samples;
    };
    if (N * H <= budget) {
        for (long n = 1; n <= N; ++n)
            for (long h = 1; h <= H; ++h) visit(n, h);
    } else {
        // roughly square strata; one seeded point per stratum
        long per_side = static_cast<long>(std::sqrt(static_cast<double>(budget)));
        long sn = std::max<long>(1, N / per_side), sh = std::max<long>(1, H / per_side);
        std::mt19937_64 rng(seed);
        for (long n0 = 1; n0 <= N; n0 += sn)
            for (long h0 = 1; h0 <= H; h0 += sh) {
                long n = n0 + static_cast<long>(rng() % static_cast<uint64_t>(sn));
                long h = h0 + static_cast<long>(rng() % static_cast<uint64_t>(sh));
                visit(std::min(n, N), std::min(h, H));
            }
    }
    rep.smooth = rep.max_dist_to_id <= W && rep.max_step_n <= limit_n &&
                 rep.max_step_h <= limit_h;
    return rep;
}

template <class S>
SmoothnessReport is_smooth_seq(const PolySeq2<S>& seq, double W, long N, long H,
                               long budget = 1000000) {
    auto f = seq.to_float();
    return is_smooth([&](long n, long h) { return f.eval(n, h); }, W, N, H, budget);
}

}  // namespace nilspan
