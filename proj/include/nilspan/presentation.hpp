#pragma once

#include <algorithm>
#include <fstream>
#include <functional>
#include <memory>
#include <random>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "nilspan/linalg.hpp"
#include "nilspan/poly.hpp"
#include "nilspan/rational.hpp"
#include "nilspan/scalar.hpp"

namespace nilspan {

struct PresentationError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct JacobiViolation : PresentationError {
    using PresentationError::PresentationError;
};
struct FiltrationViolation : PresentationError {
    using PresentationError::PresentationError;
};
struct StepTooLarge : PresentationError {
    using PresentationError::PresentationError;
};
struct ParseError : PresentationError {
    using PresentationError::PresentationError;
};

/// One structure constant c in [V_i, V_j] = sum_k c_{ijk} V_k. Indices are
/// 0-based here; the text format uses 1-based indices.
struct BracketTerm {
    int i, j, k;
    Rational c;
};

namespace lie {

/// Coordinate vectors over a commutative ring S (exact rationals, doubles,
/// or polynomials for the symbolic law). Conv maps Rational constants into S.
template <class S, class Conv>
struct Ops {
    int m;
    // full antisymmetric table: for each (i,j), list of (k, c_ijk)
    const std::vector<std::vector<std::vector<std::pair<int, Rational>>>>* table;
    Conv conv;

    using Vec = std::vector<S>;

    Vec zero() const { return Vec(m, conv(Rational(0))); }

    Vec bracket(const Vec& u, const Vec& v) const {
        Vec r = zero();
        for (int i = 0; i < m; ++i) {
            for (int j = 0; j < m; ++j) {
                const auto& lst = (*table)[i][j];
                if (lst.empty()) continue;
                S uv = u[i] * v[j];
                for (const auto& [k, c] : lst) r[k] += uv * conv(c);
            }
        }
        return r;
    }

    void add_scaled(Vec& a, const Vec& b, const Rational& c) const {
        S cc = conv(c);
        for (int i = 0; i < m; ++i) a[i] += b[i] * cc;
    }

    /// Baker-Campbell-Hausdorff product log(exp(u) exp(v)), valid for
    /// nilpotency step <= 4 (all longer brackets vanish).
    Vec bch(const Vec& u, const Vec& v) const {
        Vec z = u;
        for (int i = 0; i < m; ++i) z[i] += v[i];
        Vec b1 = bracket(u, v);
        add_scaled(z, b1, Rational(1, 2));
        Vec b2 = bracket(u, b1);
        add_scaled(z, b2, Rational(1, 12));
        Vec b3 = bracket(v, b1);
        add_scaled(z, b3, Rational(-1, 12));
        Vec b4 = bracket(v, b2);
        add_scaled(z, b4, Rational(-1, 24));
        return z;
    }

    /// log of exp(psi_1 V_1) ... exp(psi_m V_m): second-kind -> first-kind.
    Vec to_first_kind(const Vec& psi) const {
        Vec u = zero();
        for (int i = 0; i < m; ++i) {
            Vec e = zero();
            e[i] = psi[i];
            u = bch(u, e);
        }
        return u;
    }

    /// Inverse of to_first_kind: peel coordinates low index first; each peel
    /// only disturbs strictly later coordinates (tail-ideal property).
    Vec from_first_kind(Vec u) const {
        Vec psi = zero();
        for (int i = 0; i < m; ++i) {
            psi[i] = u[i];
            Vec e = zero();
            e[i] = -psi[i];
            u = bch(e, u);
        }
        return psi;
    }
};

struct RatConv {
    Rational operator()(const Rational& q) const { return q; }
};
struct DblConv {
    double operator()(const Rational& q) const { return q.get_d(); }
};
struct PolyConv {
    int nvars;
    MultiPoly operator()(const Rational& q) const {
        return MultiPoly::constant(nvars, q);
    }
};

}  // namespace lie

/// A nilpotent Lie group with filtration and lattice, carried as dimensions,
/// rational structure constants, and the multiplication polynomials of the
/// group law in Mal'cev coordinates of the second kind. Immutable once built.
class MalcevPresentation {
public:
    /// Derives the group law symbolically by finite BCH expansion. Throws
    /// JacobiViolation / FiltrationViolation / StepTooLarge on invalid input.
    static MalcevPresentation build(int m, int d, std::vector<int> filtration_dims,
                                    const std::vector<BracketTerm>& constants,
                                    std::string name = "custom") {
        MalcevPresentation p;
        p.init_dims(m, d, std::move(filtration_dims), std::move(name));
        p.init_brackets(constants);
        p.validate_algebra();
        if (p.step_ > 4)
            throw StepTooLarge("generic BCH derivation supports step <= 4, got step " +
                               std::to_string(p.step_));
        p.derive_laws();
        p.validate_laws();
        return p;
    }

    /// Same dimensional and bracket validation, but with a hand-coded group
    /// law (used by the built-ins; cross-checked against the BCH engine in
    /// the test suite).
    static MalcevPresentation build_handcoded(int m, int d,
                                              std::vector<int> filtration_dims,
                                              const std::vector<BracketTerm>& constants,
                                              std::vector<MultiPoly> mult,
                                              std::vector<MultiPoly> inv,
                                              std::string name) {
        MalcevPresentation p;
        p.init_dims(m, d, std::move(filtration_dims), std::move(name));
        p.init_brackets(constants);
        p.validate_algebra();
        p.mult_ = std::move(mult);
        p.inv_ = std::move(inv);
        p.compile();
        p.validate_laws();
        return p;
    }

    int dim() const { return m_; }
    int degree() const { return d_; }
    int step() const { return step_; }
    const std::string& name() const { return name_; }
    const std::vector<int>& filtration_dims() const { return filt_; }

    /// m_l, with m_0 = m and m_l = 0 for l > d.
    int m_level(int l) const {
        if (l <= 0) return m_;
        if (l > d_) return 0;
        return filt_[l - 1];
    }
    /// Filtration level of 0-based coordinate index i.
    int level_of(int i) const { return level_[i]; }
    /// Coordinates 0..horizontal_dim()-1 project onto the horizontal torus.
    int horizontal_dim() const { return m_ - m_level(2); }

    Integer rationality_height() const { return height_; }
    const std::vector<BracketTerm>& bracket_terms() const { return brackets_; }
    const std::vector<std::vector<std::vector<std::pair<int, Rational>>>>& table()
        const {
        return table_;
    }
    const std::vector<MultiPoly>& mult_polys() const { return mult_; }
    const std::vector<MultiPoly>& inverse_polys() const { return inv_; }

    template <class S>
    std::vector<S> multiply(const std::vector<S>& a, const std::vector<S>& b) const {
        std::vector<S> vars(a);
        vars.insert(vars.end(), b.begin(), b.end());
        return eval_polys<S>(mult_, vars);
    }
    std::vector<double> multiply_fast(const std::vector<double>& a,
                                      const std::vector<double>& b) const {
        double vars[64];
        for (int i = 0; i < m_; ++i) vars[i] = a[i];
        for (int i = 0; i < m_; ++i) vars[m_ + i] = b[i];
        std::vector<double> r(m_);
        for (int k = 0; k < m_; ++k) r[k] = mult_c_[k].eval(vars);
        return r;
    }

    template <class S>
    std::vector<S> inverse(const std::vector<S>& a) const {
        return eval_polys<S>(inv_, a);
    }

    template <class S>
    std::vector<S> identity_coords() const {
        return std::vector<S>(m_, ScalarOps<S>::zero());
    }

    lie::Ops<Rational, lie::RatConv> lie_exact() const {
        return {m_, &table_, lie::RatConv{}};
    }
    lie::Ops<double, lie::DblConv> lie_float() const {
        return {m_, &table_, lie::DblConv{}};
    }

    bool same_as(const MalcevPresentation& o) const { return this == &o; }

    // ---- text format ------------------------------------------------------

    /// Sections: [group] with keys m, d, filtration_dims; [brackets] with
    /// one "i j k num/den" line per constant (1-based indices). Rejects
    /// malformed lines with their line number.
    static MalcevPresentation parse(std::istream& in, const std::string& origin = "") {
        int m = -1, d = -1;
        std::vector<int> filt;
        std::vector<BracketTerm> constants;
        std::string line, section;
        int lineno = 0;
        auto fail = [&](const std::string& msg) -> void {
            throw ParseError(origin + ":" + std::to_string(lineno) + ": " + msg);
        };
        while (std::getline(in, line)) {
            ++lineno;
            auto hash = line.find('#');
            if (hash != std::string::npos) line = line.substr(0, hash);
            std::string t = trim(line);
            if (t.empty()) continue;
            if (t.front() == '[') {
                if (t.back() != ']') fail("unterminated section header");
                section = t.substr(1, t.size() - 2);
                if (section != "group" && section != "brackets")
                    fail("unknown section '" + section + "'");
                continue;
            }
            if (section == "group") {
                auto eq = t.find('=');
                if (eq == std::string::npos) fail("expected key = value");
                std::string key = trim(t.substr(0, eq));
                std::string val = trim(t.substr(eq + 1));
                std::istringstream vs(val);
                if (key == "m") {
                    if (!(vs >> m) || m <= 0) fail("bad m");
                } else if (key == "d") {
                    if (!(vs >> d) || d <= 0) fail("bad d");
                } else if (key == "filtration_dims") {
                    int v;
                    while (vs >> v) filt.push_back(v);
                    if (filt.empty()) fail("empty filtration_dims");
                } else {
                    fail("unknown key '" + key + "'");
                }
            } else if (section == "brackets") {
                std::istringstream vs(t);
                int i, j, k;
                std::string frac;
                if (!(vs >> i >> j >> k >> frac)) fail("expected 'i j k num/den'");
                if (i < 1 || j < 1 || k < 1 || i > m || j > m || k > m)
                    fail("bracket index out of range");
                Rational c;
                try {
                    c = parse_rational(frac);
                } catch (const std::invalid_argument& e) {
                    fail(e.what());
                }
                constants.push_back({i - 1, j - 1, k - 1, c});
            } else {
                fail("content outside any section");
            }
        }
        if (m <= 0 || d <= 0) throw ParseError(origin + ": missing [group] m/d");
        return build(m, d, filt, constants,
                     origin.empty() ? "custom" : origin);
    }

    static MalcevPresentation parse_file(const std::string& path) {
        std::ifstream in(path);
        if (!in) throw ParseError(path + ": cannot open");
        return parse(in, path);
    }

    std::string serialize() const {
        std::ostringstream out;
        out << "[group]\nm = " << m_ << "\nd = " << d_ << "\nfiltration_dims =";
        for (int v : filt_) out << " " << v;
        out << "\n[brackets]\n";
        for (const auto& t : brackets_)
            out << (t.i + 1) << " " << (t.j + 1) << " " << (t.k + 1) << " "
                << t.c.get_str() << "\n";
        return out.str();
    }

private:
    friend struct Presets;

    void init_dims(int m, int d, std::vector<int> filt, std::string name) {
        if (m <= 0) throw PresentationError("dimension must be positive");
        if (d <= 0) throw PresentationError("filtration degree must be positive");
        if (static_cast<int>(filt.size()) != d)
            throw FiltrationViolation("filtration_dims must list m_1..m_d");
        if (filt[0] != m) throw FiltrationViolation("m_1 must equal m");
        for (int l = 1; l < d; ++l)
            if (filt[l] > filt[l - 1] || filt[l] < 0)
                throw FiltrationViolation("filtration dims must be nonincreasing");
        m_ = m;
        d_ = d;
        filt_ = std::move(filt);
        name_ = std::move(name);
        level_.assign(m_, 1);
        for (int i = 0; i < m_; ++i) {
            int lv = 0;
            for (int l = 1; l <= d_; ++l)
                if (i >= m_ - m_level(l)) lv = l;
            level_[i] = lv;
        }
    }

    void init_brackets(const std::vector<BracketTerm>& constants) {
        table_.assign(m_, std::vector<std::vector<std::pair<int, Rational>>>(m_));
        // canonical storage keyed by (i<j,k)
        std::vector<std::vector<std::vector<Rational>>> c(
            m_, std::vector<std::vector<Rational>>(m_));
        std::vector<std::vector<std::vector<bool>>> set_lo(
            m_, std::vector<std::vector<bool>>(m_));
        for (auto& row : c)
            for (auto& cell : row) cell.assign(m_, Rational(0));
        for (auto& row : set_lo)
            for (auto& cell : row) cell.assign(m_, false);

        for (const auto& t : constants) {
            if (t.i == t.j && t.c != 0)
                throw JacobiViolation("antisymmetry violated: [V_i,V_i] must vanish");
            int a = t.i, b = t.j;
            Rational val = t.c;
            bool flip = a > b;
            if (flip) { std::swap(a, b); val = -val; }
            if (set_lo[a][b][t.k]) {
                if (c[a][b][t.k] != val)
                    throw JacobiViolation(
                        "antisymmetry violated: conflicting constants for [V_" +
                        std::to_string(a + 1) + ",V_" + std::to_string(b + 1) + "]");
            } else {
                c[a][b][t.k] = val;
                set_lo[a][b][t.k] = true;
            }
        }
        brackets_.clear();
        height_ = 1;
        for (int i = 0; i < m_; ++i)
            for (int j = i + 1; j < m_; ++j)
                for (int k = 0; k < m_; ++k)
                    if (set_lo[i][j][k] && c[i][j][k] != 0) {
                        brackets_.push_back({i, j, k, c[i][j][k]});
                        table_[i][j].push_back({k, c[i][j][k]});
                        table_[j][i].push_back({k, -c[i][j][k]});
                        Integer h = rheight(c[i][j][k]);
                        if (h > height_) height_ = h;
                    }
    }

    std::vector<Rational> basis_bracket(int a, int b) const {
        std::vector<Rational> r(m_, Rational(0));
        for (const auto& [k, c] : table_[a][b]) r[k] = c;
        return r;
    }

    void validate_algebra() {
        auto ops = lie_exact();
        // filtration compatibility: [level la, level lb] lands in level la+lb
        for (int a = 0; a < m_; ++a)
            for (int b = a + 1; b < m_; ++b) {
                int lsum = level_[a] + level_[b];
                int cutoff = m_ - m_level(lsum);  // all coords < cutoff must vanish
                for (const auto& [k, c] : table_[a][b]) {
                    if (k < cutoff)
                        throw FiltrationViolation(
                            "[V_" + std::to_string(a + 1) + ",V_" +
                            std::to_string(b + 1) + "] leaves G_" +
                            std::to_string(lsum) + " (coordinate " +
                            std::to_string(k + 1) + ")");
                    if (k <= b)
                        throw FiltrationViolation(
                            "tail span {V_" + std::to_string(b + 1) +
                            ",...} is not an ideal: [V_" + std::to_string(a + 1) +
                            ",V_" + std::to_string(b + 1) + "] has coordinate " +
                            std::to_string(k + 1));
                }
            }
        // Jacobi identity on all basis triples
        for (int a = 0; a < m_; ++a)
            for (int b = a + 1; b < m_; ++b)
                for (int cdx = b + 1; cdx < m_; ++cdx) {
                    auto j1 = ops.bracket(basis_bracket(a, b), unit(cdx));
                    auto j2 = ops.bracket(basis_bracket(b, cdx), unit(a));
                    auto j3 = ops.bracket(basis_bracket(cdx, a), unit(b));
                    for (int k = 0; k < m_; ++k)
                        if (j1[k] + j2[k] + j3[k] != 0)
                            throw JacobiViolation(
                                "Jacobi identity fails on (V_" + std::to_string(a + 1) +
                                ",V_" + std::to_string(b + 1) + ",V_" +
                                std::to_string(cdx + 1) + ")");
                }
        compute_step();
    }

    std::vector<Rational> unit(int i) const {
        std::vector<Rational> e(m_, Rational(0));
        e[i] = 1;
        return e;
    }

    /// Nilpotency step from the lower central series of the span of iterated
    /// basis brackets.
    void compute_step() {
        auto ops = lie_exact();
        std::vector<std::vector<Rational>> cur;
        for (int i = 0; i < m_; ++i) cur.push_back(unit(i));
        step_ = 0;
        for (int s = 1; s <= m_ + 1; ++s) {
            bool nonzero = false;
            for (const auto& v : cur)
                for (const auto& x : v)
                    if (x != 0) nonzero = true;
            if (!nonzero) break;
            step_ = s;
            std::vector<std::vector<Rational>> next;
            for (int i = 0; i < m_; ++i)
                for (const auto& v : cur) {
                    auto b = ops.bracket(unit(i), v);
                    bool nz = false;
                    for (const auto& x : b)
                        if (x != 0) nz = true;
                    if (nz) next.push_back(b);
                }
            cur = std::move(next);
        }
    }

    void derive_laws() {
        lie::Ops<MultiPoly, lie::PolyConv> ops2{m_, &table_, lie::PolyConv{2 * m_}};
        std::vector<MultiPoly> xs, ys;
        for (int i = 0; i < m_; ++i) xs.push_back(MultiPoly::variable(2 * m_, i));
        for (int i = 0; i < m_; ++i) ys.push_back(MultiPoly::variable(2 * m_, m_ + i));
        auto ux = ops2.to_first_kind(xs);
        auto uy = ops2.to_first_kind(ys);
        mult_ = ops2.from_first_kind(ops2.bch(ux, uy));

        lie::Ops<MultiPoly, lie::PolyConv> ops1{m_, &table_, lie::PolyConv{m_}};
        std::vector<MultiPoly> zs;
        for (int i = 0; i < m_; ++i) zs.push_back(MultiPoly::variable(m_, i));
        auto uz = ops1.to_first_kind(zs);
        for (auto& p : uz) p = -p;
        inv_ = ops1.from_first_kind(uz);
        compile();
    }

    void compile() {
        if (m_ > 32) throw PresentationError("dimension too large for this build");
        mult_c_.clear();
        inv_c_.clear();
        for (const auto& p : mult_) mult_c_.push_back(CompiledPoly::compile(p));
        for (const auto& p : inv_) inv_c_.push_back(CompiledPoly::compile(p));
    }

    /// identity * g = g * identity = g symbolically, then spot associativity
    /// and inverses on deterministic pseudo-random rational points.
    void validate_laws() const {
        std::vector<MultiPoly> zs, zeros;
        for (int i = 0; i < m_; ++i) zs.push_back(MultiPoly::variable(m_, i));
        for (int i = 0; i < m_; ++i) zeros.push_back(MultiPoly::constant(m_, 0));
        auto subst = [&](const std::vector<MultiPoly>& half_x,
                         const std::vector<MultiPoly>& half_y) {
            std::vector<MultiPoly> vars = half_x;
            vars.insert(vars.end(), half_y.begin(), half_y.end());
            std::vector<MultiPoly> out;
            for (const auto& p : mult_)
                out.push_back(eval_poly_sym(p, vars));
            return out;
        };
        auto r1 = subst(zs, zeros);
        auto r2 = subst(zeros, zs);
        for (int k = 0; k < m_; ++k)
            if (!(r1[k] == zs[k]) || !(r2[k] == zs[k]))
                throw PresentationError("derived law does not fix the identity");

        std::mt19937_64 rng(0x6e696c7370616eULL);
        auto rnd = [&]() {
            long num = static_cast<long>(rng() % 21) - 10;
            long den = static_cast<long>(rng() % 7) + 1;
            return make_rational(num, den);
        };
        for (int trial = 0; trial < 32; ++trial) {
            std::vector<Rational> a(m_), b(m_), c(m_);
            for (int i = 0; i < m_; ++i) { a[i] = rnd(); b[i] = rnd(); c[i] = rnd(); }
            auto ab_c = multiply<Rational>(multiply<Rational>(a, b), c);
            auto a_bc = multiply<Rational>(a, multiply<Rational>(b, c));
            if (ab_c != a_bc)
                throw PresentationError("derived law is not associative");
            auto inv_a = inverse<Rational>(a);
            auto p = multiply<Rational>(inv_a, a);
            for (int i = 0; i < m_; ++i)
                if (p[i] != 0) throw PresentationError("derived inverse fails");
        }
    }

    template <class S>
    std::vector<S> eval_polys(const std::vector<MultiPoly>& polys,
                              const std::vector<S>& vars) const {
        std::vector<S> out;
        out.reserve(polys.size());
        for (const auto& p : polys)
            out.push_back(p.eval<S>(vars, &ScalarOps<S>::from_rational));
        return out;
    }

    static MultiPoly eval_poly_sym(const MultiPoly& p,
                                   const std::vector<MultiPoly>& vars) {
        MultiPoly acc(vars.empty() ? 0 : vars[0].nvars());
        for (const auto& [mo, c] : p.terms()) {
            MultiPoly t = MultiPoly::constant(acc.nvars(), c);
            for (size_t i = 0; i < mo.size(); ++i)
                for (int e = 0; e < mo[i]; ++e) t = t * vars[i];
            acc += t;
        }
        return acc;
    }

    static std::string trim(const std::string& s) {
        size_t a = s.find_first_not_of(" \t\r\n");
        if (a == std::string::npos) return "";
        size_t b = s.find_last_not_of(" \t\r\n");
        return s.substr(a, b - a + 1);
    }

    int m_ = 0, d_ = 0, step_ = 0;
    std::vector<int> filt_;
    std::vector<int> level_;
    std::string name_;
    Integer height_ = 1;
    std::vector<BracketTerm> brackets_;
    std::vector<std::vector<std::vector<std::pair<int, Rational>>>> table_;
    std::vector<MultiPoly> mult_, inv_;
    std::vector<CompiledPoly> mult_c_, inv_c_;
};

/// Built-in groups with hand-coded laws; the test suite checks them against
/// the generic BCH engine coefficientwise.
struct Presets {
    static MalcevPresentation torus(int m) {
        std::vector<MultiPoly> mult, inv;
        for (int k = 0; k < m; ++k) {
            mult.push_back(MultiPoly::variable(2 * m, k) +
                           MultiPoly::variable(2 * m, m + k));
            inv.push_back(-MultiPoly::variable(m, k));
        }
        return MalcevPresentation::build_handcoded(m, 1, {m}, {}, std::move(mult),
                                                   std::move(inv),
                                                   "torus" + std::to_string(m));
    }

    /// [V1,V2] = V3; psi product (a,b,c)(a',b',c') = (a+a', b+b', c+c'-a'b).
    static MalcevPresentation heisenberg3() {
        int m = 3;
        auto x = [&](int i) { return MultiPoly::variable(2 * m, i); };
        auto y = [&](int i) { return MultiPoly::variable(2 * m, m + i); };
        std::vector<MultiPoly> mult = {x(0) + y(0), x(1) + y(1),
                                       x(2) + y(2) - y(0) * x(1)};
        auto z = [&](int i) { return MultiPoly::variable(m, i); };
        std::vector<MultiPoly> inv = {-z(0), -z(1), -z(2) - z(0) * z(1)};
        return MalcevPresentation::build_handcoded(
            m, 2, {3, 1}, {{0, 1, 2, Rational(1)}}, std::move(mult), std::move(inv),
            "heisenberg3");
    }

    /// [V1,V3] = V5, [V2,V4] = V5 (two commuting symplectic pairs).
    static MalcevPresentation heisenberg5() {
        int m = 5;
        auto x = [&](int i) { return MultiPoly::variable(2 * m, i); };
        auto y = [&](int i) { return MultiPoly::variable(2 * m, m + i); };
        std::vector<MultiPoly> mult = {
            x(0) + y(0), x(1) + y(1), x(2) + y(2), x(3) + y(3),
            x(4) + y(4) - y(0) * x(2) - y(1) * x(3)};
        auto z = [&](int i) { return MultiPoly::variable(m, i); };
        std::vector<MultiPoly> inv = {-z(0), -z(1), -z(2), -z(3),
                                      -z(4) - z(0) * z(2) - z(1) * z(3)};
        return MalcevPresentation::build_handcoded(
            m, 2, {5, 1}, {{0, 2, 4, Rational(1)}, {1, 3, 4, Rational(1)}},
            std::move(mult), std::move(inv), "heisenberg5");
    }

    /// Coordinates regrouped level by level so the product basis is again
    /// adapted: level-l block of A, then level-l block of B, for l = 1..d.
    static MalcevPresentation direct_product(const MalcevPresentation& A,
                                             const MalcevPresentation& B) {
        int d = std::max(A.degree(), B.degree());
        int m = A.dim() + B.dim();
        std::vector<int> filt(d);
        for (int l = 1; l <= d; ++l) filt[l - 1] = A.m_level(l) + B.m_level(l);

        // position of each component coordinate in the product ordering
        std::vector<int> mapA(A.dim()), mapB(B.dim());
        {
            int pos = 0;
            for (int l = 1; l <= d; ++l) {
                for (int i = 0; i < A.dim(); ++i)
                    if (A.level_of(i) == l) mapA[i] = pos++;
                for (int i = 0; i < B.dim(); ++i)
                    if (B.level_of(i) == l) mapB[i] = pos++;
            }
        }
        std::vector<BracketTerm> constants;
        for (const auto& t : A.bracket_terms())
            constants.push_back({mapA[t.i], mapA[t.j], mapA[t.k], t.c});
        for (const auto& t : B.bracket_terms())
            constants.push_back({mapB[t.i], mapB[t.j], mapB[t.k], t.c});

        auto remap_block = [&](const MalcevPresentation& P, const std::vector<int>& map,
                               std::vector<MultiPoly>& mult, std::vector<MultiPoly>& inv) {
            std::vector<int> vmap2(2 * P.dim());
            for (int i = 0; i < P.dim(); ++i) {
                vmap2[i] = map[i];
                vmap2[P.dim() + i] = m + map[i];
            }
            std::vector<int> vmap1(P.dim());
            for (int i = 0; i < P.dim(); ++i) vmap1[i] = map[i];
            for (int k = 0; k < P.dim(); ++k) {
                mult[map[k]] = remap_vars(P.mult_polys()[k], vmap2, 2 * m);
                inv[map[k]] = remap_vars(P.inverse_polys()[k], vmap1, m);
            }
        };
        std::vector<MultiPoly> mult(m), inv(m);
        remap_block(A, mapA, mult, inv);
        remap_block(B, mapB, mult, inv);
        return MalcevPresentation::build_handcoded(
            m, d, filt, constants, std::move(mult), std::move(inv),
            A.name() + "x" + B.name());
    }

    /// Named lookup used by the CLI: torus<m>, heisenberg3, heisenberg5,
    /// heisenberg3x<name>, ...
    static MalcevPresentation by_name(const std::string& name) {
        if (name.rfind("torus", 0) == 0) {
            int m = std::stoi(name.substr(5));
            return torus(m);
        }
        if (name == "heisenberg3") return heisenberg3();
        if (name == "heisenberg5") return heisenberg5();
        throw PresentationError("unknown built-in group '" + name + "'");
    }

private:
    static MultiPoly remap_vars(const MultiPoly& p, const std::vector<int>& vmap,
                                int new_nvars) {
        MultiPoly out(new_nvars);
        for (const auto& [mo, c] : p.terms()) {
            MultiPoly::Monomial nm(new_nvars, 0);
            for (size_t i = 0; i < mo.size(); ++i) nm[vmap[i]] = mo[i];
            out += MultiPoly::constant(new_nvars, c) * monom(new_nvars, nm);
        }
        return out;
    }
    static MultiPoly monom(int nvars, const MultiPoly::Monomial& mo) {
        MultiPoly p = MultiPoly::constant(nvars, 1);
        for (size_t i = 0; i < mo.size(); ++i)
            for (int e = 0; e < mo[i]; ++e) p = p * MultiPoly::variable(nvars, i);
        return p;
    }
};

}  // namespace nilspan
