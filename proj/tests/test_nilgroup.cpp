#include <catch2/catch_amalgamated.hpp>

#include <sstream>

#include "nilspan/group.hpp"
#include "nilspan/presentation.hpp"
#include "oracles.hpp"

using namespace nilspan;

namespace {

GroupElement<Rational> elt(const MalcevPresentation& P,
                           std::vector<Rational> c) {
    return {P, std::move(c)};
}

std::array<Rational, 3> to_arr(const GroupElement<Rational>& g) {
    return {g.c[0], g.c[1], g.c[2]};
}

}  // namespace

TEST_CASE("torus law is coordinatewise addition") {
    auto T = Presets::torus(2);
    auto g = multiply(GroupElement<double>{T, {0.3, 0.4}},
                      GroupElement<double>{T, {0.5, 0.9}});
    CHECK(g.c[0] == Catch::Approx(0.8));
    CHECK(g.c[1] == Catch::Approx(1.3));
}

TEST_CASE("Heisenberg law matches the unitriangular matrix oracle") {
    auto H = Presets::heisenberg3();
    auto a = elt(H, {1, 0, 0});
    auto b = elt(H, {0, 1, 0});
    CHECK(multiply(a, b).c == std::vector<Rational>{1, 1, 0});
    CHECK(multiply(b, a).c == std::vector<Rational>{1, 1, -1});
    CHECK(inverse(elt(H, {1, 1, 0})).c == std::vector<Rational>{-1, -1, -1});

    oracle::RatGen gen(1);
    for (int t = 0; t < 1000; ++t) {
        std::vector<Rational> ac{gen(), gen(), gen()}, bc{gen(), gen(), gen()};
        auto prod = multiply(elt(H, ac), elt(H, bc));
        auto want = oracle::heis_mul_psi<Rational>({ac[0], ac[1], ac[2]},
                                                   {bc[0], bc[1], bc[2]});
        CHECK(to_arr(prod) == want);
    }
    for (int t = 0; t < 100; ++t) {
        std::vector<Rational> ac{gen(), gen(), gen()};
        auto inv = inverse(elt(H, ac));
        auto want = oracle::heis_inv_psi<Rational>({ac[0], ac[1], ac[2]});
        CHECK(to_arr(inv) == want);
    }
}

TEST_CASE("generic BCH derivation equals hand-coded laws coefficientwise") {
    auto check = [](const MalcevPresentation& hand) {
        auto generic = MalcevPresentation::build(
            hand.dim(), hand.degree(), hand.filtration_dims(), hand.bracket_terms());
        REQUIRE(generic.mult_polys().size() == hand.mult_polys().size());
        for (size_t k = 0; k < hand.mult_polys().size(); ++k)
            CHECK(generic.mult_polys()[k] == hand.mult_polys()[k]);
        for (size_t k = 0; k < hand.inverse_polys().size(); ++k)
            CHECK(generic.inverse_polys()[k] == hand.inverse_polys()[k]);
    };
    check(Presets::torus(3));
    check(Presets::heisenberg3());
    check(Presets::heisenberg5());
    check(Presets::direct_product(Presets::heisenberg3(), Presets::torus(2)));
}

TEST_CASE("associativity on random rational triples per built-in") {
    oracle::RatGen gen(2);
    for (const auto& P :
         {Presets::torus(2), Presets::heisenberg3(), Presets::heisenberg5(),
          Presets::direct_product(Presets::heisenberg3(), Presets::heisenberg3())}) {
        const int m = P.dim();
        for (int t = 0; t < 1000; ++t) {
            std::vector<Rational> a(m), b(m), c(m);
            for (int i = 0; i < m; ++i) { a[i] = gen(); b[i] = gen(); c[i] = gen(); }
            auto lhs = multiply(multiply(elt(P, a), elt(P, b)), elt(P, c));
            auto rhs = multiply(elt(P, a), multiply(elt(P, b), elt(P, c)));
            REQUIRE(lhs.c == rhs.c);
        }
    }
}

TEST_CASE("lattice closure under multiply and inverse") {
    auto H = Presets::heisenberg5();
    std::mt19937_64 rng(3);
    for (int t = 0; t < 300; ++t) {
        std::vector<Rational> a(5), b(5);
        for (int i = 0; i < 5; ++i) {
            a[i] = Rational(static_cast<long>(rng() % 9) - 4);
            b[i] = Rational(static_cast<long>(rng() % 9) - 4);
        }
        CHECK(is_lattice_element(multiply(elt(H, a), elt(H, b))));
        CHECK(is_lattice_element(inverse(elt(H, a))));
    }
}

TEST_CASE("generic engine handles step 3 and step 4 free nilpotent groups") {
    // free rank-2 step-3: X,Y | Z=[X,Y] | U=[X,Z], V=[Y,Z]
    std::vector<BracketTerm> f3 = {
        {0, 1, 2, 1}, {0, 2, 3, 1}, {1, 2, 4, 1}};
    auto P3 = MalcevPresentation::build(5, 3, {5, 3, 2}, f3, "free23");
    // free rank-2 step-4 adds P=[X,U], Q=[Y,U]=[X,V], R=[Y,V]
    std::vector<BracketTerm> f4 = {
        {0, 1, 2, 1}, {0, 2, 3, 1}, {1, 2, 4, 1},
        {0, 3, 5, 1}, {1, 3, 6, 1}, {0, 4, 6, 1}, {1, 4, 7, 1}};
    auto P4 = MalcevPresentation::build(8, 4, {8, 6, 5, 3}, f4, "free24");
    CHECK(P3.step() == 3);
    CHECK(P4.step() == 4);

    oracle::RatGen gen(4);
    for (const auto* P : {&P3, &P4}) {
        const int m = P->dim();
        for (int t = 0; t < 200; ++t) {
            std::vector<Rational> a(m), b(m), c(m);
            for (int i = 0; i < m; ++i) {
                a[i] = gen(6, 4);
                b[i] = gen(6, 4);
                c[i] = gen(6, 4);
            }
            auto lhs = multiply(multiply(elt(*P, a), elt(*P, b)), elt(*P, c));
            auto rhs = multiply(elt(*P, a), multiply(elt(*P, b), elt(*P, c)));
            REQUIRE(lhs.c == rhs.c);
        }
    }
}

TEST_CASE("invalid presentations are rejected") {
    // c_123 = 1 and c_213 = 1 is not antisymmetric
    std::vector<BracketTerm> bad = {{0, 1, 2, 1}, {1, 0, 2, 1}};
    CHECK_THROWS_AS(MalcevPresentation::build(3, 2, {3, 1}, bad), JacobiViolation);

    // bracket escaping the filtration: [V1,V2] = V1
    std::vector<BracketTerm> esc = {{0, 1, 0, 1}};
    CHECK_THROWS_AS(MalcevPresentation::build(3, 2, {3, 1}, esc),
                    FiltrationViolation);

    // step 5 chain: needs a degree-5 filtration and exceeds the BCH engine
    std::vector<BracketTerm> s5 = {{0, 1, 2, 1}, {0, 2, 3, 1}, {0, 3, 4, 1},
                                   {0, 4, 5, 1}};
    CHECK_THROWS_AS(
        MalcevPresentation::build(6, 5, {6, 4, 3, 2, 1}, s5), StepTooLarge);

    // Jacobi violation: [X,[Y,W]] terms inconsistent
    std::vector<BracketTerm> nj = {{0, 1, 3, 1}, {0, 2, 3, 1}, {1, 2, 3, 0},
                                   {0, 3, 4, 0}};
    // construct one that actually breaks Jacobi: [V1,V2]=V4, [V1,V3]=V4,
    // [V2,V3]=V5 with [V1,V5] = 0 but Jacobi forcing a nonzero value
    std::vector<BracketTerm> nj2 = {{0, 1, 2, 1}, {0, 2, 3, 1}, {1, 2, 4, 1},
                                    {0, 4, 3, 1}};
    bool threw = false;
    try {
        MalcevPresentation::build(5, 3, {5, 3, 2}, nj2);
    } catch (const JacobiViolation&) {
        threw = true;
    } catch (const FiltrationViolation&) {
        threw = true;
    }
    CHECK(threw);
    (void)nj;
}

TEST_CASE("reduce_mod_lattice produces fundamental-domain point and exact factor") {
    auto T1 = Presets::torus(1);
    auto [pt, gam] = reduce_mod_lattice(elt(T1, {Rational(23, 10)}));
    CHECK(pt.c[0] == Rational(3, 10));
    CHECK(gam.c[0] == 2);

    auto H = Presets::heisenberg3();
    auto [p2, g2] = reduce_mod_lattice(elt(H, {0, 0, Rational(-1, 4)}));
    CHECK(p2.c == std::vector<Rational>{0, 0, Rational(3, 4)});
    CHECK(g2.c == std::vector<Rational>{0, 0, -1});

    auto g = elt(H, {Rational(3, 2), Rational(1, 2), 0});
    auto [p3, g3] = reduce_mod_lattice(g);
    for (const auto& x : p3.c) {
        CHECK(x >= 0);
        CHECK(x < 1);
    }
    CHECK(is_lattice_element(g3));
    CHECK(multiply(as_element(p3), g3).c == g.c);

    oracle::RatGen gen(5);
    for (int t = 0; t < 200; ++t) {
        std::vector<Rational> c{gen(), gen(), gen()};
        auto ge = elt(H, c);
        auto [pp, gg] = reduce_mod_lattice(ge);
        for (const auto& x : pp.c) {
            REQUIRE(x >= 0);
            REQUIRE(x < 1);
        }
        REQUIRE(is_lattice_element(gg));
        REQUIRE(multiply(as_element(pp), gg).c == ge.c);
    }
}

TEST_CASE("metric surrogates") {
    auto H = Presets::heisenberg3();
    GroupElement<double> g{H, {0.2, 0.7, 0.1}};
    CHECK(dist(g, g) == 0.0);
    CHECK(dist(GroupElement<double>{H, {1, 0, 0}},
               GroupElement<double>{H, {0, 0, 0}}) == Catch::Approx(1.0));

    auto T1 = Presets::torus(1);
    ManifoldPoint<double> x{&T1, {0.95}}, y{&T1, {0.05}};
    CHECK(manifold_dist(x, y) == Catch::Approx(0.1));
}

TEST_CASE("char_eval and Gamma-invariance") {
    auto H = Presets::heisenberg3();
    HorizontalCharacter eta(H, {2, 0, 0});
    GroupElement<double> g{H, {0.25, 0.7, 0.3}};
    CHECK(char_eval(eta, g) == Catch::Approx(0.5));

    HorizontalCharacter zero(H, {0, 0, 0});
    CHECK(char_eval(zero, g) == 0.0);
    CHECK(zero.is_trivial());

    CHECK_THROWS_AS(HorizontalCharacter(H, {1, 0, 1}), SupportViolation);

    // invariance under right multiplication by lattice elements, exact flavor
    oracle::RatGen gen(6);
    std::mt19937_64 rng(7);
    HorizontalCharacter eta2(H, {3, -2, 0});
    for (int t = 0; t < 1000; ++t) {
        std::vector<Rational> c{gen(), gen(), gen()};
        std::vector<Rational> l(3);
        for (int i = 0; i < 3; ++i)
            l[i] = Rational(static_cast<long>(rng() % 11) - 5);
        auto ge = elt(H, c);
        auto moved = multiply(ge, elt(H, l));
        REQUIRE(char_eval(eta2, ge) == char_eval(eta2, moved));
    }

    // character homomorphism when eta annihilates [G,G]
    for (int t = 0; t < 1000; ++t) {
        std::vector<Rational> a{gen(), gen(), gen()}, b{gen(), gen(), gen()};
        auto lhs = char_eval(eta2, multiply(elt(H, a), elt(H, b)));
        auto rhs = rfrac(char_eval(eta2, elt(H, a)) + char_eval(eta2, elt(H, b)));
        REQUIRE(lhs == rhs);
    }
}

TEST_CASE("is_rational_element") {
    auto T1 = Presets::torus(1);
    auto r = is_rational_element(elt(T1, {Rational(1, 3)}), 10);
    REQUIRE(r.has_value());
    CHECK(*r == 3);

    // sqrt(2) truncated to an exact rational is not rational of height <= 100
    auto r2 = is_rational_element(elt(T1, {Rational(665857, 470832)}), 100);
    CHECK(!r2.has_value());

    auto H = Presets::heisenberg3();
    auto r3 = is_rational_element(elt(H, {Rational(1, 2), 0, 0}), 10);
    REQUIRE(r3.has_value());
    CHECK(*r3 == 2);
}

TEST_CASE("presentation text format round trip and parse errors") {
    auto H = Presets::heisenberg3();
    std::string text = H.serialize();
    std::istringstream in(text);
    auto back = MalcevPresentation::parse(in, "mem");
    CHECK(back.dim() == 3);
    CHECK(back.mult_polys()[2] == H.mult_polys()[2]);

    std::istringstream bad1("[group]\nm = 3\nd = 2\nfiltration_dims = 3 1\n"
                            "[brackets]\n1 2 99 1\n");
    try {
        MalcevPresentation::parse(bad1, "bad1");
        FAIL("expected ParseError");
    } catch (const ParseError& e) {
        CHECK(std::string(e.what()).find("bad1:6") != std::string::npos);
    }

    std::istringstream bad2("[group]\nm = 3\nd = 2\nfiltration_dims = 3 1\n"
                            "[brackets]\n1 2 3 one\n");
    try {
        MalcevPresentation::parse(bad2, "bad2");
        FAIL("expected ParseError");
    } catch (const ParseError& e) {
        CHECK(std::string(e.what()).find(":6") != std::string::npos);
    }
}
