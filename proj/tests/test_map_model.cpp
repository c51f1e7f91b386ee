#include <random>

#include "doctest.h"
#include "quadric/map_model.hpp"

using namespace quadric;

namespace {

RatPoly p4(std::initializer_list<std::pair<Monomial, long>> terms) {
    RatPoly r(4);
    for (const auto& [m, c] : terms) r.add_term(m, mpq_class(c));
    return r;
}

// F^2 as stated by the closed-form composition
std::vector<RatPoly> f2_reference() {
    return {
        p4({{Monomial{0, 0, 0, 1}, -1}}),
        p4({{Monomial{0, 0, 1, 0}, 1}, {Monomial{1, 1, 0, 1}, -1}}),
        p4({{Monomial{0, 1, 0, 0}, 1}, {Monomial{0, 1, 0, 2}, -1}}),
        p4({{Monomial{1, 0, 0, 0}, -1},
            {Monomial{1, 2, 0, 0}, 1},
            {Monomial{0, 1, 1, 1}, 1},
            {Monomial{1, 2, 0, 2}, -1}}),
    };
}

}  // namespace

TEST_CASE("F matches its defining formula") {
    AffineMap f = make_F();
    CHECK(f.components[0] == p4({{Monomial{0, 1, 0, 0}, 1}}));
    CHECK(f.components[1] == p4({{Monomial{0, 0, 0, 1}, -1}}));
    CHECK(f.components[2] ==
          p4({{Monomial{1, 0, 0, 0}, 1}, {Monomial{1, 2, 0, 0}, -1}}));
    CHECK(f.components[3] ==
          p4({{Monomial{0, 0, 1, 0}, -1}, {Monomial{1, 1, 0, 1}, 1}}));
    CHECK(f.is_polynomial());
}

TEST_CASE("F inverse carries the cleared denominator x1^2-1") {
    AffineMap g = make_F_inverse();
    CHECK(g.denominator ==
          p4({{Monomial{2, 0, 0, 0}, 1}, {Monomial{0, 0, 0, 0}, -1}}));
    CHECK_FALSE(g.is_polynomial());
}

TEST_CASE("pointwise evaluation mod p") {
    const uint32_t p = kNttPrimes[0].p;
    AffineMap f = make_F();
    auto v = eval_point_mod_p(f.components, {1, 1, 1, 1}, p);
    CHECK(v == std::vector<uint32_t>({1, p - 1, 0, 0}));
    CHECK(eval_point_mod_p(f.components, {0, 0, 0, 0}, p) ==
          std::vector<uint32_t>({0, 0, 0, 0}));

    // fiber invariance at a sample point: q(2,1,1,1) = 1 and q(F(2,1,1,1)) = 1
    RatPoly q = quadric_form();
    auto qv = eval_point_mod_p({q}, {2, 1, 1, 1}, p);
    CHECK(qv[0] == 1);
    auto img = eval_point_mod_p(f.components, {2, 1, 1, 1}, p);
    CHECK(eval_point_mod_p({q}, img, p)[0] == 1);
}

TEST_CASE("compose: F o F equals the closed form; identity is neutral") {
    AffineMap f = make_F();
    auto f2 = compose(f.components, f.components);
    auto ref = f2_reference();
    for (int i = 0; i < 4; ++i) CHECK(f2[i] == ref[i]);

    AffineMap id = make_identity_map();
    CHECK(compose(id.components, f.components) == f.components);
    CHECK(compose(f.components, id.components) == f.components);
}

TEST_CASE("compose is associative on iterates") {
    AffineMap f = make_F();
    auto ff = compose(f.components, f.components);
    CHECK(compose(f.components, ff) == compose(ff, f.components));
}

TEST_CASE("compose(F, F^3) fourth component has a unique maximal monomial") {
    AffineMap f = make_F();
    auto f2 = compose(f.components, f.components);
    auto f3 = compose(f.components, f2);
    auto f4 = compose(f.components, f3);
    const RatPoly& c4 = f4[3];
    CHECK(c4.degree() == 17);
    CHECK(c4.max_degree_term_count() == 1);
    // frozen by independent symbolic expansion: x1^4 x2^6 x4^7, coefficient +1
    CHECK(c4.leading_term().first == Monomial{4, 6, 0, 7});
    CHECK(c4.leading_term().second == 1);
}

TEST_CASE("lifts") {
    MapLift lf = lift(make_F());
    CHECK(lf.degree == 3);
    // [x2 z^2, -x4 z^2, x1 z^2 - x1 x2^2, -x3 z^2 + x1 x2 x4, z^3]
    RatPoly z3(5);
    z3.add_term(Monomial{0, 0, 0, 0, 3}, mpq_class(1));
    CHECK(lf.components[4] == z3);

    MapLift lg = lift(make_F_inverse());
    CHECK(lg.degree == 3);
    RatPoly fifth(5);  // z(x1^2 - z^2)
    fifth.add_term(Monomial{2, 0, 0, 0, 1}, mpq_class(1));
    fifth.add_term(Monomial{0, 0, 0, 0, 3}, mpq_class(-1));
    CHECK(lg.components[4] == fifth);

    MapLift li = lift(make_identity_map());
    CHECK(li.degree == 1);
    for (int i = 0; i < 5; ++i)
        CHECK(li.components[i] == RatPoly::variable(5, i, mpq_class(1)));
}

TEST_CASE("fibration invariance") {
    CHECK(verify_fibration(make_F()));
    CHECK(verify_fibration(make_F_inverse()));

    // coordinate swap x1 <-> x2 does not preserve q
    AffineMap swap = make_identity_map();
    std::swap(swap.components[0], swap.components[1]);
    CHECK_FALSE(verify_fibration(swap));
}

TEST_CASE("every member of the family G preserves the fibration") {
    std::mt19937_64 rng(7);
    for (int iter = 0; iter < 5; ++iter) {
        FamilyParams params{RatPoly(4), RatPoly(4), RatPoly(4)};
        auto rnd24 = [&](RatPoly& p) {
            for (int t = 0; t < 3; ++t) {
                Monomial m(4);
                m.e[1] = rng() % 3;
                m.e[3] = rng() % 3;
                p.add_term(m, mpq_class(static_cast<long>(rng() % 7) - 3));
            }
        };
        rnd24(params.q1);
        rnd24(params.q3);
        rnd24(params.r);
        CHECK(verify_fibration(make_family(params)));
    }
}

TEST_CASE("verify_inverse") {
    CHECK(verify_inverse());
    CHECK(verify_inverse(make_identity_map(), make_identity_map()));

    AffineMap broken = make_F_inverse();
    broken.components[0] = -broken.components[0];
    CHECK_FALSE(verify_inverse(make_F(), broken));
}

TEST_CASE("make_family with P = x1 x2 reproduces F") {
    FamilyParams params{RatPoly::variable(4, 1, mpq_class(1)), RatPoly(4),
                        RatPoly(4)};
    AffineMap g = make_family(params);
    AffineMap f = make_F();
    for (int i = 0; i < 4; ++i) CHECK(g.components[i] == f.components[i]);
}

TEST_CASE("lemma 4 executable check up to n=7") {
    auto rows = verify_lemma4(7);
    // component degrees frozen from an independent symbolic expansion
    const std::array<std::array<int64_t, 4>, 7> expected = {{
        {1, 1, 3, 3},
        {1, 3, 3, 5},
        {3, 5, 7, 9},
        {5, 9, 13, 17},
        {9, 17, 23, 31},
        {17, 31, 43, 57},
        {31, 57, 79, 105},
    }};
    for (int n = 1; n <= 7; ++n) {
        const Lemma4Row& r = rows[n - 1];
        CHECK(r.component_degrees == expected[n - 1]);
        CHECK(r.leading_in_component4);
        CHECK(r.unique_leading_monomial);
        CHECK(r.recurrence_ok);
    }
    // n=1: leading term of (F)_4 is x1 x2 x4
    CHECK(rows[0].leading == Monomial{1, 1, 0, 1});
    CHECK(rows[0].leading_coeff_sign == 1);
    // n=2: deg 5 with leading monomial x1 x2^2 x4^2, coefficient -1
    CHECK(rows[1].degree == 5);
    CHECK(rows[1].leading == Monomial{1, 2, 0, 2});
    CHECK(rows[1].leading_coeff_sign == -1);
    // n=4: 17 = 9 + 5 + 3
    CHECK(rows[3].degree == 17);
}

TEST_CASE("lemma 4 budget is enforced") {
    CHECK_THROWS_AS(verify_lemma4(9), std::domain_error);
}

TEST_CASE("fast iterate agrees with generic composition at n=4") {
    AffineMap f = make_F();
    auto f2 = compose(f.components, f.components);
    auto f4 = compose(f2, f2);
    auto d = symbolic_iterate_degrees(4);
    for (int i = 0; i < 4; ++i) CHECK(d[i] == f4[i].degree());
}

TEST_CASE("curve ideals") {
    mpq_class c(7, 5);
    auto ideals = curve_ideals(c);
    REQUIRE(ideals.size() == 3);
    CHECK(ideals[0].name == "C");
    CHECK(ideals[0].components.size() == 1);
    CHECK(ideals[1].name == "D1");
    CHECK(ideals[1].components.size() == 2);
    CHECK(ideals[2].name == "D2");
    CHECK(ideals[2].components.size() == 2);

    RatPoly fiber = quadric_form() - RatPoly::constant(4, c);
    // C's generators
    CHECK(ideals[0].components[0][0] ==
          p4({{Monomial{0, 1, 0, 0}, 1},
              {Monomial{2, 1, 0, 0}, -1},
              {Monomial{0, 0, 1, 0}, -1}}));
    CHECK(ideals[0].components[0][1] ==
          p4({{Monomial{1, 0, 0, 0}, 1}, {Monomial{0, 0, 0, 1}, 1}}));
    CHECK(ideals[0].components[0][2] == fiber);
    // D2 component 2 = <x1, x4, fiber>
    CHECK(ideals[2].components[1][0] == RatPoly::variable(4, 0, mpq_class(1)));
    CHECK(ideals[2].components[1][1] == RatPoly::variable(4, 3, mpq_class(1)));
    CHECK(ideals[2].components[1][2] == fiber);

    // membership: x1 = x4 = 0, x2 x3 = -c satisfies D2 component 2
    std::vector<mpq_class> pt = {0, c, -1, 0};
    auto conv = +[](const mpq_class& v) { return v; };
    for (const auto& g : ideals[2].components[1])
        CHECK(g.eval<mpq_class>(pt, conv) == 0);
}

TEST_CASE("modular consistency of symbolic composition") {
    const uint32_t p = kNttPrimes[1].p;
    AffineMap f = make_F();
    auto f2 = compose(f.components, f.components);

    std::vector<FpPoly> comp_p, f_p;
    for (const auto& c : f.components) f_p.push_back(reduce_mod(c, p));
    for (const auto& c : f2) comp_p.push_back(reduce_mod(c, p));
    for (int i = 0; i < 4; ++i)
        CHECK(f_p[i].substituted(f_p) == comp_p[i]);
}

TEST_CASE("map JSON serialization is stable and carries integer terms") {
    std::string j = map_to_json(make_F());
    CHECK(j == map_to_json(make_F()));
    CHECK(j.find("x1") != std::string::npos);
    CHECK(j.find("exponents") != std::string::npos);
}
