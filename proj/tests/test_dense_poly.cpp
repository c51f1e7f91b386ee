#include <random>

#include "doctest.h"
#include "quadric/dense_poly.hpp"
#include "quadric/fp.hpp"

using namespace quadric;

namespace {

const uint32_t P = kNttPrimes[0].p;

DensePoly1 random_poly(size_t deg, std::mt19937_64& rng, uint32_t p = P,
                       bool monic = false) {
    std::vector<uint32_t> c(deg + 1);
    std::uniform_int_distribution<uint32_t> dist(0, p - 1);
    for (auto& v : c) v = dist(rng);
    if (monic || c.back() == 0) c.back() = monic ? 1 : 1 + dist(rng) % (p - 1);
    return DensePoly1(std::move(c), p);
}

DensePoly1 school_mul(const DensePoly1& a, const DensePoly1& b) {
    if (a.is_zero() || b.is_zero()) return DensePoly1::zero(a.mod());
    std::vector<uint32_t> r(a.coeffs().size() + b.coeffs().size() - 1, 0);
    for (size_t i = 0; i < a.coeffs().size(); ++i)
        for (size_t j = 0; j < b.coeffs().size(); ++j)
            r[i + j] = add_mod(r[i + j],
                               mul_mod(a.coeffs()[i], b.coeffs()[j], a.mod()),
                               a.mod());
    return DensePoly1(std::move(r), a.mod());
}

DensePoly1 gcd_euclid_oracle(DensePoly1 a, DensePoly1 b) {
    while (!b.is_zero()) {
        auto r = divmod(a, b).remainder;
        a = b;
        b = r;
    }
    return a.monic();
}

}  // namespace

TEST_CASE("zero polynomial degree is the -inf sentinel") {
    DensePoly1 z = DensePoly1::zero(P);
    CHECK(z.degree() == DensePoly1::kNegInfDegree);
    CHECK(z.degree() != -1);
    CHECK(z.is_zero());
}

TEST_CASE("modulus mismatch is rejected") {
    DensePoly1 a({1, 2}, kNttPrimes[0].p);
    DensePoly1 b({1, 2}, kNttPrimes[1].p);
    CHECK_THROWS_AS(a + b, std::domain_error);
    CHECK_THROWS_AS(a * b, std::domain_error);
}

TEST_CASE("ntt multiplication matches schoolbook") {
    std::mt19937_64 rng(17);
    for (int iter = 0; iter < 10; ++iter) {
        DensePoly1 a = random_poly(150 + iter, rng);
        DensePoly1 b = random_poly(200, rng);
        CHECK(a * b == school_mul(a, b));
    }
    // across all registered primes
    for (const auto& np : kNttPrimes) {
        DensePoly1 a = random_poly(130, rng, np.p);
        DensePoly1 b = random_poly(140, rng, np.p);
        CHECK(a * b == school_mul(a, b));
    }
}

TEST_CASE("divmod invariant a = q*b + r") {
    std::mt19937_64 rng(5);
    for (size_t da : {7u, 100u, 900u, 5000u}) {
        DensePoly1 a = random_poly(da, rng);
        DensePoly1 b = random_poly(da / 3 + 1, rng);
        auto qr = divmod(a, b);
        CHECK(qr.quotient * b + qr.remainder == a);
        CHECK(qr.remainder.degree() < b.degree());
    }
}

TEST_CASE("interpolate: t^2 samples at 0,1,2 over p=101 give (0,0,1)") {
    // small prime: generic Newton path only
    const uint32_t p = 101;
    std::vector<std::pair<uint32_t, uint32_t>> samples = {
        {0, 0}, {1, 1}, {2, 4}};
    // p=101 is not an NTT prime, but the generic path needs no transforms
    DensePoly1 r = interpolate(samples, 2, p);
    CHECK(r.coeffs() == std::vector<uint32_t>({0, 0, 1}));
}

TEST_CASE("interpolate: constant samples give degree 0") {
    std::vector<std::pair<uint32_t, uint32_t>> samples = {
        {2, 9}, {3, 9}, {5, 9}};
    DensePoly1 r = interpolate(samples, 2, P);
    CHECK(r.degree() == 0);
    CHECK(r.coeff(0) == 9);
}

TEST_CASE("interpolate rejects duplicates and short sample lists") {
    std::vector<std::pair<uint32_t, uint32_t>> dup = {{1, 1}, {1, 2}, {2, 3}};
    CHECK_THROWS_AS(interpolate(dup, 2, P), std::invalid_argument);
    std::vector<std::pair<uint32_t, uint32_t>> shrt = {{1, 1}, {2, 2}};
    CHECK_THROWS_AS(interpolate(shrt, 2, P), std::invalid_argument);
}

TEST_CASE("eval/interpolate round trip at degree 3^5 through the coset path") {
    std::mt19937_64 rng(23);
    const size_t deg = 243;  // 3^5
    DensePoly1 a = random_poly(deg, rng);
    size_t n = 256;
    auto vals = eval_on_roots(a, n);
    // spot check against Horner
    uint32_t w = root_of_unity(P, 8);
    CHECK(vals[0] == a.eval(1));
    CHECK(vals[1] == a.eval(w));
    std::vector<std::pair<uint32_t, uint32_t>> samples(n);
    uint32_t t = 1;
    for (size_t i = 0; i < n; ++i) {
        samples[i] = {t, vals[i]};
        t = mul_mod(t, w, P);
    }
    CHECK(interpolate(samples, deg, P) == a);
}

TEST_CASE("eval/interpolate round trip at degree 3^8") {
    std::mt19937_64 rng(29);
    const size_t deg = 6561;  // 3^8
    DensePoly1 a = random_poly(deg, rng);
    size_t n = 8192;
    auto vals = eval_on_roots(a, n);
    CHECK(interpolate_on_roots(std::move(vals), P) == a);
}

TEST_CASE("gcd basics") {
    // gcd(t^2-1, t-1) = t-1
    DensePoly1 a({P - 1, 0, 1}, P);
    DensePoly1 b({P - 1, 1}, P);
    CHECK(gcd1(a, b) == b);
    // gcd(p, 0) = monic p
    DensePoly1 c({4, 6}, P);
    CHECK(gcd1(c, DensePoly1::zero(P)) == c.monic());
    CHECK(gcd1(DensePoly1::zero(P), c) == c.monic());
}

TEST_CASE("gcd of constructed instance gcd(a*g, b*g) = g at degree 1e4") {
    std::mt19937_64 rng(31);
    DensePoly1 g = random_poly(10000, rng, P, true);
    DensePoly1 a = random_poly(900, rng);
    DensePoly1 b = random_poly(800, rng);
    // a, b random of distinct degree are coprime with overwhelming probability
    DensePoly1 r = gcd1(a * g, b * g);
    CHECK(r == g);
    // divides both exactly
    CHECK(divmod(a * g, r).remainder.is_zero());
    CHECK(divmod(b * g, r).remainder.is_zero());
}

TEST_CASE("half-gcd path agrees with classical Euclid") {
    std::mt19937_64 rng(37);
    uint32_t saved = gcd1_hgcd_threshold();
    gcd1_set_hgcd_threshold(40);  // force the subquadratic path on small inputs
    for (int iter = 0; iter < 25; ++iter) {
        DensePoly1 g = random_poly(5 + iter, rng, P, true);
        DensePoly1 a = random_poly(100 + 7 * iter, rng) * g;
        DensePoly1 b = random_poly(90 + 5 * iter, rng) * g;
        CHECK(gcd1(a, b) == gcd_euclid_oracle(a, b));
    }
    // coprime case
    for (int iter = 0; iter < 10; ++iter) {
        DensePoly1 a = random_poly(300, rng);
        DensePoly1 b = random_poly(299, rng);
        CHECK(gcd1(a, b) == gcd_euclid_oracle(a, b));
    }
    gcd1_set_hgcd_threshold(saved);
}

TEST_CASE("half-gcd at large degree with division certificate") {
    std::mt19937_64 rng(41);
    // keep the default threshold; degree well above it
    DensePoly1 g = random_poly(120000, rng, P, true);
    DensePoly1 a = random_poly(20000, rng);
    DensePoly1 b = random_poly(19000, rng);
    DensePoly1 r = gcd1(a * g, b * g);
    CHECK(r.degree() == g.degree());
    CHECK(r == g);
    CHECK(divmod(a * g, r).remainder.is_zero());
}
