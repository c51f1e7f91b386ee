#include <algorithm>
#include <random>

#include "doctest.h"
#include "quadric/solver.hpp"

using namespace quadric;

namespace {

// univariate system from (degree -> coefficient) pairs, lowest degree first
PolySystem uni(std::vector<Cx> coeffs) {
    std::vector<CxTerm> eq;
    for (size_t d = 0; d < coeffs.size(); ++d) {
        if (coeffs[d] == Cx(0.0)) continue;
        eq.push_back({coeffs[d], {static_cast<uint16_t>(d)}});
    }
    return PolySystem(1, {eq});
}

std::vector<CxVec> converged_points(const TrackOutcome& out) {
    std::vector<CxVec> pts;
    for (const auto& p : out.paths)
        if (p.status == PathStatus::kConverged) pts.push_back(p.endpoint);
    return pts;
}

bool contains_root(const std::vector<CxVec>& pts, const CxVec& target,
                   double tol) {
    return std::any_of(pts.begin(), pts.end(), [&](const CxVec& p) {
        return (p - target).norm() < tol;
    });
}

CxVec vec1(Cx a) {
    CxVec v(1);
    v[0] = a;
    return v;
}

CxVec vec2(Cx a, Cx b) {
    CxVec v(2);
    v[0] = a;
    v[1] = b;
    return v;
}

}  // namespace

TEST_CASE("settings validation") {
    TrackSettings s;
    CHECK_NOTHROW(s.validate());

    TrackSettings bad = s;
    bad.min_step = s.initial_step;
    CHECK_THROWS_AS(bad.validate(), std::invalid_argument);

    bad = s;
    bad.dedup_radius = s.final_tol;
    CHECK_THROWS_AS(bad.validate(), std::invalid_argument);

    bad = s;
    bad.corrector_tol = -1.0;
    CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
}

TEST_CASE("start systems enumerate all roots of unity") {
    auto s1 = start_system({2});
    REQUIRE(s1.points.size() == 2);
    CHECK(std::abs(s1.points[0][0] - Cx(1.0)) < 1e-15);
    CHECK(std::abs(s1.points[1][0] - Cx(-1.0)) < 1e-15);

    auto s2 = start_system({2, 3});
    CHECK(s2.points.size() == 6);
    CHECK(s2.system.bezout() == 6);

    auto s3 = start_system({3, 3});
    CHECK(s3.points.size() == 9);
    CxVec f;
    for (const auto& p : s3.points) {
        for (int i = 0; i < 2; ++i)
            CHECK(std::abs(std::abs(p[i]) - 1.0) < 1e-14);
        s3.system.eval(p, f);
        CHECK(f.lpNorm<Eigen::Infinity>() < 1e-14);
    }

    CHECK_THROWS_AS(start_system({0}), std::invalid_argument);
}

TEST_CASE("PolySystem evaluation and jacobian") {
    // f = x^2 + y^2 - 2, g = x - y
    PolySystem sys(2, {{{Cx(1.0), {2, 0}}, {Cx(1.0), {0, 2}}, {Cx(-2.0), {0, 0}}},
                       {{Cx(1.0), {1, 0}}, {Cx(-1.0), {0, 1}}}});
    CHECK(sys.degrees() == std::vector<int>({2, 1}));
    CHECK(sys.bezout() == 2);

    CxVec x = vec2(Cx(1.0, 1.0), Cx(2.0));
    CxVec f;
    CxMat j;
    sys.eval_jacobian(x, f, j);
    CHECK(std::abs(f[0] - Cx(2.0, 2.0)) < 1e-15);  // (1+i)^2 + 4 - 2
    CHECK(std::abs(f[1] - Cx(-1.0, 1.0)) < 1e-15);
    CHECK(std::abs(j(0, 0) - Cx(2.0, 2.0)) < 1e-15);
    CHECK(std::abs(j(0, 1) - Cx(4.0)) < 1e-15);
    CHECK(std::abs(j(1, 0) - Cx(1.0)) < 1e-15);
    CHECK(std::abs(j(1, 1) - Cx(-1.0)) < 1e-15);

    // finite-difference cross check at a random point
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> u(-1, 1);
    CxVec p = vec2(Cx(u(rng), u(rng)), Cx(u(rng), u(rng)));
    sys.eval_jacobian(p, f, j);
    const double h = 1e-7;
    for (int col = 0; col < 2; ++col) {
        CxVec ph = p, fh;
        ph[col] += h;
        sys.eval(ph, fh);
        for (int row = 0; row < 2; ++row)
            CHECK(std::abs((fh[row] - f[row]) / h - j(row, col)) < 1e-5);
    }

    CHECK_THROWS_AS(PolySystem(2, {{{Cx(1.0), {1, 0}}}}),
                    std::invalid_argument);  // not square
}

TEST_CASE("certified residual agrees with double evaluation at scale") {
    PolySystem sys = uni({Cx(-1.0), Cx(0.0), Cx(1.0)});  // x^2 - 1
    CHECK(sys.certified_residual(vec1(Cx(1.0))) == 0.0);
    double r = sys.certified_residual(vec1(Cx(1.0 + 1e-8)));
    CHECK(r == doctest::Approx(2e-8).epsilon(1e-6));
}

TEST_CASE("track x^2 - 1") {
    PolySystem sys = uni({Cx(-1.0), Cx(0.0), Cx(1.0)});
    auto out = track(sys, TrackSettings{}, 1);
    CHECK(out.converged == 2);
    CHECK(out.at_infinity == 0);
    CHECK(out.failed == 0);
    auto pts = converged_points(out);
    CHECK(contains_root(pts, vec1(Cx(1.0)), 1e-10));
    CHECK(contains_root(pts, vec1(Cx(-1.0)), 1e-10));
    for (const auto& p : out.paths) CHECK(p.residual < 1e-10);
}

TEST_CASE("track circle-line intersection with spurious paths") {
    PolySystem sys(2, {{{Cx(1.0), {2, 0}}, {Cx(1.0), {0, 2}}, {Cx(-2.0), {0, 0}}},
                       {{Cx(1.0), {1, 0}}, {Cx(-1.0), {0, 1}}}});
    // square up the linear equation so every equation meets a degree-2 start:
    // multiply x - y by a generic affine factor, giving Bezout 4 with 2 true
    // roots and 2 spurious/diverged paths
    PolySystem randomized(
        2, {{{Cx(1.0), {2, 0}}, {Cx(1.0), {0, 2}}, {Cx(-2.0), {0, 0}}},
            {{Cx(0.7, 0.2), {2, 0}},
             {Cx(-0.7, -0.2), {1, 1}},
             {Cx(0.3, -0.4), {1, 0}},
             {Cx(-0.3, 0.4), {0, 1}}}});
    auto out = track(randomized, TrackSettings{}, 5);
    CHECK(out.paths.size() == 4);
    CHECK(out.converged + out.at_infinity + out.failed == 4);
    auto pts = converged_points(out);
    CHECK(contains_root(pts, vec2(Cx(1.0), Cx(1.0)), 1e-8));
    CHECK(contains_root(pts, vec2(Cx(-1.0), Cx(-1.0)), 1e-8));
    // the genuine roots of the original (unsquared) system are exactly 2
    int genuine = 0;
    CxVec f;
    auto dd = dedup(pts, 1e-6);
    for (const auto& rep : dd.representatives) {
        sys.eval(rep, f);
        if (f.lpNorm<Eigen::Infinity>() < 1e-7) ++genuine;
    }
    CHECK(genuine == 2);
}

TEST_CASE("double root is reported as one cluster of multiplicity 2") {
    PolySystem sys = uni({Cx(1.0), Cx(-2.0), Cx(1.0)});  // (x-1)^2
    TrackSettings s;
    s.final_tol = 1e-9;    // residual (x-1)^2 is quadratically small
    s.dedup_radius = 1e-3; // endpoints land within sqrt(final_tol) of the root
    auto out = track(sys, s, 11);
    CHECK(out.converged == 2);
    auto pts = converged_points(out);
    auto clusters = dedup(pts, s.dedup_radius);
    REQUIRE(clusters.clusters.size() == 1);
    CHECK(clusters.clusters[0].size() == 2);
    for (const auto& p : out.paths)
        if (p.status == PathStatus::kConverged) CHECK(p.multiplicity == 2);
    CHECK(std::abs(clusters.representatives[0][0] - Cx(1.0)) < 1e-4);
}

TEST_CASE("refine") {
    PolySystem sys = uni({Cx(-1.0), Cx(0.0), Cx(1.0)});
    auto r = refine(sys, vec1(Cx(1.1)), 10, 1e-14);
    CHECK(std::abs(r.point[0] - Cx(1.0)) < 1e-13);
    CHECK(r.iterations <= 5);
    CHECK_FALSE(r.singular);
    CHECK_FALSE(r.linear_rate);

    // exact root stays put
    auto r2 = refine(sys, vec1(Cx(-1.0)), 10, 1e-14);
    CHECK(r2.point[0] == Cx(-1.0));
    CHECK(r2.iterations == 0);

    // x^2 = 0 from 0.1: linear rate, singular at the limit
    PolySystem sq = uni({Cx(0.0), Cx(0.0), Cx(1.0)});
    auto r3 = refine(sq, vec1(Cx(0.1)), 25, 1e-14);
    CHECK(r3.linear_rate);
    CHECK(r3.singular);
    CHECK(std::abs(r3.point[0]) < 1e-4);
}

TEST_CASE("dedup") {
    std::vector<CxVec> pts = {vec1(Cx(1.0)), vec1(Cx(1.0 + 1e-12)),
                              vec1(Cx(-1.0))};
    auto cs = dedup(pts, 1e-8);
    CHECK(cs.clusters.size() == 2);
    CHECK_FALSE(cs.ambiguous);

    CHECK(dedup({}, 1e-8).clusters.empty());

    // two clusters separated by less than 10x the radius are flagged
    auto amb = dedup({vec1(Cx(0.0)), vec1(Cx(5e-8))}, 1e-8);
    CHECK(amb.clusters.size() == 2);
    CHECK(amb.ambiguous);
}

TEST_CASE("constructed system with known multiplicities") {
    // p(x) = (x-1)^2 (x-2)^2 (x+1)^2 (x-3) (x+3) (x i - 4i): 9 paths,
    // 6 distinct roots; run as a univariate degree-9 system
    std::vector<Cx> roots = {1, 1, 2, 2, -1, -1, 3, -3, 4};
    std::vector<Cx> coeffs = {Cx(1.0)};
    for (Cx r : roots) {
        std::vector<Cx> next(coeffs.size() + 1, Cx(0.0));
        for (size_t i = 0; i < coeffs.size(); ++i) {
            next[i + 1] += coeffs[i];
            next[i] -= r * coeffs[i];
        }
        coeffs = next;
    }
    std::reverse(coeffs.begin(), coeffs.end());  // lowest degree first
    PolySystem sys = uni(coeffs);
    TrackSettings s;
    s.final_tol = 1e-7;  // double roots land at sqrt(eps) accuracy
    s.dedup_radius = 1e-3;
    auto out = track(sys, s, 17);
    CHECK(out.converged == 9);
    auto cs = dedup(converged_points(out), s.dedup_radius);
    REQUIRE(cs.clusters.size() == 6);
    std::vector<int> sizes;
    for (const auto& c : cs.clusters) sizes.push_back(int(c.size()));
    std::sort(sizes.begin(), sizes.end());
    CHECK(sizes == std::vector<int>({1, 1, 1, 2, 2, 2}));
}

TEST_CASE("seed determinism") {
    PolySystem sys(2, {{{Cx(1.0), {3, 0}}, {Cx(-1.0), {0, 1}}},
                       {{Cx(1.0), {0, 2}}, {Cx(1.0), {1, 0}}, {Cx(-3.0), {0, 0}}}});
    auto a = track(sys, TrackSettings{}, 99);
    auto b = track(sys, TrackSettings{}, 99);
    REQUIRE(a.paths.size() == b.paths.size());
    CHECK(a.gamma == b.gamma);
    for (size_t i = 0; i < a.paths.size(); ++i) {
        CHECK(a.paths[i].status == b.paths[i].status);
        if (a.paths[i].status == PathStatus::kConverged)
            CHECK((a.paths[i].endpoint - b.paths[i].endpoint).norm() == 0.0);
    }
}

TEST_CASE("gamma robustness: independent seeds agree on finite counts") {
    PolySystem sys(2, {{{Cx(1.0), {2, 0}}, {Cx(1.0), {0, 2}}, {Cx(-4.0), {0, 0}}},
                       {{Cx(1.0), {1, 1}}, {Cx(-1.0), {0, 0}}}});  // xy = 1
    auto a = track(sys, TrackSettings{}, 2);
    auto b = track(sys, TrackSettings{}, 3);
    CHECK(a.gamma != b.gamma);
    auto ca = dedup(converged_points(a), 1e-6);
    auto cb = dedup(converged_points(b), 1e-6);
    CHECK(ca.clusters.size() == cb.clusters.size());
    CHECK(a.converged == b.converged);
}

TEST_CASE("path conservation on random small systems") {
    std::mt19937_64 rng(2024);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    std::uniform_int_distribution<int> deg(1, 3);
    int runs = 0;
    for (int iter = 0; iter < 50; ++iter) {
        int n = 1 + static_cast<int>(rng() % 3);
        std::vector<std::vector<CxTerm>> eqs(n);
        for (int i = 0; i < n; ++i) {
            int d = deg(rng);
            // dense random polynomial of degree d in n variables
            std::vector<uint16_t> exps(n, 0);
            std::function<void(int, int)> emit = [&](int var, int rem) {
                if (var == n) {
                    eqs[i].push_back({Cx(u(rng), u(rng)), exps});
                    return;
                }
                for (int e = 0; e <= rem; ++e) {
                    exps[var] = static_cast<uint16_t>(e);
                    emit(var + 1, rem - e);
                }
                exps[var] = 0;
            };
            emit(0, d);
            // force the intended top degree to be present
            exps.assign(n, 0);
            exps[i] = static_cast<uint16_t>(d);
            eqs[i].push_back({Cx(1.0 + u(rng) * 0.1, u(rng) * 0.1), exps});
        }
        PolySystem sys(n, std::move(eqs));
        auto out = track(sys, TrackSettings{}, 1000 + iter);
        CHECK(out.converged + out.at_infinity + out.failed == sys.bezout());
        for (const auto& p : out.paths)
            if (p.status == PathStatus::kConverged)
                CHECK(p.residual < TrackSettings{}.final_tol);
        ++runs;
    }
    CHECK(runs == 50);
}
