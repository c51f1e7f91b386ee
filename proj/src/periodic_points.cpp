#include "quadric/periodic_points.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>
#include <stdexcept>

#include "json.hpp"

namespace quadric {

namespace {

RatPoly rvar(int nv, int i) {
    return RatPoly::variable(static_cast<uint8_t>(nv), i, mpq_class(1));
}

RatPoly rconst(int nv, const mpq_class& c) {
    return RatPoly::constant(static_cast<uint8_t>(nv), c);
}

/// Rank of an integer matrix over F_p, p large; enough certainty for
/// rejecting a degenerate random draw.
int rank_mod_p(const std::vector<std::vector<int>>& m) {
    const uint32_t p = kNttPrimes[0].p;
    const int rows = static_cast<int>(m.size());
    const int cols = static_cast<int>(m[0].size());
    std::vector<std::vector<uint32_t>> a(rows, std::vector<uint32_t>(cols));
    for (int i = 0; i < rows; ++i)
        for (int j = 0; j < cols; ++j) a[i][j] = to_mod(m[i][j], p);
    int rank = 0;
    for (int col = 0; col < cols && rank < rows; ++col) {
        int pivot = -1;
        for (int i = rank; i < rows; ++i)
            if (a[i][col]) {
                pivot = i;
                break;
            }
        if (pivot < 0) continue;
        std::swap(a[rank], a[pivot]);
        const uint32_t inv = inv_mod(a[rank][col], p);
        for (int i = rank + 1; i < rows; ++i) {
            if (!a[i][col]) continue;
            const uint32_t f = mul_mod(a[i][col], inv, p);
            for (int j = col; j < cols; ++j)
                a[i][j] = sub_mod(a[i][j], mul_mod(f, a[rank][j], p), p);
        }
        ++rank;
    }
    return rank;
}

}  // namespace

mpq_class random_fiber_value(uint64_t seed) {
    std::mt19937_64 rng(seed ^ 0xa0761d6478bd642fULL);
    std::uniform_int_distribution<int> den(7, 16);
    const int d = den(rng);
    std::uniform_int_distribution<int> num(1, d - 1);
    return mpq_class(d + num(rng), d);
}

OrbitSystem build_orbit_system(int n, const mpq_class& c, uint64_t seed) {
    if (n < 1) throw std::invalid_argument("build_orbit_system: n < 1");
    OrbitSystem os;
    os.n = n;
    os.c = c;
    os.seed = seed;
    const int nv = 2 * n;
    os.nvars = nv;

    // orbit components X[k][i] in the reduced variables; the linear map
    // components x'1 = x2, x'2 = -x4 propagate forward, and the two return
    // relations x^(n)_1 = x^(0)_1, x^(n)_2 = x^(0)_2 eliminate the last two
    // fourth-coordinates (resp. fold onto x^(0) when n is small)
    std::vector<std::array<RatPoly, 4>> x(n + 1);
    if (n == 1) {
        x[0] = {rvar(nv, 0), rvar(nv, 0), rvar(nv, 1), -rvar(nv, 0)};
    } else {
        x[0] = {rvar(nv, 0), rvar(nv, 1), rvar(nv, 2),
                n == 2 ? -rvar(nv, 0) : rvar(nv, 3)};
        int idx = n == 2 ? 3 : 4;
        for (int k = 1; k < n; ++k) {
            x[k][0] = x[k - 1][1];
            x[k][1] = -x[k - 1][3];
            x[k][2] = rvar(nv, idx++);
            if (k == n - 2)
                x[k][3] = -rvar(nv, 0);
            else if (k == n - 1)
                x[k][3] = -rvar(nv, 1);
            else
                x[k][3] = rvar(nv, idx++);
        }
        if (idx != nv)
            throw std::logic_error("build_orbit_system: variable count");
    }
    x[n] = x[0];

    // per step: x'3 = x1 (1 - x2^2), x'4 = -x3 + x1 x2 x4; then the fiber
    for (int k = 0; k < n; ++k) {
        os.equations.push_back(x[k + 1][2] - x[k][0] +
                               x[k][0] * x[k][1] * x[k][1]);
        os.equations.push_back(x[k + 1][3] + x[k][2] -
                               x[k][0] * x[k][1] * x[k][3]);
    }
    os.equations.push_back(x[0][0] * x[0][3] - x[0][1] * x[0][2] -
                           rconst(nv, c));
    for (int k = 0; k < n; ++k)
        for (int i = 0; i < 4; ++i) os.orbit.push_back(x[k][i]);

    const int rows = 2 * n, cols = 2 * n + 1;
    std::mt19937_64 rng(seed ^ 0x2545f4914f6cdd1dULL);
    std::uniform_int_distribution<int> entry(-9, 9);
    for (int attempt = 0;; ++attempt) {
        if (attempt > 32)
            throw std::runtime_error(
                "build_orbit_system: no full-rank randomizer found");
        std::vector<std::vector<int>> m(rows, std::vector<int>(cols));
        for (auto& row : m)
            for (int& v : row) v = entry(rng);
        if (rank_mod_p(m) == rows) {
            os.randomizer = std::move(m);
            break;
        }
    }
    for (int i = 0; i < rows; ++i) {
        RatPoly acc = RatPoly::zero(static_cast<uint8_t>(nv));
        for (int j = 0; j < cols; ++j)
            if (os.randomizer[i][j])
                acc = acc + rconst(nv, os.randomizer[i][j]) * os.equations[j];
        os.squared.push_back(std::move(acc));
    }
    return os;
}

std::string classify_on_curve(const std::array<Cx, 4>& point,
                              const mpq_class& c, double tolerance) {
    std::vector<Cx> pt(point.begin(), point.end());
    for (const CurveIdeal& ci : curve_ideals(c)) {
        for (const auto& component : ci.components) {
            bool on = true;
            for (const RatPoly& g : component)
                if (std::abs(g.eval<Cx>(pt, &to_complex)) > tolerance) {
                    on = false;
                    break;
                }
            if (on) return ci.name;
        }
    }
    return {};
}

CxMat jacobian_F(const std::array<Cx, 4>& x) {
    CxMat j = CxMat::Zero(4, 4);
    j(0, 1) = 1.0;
    j(1, 3) = -1.0;
    j(2, 0) = 1.0 - x[1] * x[1];
    j(2, 1) = -2.0 * x[0] * x[1];
    j(3, 0) = x[1] * x[3];
    j(3, 1) = x[0] * x[3];
    j(3, 2) = -1.0;
    j(3, 3) = x[0] * x[1];
    return j;
}

std::array<Cx, 3> restrict_to_fiber(const CxMat& jac,
                                    const std::array<Cx, 4>& x) {
    CxMat g(1, 4);
    g << x[3], -x[2], -x[1], x[0];
    if (g.norm() < 1e-12)
        throw std::domain_error(
            "restrict_to_fiber: fiber gradient vanishes (origin is off "
            "generic fibers)");
    Eigen::FullPivLU<CxMat> lu(g);
    CxMat basis = lu.kernel();
    if (basis.cols() != 3)
        throw std::logic_error("restrict_to_fiber: kernel dimension");
    // jac maps the tangent space into itself, so solving B r = jac B in the
    // least-squares sense recovers the restricted matrix exactly up to noise
    CxMat restricted =
        basis.completeOrthogonalDecomposition().solve(jac * basis);
    Eigen::ComplexEigenSolver<CxMat> es(restricted);
    if (es.info() != Eigen::Success)
        throw std::runtime_error("restrict_to_fiber: eigensolver failed");
    std::array<Cx, 3> out;
    for (int i = 0; i < 3; ++i) out[i] = es.eigenvalues()[i];
    return out;
}

std::array<Cx, 3> multipliers(const std::vector<std::array<Cx, 4>>& orbit) {
    if (orbit.empty())
        throw std::invalid_argument("multipliers: empty orbit");
    CxMat j = CxMat::Identity(4, 4);
    for (const auto& pt : orbit) j = jacobian_F(pt) * j;
    return restrict_to_fiber(j, orbit[0]);
}

namespace {

/// Curves pointwise fixed by f^n: C for n = 2 mod 4, D1 and D2 for
/// n = 0 mod 4 (D1 contains the component cut out by C's ideal), none for
/// odd n.  Isolated periodic points may happen to sit on these curves as
/// subsets of the fiber (the period-1 points all lie on C), so membership
/// alone must not disqualify a point.
std::string on_fixed_curve(const std::array<Cx, 4>& point, const mpq_class& c,
                           double tolerance, int n) {
    if (n % 2 == 1) return {};
    const bool order4 = n % 4 == 0;
    std::vector<Cx> pt(point.begin(), point.end());
    for (const CurveIdeal& ci : curve_ideals(c)) {
        if (order4 != (ci.name == "D1" || ci.name == "D2")) continue;
        for (const auto& component : ci.components) {
            bool on = true;
            for (const RatPoly& g : component)
                if (std::abs(g.eval<Cx>(pt, &to_complex)) > tolerance) {
                    on = false;
                    break;
                }
            if (on) return ci.name;
        }
    }
    return {};
}

bool is_hyperbolic(const std::array<Cx, 3>& mults, double tol) {
    for (const Cx& m : mults) {
        const double a = std::abs(m);
        if (a >= 1.0 - tol && a <= 1.0 + tol) return false;
    }
    return true;
}

FixedPointReport run_once(const OrbitSystem& os, const TrackSettings& settings,
                          uint64_t track_seed) {
    FixedPointReport rep;
    rep.n = os.n;
    rep.c = os.c;
    rep.seed = os.seed;

    PolySystem sys = PolySystem::from_rat_polys(os.squared, os.nvars);
    TrackSettings ts = settings;
    ts.max_failure_rate = std::min(ts.max_failure_rate, 0.01);
    TrackOutcome out = track(sys, ts, track_seed);
    rep.total_paths = static_cast<int64_t>(out.paths.size());

    std::vector<CxVec> iso_x0;
    std::vector<CxVec> iso_end;
    std::vector<double> iso_res;
    for (const auto& pr : out.paths) {
        if (pr.status == PathStatus::kAtInfinity) {
            ++rep.diverged_paths;
            continue;
        }
        if (pr.status == PathStatus::kFailed) {
            ++rep.failed_paths;
            continue;
        }
        std::vector<Cx> pt(pr.endpoint.data(), pr.endpoint.data() + os.nvars);
        double res = 0.0;
        for (const RatPoly& e : os.equations)
            res = std::max(res, std::abs(e.eval<Cx>(pt, &to_complex)));
        double xmax = 1.0;
        for (const Cx& v : pt) xmax = std::max(xmax, std::abs(v));
        if (res > 1e-7 * xmax * xmax * xmax) {
            ++rep.spurious_paths;  // zero of the randomization kernel only
            continue;
        }
        std::array<Cx, 4> x0;
        for (int i = 0; i < 4; ++i) x0[i] = os.orbit[i].eval<Cx>(pt, &to_complex);
        std::string curve = on_fixed_curve(x0, os.c, 1e-6, os.n);
        if (!curve.empty()) {
            ++rep.on_curve_paths;
            ++rep.on_curve[curve];
            continue;
        }
        ++rep.isolated_paths;
        CxVec v(4);
        v << x0[0], x0[1], x0[2], x0[3];
        iso_x0.push_back(std::move(v));
        iso_end.push_back(pr.endpoint);
        iso_res.push_back(res);
    }

    ClusterSet cs = dedup(iso_x0, ts.dedup_radius);
    rep.isolated = static_cast<int64_t>(cs.clusters.size());
    for (size_t ci = 0; ci < cs.clusters.size(); ++ci) {
        const int idx = cs.clusters[ci][0];
        FixedPoint fp;
        fp.cluster_size = static_cast<int>(cs.clusters[ci].size());
        if (fp.cluster_size > 1) rep.multiple_clusters = true;
        fp.residual = iso_res[idx];
        std::vector<Cx> pt(iso_end[idx].data(), iso_end[idx].data() + os.nvars);
        for (int k = 0; k < os.n; ++k) {
            std::array<Cx, 4> xk;
            for (int i = 0; i < 4; ++i)
                xk[i] = os.orbit[4 * k + i].eval<Cx>(pt, &to_complex);
            fp.orbit.push_back(xk);
        }
        fp.x = fp.orbit[0];
        fp.multipliers = multipliers(fp.orbit);
        fp.hyperbolic = is_hyperbolic(fp.multipliers, 1e-6);
        fp.curve = classify_on_curve(fp.x, os.c, 1e-6);
        rep.points.push_back(std::move(fp));
    }
    rep.growth =
        rep.isolated > 0
            ? std::pow(static_cast<double>(rep.isolated), 1.0 / rep.n)
            : 0.0;
    return rep;
}

}  // namespace

FixedPointReport count_fixed_points(int n, const mpq_class& c, uint64_t seed,
                                    const TrackSettings& settings) {
    if (n < 1) throw std::invalid_argument("count_fixed_points: n < 1");
    OrbitSystem os = build_orbit_system(n, c, seed);
    FixedPointReport a = run_once(os, settings, seed + 11);
    FixedPointReport b = run_once(os, settings, seed + 5081);
    // On-curve path tallies depend on the path geometry; only the set of
    // curves hit and the isolated count must reproduce.
    auto curve_names = [](const FixedPointReport& r) {
        std::vector<std::string> names;
        for (const auto& [name, cnt] : r.on_curve) names.push_back(name);
        return names;
    };
    if (a.isolated != b.isolated || curve_names(a) != curve_names(b)) {
        std::ostringstream msg;
        msg << "count_fixed_points: two-seed disagreement at n=" << n << ": "
            << a.isolated << " vs " << b.isolated << " isolated";
        throw std::runtime_error(msg.str());
    }
    return a;
}

std::vector<GrowthRow> growth_table(
    const std::vector<FixedPointReport>& reports) {
    std::vector<GrowthRow> rows;
    for (const auto& r : reports)
        rows.push_back(
            {r.n, r.isolated,
             r.isolated > 0
                 ? std::pow(static_cast<double>(r.isolated), 1.0 / r.n)
                 : 0.0});
    return rows;
}

std::string fixed_point_report_json(const FixedPointReport& r) {
    nlohmann::json j;
    j["n"] = r.n;
    j["c"] = {{"num", r.c.get_num().get_str()},
              {"den", r.c.get_den().get_str()}};
    j["seed"] = r.seed;
    j["isolated"] = r.isolated;
    j["growth"] = r.growth;
    j["paths"] = {{"total", r.total_paths},
                  {"isolated", r.isolated_paths},
                  {"on_curve", r.on_curve_paths},
                  {"spurious", r.spurious_paths},
                  {"diverged", r.diverged_paths},
                  {"failed", r.failed_paths}};
    j["on_curve"] = nlohmann::json::object();
    for (const auto& [name, cnt] : r.on_curve) j["on_curve"][name] = cnt;
    j["multiple_clusters"] = r.multiple_clusters;
    j["points"] = nlohmann::json::array();
    auto cx = [](const Cx& z) {
        return nlohmann::json::array({z.real(), z.imag()});
    };
    for (const auto& p : r.points) {
        nlohmann::json pj;
        pj["x"] = {cx(p.x[0]), cx(p.x[1]), cx(p.x[2]), cx(p.x[3])};
        pj["residual"] = p.residual;
        pj["multipliers"] = {cx(p.multipliers[0]), cx(p.multipliers[1]),
                             cx(p.multipliers[2])};
        pj["hyperbolic"] = p.hyperbolic;
        pj["curve"] = p.curve;
        pj["cluster_size"] = p.cluster_size;
        j["points"].push_back(pj);
    }
    return j.dump(2);
}

std::string growth_table_csv(const std::vector<GrowthRow>& rows) {
    std::ostringstream os;
    os << "n,count,growth\n";
    os.setf(std::ios::fixed);
    os.precision(11);
    for (const auto& r : rows)
        os << r.n << ',' << r.count << ',' << r.growth << '\n';
    return os.str();
}

}  // namespace quadric
