#pragma once

#include <array>
#include <cstdint>
#include <gmpxx.h>
#include <map>
#include <string>
#include <vector>

#include "quadric/map_model.hpp"
#include "quadric/solver.hpp"

namespace quadric {

/// Period-n orbit conditions for F on the fiber x1x4 - x2x3 = c.  The linear
/// map components eliminate half the orbit variables: unknowns are x^(0) plus
/// (x^(k)_3, x^(k)_4) for k = 1..n-1, minus the two closed by the return
/// relations, leaving 2n.  Equations are the 2n step cubics plus the fiber
/// quadric; a random full-rank integer matrix squares them to 2n.
struct OrbitSystem {
    int n = 0;
    mpq_class c;
    uint64_t seed = 0;
    int nvars = 0;
    std::vector<RatPoly> equations;  // 2n+1 exact conditions
    std::vector<RatPoly> orbit;      // 4n expressions: x^(k)_i at 4k+i
    std::vector<std::vector<int>> randomizer;  // 2n x (2n+1)
    std::vector<RatPoly> squared;              // randomizer * equations
};

OrbitSystem build_orbit_system(int n, const mpq_class& c, uint64_t seed);

/// Random rational in (1, 2) with a small denominator, the default generic
/// fiber value.
mpq_class random_fiber_value(uint64_t seed);

struct FixedPoint {
    std::array<Cx, 4> x{};                  // orbit start x^(0)
    std::vector<std::array<Cx, 4>> orbit;   // x^(0..n-1)
    double residual = 0.0;  // sup over the pre-randomization equations
    std::array<Cx, 3> multipliers{};
    bool hyperbolic = false;
    // Curve (C, D1, D2) the point happens to lie on, independent of whether
    // that curve is pointwise fixed at this period.  Points on such a curve
    // carry a forced root-of-unity multiplier along it: the map acts on C as
    // an involution, so its fixed points have exact multiplier -1 tangent to
    // C and only the transverse directions are informative.
    std::string curve;
    int cluster_size = 1;
};

struct FixedPointReport {
    int n = 0;
    mpq_class c;
    uint64_t seed = 0;
    int64_t isolated = 0;  // distinct isolated points (dedup over x^(0))
    std::vector<FixedPoint> points;
    std::map<std::string, int64_t> on_curve;  // converged paths per curve
    int64_t total_paths = 0;
    int64_t isolated_paths = 0;
    int64_t on_curve_paths = 0;
    int64_t spurious_paths = 0;
    int64_t diverged_paths = 0;
    int64_t failed_paths = 0;
    double growth = 0.0;            // isolated^(1/n)
    bool multiple_clusters = false;  // a point absorbed more than one path
};

/// Solves the randomized orbit system, filters endpoints against all
/// pre-randomization equations, classifies curve-bound solutions, checks
/// hyperbolicity of the rest.  Runs twice with independent seeds and requires
/// equal isolated and on-curve counts.
FixedPointReport count_fixed_points(int n, const mpq_class& c, uint64_t seed,
                                    const TrackSettings& settings);

/// Name of the first curve (C, D1, D2) whose generators all vanish at the
/// point within tolerance; empty when none does.
std::string classify_on_curve(const std::array<Cx, 4>& point,
                              const mpq_class& c, double tolerance);

/// Eigenvalues of a 4x4 Jacobian product restricted to the fiber tangent
/// space ker(grad q) at x; throws when grad q vanishes.
std::array<Cx, 3> restrict_to_fiber(const CxMat& jac,
                                    const std::array<Cx, 4>& x);

/// Fiber-tangent multipliers of the orbit: DF(x^(n-1))...DF(x^(0)) restricted
/// to ker(grad q) at x^(0).
std::array<Cx, 3> multipliers(const std::vector<std::array<Cx, 4>>& orbit);

/// Jacobian of F at a point.
CxMat jacobian_F(const std::array<Cx, 4>& x);

struct GrowthRow {
    int n = 0;
    int64_t count = 0;
    double growth = 0.0;  // count^(1/n)
};

std::vector<GrowthRow> growth_table(const std::vector<FixedPointReport>& reports);

std::string fixed_point_report_json(const FixedPointReport& report);
std::string growth_table_csv(const std::vector<GrowthRow>& rows);

}  // namespace quadric
