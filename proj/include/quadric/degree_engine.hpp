#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "quadric/map_model.hpp"
#include "quadric/solver.hpp"

namespace quadric {

/// Random projective line over F_p used to slice the n-th iterate of a lift.
/// The prime admits a radix-2 transform strictly longer than degree^n.
struct SliceWitness {
    uint32_t p = 0;
    std::array<uint32_t, 5> a{};  // anchor point
    std::array<uint32_t, 5> b{};  // direction, last coordinate nonzero
    uint64_t seed = 0;
    int log2_points = 0;
};

SliceWitness make_slice_witness(int n, unsigned lift_degree, int index,
                                uint64_t seed);

/// Degree of the n-th iterate of the lift after base-divisor removal, from a
/// single slice: evaluate the lift n times at all 2^k-th roots of unity along
/// the line, interpolate the five coordinate polynomials, subtract the degree
/// of their gcd.  Empty when the slice turned out degenerate.
std::optional<int64_t> degree_on_slice(const MapLift& l, int n,
                                       const SliceWitness& w);

/// Multi-witness version; all witnesses must agree.  On a first disagreement
/// one extra witness is drawn and the strict majority must absorb it; anything
/// else throws with every value reported.
int64_t degree_line_slice(const MapLift& l, int n, int witnesses,
                          uint64_t seed);

/// Degree of the preimage of a generic codimension-2 linear subspace: count
/// isolated solutions of two generic hyperplane conditions on F^n restricted
/// to a random affine 2-plane, excluding points killed by a third condition.
/// The count itself is the squarefree degree of the resultant of the two
/// conditions, taken along both projections and at two primes, all of which
/// must agree; the homotopy solver contributes witness points from two runs
/// with independent gamma, which must stay within the exact count while
/// reproducing at least half of it.  Slices are drawn until two independent
/// ones agree, with a third as tie-breaker.
int64_t degree_codim2(const AffineMap& map, int n,
                      const TrackSettings& settings, uint64_t seed);

/// Independent oracle for the third degree: three generic hyperplane
/// conditions on F^n restricted to a random affine 3-plane.
int64_t degree_trivariate_count(const AffineMap& map, int n,
                                const TrackSettings& settings, uint64_t seed);

struct DegreeRow {
    int n = 0;
    int64_t d1 = -1, d2 = -1, d3 = -1;  // -1 = not computed
    std::string method1, method2, method3;
    int witnesses = 0;
};

struct DegreeTable {
    std::vector<DegreeRow> rows;
    int witnesses = 0;
    uint64_t seed = 0;
};

/// First and third degrees by line slicing (symbolic cross-check while the
/// symbolic budget lasts), second degree by plane counting up to its budget.
DegreeTable degree_table(int n_max, int witnesses = 2, int codim2_budget = 6,
                         uint64_t seed = 1,
                         const TrackSettings& settings = TrackSettings{});

std::string degree_table_csv(const DegreeTable& table);
std::string degree_table_json(const DegreeTable& table);

}  // namespace quadric
