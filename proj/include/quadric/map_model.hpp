#pragma once

#include <optional>
#include <string>
#include <vector>

#include "quadric/sparse_poly.hpp"

namespace quadric {

/// Polynomial or rational self-map of affine 4-space.  Components are the
/// numerators over the (shared) denominator; polynomial maps carry the
/// constant denominator 1.
struct AffineMap {
    std::vector<RatPoly> components;  // 4 polynomials in x1..x4
    RatPoly denominator;              // never identically zero

    bool is_polynomial() const { return denominator.degree() == 0; }
};

/// Homogeneous lift to projective 4-space: five components of equal degree in
/// x1..x4,z; the fifth is the homogenized denominator.
struct MapLift {
    std::vector<RatPoly> components;  // 5 polynomials in x1..x4,z
    unsigned degree = 0;
};

/// P = x1*Q1(x2,x4) + x3*Q3(x2,x4) + R(x2,x4), the shape parameter of the
/// family G.
struct FamilyParams {
    RatPoly q1, q3, r;  // polynomials in x1..x4, supported on x2,x4 only
};

struct CurveIdeal {
    std::string name;  // C | D1 | D2
    std::vector<std::vector<RatPoly>> components;  // 3 generators each
};

struct Lemma4Row {
    int n = 0;
    std::array<int64_t, 4> component_degrees{};
    int64_t degree = 0;  // max component degree
    // the graded-lex leading term over all components lies in component 4
    // (ties in total degree allowed, e.g. n=1 where (F)_3 also has degree 3)
    bool leading_in_component4 = false;
    bool unique_leading_monomial = false;
    bool recurrence_ok = true;  // d_n = d_{n-1}+d_{n-2}+d_{n-3} (n >= 4)
    Monomial leading;           // leading monomial of component 4
    int64_t leading_coeff_sign = 0;
};

inline constexpr int kDefaultSymbolicBudget = 8;

RatPoly quadric_form();  // q = x1*x4 - x2*x3 in x1..x4

AffineMap make_F();
AffineMap make_F_inverse();
AffineMap make_family(const FamilyParams& params);
AffineMap make_identity_map();

/// Exact substitution of args into each component.
std::vector<RatPoly> compose(const std::vector<RatPoly>& components,
                             const std::vector<RatPoly>& args);

/// Affine composition a after b (polynomial maps only).
AffineMap compose_maps(const AffineMap& a, const AffineMap& b);

MapLift lift(const AffineMap& map);
MapLift identity_lift();

/// True iff q o map = q exactly (denominator cleared for rational maps).
bool verify_fibration(const AffineMap& map);

/// True iff lift(F) o lift(F inverse) is the identity lift times a common
/// homogeneous factor, and symmetrically.
bool verify_inverse(const AffineMap& f, const AffineMap& f_inv);
bool verify_inverse();

/// Symbolic iterates of F with exact integer arithmetic; n_max limited by the
/// symbolic budget.
std::vector<Lemma4Row> verify_lemma4(int n_max,
                                     int budget = kDefaultSymbolicBudget);

/// Degrees of the components of the symbolic iterate F^n (fast exact path).
std::array<int64_t, 4> symbolic_iterate_degrees(int n);

std::vector<CurveIdeal> curve_ideals(const mpq_class& c);

std::string map_to_json(const AffineMap& map);

}  // namespace quadric
