#include "quadric/map_model.hpp"

#include <algorithm>
#include <cstdint>
#include <sstream>
#include <unordered_map>

#include "json.hpp"

namespace quadric {

namespace {

RatPoly var4(int idx) { return RatPoly::variable(4, idx, mpq_class(1)); }
RatPoly const4(const mpq_class& c) { return RatPoly::constant(4, c); }

RatPoly poly4(std::initializer_list<std::pair<Monomial, long>> terms) {
    RatPoly r(4);
    for (const auto& [m, c] : terms) r.add_term(m, mpq_class(c));
    return r;
}

}  // namespace

RatPoly quadric_form() {
    // x1*x4 - x2*x3
    return poly4({{Monomial{1, 0, 0, 1}, 1}, {Monomial{0, 1, 1, 0}, -1}});
}

AffineMap make_F() {
    AffineMap f;
    f.components = {
        var4(1),
        -var4(3),
        poly4({{Monomial{1, 0, 0, 0}, 1}, {Monomial{1, 2, 0, 0}, -1}}),
        poly4({{Monomial{0, 0, 1, 0}, -1}, {Monomial{1, 1, 0, 1}, 1}}),
    };
    f.denominator = const4(1);
    return f;
}

AffineMap make_F_inverse() {
    // F^{-1} = (-x3/(x1^2-1), x1, (x1x2x3 + x4 - x1^2 x4)/(x1^2-1), -x2),
    // stored with the common denominator x1^2 - 1 cleared.
    RatPoly den = poly4({{Monomial{2, 0, 0, 0}, 1}, {Monomial{0, 0, 0, 0}, -1}});
    AffineMap f;
    f.components = {
        -var4(2),
        var4(0) * den,
        poly4({{Monomial{1, 1, 1, 0}, 1},
               {Monomial{0, 0, 0, 1}, 1},
               {Monomial{2, 0, 0, 1}, -1}}),
        -var4(1) * den,
    };
    f.denominator = den;
    return f;
}

AffineMap make_family(const FamilyParams& params) {
    for (const RatPoly* q : {&params.q1, &params.q3, &params.r})
        for (const auto& [m, c] : q->terms())
            if (m.e[0] != 0 || m.e[2] != 0)
                throw std::domain_error(
                    "make_family: Q1, Q3, R must depend on x2, x4 only");
    RatPoly p = var4(0) * params.q1 + var4(2) * params.q3 + params.r;
    AffineMap g;
    g.components = {
        var4(1),
        -var4(3),
        var4(0) - var4(1) * p,
        -var4(2) + var4(3) * p,
    };
    g.denominator = const4(1);
    return g;
}

AffineMap make_identity_map() {
    AffineMap f;
    f.components = {var4(0), var4(1), var4(2), var4(3)};
    f.denominator = const4(1);
    return f;
}

std::vector<RatPoly> compose(const std::vector<RatPoly>& components,
                             const std::vector<RatPoly>& args) {
    std::vector<RatPoly> out;
    out.reserve(components.size());
    for (const auto& c : components) out.push_back(c.substituted(args));
    return out;
}

AffineMap compose_maps(const AffineMap& a, const AffineMap& b) {
    if (!a.is_polynomial() || !b.is_polynomial())
        throw std::domain_error("compose_maps: polynomial maps only");
    AffineMap r;
    r.components = compose(a.components, b.components);
    r.denominator = const4(a.denominator.terms().begin()->second *
                           b.denominator.terms().begin()->second);
    return r;
}

MapLift lift(const AffineMap& map) {
    int64_t max_num = RatPoly::kNegInfDegree;
    for (const auto& c : map.components)
        max_num = std::max(max_num, c.degree());
    const int64_t dden = map.denominator.degree();
    const unsigned d =
        static_cast<unsigned>(std::max<int64_t>(max_num, dden + 1));

    MapLift l;
    l.degree = d;
    for (const auto& c : map.components)
        l.components.push_back(homogenized(c, d));
    l.components.push_back(homogenized(map.denominator, d));

    // common monomial factor check (a shared polynomial factor beyond a
    // monomial is outside the detection budget of this engine)
    Monomial common(5);
    for (int i = 0; i < 5; ++i) common.e[i] = UINT16_MAX;
    for (const auto& comp : l.components)
        for (const auto& [m, c] : comp.terms())
            for (int i = 0; i < 5; ++i)
                common.e[i] = std::min(common.e[i], m.e[i]);
    if (common.total_degree() > 0)
        throw std::domain_error(
            "lift: components share the common monomial factor; divide it out");
    return l;
}

MapLift identity_lift() {
    MapLift l;
    l.degree = 1;
    for (int i = 0; i < 5; ++i)
        l.components.push_back(RatPoly::variable(5, i, mpq_class(1)));
    return l;
}

bool verify_fibration(const AffineMap& map) {
    // q(N1/D,..,N4/D) = q(N1,..,N4)/D^2 for the quadratic form q; the fibres
    // are invariant iff q(N) = q * D^2.
    RatPoly q = quadric_form();
    RatPoly lhs = q.substituted(map.components);
    RatPoly rhs = q * map.denominator * map.denominator;
    return lhs == rhs;
}

namespace {

// the 5-tuple v is proportional to (x1,..,x4,z) as a rational map
bool proportional_to_identity(const std::vector<RatPoly>& v) {
    std::vector<RatPoly> id;
    for (int i = 0; i < 5; ++i)
        id.push_back(RatPoly::variable(5, i, mpq_class(1)));
    for (int i = 0; i < 5; ++i)
        for (int j = i + 1; j < 5; ++j)
            if (!(v[i] * id[j] == v[j] * id[i])) return false;
    // not identically zero
    return std::any_of(v.begin(), v.end(),
                       [](const RatPoly& p) { return !p.is_zero(); });
}

}  // namespace

bool verify_inverse(const AffineMap& f, const AffineMap& f_inv) {
    MapLift lf = lift(f), lg = lift(f_inv);
    return proportional_to_identity(compose(lf.components, lg.components)) &&
           proportional_to_identity(compose(lg.components, lf.components));
}

bool verify_inverse() { return verify_inverse(make_F(), make_F_inverse()); }

// ---- fast exact iteration ------------------------------------------------
//
// Iterates of F have integer coefficients; exponents fit 16 bits each up to
// the symbolic budget and coefficients fit 128-bit integers comfortably.
// Monomials are packed into a single 64-bit key for hashing.

namespace {

using Key = uint64_t;
using Coef = __int128;
using FastPoly = std::unordered_map<Key, Coef>;

inline unsigned key_degree(Key k) {
    return static_cast<unsigned>((k & 0xffff) + ((k >> 16) & 0xffff) +
                                 ((k >> 32) & 0xffff) + ((k >> 48) & 0xffff));
}

void fast_add_scaled(FastPoly& dst, const FastPoly& src, int sign) {
    for (const auto& [k, c] : src) {
        Coef& slot = dst[k];
        slot += sign > 0 ? c : -c;
        if (slot == 0) dst.erase(k);
    }
}

FastPoly fast_mul(const FastPoly& a, const FastPoly& b) {
    FastPoly r;
    r.reserve(a.size() + b.size());
    const FastPoly& outer = a.size() < b.size() ? a : b;
    const FastPoly& inner = a.size() < b.size() ? b : a;
    for (const auto& [ka, ca] : outer)
        for (const auto& [kb, cb] : inner) {
            Key k = ka + kb;  // per-variable sums stay below 2^16 in budget
            Coef& slot = r[k];
            slot += ca * cb;
            if (slot == 0) r.erase(k);
        }
    return r;
}

FastPoly fast_neg(FastPoly a) {
    for (auto& [k, c] : a) c = -c;
    return a;
}

struct FastIterate {
    std::array<FastPoly, 4> comp;
};

FastPoly fast_var(int idx) {
    FastPoly p;
    p[Key(1) << (16 * idx)] = 1;
    return p;
}

FastIterate fast_F() {
    FastIterate it;
    it.comp[0] = fast_var(1);
    it.comp[1] = fast_neg(fast_var(3));
    // x1 - x1*x2^2
    it.comp[2] = fast_var(0);
    fast_add_scaled(it.comp[2], fast_mul(fast_var(0), fast_mul(fast_var(1), fast_var(1))), -1);
    // -x3 + x1*x2*x4
    it.comp[3] = fast_neg(fast_var(2));
    fast_add_scaled(it.comp[3], fast_mul(fast_var(0), fast_mul(fast_var(1), fast_var(3))), +1);
    return it;
}

// one application of F to the iterate G: F o G
FastIterate fast_step(const FastIterate& g) {
    FastIterate h;
    h.comp[0] = g.comp[1];
    h.comp[1] = fast_neg(g.comp[3]);
    FastPoly a = fast_mul(g.comp[0], g.comp[1]);  // G1*G2
    h.comp[2] = g.comp[0];
    fast_add_scaled(h.comp[2], fast_mul(a, g.comp[1]), -1);  // G1 - G1*G2^2
    h.comp[3] = fast_neg(g.comp[2]);
    fast_add_scaled(h.comp[3], fast_mul(a, g.comp[3]), +1);  // -G3 + G1*G2*G4
    return h;
}

int64_t fast_degree(const FastPoly& p) {
    if (p.empty()) return RatPoly::kNegInfDegree;
    unsigned d = 0;
    for (const auto& [k, c] : p) d = std::max(d, key_degree(k));
    return d;
}

struct LeadingInfo {
    size_t count = 0;      // number of maximal-degree terms
    Key monomial = 0;      // graded-lex greatest among them
    Coef coeff = 0;
};

LeadingInfo fast_leading(const FastPoly& p) {
    LeadingInfo li;
    const int64_t d = fast_degree(p);
    bool first = true;
    for (const auto& [k, c] : p) {
        if (static_cast<int64_t>(key_degree(k)) != d) continue;
        ++li.count;
        // graded-lex tie break: higher variable index first
        auto lex_less = [](Key a, Key b) {
            for (int i = 3; i >= 0; --i) {
                uint16_t ea = static_cast<uint16_t>(a >> (16 * i));
                uint16_t eb = static_cast<uint16_t>(b >> (16 * i));
                if (ea != eb) return ea < eb;
            }
            return false;
        };
        if (first || lex_less(li.monomial, k)) {
            li.monomial = k;
            li.coeff = c;
        }
        first = false;
    }
    return li;
}

}  // namespace

std::vector<Lemma4Row> verify_lemma4(int n_max, int budget) {
    if (n_max < 1) throw std::invalid_argument("verify_lemma4: n_max >= 1");
    if (n_max > budget)
        throw std::domain_error("verify_lemma4: symbolic budget exceeded");

    std::vector<Lemma4Row> rows;
    FastIterate g = fast_F();
    std::vector<int64_t> total_degrees;
    for (int n = 1; n <= n_max; ++n) {
        if (n > 1) g = fast_step(g);
        Lemma4Row row;
        row.n = n;
        for (int i = 0; i < 4; ++i)
            row.component_degrees[i] = fast_degree(g.comp[i]);
        row.degree = *std::max_element(row.component_degrees.begin(),
                                       row.component_degrees.end());
        LeadingInfo li = fast_leading(g.comp[3]);
        {
            auto lex_less = [](Key a, Key b) {
                if (key_degree(a) != key_degree(b))
                    return key_degree(a) < key_degree(b);
                for (int i = 3; i >= 0; --i) {
                    uint16_t ea = static_cast<uint16_t>(a >> (16 * i));
                    uint16_t eb = static_cast<uint16_t>(b >> (16 * i));
                    if (ea != eb) return ea < eb;
                }
                return false;
            };
            bool ok = row.component_degrees[3] == row.degree;
            for (int i = 0; ok && i < 3; ++i) {
                if (row.component_degrees[i] < row.degree) continue;
                LeadingInfo other = fast_leading(g.comp[i]);
                ok = lex_less(other.monomial, li.monomial);
            }
            row.leading_in_component4 = ok;
        }
        row.unique_leading_monomial = li.count == 1;
        Monomial m(4);
        for (int i = 0; i < 4; ++i)
            m.e[i] = static_cast<uint16_t>(li.monomial >> (16 * i));
        row.leading = m;
        row.leading_coeff_sign = li.coeff > 0 ? 1 : (li.coeff < 0 ? -1 : 0);
        total_degrees.push_back(row.degree);
        if (n >= 4)
            row.recurrence_ok = row.degree == total_degrees[n - 2] +
                                                  total_degrees[n - 3] +
                                                  total_degrees[n - 4];
        rows.push_back(row);
    }
    return rows;
}

std::array<int64_t, 4> symbolic_iterate_degrees(int n) {
    FastIterate g = fast_F();
    for (int i = 1; i < n; ++i) g = fast_step(g);
    std::array<int64_t, 4> d{};
    for (int i = 0; i < 4; ++i) d[i] = fast_degree(g.comp[i]);
    return d;
}

std::vector<CurveIdeal> curve_ideals(const mpq_class& c) {
    RatPoly fiber = quadric_form() - const4(c);
    RatPoly g1 = poly4({{Monomial{0, 1, 0, 0}, 1},
                        {Monomial{2, 1, 0, 0}, -1},
                        {Monomial{0, 0, 1, 0}, -1}});  // x2 - x1^2 x2 - x3
    RatPoly g1m = poly4({{Monomial{0, 1, 0, 0}, -1},
                         {Monomial{2, 1, 0, 0}, 1},
                         {Monomial{0, 0, 1, 0}, -1}});  // -x2 + x1^2 x2 - x3
    RatPoly sum14 = var4(0) + var4(3);
    RatPoly diff14 = var4(0) - var4(3);

    CurveIdeal C{"C", {{g1, sum14, fiber}}};
    CurveIdeal D1{"D1", {{g1, sum14, fiber}, {g1m, diff14, fiber}}};
    CurveIdeal D2{"D2", {{var4(1), var4(2), fiber}, {var4(0), var4(3), fiber}}};
    return {C, D1, D2};
}

std::string map_to_json(const AffineMap& map) {
    nlohmann::json j;
    j["variables"] = {"x1", "x2", "x3", "x4"};
    auto poly_json = [](const RatPoly& p) {
        nlohmann::json terms = nlohmann::json::array();
        for (const auto& [m, c] : p.terms()) {
            nlohmann::json t;
            std::vector<int> exps;
            for (int i = 0; i < m.nvars; ++i) exps.push_back(m.e[i]);
            t["exponents"] = exps;
            t["num"] = c.get_num().get_str();
            t["den"] = c.get_den().get_str();
            terms.push_back(t);
        }
        return terms;
    };
    j["components"] = nlohmann::json::array();
    for (const auto& c : map.components) j["components"].push_back(poly_json(c));
    j["denominator"] = poly_json(map.denominator);
    return j.dump();
}

}  // namespace quadric
