#pragma once

#include <array>
#include <complex>
#include <cstdint>
#include <gmpxx.h>
#include <limits>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "quadric/fp.hpp"

namespace quadric {

/// Exponent vector over the ambient variables (x1..x4 and the homogenizing z
/// where applicable).
struct Monomial {
    static constexpr int kMaxVars = 16;  // orbit systems use 2n variables

    std::array<uint16_t, kMaxVars> e{};
    uint8_t nvars = 0;

    Monomial() = default;
    explicit Monomial(uint8_t n) : nvars(n) {}
    Monomial(std::initializer_list<uint16_t> exps) {
        nvars = static_cast<uint8_t>(exps.size());
        size_t i = 0;
        for (auto v : exps) e[i++] = v;
    }

    unsigned total_degree() const {
        unsigned d = 0;
        for (int i = 0; i < nvars; ++i) d += e[i];
        return d;
    }

    Monomial operator*(const Monomial& o) const {
        Monomial r(nvars);
        for (int i = 0; i < nvars; ++i)
            r.e[i] = static_cast<uint16_t>(e[i] + o.e[i]);
        return r;
    }

    bool operator==(const Monomial& o) const {
        return nvars == o.nvars && e == o.e;
    }
};

/// Graded lexicographic order with x1 < x2 < x3 < x4 < z: total degree first,
/// then the exponent of the most significant (last) variable.
struct GradedLexLess {
    bool operator()(const Monomial& a, const Monomial& b) const {
        unsigned da = a.total_degree(), db = b.total_degree();
        if (da != db) return da < db;
        for (int i = a.nvars; i-- > 0;)
            if (a.e[i] != b.e[i]) return a.e[i] < b.e[i];
        return false;
    }
};

// ---- coefficient domains -------------------------------------------------

inline bool coeff_is_zero(const mpq_class& v) { return v == 0; }

struct FpCoeff {
    uint32_t v = 0;
    uint32_t p = 0;

    FpCoeff() = default;
    FpCoeff(uint32_t value, uint32_t mod) : v(value % mod), p(mod) {}

    void check(const FpCoeff& o) const {
        if (p != o.p) throw std::domain_error("FpCoeff: domain mismatch");
    }
    FpCoeff operator+(const FpCoeff& o) const { check(o); return {add_mod(v, o.v, p), p}; }
    FpCoeff operator-(const FpCoeff& o) const { check(o); return {sub_mod(v, o.v, p), p}; }
    FpCoeff operator*(const FpCoeff& o) const { check(o); return {mul_mod(v, o.v, p), p}; }
    FpCoeff operator-() const { return {neg_mod(v, p), p}; }
    FpCoeff& operator+=(const FpCoeff& o) { *this = *this + o; return *this; }
    bool operator==(const FpCoeff& o) const { return v == o.v && p == o.p; }
};

inline bool coeff_is_zero(const FpCoeff& c) { return c.v == 0; }

/// Exact sparse multivariate polynomial; no zero coefficients stored, terms in
/// canonical graded-lex order.
template <class C>
class SparsePoly {
  public:
    static constexpr int64_t kNegInfDegree = std::numeric_limits<int64_t>::min();
    using TermMap = std::map<Monomial, C, GradedLexLess>;

    SparsePoly() : nvars_(0) {}
    explicit SparsePoly(uint8_t nvars) : nvars_(nvars) {}

    static SparsePoly zero(uint8_t nvars) { return SparsePoly(nvars); }
    static SparsePoly constant(uint8_t nvars, const C& c) {
        SparsePoly r(nvars);
        r.add_term(Monomial(nvars), c);
        return r;
    }
    /// x_{idx} (0-based)
    static SparsePoly variable(uint8_t nvars, int idx, const C& one) {
        SparsePoly r(nvars);
        Monomial m(nvars);
        m.e[idx] = 1;
        r.add_term(m, one);
        return r;
    }

    uint8_t nvars() const { return nvars_; }
    bool is_zero() const { return terms_.empty(); }
    const TermMap& terms() const { return terms_; }
    size_t term_count() const { return terms_.size(); }

    int64_t degree() const {
        if (terms_.empty()) return kNegInfDegree;
        return terms_.rbegin()->first.total_degree();
    }

    /// Greatest term in graded-lex order.
    const std::pair<const Monomial, C>& leading_term() const {
        if (terms_.empty())
            throw std::domain_error("leading_term of zero polynomial");
        return *terms_.rbegin();
    }

    /// Number of terms attaining the maximal total degree.
    size_t max_degree_term_count() const {
        if (terms_.empty()) return 0;
        const unsigned d = terms_.rbegin()->first.total_degree();
        size_t n = 0;
        for (auto it = terms_.rbegin();
             it != terms_.rend() && it->first.total_degree() == d; ++it)
            ++n;
        return n;
    }

    void add_term(const Monomial& m, const C& c) {
        if (m.nvars != nvars_)
            throw std::domain_error("SparsePoly: variable count mismatch");
        auto [it, inserted] = terms_.emplace(m, c);
        if (!inserted) {
            it->second += c;
            if (coeff_is_zero(it->second)) terms_.erase(it);
        } else if (coeff_is_zero(c)) {
            terms_.erase(it);
        }
    }

    void check_compatible(const SparsePoly& o) const {
        if (nvars_ != o.nvars_)
            throw std::domain_error("SparsePoly: domain mismatch");
        if (!terms_.empty() && !o.terms_.empty()) {
            // coefficient domain compatibility (throws on mismatch)
            C probe = terms_.begin()->second;
            probe += o.terms_.begin()->second;
        }
    }

    SparsePoly operator+(const SparsePoly& o) const {
        check_compatible(o);
        SparsePoly r(*this);
        for (const auto& [m, c] : o.terms_) r.add_term(m, c);
        return r;
    }

    SparsePoly operator-(const SparsePoly& o) const {
        check_compatible(o);
        SparsePoly r(*this);
        for (const auto& [m, c] : o.terms_) r.add_term(m, -c);
        return r;
    }

    SparsePoly operator-() const {
        SparsePoly r(nvars_);
        for (const auto& [m, c] : terms_) r.terms_.emplace(m, -c);
        return r;
    }

    SparsePoly operator*(const SparsePoly& o) const {
        check_compatible(o);
        SparsePoly r(nvars_);
        for (const auto& [ma, ca] : terms_)
            for (const auto& [mb, cb] : o.terms_) r.add_term(ma * mb, ca * cb);
        return r;
    }

    bool operator==(const SparsePoly& o) const {
        return nvars_ == o.nvars_ && terms_ == o.terms_;
    }

    /// Substitute args[i] for variable i (exact composition).
    SparsePoly substituted(const std::vector<SparsePoly>& args) const {
        if (args.size() != nvars_)
            throw std::domain_error("substituted: arity mismatch");
        uint8_t target_vars = args.empty() ? nvars_ : args[0].nvars();
        for (const auto& a : args)
            if (a.nvars() != target_vars)
                throw std::domain_error("substituted: mixed variable sets");
        // cache powers of each argument
        std::vector<std::vector<SparsePoly>> powers(nvars_);
        SparsePoly result(target_vars);
        for (const auto& [m, c] : terms_) {
            SparsePoly term(target_vars);
            term.add_term(Monomial(target_vars), c);
            for (int i = 0; i < nvars_; ++i) {
                unsigned k = m.e[i];
                if (!k) continue;
                auto& pw = powers[i];
                if (pw.empty()) pw.push_back(args[i]);  // pw[j] = args[i]^(j+1)
                while (pw.size() < k) pw.push_back(pw.back() * args[i]);
                term = term * pw[k - 1];
            }
            result = result + term;
        }
        return result;
    }

    template <class Field>
    Field eval(const std::vector<Field>& point,
               Field (*convert)(const C&)) const {
        if (point.size() != nvars_)
            throw std::domain_error("eval: point dimension mismatch");
        Field acc{};
        for (const auto& [m, c] : terms_) {
            Field t = convert(c);
            for (int i = 0; i < nvars_; ++i)
                for (unsigned k = 0; k < m.e[i]; ++k) t = t * point[i];
            acc = acc + t;
        }
        return acc;
    }

    std::string str(const std::vector<std::string>& names) const;

  private:
    TermMap terms_;
    uint8_t nvars_;
};

using RatPoly = SparsePoly<mpq_class>;
using FpPoly = SparsePoly<FpCoeff>;

/// Reduce an exact rational polynomial mod p; throws when p divides any
/// denominator.
FpPoly reduce_mod(const RatPoly& a, uint32_t p);

/// Homogenize with a fresh last variable z to the given total degree.
RatPoly homogenized(const RatPoly& a, unsigned degree);

/// Set the last variable to 1 (inverse of homogenized).
RatPoly dehomogenized(const RatPoly& a);

std::complex<double> to_complex(const mpq_class& v);

/// Values mod p of each component at the point.
std::vector<uint32_t> eval_point_mod_p(const std::vector<RatPoly>& components,
                                       const std::vector<uint32_t>& point,
                                       uint32_t p);

std::string rat_poly_str(const RatPoly& a);

}  // namespace quadric
