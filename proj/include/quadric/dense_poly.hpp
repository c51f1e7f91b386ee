#pragma once

#include <cstdint>
#include <limits>
#include <vector>

#include "quadric/fp.hpp"

namespace quadric {

/// Dense univariate polynomial over F_p, coefficients lowest degree first.
/// The modulus must be one of kNttPrimes whenever transform-based paths
/// (large multiplication, coset interpolation) are exercised.
class DensePoly1 {
  public:
    static constexpr int64_t kNegInfDegree = std::numeric_limits<int64_t>::min();

    DensePoly1() : mod_(0) {}
    explicit DensePoly1(uint32_t mod) : mod_(mod) {}
    DensePoly1(std::vector<uint32_t> coeffs, uint32_t mod)
        : c_(std::move(coeffs)), mod_(mod) {
        trim();
    }

    uint32_t mod() const { return mod_; }
    bool is_zero() const { return c_.empty(); }
    int64_t degree() const {
        return c_.empty() ? kNegInfDegree : static_cast<int64_t>(c_.size()) - 1;
    }
    const std::vector<uint32_t>& coeffs() const { return c_; }
    uint32_t coeff(size_t i) const { return i < c_.size() ? c_[i] : 0; }
    uint32_t leading() const { return c_.empty() ? 0 : c_.back(); }

    static DensePoly1 zero(uint32_t mod) { return DensePoly1(mod); }
    static DensePoly1 constant(uint32_t v, uint32_t mod) {
        return DensePoly1({v % mod}, mod);
    }
    // x^k with given coefficient
    static DensePoly1 monomial(uint32_t coeff, size_t k, uint32_t mod);

    DensePoly1 operator+(const DensePoly1& o) const;
    DensePoly1 operator-(const DensePoly1& o) const;
    DensePoly1 operator*(const DensePoly1& o) const;
    DensePoly1 operator-() const;
    bool operator==(const DensePoly1& o) const {
        return mod_ == o.mod_ && c_ == o.c_;
    }

    DensePoly1 scaled(uint32_t s) const;
    DensePoly1 monic() const;

    /// Quotient of the division by x^k (drop the k lowest coefficients).
    DensePoly1 shifted_down(size_t k) const;
    DensePoly1 shifted_up(size_t k) const;
    /// Truncation mod x^k.
    DensePoly1 truncated(size_t k) const;
    DensePoly1 reversed(size_t n) const;  // x^n * p(1/x), n >= degree

    uint32_t eval(uint32_t t) const;

    void check_same_mod(const DensePoly1& o) const;

  private:
    void trim() {
        while (!c_.empty() && c_.back() == 0) c_.pop_back();
    }

    std::vector<uint32_t> c_;
    uint32_t mod_;
};

/// In-place radix-2 NTT; size of `a` must be a power of two admissible for p.
void ntt(std::vector<uint32_t>& a, uint32_t p, bool inverse);

/// Values of `a` on the coset {w^i : 0 <= i < n}, n a power of two (forward NTT
/// of the zero-padded coefficient vector).
std::vector<uint32_t> eval_on_roots(const DensePoly1& a, size_t n);

/// Inverse of eval_on_roots: unique polynomial of degree < n with the given
/// values at the 2^k-th roots of unity.
DensePoly1 interpolate_on_roots(std::vector<uint32_t> values, uint32_t p);

/// 1/f mod x^n by Newton iteration; requires f(0) != 0.
DensePoly1 inverse_series(const DensePoly1& f, size_t n);

struct DivModResult {
    DensePoly1 quotient;
    DensePoly1 remainder;
};
DivModResult divmod(const DensePoly1& a, const DensePoly1& b);

/// Monic gcd.  Classical Euclid below `hgcd_threshold` (degree), half-gcd
/// divide and conquer above.
DensePoly1 gcd1(const DensePoly1& a, const DensePoly1& b);
uint32_t gcd1_hgcd_threshold();
void gcd1_set_hgcd_threshold(uint32_t deg);

/// General interpolation from (t, value) samples; Newton divided differences,
/// with a transform fast path when the abscissae are exactly the successive
/// powers of a 2^k-th root of unity.
DensePoly1 interpolate(const std::vector<std::pair<uint32_t, uint32_t>>& samples,
                       size_t degree_bound, uint32_t p);

}  // namespace quadric
