#include "quadric/dense_poly.hpp"

#include <algorithm>
#include <array>
#include <cassert>
#include <stdexcept>

namespace quadric {

namespace {

constexpr size_t kSchoolMulThreshold = 64;
constexpr size_t kSchoolDivThreshold = 256;  // quotient length

uint32_t g_hgcd_threshold = 100000;

size_t next_pow2(size_t n) {
    size_t r = 1;
    while (r < n) r <<= 1;
    return r;
}

int log2_exact(size_t n) {
    int k = 0;
    while ((size_t(1) << k) < n) ++k;
    return k;
}

}  // namespace

void DensePoly1::check_same_mod(const DensePoly1& o) const {
    if (mod_ != o.mod_)
        throw std::domain_error("DensePoly1: modulus mismatch");
}

DensePoly1 DensePoly1::monomial(uint32_t coeff, size_t k, uint32_t mod) {
    std::vector<uint32_t> c(k + 1, 0);
    c[k] = coeff % mod;
    return DensePoly1(std::move(c), mod);
}

DensePoly1 DensePoly1::operator+(const DensePoly1& o) const {
    check_same_mod(o);
    std::vector<uint32_t> r(std::max(c_.size(), o.c_.size()), 0);
    for (size_t i = 0; i < r.size(); ++i)
        r[i] = add_mod(coeff(i), o.coeff(i), mod_);
    return DensePoly1(std::move(r), mod_);
}

DensePoly1 DensePoly1::operator-(const DensePoly1& o) const {
    check_same_mod(o);
    std::vector<uint32_t> r(std::max(c_.size(), o.c_.size()), 0);
    for (size_t i = 0; i < r.size(); ++i)
        r[i] = sub_mod(coeff(i), o.coeff(i), mod_);
    return DensePoly1(std::move(r), mod_);
}

DensePoly1 DensePoly1::operator-() const {
    std::vector<uint32_t> r(c_);
    for (auto& v : r) v = neg_mod(v, mod_);
    return DensePoly1(std::move(r), mod_);
}

DensePoly1 DensePoly1::scaled(uint32_t s) const {
    std::vector<uint32_t> r(c_);
    for (auto& v : r) v = mul_mod(v, s, mod_);
    return DensePoly1(std::move(r), mod_);
}

DensePoly1 DensePoly1::monic() const {
    if (is_zero()) return *this;
    return scaled(inv_mod(leading(), mod_));
}

DensePoly1 DensePoly1::shifted_down(size_t k) const {
    if (k >= c_.size()) return DensePoly1(mod_);
    return DensePoly1(std::vector<uint32_t>(c_.begin() + k, c_.end()), mod_);
}

DensePoly1 DensePoly1::shifted_up(size_t k) const {
    if (is_zero()) return *this;
    std::vector<uint32_t> r(c_.size() + k, 0);
    std::copy(c_.begin(), c_.end(), r.begin() + k);
    return DensePoly1(std::move(r), mod_);
}

DensePoly1 DensePoly1::truncated(size_t k) const {
    if (c_.size() <= k) return *this;
    return DensePoly1(std::vector<uint32_t>(c_.begin(), c_.begin() + k), mod_);
}

DensePoly1 DensePoly1::reversed(size_t n) const {
    std::vector<uint32_t> r(n + 1, 0);
    for (size_t i = 0; i < c_.size(); ++i) r[n - i] = c_[i];
    return DensePoly1(std::move(r), mod_);
}

uint32_t DensePoly1::eval(uint32_t t) const {
    uint32_t acc = 0;
    for (size_t i = c_.size(); i-- > 0;)
        acc = add_mod(mul_mod(acc, t, mod_), c_[i], mod_);
    return acc;
}

void ntt(std::vector<uint32_t>& a, uint32_t p, bool inverse) {
    const size_t n = a.size();
    if (n == 1) return;
    const int k = log2_exact(n);
    if ((size_t(1) << k) != n)
        throw std::invalid_argument("ntt: size must be a power of two");

    // bit reversal permutation
    for (size_t i = 1, j = 0; i < n; ++i) {
        size_t bit = n >> 1;
        for (; j & bit; bit >>= 1) j ^= bit;
        j ^= bit;
        if (i < j) std::swap(a[i], a[j]);
    }

    uint32_t root = root_of_unity(p, k);
    if (inverse) root = inv_mod(root, p);

    for (size_t len = 2; len <= n; len <<= 1) {
        uint32_t wlen = pow_mod(root, n / len, p);
        for (size_t i = 0; i < n; i += len) {
            uint32_t w = 1;
            for (size_t j = 0; j < len / 2; ++j) {
                uint32_t u = a[i + j];
                uint32_t v = mul_mod(a[i + j + len / 2], w, p);
                a[i + j] = add_mod(u, v, p);
                a[i + j + len / 2] = sub_mod(u, v, p);
                w = mul_mod(w, wlen, p);
            }
        }
    }
    if (inverse) {
        uint32_t ninv = inv_mod(static_cast<uint32_t>(n % p), p);
        for (auto& v : a) v = mul_mod(v, ninv, p);
    }
}

std::vector<uint32_t> eval_on_roots(const DensePoly1& a, size_t n) {
    std::vector<uint32_t> v(a.coeffs());
    if (v.size() > n)
        throw std::invalid_argument("eval_on_roots: polynomial too large");
    v.resize(n, 0);
    ntt(v, a.mod(), false);
    return v;
}

DensePoly1 interpolate_on_roots(std::vector<uint32_t> values, uint32_t p) {
    ntt(values, p, true);
    return DensePoly1(std::move(values), p);
}

DensePoly1 DensePoly1::operator*(const DensePoly1& o) const {
    check_same_mod(o);
    if (is_zero() || o.is_zero()) return DensePoly1(mod_);
    const size_t na = c_.size(), nb = o.c_.size();
    if (std::min(na, nb) <= kSchoolMulThreshold) {
        std::vector<uint32_t> r(na + nb - 1, 0);
        for (size_t i = 0; i < na; ++i) {
            const uint64_t ai = c_[i];
            if (!ai) continue;
            uint64_t carry;
            for (size_t j = 0; j < nb; ++j) {
                carry = ai * o.c_[j] + r[i + j];
                r[i + j] = static_cast<uint32_t>(carry % mod_);
            }
        }
        return DensePoly1(std::move(r), mod_);
    }
    const size_t n = next_pow2(na + nb - 1);
    std::vector<uint32_t> fa(c_), fb(o.c_);
    fa.resize(n, 0);
    fb.resize(n, 0);
    ntt(fa, mod_, false);
    ntt(fb, mod_, false);
    for (size_t i = 0; i < n; ++i) fa[i] = mul_mod(fa[i], fb[i], mod_);
    ntt(fa, mod_, true);
    fa.resize(na + nb - 1);
    return DensePoly1(std::move(fa), mod_);
}

DensePoly1 inverse_series(const DensePoly1& f, size_t n) {
    if (f.coeff(0) == 0)
        throw std::domain_error("inverse_series: constant term is zero");
    const uint32_t p = f.mod();
    DensePoly1 g = DensePoly1::constant(inv_mod(f.coeff(0), p), p);
    size_t prec = 1;
    while (prec < n) {
        prec = std::min(2 * prec, n);
        // g <- g*(2 - f*g) mod x^prec
        DensePoly1 t = (f.truncated(prec) * g).truncated(prec);
        DensePoly1 two_minus = DensePoly1::constant(2 % p, p) - t;
        g = (g * two_minus).truncated(prec);
    }
    return g;
}

DivModResult divmod(const DensePoly1& a, const DensePoly1& b) {
    a.check_same_mod(b);
    if (b.is_zero()) throw std::domain_error("divmod: division by zero polynomial");
    const uint32_t p = a.mod();
    if (a.degree() < b.degree()) return {DensePoly1(p), a};

    const size_t da = static_cast<size_t>(a.degree());
    const size_t db = static_cast<size_t>(b.degree());
    const size_t dq = da - db;

    if (dq <= kSchoolDivThreshold || db <= kSchoolMulThreshold) {
        std::vector<uint32_t> rem(a.coeffs());
        std::vector<uint32_t> q(dq + 1, 0);
        const uint32_t linv = inv_mod(b.leading(), p);
        for (size_t i = dq + 1; i-- > 0;) {
            uint32_t qi = mul_mod(rem[db + i], linv, p);
            q[i] = qi;
            if (!qi) continue;
            const auto& bc = b.coeffs();
            for (size_t j = 0; j <= db; ++j)
                rem[i + j] = sub_mod(rem[i + j], mul_mod(qi, bc[j], p), p);
        }
        rem.resize(db);
        return {DensePoly1(std::move(q), p), DensePoly1(std::move(rem), p)};
    }

    // Fast division via power series inversion of the reversed divisor.
    DensePoly1 ra = a.reversed(da);
    DensePoly1 rb = b.reversed(db);
    DensePoly1 rq = (ra * inverse_series(rb, dq + 1)).truncated(dq + 1);
    DensePoly1 q = rq.reversed(dq);
    DensePoly1 r = a - b * q;
    assert(r.degree() < b.degree());
    return {std::move(q), std::move(r)};
}

namespace {

// 2x2 matrix of polynomials acting on column vectors (a, b)^T.
struct PolyMat2 {
    DensePoly1 m00, m01, m10, m11;

    static PolyMat2 identity(uint32_t p) {
        DensePoly1 one = DensePoly1::constant(1, p);
        DensePoly1 zero = DensePoly1::zero(p);
        return {one, zero, zero, one};
    }

    bool is_identity() const {
        return m01.is_zero() && m10.is_zero() && m00.degree() == 0 &&
               m11.degree() == 0 && m00.coeff(0) == 1 && m11.coeff(0) == 1;
    }

    PolyMat2 operator*(const PolyMat2& o) const {
        return {m00 * o.m00 + m01 * o.m10, m00 * o.m01 + m01 * o.m11,
                m10 * o.m00 + m11 * o.m10, m10 * o.m01 + m11 * o.m11};
    }

    std::array<DensePoly1, 2> apply(const DensePoly1& a, const DensePoly1& b) const {
        return {m00 * a + m01 * b, m10 * a + m11 * b};
    }

    // [[0,1],[1,-q]] * this
    PolyMat2 quotient_step(const DensePoly1& q) const {
        return {m10, m11, m00 - q * m10, m01 - q * m11};
    }
};

// Half-gcd: returns a unimodular matrix M (product of quotient steps) with
// (a', b') = M (a, b)^T and deg b' < ceil(deg a / 2) <= deg a'.  Unimodularity
// alone guarantees gcd preservation; the recursion on high parts gives the
// subquadratic running time.
PolyMat2 hgcd(const DensePoly1& a, const DensePoly1& b) {
    const uint32_t p = a.mod();
    const int64_t n = a.degree();
    const size_t m = static_cast<size_t>((n + 1) / 2);
    if (b.is_zero() || b.degree() < static_cast<int64_t>(m))
        return PolyMat2::identity(p);

    PolyMat2 M = hgcd(a.shifted_down(m), b.shifted_down(m));
    auto t = M.apply(a, b);
    DensePoly1& c = t[0];
    DensePoly1& d = t[1];
    if (d.is_zero() || d.degree() < static_cast<int64_t>(m)) return M;

    auto qr = divmod(c, d);
    M = M.quotient_step(qr.quotient);
    if (qr.remainder.is_zero()) return M;

    const size_t l = static_cast<size_t>(d.degree());
    const size_t k = 2 * m >= l ? 2 * m - l : 0;
    PolyMat2 S = hgcd(d.shifted_down(k), qr.remainder.shifted_down(k));
    if (S.is_identity()) return M;
    return S * M;
}

DensePoly1 gcd_classical(DensePoly1 a, DensePoly1 b) {
    while (!b.is_zero()) {
        DensePoly1 r = divmod(a, b).remainder;
        a = std::move(b);
        b = std::move(r);
    }
    return a.monic();
}

}  // namespace

uint32_t gcd1_hgcd_threshold() { return g_hgcd_threshold; }
void gcd1_set_hgcd_threshold(uint32_t deg) { g_hgcd_threshold = deg; }

DensePoly1 gcd1(const DensePoly1& a, const DensePoly1& b) {
    a.check_same_mod(b);
    DensePoly1 x = a, y = b;
    if (x.degree() < y.degree()) std::swap(x, y);
    while (!y.is_zero() &&
           x.degree() > static_cast<int64_t>(g_hgcd_threshold)) {
        PolyMat2 M = hgcd(x, y);
        auto t = M.apply(x, y);
        x = std::move(t[0]);
        y = std::move(t[1]);
        if (y.is_zero()) break;
        // one explicit division step guarantees progress past deg(x)/2
        auto qr = divmod(x, y);
        x = std::move(y);
        y = std::move(qr.remainder);
    }
    return gcd_classical(std::move(x), std::move(y));
}

DensePoly1 interpolate(const std::vector<std::pair<uint32_t, uint32_t>>& samples,
                       size_t degree_bound, uint32_t p) {
    if (samples.size() < degree_bound + 1)
        throw std::invalid_argument("interpolate: not enough samples");

    for (size_t i = 0; i < samples.size(); ++i)
        for (size_t j = i + 1; j < samples.size(); ++j)
            if (samples[i].first == samples[j].first)
                throw std::invalid_argument("interpolate: duplicate abscissae");

    // Fast path: abscissae are 1, w, w^2, ..., a full power-of-two coset.
    const size_t n = samples.size();
    if (n >= 2 && (n & (n - 1)) == 0 && samples[0].first == 1 &&
        degree_bound < n) {
        const uint32_t w = samples[1].first;
        bool coset = pow_mod(w, n, p) == 1 && pow_mod(w, n / 2, p) != 1;
        uint32_t t = 1;
        for (size_t i = 0; coset && i < n; ++i) {
            if (samples[i].first != t) coset = false;
            t = mul_mod(t, w, p);
        }
        if (coset) {
            // values are at w^i; if w is the canonical root this is an inverse
            // NTT, otherwise fall through to the generic path.
            uint32_t canonical = root_of_unity(p, log2_exact(n));
            if (w == canonical) {
                std::vector<uint32_t> vals(n);
                for (size_t i = 0; i < n; ++i) vals[i] = samples[i].second;
                DensePoly1 r = interpolate_on_roots(std::move(vals), p);
                if (r.degree() > static_cast<int64_t>(degree_bound))
                    throw std::invalid_argument(
                        "interpolate: samples exceed the degree bound");
                return r;
            }
        }
    }

    // Newton's divided differences over F_p.
    const size_t k = degree_bound + 1;
    std::vector<uint32_t> xs(k), dd(k);
    for (size_t i = 0; i < k; ++i) {
        xs[i] = samples[i].first;
        dd[i] = samples[i].second;
    }
    for (size_t j = 1; j < k; ++j)
        for (size_t i = k; i-- > j;) {
            uint32_t num = sub_mod(dd[i], dd[i - 1], p);
            uint32_t den = sub_mod(xs[i], xs[i - j], p);
            dd[i] = mul_mod(num, inv_mod(den, p), p);
        }
    DensePoly1 r = DensePoly1::constant(dd[k - 1], p);
    for (size_t i = k - 1; i-- > 0;) {
        // r <- r*(x - xs[i]) + dd[i]
        DensePoly1 xminus({neg_mod(xs[i], p), 1}, p);
        r = r * xminus + DensePoly1::constant(dd[i], p);
    }
    // consistency with the remaining samples
    for (size_t i = k; i < samples.size(); ++i)
        if (r.eval(samples[i].first) != samples[i].second)
            throw std::invalid_argument(
                "interpolate: samples exceed the degree bound");
    return r;
}

}  // namespace quadric
