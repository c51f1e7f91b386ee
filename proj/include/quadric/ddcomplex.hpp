#pragma once

#include <cmath>
#include <complex>

namespace quadric {

/// Double-double real number (~31 significant digits), used only for final
/// residual certification; tracking itself stays in hardware doubles.
struct DD {
    double hi = 0.0;
    double lo = 0.0;

    DD() = default;
    DD(double h) : hi(h), lo(0.0) {}
    DD(double h, double l) : hi(h), lo(l) {}

    double to_double() const { return hi + lo; }
};

namespace dd_detail {

inline DD quick_two_sum(double a, double b) {
    double s = a + b;
    return {s, b - (s - a)};
}

inline DD two_sum(double a, double b) {
    double s = a + b;
    double bb = s - a;
    return {s, (a - (s - bb)) + (b - bb)};
}

inline DD two_prod(double a, double b) {
    double p = a * b;
    return {p, std::fma(a, b, -p)};
}

}  // namespace dd_detail

inline DD operator+(const DD& a, const DD& b) {
    DD s = dd_detail::two_sum(a.hi, b.hi);
    s.lo += a.lo + b.lo;
    return dd_detail::quick_two_sum(s.hi, s.lo);
}

inline DD operator-(const DD& a) { return {-a.hi, -a.lo}; }
inline DD operator-(const DD& a, const DD& b) { return a + (-b); }

inline DD operator*(const DD& a, const DD& b) {
    DD p = dd_detail::two_prod(a.hi, b.hi);
    p.lo += a.hi * b.lo + a.lo * b.hi;
    return dd_detail::quick_two_sum(p.hi, p.lo);
}

inline DD operator/(const DD& a, const DD& b) {
    double q1 = a.hi / b.hi;
    DD r = a - b * DD(q1);
    double q2 = r.hi / b.hi;
    r = r - b * DD(q2);
    double q3 = r.hi / b.hi;
    DD q = dd_detail::quick_two_sum(q1, q2);
    return q + DD(q3);
}

inline DD abs(const DD& a) { return a.hi < 0 ? -a : a; }
inline bool operator<(const DD& a, const DD& b) { return (a - b).hi < 0; }

struct DDComplex {
    DD re, im;

    DDComplex() = default;
    DDComplex(DD r, DD i) : re(r), im(i) {}
    DDComplex(double r) : re(r), im(0.0) {}
    DDComplex(const std::complex<double>& z) : re(z.real()), im(z.imag()) {}

    std::complex<double> to_complex() const {
        return {re.to_double(), im.to_double()};
    }
};

inline DDComplex operator+(const DDComplex& a, const DDComplex& b) {
    return {a.re + b.re, a.im + b.im};
}
inline DDComplex operator-(const DDComplex& a, const DDComplex& b) {
    return {a.re - b.re, a.im - b.im};
}
inline DDComplex operator-(const DDComplex& a) { return {-a.re, -a.im}; }
inline DDComplex operator*(const DDComplex& a, const DDComplex& b) {
    return {a.re * b.re - a.im * b.im, a.re * b.im + a.im * b.re};
}

inline DDComplex conj(const DDComplex& z) { return {z.re, -z.im}; }

inline DDComplex operator/(const DDComplex& a, const DDComplex& b) {
    DD d = b.re * b.re + b.im * b.im;
    DDComplex n = a * conj(b);
    return {n.re / d, n.im / d};
}

/// |z|^2 as a double; adequate for norm comparisons at certificate scale.
inline double abs2(const DDComplex& z) {
    return (z.re * z.re + z.im * z.im).to_double();
}

}  // namespace quadric
