#include "quadric/sparse_poly.hpp"

#include <sstream>

namespace quadric {

FpPoly reduce_mod(const RatPoly& a, uint32_t p) {
    FpPoly r(a.nvars());
    for (const auto& [m, c] : a.terms()) {
        mpz_class num = c.get_num(), den = c.get_den();
        mpz_class pz(static_cast<unsigned long>(p));
        mpz_class dmod = den % pz;
        if (dmod == 0)
            throw std::domain_error("reduce_mod: p divides a denominator");
        uint32_t nv = static_cast<uint32_t>(mpz_class(((num % pz) + pz) % pz).get_ui());
        uint32_t dv = static_cast<uint32_t>(mpz_class((dmod + pz) % pz).get_ui());
        r.add_term(m, FpCoeff(mul_mod(nv, inv_mod(dv, p), p), p));
    }
    return r;
}

RatPoly homogenized(const RatPoly& a, unsigned degree) {
    RatPoly r(static_cast<uint8_t>(a.nvars() + 1));
    for (const auto& [m, c] : a.terms()) {
        unsigned d = m.total_degree();
        if (d > degree)
            throw std::domain_error("homogenized: degree below polynomial degree");
        Monomial mm(static_cast<uint8_t>(a.nvars() + 1));
        for (int i = 0; i < a.nvars(); ++i) mm.e[i] = m.e[i];
        mm.e[a.nvars()] = static_cast<uint16_t>(degree - d);
        r.add_term(mm, c);
    }
    return r;
}

RatPoly dehomogenized(const RatPoly& a) {
    if (a.nvars() == 0) return a;
    RatPoly r(static_cast<uint8_t>(a.nvars() - 1));
    for (const auto& [m, c] : a.terms()) {
        Monomial mm(static_cast<uint8_t>(a.nvars() - 1));
        for (int i = 0; i + 1 < a.nvars(); ++i) mm.e[i] = m.e[i];
        r.add_term(mm, c);
    }
    return r;
}

std::complex<double> to_complex(const mpq_class& v) {
    return {v.get_d(), 0.0};
}

std::vector<uint32_t> eval_point_mod_p(const std::vector<RatPoly>& components,
                                       const std::vector<uint32_t>& point,
                                       uint32_t p) {
    std::vector<uint32_t> out;
    out.reserve(components.size());
    for (const auto& comp : components) {
        if (point.size() != comp.nvars())
            throw std::domain_error("eval_point_mod_p: point dimension mismatch");
        uint32_t acc = 0;
        FpPoly f = reduce_mod(comp, p);
        for (const auto& [m, c] : f.terms()) {
            uint32_t t = c.v;
            for (int i = 0; i < f.nvars(); ++i)
                for (unsigned k = 0; k < m.e[i]; ++k) t = mul_mod(t, point[i], p);
            acc = add_mod(acc, t, p);
        }
        out.push_back(acc);
    }
    return out;
}

std::string rat_poly_str(const RatPoly& a) {
    static const std::vector<std::string> names = {"x1", "x2", "x3", "x4", "z"};
    if (a.is_zero()) return "0";
    std::ostringstream os;
    bool first = true;
    // print leading terms first
    for (auto it = a.terms().rbegin(); it != a.terms().rend(); ++it) {
        const auto& [m, c] = *it;
        mpq_class coef = c;
        if (!first) os << (coef > 0 ? " + " : " - ");
        else if (coef < 0) os << "-";
        first = false;
        mpq_class ac = abs(coef);
        bool unit = (ac == 1) && m.total_degree() > 0;
        if (!unit) os << ac.get_str();
        bool any = false;
        for (int i = 0; i < m.nvars; ++i) {
            if (!m.e[i]) continue;
            if (any || !unit) os << "*";
            os << (i < static_cast<int>(names.size()) ? names[i]
                                                      : "v" + std::to_string(i));
            if (m.e[i] > 1) os << "^" << m.e[i];
            any = true;
        }
        if (!any && unit) os << "1";
    }
    return os.str();
}

}  // namespace quadric
