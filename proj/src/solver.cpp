#include "quadric/solver.hpp"

#include <algorithm>
#include <atomic>
#include <type_traits>
#include <cmath>
#include <numbers>
#include <random>
#include <stdexcept>
#include <thread>

namespace quadric {

namespace {

constexpr double kDDUnit = 1.23e-32;  // 2^-106, double-double rounding unit

using DDVec = std::vector<DDComplex>;

bool dd_finite(const DDVec& v) {
    for (const auto& z : v)
        if (!std::isfinite(z.re.hi) || !std::isfinite(z.im.hi)) return false;
    return true;
}

double dd_norm_inf(const DDVec& v) {
    double w = 0.0;
    for (const auto& z : v) w = std::max(w, abs2(z));
    return std::sqrt(w);
}

double dd_norm2(const DDVec& v) {
    double w = 0.0;
    for (const auto& z : v) w += abs2(z);
    return std::sqrt(w);
}

CxVec dd_round(const DDVec& v) {
    CxVec w(static_cast<int>(v.size()));
    for (size_t i = 0; i < v.size(); ++i) w[i] = v[i].to_complex();
    return w;
}

// Gaussian elimination with partial pivoting, A row-major and destroyed,
// b overwritten with the solution.  False on a vanishing or non-finite pivot.
bool gauss_solve_dd(int n, DDVec A, DDVec& b) {
    for (int col = 0; col < n; ++col) {
        int piv = col;
        double best = abs2(A[static_cast<size_t>(col) * n + col]);
        for (int r = col + 1; r < n; ++r) {
            double v = abs2(A[static_cast<size_t>(r) * n + col]);
            if (v > best) {
                best = v;
                piv = r;
            }
        }
        if (!(best > 0.0) || !std::isfinite(best)) return false;
        if (piv != col) {
            for (int c = col; c < n; ++c)
                std::swap(A[static_cast<size_t>(piv) * n + c],
                          A[static_cast<size_t>(col) * n + c]);
            std::swap(b[piv], b[col]);
        }
        DDComplex inv = DDComplex(1.0) / A[static_cast<size_t>(col) * n + col];
        for (int r = col + 1; r < n; ++r) {
            DDComplex factor = A[static_cast<size_t>(r) * n + col] * inv;
            b[r] = b[r] - factor * b[col];
            for (int c = col + 1; c < n; ++c)
                A[static_cast<size_t>(r) * n + c] =
                    A[static_cast<size_t>(r) * n + c] -
                    factor * A[static_cast<size_t>(col) * n + c];
        }
    }
    for (int r = n - 1; r >= 0; --r) {
        DDComplex acc = b[r];
        for (int c = r + 1; c < n; ++c)
            acc = acc - A[static_cast<size_t>(r) * n + c] * b[c];
        b[r] = acc / A[static_cast<size_t>(r) * n + r];
    }
    return dd_finite(b);
}

}  // namespace

long long SquareSystem::bezout() const {
    long long b = 1;
    for (int d : degrees()) b *= d;
    return b;
}

// ---- PolySystem ----------------------------------------------------------

PolySystem::PolySystem(int nvars, std::vector<std::vector<CxTerm>> equations)
    : nvars_(nvars), equations_(std::move(equations)), max_exp_(nvars, 0) {
    if (static_cast<int>(equations_.size()) != nvars_)
        throw std::invalid_argument("PolySystem: system must be square");
    for (const auto& eq : equations_) {
        int d = 0;
        for (const auto& t : eq) {
            if (static_cast<int>(t.exps.size()) != nvars_)
                throw std::invalid_argument("PolySystem: exponent arity");
            int td = 0;
            for (int v = 0; v < nvars_; ++v) {
                td += t.exps[v];
                max_exp_[v] = std::max<int>(max_exp_[v], t.exps[v]);
            }
            d = std::max(d, td);
        }
        if (d < 1)
            throw std::invalid_argument("PolySystem: equation degree < 1");
        degrees_.push_back(d);
    }
    // differentiated term lists, one per (equation, variable)
    derivatives_.resize(nvars_);
    for (int i = 0; i < nvars_; ++i) {
        derivatives_[i].resize(nvars_);
        for (const auto& t : equations_[i])
            for (int j = 0; j < nvars_; ++j) {
                if (!t.exps[j]) continue;
                CxTerm d = t;
                d.coeff = d.coeff * DDComplex(static_cast<double>(t.exps[j]));
                --d.exps[j];
                derivatives_[i][j].push_back(std::move(d));
            }
    }
}

PolySystem PolySystem::from_rat_polys(const std::vector<RatPoly>& eqs,
                                      int nvars) {
    std::vector<std::vector<CxTerm>> equations;
    for (const auto& p : eqs) {
        std::vector<CxTerm> eq;
        for (const auto& [m, c] : p.terms()) {
            CxTerm t;
            // exact two-limb split of the rational coefficient
            double hi = c.get_d();
            double lo = mpq_class(c - hi).get_d();
            t.coeff = DDComplex(dd_detail::two_sum(hi, lo), DD(0.0));
            t.exps.assign(m.e.begin(), m.e.begin() + nvars);
            eq.push_back(std::move(t));
        }
        equations.push_back(std::move(eq));
    }
    return PolySystem(nvars, std::move(equations));
}

template <class Scalar>
void PolySystem::fill_powers(const CxVec& x,
                             std::vector<std::vector<Scalar>>& powers) const {
    powers.resize(nvars_);
    for (int v = 0; v < nvars_; ++v) {
        auto& pw = powers[v];
        pw.assign(max_exp_[v] + 1, Scalar(1.0));
        Scalar base = Scalar(Cx(x[v]));
        for (int e = 1; e <= max_exp_[v]; ++e) pw[e] = pw[e - 1] * base;
    }
}

template <class Scalar>
Scalar PolySystem::eval_terms(
    const std::vector<CxTerm>& terms,
    const std::vector<std::vector<Scalar>>& powers) const {
    Scalar acc(0.0);
    for (const auto& t : terms) {
        Scalar v;
        if constexpr (std::is_same_v<Scalar, Cx>)
            v = t.coeff.to_complex();
        else
            v = t.coeff;
        for (int i = 0; i < nvars_; ++i)
            if (t.exps[i]) v = v * powers[i][t.exps[i]];
        acc = acc + v;
    }
    return acc;
}

void PolySystem::eval(const CxVec& x, CxVec& out) const {
    std::vector<std::vector<Cx>> powers;
    fill_powers(x, powers);
    out.resize(nvars_);
    for (int i = 0; i < nvars_; ++i)
        out[i] = eval_terms(equations_[i], powers);
}

void PolySystem::eval_jacobian(const CxVec& x, CxVec& f, CxMat& jac) const {
    std::vector<std::vector<Cx>> powers;
    fill_powers(x, powers);
    f.resize(nvars_);
    jac.resize(nvars_, nvars_);
    for (int i = 0; i < nvars_; ++i) {
        f[i] = eval_terms(equations_[i], powers);
        for (int j = 0; j < nvars_; ++j)
            jac(i, j) = eval_terms(derivatives_[i][j], powers);
    }
}

double PolySystem::residual_scale(const CxVec& x) const {
    std::vector<std::vector<double>> powers(nvars_);
    for (int v = 0; v < nvars_; ++v) {
        auto& pw = powers[v];
        pw.assign(max_exp_[v] + 1, 1.0);
        double base = std::abs(x[v]);
        for (int e = 1; e <= max_exp_[v]; ++e) pw[e] = pw[e - 1] * base;
    }
    double worst = 0.0;
    for (int i = 0; i < nvars_; ++i) {
        double acc = 0.0;
        for (const auto& t : equations_[i]) {
            double v = std::sqrt(abs2(t.coeff));
            for (int j = 0; j < nvars_; ++j)
                if (t.exps[j]) v *= powers[j][t.exps[j]];
            acc += v;
        }
        worst = std::max(worst, acc);
    }
    return worst;
}

double PolySystem::certified_residual(const CxVec& x) const {
    std::vector<std::vector<DDComplex>> powers;
    fill_powers(x, powers);
    double worst = 0.0;
    for (int i = 0; i < nvars_; ++i)
        worst = std::max(worst,
                         std::sqrt(abs2(eval_terms(equations_[i], powers))));
    return worst;
}

double PolySystem::newton_polish_dd(CxVec& point, int max_iterations,
                                    double tolerance) const {
    // the Jacobian is also solved in double-double: near a nearly degenerate
    // direction of the leading form, cancellation makes the hardware-double
    // Jacobian worthless and Newton would stall far above the rounding floor
    DDVec x(nvars_), f, jac;
    for (int i = 0; i < nvars_; ++i) x[i] = DDComplex(Cx(point[i]));

    eval_jacobian_dd(x, f, jac);
    double res = dd_norm_inf(f);
    DDVec best = x;
    double best_res = res;
    for (int it = 0; it < max_iterations && res > tolerance; ++it) {
        DDVec step = f;
        if (!gauss_solve_dd(nvars_, jac, step)) break;
        // backtrack when the full step leaves the basin; extremely stiff
        // roots have basins much smaller than the first Newton step
        DDVec xn(nvars_);
        double damp = 1.0;
        double rn = res;
        for (int bt = 0; bt < 8; ++bt) {
            for (int i = 0; i < nvars_; ++i)
                xn[i] = x[i] - DDComplex(damp) * step[i];
            if (dd_finite(xn)) {
                DDVec fn, jn;
                eval_jacobian_dd(xn, fn, jn);
                rn = dd_norm_inf(fn);
                if (rn < res || damp < 2e-2) {
                    x = xn;
                    f = std::move(fn);
                    jac = std::move(jn);
                    break;
                }
            }
            damp *= 0.5;
        }
        if (!dd_finite(x)) break;
        res = rn;
        if (res < best_res) {
            best_res = res;
            best = x;
        } else if (res > 10.0 * best_res) {
            break;  // diverging away from the basin
        }
    }
    for (int i = 0; i < nvars_; ++i) point[i] = best[i].to_complex();
    return best_res;
}

void PolySystem::eval_jacobian_dd(const std::vector<DDComplex>& x,
                                  std::vector<DDComplex>& f,
                                  std::vector<DDComplex>& jac) const {
    std::vector<std::vector<DDComplex>> powers(nvars_);
    for (int v = 0; v < nvars_; ++v) {
        auto& pw = powers[v];
        pw.assign(max_exp_[v] + 1, DDComplex(1.0));
        for (int e = 1; e <= max_exp_[v]; ++e) pw[e] = pw[e - 1] * x[v];
    }
    f.resize(nvars_);
    jac.resize(static_cast<size_t>(nvars_) * nvars_);
    for (int i = 0; i < nvars_; ++i) {
        f[i] = eval_terms(equations_[i], powers);
        for (int j = 0; j < nvars_; ++j)
            jac[static_cast<size_t>(i) * nvars_ + j] =
                eval_terms(derivatives_[i][j], powers);
    }
}

// ---- settings ------------------------------------------------------------

void TrackSettings::validate() const {
    auto positive = [](double v) { return v > 0 && std::isfinite(v); };
    if (!positive(initial_step) || !positive(min_step) ||
        !positive(corrector_tol) || !positive(endgame_radius) ||
        !positive(final_tol) || !positive(dedup_radius) ||
        !positive(divergence_threshold) || max_corrector_iters < 1 ||
        max_path_steps < 1 || gamma_retries < 1 || threads < 0)
        throw std::invalid_argument("TrackSettings: fields must be positive");
    if (min_step >= initial_step)
        throw std::invalid_argument("TrackSettings: min step >= initial step");
    if (dedup_radius <= final_tol)
        throw std::invalid_argument(
            "TrackSettings: dedup radius <= final tolerance");
    if (max_failure_rate < 0 || max_failure_rate > 1)
        throw std::invalid_argument("TrackSettings: failure rate bound");
}

// ---- start system --------------------------------------------------------

StartData start_system(const std::vector<int>& degrees) {
    const int n = static_cast<int>(degrees.size());
    std::vector<std::vector<CxTerm>> eqs(n);
    for (int i = 0; i < n; ++i) {
        if (degrees[i] < 1)
            throw std::invalid_argument("start_system: degree < 1");
        CxTerm lead{Cx(1.0), std::vector<uint16_t>(n, 0)};
        lead.exps[i] = static_cast<uint16_t>(degrees[i]);
        CxTerm one{Cx(-1.0), std::vector<uint16_t>(n, 0)};
        eqs[i] = {lead, one};
    }
    PolySystem sys(n, std::move(eqs));

    long long total = sys.bezout();
    std::vector<CxVec> points;
    points.reserve(total);
    std::vector<int> idx(n, 0);
    for (long long k = 0; k < total; ++k) {
        CxVec p(n);
        for (int i = 0; i < n; ++i) {
            double theta = 2.0 * std::numbers::pi * idx[i] / degrees[i];
            p[i] = Cx(std::cos(theta), std::sin(theta));
        }
        points.push_back(std::move(p));
        for (int i = n - 1; i >= 0; --i) {
            if (++idx[i] < degrees[i]) break;
            idx[i] = 0;
        }
    }
    return {std::move(sys), std::move(points)};
}

// ---- tracking ------------------------------------------------------------

namespace {

struct Homotopy {
    const SquareSystem& target;
    const SquareSystem& start;
    Cx gamma;

    // H(x,t) = (1-t) target(x) + gamma t start(x)
    void eval(const CxVec& x, double t, CxVec& h) const {
        CxVec f, g;
        target.eval(x, f);
        start.eval(x, g);
        h = (1.0 - t) * f + (gamma * t) * g;
    }

    // h, dh/dx and dh/dt at (x,t)
    void eval_full(const CxVec& x, double t, CxVec& h, CxMat& hx,
                   CxVec& ht) const {
        CxVec f, g;
        CxMat jf, jg;
        target.eval_jacobian(x, f, jf);
        start.eval_jacobian(x, g, jg);
        h = (1.0 - t) * f + (gamma * t) * g;
        hx = (1.0 - t) * jf + (gamma * t) * jg;
        ht = gamma * g - f;
    }

    // Davidenko derivative dx/dt = -hx^{-1} ht; false when hx is singular.
    bool derivative(const CxVec& x, double t, CxVec& dx) const {
        CxVec h, ht;
        CxMat hx;
        eval_full(x, t, h, hx, ht);
        Eigen::PartialPivLU<CxMat> lu(hx);
        dx = lu.solve(-ht);
        return dx.allFinite();
    }
};

// `budget` caps the total corrector displacement; exceeding it means the
// predictor left the path's basin (likely onto a neighboring path), so the
// step must be rejected and retried smaller.
bool newton_correct(const Homotopy& hom, CxVec& x, double t,
                    const TrackSettings& s, double budget) {
    CxVec h, ht;
    CxMat hx;
    // absolute tolerance, floored at the rounding level of the term
    // magnitudes: far-out (escaping) points can never satisfy a fixed
    // absolute tolerance in double precision
    auto tol = [&](const CxVec& p) {
        double scale = std::max(hom.target.residual_scale(p),
                                hom.start.residual_scale(p));
        return std::max(s.corrector_tol,
                        100.0 * std::numeric_limits<double>::epsilon() * scale);
    };
    double moved = 0.0;
    for (int it = 0; it < s.max_corrector_iters; ++it) {
        hom.eval_full(x, t, h, hx, ht);
        if (h.lpNorm<Eigen::Infinity>() < tol(x)) return true;
        Eigen::PartialPivLU<CxMat> lu(hx);
        CxVec step = lu.solve(h);
        if (!step.allFinite()) return false;
        moved += step.norm();
        if (moved > budget) return false;
        x -= step;
        if (!x.allFinite()) return false;
    }
    hom.eval(x, t, h);
    return h.lpNorm<Eigen::Infinity>() < tol(x);
}

// Homogenization onto a random affine patch: each equation gains the
// homogenizing coordinate as an extra unknown, and the linear patch equation
// sum(patch_j x_j) = 1 closes the system.  Tracking on the patch keeps every
// path bounded; points escaping affine space simply end with a small
// homogenizing coordinate instead of blowing up in double precision.
PolySystem homogenize_with_patch(const PolySystem& sys,
                                 const std::vector<Cx>& patch) {
    const int m = sys.dim();
    std::vector<std::vector<CxTerm>> eqs;
    for (int i = 0; i < m; ++i) {
        int d = sys.degrees()[i];
        std::vector<CxTerm> eq;
        for (const auto& t : sys.equations()[i]) {
            CxTerm nt = t;
            int td = 0;
            for (auto e : t.exps) td += e;
            nt.exps.push_back(static_cast<uint16_t>(d - td));
            eq.push_back(std::move(nt));
        }
        eqs.push_back(std::move(eq));
    }
    std::vector<CxTerm> row;
    for (int j = 0; j <= m; ++j) {
        CxTerm t{patch[j], std::vector<uint16_t>(m + 1, 0)};
        t.exps[j] = 1;
        row.push_back(std::move(t));
    }
    row.push_back({Cx(-1.0), std::vector<uint16_t>(m + 1, 0)});
    eqs.push_back(std::move(row));
    return PolySystem(m + 1, std::move(eqs));
}

// Classify a patched projective endpoint.  The endpoint is first polished on
// the patched system in double-double arithmetic: patch coordinates stay
// bounded, so affine error near a large root shrinks by its norm and the
// polish starts well inside the basin even for very ill-conditioned roots.
// Only then is the point dehomogenized and certified on the affine target.
// A polish that travels far has left its basin (it landed on a neighboring
// root, not the path's own endpoint), so the result is rejected instead of
// being miscounted.
void classify_endpoint(const PolySystem& target, const PolySystem& target_h,
                       const TrackSettings& s, const CxVec& v0,
                       PathResult& r) {
    const int m = target.dim();
    r.endpoint = v0;
    if (!v0.allFinite()) return;  // stays failed
    double xmax = v0.head(m).lpNorm<Eigen::Infinity>();
    if (std::abs(v0[m]) * s.divergence_threshold < xmax || v0[m] == Cx(0.0)) {
        r.status = PathStatus::kAtInfinity;
        return;
    }
    CxVec vp = v0;
    target_h.newton_polish_dd(vp, 40, 0.0);
    if (!vp.allFinite() || (vp - v0).norm() > 1e-2 * v0.norm()) return;
    if (std::abs(vp[m]) * s.divergence_threshold <
            vp.head(m).lpNorm<Eigen::Infinity>() ||
        vp[m] == Cx(0.0)) {
        r.status = PathStatus::kAtInfinity;
        r.endpoint = vp;
        return;
    }
    CxVec cand = vp.head(m) / vp[m];
    CxVec polished = cand;
    double cert = target.newton_polish_dd(polished, 30, 0.1 * s.final_tol);
    r.residual = cert;
    double floor = 1e4 * kDDUnit * target.residual_scale(polished);
    double moved = (polished - cand).norm();
    bool ok = polished.allFinite() && cert < std::max(s.final_tol, floor) &&
              moved < 1e-3 * (1.0 + cand.norm());
    if (ok && floor > s.final_tol) {
        // weak-certificate regime: the rounding floor of the equations is
        // above the final tolerance (coordinates of order 10^2 and beyond),
        // where near-multiple points along asymptotic directions also satisfy
        // the floor-relative certificate.  A genuine zero pins further Newton
        // iterations to rounding level; such a point keeps drifting by orders
        // of magnitude more.
        CxVec vj = vp;
        target_h.newton_polish_dd(vj, 3, 0.0);
        ok = vj.allFinite() && (vj - vp).norm() <= 1e-5 * (1.0 + vp.norm());
    }
    if (ok) {
        r.endpoint = polished;
        r.status = PathStatus::kConverged;
        return;
    }
    r.endpoint = polished.allFinite() ? polished : cand;
}

PathResult track_one(const PolySystem& target, const PolySystem& target_h,
                     const Homotopy& hom, const CxVec& start_point,
                     const TrackSettings& s, int index) {
    PathResult r;
    r.start_index = index;
    CxVec x = start_point;  // patched projective point, m+1 coordinates
    double t = 1.0;
    double h = s.initial_step;
    int clean = 0;

    auto finish = [&](const CxVec& v0) {
        r.t_end = t;
        classify_endpoint(target, target_h, s, v0, r);
        return r;
    };

    auto stall = [&](const CxVec& v) {
        if (t <= s.endgame_radius) return finish(v);
        r.t_end = t;
        r.endpoint = v;
        return r;  // failed well before the end
    };

    while (t > 1e-14) {
        if (++r.steps > s.max_path_steps) return stall(x);
        double step = std::min(h, t);
        if (t <= s.endgame_radius) step = std::min(step, 0.5 * t);

        // RK4 on dx/dt with decreasing t
        CxVec k1, k2, k3, k4;
        bool ok = hom.derivative(x, t, k1) &&
                  hom.derivative(x - 0.5 * step * k1, t - 0.5 * step, k2) &&
                  hom.derivative(x - 0.5 * step * k2, t - 0.5 * step, k3) &&
                  hom.derivative(x - step * k3, t - step, k4);
        CxVec xp;
        if (ok) {
            CxVec move = (step / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
            xp = x - move;
            double budget = 0.5 * move.norm() + 1e-6 * (1.0 + x.norm());
            ok = xp.allFinite() &&
                 newton_correct(hom, xp, t - step, s, budget);
        }
        if (ok) {
            x = xp;
            t -= step;
            if (!x.allFinite() ||
                x.lpNorm<Eigen::Infinity>() > s.divergence_threshold)
                return stall(x);
            if (++clean >= 3) {
                h = std::min(h * 2.0, s.initial_step);
                clean = 0;
            }
        } else {
            h *= 0.5;
            clean = 0;
            if (h < s.min_step) return stall(x);
        }
    }
    return finish(x);
}

// Double-double mirror of Homotopy, for paths the hardware-double tracker
// cannot hold: endpoints whose coordinates are large enough that the double
// rounding floor of the equations swamps the corrector tolerance.
struct HomotopyDD {
    const PolySystem& target;
    const PolySystem& start;
    DDComplex gamma;
    int m;  // patched dimension

    void eval_full(const DDVec& x, double t, DDVec& h, DDVec& hx,
                   DDVec& ht) const {
        DDVec f, g, jf, jg;
        target.eval_jacobian_dd(x, f, jf);
        start.eval_jacobian_dd(x, g, jg);
        DDComplex a(1.0 - t);
        DDComplex b = gamma * DDComplex(t);
        h.resize(m);
        ht.resize(m);
        hx.resize(static_cast<size_t>(m) * m);
        for (int i = 0; i < m; ++i) {
            h[i] = a * f[i] + b * g[i];
            ht[i] = gamma * g[i] - f[i];
        }
        for (size_t k = 0; k < hx.size(); ++k) hx[k] = a * jf[k] + b * jg[k];
    }

    bool derivative(const DDVec& x, double t, DDVec& dx) const {
        DDVec h, hx;
        eval_full(x, t, h, hx, dx);
        for (auto& v : dx) v = -v;
        return gauss_solve_dd(m, std::move(hx), dx);
    }
};

bool newton_correct_dd(const HomotopyDD& hom, DDVec& x, double t,
                       const TrackSettings& s, double budget) {
    DDVec h, hx, ht;
    // near a cluster of m roots colliding at t = 0, the residual scales like
    // dist^m, so a lax tolerance accepts a huge ball around the cluster and
    // paths to close-by simple roots get absorbed; demand the double-double
    // rounding floor instead of the hardware-double corrector tolerance
    auto tol = [&](const DDVec& p) {
        CxVec pd = dd_round(p);
        double scale = std::max(hom.target.residual_scale(pd),
                                hom.start.residual_scale(pd));
        return std::max(s.corrector_tol * 1e-14, 100.0 * kDDUnit * scale);
    };
    double moved = 0.0;
    for (int it = 0; it < s.max_corrector_iters; ++it) {
        hom.eval_full(x, t, h, hx, ht);
        if (dd_norm_inf(h) < tol(x)) return true;
        DDVec step = h;
        if (!gauss_solve_dd(hom.m, std::move(hx), step)) return false;
        moved += dd_norm2(step);
        if (moved > budget) return false;
        for (int i = 0; i < hom.m; ++i) x[i] = x[i] - step[i];
        if (!dd_finite(x)) return false;
    }
    hom.eval_full(x, t, h, hx, ht);
    return dd_norm_inf(h) < tol(x);
}

PathResult track_one_dd(const PolySystem& target, const PolySystem& target_h,
                        const HomotopyDD& hom, const CxVec& start_point,
                        const TrackSettings& s, int index) {
    PathResult r;
    r.start_index = index;
    const int mp = hom.m;
    DDVec x(mp);
    for (int i = 0; i < mp; ++i) x[i] = DDComplex(Cx(start_point[i]));
    double t = 1.0;
    double h = s.initial_step;
    int clean = 0;

    auto finish = [&](const DDVec& v) {
        r.t_end = t;
        classify_endpoint(target, target_h, s, dd_round(v), r);
        return r;
    };
    auto stall = [&](const DDVec& v) {
        if (t <= s.endgame_radius) return finish(v);
        r.t_end = t;
        r.endpoint = dd_round(v);
        return r;  // failed well before the end
    };
    auto shifted = [&](const DDVec& v, const DDVec& k, double c) {
        DDVec w(mp);
        DDComplex cc(c);
        for (int i = 0; i < mp; ++i) w[i] = v[i] - cc * k[i];
        return w;
    };

    // paths into a cluster of m roots that collide at t = 0 spread like
    // t^(1/m); only below t ~ 1e-32 (the double-double rounding unit, where
    // the homotopy becomes indistinguishable from the target) has the spread
    // shrunk enough to separate nearby simple roots from the cluster
    while (t > 1e-32) {
        if (++r.steps > s.max_path_steps) return stall(x);
        double step = std::min(h, t);
        if (t <= s.endgame_radius) step = std::min(step, 0.5 * t);

        DDVec k1, k2, k3, k4;
        bool ok = hom.derivative(x, t, k1) &&
                  hom.derivative(shifted(x, k1, 0.5 * step), t - 0.5 * step,
                                 k2) &&
                  hom.derivative(shifted(x, k2, 0.5 * step), t - 0.5 * step,
                                 k3) &&
                  hom.derivative(shifted(x, k3, step), t - step, k4);
        DDVec xp;
        if (ok) {
            xp.resize(mp);
            DDVec move(mp);
            DDComplex c6(step / 6.0);
            DDComplex two(2.0);
            for (int i = 0; i < mp; ++i) {
                move[i] = c6 * (k1[i] + two * k2[i] + two * k3[i] + k4[i]);
                xp[i] = x[i] - move[i];
            }
            double budget = 0.5 * dd_norm2(move) + 1e-6 * (1.0 + dd_norm2(x));
            ok = dd_finite(xp) && newton_correct_dd(hom, xp, t - step, s,
                                                    budget);
        }
        if (ok) {
            x = std::move(xp);
            t -= step;
            if (!dd_finite(x) || dd_norm_inf(x) > s.divergence_threshold)
                return stall(x);
            if (++clean >= 3) {
                h = std::min(h * 2.0, s.initial_step);
                clean = 0;
            }
        } else {
            h *= 0.5;
            clean = 0;
            if (h < s.min_step) return stall(x);
        }
    }
    return finish(x);
}

TrackOutcome run_paths(const SquareSystem& target, const TrackSettings& s,
                       Cx gamma, std::mt19937_64& rng) {
    StartData start = start_system(target.degrees());
    const int m = target.dim();

    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::vector<Cx> patch(m + 1);
    for (auto& c : patch) {
        double theta = 2.0 * std::numbers::pi * unit(rng);
        c = Cx(std::cos(theta), std::sin(theta));
    }
    const auto* poly = dynamic_cast<const PolySystem*>(&target);
    if (!poly)
        throw std::invalid_argument(
            "track: target must expose explicit terms for homogenization");
    PolySystem target_h = homogenize_with_patch(*poly, patch);
    PolySystem start_h = homogenize_with_patch(start.system, patch);
    Homotopy hom{target_h, start_h, gamma};
    HomotopyDD hom_dd{target_h, start_h, DDComplex(gamma), m + 1};

    std::vector<CxVec> patched;
    patched.reserve(start.points.size());
    for (const auto& v : start.points) {
        CxVec w(m + 1);
        w.head(m) = v;
        w[m] = 1.0;
        Cx pv = 0.0;
        for (int j = 0; j <= m; ++j) pv += patch[j] * w[j];
        patched.push_back(w / pv);
    }

    const int total = static_cast<int>(patched.size());
    TrackOutcome out;
    out.gamma = gamma;
    out.paths.resize(total);

    unsigned want = s.threads ? s.threads : std::thread::hardware_concurrency();
    unsigned nthreads = std::max(1u, std::min<unsigned>(want, total));
    std::atomic<int> next{0};
    auto worker = [&] {
        for (;;) {
            int i = next.fetch_add(1);
            if (i >= total) return;
            out.paths[i] = track_one(*poly, target_h, hom, patched[i], s, i);
            if (out.paths[i].status == PathStatus::kFailed && s.dd_retry) {
                // second pass at double-double precision: paths whose true
                // endpoint is large lose the corrector to the rounding floor
                // of the equations long before t reaches 0
                PathResult rdd =
                    track_one_dd(*poly, target_h, hom_dd, patched[i], s, i);
                if (rdd.status != PathStatus::kFailed) out.paths[i] = rdd;
            }
        }
    };
    if (nthreads == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (unsigned i = 0; i < nthreads; ++i) pool.emplace_back(worker);
        for (auto& th : pool) th.join();
    }

    std::vector<CxVec> converged_pts;
    std::vector<int> converged_idx;
    for (auto& p : out.paths) {
        switch (p.status) {
            case PathStatus::kConverged:
                ++out.converged;
                converged_pts.push_back(p.endpoint);
                converged_idx.push_back(p.start_index);
                break;
            case PathStatus::kAtInfinity: ++out.at_infinity; break;
            case PathStatus::kFailed: ++out.failed; break;
        }
    }
    ClusterSet clusters = dedup(converged_pts, s.dedup_radius);
    for (const auto& cluster : clusters.clusters)
        for (int member : cluster)
            out.paths[converged_idx[member]].multiplicity =
                static_cast<int>(cluster.size());
    return out;
}

}  // namespace

TrackOutcome track(const SquareSystem& target, const TrackSettings& settings,
                   uint64_t seed) {
    settings.validate();
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    for (int attempt = 0; attempt < settings.gamma_retries; ++attempt) {
        // the shared patch row picks up the factor (1 - t) + gamma t in the
        // homotopy, which vanishes only near gamma = -1; keep away from it
        Cx gamma;
        do {
            double theta = 2.0 * std::numbers::pi * unit(rng);
            gamma = Cx(std::cos(theta), std::sin(theta));
        } while (std::abs(gamma + Cx(1.0)) < 0.3);
        TrackOutcome out = run_paths(target, settings, gamma, rng);
        long long total = target.bezout();
        if (out.converged + out.at_infinity + out.failed !=
            static_cast<int>(total))
            throw std::logic_error("track: path count not conserved");
        // floor of one stray path, else tiny systems could never pass
        if (out.failed <=
            std::max(1.0, settings.max_failure_rate * double(total)))
            return out;
    }
    throw std::runtime_error(
        "track: failure rate above bound for every gamma attempt");
}

// ---- refinement ----------------------------------------------------------

RefineResult refine(const SquareSystem& system, const CxVec& point,
                    int max_iterations, double tolerance) {
    RefineResult r;
    r.point = point;
    CxVec f;
    CxMat jac;
    double prev = std::numeric_limits<double>::infinity();
    int slow = 0;
    CxVec best = point;
    double best_res = std::numeric_limits<double>::infinity();
    for (int it = 0; it < max_iterations; ++it) {
        system.eval_jacobian(r.point, f, jac);
        double res = f.lpNorm<Eigen::Infinity>();
        if (res < best_res) {
            best_res = res;
            best = r.point;
        }
        if (res < tolerance) break;
        Eigen::PartialPivLU<CxMat> lu(jac);
        CxVec step = lu.solve(f);
        if (!step.allFinite()) {
            r.singular = true;
            break;
        }
        r.point -= step;
        ++r.iterations;
        // quadratic convergence drives the ratio toward 0; a stable ratio
        // near 1/2 is the linear-rate signature of a multiple root
        if (res < prev && res > 0.05 * prev) ++slow;
        prev = res;
    }
    {
        system.eval(r.point, f);
        if (f.lpNorm<Eigen::Infinity>() > best_res) r.point = best;
    }
    system.eval_jacobian(r.point, f, jac);
    r.residual = f.lpNorm<Eigen::Infinity>();
    Eigen::JacobiSVD<CxMat> svd(jac);
    double smax = svd.singularValues()(0);
    double smin = svd.singularValues()(jac.rows() - 1);
    r.condition = smin > 0 ? smax / smin : std::numeric_limits<double>::infinity();
    // a vanishing Jacobian (relative to its own scale and to unit scale)
    // marks a singular endpoint even when the matrix is well shaped
    if (!std::isfinite(r.condition) || r.condition > 1e12 ||
        smin < 1e-6 * (1.0 + smax))
        r.singular = true;
    if (slow >= 3) r.linear_rate = true;
    return r;
}

// ---- deduplication -------------------------------------------------------

ClusterSet dedup(const std::vector<CxVec>& points, double radius) {
    ClusterSet cs;
    for (size_t i = 0; i < points.size(); ++i) {
        bool placed = false;
        for (size_t c = 0; c < cs.representatives.size(); ++c) {
            if ((points[i] - cs.representatives[c]).norm() < radius) {
                auto& members = cs.clusters[c];
                members.push_back(static_cast<int>(i));
                // running centroid
                CxVec sum = CxVec::Zero(points[i].size());
                for (int m : members) sum += points[m];
                cs.representatives[c] = sum / double(members.size());
                placed = true;
                break;
            }
        }
        if (!placed) {
            cs.clusters.push_back({static_cast<int>(i)});
            cs.representatives.push_back(points[i]);
        }
    }
    for (size_t a = 0; a < cs.representatives.size() && !cs.ambiguous; ++a)
        for (size_t b = a + 1; b < cs.representatives.size(); ++b)
            if ((cs.representatives[a] - cs.representatives[b]).norm() <
                10.0 * radius) {
                cs.ambiguous = true;
                break;
            }
    return cs;
}

}  // namespace quadric
