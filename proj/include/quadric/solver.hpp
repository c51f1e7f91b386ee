#pragma once

#include <Eigen/Dense>
#include <complex>
#include <cstdint>
#include <memory>
#include <vector>

#include "quadric/ddcomplex.hpp"
#include "quadric/sparse_poly.hpp"

namespace quadric {

using Cx = std::complex<double>;
using CxVec = Eigen::VectorXcd;
using CxMat = Eigen::MatrixXcd;

/// Square system of m complex polynomial equations in m unknowns.
class SquareSystem {
public:
    virtual ~SquareSystem() = default;
    virtual int dim() const = 0;
    virtual const std::vector<int>& degrees() const = 0;
    virtual void eval(const CxVec& x, CxVec& out) const = 0;
    virtual void eval_jacobian(const CxVec& x, CxVec& f, CxMat& jac) const = 0;
    /// Sup-norm of the residual re-evaluated in double-double arithmetic.
    virtual double certified_residual(const CxVec& x) const = 0;
    /// Magnitude of the terms feeding the equations at x (sup over equations);
    /// the corrector accepts relative to this scale so that paths escaping to
    /// infinity are not misreported as failures.
    virtual double residual_scale(const CxVec&) const { return 1.0; }

    long long bezout() const;
};

/// Explicit sparse term list per equation.  Coefficients carry double-double
/// precision: iterated maps produce coefficients whose double rounding alone
/// displaces ill-conditioned roots far beyond any tracking tolerance.
struct CxTerm {
    DDComplex coeff;
    std::vector<uint16_t> exps;  // one exponent per unknown
};

class PolySystem final : public SquareSystem {
public:
    PolySystem(int nvars, std::vector<std::vector<CxTerm>> equations);
    static PolySystem from_rat_polys(const std::vector<RatPoly>& eqs,
                                     int nvars);

    int dim() const override { return nvars_; }
    const std::vector<int>& degrees() const override { return degrees_; }
    void eval(const CxVec& x, CxVec& out) const override;
    void eval_jacobian(const CxVec& x, CxVec& f, CxMat& jac) const override;
    double certified_residual(const CxVec& x) const override;
    double residual_scale(const CxVec& x) const override;

    /// Newton polish carrying the point and residual in double-double
    /// precision (Jacobian solves stay in hardware doubles).  Reaches
    /// residuals far below the double rounding floor of large-coefficient
    /// systems; returns the best certified residual and updates the point.
    double newton_polish_dd(CxVec& point, int max_iterations,
                            double tolerance) const;

    /// Residual and Jacobian fully in double-double arithmetic; `jac` is
    /// row-major nvars x nvars.  Backs the double-double path tracker that
    /// rescues paths the hardware-double tracker loses to rounding.
    void eval_jacobian_dd(const std::vector<DDComplex>& x,
                          std::vector<DDComplex>& f,
                          std::vector<DDComplex>& jac) const;

    /// gamma * this + other, used for homotopy diagnostics in tests.
    const std::vector<std::vector<CxTerm>>& equations() const {
        return equations_;
    }

private:
    template <class Scalar>
    Scalar eval_terms(const std::vector<CxTerm>& terms,
                      const std::vector<std::vector<Scalar>>& powers) const;
    template <class Scalar>
    void fill_powers(const CxVec& x,
                     std::vector<std::vector<Scalar>>& powers) const;

    int nvars_;
    std::vector<std::vector<CxTerm>> equations_;
    std::vector<std::vector<std::vector<CxTerm>>> derivatives_;  // [eq][var]
    std::vector<int> degrees_;
    std::vector<int> max_exp_;  // per variable, across the whole system
};

struct TrackSettings {
    double initial_step = 0.05;
    double min_step = 1e-8;
    double corrector_tol = 1e-9;
    int max_corrector_iters = 4;
    double endgame_radius = 1e-2;
    double final_tol = 1e-10;
    double dedup_radius = 1e-6;
    int max_path_steps = 20000;
    double divergence_threshold = 1e8;
    double max_failure_rate = 0.10;
    bool dd_retry = true;  // re-track failed paths in double-double
    int gamma_retries = 3;
    int threads = 1;  // 0 = hardware concurrency

    void validate() const;  // throws std::invalid_argument
};

enum class PathStatus { kConverged, kAtInfinity, kFailed };

struct PathResult {
    CxVec endpoint;
    PathStatus status = PathStatus::kFailed;
    double residual = 0.0;   // double-double certified for converged paths
    double condition = 0.0;  // 1/rcond of the Jacobian at the endpoint
    int multiplicity = 1;    // cluster size among converged endpoints
    int start_index = -1;
    int steps = 0;
    double t_end = 0.0;  // homotopy parameter where tracking stopped
};

struct TrackOutcome {
    std::vector<PathResult> paths;  // ordered by start index
    Cx gamma;
    int converged = 0;
    int at_infinity = 0;
    int failed = 0;
};

/// Total-degree start system x_i^{d_i} - 1 with its full root set.
struct StartData {
    PolySystem system;
    std::vector<CxVec> points;
};
StartData start_system(const std::vector<int>& degrees);

/// Track every start-system root to the target along
/// H(x,t) = (1-t) target + gamma t start, t from 1 to 0.  Retries with a
/// fresh gamma when the failure rate exceeds the configured bound; throws
/// std::runtime_error once retries are exhausted.
TrackOutcome track(const SquareSystem& target, const TrackSettings& settings,
                   uint64_t seed);

struct RefineResult {
    CxVec point;
    double residual = 0.0;
    double condition = 0.0;
    bool singular = false;
    bool linear_rate = false;  // residual contraction stayed far from quadratic
    int iterations = 0;
};
RefineResult refine(const SquareSystem& system, const CxVec& point,
                    int max_iterations, double tolerance);

struct ClusterSet {
    std::vector<std::vector<int>> clusters;  // indices into the input
    std::vector<CxVec> representatives;      // cluster centroids
    bool ambiguous = false;  // two clusters closer than 10x radius
};
ClusterSet dedup(const std::vector<CxVec>& points, double radius);

}  // namespace quadric
