#pragma once
// Symmetric eigensolvers (cyclic Jacobi in double-double and float64),
// Cholesky solves, Nystrom extension and column-subset low-rank
// approximations of kernel matrices.

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "ks/dd.hpp"
#include "ks/geometry.hpp"
#include "ks/kernel.hpp"
#include "ks/matrix.hpp"

namespace ks {

enum class Precision { DoubleDouble, Float64 };

const char* to_string(Precision p);

// Smallest eigenvalue magnitude treated as resolved: 1e-30 kappa in
// double-double, 10 * 2^-52 * kappa in float64.
double precision_floor(Precision p, double kappa);

struct JacobiOptions {
    bool vectors = true;
    int max_sweeps = 60;
    // Acceptable off-diagonal Frobenius norm relative to |A|_F if the sweep
    // cap is reached before a rotation-free sweep.
    double off_tolerance = 1e-28;
};

// Eigenvalues in descending order; vectors.row(k) is the unit eigenvector of
// values[k] with its largest-magnitude component positive.
struct SymmetricEigen {
    std::vector<DD> values;
    DDMatrix vectors;
    int sweeps = 0;
    double off_norm = 0.0;
};

// Throws ConvergenceError when the cap is hit with the off-norm above tolerance.
SymmetricEigen jacobi_eigen(DDMatrix a, const JacobiOptions& options = {});

struct SymmetricEigenF64 {
    std::vector<double> values;
    std::vector<double> vectors;  // row-major n x n, row k = eigenvector k
    int sweeps = 0;
    double off_norm = 0.0;
};

SymmetricEigenF64 jacobi_eigen_f64(std::vector<double> a, std::size_t n, const JacobiOptions& options = {});

// Spectrum of the operator-scaled kernel matrix on an empirical measure.
struct EigenSystem {
    std::vector<DD> lambdas;             // descending; clamped ones are 0
    std::vector<std::uint8_t> clamped;   // 1 where |lambda| fell below floor
    DDMatrix efuncs;                     // row k: e_k(x_i), (1/n) sum_i e_k(x_i)^2 = 1; empty if values only
    PointSet points;
    KernelSpec kernel;
    double floor = 0.0;
    Precision precision = Precision::DoubleDouble;
    int sweeps = 0;
    double off_norm = 0.0;

    std::size_t size() const { return lambdas.size(); }
    std::size_t resolvable() const;
    DD efunc(std::size_t k, std::size_t i) const { return efuncs(k, i); }
    DDVector efunc_values(std::size_t k) const;
};

EigenSystem eig_sym(const GramMatrix& a, Precision precision = Precision::DoubleDouble,
                    const JacobiOptions& options = {});

// e(z) = (1/lambda) (1/n) sum_i K(x_i, z) e(x_i), stored as weights
// beta_i = e(x_i) / (lambda n).
struct NystromFunction {
    DD lambda;
    DDVector weights;
    PointSet centers;
    KernelSpec kernel;

    DD operator()(std::span<const double> z) const;
    // beta^T G beta, which equals 1/lambda.
    DD rkhs_norm_squared() const;
};

// Throws PrecisionError when lambda_k is at or below the floor.
NystromFunction nystrom(const EigenSystem& es, std::size_t k);

class Cholesky {
public:
    // Factors g + ridge I. Pivots at or below the arithmetic resolution throw
    // RankDeficiencyError.
    Cholesky(const DDMatrix& g, double ridge);

    std::size_t size() const { return l_.rows(); }
    DDVector solve(const DDVector& b) const;
    // L^{-1} b
    DDVector forward(const DDVector& b) const;
    // b^T (G + ridge I)^{-1} b = |L^{-1} b|^2
    DD inverse_quadratic(const DDVector& b) const;

private:
    DDMatrix l_;   // lower factor, row-major
    DDMatrix lt_;  // its transpose, for the backward sweep
};

struct SpdSolve {
    DDVector x;
    double residual_inf = 0.0;  // |G x - b|_inf without the ridge
    double ridge = 0.0;
};

SpdSolve solve_spd(const GramMatrix& g, const DDVector& b, double ridge = 0.0);

// Relative pivot tolerance used by the Cholesky-type routines.
inline constexpr double kPivotTolerance = 16.0 * dd::kEpsilon;

// A_m = (1/n) C W^{-1} C^T for C = K(X, X_piv), W = K(X_piv, X_piv), formed
// as a partial Cholesky factorization in pivot order. Returns an n x n
// operator-scaled matrix. Throws RankDeficiencyError if W is numerically
// singular.
DDMatrix nystrom_lowrank(const PointSet& x, const KernelSpec& k, std::span<const std::size_t> pivots);

// Greedy (largest residual diagonal first) pivot order; stops early once the
// residual diagonal falls to rel_tol * kappa.
std::vector<std::size_t> greedy_pivots(const PointSet& x, const KernelSpec& k, std::size_t max_rank,
                                       double rel_tol = kPivotTolerance);

// Largest |eigenvalue| of a symmetric matrix.
DD opnorm(const DDMatrix& a);

}  // namespace ks
