#pragma once
// Kernel expansions f = sum_i alpha_i K(x_i, .): the interpolation operator
// S_X, RKHS norms, eigen-coefficients, and minimum-norm shattering radii.

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "ks/dd.hpp"
#include "ks/geometry.hpp"
#include "ks/kernel.hpp"
#include "ks/matrix.hpp"
#include "ks/spectral.hpp"

namespace ks {

// A kernel expansion. Produced by interpolate(), or built directly to
// describe a target function in the RKHS.
struct Interpolant {
    DDVector alphas;
    PointSet centers;
    KernelSpec kernel;
    double ridge = 0.0;
    double residual_inf = 0.0;  // |G alpha - values|_inf at interpolation time

    DD operator()(std::span<const double> z) const;
};

Interpolant expansion(PointSet centers, const DDVector& coefs, const KernelSpec& k);

// S_X f from its values on X: alpha = (G + ridge I)^{-1} values with the
// unscaled Gram G. Throws RankDeficiencyError if G is numerically singular.
Interpolant interpolate(const PointSet& x, const DDVector& values, const KernelSpec& k, double ridge = 0.0);

// As interpolate(), but on rank deficiency retries with ridge
// start * maxdiag, 10x larger each time, up to max_ridge * maxdiag.
Interpolant interpolate_regularized(const PointSet& x, const DDVector& values, const KernelSpec& k,
                                    double start = 1e-30, double max_ridge = 1e-10);

DD eval(const Interpolant& f, std::span<const double> z);
DD eval(const NystromFunction& f, std::span<const double> z);

// f evaluated at every point of x.
DDVector values_on(const Interpolant& f, const PointSet& x);

// sqrt(alpha^T G alpha). Throws ConsistencyError if the quadratic form is
// below -1e-24.
DD rkhs_norm(const Interpolant& f);

// a_i = (1/n) sum_j values_j e_i(x_j).
std::vector<DD> coefficients(const DDVector& values, const EigenSystem& es);

enum class ShatterMode { Brute, Heuristic };

struct ShatterResult {
    DD radius;                       // gamma * sqrt(max sigma^T G^{-1} sigma)
    std::vector<std::int8_t> worst_pattern;
    double gamma = 0.0;
    std::size_t n = 0;
    std::size_t patterns = 0;        // patterns evaluated
    bool lower_bound = false;        // heuristic mode: radius is only a lower bound
};

struct ShatterOptions {
    ShatterMode mode = ShatterMode::Brute;
    std::size_t brute_limit = 20;
    std::size_t random_patterns = 512;  // heuristic mode
    std::uint64_t seed = 0;
};

// Minimum RKHS radius realizing f(x_i) = sigma_i gamma for every sign
// pattern (thresholds fixed at 0). Patterns are canonicalized with
// sigma_1 = +1 since sigma and -sigma need the same radius; ties go to the
// lexicographically smallest pattern with '+' before '-'.
ShatterResult min_shatter_norm(const PointSet& x, const KernelSpec& k, double gamma,
                               const ShatterOptions& options = {});

}  // namespace ks
