#pragma once
// Radial kernels K(x, z) = phi(|x - z|) evaluated in double-double, and
// Gram matrix assembly.

#include <span>
#include <string>

#include "ks/dd.hpp"
#include "ks/geometry.hpp"
#include "ks/matrix.hpp"

namespace ks {

class KernelSpec {
public:
    enum class Family { Gaussian, InverseMultiquadric, Laplace };

    static KernelSpec gaussian(double sigma);
    static KernelSpec imq(double c, double alpha);
    static KernelSpec laplace(double sigma);

    // "gaussian:sigma=0.5", "imq:c=1,alpha=0.5", "laplace:sigma=0.3"
    static KernelSpec parse(const std::string& text);
    std::string to_string() const;

    Family family() const { return family_; }
    double sigma() const { return sigma_; }
    double c() const { return c_; }
    double alpha() const { return alpha_; }

    // Gaussian and IMQ satisfy the analytic smoothness condition; Laplace does not.
    bool smooth() const { return family_ != Family::Laplace; }

    // phi at squared distance r2.
    DD profile(DD r2) const;

    DD operator()(std::span<const double> x, std::span<const double> z) const;
    double eval_f64(std::span<const double> x, std::span<const double> z) const;

    bool operator==(const KernelSpec& o) const {
        return family_ == o.family_ && sigma_ == o.sigma_ && c_ == o.c_ && alpha_ == o.alpha_;
    }

private:
    KernelSpec(Family f, double sigma, double c, double alpha);

    Family family_;
    double sigma_;
    double c_;
    double alpha_;
    DD inv_sigma2_;  // gaussian
    DD inv_sigma_;   // laplace
    DD c2_;          // imq
};

DD kernel_eval(const KernelSpec& k, std::span<const double> x, std::span<const double> z);

// sup_x K(x, x) = phi(0).
double kappa(const KernelSpec& k);

// |x - z|^2 with the differences formed exactly.
DD squared_distance(std::span<const double> x, std::span<const double> z);

enum class Scaling { Unscaled, Operator };

struct GramMatrix {
    DDMatrix entries;
    Scaling scaling = Scaling::Unscaled;
    PointSet points;
    KernelSpec kernel;

    std::size_t size() const { return entries.rows(); }
};

// Upper triangle computed once and mirrored, so the result is exactly symmetric.
GramMatrix assemble(const PointSet& x, const KernelSpec& k, Scaling scaling);

// K(x_i, z) for every i.
DDVector kernel_column(const PointSet& x, const KernelSpec& k, std::span<const double> z);

}  // namespace ks
