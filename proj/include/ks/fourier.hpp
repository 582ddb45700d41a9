#pragma once
// RKHS norms of Gaussian mixtures under a Gaussian kernel computed in the
// Fourier domain, and the width-containment ratio between two kernel widths.
//
// With F(g)(w) = (2 pi)^{-d/2} int g(x) exp(-i w.x) dx,
//   |f|_H^2 = (2 pi)^{-d/2} int |F(f)(w)|^2 / F(psi)(w) dw,  psi(x) = exp(-|x|^2/sigma^2).

#include <cstddef>
#include <string>
#include <vector>

#include "ks/kernel.hpp"

namespace ks {

// f(x) = sum_j coef_j exp(-|x - center_j|^2 / width_j^2)
struct GaussTerm {
    double coef = 1.0;
    std::vector<double> center;
    double width = 1.0;
};

struct GaussMixtureFn {
    std::vector<GaussTerm> terms;
    std::size_t dim = 1;

    // "gm: 1.0@0.3/0.5 + -0.5@0.7/0.5" (coef@center/width); centers in d > 1
    // are written as comma lists, "1@0.1,0.2/0.5".
    static GaussMixtureFn parse(const std::string& text);
    std::string to_string() const;

    double operator()(const std::vector<double>& x) const;
    bool concentric() const;
};

enum class FourierMethod { Closed, Quadrature };

struct FourierNorm {
    double norm = 0.0;          // +inf when the integrand diverges
    double squared = 0.0;
    double error_estimate = 0.0;  // absolute, on squared; 0 for the closed form
    std::size_t intervals = 0;
};

struct QuadratureOptions {
    double rel_tol = 1e-8;
    double tail_ratio = 1e-30;  // truncate where the integrand envelope falls below this
    std::size_t max_intervals = 20000;
};

// Closed form needs a single term: |f|^2 = c^2 [tau^4 / (sigma^2 (2 tau^2 - sigma^2))]^{d/2}.
// Quadrature needs d = 1, or a concentric mixture with d <= 3.
// +inf whenever some term has 2 tau^2 <= sigma^2. Throws UnsupportedError for
// a non-gaussian kernel or an unsupported shape, AccuracyError when the
// quadrature misses its tolerance.
FourierNorm fourier_rkhs_norm(const GaussMixtureFn& f, const KernelSpec& k, FourierMethod method,
                              const QuadratureOptions& options = {});

struct WidthRatio {
    enum class Kind { Contained, Witness };
    Kind kind = Kind::Contained;
    double norm1 = 0.0;  // in H_{sigma1}
    double norm2 = 0.0;  // in H_{sigma2}
    double ratio = 0.0;  // norm2 / norm1; +inf for a witness
    double bound = 0.0;  // (sigma2 / sigma1)^{-d/2}
};

// |f|_{H2} / |f|_{H1} for sigma2 < sigma1 with the bound (sigma2/sigma1)^{-d/2}.
// Uses the closed form for single terms and quadrature otherwise. A function
// with |f|_{H1} = inf but |f|_{H2} finite is returned as a Witness.
WidthRatio width_ratio(const GaussMixtureFn& f, double sigma1, double sigma2);

}  // namespace ks
