#pragma once
// Experiment runners. Each takes a fully specified config, runs
// deterministically, and returns a Report whose flags compare measured
// quantities with the thresholds echoed in its config.

#include <cstddef>
#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "ks/dd.hpp"
#include "ks/fourier.hpp"
#include "ks/geometry.hpp"
#include "ks/kernel.hpp"
#include "ks/report.hpp"
#include "ks/rkhs.hpp"
#include "ks/spectral.hpp"

namespace ks {

// log lambda_i = a - c i^{1/d} fitted by least squares over the given
// (1-based) indices.
struct DecayFit {
    double a = 0.0;
    double c = 0.0;
    double r2 = 0.0;  // clamped to [0, 1]
    std::size_t d = 1;
    std::size_t first = 0;  // fitted index window
    std::size_t last = 0;
    std::size_t count = 0;

    double envelope(double i) const;  // exp(a - c i^{1/d})
};

// Fits every strictly positive lambda above floor; lambdas[k] is lambda_{k+1}.
// Throws PrecisionError when fewer than 5 qualify.
DecayFit fit_decay(std::span<const double> lambdas, std::size_t d, double floor = 0.0);

struct LineFit {
    double slope = 0.0;
    double intercept = 0.0;
    double r2 = 0.0;
    std::size_t count = 0;
};

// Ordinary least squares y = intercept + slope x; needs >= 2 distinct x.
LineFit fit_line(std::span<const double> x, std::span<const double> y);

// Raises the intercept of fit until exp(a - c i^{1/d}) dominates every
// positive lambda above floor (the slope is kept).
DecayFit lift_envelope(const DecayFit& fit, std::span<const double> lambdas, double floor);

using Thresholds = std::map<std::string, double>;

// Merges overrides into defaults. Throws ParseError on a key the command
// does not define.
Thresholds merge_thresholds(const Thresholds& defaults, const Thresholds& overrides, const std::string& command);

std::vector<double> to_doubles(const std::vector<DD>& v);

// ---------------------------------------------------------------------------

struct SpectrumConfig {
    PointSet points;
    KernelSpec kernel;
    Precision precision = Precision::DoubleDouble;
    Thresholds thresholds;  // overrides of defaults(): fit_r2_min, trace_tol

    static Thresholds defaults(Precision p);
};

// Main table: resolvable eigenvalues (index, i^{1/d}, lambda as hi/lo/f64,
// log10). Extra table "eigs": the full dump including clamped entries.
Report run_spectrum(const SpectrumConfig& cfg);

struct IndependenceConfig {
    KernelSpec kernel;
    Domain domain;
    std::vector<MeasureSpec> measures;
    std::size_t n = 200;
    std::uint64_t seed = 0;
    Thresholds thresholds;  // overrides of defaults(): rate_ratio_max

    static Thresholds defaults();
};

Report run_measure_independence(const IndependenceConfig& cfg);

struct ConcentrationConfig {
    KernelSpec kernel;
    Domain domain;
    MeasureSpec measure;  // sampled twice (or more) per n
    std::vector<std::size_t> ns{50, 100, 200, 400};
    std::size_t trials = 2;
    std::uint64_t seed = 0;
    Thresholds thresholds;  // overrides of defaults(): tail_factor

    static Thresholds defaults();
};

Report run_concentration_compare(const ConcentrationConfig& cfg);

struct InterpConfig {
    KernelSpec kernel;
    Domain domain;
    Interpolant target;  // a kernel expansion with centers in the domain
    std::vector<std::size_t> grid_sizes{5, 9, 17, 33};
    std::size_t probe_per_axis = 1001;
    Thresholds thresholds;  // overrides of defaults(): fit_r2_min, final_err_max

    static Thresholds defaults();
};

Report run_interp_decay(const InterpConfig& cfg);

struct CoeffConfig {
    KernelSpec kernel;
    Domain domain;
    std::vector<MeasureSpec> measures;
    std::size_t n = 100;
    std::size_t targets = 10;
    std::size_t max_terms = 3;
    std::uint64_t seed = 0;
    Thresholds thresholds;  // overrides of defaults(): rel_slack

    static Thresholds defaults();
};

// Random kernel expansions with 1..max_terms terms, used as in-space targets.
std::vector<Interpolant> random_expansions(const KernelSpec& k, const Domain& domain, std::size_t count,
                                           std::size_t max_terms, std::uint64_t seed);

Report run_coeff_decay(const CoeffConfig& cfg);

struct SpanConfig {
    KernelSpec kernel;
    Domain domain;
    MeasureSpec mu;
    MeasureSpec nu;
    std::size_t n = 100;
    std::size_t j_max = 5;
    std::size_t k_check = 20;
    std::uint64_t seed = 0;
    Thresholds thresholds;  // overrides of defaults(): residual_ratio_max

    static Thresholds defaults();
};

Report run_span_invariance(const SpanConfig& cfg);

struct ShatterConfig {
    KernelSpec kernel;
    std::size_t d = 1;
    double gamma = 0.5;
    std::vector<std::size_t> ns{2, 4, 8, 12, 16};
    ShatterOptions options;
    Thresholds thresholds;  // overrides of defaults(): fit_r2_min, closed_form_tol

    static Thresholds defaults();
};

// Points: i/(n-1) on [0,1] in d = 1 (n = 1 at 0.5); an m^d grid of the unit
// cube otherwise, n = m^d.
PointSet shatter_points(std::size_t n, std::size_t d);

Report run_shatter_growth(const ShatterConfig& cfg);

struct GdConfig {
    std::vector<KernelSpec> kernels;  // smooth kernels first, then laplace contrast
    Domain domain;
    std::size_t n = 100;
    enum class Labels { Random, Rkhs } labels = Labels::Random;
    double eta = 0.0;  // 0: per-kernel default
    double stop_loss = 0.1;
    std::size_t max_steps = 100000;
    std::uint64_t seed = 0;
    Thresholds thresholds;  // overrides of defaults(): rkhs_step_ratio_max

    static Thresholds defaults();
};

Report run_gd_capacity(const GdConfig& cfg);

struct WidthConfig {
    std::vector<GaussMixtureFn> functions;
    double sigma1 = 1.0;
    std::vector<double> sigma2s{0.5, 0.7};
    Thresholds thresholds;  // overrides of defaults(): agree_tol, min_compared

    static Thresholds defaults();
};

// Single-term functions in d = 1..3 plus a d = 1 two-center mixture and a
// concentric d = 2 mixture.
std::vector<GaussMixtureFn> default_width_functions();

Report run_width_report(const WidthConfig& cfg);

}  // namespace ks
