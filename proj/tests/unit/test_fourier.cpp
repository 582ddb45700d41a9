#include <doctest.h>

#include <cmath>

#include "ks/error.hpp"
#include "ks/fourier.hpp"

using namespace ks;

namespace {

// Sum over term pairs of c_j c_k <g_j, g_k>_H in closed form:
// [tj^2 tk^2 / (s^2 (tj^2 + tk^2 - s^2))]^{d/2} exp(-|zj - zk|^2 / (tj^2 + tk^2 - s^2)).
double pairwise_norm_squared(const GaussMixtureFn& f, double sigma) {
    double s2 = sigma * sigma, total = 0;
    double d = static_cast<double>(f.dim);
    for (const auto& a : f.terms)
        for (const auto& b : f.terms) {
            double ta = a.width * a.width, tb = b.width * b.width, beta = ta + tb - s2;
            double dist2 = 0;
            for (std::size_t i = 0; i < f.dim; ++i) dist2 += (a.center[i] - b.center[i]) * (a.center[i] - b.center[i]);
            total += a.coef * b.coef * std::pow(ta * tb / (s2 * beta), d / 2) * std::exp(-dist2 / beta);
        }
    return total;
}

}  // namespace

TEST_CASE("gauss mixture parsing") {
    GaussMixtureFn f = GaussMixtureFn::parse("gm: 1.0@0.3/0.5 + -0.5@0.7/0.5");
    REQUIRE(f.terms.size() == 2);
    CHECK(f.dim == 1);
    CHECK(f.terms[1].coef == -0.5);
    CHECK(f.terms[1].center == std::vector<double>{0.7});
    CHECK(f.terms[1].width == 0.5);
    GaussMixtureFn g = GaussMixtureFn::parse("gm: 2@0.1,0.2/0.4 + 1e-1@0.1,0.2/1");
    CHECK(g.dim == 2);
    CHECK(g.terms[1].coef == 0.1);
    CHECK(g.concentric());
    CHECK_FALSE(f.concentric());
    CHECK(GaussMixtureFn::parse(g.to_string()).to_string() == g.to_string());
    CHECK_THROWS_AS(GaussMixtureFn::parse("1@0/1"), ParseError);
    CHECK_THROWS_AS(GaussMixtureFn::parse("gm: 1@0/0"), ParseError);
    CHECK_THROWS_AS(GaussMixtureFn::parse("gm: 1@0/1 + 1@0,1/1"), ParseError);
    std::vector<double> x{0.3};
    CHECK(f(x) == doctest::Approx(1.0 - 0.5 * std::exp(-0.16 / 0.25)));
}

TEST_CASE("reproducing element has unit norm in every dimension") {
    for (std::size_t d = 1; d <= 3; ++d) {
        GaussMixtureFn f{{GaussTerm{1.0, std::vector<double>(d, 0.2), 0.7}}, d};
        KernelSpec k = KernelSpec::gaussian(0.7);
        CHECK(fourier_rkhs_norm(f, k, FourierMethod::Closed).norm == doctest::Approx(1.0).epsilon(1e-15));
        CHECK(fourier_rkhs_norm(f, k, FourierMethod::Quadrature).norm == doctest::Approx(1.0).epsilon(1e-8));
    }
}

TEST_CASE("single term closed form and quadrature") {
    GaussMixtureFn f{{GaussTerm{1.0, {0.0}, 1.0}}, 1};
    KernelSpec k = KernelSpec::gaussian(0.5);
    FourierNorm c = fourier_rkhs_norm(f, k, FourierMethod::Closed);
    CHECK(c.squared == doctest::Approx(1.511858).epsilon(1e-6));
    CHECK(c.norm == doctest::Approx(1.229576).epsilon(1e-6));
    CHECK(c.squared == doctest::Approx(std::sqrt(1.0 / (0.25 * 1.75))).epsilon(1e-15));
    FourierNorm q = fourier_rkhs_norm(f, k, FourierMethod::Quadrature);
    CHECK(std::fabs(q.norm - c.norm) / c.norm <= 1e-6);
    CHECK(q.intervals > 0);
}

TEST_CASE("divergent integrand gives an infinite norm") {
    GaussMixtureFn f{{GaussTerm{1.0, {0.0}, 0.5}}, 1};
    KernelSpec k = KernelSpec::gaussian(1.0);
    CHECK(std::isinf(fourier_rkhs_norm(f, k, FourierMethod::Closed).norm));
    CHECK(std::isinf(fourier_rkhs_norm(f, k, FourierMethod::Quadrature).norm));
    // 2 tau^2 = sigma^2 up to the rounding of sqrt(2), which lands on the divergent side.
    GaussMixtureFn edge{{GaussTerm{1.0, {0.0}, 1.0}}, 1};
    CHECK(std::isinf(fourier_rkhs_norm(edge, KernelSpec::gaussian(std::sqrt(2.0)), FourierMethod::Closed).norm));
}

TEST_CASE("quadrature matches the pairwise oracle on mixtures") {
    KernelSpec k = KernelSpec::gaussian(0.5);
    for (const char* text : {"gm: 1.0@0.3/0.5 + -0.5@0.7/0.5", "gm: 1@0.2/0.6 + 2@0.5/0.9 + -1@0.9/0.45",
                             "gm: 1@0.5,0.5/0.6 + -0.3@0.5,0.5/1.2", "gm: 1@0,0,0/0.8 + 0.5@0,0,0/0.5"}) {
        CAPTURE(text);
        GaussMixtureFn f = GaussMixtureFn::parse(text);
        double want = pairwise_norm_squared(f, 0.5);
        FourierNorm q = fourier_rkhs_norm(f, k, FourierMethod::Quadrature);
        CHECK(std::fabs(q.squared - want) / want <= 1e-8);
        CHECK(q.error_estimate <= 1e-6 * want);
    }
}

TEST_CASE("unsupported shapes and kernels") {
    GaussMixtureFn two{{GaussTerm{1, {0.0, 0.0}, 1}, GaussTerm{1, {0.5, 0.0}, 1}}, 2};
    KernelSpec g = KernelSpec::gaussian(0.5);
    CHECK_THROWS_AS(fourier_rkhs_norm(two, g, FourierMethod::Quadrature), UnsupportedError);
    CHECK_THROWS_AS(fourier_rkhs_norm(two, g, FourierMethod::Closed), UnsupportedError);
    GaussMixtureFn one{{GaussTerm{1, {0.0}, 1}}, 1};
    CHECK_THROWS_AS(fourier_rkhs_norm(one, KernelSpec::laplace(0.5), FourierMethod::Closed), UnsupportedError);
    GaussMixtureFn four{{GaussTerm{1, {0, 0, 0, 0}, 1}}, 4};
    CHECK_THROWS_AS(fourier_rkhs_norm(four, g, FourierMethod::Quadrature), UnsupportedError);
}

TEST_CASE("quadrature reports missed tolerance") {
    GaussMixtureFn f = GaussMixtureFn::parse("gm: 1@0.1/0.5 + -1@0.9/0.5");
    QuadratureOptions opt;
    opt.max_intervals = 16;
    opt.rel_tol = 1e-15;
    try {
        fourier_rkhs_norm(f, KernelSpec::gaussian(0.5), FourierMethod::Quadrature, opt);
        FAIL("expected AccuracyError");
    } catch (const AccuracyError& e) {
        CHECK(e.estimate() > 0.0);
    }
}

TEST_CASE("width ratio examples") {
    GaussMixtureFn f{{GaussTerm{1.0, {0.0}, 1.0}}, 1};
    WidthRatio r = width_ratio(f, 1.0, 0.5);
    CHECK(r.kind == WidthRatio::Kind::Contained);
    CHECK(r.norm1 == doctest::Approx(1.0));
    CHECK(r.ratio == doctest::Approx(1.229576).epsilon(1e-6));
    CHECK(r.bound == doctest::Approx(1.414214).epsilon(1e-6));
    CHECK(r.ratio <= r.bound);

    GaussMixtureFn narrow{{GaussTerm{1.0, {0.0}, 0.5}}, 1};
    WidthRatio w = width_ratio(narrow, 1.0, 0.5);
    CHECK(w.kind == WidthRatio::Kind::Witness);
    CHECK(std::isinf(w.norm1));
    CHECK(w.norm2 == doctest::Approx(1.0));
    CHECK_THROWS_AS(width_ratio(f, 1.0, 1.5), std::invalid_argument);
}

TEST_CASE("property: finite width ratios respect the bound") {
    for (std::size_t d = 1; d <= 3; ++d)
        for (double tau : {0.75, 1.0, 1.5, 3.0})
            for (double s2 : {0.3, 0.5, 0.9}) {
                GaussMixtureFn f{{GaussTerm{1.0, std::vector<double>(d, 0.0), tau}}, d};
                WidthRatio r = width_ratio(f, 1.0, s2);
                CHECK(r.kind == WidthRatio::Kind::Contained);
                CHECK(r.ratio <= r.bound * (1 + 1e-12));
            }
}
