#include <doctest.h>

#include <cmath>

#include "gen.hpp"
#include "ks/error.hpp"
#include "ks/gd.hpp"
#include "ks/spectral.hpp"

using namespace ks;

TEST_CASE("single point follows the scalar recursion") {
    PointSet x(Domain::unit_cube(1), {0.5});
    GdOptions opt;
    opt.eta = 0.25;
    opt.max_steps = 6;
    GdTrajectory t = gd_train(x, {1.0}, KernelSpec::gaussian(0.5), opt);
    CHECK(t.steps[0].norm == DD(0.0));
    CHECK(t.steps[0].loss == 1.0);
    CHECK(t.steps[1].norm == DD(0.5));
    double alpha = 0;
    for (std::size_t s = 1; s < t.steps.size(); ++s) {
        alpha = alpha + 0.5 * (1 - alpha);
        CHECK(dd::to_double(t.steps[s].norm) == doctest::Approx(alpha).epsilon(1e-15));
        CHECK(t.steps[s].loss == doctest::Approx((1 - alpha) * (1 - alpha)).epsilon(1e-14));
    }
    CHECK(t.lambda_max == 1.0);
}

TEST_CASE("step size contract") {
    PointSet x(Domain::unit_cube(1), {0.2, 0.6});
    KernelSpec k = KernelSpec::gaussian(0.5);
    GdOptions opt;
    opt.eta = 10.0;
    CHECK_THROWS_AS(gd_train(x, {1, -1}, k, opt), StepSizeError);
    opt.eta = -1.0;
    CHECK_THROWS_AS(gd_train(x, {1, -1}, k, opt), StepSizeError);
    CHECK_THROWS_AS(gd_train(x, {1}, k), DimensionError);
    GdOptions def;
    def.max_steps = 3;
    GdTrajectory t = gd_train(x, {1, -1}, k, def);
    CHECK(t.eta == doctest::Approx(0.5 / t.lambda_max));
}

TEST_CASE("property: every norm increment stays within its bound") {
    gen::Source src(61);
    for (int trial = 0; trial < 8; ++trial) {
        std::size_t d = 1 + static_cast<std::size_t>(trial % 2);
        PointSet x = src.points(Domain::unit_cube(d), 20);
        std::vector<double> y;
        for (std::size_t i = 0; i < 20; ++i) y.push_back(src.below(2) ? 1.0 : -1.0);
        KernelSpec k = trial % 2 ? KernelSpec::laplace(0.3) : KernelSpec::gaussian(0.3);
        GdOptions opt;
        opt.max_steps = 300;
        GdTrajectory t = gd_train(x, y, k, opt);
        CHECK(t.steps[0].norm == DD(0.0));
        CHECK(t.bound_violations == 0);
        for (const auto& s : t.steps) {
            CHECK(s.within_bound);
            CHECK(s.increment <= s.bound * (1 + opt.bound_slack) + opt.bound_slack * dd::to_double(s.norm));
        }
        for (std::size_t s = 1; s < t.steps.size(); ++s) CHECK(t.steps[s].loss <= t.steps[s - 1].loss);
    }
}

TEST_CASE("stop loss ends the run and records steps to fit") {
    gen::Source src(62);
    PointSet x = src.points(Domain::unit_cube(1), 15);
    std::vector<double> y;
    for (std::size_t i = 0; i < 15; ++i) y.push_back(std::sin(6 * x[i][0]));
    GdOptions opt;
    opt.stop_loss = 0.01;
    GdTrajectory t = gd_train(x, y, KernelSpec::laplace(0.3), opt);
    CHECK(t.converged);
    CHECK(t.steps.back().loss <= 0.01);
    CHECK(t.steps_to_fit == t.steps.size() - 1);
    CHECK(t.steps[t.steps_to_fit - 1].loss > 0.01);
}
