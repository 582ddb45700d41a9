#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <vector>

#include "gen.hpp"
#include "ks/error.hpp"
#include "ks/rkhs.hpp"
#include "oracle.hpp"

using namespace ks;
using oracle::Big;

namespace {

const KernelSpec kG1 = KernelSpec::gaussian(1.0);

DDVector vec(std::initializer_list<double> v) {
    DDVector out(v.size());
    std::size_t i = 0;
    for (double x : v) out.set(i++, DD(x));
    return out;
}

// max over sigma of sigma^T G^{-1} sigma by Gauss-Jordan inversion in 256-bit arithmetic.
Big brute_shatter_oracle(const PointSet& x, const KernelSpec& k) {
    std::size_t n = x.size();
    std::vector<Big> a(n * n), inv(n * n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) {
            a[i * n + j] = Big(k(x[i], x[j]));
            inv[i * n + j] = Big(i == j ? 1.0 : 0.0);
        }
    for (std::size_t c = 0; c < n; ++c) {
        Big p = a[c * n + c];
        for (std::size_t j = 0; j < n; ++j) {
            a[c * n + j] = a[c * n + j] / p;
            inv[c * n + j] = inv[c * n + j] / p;
        }
        for (std::size_t r = 0; r < n; ++r) {
            if (r == c) continue;
            Big f = a[r * n + c];
            for (std::size_t j = 0; j < n; ++j) {
                a[r * n + j] = a[r * n + j] - f * a[c * n + j];
                inv[r * n + j] = inv[r * n + j] - f * inv[c * n + j];
            }
        }
    }
    Big best(0.0);
    for (std::size_t mask = 0; mask < (std::size_t{1} << n); ++mask) {
        Big q(0.0);
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < n; ++j) {
                double si = (mask >> i) & 1 ? -1.0 : 1.0, sj = (mask >> j) & 1 ? -1.0 : 1.0;
                q = q + Big(si * sj) * inv[i * n + j];
            }
        if (best < q) best = q;
    }
    return best;
}

}  // namespace

TEST_CASE("interpolate examples") {
    PointSet one(Domain::unit_cube(1), {0.4});
    Interpolant f = interpolate(one, vec({2.5}), kG1);
    CHECK(f.alphas[0] == DD(2.5));
    std::vector<double> z{0.9};
    CHECK(std::fabs(dd::to_double(f(z) - DD(2.5) * kG1(one[0], z))) <= 1e-30);

    gen::Source src(51);
    PointSet x = src.points(Domain::unit_cube(1), 8);
    GramMatrix g = assemble(x, kG1, Scaling::Unscaled);
    for (std::size_t j = 0; j < 8; j += 3) {
        DDVector col(8);
        for (std::size_t i = 0; i < 8; ++i) col.set(i, g.entries(i, j));
        Interpolant u = interpolate(x, col, kG1);
        for (std::size_t i = 0; i < 8; ++i) CHECK(std::fabs(dd::to_double(u.alphas[i]) - (i == j ? 1.0 : 0.0)) <= 1e-12);
    }
}

TEST_CASE("interpolation recovers a two-center expansion") {
    std::vector<double> c;
    for (std::size_t i = 0; i < 30; ++i) c.push_back(static_cast<double>(i) / 29.0);
    c.push_back(0.3);
    c.push_back(0.7);
    PointSet x(Domain::unit_cube(1), c);
    KernelSpec k = KernelSpec::gaussian(0.1);
    DDVector values(x.size());
    std::vector<double> a{0.3}, b{0.7};
    for (std::size_t i = 0; i < x.size(); ++i) values.set(i, k(x[i], a) + k(x[i], b));
    Interpolant f = interpolate(x, values, k);
    for (std::size_t i = 0; i < x.size(); ++i) {
        double want = i >= 30 ? 1.0 : 0.0;
        CHECK(std::fabs(dd::to_double(f.alphas[i]) - want) <= 1e-12);
    }
}

TEST_CASE("interpolate rank deficiency and automatic ridge") {
    PointSet dup(Domain::unit_cube(1), {0.1, 0.1, 0.5});
    CHECK_THROWS_AS(interpolate(dup, vec({1, 1, 0}), kG1), RankDeficiencyError);
    Interpolant r = interpolate_regularized(dup, vec({1, 1, 0}), kG1);
    CHECK(r.ridge > 0.0);
    CHECK(r.ridge <= 1e-10);
    CHECK(interpolate_regularized(PointSet(Domain::unit_cube(1), {0.1, 0.9}), vec({1, 0}), kG1).ridge == 0.0);
}

TEST_CASE("eval examples") {
    Interpolant zero = expansion(PointSet(Domain::unit_cube(1), {}), DDVector(), kG1);
    std::vector<double> z{0.2};
    CHECK(eval(zero, z) == DD(0.0));
    PointSet x(Domain::unit_cube(1), {0.2, 0.8});
    Interpolant unit = expansion(x, vec({1, 0}), kG1);
    CHECK(eval(unit, z) == DD(1.0));

    gen::Source src(52);
    PointSet c = src.points(Domain::unit_cube(2), 15);
    DDVector a(15);
    for (std::size_t i = 0; i < 15; ++i) a.set(i, src.dd(2));
    KernelSpec k = KernelSpec::gaussian(0.4);
    Interpolant f = expansion(c, a, k);
    for (int t = 0; t < 50; ++t) {
        std::vector<double> p{src.unit(), src.unit()};
        double direct = 0;
        for (std::size_t i = 0; i < 15; ++i) direct += dd::to_double(a[i]) * k.eval_f64(c[i], p);
        CHECK(std::fabs(dd::to_double(eval(f, p)) - direct) <= 1e-12);
    }
}

TEST_CASE("rkhs_norm examples") {
    PointSet one(Domain::unit_cube(1), {0.5});
    CHECK(rkhs_norm(expansion(one, vec({-3.0}), kG1)) == DD(3.0));
    PointSet two(Domain({0.0}, {1.0}), {0.0, 1.0});
    DD n = rkhs_norm(expansion(two, vec({1, 1}), kG1));
    CHECK(oracle::rel_error(n, sqrt(Big(2.0) + Big(2.0) * exp(Big(-1.0)))) <= 1e-30);
    CHECK(dd::to_double(n) == doctest::Approx(1.654013).epsilon(1e-6));
    CHECK(rkhs_norm(expansion(two, vec({0, 0}), kG1)) == DD(0.0));
}

TEST_CASE("property: interpolation is idempotent") {
    gen::Source src(53);
    KernelSpec k = KernelSpec::gaussian(0.3);
    for (int trial = 0; trial < 10; ++trial) {
        PointSet x = src.points(Domain::unit_cube(1), 6 + static_cast<std::size_t>(src.below(8)));
        DDVector v(x.size());
        for (std::size_t i = 0; i < x.size(); ++i) v.set(i, src.dd(1));
        Interpolant f = interpolate(x, v, k);
        Interpolant g = interpolate(x, values_on(f, x), k);
        for (std::size_t t = 0; t <= 100; ++t) {
            std::vector<double> z{static_cast<double>(t) / 100.0};
            double scale = std::max(1.0, std::fabs(dd::to_double(f(z))));
            CHECK(std::fabs(dd::to_double(f(z) - g(z))) <= 1e-16 * scale);
        }
    }
}

TEST_CASE("property: interpolation contracts the rkhs norm") {
    gen::Source src(54);
    KernelSpec k = KernelSpec::gaussian(0.4);
    for (int trial = 0; trial < 20; ++trial) {
        PointSet y = src.points(Domain::unit_cube(1), 10);
        DDVector a(10);
        for (std::size_t i = 0; i < 10; ++i) a.set(i, src.dd(1));
        Interpolant f = expansion(y, a, k);
        std::vector<std::size_t> sub;
        for (std::size_t i = 0; i < 10; ++i)
            if (src.below(2) == 0) sub.push_back(i);
        if (sub.empty()) sub.push_back(0);
        PointSet x = y.subset(sub);
        Interpolant s = interpolate_regularized(x, values_on(f, x), k);
        CHECK(rkhs_norm(s) <= rkhs_norm(f) * DD(1.0 + 1e-20));
    }
}

TEST_CASE("coefficients examples and Parseval") {
    gen::Source src(55);
    PointSet x = src.points(Domain::unit_cube(1), 25);
    EigenSystem es = eig_sym(assemble(x, KernelSpec::gaussian(0.3), Scaling::Operator));
    for (std::size_t k : {0u, 3u, 7u}) {
        std::vector<DD> a = coefficients(es.efunc_values(k), es);
        for (std::size_t i = 0; i < a.size(); ++i) CHECK(std::fabs(dd::to_double(a[i]) - (i == k ? 1.0 : 0.0)) <= 1e-24);
    }
    for (DD a : coefficients(DDVector(25), es)) CHECK(a == DD(0.0));

    DDVector v(25);
    for (std::size_t i = 0; i < 25; ++i) v.set(i, src.dd(1));
    DD lhs(0.0), rhs(0.0);
    for (DD a : coefficients(v, es)) lhs += a * a;
    for (std::size_t i = 0; i < 25; ++i) rhs += v[i] * v[i];
    rhs = rhs / DD(25.0);
    CHECK(std::fabs(dd::to_double(lhs - rhs)) <= 1e-20);
}

TEST_CASE("property: coefficients obey the sqrt(lambda) bound") {
    gen::Source src(56);
    for (int trial = 0; trial < 12; ++trial) {
        std::size_t d = 1 + static_cast<std::size_t>(trial % 2);
        Domain dom = Domain::unit_cube(d);
        KernelSpec k = trial % 3 == 0 ? KernelSpec::imq(0.5, 1.0) : KernelSpec::gaussian(0.4);
        PointSet x = src.points(dom, 30);
        EigenSystem es = eig_sym(assemble(x, k, Scaling::Operator));
        PointSet c = src.points(dom, 1 + static_cast<std::size_t>(src.below(4)));
        DDVector a(c.size());
        for (std::size_t i = 0; i < c.size(); ++i) a.set(i, src.dd(1));
        Interpolant f = expansion(c, a, k);
        double norm = dd::to_double(rkhs_norm(f));
        std::vector<DD> coef = coefficients(values_on(f, x), es);
        for (std::size_t i = 0; i < coef.size(); ++i) {
            double lam = std::max(dd::to_double(es.lambdas[i]), es.floor);
            CHECK(std::fabs(dd::to_double(coef[i])) <= std::sqrt(lam) * norm * (1.0 + 1e-10));
        }
    }
}

TEST_CASE("shattering closed forms") {
    ShatterResult r1 = min_shatter_norm(PointSet(Domain::unit_cube(1), {0.5}), kG1, 1.0);
    CHECK(r1.radius == DD(1.0));
    PointSet two(Domain({0.0}, {1.0}), {0.0, 1.0});
    ShatterResult r2 = min_shatter_norm(two, kG1, 1.0);
    Big want = sqrt(Big(2.0) / (Big(1.0) - exp(Big(-1.0))));
    CHECK(oracle::rel_error(r2.radius, want) <= 1e-30);
    CHECK(dd::to_double(r2.radius) == doctest::Approx(1.778751).epsilon(1e-6));
    CHECK(r2.worst_pattern == std::vector<std::int8_t>{1, -1});
    CHECK(r2.patterns == 2);
    CHECK_FALSE(r2.lower_bound);
}

TEST_CASE("shattering matches a brute-force oracle") {
    gen::Source src(57);
    for (int trial = 0; trial < 8; ++trial) {
        std::size_t n = 2 + static_cast<std::size_t>(src.below(5));
        PointSet x = src.points(Domain::unit_cube(1), n);
        KernelSpec k = KernelSpec::gaussian(0.5);
        double gamma = src.range(0.1, 2.0);
        ShatterResult r = min_shatter_norm(x, k, gamma);
        Big want = Big(gamma) * sqrt(brute_shatter_oracle(x, k));
        CAPTURE(n);
        CHECK(oracle::rel_error(r.radius, want) <= 1e-20);
        CHECK(r.worst_pattern.front() == 1);
    }
}

TEST_CASE("property: shattering radius is linear in gamma and monotone under nesting") {
    gen::Source src(58);
    KernelSpec k = KernelSpec::gaussian(0.6);
    for (int trial = 0; trial < 8; ++trial) {
        PointSet y = src.points(Domain::unit_cube(1), 7);
        double gamma = src.range(0.2, 1.0);
        ShatterResult a = min_shatter_norm(y, k, gamma);
        ShatterResult b = min_shatter_norm(y, k, 2 * gamma);
        CHECK(std::fabs(dd::to_double(b.radius - DD(2.0) * a.radius)) <= 1e-28 * dd::to_double(b.radius));
        PointSet x = y.prefix(4);
        CHECK(min_shatter_norm(x, k, gamma).radius <= a.radius);
    }
}

TEST_CASE("heuristic shattering is a flagged lower bound") {
    PointSet x = gen_grid(Domain::unit_cube(1), 10);
    KernelSpec k = KernelSpec::gaussian(0.5);
    ShatterResult brute = min_shatter_norm(x, k, 0.5);
    ShatterOptions opt;
    opt.mode = ShatterMode::Heuristic;
    opt.seed = 3;
    ShatterResult h = min_shatter_norm(x, k, 0.5, opt);
    CHECK(h.lower_bound);
    CHECK(h.radius <= brute.radius);
    CHECK(dd::to_double(h.radius) >= 0.5 * dd::to_double(brute.radius));
    CHECK(min_shatter_norm(x, k, 0.5, opt).radius == h.radius);

    ShatterOptions small;
    small.brute_limit = 4;
    CHECK_THROWS_AS(min_shatter_norm(x, k, 0.5, small), SizeError);
    PointSet dup(Domain::unit_cube(1), {0.3, 0.3});
    CHECK_THROWS_AS(min_shatter_norm(dup, k, 0.5), RankDeficiencyError);
}
