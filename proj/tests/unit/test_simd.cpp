#include <doctest.h>

#include <cstdlib>
#include <cstring>
#include <string_view>
#include <vector>

#include "gen.hpp"
#include "ks/simd.hpp"
#include "oracle.hpp"

namespace {

struct Vec {
    std::vector<double> hi, lo;
};

Vec random_vec(gen::Source& src, std::size_t n) {
    Vec v;
    for (std::size_t i = 0; i < n; ++i) {
        ks::DD x = src.dd(6);
        v.hi.push_back(x.hi);
        v.lo.push_back(x.lo);
    }
    return v;
}

bool same_bits(const std::vector<double>& a, const std::vector<double>& b) {
    return a.size() == b.size() && std::memcmp(a.data(), b.data(), a.size() * sizeof(double)) == 0;
}

bool same_bits(ks::DD a, ks::DD b) {
    return std::memcmp(&a.hi, &b.hi, sizeof(double)) == 0 && std::memcmp(&a.lo, &b.lo, sizeof(double)) == 0;
}

}  // namespace

TEST_CASE("active table honours KS_SIMD") {
    const char* env = std::getenv("KS_SIMD");
    const auto& active = ks::simd::active();
    if (env != nullptr && std::string_view(env) == "scalar") {
        CHECK(&active == &ks::simd::scalar_kernels());
    } else if (const auto* avx = ks::simd::avx2_kernels()) {
        CHECK(&active == avx);
    } else {
        CHECK(&active == &ks::simd::scalar_kernels());
    }
    MESSAGE("active kernels: " << active.name);
}

TEST_CASE("scalar dot matches the oracle") {
    gen::Source src(11);
    const auto& k = ks::simd::scalar_kernels();
    for (std::size_t n : {0u, 1u, 3u, 4u, 5u, 17u, 64u}) {
        Vec x = random_vec(src, n), y = random_vec(src, n);
        oracle::Big want(0.0);
        for (std::size_t i = 0; i < n; ++i)
            want = want + oracle::Big(ks::DD{x.hi[i], x.lo[i]}) * oracle::Big(ks::DD{y.hi[i], y.lo[i]});
        ks::DD got = k.dot(x.hi.data(), x.lo.data(), y.hi.data(), y.lo.data(), n);
        CAPTURE(n);
        // Absolute against the term scale: signs are mixed, so the sum may cancel.
        CHECK(oracle::abs_error(got, want) <= 1e-28 * (1 << 6) * (1 << 6) * static_cast<double>(n + 1));
    }
}

TEST_CASE("scalar rotate and axpy match the oracle elementwise") {
    gen::Source src(12);
    const auto& k = ks::simd::scalar_kernels();
    std::size_t n = 13;
    Vec x = random_vec(src, n), y = random_vec(src, n);
    Vec x0 = x, y0 = y;
    ks::DD c = src.dd(0), s = src.dd(0);
    k.rotate(x.hi.data(), x.lo.data(), y.hi.data(), y.lo.data(), n, c, s);
    for (std::size_t i = 0; i < n; ++i) {
        oracle::Big bx(ks::DD{x0.hi[i], x0.lo[i]}), by(ks::DD{y0.hi[i], y0.lo[i]});
        oracle::Big wx = oracle::Big(c) * bx - oracle::Big(s) * by;
        oracle::Big wy = oracle::Big(s) * bx + oracle::Big(c) * by;
        double scale = 1e-29 * 4096.0;
        CHECK(oracle::abs_error({x.hi[i], x.lo[i]}, wx) <= scale);
        CHECK(oracle::abs_error({y.hi[i], y.lo[i]}, wy) <= scale);
    }
    Vec z = y0;
    ks::DD a = src.dd(0);
    k.axpy(a, x0.hi.data(), x0.lo.data(), z.hi.data(), z.lo.data(), n);
    for (std::size_t i = 0; i < n; ++i) {
        oracle::Big want = oracle::Big(ks::DD{y0.hi[i], y0.lo[i]}) + oracle::Big(a) * oracle::Big(ks::DD{x0.hi[i], x0.lo[i]});
        CHECK(oracle::abs_error({z.hi[i], z.lo[i]}, want) <= 1e-29 * 4096.0);
    }
}

TEST_CASE("avx2 kernels are bit-identical to scalar") {
    const auto* avx = ks::simd::avx2_kernels();
    if (avx == nullptr) {
        MESSAGE("AVX2 unavailable on this build or CPU; equivalence not exercised");
        return;
    }
    const auto& sc = ks::simd::scalar_kernels();
    gen::Source src(13);
    for (std::size_t n = 0; n <= 67; ++n) {
        CAPTURE(n);
        for (int rep = 0; rep < 8; ++rep) {
            Vec x = random_vec(src, n), y = random_vec(src, n);
            ks::DD c = src.dd(0), s = src.dd(0), a = src.dd(3);

            CHECK(same_bits(sc.dot(x.hi.data(), x.lo.data(), y.hi.data(), y.lo.data(), n),
                            avx->dot(x.hi.data(), x.lo.data(), y.hi.data(), y.lo.data(), n)));

            Vec xs = x, ys = y, xv = x, yv = y;
            sc.rotate(xs.hi.data(), xs.lo.data(), ys.hi.data(), ys.lo.data(), n, c, s);
            avx->rotate(xv.hi.data(), xv.lo.data(), yv.hi.data(), yv.lo.data(), n, c, s);
            CHECK(same_bits(xs.hi, xv.hi));
            CHECK(same_bits(xs.lo, xv.lo));
            CHECK(same_bits(ys.hi, yv.hi));
            CHECK(same_bits(ys.lo, yv.lo));

            Vec zs = y, zv = y;
            sc.axpy(a, x.hi.data(), x.lo.data(), zs.hi.data(), zs.lo.data(), n);
            avx->axpy(a, x.hi.data(), x.lo.data(), zv.hi.data(), zv.lo.data(), n);
            CHECK(same_bits(zs.hi, zv.hi));
            CHECK(same_bits(zs.lo, zv.lo));
        }
    }
}

TEST_CASE("avx2 equivalence survives special values") {
    const auto* avx = ks::simd::avx2_kernels();
    if (avx == nullptr) return;
    const auto& sc = ks::simd::scalar_kernels();
    std::vector<double> xh{0.0, -0.0, 1e300, 1e-300, 5e-324, 1.0, -2.0, 3.0, 0.5};
    std::vector<double> xl(xh.size(), 0.0);
    std::vector<double> yh{1.0, 1e-300, 1e300, -1e-300, 1.0, 0.0, -0.0, 1e10, 7.0};
    std::vector<double> yl(yh.size(), 0.0);
    std::size_t n = xh.size();
    CHECK(same_bits(sc.dot(xh.data(), xl.data(), yh.data(), yl.data(), n),
                    avx->dot(xh.data(), xl.data(), yh.data(), yl.data(), n)));
    auto a1 = xh, a2 = xl, b1 = yh, b2 = yl;
    auto c1 = xh, c2 = xl, d1 = yh, d2 = yl;
    sc.rotate(a1.data(), a2.data(), b1.data(), b2.data(), n, ks::DD(0.6), ks::DD(0.8));
    avx->rotate(c1.data(), c2.data(), d1.data(), d2.data(), n, ks::DD(0.6), ks::DD(0.8));
    CHECK(same_bits(a1, c1));
    CHECK(same_bits(a2, c2));
    CHECK(same_bits(b1, d1));
    CHECK(same_bits(b2, d2));
}
