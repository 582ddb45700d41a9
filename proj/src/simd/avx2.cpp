// AVX2 + FMA variants. Compiled with -mavx2 -mfma; only reached after a
// runtime CPU check in dispatch.cpp.

#include <immintrin.h>

#include "ks/simd.hpp"

namespace ks::simd {

namespace {

struct V {
    __m256d hi;
    __m256d lo;
};

inline V two_sum(__m256d a, __m256d b) {
    __m256d s = _mm256_add_pd(a, b);
    __m256d bb = _mm256_sub_pd(s, a);
    __m256d e = _mm256_add_pd(_mm256_sub_pd(a, _mm256_sub_pd(s, bb)), _mm256_sub_pd(b, bb));
    return {s, e};
}

inline V quick_two_sum(__m256d a, __m256d b) {
    __m256d s = _mm256_add_pd(a, b);
    __m256d e = _mm256_sub_pd(b, _mm256_sub_pd(s, a));
    return {s, e};
}

inline V add(V a, V b) {
    V s = two_sum(a.hi, b.hi);
    V t = two_sum(a.lo, b.lo);
    s.lo = _mm256_add_pd(s.lo, t.hi);
    s = quick_two_sum(s.hi, s.lo);
    s.lo = _mm256_add_pd(s.lo, t.lo);
    return quick_two_sum(s.hi, s.lo);
}

inline V neg(V a) {
    const __m256d sign = _mm256_set1_pd(-0.0);
    return {_mm256_xor_pd(a.hi, sign), _mm256_xor_pd(a.lo, sign)};
}

inline V mul(V a, V b) {
    __m256d p = _mm256_mul_pd(a.hi, b.hi);
    __m256d e = _mm256_fmsub_pd(a.hi, b.hi, p);
    __m256d cross = _mm256_add_pd(_mm256_mul_pd(a.hi, b.lo), _mm256_mul_pd(a.lo, b.hi));
    e = _mm256_add_pd(e, cross);
    return quick_two_sum(p, e);
}

inline V load(const double* h, const double* l) { return {_mm256_loadu_pd(h), _mm256_loadu_pd(l)}; }

inline void store(double* h, double* l, V v) {
    _mm256_storeu_pd(h, v.hi);
    _mm256_storeu_pd(l, v.lo);
}

inline V broadcast(DD a) { return {_mm256_set1_pd(a.hi), _mm256_set1_pd(a.lo)}; }

void rotate_avx2(double* xh, double* xl, double* yh, double* yl, std::size_t n, DD c, DD s) {
    const V vc = broadcast(c);
    const V vs = broadcast(s);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        V x = load(xh + i, xl + i);
        V y = load(yh + i, yl + i);
        V nx = add(mul(vc, x), neg(mul(vs, y)));
        V ny = add(mul(vs, x), mul(vc, y));
        store(xh + i, xl + i, nx);
        store(yh + i, yl + i, ny);
    }
    if (i < n) scalar_kernels().rotate(xh + i, xl + i, yh + i, yl + i, n - i, c, s);
}

DD dot_avx2(const double* xh, const double* xl, const double* yh, const double* yl, std::size_t n) {
    V acc{_mm256_setzero_pd(), _mm256_setzero_pd()};
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) acc = add(acc, mul(load(xh + i, xl + i), load(yh + i, yl + i)));

    alignas(32) double h[4];
    alignas(32) double l[4];
    _mm256_store_pd(h, acc.hi);
    _mm256_store_pd(l, acc.lo);
    DD lane[kLanes] = {{h[0], l[0]}, {h[1], l[1]}, {h[2], l[2]}, {h[3], l[3]}};
    for (; i < n; ++i) {
        DD p = dd::mul(DD{xh[i], xl[i]}, DD{yh[i], yl[i]});
        lane[i % kLanes] = dd::add(lane[i % kLanes], p);
    }
    return dd::add(dd::add(lane[0], lane[1]), dd::add(lane[2], lane[3]));
}

void axpy_avx2(DD a, const double* xh, const double* xl, double* yh, double* yl, std::size_t n) {
    const V va = broadcast(a);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) store(yh + i, yl + i, add(load(yh + i, yl + i), mul(va, load(xh + i, xl + i))));
    if (i < n) scalar_kernels().axpy(a, xh + i, xl + i, yh + i, yl + i, n - i);
}

}  // namespace

const KernelTable& avx2_kernel_table() {
    static const KernelTable table{"avx2", rotate_avx2, dot_avx2, axpy_avx2};
    return table;
}

}  // namespace ks::simd
