#pragma once
// Double-double vector kernels. Every kernel has a portable scalar reference
// and, on x86-64, an AVX2+FMA variant; the variant is picked once at startup
// from CPUID (override with KS_SIMD=scalar). Both variants perform the same
// IEEE operations in the same order, so their results are bit-identical.

#include <cstddef>
#include <string_view>

#include "ks/dd.hpp"

namespace ks::simd {

// x <- c*x - s*y,  y <- s*x + c*y  (a plane rotation applied to two rows)
using RotateFn = void (*)(double* xh, double* xl, double* yh, double* yl, std::size_t n, DD c, DD s);

// Sum x_i*y_i. Accumulates in kLanes interleaved partial sums (element i goes
// to lane i % kLanes) that are combined as (l0 + l1) + (l2 + l3).
using DotFn = DD (*)(const double* xh, const double* xl, const double* yh, const double* yl,
                     std::size_t n);

// y <- y + a*x
using AxpyFn = void (*)(DD a, const double* xh, const double* xl, double* yh, double* yl,
                        std::size_t n);

inline constexpr std::size_t kLanes = 4;

struct KernelTable {
    std::string_view name;
    RotateFn rotate;
    DotFn dot;
    AxpyFn axpy;
};

const KernelTable& scalar_kernels();

// nullptr when the binary was built without AVX2 support or the CPU lacks it.
const KernelTable* avx2_kernels();

// The table chosen for this process.
const KernelTable& active();

}  // namespace ks::simd
