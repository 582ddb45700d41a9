#include "ks/simd.hpp"

namespace ks::simd {

namespace {

void rotate_scalar(double* xh, double* xl, double* yh, double* yl, std::size_t n, DD c, DD s) {
    for (std::size_t i = 0; i < n; ++i) {
        DD x{xh[i], xl[i]};
        DD y{yh[i], yl[i]};
        DD nx = dd::sub(dd::mul(c, x), dd::mul(s, y));
        DD ny = dd::add(dd::mul(s, x), dd::mul(c, y));
        xh[i] = nx.hi;
        xl[i] = nx.lo;
        yh[i] = ny.hi;
        yl[i] = ny.lo;
    }
}

DD dot_scalar(const double* xh, const double* xl, const double* yh, const double* yl, std::size_t n) {
    DD lane[kLanes] = {};
    for (std::size_t i = 0; i < n; ++i) {
        DD p = dd::mul(DD{xh[i], xl[i]}, DD{yh[i], yl[i]});
        lane[i % kLanes] = dd::add(lane[i % kLanes], p);
    }
    return dd::add(dd::add(lane[0], lane[1]), dd::add(lane[2], lane[3]));
}

void axpy_scalar(DD a, const double* xh, const double* xl, double* yh, double* yl, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) {
        DD y = dd::add(DD{yh[i], yl[i]}, dd::mul(a, DD{xh[i], xl[i]}));
        yh[i] = y.hi;
        yl[i] = y.lo;
    }
}

}  // namespace

const KernelTable& scalar_kernels() {
    static const KernelTable table{"scalar", rotate_scalar, dot_scalar, axpy_scalar};
    return table;
}

}  // namespace ks::simd
