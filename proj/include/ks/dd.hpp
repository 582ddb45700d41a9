#pragma once
// Double-double arithmetic: a value is the unevaluated sum hi + lo of two
// float64 numbers with |lo| <= ulp(hi)/2, giving ~106 significand bits.
//
// The error-free transforms below require strict IEEE evaluation; the whole
// project is built with -ffp-contract=off so that no multiply-add is fused
// behind our back (the SIMD kernels rely on bit-identical results).

#include <cmath>
#include <cstdint>
#include <string>

namespace ks {

struct DD {
    double hi = 0.0;
    double lo = 0.0;

    constexpr DD() = default;
    constexpr DD(double h) : hi(h), lo(0.0) {}  // NOLINT(implicit)
    constexpr DD(double h, double l) : hi(h), lo(l) {}

    explicit operator double() const { return hi + lo; }
};

namespace dd {

// 2^-104: spacing of the double-double grid relative to hi (without the
// hidden-bit gains of the lo word's sign).
inline constexpr double kEpsilon = 4.93038065763132e-32;

inline constexpr DD kLn2{6.931471805599452862e-01, 2.319046813846299558e-17};
inline constexpr DD kPi{3.141592653589793116e+00, 1.224646799147353207e-16};

enum class Status : unsigned {
    Ok = 0,
    Overflow = 1u << 0,
    Underflow = 1u << 1,
    Domain = 1u << 2,
};

constexpr Status operator|(Status a, Status b) {
    return static_cast<Status>(static_cast<unsigned>(a) | static_cast<unsigned>(b));
}
constexpr Status& operator|=(Status& a, Status b) { return a = a | b; }
constexpr bool any(Status s) { return s != Status::Ok; }

// Error-free transforms.
inline DD two_sum(double a, double b) {
    double s = a + b;
    double bb = s - a;
    double e = (a - (s - bb)) + (b - bb);
    return {s, e};
}

// Requires |a| >= |b| (or a == 0).
inline DD quick_two_sum(double a, double b) {
    double s = a + b;
    double e = b - (s - a);
    return {s, e};
}

inline DD two_prod(double a, double b) {
    double p = a * b;
    double e = std::fma(a, b, -p);
    return {p, e};
}

inline DD add(DD a, DD b) {
    DD s = two_sum(a.hi, b.hi);
    DD t = two_sum(a.lo, b.lo);
    s.lo += t.hi;
    s = quick_two_sum(s.hi, s.lo);
    s.lo += t.lo;
    return quick_two_sum(s.hi, s.lo);
}

inline DD add(DD a, double b) {
    DD s = two_sum(a.hi, b);
    s.lo += a.lo;
    return quick_two_sum(s.hi, s.lo);
}

inline DD neg(DD a) { return {-a.hi, -a.lo}; }

inline DD sub(DD a, DD b) { return add(a, neg(b)); }

inline DD mul(DD a, DD b) {
    DD p = two_prod(a.hi, b.hi);
    p.lo += a.hi * b.lo + a.lo * b.hi;
    return quick_two_sum(p.hi, p.lo);
}

inline DD mul(DD a, double b) {
    DD p = two_prod(a.hi, b);
    p.lo += a.lo * b;
    return quick_two_sum(p.hi, p.lo);
}

inline DD sqr(DD a) {
    DD p = two_prod(a.hi, a.hi);
    p.lo += 2.0 * a.hi * a.lo;
    return quick_two_sum(p.hi, p.lo);
}

// Three-term long division; relative error a few units of 2^-106.
inline DD div(DD a, DD b) {
    double q1 = a.hi / b.hi;
    DD r = sub(a, mul(b, q1));
    double q2 = r.hi / b.hi;
    r = sub(r, mul(b, q2));
    double q3 = r.hi / b.hi;
    DD q = quick_two_sum(q1, q2);
    return add(q, q3);
}

inline DD div(DD a, double b) { return div(a, DD(b)); }

inline DD abs(DD a) { return a.hi < 0.0 || (a.hi == 0.0 && a.lo < 0.0) ? neg(a) : a; }

inline double to_double(DD a) { return a.hi + a.lo; }

inline bool isfinite(DD a) { return std::isfinite(a.hi) && std::isfinite(a.lo); }

inline Status classify(DD a) {
    if (std::isnan(a.hi)) return Status::Domain;
    if (std::isinf(a.hi)) return Status::Overflow;
    return Status::Ok;
}

DD sqrt(DD x);
DD sqrt(DD x, Status& status);

DD exp(DD x);
DD exp(DD x, Status& status);

// Natural logarithm (one Newton step on exp); x > 0.
DD log(DD x);

// x^p for x > 0. Integer p uses repeated squaring, otherwise exp(p log x).
DD pow(DD x, double p);

// log10 as a float64 convenience value; -inf for zero.
double log10(DD x);

// Decimal rendering with `digits` significant digits (diagnostics only).
std::string to_string(DD x, int digits = 32);

// Parses a decimal literal exactly to double-double precision.
DD from_string(const std::string& s);

}  // namespace dd

inline DD operator+(DD a, DD b) { return dd::add(a, b); }
inline DD operator-(DD a, DD b) { return dd::sub(a, b); }
inline DD operator*(DD a, DD b) { return dd::mul(a, b); }
inline DD operator/(DD a, DD b) { return dd::div(a, b); }
inline DD operator-(DD a) { return dd::neg(a); }
inline DD& operator+=(DD& a, DD b) { return a = a + b; }
inline DD& operator-=(DD& a, DD b) { return a = a - b; }
inline DD& operator*=(DD& a, DD b) { return a = a * b; }
inline DD& operator/=(DD& a, DD b) { return a = a / b; }

inline bool operator==(DD a, DD b) { return a.hi == b.hi && a.lo == b.lo; }
inline bool operator!=(DD a, DD b) { return !(a == b); }
inline bool operator<(DD a, DD b) { return a.hi < b.hi || (a.hi == b.hi && a.lo < b.lo); }
inline bool operator>(DD a, DD b) { return b < a; }
inline bool operator<=(DD a, DD b) { return !(b < a); }
inline bool operator>=(DD a, DD b) { return !(a < b); }

}  // namespace ks
